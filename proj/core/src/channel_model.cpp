#include "mmw/channel_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include <Eigen/Dense>

#include "mmw/error.hpp"

namespace mmw {
namespace {

void check_probability_vector(std::span<const double> v, const char* what) {
  double sum = 0.0;
  for (double x : v) {
    if (!(x >= 0.0) || !std::isfinite(x))
      throw ValidationError(std::string(what) + ": entries must be finite and >= 0");
    sum += x;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw ValidationError(std::string(what) + ": entries must sum to 1");
}

}  // namespace

ChannelMatrix::ChannelMatrix(std::size_t k, std::vector<double> row_major)
    : k_(k), p_(std::move(row_major)) {
  if (k_ == 0) throw ValidationError("channel matrix needs at least one state");
  if (p_.size() != k_ * k_)
    throw ValidationError("channel matrix: expected " + std::to_string(k_ * k_) +
                          " entries, got " + std::to_string(p_.size()));
  for (std::size_t i = 0; i < k_; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < k_; ++j) {
      double x = p_[i * k_ + j];
      if (!std::isfinite(x) || x < 0.0 || x > 1.0)
        throw ValidationError("channel matrix: entry (" + std::to_string(i) + "," +
                              std::to_string(j) + ") outside [0,1]");
      sum += x;
    }
    if (std::abs(sum - 1.0) > kRenormalizeTolerance)
      throw ValidationError("channel matrix: row " + std::to_string(i) +
                            " does not sum to 1");
    for (std::size_t j = 0; j < k_; ++j) p_[i * k_ + j] /= sum;
  }
}

ChannelMatrix ChannelMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  std::vector<double> flat;
  for (const auto& r : rows) {
    if (r.size() != rows.size()) throw ValidationError("channel matrix must be square");
    flat.insert(flat.end(), r.begin(), r.end());
  }
  return ChannelMatrix(rows.size(), std::move(flat));
}

ChannelMatrix ChannelMatrix::identity(std::size_t k) {
  std::vector<double> p(k * k, 0.0);
  for (std::size_t i = 0; i < k; ++i) p[i * k + i] = 1.0;
  return ChannelMatrix(k, std::move(p));
}

std::uint64_t ChannelMatrix::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&h](const char* s) {
    for (; *s; ++s) {
      h ^= static_cast<unsigned char>(*s);
      h *= 0x100000001b3ULL;
    }
  };
  char buf[40];
  std::snprintf(buf, sizeof buf, "%zu;", k_);
  feed(buf);
  for (double x : p_) {
    std::snprintf(buf, sizeof buf, "%.17g,", x);
    feed(buf);
  }
  return h;
}

ChannelMatrix channel_preset(std::string_view name) {
  if (name == "urban-nlos-dominant") {
    return ChannelMatrix::from_rows({{0.55, 0.30, 0.15},
                                     {0.01, 0.80, 0.19},
                                     {0.38, 0.40, 0.22}});
  }
  throw ValidationError("unknown channel preset '" + std::string(name) + "'");
}

std::vector<std::string> channel_preset_names() { return {"urban-nlos-dominant"}; }

std::vector<double> steady_state(const ChannelMatrix& p) {
  const auto k = static_cast<Eigen::Index>(p.states());
  if (k == 1) return {1.0};

  Eigen::MatrixXd generator(k, k);  // P^T - I
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < k; ++j) generator(j, i) = p(i, j) - (i == j ? 1.0 : 0.0);

  Eigen::FullPivLU<Eigen::MatrixXd> lu(generator);
  lu.setThreshold(1e-12);
  if (lu.rank() < k - 1)
    throw DegeneracyError("channel matrix has no unique stationary distribution");

  Eigen::MatrixXd a(k + 1, k);
  a.topRows(k) = generator;
  a.row(k).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(k + 1);
  b(k) = 1.0;
  Eigen::VectorXd pi = a.colPivHouseholderQr().solve(b);

  std::vector<double> out(static_cast<std::size_t>(k));
  double sum = 0.0;
  for (Eigen::Index i = 0; i < k; ++i) {
    out[static_cast<std::size_t>(i)] = std::max(0.0, pi(i));
    sum += out[static_cast<std::size_t>(i)];
  }
  for (double& x : out) x /= sum;
  return out;
}

CalibrationResult calibrate_matrix(const CalibrationTargets& targets) {
  const std::size_t k = targets.pi_target.size();
  if (k == 0 || targets.t_avg.size() != k)
    throw ValidationError("calibration targets: pi_target and t_avg must have equal, nonzero length");
  check_probability_vector(targets.pi_target, "calibration pi_target");
  for (double t : targets.t_avg)
    if (!(t >= 1.0)) throw ValidationError("calibration t_avg entries must be >= 1");

  if (k == 1) return {ChannelMatrix(1, {1.0}), std::pow(1.0 / targets.t_avg[0], 2), 0.0};

  const auto n = static_cast<Eigen::Index>(k * k);
  const auto kk = static_cast<Eigen::Index>(k);
  auto var = [k](std::size_t i, std::size_t j) { return static_cast<Eigen::Index>(i * k + j); };

  Eigen::VectorXd diag_target = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd on_diag = Eigen::VectorXd::Zero(n);
  for (std::size_t i = 0; i < k; ++i) {
    diag_target(var(i, i)) = 1.0 - 1.0 / targets.t_avg[i];
    on_diag(var(i, i)) = 1.0;
  }

  // Equality constraints: unit row sums, then pi P = pi.
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2 * kk, n);
  Eigen::VectorXd b(2 * kk);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) a(static_cast<Eigen::Index>(i), var(i, j)) = 1.0;
    b(static_cast<Eigen::Index>(i)) = 1.0;
  }
  for (std::size_t j = 0; j < k; ++j) {
    for (std::size_t i = 0; i < k; ++i)
      a(kk + static_cast<Eigen::Index>(j), var(i, j)) = targets.pi_target[i];
    b(kk + static_cast<Eigen::Index>(j)) = targets.pi_target[j];
  }

  // ADMM on min f(x) s.t. Ax = b (x-block) and z >= 0 (z-block), x = z.
  const double rho = 1.0;
  Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + 2 * kk, n + 2 * kk);
  kkt.topLeftCorner(n, n) = (2.0 * on_diag + rho * Eigen::VectorXd::Ones(n)).asDiagonal();
  kkt.topRightCorner(n, 2 * kk) = a.transpose();
  kkt.bottomLeftCorner(2 * kk, n) = a;
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> solver(kkt);

  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) z(var(i, j)) = targets.pi_target[j];

  Eigen::VectorXd rhs(n + 2 * kk);
  for (int iter = 0; iter < 200000; ++iter) {
    rhs.head(n) = 2.0 * diag_target + rho * (z - u);
    rhs.tail(2 * kk) = b;
    x = solver.solve(rhs).head(n);
    Eigen::VectorXd z_prev = z;
    z = (x + u).cwiseMax(0.0);
    u += x - z;
    double primal = (x - z).lpNorm<Eigen::Infinity>();
    double dual = rho * (z - z_prev).lpNorm<Eigen::Infinity>();
    if (primal < 1e-13 && dual < 1e-13) break;
  }

  std::vector<double> flat(z.data(), z.data() + n);
  double residual = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < k; ++j) s += flat[i * k + j];
    residual = std::max(residual, std::abs(s - 1.0));
  }
  for (std::size_t j = 0; j < k; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < k; ++i) s += targets.pi_target[i] * flat[i * k + j];
    residual = std::max(residual, std::abs(s - targets.pi_target[j]));
  }
  if (residual > 1e-9)
    throw CalibrationError("calibration did not satisfy stationarity and stochasticity", residual);

  ChannelMatrix m(k, std::move(flat));
  double objective = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    double d = m(i, i) - diag_target(var(i, i));
    objective += d * d;
  }
  return {std::move(m), objective, residual};
}

ChannelState sample_state(std::span<const double> probs, double u) {
  double acc = 0.0;
  std::size_t last = 0;
  for (std::size_t j = 0; j < probs.size(); ++j) {
    if (probs[j] <= 0.0) continue;
    acc += probs[j];
    last = j;
    if (u < acc) return ChannelState(static_cast<int>(j));
  }
  return ChannelState(static_cast<int>(last));
}

ChannelState sample_transition(ChannelState current, const ChannelMatrix& p, double u) {
  if (current.index() >= p.states()) throw ValidationError("channel state out of range");
  return sample_state(p.row(current.index()), u);
}

double holding_time_mean(const ChannelMatrix& p, ChannelState k) {
  if (k.index() >= p.states()) throw ValidationError("channel state out of range");
  double stay = p(k.index(), k.index());
  if (stay >= 1.0) throw DegeneracyError("absorbing channel state has no finite holding time");
  return 1.0 / (1.0 - stay);
}

}  // namespace mmw
