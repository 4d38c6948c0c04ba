#include "mmw/rates.hpp"

#include <cmath>

#include "mmw/error.hpp"

namespace mmw {

RateTable::RateTable(std::vector<double> per_state) : rates_(std::move(per_state)) {
  if (rates_.empty()) throw ValidationError("rate table needs at least one state");
  if (rates_.front() != 0.0) throw ValidationError("outage rate must be 0");
  for (std::size_t i = 0; i < rates_.size(); ++i) {
    if (!std::isfinite(rates_[i]) || rates_[i] < 0.0)
      throw ValidationError("rates must be finite and nonnegative");
    if (i > 0 && rates_[i] < rates_[i - 1])
      throw ValidationError("rates must be nondecreasing in channel quality");
  }
}

}  // namespace mmw
