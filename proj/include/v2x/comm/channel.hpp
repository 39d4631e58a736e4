#pragma once

#include <limits>
#include <vector>

#include "v2x/comm/message.hpp"

namespace v2x {

inline constexpr double kDefaultFrequencyHz = 2.0;

struct ChannelBudget {
  double bytes_per_second = std::numeric_limits<double>::infinity();
  double frequency_hz = kDefaultFrequencyHz;

  void validate() const;
  double bytes_per_frame() const { return bytes_per_second / frequency_hz; }
};

// Sum of payload bytes per frame times the frequency.
double bps(const std::vector<V2XMessage>& frame, double frequency_hz = kDefaultFrequencyHz);

// Keeps, message by message, the highest-score queries that still fit in the
// per-frame byte allowance (ties to the lower index; survivors keep their
// original order), then keeps each occupancy grid only if it fits whole.
std::vector<V2XMessage> constrain(const std::vector<V2XMessage>& frame, const ChannelBudget& budget);

}  // namespace v2x
