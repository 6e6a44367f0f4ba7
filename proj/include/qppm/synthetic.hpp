#pragma once

// Seeded generator for a small fine-management style event log. Arrivals
// alternate between busy and quiet periods, and the branch taken after the
// notification step depends on the load at that time, so next-activity
// labels carry an inter-case signal that a single trace cannot see.

#include <cstdint>

#include "qppm/eventlog.hpp"

namespace qppm::synthetic {

struct SyntheticConfig {
    std::size_t cases = 600;
    std::uint64_t seed = 1;
    /// Length of one busy-or-quiet arrival period.
    double period_days = 14.0;
    /// Mean arrivals per day in busy and quiet periods.
    double busy_rate = 12.0;
    double quiet_rate = 2.0;
    /// Probability that the load decides the post-notification branch.
    double load_signal = 0.85;
    std::size_t officers = 8;
};

[[nodiscard]] eventlog::EventLog generate(const SyntheticConfig &cfg);

} // namespace qppm::synthetic
