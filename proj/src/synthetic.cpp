#include "qppm/synthetic.hpp"

#include <chrono>
#include <cmath>
#include <random>
#include <vector>

#include "qppm/error.hpp"

namespace qppm::synthetic {
namespace {

using namespace std::chrono;

class Periods {
  public:
    Periods(double length, std::uint64_t seed) : length_(length), rng_(seed) {}

    bool busy(double day) {
        const auto idx = static_cast<std::size_t>(std::floor(day / length_));
        while (flags_.size() <= idx) {
            flags_.push_back(std::bernoulli_distribution(0.5)(rng_));
        }
        return flags_[idx];
    }
    [[nodiscard]] double next_boundary(double day) const {
        return (std::floor(day / length_) + 1.0) * length_;
    }

  private:
    double length_;
    std::mt19937_64 rng_;
    std::vector<bool> flags_;
};

} // namespace

eventlog::EventLog generate(const SyntheticConfig &cfg) {
    if (cfg.period_days <= 0.0 || cfg.busy_rate <= 0.0 || cfg.quiet_rate <= 0.0 || cfg.officers == 0) {
        throw ConfigError("synthetic log parameters must be positive");
    }
    std::mt19937_64 rng(cfg.seed);
    Periods periods(cfg.period_days, cfg.seed ^ 0x5bd1e995ULL);
    auto uniform = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
    auto chance = [&](double p) { return std::bernoulli_distribution(p)(rng); };

    const sys_days origin = year{2003} / January / 1;
    auto stamp = [&](double day) {
        const auto ms = milliseconds(static_cast<std::int64_t>(std::floor(day)) * 86'400'000LL);
        return ZonedInstant{Instant(origin) + ms, minutes{0}};
    };

    std::vector<eventlog::TracePtr> traces;
    traces.reserve(cfg.cases);
    double t = 0.0;
    for (std::size_t c = 0; c < cfg.cases; ++c) {
        // Piecewise-constant Poisson arrivals.
        for (;;) {
            const double rate = periods.busy(t) ? cfg.busy_rate : cfg.quiet_rate;
            const double dt = std::exponential_distribution<double>(rate)(rng);
            const double boundary = periods.next_boundary(t);
            if (t + dt < boundary) {
                t += dt;
                break;
            }
            t = boundary;
        }
        const std::string id = "S" + std::to_string(c + 1);
        std::vector<eventlog::Event> ev;
        auto add = [&](const char *activity, double day, std::optional<std::string> res = std::nullopt) {
            ev.push_back({id, activity, stamp(day), std::move(res)});
        };
        double d = t;
        add("Create Fine", d,
            "R" + std::to_string(1 + std::uniform_int_distribution<std::size_t>(0, cfg.officers - 1)(rng)));
        if (chance(0.25)) {
            add("Payment", d += uniform(1.0, 10.0));
        } else {
            add("Send Fine", d += uniform(5.0, 20.0));
            add("Insert Fine Notification", d += uniform(2.0, 10.0));
            const bool penalty = chance(cfg.load_signal) ? periods.busy(d) : chance(0.5);
            if (!penalty) {
                add("Payment", d += uniform(1.0, 15.0));
            } else {
                add("Add penalty", d += uniform(20.0, 40.0));
                if (chance(0.1)) {
                    add("Insert Date Appeal to Prefecture", d += uniform(5.0, 20.0));
                    add("Send Appeal to Prefecture", d += uniform(5.0, 30.0));
                } else if (chance(0.5)) {
                    add("Payment", d += uniform(1.0, 30.0));
                } else {
                    add("Send for Credit Collection", d += uniform(20.0, 60.0));
                }
            }
        }
        traces.push_back(eventlog::make_trace(id, std::move(ev)));
    }
    return eventlog::EventLog(std::move(traces));
}

} // namespace qppm::synthetic
