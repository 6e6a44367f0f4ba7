#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace qppm {

using Duration = std::chrono::milliseconds;
/// UTC instant at millisecond resolution.
using Instant = std::chrono::sys_time<Duration>;

/// A parsed timestamp: the UTC instant plus the offset it was written with.
struct ZonedInstant {
    Instant utc{};
    std::chrono::minutes offset{0};

    bool operator==(const ZonedInstant &) const = default;
};

/// Parses ISO-8601 (`YYYY-MM-DD[(T| )hh:mm[:ss[.fff…]]][Z|±hh[:]mm]`).
/// Missing zone information means UTC. Returns nullopt on malformed input.
[[nodiscard]] std::optional<ZonedInstant> parse_iso8601(std::string_view text);

/// Accepts `YYYYMMDD` or `YYYY-MM-DD`.
[[nodiscard]] std::optional<std::chrono::sys_days> parse_date(std::string_view text);

/// Formats with millisecond precision, using the stored offset
/// (`Z` when the offset is zero).
[[nodiscard]] std::string format_iso8601(const ZonedInstant &ts);

/// The calendar day on which `ts` falls in its own (written) time zone.
[[nodiscard]] std::chrono::sys_days local_day(const ZonedInstant &ts);

[[nodiscard]] inline double to_seconds(Duration d) {
    return std::chrono::duration<double>(d).count();
}
[[nodiscard]] inline double to_days(Duration d) { return to_seconds(d) / 86400.0; }
[[nodiscard]] inline double to_weeks(Duration d) { return to_days(d) / 7.0; }

[[nodiscard]] inline Duration from_seconds(double s) {
    return std::chrono::duration_cast<Duration>(std::chrono::duration<double>(s));
}

} // namespace qppm
