#pragma once

// Event-log model and the preprocessing steps that turn a raw log into
// labelled prefix samples and cross-validation folds.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qppm/timestamp.hpp"

namespace qppm::eventlog {

struct Event {
    std::string case_id;
    std::string activity;
    ZonedInstant timestamp;
    std::optional<std::string> resource;

    [[nodiscard]] Instant time() const { return timestamp.utc; }
    bool operator==(const Event &) const = default;
};

/// Events of one case, ascending by timestamp, ties in source order.
struct Trace {
    std::string case_id;
    std::vector<Event> events;
    /// Case-level (static) string attributes.
    std::map<std::string, std::string> attributes;

    bool operator==(const Trace &) const = default;
};

using TracePtr = std::shared_ptr<const Trace>;

/// Sorts events stably by timestamp and wraps the result.
[[nodiscard]] TracePtr make_trace(std::string case_id, std::vector<Event> events,
                                  std::map<std::string, std::string> attributes = {});

/// Immutable, shareable collection of traces. Vocabularies hold exactly the
/// distinct activity / resource names present, in lexicographic order.
class EventLog {
  public:
    EventLog() = default;
    /// Throws ConfigError on duplicate case ids.
    explicit EventLog(std::vector<TracePtr> traces);

    [[nodiscard]] const std::vector<TracePtr> &traces() const { return traces_; }
    [[nodiscard]] const std::vector<std::string> &activity_vocab() const { return activities_; }
    [[nodiscard]] const std::vector<std::string> &resource_vocab() const { return resources_; }
    [[nodiscard]] std::size_t num_traces() const { return traces_.size(); }
    [[nodiscard]] std::size_t num_events() const { return num_events_; }
    [[nodiscard]] bool empty() const { return traces_.empty(); }

    bool operator==(const EventLog &other) const;

  private:
    std::vector<TracePtr> traces_;
    std::vector<std::string> activities_;
    std::vector<std::string> resources_;
    std::size_t num_events_ = 0;
};

/// Reserved label for the final prefix of a completed case.
inline constexpr std::string_view kEndLabel = "[END]";

/// A prefix of one case together with its next-activity label. The prefix
/// is a view on the shared trace, so samples are cheap to copy.
struct PrefixSample {
    TracePtr trace;
    std::size_t length = 0;
    std::string label;

    [[nodiscard]] const std::string &case_id() const { return trace->case_id; }
    [[nodiscard]] std::span<const Event> events() const {
        return {trace->events.data(), length};
    }
    [[nodiscard]] const Event &last_event() const { return trace->events[length - 1]; }
};

struct FoldSplit {
    std::vector<std::size_t> fold_of_sample;
    std::size_t folds = 0;
    std::uint64_t seed = 0;

    [[nodiscard]] std::vector<std::size_t> train_indices(std::size_t fold) const;
    [[nodiscard]] std::vector<std::size_t> test_indices(std::size_t fold) const;
};

struct LogStatistics {
    std::size_t cases = 0;
    std::size_t events = 0;
    std::size_t activities = 0;
    std::size_t variants = 0;
    Duration median_case_time{0};
};

/// Which cases a date slice keeps.
enum class SliceRule {
    FirstEvent, ///< first event inside the range; whole case kept
    AllEvents,  ///< every event inside the range
    AnyEvent,   ///< at least one event inside the range
};

/// Calendar basis for comparing timestamps against date boundaries.
enum class DateBasis {
    Utc,   ///< the UTC-normalized instant
    Local, ///< the wall-clock date as written in the source file
};

[[nodiscard]] SliceRule parse_slice_rule(std::string_view name);
[[nodiscard]] std::string_view to_string(SliceRule rule);
[[nodiscard]] DateBasis parse_date_basis(std::string_view name);
[[nodiscard]] std::string_view to_string(DateBasis basis);

/// Activity-name sequence of a trace, joined with an unambiguous separator.
[[nodiscard]] std::string variant_key(const Trace &trace);

[[nodiscard]] EventLog filter_singleton_variants(const EventLog &log);

/// Keeps cases by `rule`, comparing calendar days in [start, end] inclusive.
/// Throws ConfigError when start > end.
[[nodiscard]] EventLog slice_date_range(const EventLog &log, std::chrono::sys_days start,
                                        std::chrono::sys_days end,
                                        SliceRule rule = SliceRule::FirstEvent,
                                        DateBasis basis = DateBasis::Utc);

/// Prefixes of length min_prefix..min(n, max_prefix) for every trace.
[[nodiscard]] std::vector<PrefixSample>
build_prefix_log(const EventLog &log, std::size_t min_prefix = 1,
                 std::optional<std::size_t> max_prefix = std::nullopt);

/// Per-label sampling without replacement, round(fraction * class size)
/// (at least 1) per class. Output keeps the input order.
[[nodiscard]] std::vector<std::size_t> stratified_subsample_indices(
    std::span<const PrefixSample> samples, double fraction, std::uint64_t seed);
[[nodiscard]] std::vector<PrefixSample>
stratified_subsample(std::span<const PrefixSample> samples, double fraction, std::uint64_t seed);

/// Case-level folds: cases are shuffled and dealt round-robin.
[[nodiscard]] FoldSplit make_cv_folds(std::span<const PrefixSample> samples, std::size_t k,
                                      std::uint64_t seed);

[[nodiscard]] LogStatistics log_statistics(const EventLog &log);

/// Median over cases of (last - first timestamp); zero for an empty log.
[[nodiscard]] Duration median_case_duration(std::span<const TracePtr> traces);

/// Human-readable duration in the style "28.3w" / "20.4d".
[[nodiscard]] std::string format_duration(Duration d);

} // namespace qppm::eventlog
