#pragma once

// Inter-case features computed over a backward time window [t - width, t]
// anchored at the last event of a prefix. "Window events" are all events of
// all indexed cases whose timestamp lies in that closed interval.

#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qppm/encoding.hpp"
#include "qppm/eventlog.hpp"

namespace qppm::intercase {

struct PeerWindow {
    Duration width{0};

    /// Throws ConfigError unless width > 0.
    explicit PeerWindow(Duration w);
};

/// The event being encoded.
struct Anchor {
    Instant time{};
    std::string case_id;
    std::string activity;

    [[nodiscard]] static Anchor of(const eventlog::PrefixSample &prefix);
};

/// All events of a log sorted by (timestamp, log order); window lookup is
/// two binary searches.
class EventIndex {
  public:
    struct Entry {
        Instant time;
        const eventlog::Event *event;
        /// Previous event of the same case, if any.
        const eventlog::Event *previous;
        std::uint32_t case_index;
    };

    explicit EventIndex(eventlog::EventLog log);

    [[nodiscard]] std::span<const Entry> window(Instant anchor, const PeerWindow &w) const;
    [[nodiscard]] const eventlog::EventLog &log() const { return log_; }
    [[nodiscard]] std::size_t size() const { return entries_.size(); }

  private:
    eventlog::EventLog log_;
    std::vector<Entry> entries_;
};

/// Mean inter-event duration per observed (activity, activity) transition.
struct TransitionStats {
    std::map<std::pair<std::string, std::string>, double> mean_seconds;
};

/// Burst fraction per activity, each in [0, 1].
struct BatchStats {
    std::map<std::string, double> score;
};

/// Activities observed directly after each activity in training traces.
struct SuccessorMap {
    std::map<std::string, std::set<std::string>> next;
};

[[nodiscard]] TransitionStats fit_transition_stats(std::span<const eventlog::TracePtr> traces);
[[nodiscard]] SuccessorMap fit_successors(std::span<const eventlog::TracePtr> traces);

/// For each activity, the fraction of its occurrences that belong to some
/// closed interval of length `epsilon` holding occurrences from at least
/// `min_burst` distinct cases. Throws ConfigError for epsilon <= 0 or
/// min_burst < 2.
[[nodiscard]] BatchStats fit_batch_stats(std::span<const eventlog::TracePtr> traces,
                                         Duration epsilon, std::size_t min_burst);

[[nodiscard]] std::size_t peer_cases(const EventIndex &index, const Anchor &anchor,
                                     const PeerWindow &w);
[[nodiscard]] std::size_t peer_act(const EventIndex &index, const Anchor &anchor,
                                   const PeerWindow &w);
[[nodiscard]] std::size_t res_count(const EventIndex &index, const Anchor &anchor,
                                    const PeerWindow &w);
/// Mean of observed/mean-training duration over window transitions; 1.0
/// without evidence. Transitions whose training mean is zero are skipped.
[[nodiscard]] double avg_delay(const EventIndex &index, const Anchor &anchor, const PeerWindow &w,
                               const TransitionStats &stats);
/// Most frequent known activity code in the window; ties to the smaller code.
[[nodiscard]] std::size_t freq_act(const EventIndex &index, const Anchor &anchor,
                                   const PeerWindow &w, const encoding::Vocabulary &activities);
[[nodiscard]] std::size_t top_res(const EventIndex &index, const Anchor &anchor,
                                  const PeerWindow &w, const encoding::Vocabulary &resources);
[[nodiscard]] double batch_indicator(const Anchor &anchor, const BatchStats &stats,
                                     const SuccessorMap &successors);

enum class Feature { PeerCases, PeerAct, ResCount, AvgDelay, FreqAct, TopRes, Batch };

[[nodiscard]] Feature parse_feature(std::string_view name);
[[nodiscard]] std::string_view to_string(Feature f);
[[nodiscard]] const std::vector<Feature> &all_features();

/// Everything fitted on the training fold that the features need.
struct FittedStats {
    encoding::EncodingContext context;
    TransitionStats transitions;
    BatchStats batch;
    SuccessorMap successors;
};

struct BatchParams {
    Duration epsilon = std::chrono::hours(24);
    std::size_t min_burst = 3;
};

[[nodiscard]] FittedStats fit_stats(std::span<const eventlog::TracePtr> train_traces,
                                    const BatchParams &batch = {});

/// Values of the selected features, in selection order.
[[nodiscard]] encoding::FeatureVector compute(std::span<const Feature> features,
                                              const EventIndex &index, const Anchor &anchor,
                                              const PeerWindow &w, const FittedStats &stats);

struct ComposedFeatureVector {
    encoding::FeatureVector intra;
    encoding::FeatureVector inter;

    [[nodiscard]] encoding::FeatureVector combined() const { return encoding::concat(intra, inter); }
    [[nodiscard]] std::size_t size() const { return intra.size() + inter.size(); }
};

/// At most this many inter-case features may be composed at once.
inline constexpr std::size_t kMaxInterFeatures = 2;

/// Throws ConfigError when `inter` has more than kMaxInterFeatures entries.
[[nodiscard]] ComposedFeatureVector compose(encoding::FeatureVector intra,
                                            encoding::FeatureVector inter);

} // namespace qppm::intercase
