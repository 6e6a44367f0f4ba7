#include "qppm/intercase.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

#include "qppm/error.hpp"

namespace qppm::intercase {

PeerWindow::PeerWindow(Duration w) : width(w) {
    if (width <= Duration{0}) {
        throw ConfigError("peer window width must be positive");
    }
}

Anchor Anchor::of(const eventlog::PrefixSample &prefix) {
    const auto &e = prefix.last_event();
    return Anchor{e.time(), prefix.case_id(), e.activity};
}

EventIndex::EventIndex(eventlog::EventLog log) : log_(std::move(log)) {
    entries_.reserve(log_.num_events());
    std::uint32_t case_index = 0;
    for (const auto &t : log_.traces()) {
        const eventlog::Event *prev = nullptr;
        for (const auto &e : t->events) {
            entries_.push_back(Entry{e.time(), &e, prev, case_index});
            prev = &e;
        }
        ++case_index;
    }
    std::stable_sort(entries_.begin(), entries_.end(),
                     [](const Entry &a, const Entry &b) { return a.time < b.time; });
}

std::span<const EventIndex::Entry> EventIndex::window(Instant anchor, const PeerWindow &w) const {
    const Instant from = anchor - w.width;
    const auto lo = std::lower_bound(entries_.begin(), entries_.end(), from,
                                     [](const Entry &e, Instant t) { return e.time < t; });
    const auto hi = std::upper_bound(lo, entries_.end(), anchor,
                                     [](Instant t, const Entry &e) { return t < e.time; });
    return {lo, hi};
}

TransitionStats fit_transition_stats(std::span<const eventlog::TracePtr> traces) {
    std::map<std::pair<std::string, std::string>, std::pair<double, std::size_t>> acc;
    for (const auto &t : traces) {
        for (std::size_t i = 1; i < t->events.size(); ++i) {
            auto &slot = acc[{t->events[i - 1].activity, t->events[i].activity}];
            slot.first += to_seconds(t->events[i].time() - t->events[i - 1].time());
            ++slot.second;
        }
    }
    TransitionStats out;
    for (const auto &[key, v] : acc) {
        out.mean_seconds.emplace(key, v.first / static_cast<double>(v.second));
    }
    return out;
}

SuccessorMap fit_successors(std::span<const eventlog::TracePtr> traces) {
    SuccessorMap out;
    for (const auto &t : traces) {
        for (std::size_t i = 1; i < t->events.size(); ++i) {
            out.next[t->events[i - 1].activity].insert(t->events[i].activity);
        }
    }
    return out;
}

BatchStats fit_batch_stats(std::span<const eventlog::TracePtr> traces, Duration epsilon,
                           std::size_t min_burst) {
    if (epsilon <= Duration{0}) {
        throw ConfigError("batch epsilon must be positive");
    }
    if (min_burst < 2) {
        throw ConfigError("batch min_burst must be at least 2");
    }
    struct Occ {
        Instant time;
        std::uint32_t case_index;
    };
    std::map<std::string, std::vector<Occ>> by_activity;
    std::uint32_t case_index = 0;
    for (const auto &t : traces) {
        for (const auto &e : t->events) {
            by_activity[e.activity].push_back(Occ{e.time(), case_index});
        }
        ++case_index;
    }

    BatchStats out;
    for (auto &[activity, occ] : by_activity) {
        std::stable_sort(occ.begin(), occ.end(),
                         [](const Occ &a, const Occ &b) { return a.time < b.time; });
        // Any qualifying interval can be slid right until it starts on an
        // occurrence, so it suffices to test [t_i, t_i + epsilon] for each i.
        const std::size_t n = occ.size();
        std::vector<int> cover(n + 1, 0);
        std::unordered_map<std::uint32_t, std::size_t> cases_in_window;
        std::size_t hi = 0;
        for (std::size_t lo = 0; lo < n; ++lo) {
            while (hi < n && occ[hi].time - occ[lo].time <= epsilon) {
                ++cases_in_window[occ[hi].case_index];
                ++hi;
            }
            if (cases_in_window.size() >= min_burst) {
                ++cover[lo];
                --cover[hi];
            }
            auto it = cases_in_window.find(occ[lo].case_index);
            if (--it->second == 0) {
                cases_in_window.erase(it);
            }
        }
        std::size_t in_burst = 0;
        int running = 0;
        for (std::size_t i = 0; i < n; ++i) {
            running += cover[i];
            if (running > 0) {
                ++in_burst;
            }
        }
        out.score.emplace(activity, n == 0 ? 0.0 : static_cast<double>(in_burst) / static_cast<double>(n));
    }
    return out;
}

std::size_t peer_cases(const EventIndex &index, const Anchor &anchor, const PeerWindow &w) {
    std::unordered_set<std::uint32_t> cases;
    bool anchor_seen = false;
    for (const auto &e : index.window(anchor.time, w)) {
        if (cases.insert(e.case_index).second && e.event->case_id == anchor.case_id) {
            anchor_seen = true;
        }
    }
    return cases.size() + (anchor_seen ? 0 : 1);
}

std::size_t peer_act(const EventIndex &index, const Anchor &anchor, const PeerWindow &w) {
    return index.window(anchor.time, w).size();
}

std::size_t res_count(const EventIndex &index, const Anchor &anchor, const PeerWindow &w) {
    std::unordered_set<std::string_view> res;
    for (const auto &e : index.window(anchor.time, w)) {
        if (e.event->resource && !e.event->resource->empty()) {
            res.insert(*e.event->resource);
        }
    }
    return res.size();
}

double avg_delay(const EventIndex &index, const Anchor &anchor, const PeerWindow &w,
                 const TransitionStats &stats) {
    std::vector<double> ratios;
    for (const auto &e : index.window(anchor.time, w)) {
        if (e.previous == nullptr) {
            continue;
        }
        const auto it = stats.mean_seconds.find({e.previous->activity, e.event->activity});
        if (it == stats.mean_seconds.end() || it->second <= 0.0) {
            continue;
        }
        ratios.push_back(to_seconds(e.event->time() - e.previous->time()) / it->second);
    }
    if (ratios.empty()) {
        return 1.0;
    }
    // Ascending summation makes the value independent of event order.
    std::sort(ratios.begin(), ratios.end());
    double sum = 0.0;
    for (const double r : ratios) {
        sum += r;
    }
    return sum / static_cast<double>(ratios.size());
}

namespace {

template <typename Value>
std::size_t most_frequent_code(std::span<const EventIndex::Entry> window,
                               const encoding::Vocabulary &vocab, Value value) {
    std::vector<std::size_t> counts(vocab.size() + 1, 0);
    for (const auto &e : window) {
        if (const std::string *v = value(*e.event)) {
            ++counts[vocab.code(*v)];
        }
    }
    std::size_t best = encoding::Vocabulary::kPad;
    std::size_t best_count = 0;
    for (std::size_t c = 1; c < counts.size(); ++c) {
        if (counts[c] > best_count) {
            best = c;
            best_count = counts[c];
        }
    }
    return best;
}

} // namespace

std::size_t freq_act(const EventIndex &index, const Anchor &anchor, const PeerWindow &w,
                     const encoding::Vocabulary &activities) {
    return most_frequent_code(index.window(anchor.time, w), activities,
                              [](const eventlog::Event &e) { return &e.activity; });
}

std::size_t top_res(const EventIndex &index, const Anchor &anchor, const PeerWindow &w,
                    const encoding::Vocabulary &resources) {
    return most_frequent_code(index.window(anchor.time, w), resources,
                              [](const eventlog::Event &e) -> const std::string * {
                                  return e.resource && !e.resource->empty() ? &*e.resource : nullptr;
                              });
}

double batch_indicator(const Anchor &anchor, const BatchStats &stats, const SuccessorMap &successors) {
    const auto it = successors.next.find(anchor.activity);
    if (it == successors.next.end()) {
        return 0.0;
    }
    double best = 0.0;
    for (const auto &b : it->second) {
        const auto s = stats.score.find(b);
        if (s != stats.score.end()) {
            best = std::max(best, s->second);
        }
    }
    return best;
}

namespace {

struct FeatureName {
    Feature feature;
    std::string_view name;
};

constexpr FeatureName kNames[] = {
    {Feature::PeerCases, "peer_cases"}, {Feature::PeerAct, "peer_act"},
    {Feature::ResCount, "res_count"},   {Feature::AvgDelay, "avg_delay"},
    {Feature::FreqAct, "freq_act"},     {Feature::TopRes, "top_res"},
    {Feature::Batch, "batch"},
};

} // namespace

Feature parse_feature(std::string_view name) {
    for (const auto &n : kNames) {
        if (n.name == name) {
            return n.feature;
        }
    }
    throw ConfigError("unknown inter-case feature '" + std::string(name) + "'");
}

std::string_view to_string(Feature f) {
    for (const auto &n : kNames) {
        if (n.feature == f) {
            return n.name;
        }
    }
    return "?";
}

const std::vector<Feature> &all_features() {
    static const std::vector<Feature> all = {Feature::PeerCases, Feature::PeerAct, Feature::ResCount,
                                             Feature::AvgDelay,  Feature::FreqAct, Feature::TopRes,
                                             Feature::Batch};
    return all;
}

FittedStats fit_stats(std::span<const eventlog::TracePtr> train_traces, const BatchParams &batch) {
    FittedStats s;
    s.context = encoding::fit_context(train_traces);
    s.transitions = fit_transition_stats(train_traces);
    s.batch = fit_batch_stats(train_traces, batch.epsilon, batch.min_burst);
    s.successors = fit_successors(train_traces);
    return s;
}

encoding::FeatureVector compute(std::span<const Feature> features, const EventIndex &index,
                                const Anchor &anchor, const PeerWindow &w, const FittedStats &stats) {
    encoding::FeatureVector out;
    for (auto f : features) {
        double v = 0.0;
        switch (f) {
        case Feature::PeerCases:
            v = static_cast<double>(peer_cases(index, anchor, w));
            break;
        case Feature::PeerAct:
            v = static_cast<double>(peer_act(index, anchor, w));
            break;
        case Feature::ResCount:
            v = static_cast<double>(res_count(index, anchor, w));
            break;
        case Feature::AvgDelay:
            v = avg_delay(index, anchor, w, stats.transitions);
            break;
        case Feature::FreqAct:
            v = static_cast<double>(freq_act(index, anchor, w, stats.context.activities));
            break;
        case Feature::TopRes:
            v = static_cast<double>(top_res(index, anchor, w, stats.context.resources));
            break;
        case Feature::Batch:
            v = batch_indicator(anchor, stats.batch, stats.successors);
            break;
        }
        out.values.push_back(v);
        out.schema.emplace_back(to_string(f));
    }
    return out;
}

ComposedFeatureVector compose(encoding::FeatureVector intra, encoding::FeatureVector inter) {
    if (inter.size() > kMaxInterFeatures) {
        throw ConfigError("at most " + std::to_string(kMaxInterFeatures) +
                          " inter-case features can be composed");
    }
    return ComposedFeatureVector{std::move(intra), std::move(inter)};
}

} // namespace qppm::intercase
