#include "qppm/eventlog.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "qppm/error.hpp"

namespace qppm::eventlog {

TracePtr make_trace(std::string case_id, std::vector<Event> events,
                    std::map<std::string, std::string> attributes) {
    std::stable_sort(events.begin(), events.end(),
                     [](const Event &a, const Event &b) { return a.time() < b.time(); });
    auto trace = std::make_shared<Trace>();
    trace->case_id = std::move(case_id);
    trace->events = std::move(events);
    trace->attributes = std::move(attributes);
    return trace;
}

EventLog::EventLog(std::vector<TracePtr> traces) : traces_(std::move(traces)) {
    std::set<std::string> acts;
    std::set<std::string> res;
    std::unordered_set<std::string> ids;
    ids.reserve(traces_.size());
    for (const auto &t : traces_) {
        if (!ids.insert(t->case_id).second) {
            throw ConfigError("duplicate case id '" + t->case_id + "'");
        }
        num_events_ += t->events.size();
        for (const auto &e : t->events) {
            acts.insert(e.activity);
            if (e.resource && !e.resource->empty()) {
                res.insert(*e.resource);
            }
        }
    }
    activities_.assign(acts.begin(), acts.end());
    resources_.assign(res.begin(), res.end());
}

bool EventLog::operator==(const EventLog &other) const {
    if (traces_.size() != other.traces_.size()) {
        return false;
    }
    for (std::size_t i = 0; i < traces_.size(); ++i) {
        if (!(*traces_[i] == *other.traces_[i])) {
            return false;
        }
    }
    return true;
}

SliceRule parse_slice_rule(std::string_view name) {
    if (name == "first-event" || name == "first") {
        return SliceRule::FirstEvent;
    }
    if (name == "all-events" || name == "all") {
        return SliceRule::AllEvents;
    }
    if (name == "any-event" || name == "any") {
        return SliceRule::AnyEvent;
    }
    throw ConfigError("unknown slice rule '" + std::string(name) + "'");
}

std::string_view to_string(SliceRule rule) {
    switch (rule) {
    case SliceRule::FirstEvent:
        return "first-event";
    case SliceRule::AllEvents:
        return "all-events";
    case SliceRule::AnyEvent:
        return "any-event";
    }
    return "?";
}

DateBasis parse_date_basis(std::string_view name) {
    if (name == "utc") {
        return DateBasis::Utc;
    }
    if (name == "local") {
        return DateBasis::Local;
    }
    throw ConfigError("unknown date basis '" + std::string(name) + "'");
}

std::string_view to_string(DateBasis basis) {
    return basis == DateBasis::Utc ? "utc" : "local";
}

std::string variant_key(const Trace &trace) {
    std::string key;
    for (const auto &e : trace.events) {
        key += e.activity;
        key += '\x1f';
    }
    return key;
}

EventLog filter_singleton_variants(const EventLog &log) {
    std::unordered_map<std::string, std::size_t> counts;
    std::vector<std::string> keys;
    keys.reserve(log.num_traces());
    for (const auto &t : log.traces()) {
        keys.push_back(variant_key(*t));
        ++counts[keys.back()];
    }
    std::vector<TracePtr> kept;
    for (std::size_t i = 0; i < keys.size(); ++i) {
        if (counts[keys[i]] >= 2) {
            kept.push_back(log.traces()[i]);
        }
    }
    return EventLog(std::move(kept));
}

EventLog slice_date_range(const EventLog &log, std::chrono::sys_days start,
                          std::chrono::sys_days end, SliceRule rule, DateBasis basis) {
    if (start > end) {
        throw ConfigError("date range start is after its end");
    }
    auto day_of = [basis](const Event &e) {
        return basis == DateBasis::Utc ? std::chrono::floor<std::chrono::days>(e.time())
                                       : local_day(e.timestamp);
    };
    auto inside = [&](const Event &e) {
        const auto d = day_of(e);
        return d >= start && d <= end;
    };
    std::vector<TracePtr> kept;
    for (const auto &t : log.traces()) {
        if (t->events.empty()) {
            continue;
        }
        bool keep = false;
        switch (rule) {
        case SliceRule::FirstEvent:
            keep = inside(t->events.front());
            break;
        case SliceRule::AllEvents:
            keep = std::all_of(t->events.begin(), t->events.end(), inside);
            break;
        case SliceRule::AnyEvent:
            keep = std::any_of(t->events.begin(), t->events.end(), inside);
            break;
        }
        if (keep) {
            kept.push_back(t);
        }
    }
    return EventLog(std::move(kept));
}

std::vector<PrefixSample> build_prefix_log(const EventLog &log, std::size_t min_prefix,
                                           std::optional<std::size_t> max_prefix) {
    if (min_prefix < 1) {
        throw ConfigError("min_prefix must be at least 1");
    }
    std::vector<PrefixSample> out;
    for (const auto &t : log.traces()) {
        const std::size_t n = t->events.size();
        const std::size_t hi = max_prefix ? std::min(n, *max_prefix) : n;
        for (std::size_t k = min_prefix; k <= hi; ++k) {
            out.push_back(PrefixSample{
                t, k, k < n ? t->events[k].activity : std::string(kEndLabel)});
        }
    }
    return out;
}

std::vector<std::size_t> stratified_subsample_indices(std::span<const PrefixSample> samples,
                                                      double fraction, std::uint64_t seed) {
    if (!(fraction > 0.0) || fraction > 1.0) {
        throw ConfigError("sampling fraction must lie in (0, 1]");
    }
    std::map<std::string, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        by_class[samples[i].label].push_back(i);
    }
    // Largest-remainder apportionment: the total is round(fraction * n) and
    // every class receives the floor or ceiling of its proportional quota.
    struct Quota {
        std::vector<std::size_t> *idx;
        std::size_t take;
        double remainder;
    };
    std::vector<Quota> quotas;
    std::size_t assigned = 0;
    for (auto &[label, idx] : by_class) {
        const double q = fraction * static_cast<double>(idx.size());
        const auto take = static_cast<std::size_t>(std::floor(q));
        quotas.push_back({&idx, take, q - static_cast<double>(take)});
        assigned += take;
    }
    const auto total = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(fraction * static_cast<double>(samples.size()))));
    std::vector<std::size_t> order(quotas.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return quotas[a].remainder > quotas[b].remainder; });
    for (std::size_t i = 0; assigned < total && i < order.size(); ++i) {
        auto &q = quotas[order[i]];
        if (q.take < q.idx->size()) {
            ++q.take;
            ++assigned;
        }
    }

    std::mt19937_64 rng(seed);
    std::vector<std::size_t> chosen;
    for (auto &q : quotas) {
        std::shuffle(q.idx->begin(), q.idx->end(), rng);
        chosen.insert(chosen.end(), q.idx->begin(), q.idx->begin() + static_cast<std::ptrdiff_t>(q.take));
    }
    std::sort(chosen.begin(), chosen.end());
    return chosen;
}

std::vector<PrefixSample> stratified_subsample(std::span<const PrefixSample> samples,
                                               double fraction, std::uint64_t seed) {
    std::vector<PrefixSample> out;
    for (auto i : stratified_subsample_indices(samples, fraction, seed)) {
        out.push_back(samples[i]);
    }
    return out;
}

std::vector<std::size_t> FoldSplit::train_indices(std::size_t fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < fold_of_sample.size(); ++i) {
        if (fold_of_sample[i] != fold) {
            out.push_back(i);
        }
    }
    return out;
}

std::vector<std::size_t> FoldSplit::test_indices(std::size_t fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < fold_of_sample.size(); ++i) {
        if (fold_of_sample[i] == fold) {
            out.push_back(i);
        }
    }
    return out;
}

FoldSplit make_cv_folds(std::span<const PrefixSample> samples, std::size_t k, std::uint64_t seed) {
    if (k < 2) {
        throw ConfigError("cross-validation needs at least 2 folds");
    }
    std::vector<std::string> cases;
    std::unordered_map<std::string, std::size_t> case_pos;
    for (const auto &s : samples) {
        if (case_pos.emplace(s.case_id(), cases.size()).second) {
            cases.push_back(s.case_id());
        }
    }
    if (cases.size() < k) {
        throw ConfigError("fewer cases (" + std::to_string(cases.size()) + ") than folds (" +
                          std::to_string(k) + ")");
    }
    std::vector<std::size_t> order(cases.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        order[i] = i;
    }
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<std::size_t> fold_of_case(cases.size());
    for (std::size_t p = 0; p < order.size(); ++p) {
        fold_of_case[order[p]] = p % k;
    }
    FoldSplit split;
    split.folds = k;
    split.seed = seed;
    split.fold_of_sample.reserve(samples.size());
    for (const auto &s : samples) {
        split.fold_of_sample.push_back(fold_of_case[case_pos.at(s.case_id())]);
    }
    return split;
}

Duration median_case_duration(std::span<const TracePtr> traces) {
    std::vector<Duration> d;
    d.reserve(traces.size());
    for (const auto &t : traces) {
        if (!t->events.empty()) {
            d.push_back(t->events.back().time() - t->events.front().time());
        }
    }
    if (d.empty()) {
        return Duration{0};
    }
    const std::size_t mid = d.size() / 2;
    std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(mid), d.end());
    if (d.size() % 2 == 1) {
        return d[mid];
    }
    const Duration upper = d[mid];
    const Duration lower = *std::max_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(mid));
    return lower + (upper - lower) / 2;
}

LogStatistics log_statistics(const EventLog &log) {
    LogStatistics s;
    s.cases = log.num_traces();
    s.events = log.num_events();
    s.activities = log.activity_vocab().size();
    std::unordered_set<std::string> variants;
    for (const auto &t : log.traces()) {
        variants.insert(variant_key(*t));
    }
    s.variants = variants.size();
    s.median_case_time = median_case_duration(log.traces());
    return s;
}

std::string format_duration(Duration d) {
    const double days = to_days(d);
    char buf[32];
    if (days >= 28.0) {
        std::snprintf(buf, sizeof buf, "%.1fw", days / 7.0);
    } else {
        std::snprintf(buf, sizeof buf, "%.1fd", days);
    }
    return buf;
}

} // namespace qppm::eventlog
