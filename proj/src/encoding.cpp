#include "qppm/encoding.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "qppm/error.hpp"

namespace qppm::encoding {

Vocabulary::Vocabulary(std::span<const std::string> entries) {
    for (const auto &e : entries) {
        if (index_.emplace(e, entries_.size() + 1).second) {
            entries_.push_back(e);
        }
    }
}

std::size_t Vocabulary::code(std::string_view entry) const {
    const auto it = index_.find(std::string(entry));
    return it == index_.end() ? kPad : it->second;
}

FeatureVector concat(const FeatureVector &a, const FeatureVector &b) {
    FeatureVector out = a;
    out.values.insert(out.values.end(), b.values.begin(), b.values.end());
    out.schema.insert(out.schema.end(), b.schema.begin(), b.schema.end());
    return out;
}

EncodingContext fit_context(std::span<const eventlog::TracePtr> traces) {
    std::set<std::string> acts;
    std::set<std::string> res;
    std::map<std::string, std::set<std::string>> attrs;
    for (const auto &t : traces) {
        for (const auto &e : t->events) {
            acts.insert(e.activity);
            if (e.resource && !e.resource->empty()) {
                res.insert(*e.resource);
            }
        }
        for (const auto &[k, v] : t->attributes) {
            attrs[k].insert(v);
        }
    }
    auto to_vocab = [](const std::set<std::string> &s) {
        const std::vector<std::string> v(s.begin(), s.end());
        return Vocabulary(v);
    };
    EncodingContext ctx;
    ctx.activities = to_vocab(acts);
    ctx.resources = to_vocab(res);
    for (const auto &[k, s] : attrs) {
        ctx.case_attributes.emplace(k, to_vocab(s));
    }
    return ctx;
}

FeatureVector encode_static(const eventlog::PrefixSample &prefix, std::span<const std::string> attrs,
                            const EncodingContext &ctx) {
    FeatureVector out;
    for (const auto &name : attrs) {
        double code = 0.0;
        const auto value = prefix.trace->attributes.find(name);
        const auto vocab = ctx.case_attributes.find(name);
        if (value != prefix.trace->attributes.end() && vocab != ctx.case_attributes.end()) {
            code = static_cast<double>(vocab->second.code(value->second));
        }
        out.values.push_back(code);
        out.schema.push_back("static_" + name);
    }
    return out;
}

FeatureVector encode_last_state(const eventlog::PrefixSample &prefix, const EncodingContext &ctx) {
    const auto &last = prefix.last_event();
    FeatureVector out;
    out.values.push_back(static_cast<double>(ctx.activities.code(last.activity)));
    out.schema.emplace_back("last_act");
    if (ctx.has_resources()) {
        out.values.push_back(
            last.resource ? static_cast<double>(ctx.resources.code(*last.resource)) : 0.0);
        out.schema.emplace_back("last_res");
    }
    return out;
}

FeatureVector encode_aggregation(const eventlog::PrefixSample &prefix, AggregationMode mode,
                                 const EncodingContext &ctx) {
    FeatureVector out;
    out.values.assign(ctx.activities.size(), 0.0);
    for (const auto &e : prefix.events()) {
        const auto code = ctx.activities.code(e.activity);
        if (code != Vocabulary::kPad) {
            out.values[code - 1] += 1.0;
        }
    }
    if (mode == AggregationMode::Boolean) {
        for (auto &v : out.values) {
            v = v > 0.0 ? 1.0 : 0.0;
        }
    }
    const char *prefix_name = mode == AggregationMode::Count ? "count_" : "has_";
    for (const auto &a : ctx.activities.entries()) {
        out.schema.push_back(prefix_name + a);
    }
    return out;
}

FeatureVector encode_index_based(const eventlog::PrefixSample &prefix, std::size_t k,
                                 const EncodingContext &ctx) {
    if (k < 1) {
        throw ConfigError("index-based encoding needs k >= 1");
    }
    const auto events = prefix.events();
    const std::size_t take = std::min(k, events.size());
    const std::size_t pad = k - take;
    const auto tail = events.subspan(events.size() - take);

    FeatureVector out;
    out.values.assign(pad, 0.0);
    for (const auto &e : tail) {
        out.values.push_back(static_cast<double>(ctx.activities.code(e.activity)));
    }
    for (std::size_t i = 0; i < k; ++i) {
        out.schema.push_back("act_" + std::to_string(i + 1));
    }
    if (ctx.has_resources()) {
        out.values.insert(out.values.end(), pad, 0.0);
        for (const auto &e : tail) {
            out.values.push_back(e.resource ? static_cast<double>(ctx.resources.code(*e.resource)) : 0.0);
        }
        for (std::size_t i = 0; i < k; ++i) {
            out.schema.push_back("res_" + std::to_string(i + 1));
        }
    }
    return out;
}

std::string IntraConfig::label() const {
    return name == "index_bsd" ? name + "_" + std::to_string(k) : name;
}

void validate(const IntraConfig &cfg) {
    static const std::set<std::string> known = {"static", "last_state", "agg_count", "agg_bool",
                                                "index_bsd"};
    if (!known.contains(cfg.name)) {
        throw ConfigError("unknown intra-case encoder '" + cfg.name + "'");
    }
    if (cfg.name == "index_bsd" && cfg.k < 1) {
        throw ConfigError("index_bsd needs k >= 1");
    }
}

FeatureVector encode_intra(const eventlog::PrefixSample &prefix, const IntraConfig &cfg,
                           const EncodingContext &ctx) {
    if (cfg.name == "index_bsd") {
        return encode_index_based(prefix, cfg.k, ctx);
    }
    if (cfg.name == "last_state") {
        return encode_last_state(prefix, ctx);
    }
    if (cfg.name == "agg_count") {
        return encode_aggregation(prefix, AggregationMode::Count, ctx);
    }
    if (cfg.name == "agg_bool") {
        return encode_aggregation(prefix, AggregationMode::Boolean, ctx);
    }
    if (cfg.name == "static") {
        return encode_static(prefix, cfg.static_attributes, ctx);
    }
    throw ConfigError("unknown intra-case encoder '" + cfg.name + "'");
}

ScalingParams fit_scaler(std::span<const FeatureVector> train, Interval target) {
    if (train.empty()) {
        throw ConfigError("cannot fit a scaler on an empty training set");
    }
    if (!(target.lo <= target.hi)) {
        throw ConfigError("scaling interval must satisfy lo <= hi");
    }
    ScalingParams p;
    p.schema = train.front().schema;
    p.target = target;
    p.min = train.front().values;
    p.max = train.front().values;
    for (const auto &x : train) {
        if (x.schema != p.schema) {
            throw ConfigError("training vectors have inconsistent schemas");
        }
        for (std::size_t i = 0; i < x.values.size(); ++i) {
            p.min[i] = std::min(p.min[i], x.values[i]);
            p.max[i] = std::max(p.max[i], x.values[i]);
        }
    }
    return p;
}

FeatureVector apply_scaler(const FeatureVector &x, const ScalingParams &params) {
    if (x.schema != params.schema) {
        throw ConfigError("feature schema does not match the fitted scaler");
    }
    const double lo = params.target.lo;
    const double hi = params.target.hi;
    FeatureVector out = x;
    for (std::size_t i = 0; i < x.values.size(); ++i) {
        const double span = params.max[i] - params.min[i];
        double v = span > 0.0 ? lo + (x.values[i] - params.min[i]) / span * (hi - lo)
                              : 0.5 * (lo + hi);
        out.values[i] = std::clamp(v, lo, hi);
    }
    return out;
}

} // namespace qppm::encoding
