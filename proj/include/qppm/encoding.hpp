#pragma once

// Intra-case encoders: map a prefix onto a fixed-length vector of reals.
// Categorical values are ordinal vocabulary codes with 0 reserved for PAD
// (and for anything unseen when the vocabulary was built).

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "qppm/eventlog.hpp"

namespace qppm::encoding {

class Vocabulary {
  public:
    static constexpr std::size_t kPad = 0;

    Vocabulary() = default;
    /// Duplicates are dropped; first occurrence wins the lower code.
    explicit Vocabulary(std::span<const std::string> entries);

    /// 1-based code of a known entry, kPad otherwise.
    [[nodiscard]] std::size_t code(std::string_view entry) const;
    /// Entries without PAD; entries()[i] has code i + 1.
    [[nodiscard]] const std::vector<std::string> &entries() const { return entries_; }
    [[nodiscard]] std::size_t size() const { return entries_.size(); }
    [[nodiscard]] bool empty() const { return entries_.empty(); }

  private:
    std::vector<std::string> entries_;
    std::unordered_map<std::string, std::size_t> index_;
};

struct FeatureVector {
    std::vector<double> values;
    std::vector<std::string> schema;

    [[nodiscard]] std::size_t size() const { return values.size(); }
    bool operator==(const FeatureVector &) const = default;
};

/// Concatenation with schemas kept in order.
[[nodiscard]] FeatureVector concat(const FeatureVector &a, const FeatureVector &b);

/// Vocabularies learnt from a (training) log.
struct EncodingContext {
    Vocabulary activities;
    Vocabulary resources;
    std::map<std::string, Vocabulary> case_attributes;

    [[nodiscard]] bool has_resources() const { return !resources.empty(); }
};

[[nodiscard]] EncodingContext fit_context(std::span<const eventlog::TracePtr> traces);

/// One ordinal feature per requested case attribute, in `attrs` order.
[[nodiscard]] FeatureVector encode_static(const eventlog::PrefixSample &prefix,
                                          std::span<const std::string> attrs,
                                          const EncodingContext &ctx);

/// Code of the last activity, plus the last resource when the context has any.
[[nodiscard]] FeatureVector encode_last_state(const eventlog::PrefixSample &prefix,
                                              const EncodingContext &ctx);

enum class AggregationMode { Count, Boolean };

/// One slot per vocabulary activity.
[[nodiscard]] FeatureVector encode_aggregation(const eventlog::PrefixSample &prefix,
                                               AggregationMode mode, const EncodingContext &ctx);

/// Codes of the last k activities, oldest first, left-padded with PAD; a
/// parallel k-slot resource block follows when the context has resources.
[[nodiscard]] FeatureVector encode_index_based(const eventlog::PrefixSample &prefix, std::size_t k,
                                               const EncodingContext &ctx);

/// Encoder selection by name: `static`, `last_state`, `agg_count`,
/// `agg_bool`, `index_bsd` (with k).
struct IntraConfig {
    std::string name = "index_bsd";
    std::size_t k = 4;
    std::vector<std::string> static_attributes;

    /// Short label such as "index_bsd_4".
    [[nodiscard]] std::string label() const;
};

/// Throws ConfigError for unknown encoder names.
void validate(const IntraConfig &cfg);

[[nodiscard]] FeatureVector encode_intra(const eventlog::PrefixSample &prefix,
                                         const IntraConfig &cfg, const EncodingContext &ctx);

struct Interval {
    double lo = 0.0;
    double hi = 3.14159265358979323846;
};

struct ScalingParams {
    std::vector<double> min;
    std::vector<double> max;
    std::vector<std::string> schema;
    Interval target;
};

/// Per-feature min/max over `train`. Throws ConfigError on empty input or
/// inconsistent schemas.
[[nodiscard]] ScalingParams fit_scaler(std::span<const FeatureVector> train, Interval target = {});

/// Affine map onto the target interval, clamped. Constant features map to
/// the midpoint. Throws ConfigError on schema mismatch.
[[nodiscard]] FeatureVector apply_scaler(const FeatureVector &x, const ScalingParams &params);

} // namespace qppm::encoding
