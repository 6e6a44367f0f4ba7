#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "qppm/encoding.hpp"
#include "qppm/error.hpp"
#include "support/oracles.hpp"

using namespace qppm;
using namespace qppm::encoding;
using qppm::testing::at_seconds;

namespace {

eventlog::PrefixSample prefix(const std::vector<std::string> &acts, std::size_t len,
                              const std::vector<std::string> &res = {},
                              std::map<std::string, std::string> attrs = {}) {
    std::vector<eventlog::Event> ev;
    for (std::size_t i = 0; i < acts.size(); ++i) {
        std::optional<std::string> r;
        if (i < res.size() && !res[i].empty()) {
            r = res[i];
        }
        ev.push_back({"c", acts[i], at_seconds(static_cast<std::int64_t>(i)), r});
    }
    return {eventlog::make_trace("c", std::move(ev), std::move(attrs)), len, "x"};
}

EncodingContext context(std::vector<std::string> acts, std::vector<std::string> res = {}) {
    EncodingContext ctx;
    ctx.activities = Vocabulary(acts);
    ctx.resources = Vocabulary(res);
    return ctx;
}

} // namespace

TEST(Vocabulary, CodesArePadShifted) {
    const std::vector<std::string> e{"a", "b", "a", "c"};
    const Vocabulary v(e);
    EXPECT_EQ(v.size(), 3u);
    EXPECT_EQ(v.code("a"), 1u);
    EXPECT_EQ(v.code("c"), 3u);
    EXPECT_EQ(v.code("zzz"), Vocabulary::kPad);
}

TEST(Vocabulary, FitContextFromTraces) {
    const auto log = qppm::testing::random_log(5);
    const auto ctx = fit_context(log.traces());
    EXPECT_EQ(ctx.activities.entries(), log.activity_vocab());
    EXPECT_EQ(ctx.resources.entries(), log.resource_vocab());
}

TEST(Encoders, Static) {
    auto ctx = context({"a"});
    const std::vector<std::string> ch{"web", "phone"};
    ctx.case_attributes["channel"] = Vocabulary(ch);
    ctx.case_attributes["region"] = Vocabulary(std::vector<std::string>{"n", "s"});
    const auto p = prefix({"a"}, 1, {}, {{"channel", "web"}, {"region", "s"}});
    const std::vector<std::string> one{"channel"};
    EXPECT_EQ(encode_static(p, one, ctx).values, (std::vector<double>{1}));
    const std::vector<std::string> missing{"priority"};
    EXPECT_EQ(encode_static(p, missing, ctx).values, (std::vector<double>{0}));
    const std::vector<std::string> two{"region", "channel"};
    const auto v = encode_static(p, two, ctx);
    EXPECT_EQ(v.values, (std::vector<double>{2, 1}));
    EXPECT_EQ(v.schema.size(), 2u);
}

TEST(Encoders, LastState) {
    const auto ctx = context({"a", "b"});
    EXPECT_EQ(encode_last_state(prefix({"a", "b"}, 2), ctx).values, (std::vector<double>{2}));
    EXPECT_EQ(encode_last_state(prefix({"a", "b"}, 1), ctx).values, (std::vector<double>{1}));
    EXPECT_EQ(encode_last_state(prefix({"a", "q"}, 2), ctx).values, (std::vector<double>{0}));
    const auto with_res = context({"a", "b"}, {"r1", "r2"});
    EXPECT_EQ(encode_last_state(prefix({"a", "b"}, 2, {"r2", "r1"}), with_res).values, (std::vector<double>{2, 1}));
}

TEST(Encoders, Aggregation) {
    const auto ctx = context({"a", "b", "c"});
    const auto p = prefix({"a", "b", "a"}, 3);
    EXPECT_EQ(encode_aggregation(p, AggregationMode::Count, ctx).values, (std::vector<double>{2, 1, 0}));
    EXPECT_EQ(encode_aggregation(p, AggregationMode::Boolean, ctx).values, (std::vector<double>{1, 1, 0}));
    EXPECT_TRUE(encode_aggregation(p, AggregationMode::Count, EncodingContext{}).values.empty());
}

TEST(Encoders, IndexBased) {
    const auto ctx = context({"a", "b", "c", "d", "e"});
    EXPECT_EQ(encode_index_based(prefix({"a", "b"}, 2), 4, ctx).values, (std::vector<double>{0, 0, 1, 2}));
    EXPECT_EQ(encode_index_based(prefix({"a", "b", "c", "d", "e"}, 5), 4, ctx).values,
              (std::vector<double>{2, 3, 4, 5}));
    EXPECT_EQ(encode_index_based(prefix({"d", "c", "b", "a"}, 4), 4, ctx).values, (std::vector<double>{4, 3, 2, 1}));

    const auto rctx = context({"a", "b"}, {"r1", "r2"});
    const auto v = encode_index_based(prefix({"a", "b"}, 2, {"r2", ""}), 3, rctx);
    EXPECT_EQ(v.values, (std::vector<double>{0, 1, 2, 0, 2, 0}));
    EXPECT_EQ(v.schema.size(), 6u);
}

TEST(Encoders, IndexBasedIsInjectiveAtHorizon) {
    const auto ctx = context({"a", "b", "c"});
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> pick(0, 2);
    const std::size_t k = 3;
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<std::string> x, y;
        for (std::size_t i = 0; i < 5; ++i) {
            x.push_back(std::string(1, static_cast<char>('a' + pick(rng))));
        }
        y = x;
        const std::size_t pos = 5 - 1 - static_cast<std::size_t>(pick(rng));
        y[pos] = y[pos] == "a" ? "b" : "a";
        EXPECT_NE(encode_index_based(prefix(x, 5), k, ctx).values, encode_index_based(prefix(y, 5), k, ctx).values);
    }
}

TEST(Encoders, CountSumsToPrefixLengthAndPurity) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto log = qppm::testing::random_log(seed);
        const auto ctx = fit_context(log.traces());
        for (const auto &p : eventlog::build_prefix_log(log)) {
            const auto v = encode_aggregation(p, AggregationMode::Count, ctx);
            double sum = 0;
            for (double x : v.values) {
                sum += x;
            }
            EXPECT_EQ(sum, static_cast<double>(p.length));
            EXPECT_EQ(encode_index_based(p, 4, ctx), encode_index_based(p, 4, ctx));
        }
    }
}

TEST(Encoders, ByName) {
    const auto ctx = context({"a", "b"});
    const auto p = prefix({"a", "b"}, 2);
    IntraConfig cfg;
    EXPECT_EQ(cfg.label(), "index_bsd_4");
    EXPECT_EQ(encode_intra(p, cfg, ctx).size(), 4u);
    cfg.name = "agg_bool";
    EXPECT_EQ(encode_intra(p, cfg, ctx).values, (std::vector<double>{1, 1}));
    cfg.name = "last_state";
    EXPECT_EQ(encode_intra(p, cfg, ctx).values, (std::vector<double>{2}));
    cfg.name = "one_hot";
    EXPECT_THROW(validate(cfg), ConfigError);
}

TEST(Scaler, FitAndApply) {
    const double pi = std::numbers::pi;
    std::vector<FeatureVector> train{{{0, 4}, {"f", "g"}}, {{10, 4}, {"f", "g"}}};
    const auto params = fit_scaler(train);
    EXPECT_EQ(params.min, (std::vector<double>{0, 4}));
    EXPECT_EQ(params.max, (std::vector<double>{10, 4}));
    EXPECT_NEAR(apply_scaler({{10, 4}, {"f", "g"}}, params).values[0], pi, 1e-15);
    EXPECT_NEAR(apply_scaler({{5, 4}, {"f", "g"}}, params).values[0], pi / 2, 1e-15);
    EXPECT_NEAR(apply_scaler({{5, 4}, {"f", "g"}}, params).values[1], pi / 2, 1e-15);
    EXPECT_NEAR(apply_scaler({{12, 9}, {"f", "g"}}, params).values[0], pi, 1e-15);
    EXPECT_NEAR(apply_scaler({{-3, 9}, {"f", "g"}}, params).values[0], 0.0, 1e-15);
    EXPECT_THROW((void)apply_scaler({{1}, {"f"}}, params), ConfigError);
    EXPECT_THROW((void)apply_scaler({{1, 2}, {"g", "f"}}, params), ConfigError);
    EXPECT_THROW((void)fit_scaler({}), ConfigError);
}

TEST(Scaler, OutputAlwaysInsideTarget) {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> n(0.0, 5.0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<FeatureVector> train;
        for (int i = 0; i < 6; ++i) {
            train.push_back({{n(rng), n(rng), n(rng)}, {"a", "b", "c"}});
        }
        const Interval target{-1.0, 2.0};
        const auto p = fit_scaler(train, target);
        for (int i = 0; i < 20; ++i) {
            const auto y = apply_scaler({{3 * n(rng), 3 * n(rng), 3 * n(rng)}, {"a", "b", "c"}}, p);
            for (double v : y.values) {
                EXPECT_GE(v, target.lo);
                EXPECT_LE(v, target.hi);
            }
        }
    }
}
