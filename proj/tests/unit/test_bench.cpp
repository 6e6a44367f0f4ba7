#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "qppm/bench.hpp"
#include "qppm/error.hpp"
#include "support/oracles.hpp"

using namespace qppm;
using namespace qppm::bench;
using qppm::testing::at_seconds;
namespace fs = std::filesystem;

namespace {

eventlog::TracePtr trace_of(const std::string &id, const std::vector<std::string> &acts, std::int64_t start) {
    std::vector<eventlog::Event> ev;
    for (std::size_t i = 0; i < acts.size(); ++i) {
        ev.push_back({id, acts[i], at_seconds(start + 3600 * static_cast<std::int64_t>(i)), std::nullopt});
    }
    return eventlog::make_trace(id, std::move(ev));
}

ExperimentConfig small_config(const std::string &classifier, std::uint64_t seed = 5) {
    ExperimentConfig cfg;
    synthetic::SyntheticConfig syn;
    syn.cases = 60;
    syn.seed = 3;
    cfg.dataset = syn;
    cfg.max_samples = 90;
    cfg.encoder.k = 2;
    cfg.classifier = ClassifierSpec::parse(classifier);
    cfg.seed = seed;
    cfg.vqc.epochs = 2;
    return cfg;
}

std::string slurp(const fs::path &p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path temp_dir(const std::string &name) {
    const auto dir = fs::temp_directory_path() / "qppm-bench-tests" / name;
    fs::remove_all(dir);
    return dir;
}

} // namespace

TEST(Classifiers, ParseNames) {
    EXPECT_EQ(ClassifierSpec::parse("majority").family, ClassifierFamily::Majority);
    const auto q = ClassifierSpec::parse("qke_zz_2");
    EXPECT_EQ(q.family, ClassifierFamily::Qke);
    EXPECT_EQ(q.map, (qsim::FeatureMapKind{qsim::FeatureMapVariant::ZZ, 2}));
    EXPECT_EQ(ClassifierSpec::parse("qke_zz_a_1").map.variant, qsim::FeatureMapVariant::AngleZZ);
    EXPECT_EQ(ClassifierSpec::parse("qke_angle_zz_2").map.variant, qsim::FeatureMapVariant::AngleZZ);
    EXPECT_EQ(ClassifierSpec::parse("vqc_angle_1").family, ClassifierFamily::Vqc);
    for (const char *bad : {"svc_poly", "qke_zz", "qke_zz_0", "qke_pauli_2", "vqc__2", ""}) {
        EXPECT_THROW((void)ClassifierSpec::parse(bad), ConfigError) << bad;
    }
}

TEST(Experiment, MajorityOnNinetyTenFixture) {
    std::vector<eventlog::TracePtr> traces;
    for (int i = 0; i < 30; ++i) {
        traces.push_back(i < 27 ? trace_of("c" + std::to_string(i), {"a", "b"}, i * 100)
                                : trace_of("c" + std::to_string(i), {"a"}, i * 100));
    }
    PreparedData data;
    data.log = eventlog::EventLog(traces);
    data.samples = eventlog::build_prefix_log(data.log, 1, 1);
    data.dataset_hash = "fixture";
    ExperimentConfig cfg;
    cfg.classifier = ClassifierSpec::parse("majority");
    cfg.encoder.k = 1;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        cfg.seed = seed;
        const auto r = run_experiment(cfg, data);
        EXPECT_NEAR(r.mean_accuracy, 0.9, 1e-12);
        EXPECT_EQ(r.test_sizes, (std::vector<std::size_t>{10, 10, 10}));
        EXPECT_EQ(r.kernel_evaluations, 0u);
    }
}

TEST(Experiment, DeterministicInExactAndShotMode) {
    for (const char *name : {"svc_rbf", "qke_zz_1", "vqc_angle_1"}) {
        auto cfg = small_config(name);
        cfg.inter.features = {intercase::Feature::PeerCases};
        const auto a = run_experiment(cfg);
        const auto b = run_experiment(cfg);
        EXPECT_EQ(a.fold_accuracies, b.fold_accuracies) << name;
        EXPECT_EQ(a.kernel_evaluations, b.kernel_evaluations);
        EXPECT_EQ(a.fingerprint, b.fingerprint);
        for (double acc : a.fold_accuracies) {
            EXPECT_GE(acc, 0.0);
            EXPECT_LE(acc, 1.0);
        }
        EXPECT_GE(a.fit_seconds, 0.0);
    }
    auto shots = small_config("qke_zz_1");
    shots.shots = 200;
    shots.threads = 3;
    const auto a = run_experiment(shots);
    shots.threads = 1;
    EXPECT_EQ(run_experiment(shots).fold_accuracies, a.fold_accuracies);
}

TEST(Experiment, QuantumEvaluationCountIsQuadratic) {
    const auto cfg = small_config("qke_angle_1");
    const auto r = run_experiment(cfg);
    std::size_t expect = 0, cross = 0;
    for (std::size_t f = 0; f < r.train_sizes.size(); ++f) {
        expect += r.train_sizes[f] * (r.train_sizes[f] - 1) / 2;
        cross += r.train_sizes[f] * r.test_sizes[f];
    }
    EXPECT_EQ(r.kernel_evaluations, expect);
    EXPECT_EQ(r.cross_evaluations, cross);
}

TEST(Experiment, FitsOnlySeeTrainingCases) {
    auto cfg = small_config("svc_linear");
    cfg.inter.features = {intercase::Feature::AvgDelay, intercase::Feature::Batch};
    cfg.sample_fraction = 0.6;
    const auto data = prepare(cfg);
    const auto split = eventlog::make_cv_folds(data.samples, cfg.folds, cfg.seed);
    std::vector<FitRecord> records;
    RunHooks hooks;
    hooks.on_fit = [&](const FitRecord &r) { records.push_back(r); };
    (void)run_experiment(cfg, data, hooks);
    ASSERT_EQ(records.size(), 2 * cfg.folds);
    for (const auto &rec : records) {
        std::set<std::string> train, test;
        for (auto i : split.train_indices(rec.fold)) {
            train.insert(data.samples[i].case_id());
        }
        for (auto i : split.test_indices(rec.fold)) {
            test.insert(data.samples[i].case_id());
        }
        EXPECT_FALSE(rec.case_ids.empty());
        for (const auto &c : rec.case_ids) {
            EXPECT_TRUE(train.count(c) == 1) << rec.what << " fold " << rec.fold << " saw " << c;
            EXPECT_TRUE(test.count(c) == 0);
        }
    }
}

TEST(Experiment, ConfigValidation) {
    auto cfg = small_config("svc_rbf");
    cfg.folds = 1;
    EXPECT_THROW(validate(cfg), ConfigError);
    cfg = small_config("svc_rbf");
    cfg.inter.features = {intercase::Feature::PeerCases, intercase::Feature::PeerAct, intercase::Feature::ResCount};
    EXPECT_THROW(validate(cfg), ConfigError);
    cfg = small_config("svc_rbf");
    cfg.sample_fraction = 0.0;
    EXPECT_THROW(validate(cfg), ConfigError);
    cfg = small_config("svc_rbf");
    cfg.encoder.name = "word2vec";
    EXPECT_THROW(validate(cfg), ConfigError);
    cfg = small_config("svc_rbf");
    cfg.dataset = FileSource{"/nonexistent/log.xes", std::nullopt, {}};
    EXPECT_THROW((void)run_experiment(cfg), ConfigError);
}

TEST(Experiment, FingerprintTracksResultRelevantSettings) {
    auto a = small_config("qke_zz_2");
    auto b = a;
    b.threads = 8;
    b.cache_dir = "/tmp/somewhere";
    EXPECT_EQ(fingerprint(a), fingerprint(b));
    b.seed = a.seed + 1;
    EXPECT_NE(fingerprint(a), fingerprint(b));
    b = a;
    b.shots = 1000;
    EXPECT_NE(fingerprint(a), fingerprint(b));
    EXPECT_EQ(a.feature_label(), "index_bsd_2");
    a.inter.features = {intercase::Feature::PeerCases, intercase::Feature::AvgDelay};
    EXPECT_EQ(a.feature_label(), "index_bsd_2+peer_cases+avg_delay");
}

TEST(Sweeps, WindowSweepAverages) {
    auto cfg = small_config("svc_rbf");
    cfg.inter.features = {intercase::Feature::PeerAct};
    const std::vector<double> three{0.15, 0.3, 0.5};
    const auto runs = window_sweep(cfg, three);
    ASSERT_EQ(runs.size(), 4u);
    EXPECT_EQ(runs[0].window, "0.15");
    EXPECT_EQ(runs[3].window, "avg");
    EXPECT_NEAR(runs[3].mean_accuracy, (runs[0].mean_accuracy + runs[1].mean_accuracy + runs[2].mean_accuracy) / 3,
                1e-12);
    const std::vector<double> one{0.3};
    const auto single = window_sweep(cfg, one);
    ASSERT_EQ(single.size(), 1u);
    EXPECT_EQ(single[0].fold_accuracies, runs[1].fold_accuracies);
    EXPECT_THROW((void)window_sweep(cfg, std::vector<double>{}), ConfigError);
}

TEST(Sweeps, SamplingSweep) {
    const auto cfg = small_config("qke_angle_1");
    const std::vector<double> fr{1.0, 0.5};
    const auto runs = sampling_sweep(cfg, fr);
    ASSERT_EQ(runs.size(), 2u);
    const auto full = run_experiment(cfg);
    EXPECT_EQ(runs[0].fold_accuracies, full.fold_accuracies);
    EXPECT_EQ(runs[0].kernel_evaluations, full.kernel_evaluations);
    std::size_t expect = 0;
    for (auto m : runs[1].train_sizes) {
        expect += m * (m - 1) / 2;
    }
    EXPECT_EQ(runs[1].kernel_evaluations, expect);
    EXPECT_EQ(runs[1].test_sizes, full.test_sizes);
    // Per-class rounding moves each fold by at most half a sample per class.
    std::set<std::string> labels;
    for (const auto &s : prepare(cfg).samples) {
        labels.insert(s.label);
    }
    ASSERT_EQ(runs[1].train_sizes.size(), full.train_sizes.size());
    for (std::size_t f = 0; f < full.train_sizes.size(); ++f) {
        const double half = 0.5 * static_cast<double>(full.train_sizes[f]);
        EXPECT_LE(std::abs(static_cast<double>(runs[1].train_sizes[f]) - half), 0.5 * static_cast<double>(labels.size()));
    }
    const double ratio = static_cast<double>(runs[1].kernel_evaluations) / static_cast<double>(full.kernel_evaluations);
    EXPECT_GT(ratio, 0.2);
    EXPECT_LT(ratio, 0.35);
    EXPECT_THROW((void)sampling_sweep(cfg, std::vector<double>{}), ConfigError);
}

TEST(Sweeps, GridPrefixLength) {
    const auto cfg = small_config("svc_linear");
    const std::vector<std::size_t> ks{1, 2, 3, 4, 5, 6};
    const auto runs = grid_prefix_length(cfg, ks);
    ASSERT_EQ(runs.size(), 6u);
    for (std::size_t i = 1; i < runs.size(); ++i) {
        EXPECT_GT(runs[i].schema_length, runs[i - 1].schema_length);
    }
    EXPECT_EQ(runs[3].features, "index_bsd_4");
    EXPECT_THROW((void)grid_prefix_length(cfg, std::vector<std::size_t>{}), ConfigError);
}

TEST(Results, TableShapeAndEmission) {
    std::vector<RunResult> results;
    const std::vector<std::string> classifiers{"majority", "svc_linear", "svc_rbf", "qke_angle_1", "qke_angle_2",
                                               "qke_zz_1", "qke_zz_2", "vqc_zz_2"};
    const std::vector<std::string> features{"index_bsd_4", "index_bsd_4+peer_cases", "index_bsd_4+peer_act",
                                            "index_bsd_4+res_count", "index_bsd_4+avg_delay",
                                            "index_bsd_4+freq_act", "index_bsd_4+top_res"};
    double v = 0.5;
    for (const auto &c : classifiers) {
        for (const auto &f : features) {
            RunResult r;
            r.classifier = c;
            r.features = f;
            r.window = f == features[0] ? "-" : "avg";
            r.mean_accuracy = v;
            r.fold_accuracies = {v, v, v};
            v += 0.001;
            results.push_back(r);
        }
    }
    const auto csv = results_csv(results);
    std::istringstream in(csv);
    std::string line;
    std::size_t rows = 0, cells = 0;
    std::getline(in, line);
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 7);
    while (std::getline(in, line)) {
        ++rows;
        cells += static_cast<std::size_t>(std::count(line.begin(), line.end(), ','));
    }
    EXPECT_EQ(rows, 8u);
    EXPECT_EQ(cells, 56u);

    EXPECT_EQ(results_csv({}), "classifier\n");

    const auto d1 = temp_dir("a"), d2 = temp_dir("b");
    emit_results(results, d1, "{\"seed\":1}");
    emit_results(results, d2, "{\"seed\":1}");
    EXPECT_EQ(slurp(d1 / "results.csv"), csv);
    EXPECT_EQ(slurp(d1 / "results.csv"), slurp(d2 / "results.csv"));
    EXPECT_EQ(slurp(d1 / "results.json"), slurp(d2 / "results.json"));
    emit_results(results, d1, "{\"seed\":1}");
    EXPECT_EQ(slurp(d1 / "results.json"), slurp(d2 / "results.json"));

    const auto empty = temp_dir("empty");
    emit_results({}, empty);
    EXPECT_EQ(slurp(empty / "results.csv"), "classifier\n");
}

TEST(Config, ParsesAndRejects) {
    const auto spec = parse_bench_spec(R"({
        "dataset": {"synthetic": {"cases": 40, "seed": 2}},
        "encoder": {"name": "index_bsd", "k": 3},
        "intercase": {"feature_sets": [[], ["peer_cases", "freq_act"]], "window_fractions": [0.15, 0.5],
                      "batch": {"epsilon_seconds": 3600, "min_burst": 4}},
        "classifier": ["svc_rbf", "qke_zz_2"],
        "svm": {"C": 2.0},
        "folds": 4, "seed": 9, "shots": 1000,
        "bench": {"mode": "table", "out_dir": "out"}
    })",
                                       "/base");
    EXPECT_EQ(spec.mode, BenchMode::Table);
    EXPECT_EQ(spec.classifiers, (std::vector<std::string>{"svc_rbf", "qke_zz_2"}));
    ASSERT_EQ(spec.feature_sets.size(), 2u);
    EXPECT_EQ(spec.feature_sets[1].size(), 2u);
    EXPECT_EQ(spec.window_fractions, (std::vector<double>{0.15, 0.5}));
    EXPECT_EQ(spec.base.encoder.k, 3u);
    EXPECT_EQ(spec.base.folds, 4u);
    EXPECT_EQ(spec.base.shots, std::optional<std::size_t>(1000));
    EXPECT_EQ(spec.base.svm.C, 2.0);
    EXPECT_EQ(spec.base.inter.batch.min_burst, 4u);
    EXPECT_EQ(spec.base.inter.batch.epsilon, std::chrono::hours(1));
    EXPECT_EQ(spec.out_dir, fs::path("/base/out"));

    const auto again = parse_bench_spec(R"({"dataset": {"synthetic": {}}, "seed": 9})");
    EXPECT_EQ(fingerprint(parse_bench_spec(to_json(again.base)).base), fingerprint(again.base));

    const auto file = parse_bench_spec(R"({"dataset": {"path": "logs/x.xes"}})", "/cfg", fs::path("/data"));
    EXPECT_EQ(std::get<FileSource>(file.base.dataset).path, fs::path("/data/logs/x.xes"));

    EXPECT_THROW((void)parse_bench_spec(R"({"datset": {}})"), ConfigError);
    EXPECT_THROW((void)parse_bench_spec(R"({"intercase": {"features": ["peer_cases", "peer_act", "res_count"]}})"),
                 ConfigError);
    EXPECT_THROW((void)parse_bench_spec(R"({"classifier": "svc_poly"})"), ConfigError);
    EXPECT_THROW((void)parse_bench_spec(R"({"encoder": {"name": "word2vec"}})"), ConfigError);
    EXPECT_THROW((void)parse_bench_spec("{not json"), ConfigError);
}

TEST(Bench, RunBenchTableMode) {
    BenchSpec spec;
    spec.base = small_config("svc_rbf");
    spec.mode = BenchMode::Table;
    spec.classifiers = {"majority", "svc_linear"};
    spec.feature_sets = {{}, {intercase::Feature::PeerCases}};
    spec.window_fractions = {0.15, 0.5};
    const auto results = run_bench(spec);
    ASSERT_EQ(results.size(), 4u);
    for (const auto &r : results) {
        EXPECT_EQ(r.window, r.features == "index_bsd_2" ? "-" : "avg");
    }
    spec.classifiers = {"svc_linear", "nope"};
    EXPECT_THROW((void)run_bench(spec), ConfigError);
}
