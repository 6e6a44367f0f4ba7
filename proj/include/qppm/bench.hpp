#pragma once

// Cross-validated experiments over encoder x classifier grids, window and
// sampling sweeps, and result emission.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "qppm/encoding.hpp"
#include "qppm/eventlog.hpp"
#include "qppm/intercase.hpp"
#include "qppm/io.hpp"
#include "qppm/qsim.hpp"
#include "qppm/svm.hpp"
#include "qppm/synthetic.hpp"
#include "qppm/vqc.hpp"

namespace qppm::bench {

struct FileSource {
    std::filesystem::path path;
    std::optional<io::LogFormat> format;
    io::ColumnMap columns;
};

using DatasetSource = std::variant<FileSource, synthetic::SyntheticConfig>;

struct PreprocessConfig {
    bool filter_singleton_variants = false;
    std::optional<std::pair<std::chrono::sys_days, std::chrono::sys_days>> date_range;
    eventlog::SliceRule slice_rule = eventlog::SliceRule::FirstEvent;
    eventlog::DateBasis date_basis = eventlog::DateBasis::Utc;
};

enum class ClassifierFamily { Majority, SvcLinear, SvcRbf, Qke, Vqc };

/// Parsed from names such as `svc_rbf`, `qke_zz_2`, `qke_zz_a_2`,
/// `qke_angle_1`, `vqc_zz_2`, `majority`.
struct ClassifierSpec {
    std::string name;
    ClassifierFamily family = ClassifierFamily::Majority;
    qsim::FeatureMapKind map;

    [[nodiscard]] static ClassifierSpec parse(std::string_view name);
    [[nodiscard]] bool quantum() const {
        return family == ClassifierFamily::Qke || family == ClassifierFamily::Vqc;
    }
};

struct InterConfig {
    std::vector<intercase::Feature> features;
    double window_fraction = 0.3;
    /// Base length the fraction applies to; unset means the median case
    /// duration of the training traces of each fold.
    std::optional<Duration> window_base;
    intercase::BatchParams batch;
};

struct ExperimentConfig {
    DatasetSource dataset = synthetic::SyntheticConfig{};
    PreprocessConfig preprocess;
    std::size_t min_prefix = 1;
    std::optional<std::size_t> max_prefix;
    /// Stratified cap on the number of prefix samples, applied before folding.
    std::optional<std::size_t> max_samples;
    /// Stratified fraction of each training fold actually used.
    double sample_fraction = 1.0;
    encoding::IntraConfig encoder;
    InterConfig inter;
    ClassifierSpec classifier = ClassifierSpec::parse("svc_rbf");
    svm::SvmParams svm;
    std::optional<double> rbf_gamma;
    std::size_t vqc_layers = 2;
    vqc::OptimizerConfig vqc;
    std::size_t folds = 3;
    std::uint64_t seed = 0;
    /// Unset = exact probabilities.
    std::optional<std::size_t> shots;
    std::size_t threads = 1;
    std::optional<std::filesystem::path> cache_dir;

    /// "index_bsd_4" or "index_bsd_4+peer_cases+avg_delay".
    [[nodiscard]] std::string feature_label() const;
};

/// Throws ConfigError on inconsistent settings (folds < 2, more than two
/// inter-case features, fractions outside (0, 1], unknown encoder...).
void validate(const ExperimentConfig &cfg);

/// Stable hash of everything that influences results.
[[nodiscard]] std::string fingerprint(const ExperimentConfig &cfg);

struct RunResult {
    std::string classifier;
    std::string features;
    /// "0.3", or "avg" for a window-averaged row.
    std::string window;
    double sample_fraction = 1.0;
    std::vector<double> fold_accuracies;
    double mean_accuracy = 0.0;
    /// Gram construction plus solver training, summed over folds.
    double fit_seconds = 0.0;
    double gram_seconds = 0.0;
    /// Training-Gram kernel evaluations, summed over folds.
    std::size_t kernel_evaluations = 0;
    std::size_t cross_evaluations = 0;
    std::vector<std::size_t> train_sizes;
    std::vector<std::size_t> test_sizes;
    std::size_t schema_length = 0;
    std::uint64_t seed = 0;
    std::string fingerprint;
};

/// Samples and log after preprocessing; reusable across runs that share the
/// dataset settings.
struct PreparedData {
    eventlog::EventLog log;
    std::vector<eventlog::PrefixSample> samples;
    std::string dataset_hash;
};

[[nodiscard]] eventlog::EventLog load_dataset(const DatasetSource &source);
[[nodiscard]] PreparedData prepare(const ExperimentConfig &cfg);

/// Something fitted during a run, with the cases it was fitted on.
struct FitRecord {
    std::size_t fold = 0;
    std::string what;
    std::vector<std::string> case_ids;
};

struct RunHooks {
    std::function<void(const FitRecord &)> on_fit;
    std::function<void(std::string_view)> log;
};

[[nodiscard]] RunResult run_experiment(const ExperimentConfig &cfg, const RunHooks &hooks = {});
[[nodiscard]] RunResult run_experiment(const ExperimentConfig &cfg, const PreparedData &data,
                                       const RunHooks &hooks = {});

/// One run per fraction, plus an averaged row when there are several.
[[nodiscard]] std::vector<RunResult> window_sweep(const ExperimentConfig &cfg,
                                                  std::span<const double> fractions,
                                                  const RunHooks &hooks = {});
[[nodiscard]] std::vector<RunResult> sampling_sweep(const ExperimentConfig &cfg,
                                                    std::span<const double> fractions,
                                                    const RunHooks &hooks = {});
[[nodiscard]] std::vector<RunResult> grid_prefix_length(const ExperimentConfig &cfg,
                                                        std::span<const std::size_t> ks,
                                                        const RunHooks &hooks = {});

/// Mean over runs of per-fold and mean accuracies; timings and counts are
/// averaged as well.
[[nodiscard]] RunResult average(std::span<const RunResult> runs, std::string window = "avg");

/// Writes `results.csv` (classifier rows x feature columns of mean
/// accuracy) and `results.json` into `dir`. `provenance` is embedded in the
/// JSON verbatim (must be a JSON object text, or empty).
void emit_results(std::span<const RunResult> results, const std::filesystem::path &dir,
                  std::string_view provenance = {});

[[nodiscard]] std::string results_csv(std::span<const RunResult> results);
[[nodiscard]] std::string results_json(std::span<const RunResult> results,
                                       std::string_view provenance = {});

/// Top-level bench description read from a JSON config.
enum class BenchMode { Experiment, WindowSweep, SamplingSweep, GridPrefixLength, Table };

struct BenchSpec {
    ExperimentConfig base;
    BenchMode mode = BenchMode::Experiment;
    std::vector<std::string> classifiers;
    /// Each entry is one inter-case feature set (possibly empty).
    std::vector<std::vector<intercase::Feature>> feature_sets;
    std::vector<double> window_fractions;
    std::vector<double> sampling_fractions;
    std::vector<std::size_t> ks;
    std::filesystem::path out_dir = "results";
};

/// Parses the JSON config. Relative dataset paths resolve against
/// `data_root` when given, else against `base_dir`.
[[nodiscard]] BenchSpec parse_bench_spec(std::string_view json_text,
                                         const std::filesystem::path &base_dir = {},
                                         const std::optional<std::filesystem::path> &data_root = {});
[[nodiscard]] std::string to_json(const ExperimentConfig &cfg);

[[nodiscard]] std::vector<RunResult> run_bench(const BenchSpec &spec, const RunHooks &hooks = {});

} // namespace qppm::bench
