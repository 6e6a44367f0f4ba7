#include "qppm/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <unordered_set>

#include <json.hpp>

#include "qppm/error.hpp"
#include "qppm/gram_cache.hpp"
#include "qppm/qkernel.hpp"

namespace qppm::bench {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string format_fraction(double f) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", f);
    return buf;
}

void log_line(const RunHooks &hooks, const std::string &line) {
    if (hooks.log) {
        hooks.log(line);
    }
}

std::string hash_log(const eventlog::EventLog &log) {
    std::uint64_t h = qkernel::fnv1a("qppm-log");
    for (const auto &t : log.traces()) {
        h = qkernel::fnv1a(t->case_id, h);
        for (const auto &[k, v] : t->attributes) {
            h = qkernel::fnv1a(k + "=" + v, h);
        }
        for (const auto &e : t->events) {
            h = qkernel::fnv1a(e.activity, h);
            h = qkernel::fnv1a(std::to_string(e.time().time_since_epoch().count()), h);
            h = qkernel::fnv1a(e.resource.value_or("\x1f"), h);
        }
    }
    return qkernel::hex64(h);
}

std::vector<eventlog::TracePtr> traces_of(std::span<const eventlog::PrefixSample> samples,
                                          std::span<const std::size_t> idx) {
    std::vector<eventlog::TracePtr> out;
    std::unordered_set<const eventlog::Trace *> seen;
    for (auto i : idx) {
        if (seen.insert(samples[i].trace.get()).second) {
            out.push_back(samples[i].trace);
        }
    }
    return out;
}

std::vector<std::string> case_ids(std::span<const eventlog::TracePtr> traces) {
    std::vector<std::string> out;
    out.reserve(traces.size());
    for (const auto &t : traces) {
        out.push_back(t->case_id);
    }
    return out;
}

Eigen::MatrixXd to_matrix(const std::vector<encoding::FeatureVector> &rows, std::size_t dim) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < dim; ++j) {
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i].values[j];
        }
    }
    return m;
}

qkernel::KernelKind kernel_for(const ExperimentConfig &cfg, const qsim::ShotConfig &shots) {
    switch (cfg.classifier.family) {
    case ClassifierFamily::SvcLinear:
        return qkernel::Linear{};
    case ClassifierFamily::SvcRbf:
        return qkernel::Rbf{cfg.rbf_gamma};
    case ClassifierFamily::Qke:
        return qkernel::Quantum{cfg.classifier.map, shots};
    default:
        throw ConfigError("classifier '" + cfg.classifier.name + "' has no kernel");
    }
}

/// Gram matrix, optionally through the cache.
qkernel::KernelMatrix cached(const std::optional<qkernel::GramCache> &cache, const std::string &key,
                             const std::function<qkernel::KernelMatrix()> &compute) {
    if (cache) {
        if (auto hit = cache->load(key)) {
            return {std::move(hit->first), hit->second};
        }
    }
    auto k = compute();
    if (cache) {
        cache->store(key, k.values, k.evaluations);
    }
    return k;
}

struct FoldOutcome {
    double accuracy = 0.0;
    double fit_seconds = 0.0;
    double gram_seconds = 0.0;
    std::size_t kernel_evaluations = 0;
    std::size_t cross_evaluations = 0;
    std::size_t schema_length = 0;
    std::size_t train_size = 0;
};

FoldOutcome run_fold(const ExperimentConfig &cfg, const PreparedData &data,
                     const std::optional<intercase::EventIndex> &index, std::size_t fold,
                     std::vector<std::size_t> train, const std::vector<std::size_t> &test,
                     const RunHooks &hooks) {
    const auto &samples = data.samples;
    if (cfg.sample_fraction < 1.0) {
        std::vector<eventlog::PrefixSample> pool;
        pool.reserve(train.size());
        for (auto i : train) {
            pool.push_back(samples[i]);
        }
        const auto keep = eventlog::stratified_subsample_indices(
            pool, cfg.sample_fraction, qsim::derive_seed(cfg.seed, fold, 1));
        std::vector<std::size_t> reduced;
        reduced.reserve(keep.size());
        for (auto k : keep) {
            reduced.push_back(train[k]);
        }
        train = std::move(reduced);
    }
    const auto train_traces = traces_of(samples, train);
    const auto stats = intercase::fit_stats(train_traces, cfg.inter.batch);
    if (hooks.on_fit) {
        hooks.on_fit({fold, "statistics", case_ids(train_traces)});
    }

    std::optional<intercase::PeerWindow> window;
    if (!cfg.inter.features.empty()) {
        const Duration base = cfg.inter.window_base.value_or(eventlog::median_case_duration(train_traces));
        const auto width = Duration(static_cast<Duration::rep>(
            std::llround(cfg.inter.window_fraction * static_cast<double>(base.count()))));
        if (width <= Duration::zero()) {
            throw ConfigError("inter-case window width is zero (fold " + std::to_string(fold) + ")");
        }
        window.emplace(width);
    }

    auto encode = [&](std::size_t i) {
        const auto &s = samples[i];
        auto intra = encoding::encode_intra(s, cfg.encoder, stats.context);
        encoding::FeatureVector inter;
        if (window) {
            inter = intercase::compute(cfg.inter.features, *index, intercase::Anchor::of(s), *window, stats);
        }
        return intercase::compose(std::move(intra), std::move(inter)).combined();
    };
    std::vector<encoding::FeatureVector> xtr, xte;
    xtr.reserve(train.size());
    xte.reserve(test.size());
    for (auto i : train) {
        xtr.push_back(encode(i));
    }
    for (auto i : test) {
        xte.push_back(encode(i));
    }
    const auto scaler = encoding::fit_scaler(xtr);
    if (hooks.on_fit) {
        hooks.on_fit({fold, "scaler", case_ids(train_traces)});
    }
    for (auto &v : xtr) {
        v = encoding::apply_scaler(v, scaler);
    }
    for (auto &v : xte) {
        v = encoding::apply_scaler(v, scaler);
    }
    const std::size_t dim = scaler.schema.size();
    const Eigen::MatrixXd mtr = to_matrix(xtr, dim);
    const Eigen::MatrixXd mte = to_matrix(xte, dim);
    std::vector<std::string> ytr, yte;
    for (auto i : train) {
        ytr.push_back(samples[i].label);
    }
    for (auto i : test) {
        yte.push_back(samples[i].label);
    }

    FoldOutcome out;
    out.schema_length = dim;
    out.train_size = train.size();
    const qsim::ShotConfig shots{cfg.shots, qsim::derive_seed(cfg.seed, fold, 3)};
    std::vector<std::string> predicted(test.size());

    switch (cfg.classifier.family) {
    case ClassifierFamily::Majority: {
        std::map<std::string, std::size_t> counts;
        for (const auto &y : ytr) {
            ++counts[y];
        }
        std::string best;
        std::size_t best_count = 0;
        for (const auto &[label, n] : counts) {
            if (n > best_count) {
                best = label;
                best_count = n;
            }
        }
        std::fill(predicted.begin(), predicted.end(), best);
        break;
    }
    case ClassifierFamily::SvcLinear:
    case ClassifierFamily::SvcRbf:
    case ClassifierFamily::Qke: {
        const auto kind = kernel_for(cfg, shots);
        const qkernel::GramOptions gopts{cfg.threads};
        std::optional<qkernel::GramCache> cache;
        if (cfg.cache_dir && cfg.classifier.family == ClassifierFamily::Qke) {
            cache.emplace(*cfg.cache_dir);
        }
        const std::string kdesc = qkernel::describe(kind);
        const std::string train_hash = qkernel::hex64(qkernel::hash_matrix(mtr));
        const auto fit_start = Clock::now();
        auto k = cached(cache, qkernel::GramCache::key(data.dataset_hash, cfg.feature_label(), kdesc, shots.seed,
                                                       train_hash + "/gram"),
                        [&] { return qkernel::gram(mtr, kind, gopts); });
        if (!shots.exact() && cfg.classifier.family == ClassifierFamily::Qke) {
            k = qkernel::psd_repair(k, 1e-9);
        }
        out.gram_seconds = seconds_since(fit_start);
        out.kernel_evaluations = k.evaluations;
        const auto model = svm::fit_multiclass(k.values, ytr, cfg.svm);
        out.fit_seconds = seconds_since(fit_start);
        const auto kx = cached(cache,
                               qkernel::GramCache::key(data.dataset_hash, cfg.feature_label(), kdesc, shots.seed,
                                                       train_hash + "/" +
                                                           qkernel::hex64(qkernel::hash_matrix(mte)) + "/cross"),
                               [&] { return qkernel::cross(mte, mtr, kind, gopts); });
        out.cross_evaluations = kx.evaluations;
        for (std::size_t i = 0; i < test.size(); ++i) {
            predicted[i] = model.classes[svm::predict(model, kx.values.row(static_cast<Eigen::Index>(i)).transpose())];
        }
        break;
    }
    case ClassifierFamily::Vqc: {
        vqc::VqcConfig vc;
        vc.feature_map = cfg.classifier.map;
        vc.layers = cfg.vqc_layers;
        vc.optimizer = cfg.vqc;
        vc.optimizer.seed = qsim::derive_seed(cfg.seed, fold, 2);
        vc.optimizer.shots = shots;
        vc.optimizer.threads = cfg.threads;
        const auto fit_start = Clock::now();
        const auto trained = vqc::fit(mtr, ytr, vc);
        out.fit_seconds = seconds_since(fit_start);
        for (std::size_t i = 0; i < test.size(); ++i) {
            const Eigen::VectorXd row = mte.row(static_cast<Eigen::Index>(i)).transpose();
            const qsim::ShotConfig s = shots.exact()
                                           ? shots
                                           : qsim::ShotConfig::sampled(*shots.shots, qsim::derive_seed(shots.seed, i, 7));
            predicted[i] = trained.model.classes[vqc::predict(trained.model, {row.data(), dim}, s)];
        }
        break;
    }
    }

    std::size_t correct = 0;
    for (std::size_t i = 0; i < test.size(); ++i) {
        correct += predicted[i] == yte[i] ? 1 : 0;
    }
    out.accuracy = test.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(test.size());
    return out;
}

} // namespace

ClassifierSpec ClassifierSpec::parse(std::string_view name) {
    ClassifierSpec spec;
    spec.name = std::string(name);
    if (name == "majority") {
        spec.family = ClassifierFamily::Majority;
        return spec;
    }
    if (name == "svc_linear") {
        spec.family = ClassifierFamily::SvcLinear;
        return spec;
    }
    if (name == "svc_rbf") {
        spec.family = ClassifierFamily::SvcRbf;
        return spec;
    }
    const bool qke = name.starts_with("qke_");
    const bool vq = name.starts_with("vqc_");
    const auto cut = name.rfind('_');
    if ((qke || vq) && cut != std::string_view::npos && cut > 4 && cut + 1 < name.size()) {
        const auto layers = name.substr(cut + 1);
        if (std::all_of(layers.begin(), layers.end(), [](char c) { return c >= '0' && c <= '9'; })) {
            spec.family = qke ? ClassifierFamily::Qke : ClassifierFamily::Vqc;
            spec.map.variant = qsim::parse_feature_map(name.substr(4, cut - 4));
            spec.map.layers = std::stoul(std::string(layers));
            if (spec.map.layers == 0) {
                throw ConfigError("classifier '" + spec.name + "' needs at least one layer");
            }
            return spec;
        }
    }
    throw ConfigError("unknown classifier '" + spec.name + "'");
}

std::string ExperimentConfig::feature_label() const {
    std::string out = encoder.label();
    for (auto f : inter.features) {
        out += "+";
        out += intercase::to_string(f);
    }
    return out;
}

void validate(const ExperimentConfig &cfg) {
    encoding::validate(cfg.encoder);
    if (cfg.folds < 2) {
        throw ConfigError("cross-validation needs at least 2 folds");
    }
    if (cfg.inter.features.size() > intercase::kMaxInterFeatures) {
        throw ConfigError("at most " + std::to_string(intercase::kMaxInterFeatures) +
                          " inter-case features can be combined");
    }
    const std::set<intercase::Feature> distinct(cfg.inter.features.begin(), cfg.inter.features.end());
    if (distinct.size() != cfg.inter.features.size()) {
        throw ConfigError("inter-case features must be distinct");
    }
    if (!(cfg.inter.window_fraction > 0.0)) {
        throw ConfigError("window fraction must be positive");
    }
    if (cfg.inter.window_base && *cfg.inter.window_base <= Duration::zero()) {
        throw ConfigError("window base must be positive");
    }
    if (!(cfg.sample_fraction > 0.0 && cfg.sample_fraction <= 1.0)) {
        throw ConfigError("sample fraction must be in (0, 1]");
    }
    if (cfg.min_prefix < 1 || (cfg.max_prefix && *cfg.max_prefix < cfg.min_prefix)) {
        throw ConfigError("prefix lengths must satisfy 1 <= min <= max");
    }
    if (cfg.max_samples && *cfg.max_samples < cfg.folds) {
        throw ConfigError("max_samples must be at least the number of folds");
    }
    if (cfg.shots && *cfg.shots == 0) {
        throw ConfigError("shot count must be at least 1");
    }
    if (!(cfg.svm.C > 0.0) || !(cfg.svm.tol > 0.0)) {
        throw ConfigError("SVM needs C > 0 and tol > 0");
    }
    if (cfg.rbf_gamma && !(*cfg.rbf_gamma > 0.0)) {
        throw ConfigError("rbf gamma must be positive");
    }
    if (cfg.classifier.family == ClassifierFamily::Vqc) {
        if (cfg.vqc_layers == 0 || !(cfg.vqc.learning_rate > 0.0)) {
            throw ConfigError("VQC needs layers >= 1 and a positive learning rate");
        }
    }
}

std::string fingerprint(const ExperimentConfig &cfg) { return qkernel::hex64(qkernel::fnv1a(to_json(cfg))); }

eventlog::EventLog load_dataset(const DatasetSource &source) {
    if (const auto *file = std::get_if<FileSource>(&source)) {
        return io::load_log(file->path, file->format, file->columns);
    }
    return synthetic::generate(std::get<synthetic::SyntheticConfig>(source));
}

PreparedData prepare(const ExperimentConfig &cfg) {
    validate(cfg);
    PreparedData out;
    out.log = load_dataset(cfg.dataset);
    if (cfg.preprocess.filter_singleton_variants) {
        out.log = eventlog::filter_singleton_variants(out.log);
    }
    if (cfg.preprocess.date_range) {
        out.log = eventlog::slice_date_range(out.log, cfg.preprocess.date_range->first,
                                             cfg.preprocess.date_range->second, cfg.preprocess.slice_rule,
                                             cfg.preprocess.date_basis);
    }
    out.samples = eventlog::build_prefix_log(out.log, cfg.min_prefix, cfg.max_prefix);
    if (cfg.max_samples && out.samples.size() > *cfg.max_samples) {
        // Stratified rounding can overshoot by a few samples; shrink until it fits.
        double fraction = static_cast<double>(*cfg.max_samples) / static_cast<double>(out.samples.size());
        for (int attempt = 0; attempt < 64; ++attempt) {
            const auto idx = eventlog::stratified_subsample_indices(out.samples, fraction, cfg.seed);
            if (idx.size() <= *cfg.max_samples) {
                std::vector<eventlog::PrefixSample> kept;
                kept.reserve(idx.size());
                for (auto i : idx) {
                    kept.push_back(out.samples[i]);
                }
                out.samples = std::move(kept);
                break;
            }
            fraction *= static_cast<double>(*cfg.max_samples) / static_cast<double>(idx.size());
            fraction = std::nextafter(fraction, 0.0);
        }
        if (out.samples.size() > *cfg.max_samples) {
            throw ConfigError("cannot subsample to " + std::to_string(*cfg.max_samples) +
                              " samples: too many label classes");
        }
    }
    out.dataset_hash = hash_log(out.log);
    return out;
}

RunResult run_experiment(const ExperimentConfig &cfg, const RunHooks &hooks) {
    return run_experiment(cfg, prepare(cfg), hooks);
}

RunResult run_experiment(const ExperimentConfig &cfg, const PreparedData &data, const RunHooks &hooks) {
    validate(cfg);
    RunResult result;
    result.classifier = cfg.classifier.name;
    result.features = cfg.feature_label();
    result.window = cfg.inter.features.empty() ? "-" : format_fraction(cfg.inter.window_fraction);
    result.sample_fraction = cfg.sample_fraction;
    result.seed = cfg.seed;
    result.fingerprint = fingerprint(cfg);

    const std::string context = cfg.classifier.name + " on " + result.features;
    try {
        const auto split = eventlog::make_cv_folds(data.samples, cfg.folds, cfg.seed);
        std::optional<intercase::EventIndex> index;
        if (!cfg.inter.features.empty()) {
            index.emplace(data.log);
        }
        for (std::size_t f = 0; f < cfg.folds; ++f) {
            const auto train = split.train_indices(f);
            const auto test = split.test_indices(f);
            const auto outcome = run_fold(cfg, data, index, f, train, test, hooks);
            result.fold_accuracies.push_back(outcome.accuracy);
            result.fit_seconds += outcome.fit_seconds;
            result.gram_seconds += outcome.gram_seconds;
            result.kernel_evaluations += outcome.kernel_evaluations;
            result.cross_evaluations += outcome.cross_evaluations;
            result.schema_length = outcome.schema_length;
            result.train_sizes.push_back(outcome.train_size);
            result.test_sizes.push_back(test.size());
            char line[256];
            std::snprintf(line, sizeof line, "%s fold %zu/%zu: accuracy %.4f, fit %.3f s, %zu kernel evaluations",
                          context.c_str(), f + 1, cfg.folds, outcome.accuracy, outcome.fit_seconds,
                          outcome.kernel_evaluations);
            log_line(hooks, line);
        }
    } catch (const DegenerateModelError &e) {
        throw DegenerateModelError(context + ": " + e.what());
    } catch (const ConfigError &e) {
        throw ConfigError(context + ": " + e.what());
    }
    double sum = 0.0;
    for (double a : result.fold_accuracies) {
        sum += a;
    }
    result.mean_accuracy = sum / static_cast<double>(result.fold_accuracies.size());
    return result;
}

std::vector<RunResult> window_sweep(const ExperimentConfig &cfg, std::span<const double> fractions,
                                    const RunHooks &hooks) {
    if (fractions.empty()) {
        throw ConfigError("window sweep needs at least one fraction");
    }
    const auto data = prepare(cfg);
    std::vector<RunResult> runs;
    for (double f : fractions) {
        ExperimentConfig c = cfg;
        c.inter.window_fraction = f;
        runs.push_back(run_experiment(c, data, hooks));
    }
    if (runs.size() > 1) {
        runs.push_back(average(runs));
    }
    return runs;
}

std::vector<RunResult> sampling_sweep(const ExperimentConfig &cfg, std::span<const double> fractions,
                                      const RunHooks &hooks) {
    if (fractions.empty()) {
        throw ConfigError("sampling sweep needs at least one fraction");
    }
    const auto data = prepare(cfg);
    std::vector<RunResult> runs;
    for (double f : fractions) {
        ExperimentConfig c = cfg;
        c.sample_fraction = f;
        runs.push_back(run_experiment(c, data, hooks));
    }
    return runs;
}

std::vector<RunResult> grid_prefix_length(const ExperimentConfig &cfg, std::span<const std::size_t> ks,
                                          const RunHooks &hooks) {
    if (ks.empty()) {
        throw ConfigError("prefix-length grid needs at least one k");
    }
    if (cfg.encoder.name != "index_bsd") {
        throw ConfigError("prefix-length grid needs the index_bsd encoder");
    }
    const auto data = prepare(cfg);
    std::vector<RunResult> runs;
    for (auto k : ks) {
        ExperimentConfig c = cfg;
        c.encoder.k = k;
        runs.push_back(run_experiment(c, data, hooks));
    }
    return runs;
}

RunResult average(std::span<const RunResult> runs, std::string window) {
    if (runs.empty()) {
        throw ConfigError("nothing to average");
    }
    RunResult out = runs.front();
    out.window = std::move(window);
    const auto n = static_cast<double>(runs.size());
    std::fill(out.fold_accuracies.begin(), out.fold_accuracies.end(), 0.0);
    out.mean_accuracy = out.fit_seconds = out.gram_seconds = out.sample_fraction = 0.0;
    double kev = 0.0, cev = 0.0;
    std::string prints;
    for (const auto &r : runs) {
        if (r.fold_accuracies.size() != out.fold_accuracies.size()) {
            throw ConfigError("cannot average runs with different fold counts");
        }
        for (std::size_t f = 0; f < r.fold_accuracies.size(); ++f) {
            out.fold_accuracies[f] += r.fold_accuracies[f] / n;
        }
        out.mean_accuracy += r.mean_accuracy / n;
        out.fit_seconds += r.fit_seconds / n;
        out.gram_seconds += r.gram_seconds / n;
        out.sample_fraction += r.sample_fraction / n;
        kev += static_cast<double>(r.kernel_evaluations);
        cev += static_cast<double>(r.cross_evaluations);
        prints += r.fingerprint;
    }
    out.kernel_evaluations = static_cast<std::size_t>(std::llround(kev / n));
    out.cross_evaluations = static_cast<std::size_t>(std::llround(cev / n));
    out.fingerprint = qkernel::hex64(qkernel::fnv1a(prints));
    return out;
}

namespace {

std::string column_of(const RunResult &r) {
    std::string col = r.features;
    if (r.window != "-" && r.window != "avg") {
        col += "@w" + r.window;
    }
    if (r.sample_fraction != 1.0) {
        col += "@s" + format_fraction(r.sample_fraction);
    }
    return col;
}

std::string csv_field(const std::string &s) {
    if (s.find_first_of(",\"\n") == std::string::npos) {
        return s;
    }
    std::string out = "\"";
    for (char c : s) {
        out += c;
        if (c == '"') {
            out += '"';
        }
    }
    return out + "\"";
}

} // namespace

std::string results_csv(std::span<const RunResult> results) {
    std::vector<std::string> rows, cols;
    std::map<std::pair<std::string, std::string>, double> cells;
    for (const auto &r : results) {
        const auto col = column_of(r);
        if (std::find(rows.begin(), rows.end(), r.classifier) == rows.end()) {
            rows.push_back(r.classifier);
        }
        if (std::find(cols.begin(), cols.end(), col) == cols.end()) {
            cols.push_back(col);
        }
        cells[{r.classifier, col}] = r.mean_accuracy;
    }
    std::string out = "classifier";
    for (const auto &c : cols) {
        out += "," + csv_field(c);
    }
    out += "\n";
    for (const auto &row : rows) {
        out += csv_field(row);
        for (const auto &c : cols) {
            out += ",";
            if (auto it = cells.find({row, c}); it != cells.end()) {
                char buf[32];
                std::snprintf(buf, sizeof buf, "%.4f", it->second);
                out += buf;
            }
        }
        out += "\n";
    }
    return out;
}

std::string results_json(std::span<const RunResult> results, std::string_view provenance) {
    nlohmann::ordered_json j;
    j["format"] = "qppm.results";
    j["version"] = 1;
    j["provenance"] = provenance.empty() ? nlohmann::ordered_json::object()
                                         : nlohmann::ordered_json::parse(provenance);
    j["results"] = nlohmann::ordered_json::array();
    for (const auto &r : results) {
        nlohmann::ordered_json e;
        e["classifier"] = r.classifier;
        e["features"] = r.features;
        e["window"] = r.window;
        e["sample_fraction"] = r.sample_fraction;
        e["fold_accuracies"] = r.fold_accuracies;
        e["mean_accuracy"] = r.mean_accuracy;
        e["fit_seconds"] = r.fit_seconds;
        e["gram_seconds"] = r.gram_seconds;
        e["kernel_evaluations"] = r.kernel_evaluations;
        e["cross_evaluations"] = r.cross_evaluations;
        e["train_sizes"] = r.train_sizes;
        e["test_sizes"] = r.test_sizes;
        e["schema_length"] = r.schema_length;
        e["seed"] = r.seed;
        e["fingerprint"] = r.fingerprint;
        j["results"].push_back(std::move(e));
    }
    return j.dump(2) + "\n";
}

void emit_results(std::span<const RunResult> results, const std::filesystem::path &dir,
                  std::string_view provenance) {
    std::filesystem::create_directories(dir);
    auto write = [&](const std::filesystem::path &p, const std::string &text) {
        std::ofstream out(p, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw Error("cannot write '" + p.string() + "'");
        }
        out << text;
    };
    write(dir / "results.csv", results_csv(results));
    write(dir / "results.json", results_json(results, provenance));
}

std::vector<RunResult> run_bench(const BenchSpec &spec, const RunHooks &hooks) {
    std::vector<std::string> classifiers = spec.classifiers;
    if (classifiers.empty()) {
        classifiers.push_back(spec.base.classifier.name);
    }
    std::vector<std::vector<intercase::Feature>> feature_sets = spec.feature_sets;
    if (feature_sets.empty()) {
        feature_sets.push_back(spec.base.inter.features);
    }
    std::vector<double> windows = spec.window_fractions;
    if (windows.empty()) {
        windows.push_back(spec.base.inter.window_fraction);
    }
    // Validate every combination before spending time on any of them.
    std::vector<ExperimentConfig> configs;
    for (const auto &c : classifiers) {
        for (const auto &fs : feature_sets) {
            ExperimentConfig cfg = spec.base;
            cfg.classifier = ClassifierSpec::parse(c);
            cfg.inter.features = fs;
            validate(cfg);
            configs.push_back(std::move(cfg));
        }
    }
    const auto data = prepare(spec.base);
    std::vector<RunResult> out;
    for (const auto &cfg : configs) {
        switch (spec.mode) {
        case BenchMode::Experiment:
            out.push_back(run_experiment(cfg, data, hooks));
            break;
        case BenchMode::Table: {
            if (cfg.inter.features.empty()) {
                out.push_back(run_experiment(cfg, data, hooks));
                break;
            }
            std::vector<RunResult> runs;
            for (double w : windows) {
                ExperimentConfig c = cfg;
                c.inter.window_fraction = w;
                runs.push_back(run_experiment(c, data, hooks));
            }
            out.push_back(runs.size() > 1 ? average(runs) : runs.front());
            break;
        }
        case BenchMode::WindowSweep: {
            std::vector<RunResult> runs;
            for (double w : windows) {
                ExperimentConfig c = cfg;
                c.inter.window_fraction = w;
                runs.push_back(run_experiment(c, data, hooks));
            }
            if (runs.size() > 1) {
                runs.push_back(average(runs));
            }
            out.insert(out.end(), runs.begin(), runs.end());
            break;
        }
        case BenchMode::SamplingSweep: {
            if (spec.sampling_fractions.empty()) {
                throw ConfigError("sampling sweep needs at least one fraction");
            }
            for (double f : spec.sampling_fractions) {
                ExperimentConfig c = cfg;
                c.sample_fraction = f;
                out.push_back(run_experiment(c, data, hooks));
            }
            break;
        }
        case BenchMode::GridPrefixLength: {
            if (spec.ks.empty()) {
                throw ConfigError("prefix-length grid needs at least one k");
            }
            for (auto k : spec.ks) {
                ExperimentConfig c = cfg;
                c.encoder.k = k;
                out.push_back(run_experiment(c, data, hooks));
            }
            break;
        }
        }
    }
    return out;
}

} // namespace qppm::bench
