#include <cmath>

#include <json.hpp>

#include "qppm/bench.hpp"
#include "qppm/error.hpp"

namespace qppm::bench {
namespace {

using nlohmann::json;

std::string date_string(std::chrono::sys_days d) {
    const std::chrono::year_month_day ymd{d};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

std::chrono::sys_days date_of(const json &j) {
    const auto text = j.get<std::string>();
    const auto d = parse_date(text);
    if (!d) {
        throw ConfigError("invalid date '" + text + "' (expected YYYYMMDD or YYYY-MM-DD)");
    }
    return *d;
}

std::string_view format_name(io::LogFormat f) { return f == io::LogFormat::Xes ? "xes" : "csv"; }

io::LogFormat parse_format(std::string_view s) {
    if (s == "xes") {
        return io::LogFormat::Xes;
    }
    if (s == "csv") {
        return io::LogFormat::Csv;
    }
    throw ConfigError("unknown log format '" + std::string(s) + "'");
}

template <typename T>
void read(const json &j, const char *key, T &target) {
    if (j.contains(key) && !j.at(key).is_null()) {
        target = j.at(key).get<T>();
    }
}

template <typename T>
void read_opt(const json &j, const char *key, std::optional<T> &target) {
    if (j.contains(key)) {
        if (j.at(key).is_null()) {
            target.reset();
        } else {
            target = j.at(key).get<T>();
        }
    }
}

void check_keys(const json &j, std::initializer_list<std::string_view> allowed, std::string_view where) {
    if (!j.is_object()) {
        throw ConfigError(std::string(where) + " must be an object");
    }
    for (const auto &item : j.items()) {
        if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
            throw ConfigError("unknown key '" + item.key() + "' in " + std::string(where));
        }
    }
}

std::vector<intercase::Feature> features_of(const json &j) {
    std::vector<intercase::Feature> out;
    for (const auto &f : j) {
        out.push_back(intercase::parse_feature(f.get<std::string>()));
    }
    return out;
}

Duration seconds(double s) { return Duration(static_cast<Duration::rep>(std::llround(s * 1000.0))); }

void parse_dataset(const json &j, ExperimentConfig &cfg, const std::filesystem::path &base_dir,
                   const std::optional<std::filesystem::path> &data_root) {
    check_keys(j, {"path", "format", "columns", "synthetic"}, "dataset");
    if (j.contains("synthetic")) {
        const auto &s = j.at("synthetic");
        check_keys(s, {"cases", "seed", "period_days", "busy_rate", "quiet_rate", "load_signal", "officers"},
                   "dataset.synthetic");
        synthetic::SyntheticConfig sc;
        read(s, "cases", sc.cases);
        read(s, "seed", sc.seed);
        read(s, "period_days", sc.period_days);
        read(s, "busy_rate", sc.busy_rate);
        read(s, "quiet_rate", sc.quiet_rate);
        read(s, "load_signal", sc.load_signal);
        read(s, "officers", sc.officers);
        cfg.dataset = sc;
        return;
    }
    FileSource fs;
    std::filesystem::path p = j.at("path").get<std::string>();
    if (p.is_relative()) {
        p = data_root ? *data_root / p : base_dir / p;
    }
    fs.path = p;
    if (j.contains("format") && !j.at("format").is_null()) {
        fs.format = parse_format(j.at("format").get<std::string>());
    }
    if (j.contains("columns")) {
        const auto &c = j.at("columns");
        check_keys(c, {"case_id", "activity", "timestamp", "resource", "case_attribute_prefix"}, "dataset.columns");
        read(c, "case_id", fs.columns.case_id);
        read(c, "activity", fs.columns.activity);
        read(c, "timestamp", fs.columns.timestamp);
        read(c, "resource", fs.columns.resource);
        read(c, "case_attribute_prefix", fs.columns.case_attribute_prefix);
    }
    cfg.dataset = fs;
}

} // namespace

BenchSpec parse_bench_spec(std::string_view json_text, const std::filesystem::path &base_dir,
                           const std::optional<std::filesystem::path> &data_root) {
    BenchSpec spec;
    ExperimentConfig &cfg = spec.base;
    try {
        const json j = json::parse(json_text);
        check_keys(j,
                   {"dataset", "preprocess", "prefix", "max_samples", "sample_fraction", "encoder", "intercase", "classifier", "svm",
                    "vqc", "folds", "seed", "shots", "threads", "cache_dir", "bench"},
                   "config");
        if (j.contains("dataset")) {
            parse_dataset(j.at("dataset"), cfg, base_dir, data_root);
        }
        if (j.contains("preprocess")) {
            const auto &p = j.at("preprocess");
            check_keys(p, {"filter_singleton_variants", "date_range", "slice_rule", "date_basis"}, "preprocess");
            read(p, "filter_singleton_variants", cfg.preprocess.filter_singleton_variants);
            if (p.contains("date_range") && !p.at("date_range").is_null()) {
                const auto &r = p.at("date_range");
                if (!r.is_array() || r.size() != 2) {
                    throw ConfigError("preprocess.date_range must be [start, end]");
                }
                cfg.preprocess.date_range = std::make_pair(date_of(r[0]), date_of(r[1]));
                if (cfg.preprocess.date_range->first > cfg.preprocess.date_range->second) {
                    throw ConfigError("preprocess.date_range start is after its end");
                }
            }
            if (p.contains("slice_rule")) {
                cfg.preprocess.slice_rule = eventlog::parse_slice_rule(p.at("slice_rule").get<std::string>());
            }
            if (p.contains("date_basis")) {
                cfg.preprocess.date_basis = eventlog::parse_date_basis(p.at("date_basis").get<std::string>());
            }
        }
        if (j.contains("prefix")) {
            const auto &p = j.at("prefix");
            check_keys(p, {"min", "max"}, "prefix");
            read(p, "min", cfg.min_prefix);
            read_opt(p, "max", cfg.max_prefix);
        }
        read_opt(j, "max_samples", cfg.max_samples);
        read(j, "sample_fraction", cfg.sample_fraction);
        if (j.contains("encoder")) {
            const auto &e = j.at("encoder");
            check_keys(e, {"name", "k", "static_attributes"}, "encoder");
            read(e, "name", cfg.encoder.name);
            read(e, "k", cfg.encoder.k);
            read(e, "static_attributes", cfg.encoder.static_attributes);
        }
        if (j.contains("intercase")) {
            const auto &ic = j.at("intercase");
            check_keys(ic,
                       {"features", "feature_sets", "window_fraction", "window_fractions", "window_base", "batch"},
                       "intercase");
            if (ic.contains("features")) {
                cfg.inter.features = features_of(ic.at("features"));
            }
            if (ic.contains("feature_sets")) {
                for (const auto &fs : ic.at("feature_sets")) {
                    spec.feature_sets.push_back(features_of(fs));
                }
            }
            read(ic, "window_fraction", cfg.inter.window_fraction);
            read(ic, "window_fractions", spec.window_fractions);
            if (ic.contains("window_base")) {
                const auto &b = ic.at("window_base");
                if (b.is_string() && b.get<std::string>() == "median") {
                    cfg.inter.window_base.reset();
                } else if (b.is_number()) {
                    cfg.inter.window_base = seconds(b.get<double>());
                } else {
                    throw ConfigError("intercase.window_base must be \"median\" or a number of seconds");
                }
            }
            if (ic.contains("batch")) {
                const auto &b = ic.at("batch");
                check_keys(b, {"epsilon_seconds", "min_burst"}, "intercase.batch");
                if (b.contains("epsilon_seconds")) {
                    cfg.inter.batch.epsilon = seconds(b.at("epsilon_seconds").get<double>());
                }
                read(b, "min_burst", cfg.inter.batch.min_burst);
            }
        }
        if (j.contains("classifier")) {
            const auto &c = j.at("classifier");
            if (c.is_array()) {
                spec.classifiers = c.get<std::vector<std::string>>();
                if (spec.classifiers.empty()) {
                    throw ConfigError("classifier list is empty");
                }
                cfg.classifier = ClassifierSpec::parse(spec.classifiers.front());
                for (const auto &name : spec.classifiers) {
                    (void)ClassifierSpec::parse(name);
                }
            } else {
                cfg.classifier = ClassifierSpec::parse(c.get<std::string>());
            }
        }
        if (j.contains("svm")) {
            const auto &s = j.at("svm");
            check_keys(s, {"C", "tol", "max_iterations", "gamma"}, "svm");
            read(s, "C", cfg.svm.C);
            read(s, "tol", cfg.svm.tol);
            read(s, "max_iterations", cfg.svm.max_iterations);
            read_opt(s, "gamma", cfg.rbf_gamma);
        }
        if (j.contains("vqc")) {
            const auto &v = j.at("vqc");
            check_keys(v, {"learning_rate", "epochs", "batch_size", "method", "layers", "spsa_c"}, "vqc");
            read(v, "learning_rate", cfg.vqc.learning_rate);
            read(v, "epochs", cfg.vqc.epochs);
            read(v, "batch_size", cfg.vqc.batch_size);
            read(v, "spsa_c", cfg.vqc.spsa_c);
            read(v, "layers", cfg.vqc_layers);
            if (v.contains("method")) {
                cfg.vqc.method = vqc::parse_gradient_method(v.at("method").get<std::string>());
            }
        }
        read(j, "folds", cfg.folds);
        read(j, "seed", cfg.seed);
        read_opt(j, "shots", cfg.shots);
        read(j, "threads", cfg.threads);
        if (j.contains("cache_dir") && !j.at("cache_dir").is_null()) {
            std::filesystem::path p = j.at("cache_dir").get<std::string>();
            cfg.cache_dir = p.is_relative() ? base_dir / p : p;
        }
        if (j.contains("bench")) {
            const auto &b = j.at("bench");
            check_keys(b, {"mode", "sampling_fractions", "ks", "out_dir"}, "bench");
            if (b.contains("mode")) {
                const auto mode = b.at("mode").get<std::string>();
                if (mode == "experiment") {
                    spec.mode = BenchMode::Experiment;
                } else if (mode == "window_sweep") {
                    spec.mode = BenchMode::WindowSweep;
                } else if (mode == "sampling_sweep") {
                    spec.mode = BenchMode::SamplingSweep;
                } else if (mode == "grid_prefix_length") {
                    spec.mode = BenchMode::GridPrefixLength;
                } else if (mode == "table") {
                    spec.mode = BenchMode::Table;
                } else {
                    throw ConfigError("unknown bench mode '" + mode + "'");
                }
            }
            read(b, "sampling_fractions", spec.sampling_fractions);
            read(b, "ks", spec.ks);
            if (b.contains("out_dir")) {
                std::filesystem::path p = b.at("out_dir").get<std::string>();
                spec.out_dir = p.is_relative() ? base_dir / p : p;
            }
        }
    } catch (const json::exception &e) {
        throw ConfigError(std::string("invalid config: ") + e.what());
    }
    for (const auto &fs : spec.feature_sets) {
        ExperimentConfig probe = cfg;
        probe.inter.features = fs;
        validate(probe);
    }
    validate(cfg);
    return spec;
}

std::string to_json(const ExperimentConfig &cfg) {
    nlohmann::ordered_json j;
    if (const auto *f = std::get_if<FileSource>(&cfg.dataset)) {
        j["dataset"] = {{"path", f->path.generic_string()},
                        {"format", f->format ? nlohmann::ordered_json(format_name(*f->format)) : nullptr},
                        {"columns",
                         {{"case_id", f->columns.case_id},
                          {"activity", f->columns.activity},
                          {"timestamp", f->columns.timestamp},
                          {"resource", f->columns.resource},
                          {"case_attribute_prefix", f->columns.case_attribute_prefix}}}};
    } else {
        const auto &s = std::get<synthetic::SyntheticConfig>(cfg.dataset);
        j["dataset"] = {{"synthetic",
                         {{"cases", s.cases},
                          {"seed", s.seed},
                          {"period_days", s.period_days},
                          {"busy_rate", s.busy_rate},
                          {"quiet_rate", s.quiet_rate},
                          {"load_signal", s.load_signal},
                          {"officers", s.officers}}}};
    }
    j["preprocess"] = {{"filter_singleton_variants", cfg.preprocess.filter_singleton_variants},
                       {"date_range", cfg.preprocess.date_range
                                          ? nlohmann::ordered_json::array({date_string(cfg.preprocess.date_range->first),
                                                                           date_string(cfg.preprocess.date_range->second)})
                                          : nlohmann::ordered_json(nullptr)},
                       {"slice_rule", eventlog::to_string(cfg.preprocess.slice_rule)},
                       {"date_basis", eventlog::to_string(cfg.preprocess.date_basis)}};
    j["prefix"] = {{"min", cfg.min_prefix},
                   {"max", cfg.max_prefix ? nlohmann::ordered_json(*cfg.max_prefix) : nullptr}};
    j["max_samples"] = cfg.max_samples ? nlohmann::ordered_json(*cfg.max_samples) : nullptr;
    j["sample_fraction"] = cfg.sample_fraction;
    j["encoder"] = {{"name", cfg.encoder.name}, {"k", cfg.encoder.k}, {"static_attributes", cfg.encoder.static_attributes}};
    std::vector<std::string> feats;
    for (auto f : cfg.inter.features) {
        feats.emplace_back(intercase::to_string(f));
    }
    j["intercase"] = {{"features", feats},
                      {"window_fraction", cfg.inter.window_fraction},
                      {"window_base", cfg.inter.window_base
                                          ? nlohmann::ordered_json(static_cast<double>(cfg.inter.window_base->count()) / 1000.0)
                                          : nlohmann::ordered_json("median")},
                      {"batch",
                       {{"epsilon_seconds", static_cast<double>(cfg.inter.batch.epsilon.count()) / 1000.0},
                        {"min_burst", cfg.inter.batch.min_burst}}}};
    j["classifier"] = cfg.classifier.name;
    j["svm"] = {{"C", cfg.svm.C},
                {"tol", cfg.svm.tol},
                {"max_iterations", cfg.svm.max_iterations},
                {"gamma", cfg.rbf_gamma ? nlohmann::ordered_json(*cfg.rbf_gamma) : nullptr}};
    j["vqc"] = {{"learning_rate", cfg.vqc.learning_rate},
                {"epochs", cfg.vqc.epochs},
                {"batch_size", cfg.vqc.batch_size},
                {"method", vqc::to_string(cfg.vqc.method)},
                {"layers", cfg.vqc_layers},
                {"spsa_c", cfg.vqc.spsa_c}};
    j["folds"] = cfg.folds;
    j["seed"] = cfg.seed;
    j["shots"] = cfg.shots ? nlohmann::ordered_json(*cfg.shots) : nullptr;
    return j.dump();
}

} // namespace qppm::bench
