// qppm: command-line front end.
//
// Exit codes: 0 success, 1 internal error or failed check, 2 usage or
// configuration error.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "qppm/bench.hpp"
#include "qppm/error.hpp"
#include "qppm/io.hpp"
#include "qppm/oracle/kernel_check.hpp"

namespace fs = std::filesystem;
using namespace qppm;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitUsage = 2;

struct Globals {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> threads;
    std::optional<std::size_t> shots;
    bool exact = false;
    std::string out_dir;
};

struct LogOptions {
    std::string path;
    std::string format;
    bool filter_singletons = false;
    std::string from;
    std::string to;
    std::string slice_rule = "first-event";
    std::string date_basis = "utc";
};

std::optional<fs::path> data_root() {
    if (const char *root = std::getenv("QPPM_DATA_ROOT"); root != nullptr && *root != '\0') {
        return fs::path(root);
    }
    return std::nullopt;
}

fs::path resolve_log_path(const std::string &p) {
    fs::path path(p);
    if (path.is_relative() && !fs::exists(path)) {
        if (auto root = data_root()) {
            return *root / path;
        }
    }
    return path;
}

std::optional<io::LogFormat> format_flag(const std::string &f) {
    if (f.empty()) {
        return std::nullopt;
    }
    if (f == "xes") {
        return io::LogFormat::Xes;
    }
    if (f == "csv") {
        return io::LogFormat::Csv;
    }
    throw ConfigError("unknown format '" + f + "' (expected xes or csv)");
}

std::chrono::sys_days date_flag(const std::string &text, const char *name) {
    const auto d = parse_date(text);
    if (!d) {
        throw ConfigError(std::string("invalid ") + name + " date '" + text + "'");
    }
    return *d;
}

eventlog::EventLog load_and_prepare(const LogOptions &o) {
    auto log = io::load_log(resolve_log_path(o.path), format_flag(o.format));
    if (o.filter_singletons) {
        log = eventlog::filter_singleton_variants(log);
    }
    if (!o.from.empty() || !o.to.empty()) {
        if (o.from.empty() || o.to.empty()) {
            throw ConfigError("--from and --to must be given together");
        }
        log = eventlog::slice_date_range(log, date_flag(o.from, "--from"), date_flag(o.to, "--to"),
                                         eventlog::parse_slice_rule(o.slice_rule),
                                         eventlog::parse_date_basis(o.date_basis));
    }
    return log;
}

void add_log_options(CLI::App *cmd, LogOptions &o) {
    cmd->add_option("log", o.path, "Event log (.xes, .xes.gz or .csv)")->required();
    cmd->add_option("--format", o.format, "Override format detection (xes|csv)");
    cmd->add_flag("--filter-singletons", o.filter_singletons, "Drop variants that occur only once");
    cmd->add_option("--from", o.from, "First day of the date slice (YYYYMMDD)");
    cmd->add_option("--to", o.to, "Last day of the date slice (YYYYMMDD)");
    cmd->add_option("--slice-rule", o.slice_rule, "first-event | all-events | any-event");
    cmd->add_option("--date-basis", o.date_basis, "utc | local");
}

bench::BenchSpec load_spec(const Globals &g) {
    if (g.config.empty()) {
        throw ConfigError("--config is required");
    }
    std::ifstream in(g.config, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot open config '" + g.config + "'");
    }
    std::stringstream text;
    text << in.rdbuf();
    auto spec = bench::parse_bench_spec(text.str(), fs::path(g.config).parent_path(), data_root());
    auto &cfg = spec.base;
    if (g.seed) {
        cfg.seed = *g.seed;
    }
    if (g.threads) {
        cfg.threads = *g.threads;
    }
    if (g.exact) {
        cfg.shots.reset();
    } else if (g.shots) {
        cfg.shots = *g.shots;
    }
    if (!g.out_dir.empty()) {
        spec.out_dir = g.out_dir;
    }
    if (const auto *file = std::get_if<bench::FileSource>(&cfg.dataset); file && !fs::exists(file->path)) {
        throw ConfigError("dataset '" + file->path.string() + "' not found");
    }
    return spec;
}

int cmd_stats(const LogOptions &o) {
    const auto log = load_and_prepare(o);
    const auto s = eventlog::log_statistics(log);
    std::printf("cases: %zu\nevents: %zu\nactivities: %zu\nvariants: %zu\nmedian_case_time: %s\n", s.cases,
                s.events, s.activities, s.variants, eventlog::format_duration(s.median_case_time).c_str());
    return kExitOk;
}

int cmd_prepare(const LogOptions &o, const std::string &out) {
    const auto log = load_and_prepare(o);
    std::ofstream file(out, std::ios::binary | std::ios::trunc);
    if (!file) {
        throw ConfigError("cannot write '" + out + "'");
    }
    io::write_csv(file, log);
    std::printf("wrote %zu cases, %zu events to %s\n", log.num_traces(), log.num_events(), out.c_str());
    return kExitOk;
}

int cmd_encode(const Globals &g, const std::string &out) {
    const auto spec = load_spec(g);
    const auto &cfg = spec.base;
    const auto data = bench::prepare(cfg);
    const auto stats = intercase::fit_stats(data.log.traces(), cfg.inter.batch);
    std::optional<intercase::EventIndex> index;
    std::optional<intercase::PeerWindow> window;
    if (!cfg.inter.features.empty()) {
        index.emplace(data.log);
        const Duration base = cfg.inter.window_base.value_or(eventlog::median_case_duration(data.log.traces()));
        window.emplace(Duration(static_cast<Duration::rep>(cfg.inter.window_fraction * static_cast<double>(base.count()))));
    }
    std::ofstream file(out, std::ios::binary | std::ios::trunc);
    if (!file) {
        throw ConfigError("cannot write '" + out + "'");
    }
    bool header = false;
    for (const auto &s : data.samples) {
        auto intra = encoding::encode_intra(s, cfg.encoder, stats.context);
        encoding::FeatureVector inter;
        if (window) {
            inter = intercase::compute(cfg.inter.features, *index, intercase::Anchor::of(s), *window, stats);
        }
        const auto v = intercase::compose(std::move(intra), std::move(inter)).combined();
        if (!header) {
            file << "case_id,prefix_length";
            for (const auto &name : v.schema) {
                file << "," << name;
            }
            file << ",label\n";
            header = true;
        }
        file << s.case_id() << "," << s.length;
        for (double x : v.values) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.17g", x);
            file << "," << buf;
        }
        file << "," << s.label << "\n";
    }
    std::printf("wrote %zu rows to %s\n", data.samples.size(), out.c_str());
    return kExitOk;
}

int cmd_bench(const Globals &g) {
    const auto spec = load_spec(g);
    bench::RunHooks hooks;
    hooks.log = [](std::string_view line) { std::fprintf(stderr, "%.*s\n", static_cast<int>(line.size()), line.data()); };
    const auto results = bench::run_bench(spec, hooks);
    nlohmann::ordered_json prov;
    prov["config"] = nlohmann::ordered_json::parse(bench::to_json(spec.base));
    prov["fingerprint"] = bench::fingerprint(spec.base);
    prov["seed"] = spec.base.seed;
    bench::emit_results(results, spec.out_dir, prov.dump());
    std::fputs(bench::results_csv(results).c_str(), stdout);
    std::fprintf(stderr, "results written to %s\n", spec.out_dir.string().c_str());
    return kExitOk;
}

int cmd_kernel_check(const oracle::KernelCheckConfig &cfg) {
    const auto report = oracle::run_kernel_check(cfg);
    for (const auto &l : report.lines) {
        std::printf("%s  %-44s %s\n", l.passed ? "PASS" : "FAIL", l.name.c_str(), l.detail.c_str());
    }
    std::printf("%s\n", report.passed() ? "kernel-check passed" : "kernel-check FAILED");
    return report.passed() ? kExitOk : kExitInternal;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Quantum-kernel next-activity prediction toolkit"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all");

    Globals g;
    app.add_option("--config", g.config, "Experiment config (JSON)");
    app.add_option("--seed", g.seed, "Seed overriding the config");
    app.add_option("--threads", g.threads, "Worker threads (0 = all cores)");
    auto *shots = app.add_option("--shots", g.shots, "Measurement shots");
    app.add_flag("--exact", g.exact, "Exact probabilities instead of shots")->excludes(shots);
    app.add_option("--out-dir", g.out_dir, "Directory for result files");

    LogOptions stats_opts;
    auto *stats = app.add_subcommand("stats", "Print log statistics");
    add_log_options(stats, stats_opts);

    LogOptions prep_opts;
    std::string prep_out;
    auto *prep = app.add_subcommand("prepare", "Filter and slice a log, write CSV");
    add_log_options(prep, prep_opts);
    prep->add_option("--out,-o", prep_out, "Output CSV")->required();

    std::string enc_out;
    auto *enc = app.add_subcommand("encode", "Write the encoded feature matrix for a config");
    enc->add_option("--out,-o", enc_out, "Output CSV")->required();

    auto *bench_cmd = app.add_subcommand("bench", "Run the benchmark described by --config");

    oracle::KernelCheckConfig kc;
    std::vector<std::string> kc_maps;
    auto *kcheck = app.add_subcommand("kernel-check", "Check the simulator against dense-matrix oracles");
    kcheck->add_option("--qubits,-n", kc.qubits, "Register size");
    kcheck->add_option("--pairs", kc.pairs, "Random input pairs per feature map");
    kcheck->add_option("--map", kc_maps, "Feature maps such as zz_2 (default: all, 1 and 2 layers)");
    kcheck->add_option("--perturb", kc.perturbation, "Self-test: perturb simulator inputs by this angle");

    for (auto *sub : {stats, prep, enc, bench_cmd, kcheck}) {
        sub->fallthrough();
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*stats) {
            return cmd_stats(stats_opts);
        }
        if (*prep) {
            return cmd_prepare(prep_opts, prep_out);
        }
        if (*enc) {
            return cmd_encode(g, enc_out);
        }
        if (*bench_cmd) {
            return cmd_bench(g);
        }
        if (*kcheck) {
            if (g.seed) {
                kc.seed = *g.seed;
            }
            for (const auto &m : kc_maps) {
                const auto cut = m.rfind('_');
                if (cut == std::string::npos) {
                    throw ConfigError("feature map '" + m + "' needs a layer suffix such as _2");
                }
                kc.maps.push_back({qsim::parse_feature_map(m.substr(0, cut)),
                                   static_cast<std::size_t>(std::stoul(m.substr(cut + 1)))});
            }
            return cmd_kernel_check(kc);
        }
    } catch (const ConfigError &e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    } catch (const ParseError &e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    } catch (const RecordError &e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    } catch (const std::invalid_argument &e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    } catch (const std::exception &e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return kExitInternal;
    }
    return kExitInternal;
}
