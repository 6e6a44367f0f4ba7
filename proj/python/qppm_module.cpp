#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qppm/bench.hpp"
#include "qppm/error.hpp"
#include "qppm/eventlog.hpp"
#include "qppm/io.hpp"
#include "qppm/qkernel.hpp"
#include "qppm/qsim.hpp"
#include "qppm/svm.hpp"
#include "qppm/vqc.hpp"

namespace py = pybind11;
using namespace qppm;

namespace {

qsim::ShotConfig shot_config(std::optional<std::size_t> shots, std::uint64_t seed) {
    return shots ? qsim::ShotConfig::sampled(*shots, seed) : qsim::ShotConfig::exact_mode();
}

qkernel::KernelKind kernel_kind(const std::string &name, std::size_t layers, std::optional<double> gamma,
                                std::optional<std::size_t> shots, std::uint64_t seed) {
    if (name == "linear") {
        return qkernel::Linear{};
    }
    if (name == "rbf") {
        return qkernel::Rbf{gamma};
    }
    return qkernel::Quantum{{qsim::parse_feature_map(name), layers}, shot_config(shots, seed)};
}

py::dict stats_dict(const eventlog::EventLog &log) {
    const auto s = eventlog::log_statistics(log);
    py::dict d;
    d["cases"] = s.cases;
    d["events"] = s.events;
    d["activities"] = s.activities;
    d["variants"] = s.variants;
    d["median_case_time"] = eventlog::format_duration(s.median_case_time);
    return d;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Quantum-kernel next-activity prediction core";

    const auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
    py::register_exception<DegenerateModelError>(m, "DegenerateModelError", base.ptr());

    m.def(
        "log_stats",
        [](const std::string &path, bool filter_singletons) {
            auto log = io::load_log(path);
            if (filter_singletons) {
                log = eventlog::filter_singleton_variants(log);
            }
            return stats_dict(log);
        },
        py::arg("path"), py::arg("filter_singletons") = false);

    m.def(
        "xes_stats", [](const std::string &document) { return stats_dict(io::parse_xes(document)); },
        py::arg("document"));

    m.def(
        "kernel_overlap",
        [](std::vector<double> x, std::vector<double> x2, const std::string &map, std::size_t layers,
           std::optional<std::size_t> shots, std::uint64_t seed) {
            return qsim::kernel_overlap(x, x2, {qsim::parse_feature_map(map), layers}, shot_config(shots, seed));
        },
        py::arg("x"), py::arg("x2"), py::arg("feature_map") = "zz", py::arg("layers") = 2,
        py::arg("shots") = py::none(), py::arg("seed") = 0);

    m.def(
        "gram",
        [](const Eigen::MatrixXd &x, const std::string &kernel, std::size_t layers, std::optional<double> gamma,
           std::optional<std::size_t> shots, std::uint64_t seed, std::size_t threads) {
            py::gil_scoped_release release;
            return qkernel::gram(x, kernel_kind(kernel, layers, gamma, shots, seed), {threads}).values;
        },
        py::arg("x"), py::arg("kernel") = "zz", py::arg("layers") = 2, py::arg("gamma") = py::none(),
        py::arg("shots") = py::none(), py::arg("seed") = 0, py::arg("threads") = 1);

    m.def(
        "cross",
        [](const Eigen::MatrixXd &test, const Eigen::MatrixXd &train, const std::string &kernel, std::size_t layers,
           std::optional<double> gamma, std::optional<std::size_t> shots, std::uint64_t seed, std::size_t threads) {
            py::gil_scoped_release release;
            return qkernel::cross(test, train, kernel_kind(kernel, layers, gamma, shots, seed), {threads}).values;
        },
        py::arg("test"), py::arg("train"), py::arg("kernel") = "zz", py::arg("layers") = 2,
        py::arg("gamma") = py::none(), py::arg("shots") = py::none(), py::arg("seed") = 0, py::arg("threads") = 1);

    m.def(
        "psd_repair",
        [](const Eigen::MatrixXd &k, double floor) { return qkernel::psd_repair({k, 0}, floor).values; },
        py::arg("k"), py::arg("floor") = 1e-9);

    py::class_<svm::MulticlassModel>(m, "SvmModel")
        .def_readonly("classes", &svm::MulticlassModel::classes)
        .def("to_json", [](const svm::MulticlassModel &model) { return svm::to_json(model); })
        .def("predict",
             [](const svm::MulticlassModel &model, const Eigen::MatrixXd &cross) {
                 std::vector<std::string> out;
                 for (Eigen::Index i = 0; i < cross.rows(); ++i) {
                     out.push_back(model.classes[svm::predict(model, cross.row(i).transpose())]);
                 }
                 return out;
             })
        .def("decision", [](const svm::MulticlassModel &model, const Eigen::MatrixXd &cross) {
            std::vector<std::vector<double>> out;
            for (Eigen::Index i = 0; i < cross.rows(); ++i) {
                out.push_back(svm::scores(model, cross.row(i).transpose()));
            }
            return out;
        });

    m.def(
        "svm_fit",
        [](const Eigen::MatrixXd &gram, std::vector<std::string> labels, double C, double tol) {
            return svm::fit_multiclass(gram, labels, {C, tol});
        },
        py::arg("gram"), py::arg("labels"), py::arg("C") = 1.0, py::arg("tol") = 1e-3);

    m.def(
        "vqc_forward",
        [](std::vector<double> x, std::vector<double> theta, std::size_t n_classes, const std::string &map,
           std::size_t map_layers, std::optional<std::size_t> shots, std::uint64_t seed) {
            if (x.empty() || theta.size() % x.size() != 0) {
                throw ConfigError("theta must hold layers x len(x) angles");
            }
            vqc::VqcModel model;
            model.feature_map = {qsim::parse_feature_map(map), map_layers};
            model.n_qubits = x.size();
            model.layers = theta.size() / x.size();
            model.theta = std::move(theta);
            for (std::size_t c = 0; c < n_classes; ++c) {
                model.classes.push_back(std::to_string(c));
            }
            return vqc::forward(model, x, shot_config(shots, seed));
        },
        py::arg("x"), py::arg("theta"), py::arg("n_classes") = 2, py::arg("feature_map") = "zz",
        py::arg("map_layers") = 2, py::arg("shots") = py::none(), py::arg("seed") = 0);

    m.def(
        "run_bench",
        [](const std::string &config_json, const std::string &base_dir) {
            const auto spec = bench::parse_bench_spec(config_json, base_dir);
            std::vector<bench::RunResult> results;
            {
                py::gil_scoped_release release;
                results = bench::run_bench(spec);
            }
            return bench::results_json(results);
        },
        py::arg("config_json"), py::arg("base_dir") = ".",
        "Runs the benchmark described by a JSON config and returns the results JSON text.");
}
