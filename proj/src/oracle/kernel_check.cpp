#include "qppm/oracle/kernel_check.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "qppm/error.hpp"
#include "qppm/oracle/dense.hpp"
#include "qppm/qkernel.hpp"

namespace qppm::oracle {
namespace {

std::string fmt(const char *f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::string map_name(const qsim::FeatureMapKind &k) {
    return std::string(qsim::to_string(k.variant)) + "_" + std::to_string(k.layers);
}

} // namespace

bool KernelCheckReport::passed() const {
    return std::all_of(lines.begin(), lines.end(), [](const CheckLine &l) { return l.passed; });
}

KernelCheckReport run_kernel_check(const KernelCheckConfig &cfg) {
    if (cfg.qubits == 0 || cfg.qubits > qsim::kMaxQubits) {
        throw ConfigError("kernel-check supports 1 to " + std::to_string(qsim::kMaxQubits) + " qubits");
    }
    std::vector<qsim::FeatureMapKind> maps = cfg.maps;
    if (maps.empty()) {
        for (auto v : {qsim::FeatureMapVariant::Angle, qsim::FeatureMapVariant::ZZ, qsim::FeatureMapVariant::AngleZZ}) {
            for (std::size_t l : {1, 2}) {
                maps.push_back({v, l});
            }
        }
    }
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> u(0.0, std::numbers::pi);
    auto draw = [&] {
        std::vector<double> x(cfg.qubits);
        for (auto &v : x) {
            v = u(rng);
        }
        return x;
    };
    auto perturbed = [&](std::vector<double> x) {
        x[0] += cfg.perturbation;
        return x;
    };
    const bool dense = cfg.qubits <= kMaxDenseQubits;

    KernelCheckReport report;
    for (const auto &map : maps) {
        const std::string name = map_name(map);
        if (dense) {
            double worst_state = 0.0;
            double worst_kernel = 0.0;
            double worst_closed = 0.0;
            for (std::size_t p = 0; p < cfg.pairs; ++p) {
                const auto x = draw();
                const auto x2 = draw();
                const auto state = qsim::run(qsim::build_feature_map(map, perturbed(x)));
                const Vector ref = feature_map_unitary(map, x).col(0);
                for (Eigen::Index i = 0; i < ref.size(); ++i) {
                    worst_state = std::max(worst_state, std::abs(state[static_cast<std::size_t>(i)] - ref(i)));
                }
                const double k = qsim::kernel_overlap(perturbed(x), x2, map, qsim::ShotConfig::exact_mode());
                worst_kernel = std::max(worst_kernel, std::abs(k - kernel(map, x, x2)));
                if (map.variant == qsim::FeatureMapVariant::Angle) {
                    worst_closed = std::max(worst_closed, std::abs(k - angle_closed_form(x, x2, map.layers)));
                }
            }
            report.lines.push_back({name + " statevector vs dense unitary", worst_state <= cfg.tolerance,
                                    "max |diff| " + fmt("%.3e", worst_state)});
            report.lines.push_back({name + " kernel vs dense oracle", worst_kernel <= cfg.tolerance,
                                    "max |diff| " + fmt("%.3e", worst_kernel)});
            if (map.variant == qsim::FeatureMapVariant::Angle) {
                report.lines.push_back({name + " kernel vs closed form", worst_closed <= cfg.tolerance,
                                        "max |diff| " + fmt("%.3e", worst_closed)});
            }
        } else {
            report.lines.push_back({name + " dense comparisons", true,
                                    "skipped above " + std::to_string(kMaxDenseQubits) + " qubits"});
        }

        Eigen::MatrixXd xs(static_cast<Eigen::Index>(cfg.gram_samples), static_cast<Eigen::Index>(cfg.qubits));
        for (Eigen::Index i = 0; i < xs.rows(); ++i) {
            const auto x = draw();
            for (Eigen::Index j = 0; j < xs.cols(); ++j) {
                xs(i, j) = x[static_cast<std::size_t>(j)];
            }
        }
        const auto k = qkernel::gram(xs, qkernel::Quantum{map, {}});
        const double asym = (k.values - k.values.transpose()).cwiseAbs().maxCoeff();
        const double diag = (k.values.diagonal().array() - 1.0).abs().maxCoeff();
        const double lmin = qkernel::smallest_eigenvalue(k.values);
        report.lines.push_back({name + " gram symmetric, unit diagonal", asym < 1e-12 && diag < 1e-12,
                                "asymmetry " + fmt("%.3e", asym) + ", diagonal " + fmt("%.3e", diag)});
        report.lines.push_back({name + " gram PSD", lmin >= -1e-8, "lambda_min " + fmt("%.3e", lmin)});
    }
    return report;
}

} // namespace qppm::oracle
