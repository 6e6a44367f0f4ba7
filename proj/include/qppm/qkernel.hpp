#pragma once

#include <atomic>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>

#include <Eigen/Dense>

#include "qppm/qsim.hpp"

namespace qppm::qkernel {

struct Linear {};

/// exp(-gamma * |x - x'|^2); gamma defaults to 1 / dimension.
struct Rbf {
    std::optional<double> gamma;
};

struct Quantum {
    qsim::FeatureMapKind map;
    qsim::ShotConfig shots;
};

using KernelKind = std::variant<Linear, Rbf, Quantum>;

/// Short description such as "rbf", "quantum(zz,2,exact)".
[[nodiscard]] std::string describe(const KernelKind &kind);

/// Values plus the number of kernel evaluations that produced them.
struct KernelMatrix {
    Eigen::MatrixXd values;
    std::size_t evaluations = 0;
};

struct GramOptions {
    /// 0 = hardware concurrency.
    std::size_t threads = 1;
};

/// Samples are the rows of `x`. Only the upper triangle is evaluated; quantum
/// diagonals are set to 1 without evaluation, so a quantum Gram matrix costs
/// exactly m(m-1)/2 overlaps. Throws ConfigError for rbf gamma <= 0.
[[nodiscard]] KernelMatrix gram(const Eigen::MatrixXd &x, const KernelKind &kind,
                                const GramOptions &opts = {});

/// p x m matrix of k(test_i, train_j). Throws ConfigError on dimension mismatch.
[[nodiscard]] KernelMatrix cross(const Eigen::MatrixXd &test, const Eigen::MatrixXd &train,
                                 const KernelKind &kind, const GramOptions &opts = {});

/// (K + K^T)/2 shifted by max(0, floor - lambda_min) on the diagonal.
[[nodiscard]] KernelMatrix psd_repair(const KernelMatrix &k, double floor = 1e-9);

[[nodiscard]] double smallest_eigenvalue(const Eigen::MatrixXd &symmetric);

/// Single kernel value; exposed for tests and bindings.
[[nodiscard]] double evaluate(const KernelKind &kind, const Eigen::Ref<const Eigen::VectorXd> &a,
                              const Eigen::Ref<const Eigen::VectorXd> &b,
                              std::uint64_t pair_seed = 0);

} // namespace qppm::qkernel
