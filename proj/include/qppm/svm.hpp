#pragma once

// Soft-margin SVM on precomputed kernels, trained with SMO using the
// maximal-violating-pair working set.

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace qppm::svm {

struct SvmParams {
    double C = 1.0;
    double tol = 1e-3;
    std::size_t max_iterations = 100000;
};

struct SvmModel {
    /// alpha_i * y_i for each support sample.
    std::vector<double> dual_coefs;
    /// Indices into the training set (and into each cross-kernel row).
    std::vector<std::size_t> support_indices;
    double bias = 0.0;
    double C = 1.0;
    std::size_t training_size = 0;
    std::size_t iterations = 0;

    /// Dense alpha over all training samples.
    [[nodiscard]] Eigen::VectorXd alphas() const;
};

/// Labels must be +1/-1 and contain both. Throws DegenerateModelError for a
/// single class, ConfigError for bad input, ConvergenceError when the
/// iteration cap is hit.
[[nodiscard]] SvmModel fit(const Eigen::MatrixXd &gram, std::span<const int> labels,
                           const SvmParams &params = {});

/// sum_s coef_s * row[s] + bias; `row` holds k(x, train_j) for all j.
[[nodiscard]] double decision(const SvmModel &model, const Eigen::Ref<const Eigen::VectorXd> &row);

/// W(alpha) = sum alpha - 1/2 sum_ij alpha_i alpha_j y_i y_j K_ij.
[[nodiscard]] double dual_objective(const Eigen::VectorXd &alpha, const Eigen::MatrixXd &gram,
                                    std::span<const int> labels);

/// Largest violation of the KKT conditions, measured on y_i f(x_i):
/// alpha = 0 needs >= 1, free needs == 1, alpha = C needs <= 1.
[[nodiscard]] double max_kkt_violation(const SvmModel &model, const Eigen::MatrixXd &gram,
                                       std::span<const int> labels);

/// One-vs-rest over the distinct labels (sorted). Two classes reduce to a
/// single binary problem whose negated score serves the second class.
struct MulticlassModel {
    std::vector<std::string> classes;
    std::vector<SvmModel> models;
    SvmParams params;

    [[nodiscard]] bool binary() const { return classes.size() == 2 && models.size() == 1; }
};

[[nodiscard]] MulticlassModel fit_multiclass(const Eigen::MatrixXd &gram,
                                             std::span<const std::string> labels,
                                             const SvmParams &params = {});

/// Per-class decision scores for one cross-kernel row.
[[nodiscard]] std::vector<double> scores(const MulticlassModel &model,
                                         const Eigen::Ref<const Eigen::VectorXd> &row);

/// Argmax of the scores; ties go to the smaller class index.
[[nodiscard]] std::size_t predict(const MulticlassModel &model,
                                  const Eigen::Ref<const Eigen::VectorXd> &row);

/// Versioned JSON record.
[[nodiscard]] std::string to_json(const MulticlassModel &model);
[[nodiscard]] MulticlassModel multiclass_from_json(std::string_view text);

} // namespace qppm::svm
