#pragma once

// Variational quantum classifier: feature map, trainable RY/CNOT weight
// layers, and a bitstring-group readout over the first ceil(log2 C) qubits.

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "qppm/qsim.hpp"

namespace qppm::vqc {

struct VqcModel {
    qsim::FeatureMapKind feature_map;
    std::size_t n_qubits = 1;
    std::size_t layers = 1;
    /// Row-major layers x n_qubits.
    std::vector<double> theta;
    std::vector<std::string> classes;
    /// CNOT ring after each rotation block.
    bool entangle = true;

    /// Qubits read out: ceil(log2 C), at least 1.
    [[nodiscard]] std::size_t readout_qubits() const;
};

/// theta ~ uniform(-0.1, 0.1) from `seed`. Throws ConfigError for fewer than
/// two classes, layers == 0, or too few qubits for the readout.
[[nodiscard]] VqcModel initialize(std::size_t n_qubits, std::vector<std::string> classes,
                                  const qsim::FeatureMapKind &feature_map, std::size_t layers,
                                  std::uint64_t seed, bool entangle = true);

/// Full circuit for one sample.
[[nodiscard]] qsim::CircuitSpec circuit(const VqcModel &model, std::span<const double> x);

/// Group probabilities of the readout bitstrings: bitstring b (qubit q is
/// bit q) counts towards class b mod C. Sums to 1.
[[nodiscard]] std::vector<double> readout(const VqcModel &model, const qsim::StateVector &state,
                                          const qsim::ShotConfig &shots);

/// Per-class scores for one sample.
[[nodiscard]] std::vector<double> forward(const VqcModel &model, std::span<const double> x,
                                          const qsim::ShotConfig &shots = {});

/// Argmax of the scores, ties to the smaller class index.
[[nodiscard]] std::size_t argmax(std::span<const double> scores);
[[nodiscard]] std::size_t predict(const VqcModel &model, std::span<const double> x,
                                  const qsim::ShotConfig &shots = {});

enum class GradientMethod { ParameterShift, Spsa };

[[nodiscard]] std::string_view to_string(GradientMethod m);
[[nodiscard]] GradientMethod parse_gradient_method(std::string_view name);

struct OptimizerConfig {
    double learning_rate = 0.05;
    std::size_t epochs = 30;
    /// 0 = full batch.
    std::size_t batch_size = 0;
    std::uint64_t seed = 0;
    GradientMethod method = GradientMethod::ParameterShift;
    /// SPSA perturbation size.
    double spsa_c = 0.1;
    qsim::ShotConfig shots;
    std::size_t threads = 1;
};

/// Mean cross-entropy of the true-class score over the samples (rows of x).
[[nodiscard]] double loss(const VqcModel &model, const Eigen::MatrixXd &x,
                          std::span<const std::size_t> labels, const qsim::ShotConfig &shots = {},
                          std::size_t threads = 1);

/// Analytic gradient of `loss` with respect to theta by the +-pi/2 shift rule.
[[nodiscard]] std::vector<double> parameter_shift_gradient(const VqcModel &model,
                                                           const Eigen::MatrixXd &x,
                                                           std::span<const std::size_t> labels,
                                                           const qsim::ShotConfig &shots = {},
                                                           std::size_t threads = 1);

struct TrainResult {
    VqcModel model;
    /// Full-training-set loss before the first update and after every epoch.
    std::vector<double> loss_history;
};

/// Gradient descent from `init`. Labels index into init.classes.
/// Throws TrainingError on a non-finite loss or gradient.
[[nodiscard]] TrainResult train(VqcModel init, const Eigen::MatrixXd &x,
                                std::span<const std::size_t> labels, const OptimizerConfig &opt);

struct VqcConfig {
    qsim::FeatureMapKind feature_map;
    std::size_t layers = 2;
    bool entangle = true;
    OptimizerConfig optimizer;
};

/// Classes are the sorted distinct labels; n_qubits = feature dimension.
[[nodiscard]] TrainResult fit(const Eigen::MatrixXd &x, std::span<const std::string> labels,
                              const VqcConfig &config);

/// Versioned JSON checkpoint.
[[nodiscard]] std::string to_json(const VqcModel &model);
[[nodiscard]] VqcModel from_json(std::string_view text);

} // namespace qppm::vqc
