#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qppm/qsim.hpp"

namespace qppm::oracle {

struct KernelCheckConfig {
    std::size_t qubits = 3;
    /// Empty = angle, zz and angle_zz with 1 and 2 layers.
    std::vector<qsim::FeatureMapKind> maps;
    std::size_t pairs = 50;
    std::size_t gram_samples = 12;
    std::uint64_t seed = 0;
    /// Self-test: added to the first input angle on the simulator side only,
    /// so a correct build must report failures.
    double perturbation = 0.0;
    double tolerance = 1e-10;
};

struct CheckLine {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct KernelCheckReport {
    std::vector<CheckLine> lines;
    [[nodiscard]] bool passed() const;
};

/// Statevector vs dense-unitary comparison, kernel overlap vs oracle,
/// angle closed form, and Gram symmetry / unit diagonal / PSD checks on
/// random inputs in [0, pi]. Throws ConfigError for qubits outside
/// [1, qsim::kMaxQubits]; dense comparisons are skipped above
/// kMaxDenseQubits.
[[nodiscard]] KernelCheckReport run_kernel_check(const KernelCheckConfig &cfg);

} // namespace qppm::oracle
