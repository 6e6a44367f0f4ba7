#pragma once

// Reference implementations on explicit 2^n x 2^n matrices. Slow by design;
// used to cross-check the statevector simulator.

#include <span>

#include <Eigen/Dense>

#include "qppm/qsim.hpp"

namespace qppm::oracle {

using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

/// Largest register the dense routines accept.
inline constexpr std::size_t kMaxDenseQubits = 10;

/// Textbook 2x2 / Kronecker construction of one gate on n qubits.
[[nodiscard]] Matrix gate_matrix(const qsim::GateOp &g, std::size_t n);

/// Product of gate matrices, last gate leftmost.
[[nodiscard]] Matrix unitary(const qsim::CircuitSpec &c);

/// Feature-map unitary assembled per layer from Hadamard and rotation
/// tensor products and the diagonal phase operator, without going through
/// a gate list.
[[nodiscard]] Matrix feature_map_unitary(const qsim::FeatureMapKind &kind, std::span<const double> x);

/// |<0| U(x2)^dagger U(x) |0>|^2.
[[nodiscard]] double kernel(const qsim::FeatureMapKind &kind, std::span<const double> x,
                            std::span<const double> x2);

/// prod_i cos^2(L (x_i - x2_i) / 2) for the L-layer angle map.
[[nodiscard]] double angle_closed_form(std::span<const double> x, std::span<const double> x2,
                                       std::size_t layers);

} // namespace qppm::oracle
