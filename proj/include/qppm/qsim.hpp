#pragma once

// Dense statevector simulator for the feature-embedding and weight-layer
// circuits. Qubit q is bit q of the basis-state index (little endian).

#include <complex>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace qppm::qsim {

using Complex = std::complex<double>;

/// Hard cap on register size.
inline constexpr std::size_t kMaxQubits = 20;

class StateVector {
  public:
    /// |0...0> on n qubits. Throws ConfigError for n == 0 or n > kMaxQubits.
    explicit StateVector(std::size_t n_qubits);
    /// Takes ownership of amplitudes; the size must be a power of two.
    StateVector(std::size_t n_qubits, std::vector<Complex> amplitudes);

    [[nodiscard]] std::size_t num_qubits() const { return n_; }
    [[nodiscard]] std::size_t dim() const { return amp_.size(); }
    [[nodiscard]] std::span<const Complex> amplitudes() const { return amp_; }
    [[nodiscard]] std::span<Complex> amplitudes() { return amp_; }
    [[nodiscard]] Complex operator[](std::size_t i) const { return amp_[i]; }

    [[nodiscard]] double norm_squared() const;
    [[nodiscard]] std::vector<double> probabilities() const;

  private:
    std::size_t n_;
    std::vector<Complex> amp_;
};

enum class GateKind { H, RY, RZ, P, CNOT, RZZ };

[[nodiscard]] std::string_view to_string(GateKind k);
[[nodiscard]] bool is_parametric(GateKind k);
[[nodiscard]] bool is_two_qubit(GateKind k);

struct GateOp {
    GateKind kind = GateKind::H;
    /// Control first for CNOT.
    std::size_t target = 0;
    std::size_t target2 = 0;
    double angle = 0.0;

    static GateOp h(std::size_t q) { return {GateKind::H, q, 0, 0.0}; }
    static GateOp ry(std::size_t q, double a) { return {GateKind::RY, q, 0, a}; }
    static GateOp rz(std::size_t q, double a) { return {GateKind::RZ, q, 0, a}; }
    static GateOp p(std::size_t q, double a) { return {GateKind::P, q, 0, a}; }
    static GateOp cnot(std::size_t c, std::size_t t) { return {GateKind::CNOT, c, t, 0.0}; }
    static GateOp rzz(std::size_t a, std::size_t b, double angle) {
        return {GateKind::RZZ, a, b, angle};
    }

    bool operator==(const GateOp &) const = default;
};

/// RY(t) = exp(-i t Y/2), RZ(t) = exp(-i t Z/2), P(t) = diag(1, e^{it}),
/// RZZ(t) = exp(-i t Z⊗Z/2). Throws ConfigError for invalid targets.
void apply_gate(StateVector &state, const GateOp &g);
[[nodiscard]] StateVector apply_gate(const StateVector &state, const GateOp &g);

struct CircuitSpec {
    std::size_t n_qubits = 1;
    std::vector<GateOp> ops;

    void append(const CircuitSpec &other);
};

/// Throws ConfigError when a gate does not fit the register.
void validate(const CircuitSpec &c);

/// Reversed order, negated angles; H and CNOT are self-inverse.
[[nodiscard]] CircuitSpec adjoint(const CircuitSpec &c);

/// Applies the circuit to |0...0> or to `initial`.
[[nodiscard]] StateVector run(const CircuitSpec &c);
[[nodiscard]] StateVector run(const CircuitSpec &c, StateVector initial);

/// `KIND target [target2] [angle]`, one gate per line, after a header line
/// `QUBITS n`.
[[nodiscard]] std::string dump(const CircuitSpec &c);
/// Inverse of dump. Throws ConfigError on malformed text.
[[nodiscard]] CircuitSpec parse_dump(std::string_view text);

enum class FeatureMapVariant { Angle, ZZ, AngleZZ };

[[nodiscard]] std::string_view to_string(FeatureMapVariant v);
[[nodiscard]] FeatureMapVariant parse_feature_map(std::string_view name);

/// Data map: phi_i(x) = x_i, phi_ij(x) = (pi - x_i)(pi - x_j).
///  - angle:    per layer, RY(x_i) on each qubit
///  - zz:       per layer, H on all, P(2 x_i), RZZ(2 phi_ij) for i < j ascending
///  - angle_zz: as zz with RY(2 x_i) in place of the phase gates
struct FeatureMapKind {
    FeatureMapVariant variant = FeatureMapVariant::ZZ;
    std::size_t layers = 2;

    bool operator==(const FeatureMapKind &) const = default;
};

/// Throws ConfigError when layers == 0 or x is empty / too wide.
[[nodiscard]] CircuitSpec build_feature_map(const FeatureMapKind &kind, std::span<const double> x);

/// Measurement mode: exact probabilities, or `shots` samples from `seed`.
struct ShotConfig {
    std::optional<std::size_t> shots;
    std::uint64_t seed = 0;

    [[nodiscard]] bool exact() const { return !shots.has_value(); }
    static ShotConfig exact_mode() { return {}; }
    static ShotConfig sampled(std::size_t n, std::uint64_t seed) { return {n, seed}; }
};

/// Counts per basis state from `shots` inverse-CDF draws.
[[nodiscard]] std::vector<std::size_t> sample_counts(const StateVector &state, std::size_t shots,
                                                     std::mt19937_64 &rng);

/// Probability of measuring all zeros after V(x) then V(x2)^dagger.
[[nodiscard]] double kernel_overlap(std::span<const double> x, std::span<const double> x2,
                                    const FeatureMapKind &kind, const ShotConfig &shots);

/// L blocks of RY(theta[l][q]) on each qubit followed by a CNOT ring
/// q -> q+1 mod n (n CNOTs for n >= 2, none for n == 1). With
/// `entangle == false` the ring is omitted.
/// `theta` is row-major L x n.
[[nodiscard]] CircuitSpec weight_layer(std::span<const double> theta, std::size_t n,
                                       bool entangle = true);

/// <Z_q> per requested qubit; exact or estimated from shots.
[[nodiscard]] std::vector<double> measure_expectations(const StateVector &state,
                                                       std::span<const std::size_t> qubits,
                                                       const ShotConfig &shots);

/// Splitmix-style mixing of a base seed with two indices; used for
/// per-pair shot seeds so results do not depend on evaluation order.
[[nodiscard]] std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b);

} // namespace qppm::qsim
