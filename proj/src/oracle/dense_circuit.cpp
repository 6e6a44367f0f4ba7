#include "qppm/oracle/dense.hpp"

#include <cmath>
#include <map>
#include <numbers>

#include "qppm/error.hpp"

namespace qppm::oracle {
namespace {

using qsim::Complex;
using M2 = Eigen::Matrix2cd;

constexpr Complex kI{0.0, 1.0};

void check_size(std::size_t n) {
    if (n == 0 || n > kMaxDenseQubits) {
        throw ConfigError("dense oracle supports 1 to " + std::to_string(kMaxDenseQubits) + " qubits");
    }
}

Matrix kron(const Matrix &a, const Matrix &b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

/// Tensor product with `factors[q]` on qubit q and identity elsewhere.
/// Qubit q is bit q of the basis index, so qubit n-1 is the leftmost factor.
Matrix embed(const std::map<std::size_t, M2> &factors, std::size_t n) {
    Matrix out = Matrix::Identity(1, 1);
    for (std::size_t k = n; k-- > 0;) {
        auto it = factors.find(k);
        const Matrix f = it == factors.end() ? Matrix(M2::Identity()) : Matrix(it->second);
        out = kron(out, f);
    }
    return out;
}

M2 hadamard() {
    const double s = 1.0 / std::sqrt(2.0);
    M2 m;
    m << s, s, s, -s;
    return m;
}

M2 ry(double t) {
    M2 m;
    m << std::cos(t / 2), -std::sin(t / 2), std::sin(t / 2), std::cos(t / 2);
    return m;
}

M2 pauli_x() {
    M2 m;
    m << 0, 1, 1, 0;
    return m;
}

M2 pauli_z() {
    M2 m;
    m << 1, 0, 0, -1;
    return m;
}

M2 proj(int bit) {
    M2 m = M2::Zero();
    m(bit, bit) = 1.0;
    return m;
}

} // namespace

Matrix gate_matrix(const qsim::GateOp &g, std::size_t n) {
    check_size(n);
    if (g.target >= n || (qsim::is_two_qubit(g.kind) && (g.target2 >= n || g.target2 == g.target))) {
        throw ConfigError("gate does not fit the register");
    }
    const double t = g.angle;
    switch (g.kind) {
    case qsim::GateKind::H:
        return embed({{g.target, hadamard()}}, n);
    case qsim::GateKind::RY:
        return embed({{g.target, ry(t)}}, n);
    case qsim::GateKind::RZ: {
        M2 m = M2::Zero();
        m(0, 0) = std::exp(-kI * (t / 2));
        m(1, 1) = std::exp(kI * (t / 2));
        return embed({{g.target, m}}, n);
    }
    case qsim::GateKind::P: {
        M2 m = M2::Identity();
        m(1, 1) = std::exp(kI * t);
        return embed({{g.target, m}}, n);
    }
    case qsim::GateKind::CNOT:
        return embed({{g.target, proj(0)}}, n) + embed({{g.target, proj(1)}, {g.target2, pauli_x()}}, n);
    case qsim::GateKind::RZZ:
        // exp(-i t/2 Z⊗Z) = cos(t/2) I - i sin(t/2) Z⊗Z
        return std::cos(t / 2) * embed({}, n) -
               kI * std::sin(t / 2) * embed({{g.target, pauli_z()}, {g.target2, pauli_z()}}, n);
    }
    throw ConfigError("unknown gate");
}

Matrix unitary(const qsim::CircuitSpec &c) {
    check_size(c.n_qubits);
    Matrix u = Matrix::Identity(Eigen::Index{1} << c.n_qubits, Eigen::Index{1} << c.n_qubits);
    for (const auto &g : c.ops) {
        u = gate_matrix(g, c.n_qubits) * u;
    }
    return u;
}

Matrix feature_map_unitary(const qsim::FeatureMapKind &kind, std::span<const double> x) {
    const std::size_t n = x.size();
    check_size(n);
    if (kind.layers == 0) {
        throw ConfigError("feature map needs at least one layer");
    }
    const Eigen::Index dim = Eigen::Index{1} << n;
    constexpr double pi = std::numbers::pi;

    Matrix layer;
    if (kind.variant == qsim::FeatureMapVariant::Angle) {
        std::map<std::size_t, M2> f;
        for (std::size_t q = 0; q < n; ++q) {
            f[q] = ry(x[q]);
        }
        layer = embed(f, n);
    } else {
        std::map<std::size_t, M2> hs;
        for (std::size_t q = 0; q < n; ++q) {
            hs[q] = hadamard();
        }
        const Matrix h_all = embed(hs, n);
        // Diagonal of exp(-i sum_{i<j} phi_ij Z_i Z_j) with phi_ij = (pi - x_i)(pi - x_j).
        Vector zz(dim);
        Vector zphase(dim);
        for (Eigen::Index z = 0; z < dim; ++z) {
            double a = 0.0;
            double b = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const int zi = static_cast<int>((z >> i) & 1);
                b += 2.0 * x[i] * zi;
                for (std::size_t j = i + 1; j < n; ++j) {
                    const int zj = static_cast<int>((z >> j) & 1);
                    const double s = zi == zj ? 1.0 : -1.0;
                    a += (pi - x[i]) * (pi - x[j]) * s;
                }
            }
            zz(z) = std::exp(-kI * a);
            zphase(z) = std::exp(kI * b);
        }
        Matrix middle;
        if (kind.variant == qsim::FeatureMapVariant::ZZ) {
            middle = zphase.asDiagonal();
        } else {
            std::map<std::size_t, M2> rs;
            for (std::size_t q = 0; q < n; ++q) {
                rs[q] = ry(2.0 * x[q]);
            }
            middle = embed(rs, n);
        }
        layer = zz.asDiagonal() * middle * h_all;
    }
    Matrix u = Matrix::Identity(dim, dim);
    for (std::size_t l = 0; l < kind.layers; ++l) {
        u = layer * u;
    }
    return u;
}

double kernel(const qsim::FeatureMapKind &kind, std::span<const double> x, std::span<const double> x2) {
    if (x.size() != x2.size()) {
        throw ConfigError("kernel inputs differ in dimension");
    }
    const Matrix a = feature_map_unitary(kind, x);
    const Matrix b = feature_map_unitary(kind, x2);
    const Complex amp = (b.adjoint() * a)(0, 0);
    return std::norm(amp);
}

double angle_closed_form(std::span<const double> x, std::span<const double> x2, std::size_t layers) {
    if (x.size() != x2.size()) {
        throw ConfigError("kernel inputs differ in dimension");
    }
    double k = 1.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double c = std::cos(static_cast<double>(layers) * (x[i] - x2[i]) / 2.0);
        k *= c * c;
    }
    return k;
}

} // namespace qppm::oracle
