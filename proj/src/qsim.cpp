#include "qppm/qsim.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include "qppm/error.hpp"

namespace qppm::qsim {

StateVector::StateVector(std::size_t n_qubits) : n_(n_qubits) {
    if (n_ == 0 || n_ > kMaxQubits) {
        throw ConfigError("qubit count must be in [1, " + std::to_string(kMaxQubits) + "]");
    }
    amp_.assign(std::size_t{1} << n_, Complex{0.0, 0.0});
    amp_[0] = 1.0;
}

StateVector::StateVector(std::size_t n_qubits, std::vector<Complex> amplitudes)
    : n_(n_qubits), amp_(std::move(amplitudes)) {
    if (n_ == 0 || n_ > kMaxQubits || amp_.size() != (std::size_t{1} << n_)) {
        throw ConfigError("amplitude vector does not match the qubit count");
    }
}

double StateVector::norm_squared() const {
    double s = 0.0;
    for (const auto &a : amp_) {
        s += std::norm(a);
    }
    return s;
}

std::vector<double> StateVector::probabilities() const {
    std::vector<double> p(amp_.size());
    std::transform(amp_.begin(), amp_.end(), p.begin(), [](Complex a) { return std::norm(a); });
    return p;
}

std::string_view to_string(GateKind k) {
    switch (k) {
    case GateKind::H:
        return "H";
    case GateKind::RY:
        return "RY";
    case GateKind::RZ:
        return "RZ";
    case GateKind::P:
        return "P";
    case GateKind::CNOT:
        return "CNOT";
    case GateKind::RZZ:
        return "RZZ";
    }
    return "?";
}

bool is_parametric(GateKind k) {
    return k == GateKind::RY || k == GateKind::RZ || k == GateKind::P || k == GateKind::RZZ;
}

bool is_two_qubit(GateKind k) { return k == GateKind::CNOT || k == GateKind::RZZ; }

namespace {

void check_gate(std::size_t n, const GateOp &g) {
    if (g.target >= n) {
        throw ConfigError("gate target " + std::to_string(g.target) + " out of range for " +
                          std::to_string(n) + " qubits");
    }
    if (is_two_qubit(g.kind)) {
        if (g.target2 >= n) {
            throw ConfigError("gate target " + std::to_string(g.target2) + " out of range for " +
                              std::to_string(n) + " qubits");
        }
        if (g.target2 == g.target) {
            throw ConfigError("two-qubit gate needs distinct targets");
        }
    }
}

/// Applies [[m00, m01], [m10, m11]] to qubit q.
void apply_1q(std::span<Complex> amp, std::size_t q, Complex m00, Complex m01, Complex m10,
              Complex m11) {
    const std::size_t stride = std::size_t{1} << q;
    for (std::size_t base = 0; base < amp.size(); base += 2 * stride) {
        for (std::size_t k = 0; k < stride; ++k) {
            const std::size_t i = base + k;
            const std::size_t j = i + stride;
            const Complex a = amp[i];
            const Complex b = amp[j];
            amp[i] = m00 * a + m01 * b;
            amp[j] = m10 * a + m11 * b;
        }
    }
}

/// Multiplies amplitudes by d0 (bit q clear) or d1 (bit q set).
void apply_diag_1q(std::span<Complex> amp, std::size_t q, Complex d0, Complex d1) {
    const std::size_t mask = std::size_t{1} << q;
    for (std::size_t i = 0; i < amp.size(); ++i) {
        amp[i] *= (i & mask) ? d1 : d0;
    }
}

} // namespace

void apply_gate(StateVector &state, const GateOp &g) {
    check_gate(state.num_qubits(), g);
    auto amp = state.amplitudes();
    const double half = 0.5 * g.angle;
    switch (g.kind) {
    case GateKind::H: {
        const double r = std::numbers::sqrt2 / 2.0;
        apply_1q(amp, g.target, r, r, r, -r);
        break;
    }
    case GateKind::RY: {
        const double c = std::cos(half);
        const double s = std::sin(half);
        apply_1q(amp, g.target, c, -s, s, c);
        break;
    }
    case GateKind::RZ:
        apply_diag_1q(amp, g.target, std::polar(1.0, -half), std::polar(1.0, half));
        break;
    case GateKind::P:
        apply_diag_1q(amp, g.target, 1.0, std::polar(1.0, g.angle));
        break;
    case GateKind::CNOT: {
        const std::size_t cmask = std::size_t{1} << g.target;
        const std::size_t tmask = std::size_t{1} << g.target2;
        for (std::size_t i = 0; i < amp.size(); ++i) {
            if ((i & cmask) && !(i & tmask)) {
                std::swap(amp[i], amp[i | tmask]);
            }
        }
        break;
    }
    case GateKind::RZZ: {
        const std::size_t mask = (std::size_t{1} << g.target) | (std::size_t{1} << g.target2);
        const Complex even = std::polar(1.0, -half);
        const Complex odd = std::polar(1.0, half);
        for (std::size_t i = 0; i < amp.size(); ++i) {
            amp[i] *= (std::popcount(i & mask) & 1) ? odd : even;
        }
        break;
    }
    }
}

StateVector apply_gate(const StateVector &state, const GateOp &g) {
    StateVector out = state;
    apply_gate(out, g);
    return out;
}

void CircuitSpec::append(const CircuitSpec &other) {
    if (other.n_qubits != n_qubits) {
        throw ConfigError("cannot append circuits of different width");
    }
    ops.insert(ops.end(), other.ops.begin(), other.ops.end());
}

void validate(const CircuitSpec &c) {
    if (c.n_qubits == 0 || c.n_qubits > kMaxQubits) {
        throw ConfigError("circuit qubit count must be in [1, " + std::to_string(kMaxQubits) + "]");
    }
    for (const auto &g : c.ops) {
        check_gate(c.n_qubits, g);
    }
}

CircuitSpec adjoint(const CircuitSpec &c) {
    CircuitSpec out{c.n_qubits, {}};
    out.ops.reserve(c.ops.size());
    for (auto it = c.ops.rbegin(); it != c.ops.rend(); ++it) {
        GateOp g = *it;
        if (is_parametric(g.kind)) {
            g.angle = -g.angle;
        }
        out.ops.push_back(g);
    }
    return out;
}

StateVector run(const CircuitSpec &c) { return run(c, StateVector(c.n_qubits)); }

StateVector run(const CircuitSpec &c, StateVector initial) {
    if (initial.num_qubits() != c.n_qubits) {
        throw ConfigError("initial state width does not match the circuit");
    }
    validate(c);
    for (const auto &g : c.ops) {
        apply_gate(initial, g);
    }
    return initial;
}

std::string dump(const CircuitSpec &c) {
    std::string out = "QUBITS " + std::to_string(c.n_qubits) + "\n";
    char buf[64];
    for (const auto &g : c.ops) {
        out += to_string(g.kind);
        out += ' ' + std::to_string(g.target);
        if (is_two_qubit(g.kind)) {
            out += ' ' + std::to_string(g.target2);
        }
        if (is_parametric(g.kind)) {
            std::snprintf(buf, sizeof buf, " %.17g", g.angle);
            out += buf;
        }
        out += '\n';
    }
    return out;
}

CircuitSpec parse_dump(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string word;
    CircuitSpec c;
    if (!(in >> word) || word != "QUBITS" || !(in >> c.n_qubits)) {
        throw ConfigError("circuit dump must start with 'QUBITS n'");
    }
    while (in >> word) {
        GateOp g;
        bool known = false;
        for (auto k : {GateKind::H, GateKind::RY, GateKind::RZ, GateKind::P, GateKind::CNOT,
                       GateKind::RZZ}) {
            if (to_string(k) == word) {
                g.kind = k;
                known = true;
            }
        }
        if (!known || !(in >> g.target) || (is_two_qubit(g.kind) && !(in >> g.target2)) ||
            (is_parametric(g.kind) && !(in >> g.angle))) {
            throw ConfigError("malformed gate line starting with '" + word + "'");
        }
        c.ops.push_back(g);
    }
    validate(c);
    return c;
}

std::string_view to_string(FeatureMapVariant v) {
    switch (v) {
    case FeatureMapVariant::Angle:
        return "angle";
    case FeatureMapVariant::ZZ:
        return "zz";
    case FeatureMapVariant::AngleZZ:
        return "angle_zz";
    }
    return "?";
}

FeatureMapVariant parse_feature_map(std::string_view name) {
    if (name == "angle") {
        return FeatureMapVariant::Angle;
    }
    if (name == "zz") {
        return FeatureMapVariant::ZZ;
    }
    if (name == "angle_zz" || name == "zz_a") {
        return FeatureMapVariant::AngleZZ;
    }
    throw ConfigError("unknown feature map '" + std::string(name) + "'");
}

CircuitSpec build_feature_map(const FeatureMapKind &kind, std::span<const double> x) {
    if (kind.layers == 0) {
        throw ConfigError("feature map needs at least one layer");
    }
    const std::size_t n = x.size();
    if (n == 0 || n > kMaxQubits) {
        throw ConfigError("feature dimension must be in [1, " + std::to_string(kMaxQubits) + "]");
    }
    CircuitSpec c{n, {}};
    constexpr double pi = std::numbers::pi;
    for (std::size_t layer = 0; layer < kind.layers; ++layer) {
        if (kind.variant == FeatureMapVariant::Angle) {
            for (std::size_t q = 0; q < n; ++q) {
                c.ops.push_back(GateOp::ry(q, x[q]));
            }
            continue;
        }
        for (std::size_t q = 0; q < n; ++q) {
            c.ops.push_back(GateOp::h(q));
        }
        for (std::size_t q = 0; q < n; ++q) {
            c.ops.push_back(kind.variant == FeatureMapVariant::ZZ ? GateOp::p(q, 2.0 * x[q])
                                                                  : GateOp::ry(q, 2.0 * x[q]));
        }
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                c.ops.push_back(GateOp::rzz(i, j, 2.0 * (pi - x[i]) * (pi - x[j])));
            }
        }
    }
    return c;
}

std::vector<std::size_t> sample_counts(const StateVector &state, std::size_t shots,
                                       std::mt19937_64 &rng) {
    const auto amp = state.amplitudes();
    std::vector<double> cdf(amp.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < amp.size(); ++i) {
        acc += std::norm(amp[i]);
        cdf[i] = acc;
    }
    std::vector<std::size_t> counts(amp.size(), 0);
    std::uniform_real_distribution<double> u(0.0, acc);
    for (std::size_t s = 0; s < shots; ++s) {
        const double r = u(rng);
        auto it = std::upper_bound(cdf.begin(), cdf.end(), r);
        if (it == cdf.end()) {
            --it;
        }
        ++counts[static_cast<std::size_t>(it - cdf.begin())];
    }
    return counts;
}

double kernel_overlap(std::span<const double> x, std::span<const double> x2,
                      const FeatureMapKind &kind, const ShotConfig &shots) {
    if (x.size() != x2.size()) {
        throw ConfigError("kernel inputs differ in dimension (" + std::to_string(x.size()) + " vs " +
                          std::to_string(x2.size()) + ")");
    }
    CircuitSpec c = build_feature_map(kind, x);
    c.append(adjoint(build_feature_map(kind, x2)));
    const StateVector out = run(c);
    if (shots.exact()) {
        return std::norm(out[0]);
    }
    if (*shots.shots == 0) {
        throw ConfigError("shot count must be at least 1");
    }
    std::mt19937_64 rng(shots.seed);
    const auto counts = sample_counts(out, *shots.shots, rng);
    return static_cast<double>(counts[0]) / static_cast<double>(*shots.shots);
}

CircuitSpec weight_layer(std::span<const double> theta, std::size_t n, bool entangle) {
    if (n == 0 || theta.size() % n != 0) {
        throw ConfigError("weight parameters must form an L x n matrix");
    }
    const std::size_t layers = theta.size() / n;
    CircuitSpec c{n, {}};
    for (std::size_t l = 0; l < layers; ++l) {
        for (std::size_t q = 0; q < n; ++q) {
            c.ops.push_back(GateOp::ry(q, theta[l * n + q]));
        }
        if (entangle && n >= 2) {
            for (std::size_t q = 0; q < n; ++q) {
                c.ops.push_back(GateOp::cnot(q, (q + 1) % n));
            }
        }
    }
    return c;
}

std::vector<double> measure_expectations(const StateVector &state,
                                         std::span<const std::size_t> qubits,
                                         const ShotConfig &shots) {
    for (auto q : qubits) {
        if (q >= state.num_qubits()) {
            throw ConfigError("observable qubit out of range");
        }
    }
    std::vector<double> weight;
    double total = 1.0;
    if (shots.exact()) {
        weight = state.probabilities();
    } else {
        if (*shots.shots == 0) {
            throw ConfigError("shot count must be at least 1");
        }
        std::mt19937_64 rng(shots.seed);
        const auto counts = sample_counts(state, *shots.shots, rng);
        weight.assign(counts.begin(), counts.end());
        total = static_cast<double>(*shots.shots);
    }
    std::vector<double> out;
    out.reserve(qubits.size());
    for (auto q : qubits) {
        const std::size_t mask = std::size_t{1} << q;
        double z = 0.0;
        for (std::size_t i = 0; i < weight.size(); ++i) {
            z += (i & mask) ? -weight[i] : weight[i];
        }
        out.push_back(z / total);
    }
    return out;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
    auto mix = [](std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    };
    return mix(mix(mix(base) ^ a) ^ (b * 0x2545f4914f6cdd1dULL));
}

} // namespace qppm::qsim
