#include "qppm/qkernel.hpp"

#include <cmath>
#include <thread>
#include <vector>

#include "qppm/error.hpp"

namespace qppm::qkernel {
namespace {

constexpr std::uint64_t kCrossSalt = 0x63726f7373ULL; // "cross"

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

KernelKind resolve(const KernelKind &kind, Eigen::Index dim) {
    if (const auto *r = std::get_if<Rbf>(&kind)) {
        const double g = r->gamma.value_or(1.0 / static_cast<double>(std::max<Eigen::Index>(dim, 1)));
        if (!(g > 0.0)) {
            throw ConfigError("rbf gamma must be positive");
        }
        return Rbf{g};
    }
    return kind;
}

std::size_t worker_count(const GramOptions &opts) {
    std::size_t n = opts.threads == 0 ? std::thread::hardware_concurrency() : opts.threads;
    return std::max<std::size_t>(n, 1);
}

/// Runs body(row) for every row, rows dealt round-robin over workers.
template <typename Body>
void for_rows(Eigen::Index rows, std::size_t workers, Body body) {
    if (workers <= 1 || rows < 2) {
        for (Eigen::Index r = 0; r < rows; ++r) {
            body(r);
        }
        return;
    }
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (auto r = static_cast<Eigen::Index>(w); r < rows;
                 r += static_cast<Eigen::Index>(workers)) {
                body(r);
            }
        });
    }
}

} // namespace

std::string describe(const KernelKind &kind) {
    return std::visit(
        Overloaded{
            [](const Linear &) { return std::string("linear"); },
            [](const Rbf &r) {
                return r.gamma ? "rbf(gamma=" + std::to_string(*r.gamma) + ")" : std::string("rbf");
            },
            [](const Quantum &q) {
                return "quantum(" + std::string(qsim::to_string(q.map.variant)) + "," +
                       std::to_string(q.map.layers) + "," +
                       (q.shots.exact() ? std::string("exact")
                                        : std::to_string(*q.shots.shots) + " shots, seed " +
                                              std::to_string(q.shots.seed)) +
                       ")";
            },
        },
        kind);
}

double evaluate(const KernelKind &kind, const Eigen::Ref<const Eigen::VectorXd> &a,
                const Eigen::Ref<const Eigen::VectorXd> &b, std::uint64_t pair_seed) {
    if (a.size() != b.size()) {
        throw ConfigError("kernel inputs differ in dimension");
    }
    return std::visit(
        Overloaded{
            [&](const Linear &) { return a.dot(b); },
            [&](const Rbf &r) {
                const double g = r.gamma.value_or(1.0 / static_cast<double>(std::max<Eigen::Index>(a.size(), 1)));
                return std::exp(-g * (a - b).squaredNorm());
            },
            [&](const Quantum &q) {
                qsim::ShotConfig shots = q.shots;
                if (!shots.exact()) {
                    shots.seed = pair_seed;
                }
                return qsim::kernel_overlap({a.data(), static_cast<std::size_t>(a.size())},
                                            {b.data(), static_cast<std::size_t>(b.size())}, q.map,
                                            shots);
            },
        },
        kind);
}

KernelMatrix gram(const Eigen::MatrixXd &x, const KernelKind &kind_in, const GramOptions &opts) {
    const KernelKind kind = resolve(kind_in, x.cols());
    const Eigen::Index m = x.rows();
    const auto *quantum = std::get_if<Quantum>(&kind);
    KernelMatrix out;
    out.values.setZero(m, m);
    // Row-major copy so each sample is contiguous for the simulator.
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rows = x;
    std::atomic<std::size_t> evaluations{0};
    for_rows(m, worker_count(opts), [&](Eigen::Index i) {
        std::size_t local = 0;
        const Eigen::Index first = quantum != nullptr ? i + 1 : i;
        if (quantum != nullptr) {
            out.values(i, i) = 1.0;
        }
        for (Eigen::Index j = first; j < m; ++j) {
            const std::uint64_t seed =
                quantum != nullptr ? qsim::derive_seed(quantum->shots.seed, static_cast<std::uint64_t>(i),
                                                       static_cast<std::uint64_t>(j))
                                   : 0;
            const double v = evaluate(kind, rows.row(i).transpose(), rows.row(j).transpose(), seed);
            out.values(i, j) = v;
            out.values(j, i) = v;
            ++local;
        }
        evaluations += local;
    });
    out.evaluations = evaluations.load();
    return out;
}

KernelMatrix cross(const Eigen::MatrixXd &test, const Eigen::MatrixXd &train, const KernelKind &kind_in,
                   const GramOptions &opts) {
    if (test.rows() > 0 && train.rows() > 0 && test.cols() != train.cols()) {
        throw ConfigError("test and train features differ in dimension");
    }
    const KernelKind kind = resolve(kind_in, train.cols());
    const auto *quantum = std::get_if<Quantum>(&kind);
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> a = test;
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> b = train;
    KernelMatrix out;
    out.values.setZero(test.rows(), train.rows());
    for_rows(test.rows(), worker_count(opts), [&](Eigen::Index i) {
        for (Eigen::Index j = 0; j < train.rows(); ++j) {
            const std::uint64_t seed =
                quantum != nullptr ? qsim::derive_seed(quantum->shots.seed ^ kCrossSalt,
                                                       static_cast<std::uint64_t>(i),
                                                       static_cast<std::uint64_t>(j))
                                   : 0;
            out.values(i, j) = evaluate(kind, a.row(i).transpose(), b.row(j).transpose(), seed);
        }
    });
    out.evaluations = static_cast<std::size_t>(test.rows() * train.rows());
    return out;
}

double smallest_eigenvalue(const Eigen::MatrixXd &symmetric) {
    if (symmetric.rows() == 0) {
        return 0.0;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetric, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

KernelMatrix psd_repair(const KernelMatrix &k, double floor) {
    if (k.values.rows() != k.values.cols()) {
        throw ConfigError("psd_repair needs a square matrix");
    }
    if (floor < 0.0) {
        throw ConfigError("psd_repair floor must be nonnegative");
    }
    KernelMatrix out;
    out.evaluations = k.evaluations;
    out.values = 0.5 * (k.values + k.values.transpose());
    const double lambda = std::max(0.0, -smallest_eigenvalue(out.values) + floor);
    if (lambda > 0.0) {
        out.values.diagonal().array() += lambda;
    }
    return out;
}

} // namespace qppm::qkernel
