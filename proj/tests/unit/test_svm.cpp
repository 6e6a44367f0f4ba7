#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "qppm/error.hpp"
#include "qppm/svm.hpp"
#include "support/oracles.hpp"

using namespace qppm;
using namespace qppm::svm;

namespace {

Eigen::MatrixXd rbf_gram(const Eigen::MatrixXd &x, double gamma) {
    Eigen::MatrixXd k(x.rows(), x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        for (Eigen::Index j = 0; j < x.rows(); ++j) {
            k(i, j) = std::exp(-gamma * (x.row(i) - x.row(j)).squaredNorm());
        }
    }
    return k;
}

// Decision values on the training set, computed from the dense alphas.
Eigen::VectorXd train_decisions(const SvmModel &m, const Eigen::MatrixXd &k, std::span<const int> y) {
    const Eigen::VectorXd a = m.alphas();
    Eigen::VectorXd ay(a.size());
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        ay(i) = a(i) * y[static_cast<std::size_t>(i)];
    }
    return (k * ay).array() + m.bias;
}

struct Separable {
    Eigen::MatrixXd x;
    std::vector<int> y;
    Eigen::Vector2d w;
    double b;
};

Separable separable(std::size_t m, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-3, 3);
    Separable s;
    s.w = Eigen::Vector2d(u(rng), u(rng)).normalized();
    s.b = 0.3 * u(rng);
    s.x.resize(static_cast<Eigen::Index>(m), 2);
    for (Eigen::Index i = 0; i < s.x.rows();) {
        const Eigen::Vector2d p(u(rng), u(rng));
        const double f = s.w.dot(p) + s.b;
        if (std::abs(f) < 0.5) {
            continue;
        }
        s.x.row(i++) = p.transpose();
        s.y.push_back(f > 0 ? 1 : -1);
    }
    return s;
}

} // namespace

TEST(Binary, SeparableFourPoints) {
    Eigen::MatrixXd x(4, 2);
    x << 2, 2, 3, 3, -2, -2, -3, -1;
    const std::vector<int> y{1, 1, -1, -1};
    const Eigen::MatrixXd k = x * x.transpose();
    const auto m = fit(k, y, {.C = 100.0});
    const auto f = train_decisions(m, k, y);
    for (std::size_t i = 0; i < 4; ++i) {
        EXPECT_GE(y[i] * f(static_cast<Eigen::Index>(i)), 1.0 - 1e-3);
        EXPECT_GT(y[i] * decision(m, k.row(static_cast<Eigen::Index>(i)).transpose()), 0.0);
    }
    const Eigen::VectorXd a = m.alphas();
    for (std::size_t s = 0; s < m.support_indices.size(); ++s) {
        const auto i = static_cast<Eigen::Index>(m.support_indices[s]);
        if (a(i) < m.C - 1e-9) {
            EXPECT_GE(std::abs(decision(m, k.row(i).transpose())), 1.0 - 1e-3);
        }
    }
    EXPECT_DOUBLE_EQ(decision(m, Eigen::VectorXd::Zero(4)), m.bias);
    EXPECT_EQ(decision(m, k.row(0).transpose()), decision(m, k.row(0).transpose()));
}

TEST(Binary, DualMatchesQpOracle) {
    std::mt19937_64 rng(12);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 25; ++trial) {
        Eigen::MatrixXd x(6, 2);
        std::vector<int> y(6);
        for (Eigen::Index i = 0; i < 6; ++i) {
            x(i, 0) = g(rng);
            x(i, 1) = g(rng);
            y[static_cast<std::size_t>(i)] = i < 3 ? 1 : -1;
        }
        for (double C : {0.5, 1.0, 10.0}) {
            for (bool linear : {true, false}) {
                const Eigen::MatrixXd k = linear ? Eigen::MatrixXd(x * x.transpose()) : rbf_gram(x, 0.7);
                const auto oracle = qppm::testing::brute_svm_dual(k, y, C);
                const auto m = fit(k, y, {.C = C, .tol = 1e-6});
                EXPECT_NEAR(dual_objective(m.alphas(), k, y), oracle.objective, 1e-5)
                    << "trial " << trial << " C " << C << (linear ? " linear" : " rbf");
            }
        }
    }
}

TEST(Binary, KktAndFeasibility) {
    std::mt19937_64 rng(13);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::Index m = 40;
        Eigen::MatrixXd x(m, 3);
        std::vector<int> y(static_cast<std::size_t>(m));
        for (Eigen::Index i = 0; i < m; ++i) {
            for (Eigen::Index j = 0; j < 3; ++j) {
                x(i, j) = g(rng);
            }
            y[static_cast<std::size_t>(i)] = x(i, 0) + 0.5 * g(rng) > 0 ? 1 : -1;
        }
        const auto k = rbf_gram(x, 0.5);
        const SvmParams p{.C = 2.0, .tol = 1e-3};
        const auto model = fit(k, y, p);
        const Eigen::VectorXd a = model.alphas();
        const auto f = train_decisions(model, k, y);
        double feas = 0.0;
        for (Eigen::Index i = 0; i < m; ++i) {
            const double yi = y[static_cast<std::size_t>(i)];
            const double yf = yi * f(i);
            EXPECT_GE(a(i), 0.0);
            EXPECT_LE(a(i), p.C);
            feas += a(i) * yi;
            // Per-sample KKT within tol; SMO stops when the violating-pair gap drops below tol.
            if (a(i) <= 0.0) {
                EXPECT_GE(yf, 1.0 - p.tol);
            } else if (a(i) >= p.C) {
                EXPECT_LE(yf, 1.0 + p.tol);
            } else {
                EXPECT_LE(std::abs(yf - 1.0), p.tol);
            }
        }
        EXPECT_NEAR(feas, 0.0, 1e-6);
        EXPECT_LE(max_kkt_violation(model, k, y), p.tol);
        const auto again = fit(k, y, p);
        EXPECT_EQ(again.dual_coefs, model.dual_coefs);
        EXPECT_EQ(again.bias, model.bias);
    }
}

TEST(Binary, TinyCPinsAlphas) {
    const auto s = separable(20, 4);
    const Eigen::MatrixXd k = s.x * s.x.transpose();
    const auto m = fit(k, s.y, {.C = 1e-9});
    EXPECT_LE(m.alphas().maxCoeff(), 1e-9);
    for (Eigen::Index i = 0; i < k.rows(); ++i) {
        EXPECT_NEAR(decision(m, k.row(i).transpose()), m.bias, 1e-6);
    }
}

TEST(Binary, PrimalAgreementOnSeparableData) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto s = separable(30, seed);
        const Eigen::MatrixXd k = s.x * s.x.transpose();
        const auto m = fit(k, s.y, {.C = 1000.0});
        Eigen::Vector2d w = Eigen::Vector2d::Zero();
        for (std::size_t t = 0; t < m.support_indices.size(); ++t) {
            w += m.dual_coefs[t] * s.x.row(static_cast<Eigen::Index>(m.support_indices[t])).transpose();
        }
        std::mt19937_64 rng(seed + 100);
        std::uniform_real_distribution<double> u(-4, 4);
        for (Eigen::Index i = 0; i < s.x.rows(); ++i) {
            const double kernel_side = decision(m, k.row(i).transpose());
            EXPECT_EQ(kernel_side > 0, s.w.dot(s.x.row(i).transpose()) + s.b > 0);
        }
        for (int t = 0; t < 50; ++t) {
            const Eigen::Vector2d p(u(rng), u(rng));
            const Eigen::VectorXd row = s.x * p;
            const double primal = w.dot(p) + m.bias;
            if (std::abs(primal) > 1e-9) {
                EXPECT_EQ(decision(m, row) > 0, primal > 0);
            }
        }
    }
}

TEST(Binary, Errors) {
    const Eigen::MatrixXd k = Eigen::MatrixXd::Identity(3, 3);
    const std::vector<int> same{1, 1, 1};
    EXPECT_THROW((void)fit(k, same), DegenerateModelError);
    const std::vector<int> bad{1, 0, -1};
    EXPECT_THROW((void)fit(k, bad), ConfigError);
    const std::vector<int> two{1, -1};
    EXPECT_THROW((void)fit(k, two), ConfigError);
    const std::vector<int> ok{1, -1, 1};
    EXPECT_THROW((void)fit(k, ok, {.C = 0.0}), ConfigError);
    EXPECT_THROW((void)fit(k, ok, {.C = 1.0, .tol = 1e-12, .max_iterations = 0}), ConvergenceError);
}

TEST(Multiclass, RecoversSeparatedClustersAndMatchesOracle) {
    std::mt19937_64 rng(21);
    std::normal_distribution<double> g(0.0, 0.2);
    const std::vector<Eigen::Vector2d> centers{{0, 0}, {3, 0}, {0, 3}};
    const std::vector<std::string> names{"b", "a", "c"};
    Eigen::MatrixXd x(9, 2);
    std::vector<std::string> labels;
    for (Eigen::Index i = 0; i < 9; ++i) {
        const auto c = static_cast<std::size_t>(i % 3);
        x.row(i) = (centers[c] + Eigen::Vector2d(g(rng), g(rng))).transpose();
        labels.push_back(names[c]);
    }
    const auto k = rbf_gram(x, 0.5);
    const auto model = fit_multiclass(k, labels, {.C = 1.0, .tol = 1e-6});
    EXPECT_EQ(model.classes, (std::vector<std::string>{"a", "b", "c"}));
    ASSERT_EQ(model.models.size(), 3u);
    for (Eigen::Index i = 0; i < 9; ++i) {
        EXPECT_EQ(model.classes[predict(model, k.row(i).transpose())], labels[static_cast<std::size_t>(i)]);
    }
    for (std::size_t c = 0; c < 3; ++c) {
        std::vector<int> y;
        for (const auto &l : labels) {
            y.push_back(l == model.classes[c] ? 1 : -1);
        }
        const auto oracle = qppm::testing::brute_svm_dual(k, y, 1.0);
        EXPECT_NEAR(dual_objective(model.models[c].alphas(), k, y), oracle.objective, 1e-5);
    }
}

TEST(Multiclass, TwoClassesReduceToBinary) {
    const auto s = separable(24, 9);
    const Eigen::MatrixXd k = s.x * s.x.transpose();
    std::vector<std::string> labels;
    for (int v : s.y) {
        labels.push_back(v > 0 ? "pos" : "neg");
    }
    const auto mc = fit_multiclass(k, labels);
    ASSERT_TRUE(mc.binary());
    std::vector<int> y;
    for (const auto &l : labels) {
        y.push_back(l == mc.classes[0] ? 1 : -1);
    }
    const auto bin = fit(k, y);
    for (Eigen::Index i = 0; i < k.rows(); ++i) {
        const double f = decision(bin, k.row(i).transpose());
        EXPECT_EQ(predict(mc, k.row(i).transpose()), f >= 0 ? 0u : 1u);
    }
    const std::vector<std::string> one(4, "x");
    EXPECT_THROW((void)fit_multiclass(Eigen::MatrixXd::Identity(4, 4), one), DegenerateModelError);
}

TEST(Multiclass, TiesGoToSmallerIndex) {
    MulticlassModel m;
    m.classes = {"a", "b", "c"};
    for (int i = 0; i < 3; ++i) {
        SvmModel s;
        s.bias = i == 0 ? 0.1 : 0.5;
        s.training_size = 2;
        m.models.push_back(s);
    }
    EXPECT_EQ(predict(m, Eigen::VectorXd::Zero(2)), 1u);
}

TEST(Multiclass, JsonRoundTrip) {
    std::mt19937_64 rng(22);
    std::normal_distribution<double> g;
    Eigen::MatrixXd x(12, 2);
    std::vector<std::string> labels;
    for (Eigen::Index i = 0; i < 12; ++i) {
        x(i, 0) = g(rng);
        x(i, 1) = g(rng);
        labels.push_back(std::string(1, static_cast<char>('a' + i % 3)));
    }
    const auto k = rbf_gram(x, 1.0);
    const auto m = fit_multiclass(k, labels);
    const auto back = multiclass_from_json(to_json(m));
    EXPECT_EQ(back.classes, m.classes);
    ASSERT_EQ(back.models.size(), m.models.size());
    for (std::size_t c = 0; c < m.models.size(); ++c) {
        EXPECT_EQ(back.models[c].dual_coefs, m.models[c].dual_coefs);
        EXPECT_EQ(back.models[c].support_indices, m.models[c].support_indices);
        EXPECT_EQ(back.models[c].bias, m.models[c].bias);
    }
    EXPECT_EQ(to_json(back), to_json(m));
    EXPECT_THROW((void)multiclass_from_json("{\"format\":\"other\"}"), ConfigError);
    EXPECT_THROW((void)multiclass_from_json("not json"), ConfigError);
}
