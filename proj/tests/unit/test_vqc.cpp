#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "qppm/error.hpp"
#include "qppm/vqc.hpp"
#include "support/oracles.hpp"

using namespace qppm;
using namespace qppm::vqc;
using qsim::FeatureMapKind;
using qsim::FeatureMapVariant;

namespace {

std::vector<std::string> class_names(std::size_t c) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < c; ++i) {
        out.push_back("k" + std::to_string(i));
    }
    return out;
}

Eigen::MatrixXd random_x(Eigen::Index m, Eigen::Index n, std::mt19937_64 &rng) {
    std::uniform_real_distribution<double> u(0.0, std::numbers::pi);
    Eigen::MatrixXd x(m, n);
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            x(i, j) = u(rng);
        }
    }
    return x;
}

std::vector<double> row(const Eigen::MatrixXd &x, Eigen::Index i) {
    std::vector<double> v(static_cast<std::size_t>(x.cols()));
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        v[static_cast<std::size_t>(j)] = x(i, j);
    }
    return v;
}

} // namespace

TEST(Forward, GroundState) {
    auto m = initialize(1, class_names(2), {FeatureMapVariant::Angle, 1}, 1, 3);
    std::fill(m.theta.begin(), m.theta.end(), 0.0);
    const std::vector<double> x{0.0};
    const auto s = forward(m, x);
    ASSERT_EQ(s.size(), 2u);
    EXPECT_NEAR(s[0], 1.0, 1e-12);
    EXPECT_EQ(predict(m, x), 0u);
}

TEST(Forward, ScoresAreProbabilityVectors) {
    std::mt19937_64 rng(4);
    for (std::size_t c : {2u, 3u, 5u, 8u}) {
        for (auto v : {FeatureMapVariant::Angle, FeatureMapVariant::ZZ, FeatureMapVariant::AngleZZ}) {
            const auto m = initialize(4, class_names(c), {v, 2}, 2, c);
            const auto x = random_x(5, 4, rng);
            for (Eigen::Index i = 0; i < 5; ++i) {
                const auto s = forward(m, row(x, i));
                ASSERT_EQ(s.size(), c);
                double sum = 0;
                for (double p : s) {
                    EXPECT_GE(p, 0.0);
                    sum += p;
                }
                EXPECT_NEAR(sum, 1.0, 1e-9);
            }
        }
    }
}

TEST(Forward, ReadoutGroupsBitstrings) {
    // Three classes on two readout qubits: bitstrings 0,1,2 -> classes 0,1,2, bitstring 3 -> class 0.
    auto m = initialize(2, class_names(3), {FeatureMapVariant::Angle, 1}, 1, 1, false);
    EXPECT_EQ(m.readout_qubits(), 2u);
    std::vector<qsim::Complex> amp(4, 0.0);
    amp[3] = 1.0;
    const auto s = readout(m, qsim::StateVector(2, amp), {});
    EXPECT_NEAR(s[0], 1.0, 1e-12);
    amp[3] = 0.0;
    amp[2] = 1.0;
    EXPECT_NEAR(readout(m, qsim::StateVector(2, amp), {})[2], 1.0, 1e-12);
}

TEST(Forward, ShotsAgreeWithExact) {
    std::mt19937_64 rng(5);
    const auto m = initialize(3, class_names(2), {FeatureMapVariant::ZZ, 2}, 2, 9);
    const auto x = random_x(20, 3, rng);
    const std::size_t shots = 100000;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const auto exact = forward(m, row(x, i));
        const auto est = forward(m, row(x, i), qsim::ShotConfig::sampled(shots, 50 + static_cast<std::uint64_t>(i)));
        const double sigma = std::sqrt(exact[0] * (1 - exact[0]) / shots);
        EXPECT_LE(std::abs(est[0] - exact[0]), 5 * sigma + 1e-12);
    }
}

TEST(Gradient, ParameterShiftMatchesFiniteDifferences) {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> ang(-std::numbers::pi, std::numbers::pi);
    for (std::size_t n = 1; n <= 4; ++n) {
        for (auto v : {FeatureMapVariant::Angle, FeatureMapVariant::ZZ, FeatureMapVariant::AngleZZ}) {
            const std::size_t c = n == 1 ? 2 : 3;
            auto m = initialize(n, class_names(c), {v, 1}, 2, n);
            for (auto &t : m.theta) {
                t = ang(rng);
            }
            const auto x = random_x(6, static_cast<Eigen::Index>(n), rng);
            std::vector<std::size_t> labels;
            for (int i = 0; i < 6; ++i) {
                labels.push_back(static_cast<std::size_t>(i) % c);
            }
            const auto ps = parameter_shift_gradient(m, x, labels);
            const auto fd = qppm::testing::fd_gradient(m, x, labels);
            ASSERT_EQ(ps.size(), fd.size());
            for (std::size_t j = 0; j < ps.size(); ++j) {
                EXPECT_NEAR(ps[j], fd[j], 1e-5) << "n " << n << " param " << j;
            }
            EXPECT_EQ(parameter_shift_gradient(m, x, labels, {}, 3), ps);
        }
    }
}

TEST(Train, SingleQubitSeparable) {
    Eigen::MatrixXd x(8, 1);
    std::vector<std::size_t> labels;
    for (Eigen::Index i = 0; i < 8; ++i) {
        const bool high = i % 2 == 1;
        x(i, 0) = high ? 2.6 + 0.1 * static_cast<double>(i) : 0.1 * static_cast<double>(i);
        labels.push_back(high ? 1 : 0);
    }
    const auto init = initialize(1, class_names(2), {FeatureMapVariant::Angle, 1}, 1, 11);
    const auto r = train(init, x, labels, {.learning_rate = 0.1, .epochs = 20});
    ASSERT_EQ(r.loss_history.size(), 21u);
    EXPECT_LE(r.loss_history.back(), r.loss_history.front());
    for (Eigen::Index i = 0; i < 8; ++i) {
        EXPECT_EQ(predict(r.model, row(x, i)), labels[static_cast<std::size_t>(i)]);
    }
}

TEST(Train, LossDecreasesWithSmallSteps) {
    std::mt19937_64 rng(7);
    const auto x = random_x(12, 3, rng);
    std::vector<std::size_t> labels;
    for (Eigen::Index i = 0; i < 12; ++i) {
        labels.push_back(x(i, 0) > 1.5 ? 1 : 0);
    }
    const auto init = initialize(3, class_names(2), {FeatureMapVariant::ZZ, 1}, 2, 5);
    const auto r = train(init, x, labels, {.learning_rate = 0.01, .epochs = 10});
    for (std::size_t e = 1; e < r.loss_history.size(); ++e) {
        EXPECT_LE(r.loss_history[e], r.loss_history[e - 1] + 1e-12);
    }
    const auto spsa = train(init, x, labels, {.learning_rate = 0.01, .epochs = 3, .seed = 2, .method = GradientMethod::Spsa});
    EXPECT_EQ(spsa.loss_history.size(), 4u);
    const auto spsa2 = train(init, x, labels, {.learning_rate = 0.01, .epochs = 3, .seed = 2, .method = GradientMethod::Spsa});
    EXPECT_EQ(spsa.model.theta, spsa2.model.theta);
}

TEST(Train, ZeroEpochsAndDivergence) {
    std::mt19937_64 rng(8);
    const auto x = random_x(4, 2, rng);
    const std::vector<std::size_t> labels{0, 1, 0, 1};
    const auto init = initialize(2, class_names(2), {FeatureMapVariant::ZZ, 1}, 1, 2);
    const auto r = train(init, x, labels, {.epochs = 0});
    EXPECT_EQ(r.model.theta, init.theta);
    EXPECT_EQ(r.loss_history.size(), 1u);

    auto broken = init;
    broken.theta[0] = std::numeric_limits<double>::quiet_NaN();
    try {
        (void)train(broken, x, labels, {.epochs = 2});
        FAIL() << "expected TrainingError";
    } catch (const TrainingError &e) {
        EXPECT_EQ(e.epoch(), 0u);
    }
}

TEST(Structure, IdentityLayerInvariance) {
    std::mt19937_64 rng(9);
    const auto x = random_x(5, 3, rng);
    const auto base = initialize(3, class_names(4), {FeatureMapVariant::AngleZZ, 2}, 2, 4, false);
    auto deeper = base;
    deeper.layers = 3;
    deeper.theta.insert(deeper.theta.end(), 3, 0.0);
    for (Eigen::Index i = 0; i < 5; ++i) {
        const auto a = forward(base, row(x, i));
        const auto b = forward(deeper, row(x, i));
        for (std::size_t c = 0; c < a.size(); ++c) {
            EXPECT_NEAR(a[c], b[c], 1e-12);
        }
    }
}

TEST(Structure, ArgmaxAndInitErrors) {
    EXPECT_EQ(argmax(std::vector<double>{0.7, 0.3}), 0u);
    EXPECT_EQ(argmax(std::vector<double>{0.5, 0.5}), 0u);
    EXPECT_EQ(argmax(std::vector<double>{0.2, 0.3, 0.5}), 2u);
    EXPECT_THROW((void)initialize(2, class_names(1), {}, 1, 0), ConfigError);
    EXPECT_THROW((void)initialize(2, class_names(2), {}, 0, 0), ConfigError);
    EXPECT_THROW((void)initialize(1, class_names(3), {FeatureMapVariant::Angle, 1}, 1, 0), ConfigError);
    const auto m = initialize(4, class_names(3), {}, 3, 0);
    EXPECT_EQ(m.theta.size(), 12u);
    for (double t : m.theta) {
        EXPECT_LE(std::abs(t), 0.1);
    }
    EXPECT_EQ(parse_gradient_method(to_string(GradientMethod::Spsa)), GradientMethod::Spsa);
    EXPECT_THROW((void)parse_gradient_method("adam"), ConfigError);
}

TEST(Structure, CheckpointRoundTrip) {
    const auto m = initialize(3, class_names(3), {FeatureMapVariant::ZZ, 2}, 2, 77);
    const auto back = from_json(to_json(m));
    EXPECT_EQ(back.theta, m.theta);
    EXPECT_EQ(back.classes, m.classes);
    EXPECT_EQ(back.feature_map, m.feature_map);
    EXPECT_EQ(back.layers, m.layers);
    EXPECT_EQ(back.entangle, m.entangle);
    EXPECT_EQ(to_json(back), to_json(m));
    EXPECT_THROW((void)from_json("{}"), ConfigError);
}

TEST(Fit, ClassesSortedAndQubitsFromDimension) {
    std::mt19937_64 rng(10);
    const auto x = random_x(6, 2, rng);
    const std::vector<std::string> labels{"z", "a", "z", "a", "m", "m"};
    const auto r = fit(x, labels, {.feature_map = {FeatureMapVariant::Angle, 1}, .layers = 1,
                                   .optimizer = {.epochs = 1}});
    EXPECT_EQ(r.model.classes, (std::vector<std::string>{"a", "m", "z"}));
    EXPECT_EQ(r.model.n_qubits, 2u);
}
