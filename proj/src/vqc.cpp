#include "qppm/vqc.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <set>

#include <json.hpp>

#include "parallel.hpp"
#include "qppm/error.hpp"

namespace qppm::vqc {
namespace {

constexpr double kProbFloor = 1e-12;

std::size_t ceil_log2(std::size_t c) {
    std::size_t q = 0;
    while ((std::size_t{1} << q) < c) {
        ++q;
    }
    return std::max<std::size_t>(q, 1);
}

std::span<const double> row_span(const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> &m,
                                 Eigen::Index i) {
    return {m.data() + i * m.cols(), static_cast<std::size_t>(m.cols())};
}

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

void check_inputs(const VqcModel &model, const Eigen::MatrixXd &x, std::span<const std::size_t> labels) {
    if (static_cast<std::size_t>(x.rows()) != labels.size()) {
        throw ConfigError("sample and label counts differ");
    }
    if (x.rows() > 0 && static_cast<std::size_t>(x.cols()) != model.n_qubits) {
        throw ConfigError("feature dimension " + std::to_string(x.cols()) + " does not match " +
                          std::to_string(model.n_qubits) + " qubits");
    }
    for (auto y : labels) {
        if (y >= model.classes.size()) {
            throw ConfigError("label index out of range");
        }
    }
}

/// States after the feature map; fixed while theta moves.
std::vector<qsim::StateVector> embed_all(const VqcModel &model, const RowMatrix &x, std::size_t threads) {
    std::vector<qsim::StateVector> states(static_cast<std::size_t>(x.rows()), qsim::StateVector(model.n_qubits));
    detail::parallel_for(states.size(), threads, [&](std::size_t i) {
        states[i] = qsim::run(qsim::build_feature_map(model.feature_map, row_span(x, static_cast<Eigen::Index>(i))));
    });
    return states;
}

double class_prob(const VqcModel &model, const std::vector<double> &theta, const qsim::StateVector &embedded,
                  std::size_t label, const qsim::ShotConfig &shots) {
    const auto state = qsim::run(qsim::weight_layer(theta, model.n_qubits, model.entangle), embedded);
    return readout(model, state, shots)[label];
}

qsim::ShotConfig sample_shots(const qsim::ShotConfig &shots, std::size_t sample, std::size_t circuit) {
    if (shots.exact()) {
        return shots;
    }
    return qsim::ShotConfig::sampled(*shots.shots, qsim::derive_seed(shots.seed, sample, circuit));
}

double loss_on(const VqcModel &model, const std::vector<double> &theta, const std::vector<qsim::StateVector> &states,
               std::span<const std::size_t> labels, std::span<const std::size_t> subset,
               const qsim::ShotConfig &shots, std::size_t threads, std::size_t tag) {
    std::vector<double> terms(subset.size());
    detail::parallel_for(subset.size(), threads, [&](std::size_t k) {
        const std::size_t i = subset[k];
        const double p = class_prob(model, theta, states[i], labels[i], sample_shots(shots, i, tag));
        terms[k] = -std::log(std::max(p, kProbFloor));
    });
    if (terms.empty()) {
        return 0.0;
    }
    return std::accumulate(terms.begin(), terms.end(), 0.0) / static_cast<double>(terms.size());
}

std::vector<double> shift_gradient_on(const VqcModel &model, const std::vector<qsim::StateVector> &states,
                                      std::span<const std::size_t> labels, std::span<const std::size_t> subset,
                                      const qsim::ShotConfig &shots, std::size_t threads) {
    const std::size_t d = model.theta.size();
    std::vector<std::vector<double>> per_sample(subset.size(), std::vector<double>(d, 0.0));
    detail::parallel_for(subset.size(), threads, [&](std::size_t k) {
        const std::size_t i = subset[k];
        const std::size_t y = labels[i];
        const double p = class_prob(model, model.theta, states[i], y, sample_shots(shots, i, 0));
        const double inv = 1.0 / std::max(p, kProbFloor);
        std::vector<double> th = model.theta;
        for (std::size_t j = 0; j < d; ++j) {
            th[j] = model.theta[j] + std::numbers::pi / 2.0;
            const double plus = class_prob(model, th, states[i], y, sample_shots(shots, i, 2 * j + 1));
            th[j] = model.theta[j] - std::numbers::pi / 2.0;
            const double minus = class_prob(model, th, states[i], y, sample_shots(shots, i, 2 * j + 2));
            th[j] = model.theta[j];
            per_sample[k][j] = -inv * 0.5 * (plus - minus);
        }
    });
    std::vector<double> grad(d, 0.0);
    for (const auto &g : per_sample) {
        for (std::size_t j = 0; j < d; ++j) {
            grad[j] += g[j];
        }
    }
    if (!subset.empty()) {
        for (auto &g : grad) {
            g /= static_cast<double>(subset.size());
        }
    }
    return grad;
}

bool all_finite(const std::vector<double> &v) {
    return std::all_of(v.begin(), v.end(), [](double a) { return std::isfinite(a); });
}

} // namespace

std::size_t VqcModel::readout_qubits() const { return ceil_log2(classes.size()); }

VqcModel initialize(std::size_t n_qubits, std::vector<std::string> classes, const qsim::FeatureMapKind &feature_map,
                    std::size_t layers, std::uint64_t seed, bool entangle) {
    if (classes.size() < 2) {
        throw ConfigError("a classifier needs at least two classes");
    }
    if (layers == 0) {
        throw ConfigError("VQC needs at least one weight layer");
    }
    if (feature_map.layers == 0) {
        throw ConfigError("feature map needs at least one layer");
    }
    VqcModel m;
    m.feature_map = feature_map;
    m.n_qubits = n_qubits;
    m.layers = layers;
    m.classes = std::move(classes);
    m.entangle = entangle;
    if (n_qubits == 0 || n_qubits > qsim::kMaxQubits) {
        throw ConfigError("qubit count must be in [1, " + std::to_string(qsim::kMaxQubits) + "]");
    }
    if (m.readout_qubits() > n_qubits) {
        throw ConfigError(std::to_string(m.classes.size()) + " classes need " + std::to_string(m.readout_qubits()) +
                          " readout qubits but the register has " + std::to_string(n_qubits));
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-0.1, 0.1);
    m.theta.resize(layers * n_qubits);
    for (auto &t : m.theta) {
        t = u(rng);
    }
    return m;
}

qsim::CircuitSpec circuit(const VqcModel &model, std::span<const double> x) {
    if (x.size() != model.n_qubits) {
        throw ConfigError("feature dimension does not match the qubit count");
    }
    auto c = qsim::build_feature_map(model.feature_map, x);
    c.append(qsim::weight_layer(model.theta, model.n_qubits, model.entangle));
    return c;
}

std::vector<double> readout(const VqcModel &model, const qsim::StateVector &state, const qsim::ShotConfig &shots) {
    const std::size_t nc = model.classes.size();
    const std::size_t mask = (std::size_t{1} << model.readout_qubits()) - 1;
    std::vector<double> weight;
    if (shots.exact()) {
        weight = state.probabilities();
    } else {
        if (*shots.shots == 0) {
            throw ConfigError("shot count must be at least 1");
        }
        std::mt19937_64 rng(shots.seed);
        const auto counts = qsim::sample_counts(state, *shots.shots, rng);
        weight.assign(counts.begin(), counts.end());
    }
    std::vector<double> scores(nc, 0.0);
    for (std::size_t i = 0; i < weight.size(); ++i) {
        scores[(i & mask) % nc] += weight[i];
    }
    const double total = std::accumulate(scores.begin(), scores.end(), 0.0);
    if (total > 0.0) {
        for (auto &s : scores) {
            s /= total;
        }
    }
    return scores;
}

std::vector<double> forward(const VqcModel &model, std::span<const double> x, const qsim::ShotConfig &shots) {
    return readout(model, qsim::run(circuit(model, x)), shots);
}

std::size_t argmax(std::span<const double> scores) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < scores.size(); ++c) {
        if (scores[c] > scores[best]) {
            best = c;
        }
    }
    return best;
}

std::size_t predict(const VqcModel &model, std::span<const double> x, const qsim::ShotConfig &shots) {
    return argmax(forward(model, x, shots));
}

std::string_view to_string(GradientMethod m) {
    return m == GradientMethod::ParameterShift ? "param-shift" : "spsa";
}

GradientMethod parse_gradient_method(std::string_view name) {
    if (name == "param-shift" || name == "parameter-shift") {
        return GradientMethod::ParameterShift;
    }
    if (name == "spsa") {
        return GradientMethod::Spsa;
    }
    throw ConfigError("unknown gradient method '" + std::string(name) + "'");
}

double loss(const VqcModel &model, const Eigen::MatrixXd &x, std::span<const std::size_t> labels,
            const qsim::ShotConfig &shots, std::size_t threads) {
    check_inputs(model, x, labels);
    const RowMatrix rows = x;
    const auto states = embed_all(model, rows, threads);
    std::vector<std::size_t> all(labels.size());
    std::iota(all.begin(), all.end(), 0);
    return loss_on(model, model.theta, states, labels, all, shots, threads, 0);
}

std::vector<double> parameter_shift_gradient(const VqcModel &model, const Eigen::MatrixXd &x,
                                             std::span<const std::size_t> labels, const qsim::ShotConfig &shots,
                                             std::size_t threads) {
    check_inputs(model, x, labels);
    const RowMatrix rows = x;
    const auto states = embed_all(model, rows, threads);
    std::vector<std::size_t> all(labels.size());
    std::iota(all.begin(), all.end(), 0);
    return shift_gradient_on(model, states, labels, all, shots, threads);
}

TrainResult train(VqcModel init, const Eigen::MatrixXd &x, std::span<const std::size_t> labels,
                  const OptimizerConfig &opt) {
    if (!(opt.learning_rate > 0.0)) {
        throw ConfigError("learning rate must be positive");
    }
    check_inputs(init, x, labels);
    TrainResult out{std::move(init), {}};
    VqcModel &model = out.model;
    const RowMatrix rows = x;
    const auto states = embed_all(model, rows, opt.threads);
    std::vector<std::size_t> order(labels.size());
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(opt.seed);

    auto full_loss = [&](std::size_t epoch) {
        const double l = loss_on(model, model.theta, states, labels, order, opt.shots, opt.threads, 0);
        if (!std::isfinite(l)) {
            throw TrainingError("non-finite training loss", epoch);
        }
        return l;
    };
    out.loss_history.push_back(full_loss(0));
    const std::size_t batch = opt.batch_size == 0 ? order.size() : std::min(opt.batch_size, order.size());
    for (std::size_t epoch = 1; epoch <= opt.epochs; ++epoch) {
        std::vector<std::size_t> perm = order;
        if (batch < perm.size()) {
            std::shuffle(perm.begin(), perm.end(), rng);
        }
        for (std::size_t start = 0; start < perm.size(); start += batch) {
            const std::span<const std::size_t> subset(perm.data() + start, std::min(batch, perm.size() - start));
            std::vector<double> grad;
            if (opt.method == GradientMethod::ParameterShift) {
                grad = shift_gradient_on(model, states, labels, subset, opt.shots, opt.threads);
            } else {
                std::bernoulli_distribution coin(0.5);
                std::vector<double> delta(model.theta.size());
                for (auto &d : delta) {
                    d = coin(rng) ? 1.0 : -1.0;
                }
                std::vector<double> plus = model.theta, minus = model.theta;
                for (std::size_t j = 0; j < delta.size(); ++j) {
                    plus[j] += opt.spsa_c * delta[j];
                    minus[j] -= opt.spsa_c * delta[j];
                }
                const std::size_t tag = 2 * epoch;
                const double lp = loss_on(model, plus, states, labels, subset, opt.shots, opt.threads, tag);
                const double lm = loss_on(model, minus, states, labels, subset, opt.shots, opt.threads, tag + 1);
                grad.resize(delta.size());
                for (std::size_t j = 0; j < delta.size(); ++j) {
                    grad[j] = (lp - lm) / (2.0 * opt.spsa_c) * delta[j];
                }
            }
            if (!all_finite(grad)) {
                throw TrainingError("non-finite gradient", epoch);
            }
            for (std::size_t j = 0; j < grad.size(); ++j) {
                model.theta[j] -= opt.learning_rate * grad[j];
            }
        }
        out.loss_history.push_back(full_loss(epoch));
    }
    return out;
}

TrainResult fit(const Eigen::MatrixXd &x, std::span<const std::string> labels, const VqcConfig &config) {
    const std::set<std::string> distinct(labels.begin(), labels.end());
    if (distinct.size() < 2) {
        throw DegenerateModelError("VQC training needs at least two label classes");
    }
    std::vector<std::string> classes(distinct.begin(), distinct.end());
    std::vector<std::size_t> idx(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        idx[i] = static_cast<std::size_t>(std::lower_bound(classes.begin(), classes.end(), labels[i]) -
                                          classes.begin());
    }
    auto init = initialize(static_cast<std::size_t>(x.cols()), std::move(classes), config.feature_map,
                           config.layers, config.optimizer.seed, config.entangle);
    return train(std::move(init), x, idx, config.optimizer);
}

std::string to_json(const VqcModel &model) {
    nlohmann::json j;
    j["format"] = "qppm.vqc";
    j["version"] = 1;
    j["feature_map"] = {{"variant", std::string(qsim::to_string(model.feature_map.variant))},
                        {"layers", model.feature_map.layers}};
    j["n_qubits"] = model.n_qubits;
    j["layers"] = model.layers;
    j["entangle"] = model.entangle;
    j["theta"] = model.theta;
    j["classes"] = model.classes;
    return j.dump(2);
}

VqcModel from_json(std::string_view text) {
    try {
        const auto j = nlohmann::json::parse(text);
        if (j.at("format") != "qppm.vqc" || j.at("version") != 1) {
            throw ConfigError("not a version-1 qppm VQC checkpoint");
        }
        VqcModel m;
        m.feature_map.variant = qsim::parse_feature_map(j.at("feature_map").at("variant").get<std::string>());
        m.feature_map.layers = j.at("feature_map").at("layers").get<std::size_t>();
        m.n_qubits = j.at("n_qubits").get<std::size_t>();
        m.layers = j.at("layers").get<std::size_t>();
        m.entangle = j.at("entangle").get<bool>();
        m.theta = j.at("theta").get<std::vector<double>>();
        m.classes = j.at("classes").get<std::vector<std::string>>();
        if (m.theta.size() != m.layers * m.n_qubits) {
            throw ConfigError("theta size does not match layers x qubits");
        }
        if (!all_finite(m.theta)) {
            throw ConfigError("theta contains non-finite values");
        }
        return m;
    } catch (const nlohmann::json::exception &e) {
        throw ConfigError(std::string("invalid VQC checkpoint JSON: ") + e.what());
    }
}

} // namespace qppm::vqc
