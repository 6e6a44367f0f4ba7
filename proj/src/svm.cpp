#include "qppm/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include <json.hpp>

#include "qppm/error.hpp"

namespace qppm::svm {
namespace {

constexpr double kTau = 1e-12;

bool in_up(double a, int y, double C) { return (y == 1 && a < C) || (y == -1 && a > 0.0); }
bool in_low(double a, int y, double C) { return (y == -1 && a < C) || (y == 1 && a > 0.0); }

} // namespace

Eigen::VectorXd SvmModel::alphas() const {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(training_size));
    for (std::size_t s = 0; s < support_indices.size(); ++s) {
        a(static_cast<Eigen::Index>(support_indices[s])) = std::abs(dual_coefs[s]);
    }
    return a;
}

SvmModel fit(const Eigen::MatrixXd &gram, std::span<const int> labels, const SvmParams &params) {
    const auto m = static_cast<Eigen::Index>(labels.size());
    if (gram.rows() != m || gram.cols() != m) {
        throw ConfigError("gram matrix shape does not match the label count");
    }
    if (!(params.C > 0.0) || !(params.tol > 0.0)) {
        throw ConfigError("SVM needs C > 0 and tol > 0");
    }
    bool pos = false, neg = false;
    for (int y : labels) {
        if (y == 1) {
            pos = true;
        } else if (y == -1) {
            neg = true;
        } else {
            throw ConfigError("binary SVM labels must be +1 or -1");
        }
    }
    if (!pos || !neg) {
        throw DegenerateModelError("binary SVM needs both classes in the training labels");
    }

    const double C = params.C;
    auto Q = [&](Eigen::Index i, Eigen::Index j) {
        return static_cast<double>(labels[i] * labels[j]) * gram(i, j);
    };
    Eigen::VectorXd alpha = Eigen::VectorXd::Zero(m);
    Eigen::VectorXd grad = Eigen::VectorXd::Constant(m, -1.0);

    std::size_t iter = 0;
    for (;; ++iter) {
        // Maximal violating pair.
        Eigen::Index i = -1, j = -1;
        double gmax = -std::numeric_limits<double>::infinity();
        double gmin = std::numeric_limits<double>::infinity();
        for (Eigen::Index t = 0; t < m; ++t) {
            const double v = -labels[t] * grad(t);
            if (in_up(alpha(t), labels[t], C) && v > gmax) {
                gmax = v;
                i = t;
            }
            if (in_low(alpha(t), labels[t], C) && v < gmin) {
                gmin = v;
                j = t;
            }
        }
        if (i < 0 || j < 0 || gmax - gmin < params.tol) {
            break;
        }
        if (iter >= params.max_iterations) {
            throw ConvergenceError("SMO did not converge within " +
                                   std::to_string(params.max_iterations) + " iterations");
        }

        const double old_ai = alpha(i);
        const double old_aj = alpha(j);
        const int yi = labels[i];
        const int yj = labels[j];
        if (yi != yj) {
            double quad = Q(i, i) + Q(j, j) + 2.0 * Q(i, j);
            quad = quad > 0.0 ? quad : kTau;
            const double delta = (-grad(i) - grad(j)) / quad;
            const double diff = alpha(i) - alpha(j);
            alpha(i) += delta;
            alpha(j) += delta;
            if (diff > 0.0) {
                if (alpha(j) < 0.0) {
                    alpha(j) = 0.0;
                    alpha(i) = diff;
                }
            } else if (alpha(i) < 0.0) {
                alpha(i) = 0.0;
                alpha(j) = -diff;
            }
            if (diff > 0.0) {
                if (alpha(i) > C) {
                    alpha(i) = C;
                    alpha(j) = C - diff;
                }
            } else if (alpha(j) > C) {
                alpha(j) = C;
                alpha(i) = C + diff;
            }
        } else {
            double quad = Q(i, i) + Q(j, j) - 2.0 * Q(i, j);
            quad = quad > 0.0 ? quad : kTau;
            const double delta = (grad(i) - grad(j)) / quad;
            const double sum = alpha(i) + alpha(j);
            alpha(i) -= delta;
            alpha(j) += delta;
            if (sum > C) {
                if (alpha(i) > C) {
                    alpha(i) = C;
                    alpha(j) = sum - C;
                }
            } else if (alpha(j) < 0.0) {
                alpha(j) = 0.0;
                alpha(i) = sum;
            }
            if (sum > C) {
                if (alpha(j) > C) {
                    alpha(j) = C;
                    alpha(i) = sum - C;
                }
            } else if (alpha(i) < 0.0) {
                alpha(i) = 0.0;
                alpha(j) = sum;
            }
        }
        const double dai = alpha(i) - old_ai;
        const double daj = alpha(j) - old_aj;
        for (Eigen::Index k = 0; k < m; ++k) {
            grad(k) += Q(k, i) * dai + Q(k, j) * daj;
        }
    }

    // rho: mean of y G over free vectors, else midpoint of the feasible range.
    double ub = std::numeric_limits<double>::infinity();
    double lb = -std::numeric_limits<double>::infinity();
    double sum_free = 0.0;
    std::size_t n_free = 0;
    for (Eigen::Index t = 0; t < m; ++t) {
        const double yg = labels[t] * grad(t);
        if (alpha(t) >= C) {
            if (labels[t] == -1) {
                ub = std::min(ub, yg);
            } else {
                lb = std::max(lb, yg);
            }
        } else if (alpha(t) <= 0.0) {
            if (labels[t] == 1) {
                ub = std::min(ub, yg);
            } else {
                lb = std::max(lb, yg);
            }
        } else {
            ++n_free;
            sum_free += yg;
        }
    }
    const double rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : 0.5 * (ub + lb);

    SvmModel model;
    model.C = C;
    model.bias = -rho;
    model.training_size = static_cast<std::size_t>(m);
    model.iterations = iter;
    for (Eigen::Index t = 0; t < m; ++t) {
        if (alpha(t) > 0.0) {
            model.support_indices.push_back(static_cast<std::size_t>(t));
            model.dual_coefs.push_back(alpha(t) * labels[t]);
        }
    }
    return model;
}

double decision(const SvmModel &model, const Eigen::Ref<const Eigen::VectorXd> &row) {
    if (static_cast<std::size_t>(row.size()) != model.training_size) {
        throw ConfigError("kernel row length does not match the training set");
    }
    double f = model.bias;
    for (std::size_t s = 0; s < model.support_indices.size(); ++s) {
        f += model.dual_coefs[s] * row(static_cast<Eigen::Index>(model.support_indices[s]));
    }
    return f;
}

double dual_objective(const Eigen::VectorXd &alpha, const Eigen::MatrixXd &gram,
                      std::span<const int> labels) {
    Eigen::VectorXd ay(alpha.size());
    for (Eigen::Index i = 0; i < alpha.size(); ++i) {
        ay(i) = alpha(i) * labels[static_cast<std::size_t>(i)];
    }
    return alpha.sum() - 0.5 * ay.dot(gram * ay);
}

double max_kkt_violation(const SvmModel &model, const Eigen::MatrixXd &gram,
                         std::span<const int> labels) {
    const Eigen::VectorXd alpha = model.alphas();
    double worst = 0.0;
    // Bounds are compared with a relative slack so that alpha values produced
    // by clipping are classified exactly.
    const double eps = 1e-12 * model.C;
    for (Eigen::Index i = 0; i < gram.rows(); ++i) {
        const double yf = labels[static_cast<std::size_t>(i)] * decision(model, gram.row(i).transpose());
        double v = 0.0;
        if (alpha(i) <= eps) {
            v = std::max(0.0, 1.0 - yf);
        } else if (alpha(i) >= model.C - eps) {
            v = std::max(0.0, yf - 1.0);
        } else {
            v = std::abs(yf - 1.0);
        }
        worst = std::max(worst, v);
    }
    return worst;
}

MulticlassModel fit_multiclass(const Eigen::MatrixXd &gram, std::span<const std::string> labels,
                               const SvmParams &params) {
    const std::set<std::string> distinct(labels.begin(), labels.end());
    if (distinct.size() < 2) {
        throw DegenerateModelError("multiclass SVM needs at least two label classes");
    }
    MulticlassModel out;
    out.params = params;
    out.classes.assign(distinct.begin(), distinct.end());
    const std::size_t fitted = out.classes.size() == 2 ? 1 : out.classes.size();
    std::vector<int> y(labels.size());
    for (std::size_t c = 0; c < fitted; ++c) {
        for (std::size_t i = 0; i < labels.size(); ++i) {
            y[i] = labels[i] == out.classes[c] ? 1 : -1;
        }
        out.models.push_back(fit(gram, y, params));
    }
    return out;
}

std::vector<double> scores(const MulticlassModel &model, const Eigen::Ref<const Eigen::VectorXd> &row) {
    if (model.binary()) {
        const double f = decision(model.models.front(), row);
        return {f, -f};
    }
    std::vector<double> out;
    out.reserve(model.models.size());
    for (const auto &m : model.models) {
        out.push_back(decision(m, row));
    }
    return out;
}

std::size_t predict(const MulticlassModel &model, const Eigen::Ref<const Eigen::VectorXd> &row) {
    const auto s = scores(model, row);
    std::size_t best = 0;
    for (std::size_t c = 1; c < s.size(); ++c) {
        if (s[c] > s[best]) {
            best = c;
        }
    }
    return best;
}

std::string to_json(const MulticlassModel &model) {
    nlohmann::json j;
    j["format"] = "qppm.svm";
    j["version"] = 1;
    j["classes"] = model.classes;
    j["C"] = model.params.C;
    j["tol"] = model.params.tol;
    j["models"] = nlohmann::json::array();
    for (const auto &m : model.models) {
        j["models"].push_back({{"dual_coefs", m.dual_coefs},
                               {"support_indices", m.support_indices},
                               {"bias", m.bias},
                               {"training_size", m.training_size}});
    }
    return j.dump(2);
}

MulticlassModel multiclass_from_json(std::string_view text) {
    try {
        const auto j = nlohmann::json::parse(text);
        if (j.at("format") != "qppm.svm" || j.at("version") != 1) {
            throw ConfigError("not a version-1 qppm SVM model");
        }
        MulticlassModel out;
        out.classes = j.at("classes").get<std::vector<std::string>>();
        out.params.C = j.at("C").get<double>();
        out.params.tol = j.at("tol").get<double>();
        for (const auto &mj : j.at("models")) {
            SvmModel m;
            m.dual_coefs = mj.at("dual_coefs").get<std::vector<double>>();
            m.support_indices = mj.at("support_indices").get<std::vector<std::size_t>>();
            m.bias = mj.at("bias").get<double>();
            m.training_size = mj.at("training_size").get<std::size_t>();
            m.C = out.params.C;
            out.models.push_back(std::move(m));
        }
        return out;
    } catch (const nlohmann::json::exception &e) {
        throw ConfigError(std::string("invalid SVM model JSON: ") + e.what());
    }
}

} // namespace qppm::svm
