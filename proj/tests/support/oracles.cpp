#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>

namespace qppm::testing {

ZonedInstant at_seconds(std::int64_t seconds) {
    const std::chrono::sys_days epoch = std::chrono::year{2020} / std::chrono::January / 1;
    return ZonedInstant{Instant(epoch) + std::chrono::seconds(seconds), std::chrono::minutes{0}};
}

eventlog::EventLog random_log(std::uint64_t seed, const RandomLogParams &p) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> len(1, p.max_case_length);
    std::uniform_int_distribution<std::size_t> act(0, p.activities - 1);
    std::uniform_int_distribution<std::size_t> res(0, std::max<std::size_t>(p.resources, 1) - 1);
    std::uniform_int_distribution<std::int64_t> start(0, p.time_span_seconds);
    std::uniform_int_distribution<std::int64_t> step(0, p.time_span_seconds / 10);
    std::bernoulli_distribution missing(p.missing_resource);

    std::vector<eventlog::TracePtr> traces;
    std::size_t budget = p.max_events;
    for (std::size_t c = 0; c < p.cases && budget > 0; ++c) {
        const std::size_t n = std::min(len(rng), budget);
        budget -= n;
        const std::string id = "c" + std::to_string(c);
        std::int64_t t = start(rng);
        std::vector<eventlog::Event> events;
        for (std::size_t i = 0; i < n; ++i) {
            std::optional<std::string> r;
            if (p.resources > 0 && !missing(rng)) {
                r = "r" + std::to_string(res(rng));
            }
            events.push_back({id, std::string(1, static_cast<char>('a' + act(rng))), at_seconds(t), r});
            t += step(rng);
        }
        traces.push_back(eventlog::make_trace(id, std::move(events)));
    }
    return eventlog::EventLog(std::move(traces));
}

double brute_feature(intercase::Feature f, const eventlog::EventLog &log, const intercase::Anchor &anchor,
                     Duration width, const intercase::FittedStats &stats) {
    const Instant lo = anchor.time - width;
    const Instant hi = anchor.time;
    auto inside = [&](const eventlog::Event &e) { return e.time() >= lo && e.time() <= hi; };

    switch (f) {
    case intercase::Feature::PeerCases: {
        std::set<std::string> cases{anchor.case_id};
        for (const auto &t : log.traces()) {
            for (const auto &e : t->events) {
                if (inside(e)) {
                    cases.insert(t->case_id);
                }
            }
        }
        return static_cast<double>(cases.size());
    }
    case intercase::Feature::PeerAct: {
        std::size_t n = 0;
        for (const auto &t : log.traces()) {
            for (const auto &e : t->events) {
                n += inside(e) ? 1 : 0;
            }
        }
        return static_cast<double>(n);
    }
    case intercase::Feature::ResCount: {
        std::set<std::string> res;
        for (const auto &t : log.traces()) {
            for (const auto &e : t->events) {
                if (inside(e) && e.resource && !e.resource->empty()) {
                    res.insert(*e.resource);
                }
            }
        }
        return static_cast<double>(res.size());
    }
    case intercase::Feature::AvgDelay: {
        std::vector<double> ratios;
        for (const auto &t : log.traces()) {
            for (std::size_t i = 1; i < t->events.size(); ++i) {
                const auto &a = t->events[i - 1];
                const auto &b = t->events[i];
                if (!inside(b)) {
                    continue;
                }
                const auto it = stats.transitions.mean_seconds.find({a.activity, b.activity});
                if (it == stats.transitions.mean_seconds.end() || it->second <= 0.0) {
                    continue;
                }
                const double observed = std::chrono::duration<double>(b.time() - a.time()).count();
                ratios.push_back(observed / it->second);
            }
        }
        if (ratios.empty()) {
            return 1.0;
        }
        std::sort(ratios.begin(), ratios.end());
        double sum = 0.0;
        for (const double r : ratios) {
            sum += r;
        }
        return sum / static_cast<double>(ratios.size());
    }
    case intercase::Feature::FreqAct:
    case intercase::Feature::TopRes: {
        const bool acts = f == intercase::Feature::FreqAct;
        const auto &vocab = acts ? stats.context.activities : stats.context.resources;
        std::map<std::size_t, std::size_t> counts;
        for (const auto &t : log.traces()) {
            for (const auto &e : t->events) {
                if (!inside(e)) {
                    continue;
                }
                if (acts) {
                    ++counts[vocab.code(e.activity)];
                } else if (e.resource && !e.resource->empty()) {
                    ++counts[vocab.code(*e.resource)];
                }
            }
        }
        counts.erase(0);
        std::size_t best = 0, best_count = 0;
        for (const auto &[code, n] : counts) {
            if (n > best_count) {
                best = code;
                best_count = n;
            }
        }
        return static_cast<double>(best);
    }
    case intercase::Feature::Batch: {
        const auto it = stats.successors.next.find(anchor.activity);
        if (it == stats.successors.next.end()) {
            return 0.0;
        }
        double best = 0.0;
        for (const auto &b : it->second) {
            const auto s = stats.batch.score.find(b);
            best = std::max(best, s == stats.batch.score.end() ? 0.0 : s->second);
        }
        return best;
    }
    }
    return std::numeric_limits<double>::quiet_NaN();
}

std::map<std::string, double> brute_burst_fractions(std::span<const eventlog::TracePtr> traces, Duration epsilon,
                                                    std::size_t min_burst) {
    struct Occ {
        Instant time;
        std::string case_id;
    };
    std::map<std::string, std::vector<Occ>> by_act;
    for (const auto &t : traces) {
        for (const auto &e : t->events) {
            by_act[e.activity].push_back({e.time(), t->case_id});
        }
    }
    std::map<std::string, double> out;
    for (const auto &[act, occ] : by_act) {
        std::size_t in_burst = 0;
        for (const auto &target : occ) {
            bool found = false;
            for (const auto &left : occ) {
                const Instant s = left.time;
                if (target.time < s || target.time > s + epsilon) {
                    continue;
                }
                std::set<std::string> cases;
                for (const auto &o : occ) {
                    if (o.time >= s && o.time <= s + epsilon) {
                        cases.insert(o.case_id);
                    }
                }
                if (cases.size() >= min_burst) {
                    found = true;
                    break;
                }
            }
            in_burst += found ? 1 : 0;
        }
        out[act] = static_cast<double>(in_burst) / static_cast<double>(occ.size());
    }
    return out;
}

QpSolution brute_svm_dual(const Eigen::MatrixXd &gram, std::span<const int> labels, double C) {
    const auto m = static_cast<Eigen::Index>(labels.size());
    Eigen::VectorXd y(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        y(i) = labels[static_cast<std::size_t>(i)];
    }
    const Eigen::MatrixXd Q = y.asDiagonal() * gram * y.asDiagonal();
    auto objective = [&](const Eigen::VectorXd &a) { return a.sum() - 0.5 * a.dot(Q * a); };

    QpSolution best;
    best.objective = -std::numeric_limits<double>::infinity();
    std::size_t combos = 1;
    for (Eigen::Index i = 0; i < m; ++i) {
        combos *= 3;
    }
    for (std::size_t code = 0; code < combos; ++code) {
        // 0: alpha = 0, 1: alpha = C, 2: free.
        std::vector<int> state(static_cast<std::size_t>(m));
        std::size_t c = code;
        for (auto &s : state) {
            s = static_cast<int>(c % 3);
            c /= 3;
        }
        Eigen::VectorXd a = Eigen::VectorXd::Zero(m);
        std::vector<Eigen::Index> free;
        for (Eigen::Index i = 0; i < m; ++i) {
            if (state[static_cast<std::size_t>(i)] == 1) {
                a(i) = C;
            } else if (state[static_cast<std::size_t>(i)] == 2) {
                free.push_back(i);
            }
        }
        if (!free.empty()) {
            const auto f = static_cast<Eigen::Index>(free.size());
            // Stationarity on the face: Q_FF a_F + b y_F = 1 - Q_F,fixed a_fixed,
            // feasibility: y_F . a_F = -y_fixed . a_fixed.
            Eigen::MatrixXd A = Eigen::MatrixXd::Zero(f + 1, f + 1);
            Eigen::VectorXd rhs(f + 1);
            const Eigen::VectorXd qa = Q * a;
            for (Eigen::Index r = 0; r < f; ++r) {
                for (Eigen::Index s = 0; s < f; ++s) {
                    A(r, s) = Q(free[static_cast<std::size_t>(r)], free[static_cast<std::size_t>(s)]);
                }
                A(r, f) = y(free[static_cast<std::size_t>(r)]);
                A(f, r) = y(free[static_cast<std::size_t>(r)]);
                rhs(r) = 1.0 - qa(free[static_cast<std::size_t>(r)]);
            }
            rhs(f) = -y.dot(a);
            const Eigen::VectorXd sol = A.completeOrthogonalDecomposition().solve(rhs);
            if ((A * sol - rhs).norm() > 1e-8) {
                continue;
            }
            for (Eigen::Index r = 0; r < f; ++r) {
                a(free[static_cast<std::size_t>(r)]) = sol(r);
            }
        }
        if (std::abs(y.dot(a)) > 1e-9) {
            continue;
        }
        if ((a.array() < -1e-12).any() || (a.array() > C + 1e-12).any()) {
            continue;
        }
        const double w = objective(a);
        if (w > best.objective) {
            best.objective = w;
            best.alpha = a;
        }
    }
    return best;
}

std::vector<double> fd_gradient(const vqc::VqcModel &model, const Eigen::MatrixXd &x,
                                std::span<const std::size_t> labels, double step) {
    std::vector<double> g(model.theta.size());
    for (std::size_t j = 0; j < g.size(); ++j) {
        vqc::VqcModel plus = model, minus = model;
        plus.theta[j] += step;
        minus.theta[j] -= step;
        g[j] = (vqc::loss(plus, x, labels) - vqc::loss(minus, x, labels)) / (2.0 * step);
    }
    return g;
}

} // namespace qppm::testing
