#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include <json.hpp>

#include "aeromon/features.hpp"

namespace aeromon {

// Linear two-class model over (dist, ewma). Features are min-max scaled to
// [0,1] with the train-set extremes stored in the model.
struct LinearModel {
    std::array<double, 2> w{0.0, 0.0};
    double b = 0.0;
    double c = 1.0;
    std::array<std::pair<double, double>, 2> scale{{{0.0, 1.0}, {0.0, 1.0}}};

    std::array<double, 2> apply_scale(const FeaturePoint& p) const {
        std::array<double, 2> x{p.dist, p.ewma};
        for (int d = 0; d < 2; ++d) {
            const double span = scale[d].second - scale[d].first;
            x[d] = span > 0.0 ? (x[d] - scale[d].first) / span : 0.0;
        }
        return x;
    }
};

struct SolverTrace {
    std::vector<double> objective;  // dual objective per working-set step, non-increasing
    int iterations = 0;
    double duality_gap = 0.0;
};

struct Prediction {
    int label = 0;       // {0 off, 1 on}
    double margin = 0.0; // signed distance surrogate w.x + b
};

inline Prediction svm_predict(const LinearModel& m, const FeaturePoint& p) {
    const auto x = m.apply_scale(p);
    const double margin = m.w[0] * x[0] + m.w[1] * x[1] + m.b;
    return Prediction{margin > 0.0 ? 1 : 0, margin};
}

namespace detail {

// SMO on the L1-SVM dual with maximal-violating-pair selection. Labels in
// {-1,+1}, linear kernel over pre-scaled 2-D inputs. Deterministic.
struct SmoProblem {
    const std::vector<std::array<double, 2>>& x;
    const std::vector<double>& y;
    double c;

    double kernel(std::size_t i, std::size_t j) const {
        return x[i][0] * x[j][0] + x[i][1] * x[j][1];
    }
};

}  // namespace detail

// Soft-margin linear SVM, objective 0.5|w|^2 + c * sum hinge. The `seed`
// parameter is part of the training surface but unused: the solver is
// deterministic.
inline LinearModel svm_train(const std::vector<FeaturePoint>& points, double c = 1.0,
                             std::uint64_t seed = 42, SolverTrace* trace = nullptr) {
    (void)seed;
    const std::size_t n = points.size();
    std::size_t pos = 0, neg = 0;
    for (const auto& p : points) {
        if (p.label == 1) ++pos;
        else if (p.label == 0) ++neg;
        else throw std::invalid_argument("svm_train needs labeled points");
    }
    if (pos == 0 || neg == 0) throw std::invalid_argument("svm_train needs both classes");
    if (c <= 0.0) throw std::invalid_argument("c must be positive");

    LinearModel model;
    model.c = c;
    model.scale = {{{points[0].dist, points[0].dist}, {points[0].ewma, points[0].ewma}}};
    for (const auto& p : points) {
        model.scale[0].first = std::min(model.scale[0].first, p.dist);
        model.scale[0].second = std::max(model.scale[0].second, p.dist);
        model.scale[1].first = std::min(model.scale[1].first, p.ewma);
        model.scale[1].second = std::max(model.scale[1].second, p.ewma);
    }

    std::vector<std::array<double, 2>> x(n);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = model.apply_scale(points[i]);
        y[i] = points[i].label == 1 ? 1.0 : -1.0;
    }
    detail::SmoProblem prob{x, y, c};

    std::vector<double> alpha(n, 0.0);
    std::vector<double> grad(n, -1.0);  // G_i = d/d alpha_i of 0.5 a'Qa - e'a
    const double eps = 1e-6;
    const int max_iter = 100000;
    int iter = 0;
    double m_up = 0.0, m_low = 0.0;

    auto dual_objective = [&]() {
        // 0.5 a'Qa - e'a via G: 0.5 * sum a_i (G_i - 1) ... G = Qa - e
        double obj = 0.0;
        for (std::size_t i = 0; i < n; ++i) obj += alpha[i] * (grad[i] - 1.0);
        return 0.5 * obj;
    };

    for (; iter < max_iter; ++iter) {
        // maximal violating pair
        std::size_t i_up = n, i_low = n;
        m_up = -std::numeric_limits<double>::infinity();
        m_low = std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t < n; ++t) {
            const bool in_up = (y[t] > 0 && alpha[t] < c) || (y[t] < 0 && alpha[t] > 0);
            const bool in_low = (y[t] < 0 && alpha[t] < c) || (y[t] > 0 && alpha[t] > 0);
            const double v = -y[t] * grad[t];
            if (in_up && v > m_up) { m_up = v; i_up = t; }
            if (in_low && v < m_low) { m_low = v; i_low = t; }
        }
        if (i_up == n || i_low == n || m_up - m_low <= eps) break;

        const std::size_t i = i_up, j = i_low;
        const double qii = prob.kernel(i, i), qjj = prob.kernel(j, j), qij = prob.kernel(i, j);
        double quad = qii + qjj - 2.0 * qij;  // curvature along the feasible direction
        if (quad <= 1e-12) quad = 1e-12;
        const double delta = (m_up - m_low) / quad;

        // Step along the constraint y.a = const, clipped to the box.
        const double old_ai = alpha[i], old_aj = alpha[j];
        double step = delta;
        if (y[i] > 0) step = std::min(step, c - old_ai);
        else step = std::min(step, old_ai);
        if (y[j] > 0) step = std::min(step, old_aj);
        else step = std::min(step, c - old_aj);
        alpha[i] += y[i] * step;
        alpha[j] -= y[j] * step;

        const double dai = alpha[i] - old_ai, daj = alpha[j] - old_aj;
        for (std::size_t t = 0; t < n; ++t)
            grad[t] += y[t] * (y[i] * prob.kernel(t, i) * dai + y[j] * prob.kernel(t, j) * daj);

        if (trace) trace->objective.push_back(dual_objective());
    }
    if (iter >= max_iter)
        throw ConvergenceError("svm_train failed to converge", dual_objective());

    model.w = {0.0, 0.0};
    for (std::size_t i = 0; i < n; ++i) {
        model.w[0] += alpha[i] * y[i] * x[i][0];
        model.w[1] += alpha[i] * y[i] * x[i][1];
    }
    model.b = (m_up + m_low) / 2.0;  // -y_t G_t equals b for free support vectors

    // The dual is solved to eps; anything at accumulated-roundoff scale is an
    // exact zero (a fully contradictory dataset must predict uniformly, not by
    // rounding dust).
    for (double& v : model.w)
        if (std::abs(v) < 1e-12) v = 0.0;
    if (std::abs(model.b) < 1e-12) model.b = 0.0;

    if (trace) {
        trace->iterations = iter;
        double hinge = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double f = model.w[0] * x[i][0] + model.w[1] * x[i][1] + model.b;
            hinge += std::max(0.0, 1.0 - y[i] * f);
        }
        const double primal = 0.5 * (model.w[0] * model.w[0] + model.w[1] * model.w[1]) + c * hinge;
        trace->duality_gap = primal + dual_objective();
    }
    return model;
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

struct EvalReport {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    long long tp = 0, fp = 0, fn = 0, tn = 0;
    double fold_mean = 0.0;
    double fold_std = 0.0;

    double accuracy() const {
        const long long total = tp + fp + fn + tn;
        return total ? static_cast<double>(tp + tn) / static_cast<double>(total) : 0.0;
    }
};

// precision/recall/f1 with the 0/0 -> 0 convention.
inline EvalReport evaluate(const std::vector<int>& predictions, const std::vector<int>& truth) {
    if (predictions.size() != truth.size())
        throw std::invalid_argument("prediction/truth length mismatch");
    EvalReport r;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const bool p = predictions[i] == 1;
        const bool t = truth[i] == 1;
        if (p && t) ++r.tp;
        else if (p && !t) ++r.fp;
        else if (!p && t) ++r.fn;
        else ++r.tn;
    }
    r.precision = (r.tp + r.fp) ? static_cast<double>(r.tp) / (r.tp + r.fp) : 0.0;
    r.recall = (r.tp + r.fn) ? static_cast<double>(r.tp) / (r.tp + r.fn) : 0.0;
    r.f1 = (r.precision + r.recall) > 0.0
               ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
               : 0.0;
    return r;
}

// Stratified 5-fold cross validation; fold accuracy mean/std plus the summed
// confusion across folds.
inline EvalReport cross_validate(const std::vector<FeaturePoint>& points, int folds = 5,
                                 std::uint64_t seed = 42) {
    if (folds < 2) throw std::invalid_argument("folds must be >= 2");
    std::array<std::vector<std::size_t>, 2> byclass;
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (points[i].label != 0 && points[i].label != 1)
            throw std::invalid_argument("cross_validate needs labeled points");
        byclass[points[i].label].push_back(i);
    }
    if (byclass[0].size() < static_cast<std::size_t>(folds) ||
        byclass[1].size() < static_cast<std::size_t>(folds))
        throw std::invalid_argument("need at least `folds` points per class");

    Rng rng(mix_seed(seed, 0xCF));
    for (auto& idx : byclass)
        for (std::size_t i = idx.size(); i > 1; --i)
            std::swap(idx[i - 1], idx[rng.uniform_int(i)]);

    std::vector<int> fold_of(points.size(), 0);
    for (const auto& idx : byclass)
        for (std::size_t i = 0; i < idx.size(); ++i)
            fold_of[idx[i]] = static_cast<int>(i % folds);

    EvalReport agg;
    std::vector<double> accuracy;
    for (int f = 0; f < folds; ++f) {
        std::vector<FeaturePoint> train;
        std::vector<FeaturePoint> test;
        for (std::size_t i = 0; i < points.size(); ++i)
            (fold_of[i] == f ? test : train).push_back(points[i]);
        const LinearModel m = svm_train(train, 1.0, seed);
        std::vector<int> pred, truth;
        for (const auto& p : test) {
            pred.push_back(svm_predict(m, p).label);
            truth.push_back(p.label);
        }
        const EvalReport r = evaluate(pred, truth);
        agg.tp += r.tp; agg.fp += r.fp; agg.fn += r.fn; agg.tn += r.tn;
        accuracy.push_back(r.accuracy());
    }
    double mean = 0.0;
    for (double a : accuracy) mean += a;
    mean /= accuracy.size();
    double var = 0.0;
    for (double a : accuracy) var += (a - mean) * (a - mean);
    var /= accuracy.size();

    agg.precision = (agg.tp + agg.fp) ? static_cast<double>(agg.tp) / (agg.tp + agg.fp) : 0.0;
    agg.recall = (agg.tp + agg.fn) ? static_cast<double>(agg.tp) / (agg.tp + agg.fn) : 0.0;
    agg.f1 = (agg.precision + agg.recall) > 0.0
                 ? 2.0 * agg.precision * agg.recall / (agg.precision + agg.recall)
                 : 0.0;
    agg.fold_mean = mean;
    agg.fold_std = std::sqrt(var);
    return agg;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

inline nlohmann::ordered_json linear_model_to_json(const LinearModel& m) {
    return nlohmann::ordered_json{
        {"w", {m.w[0], m.w[1]}},
        {"b", m.b},
        {"scale", {{m.scale[0].first, m.scale[0].second}, {m.scale[1].first, m.scale[1].second}}},
        {"c", m.c},
        {"version", 1}};
}

inline LinearModel linear_model_from_json(const nlohmann::json& j) {
    LinearModel m;
    try {
        m.w = {j.at("w").at(0).get<double>(), j.at("w").at(1).get<double>()};
        m.b = j.at("b").get<double>();
        m.c = j.at("c").get<double>();
        const auto& s = j.at("scale");
        m.scale[0] = {s.at(0).at(0).get<double>(), s.at(0).at(1).get<double>()};
        m.scale[1] = {s.at(1).at(0).get<double>(), s.at(1).at(1).get<double>()};
    } catch (const nlohmann::json::exception& e) {
        throw SpecError("svm", e.what());
    }
    return m;
}

}  // namespace aeromon
