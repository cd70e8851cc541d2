#include "hawkes/eval.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace hawkes {

namespace {

EdgeScores scores(std::size_t tp, std::size_t fp, std::size_t fn) {
    EdgeScores s;
    s.precision = tp + fp == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
    s.recall = tp + fn == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
    const double d = s.precision + s.recall;
    s.f1 = d > 0.0 ? 2.0 * s.precision * s.recall / d : 0.0;
    return s;
}

}  // namespace

double loglike_test(const ModelParams& params, const BasisConfig& basis, const Dataset& test) {
    return log_likelihood(params, basis, test);
}

double relative_error_mu(const std::vector<double>& est, const std::vector<double>& truth) {
    if (est.size() != truth.size()) {
        throw std::invalid_argument("relative_error_mu: length mismatch");
    }
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        num += (est[i] - truth[i]) * (est[i] - truth[i]);
        den += truth[i] * truth[i];
    }
    if (den == 0.0) {
        throw std::invalid_argument("relative_error_mu: truth vector is zero");
    }
    return std::sqrt(num / den);
}

PhiError relative_error_phi(const KernelFn& est, const KernelFn& truth, int num_types, double horizon,
                            double grid_step) {
    if (!(grid_step > 0.0) || !(horizon > 0.0)) {
        throw std::invalid_argument("relative_error_phi needs positive horizon and grid step");
    }
    const auto n = static_cast<std::size_t>(std::ceil(horizon / grid_step - 1e-9));
    const double h = horizon / static_cast<double>(n);
    const int U = num_types;
    PhiError out;
    out.per_pair.assign(static_cast<std::size_t>(U * U), std::numeric_limits<double>::quiet_NaN());
    out.per_pair_mass.assign(static_cast<std::size_t>(U * U), 0.0);

#pragma omp parallel for schedule(dynamic)
    for (int k = 0; k < U * U; ++k) {
        const int u = k / U;
        const int v = k % U;
        double diff = 0.0;
        double mass = 0.0;
        double est_mass = 0.0;
        for (std::size_t i = 0; i <= n; ++i) {
            const double t = h * static_cast<double>(i);
            const double w = (i == 0 || i == n) ? 0.5 : 1.0;
            const double a = est(u, v, t);
            const double b = truth(u, v, t);
            diff += w * std::abs(a - b);
            mass += w * b;
            est_mass += w * a;
        }
        if (mass > 0.0) {
            out.per_pair[static_cast<std::size_t>(k)] = diff / mass;
        } else {
            out.per_pair_mass[static_cast<std::size_t>(k)] = est_mass * h;
        }
    }
    double sum = 0.0;
    for (double e : out.per_pair) {
        if (std::isnan(e)) {
            ++out.zero_mass_pairs;
        } else {
            sum += e;
            ++out.pairs_used;
        }
    }
    out.mean = out.pairs_used > 0 ? sum / static_cast<double>(out.pairs_used) : 0.0;
    return out;
}

PhiError relative_error_phi(const ModelParams& est, const BasisConfig& basis, const GroundTruth& truth,
                            double horizon, double grid_step) {
    if (est.num_types() != truth.num_types()) {
        throw std::invalid_argument("relative_error_phi: model and truth differ in U");
    }
    if (grid_step <= 0.0) {
        grid_step = horizon / 2000.0;
    }
    return relative_error_phi([&](int u, int v, double t) { return impact_function(est, basis, u, v, t); },
                              [&](int u, int v, double t) { return truth.kernel(u, v, t); }, est.num_types(),
                              horizon, grid_step);
}

GraphScores score_graph(const GrangerGraph& est, const GrangerGraph& truth) {
    if (est.num_types() != truth.num_types()) {
        throw std::invalid_argument("score_graph: graphs differ in U");
    }
    GraphScores g;
    const int U = truth.num_types();
    for (int u = 0; u < U; ++u) {
        for (int v = 0; v < U; ++v) {
            const bool e = est.edge(u, v);
            const bool t = truth.edge(u, v);
            if (e && t) ++g.true_present;
            if (e && !t) ++g.false_present;
            if (!e && !t) ++g.true_absent;
            if (!e && t) ++g.false_absent;
        }
    }
    g.present = scores(g.true_present, g.false_present, g.false_absent);
    g.absent = scores(g.true_absent, g.false_absent, g.false_present);
    g.absent_total = g.true_absent + g.false_present;
    g.absent_recovered = g.true_absent;
    return g;
}

std::vector<ThresholdPoint> threshold_sweep(const ModelParams& params, const GrangerGraph& truth,
                                            const std::vector<double>& tolerances) {
    std::vector<ThresholdPoint> out;
    out.reserve(tolerances.size());
    for (double tol : tolerances) {
        out.push_back({tol, score_graph(extract_graph(params, tol), truth)});
    }
    return out;
}

EvalReport evaluate(const ModelParams& params, const BasisConfig& basis, const GroundTruth& truth,
                    const Dataset& test, double graph_tolerance) {
    EvalReport r;
    r.loglike_test = loglike_test(params, basis, test);
    r.e_mu = relative_error_mu(params.mu_vector(), truth.mu());
    r.e_phi = relative_error_phi(params, basis, truth, basis.horizon());
    r.graph = score_graph(extract_graph(params, graph_tolerance), truth.graph());
    return r;
}

}  // namespace hawkes
