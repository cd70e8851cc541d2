#include "hawkes/learn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "hawkes/rng.hpp"

namespace hawkes {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kMaxHalvings = 40;

// x log x convention: 0 * log 0 = 0, p * log 0 = -inf for p > 0.
double weighted_log(double weight, double x) {
    if (weight == 0.0) {
        return 0.0;
    }
    return x > 0.0 ? weight * std::log(x) : -kInf;
}

double l1_norm(const ModelParams& p) {
    double s = 0.0;
    for (double a : p.coefficients()) {
        s += std::abs(a);
    }
    return s;
}

double group_norm_sum(const ModelParams& p) {
    double s = 0.0;
    for (int u = 0; u < p.num_types(); ++u) {
        for (int v = 0; v < p.num_types(); ++v) {
            s += p.group_norm(u, v);
        }
    }
    return s;
}

bool pairwise_active(const LearnConfig& cfg) {
    return cfg.alpha_p > 0.0 && cfg.clusters.has_value();
}

double gated_weight(const LearnConfig& cfg, int u, int v) {
    return pairwise_active(cfg) && cfg.clusters->are_peers(u, v) ? cfg.alpha_p : 0.0;
}

// Sum over cluster peers of the frozen coefficients entering the pairwise term
// of a(u, v, m), together with the peer count.
std::pair<double, double> peer_sum(const ModelParams& ref, const ClusterStructure& cl, int u, int v, std::size_t m) {
    double s = 0.0;
    for (int w : cl.peers(u)) {
        s += ref.a(w, v, m);
    }
    for (int w : cl.peers(v)) {
        s += ref.a(u, w, m);
    }
    return {s, static_cast<double>(cl.peers(u).size() + cl.peers(v).size())};
}

}  // namespace

std::string to_string(Method m) {
    switch (m) {
        case Method::mle: return "MLE";
        case Method::mle_s: return "MLE-S";
        case Method::mle_gl: return "MLE-GL";
        case Method::mle_sgl: return "MLE-SGL";
        case Method::mle_sglp: return "MLE-SGLP";
    }
    return "MLE";
}

Method method_from_string(const std::string& s) {
    for (Method m : {Method::mle, Method::mle_s, Method::mle_gl, Method::mle_sgl, Method::mle_sglp}) {
        if (s == to_string(m)) {
            return m;
        }
    }
    throw std::invalid_argument("unknown method '" + s + "'");
}

void LearnConfig::validate(int num_types) const {
    for (double w : {alpha_s, alpha_g, alpha_p}) {
        if (!(w >= 0.0) || !std::isfinite(w)) {
            throw std::invalid_argument("regularization weights must be finite and nonnegative");
        }
    }
    if (!(eta >= 0.0) || !std::isfinite(eta)) {
        throw std::invalid_argument("eta must be positive (or 0 for the default)");
    }
    if (inner_max < 1 || outer_max < 1) {
        throw std::invalid_argument("iteration caps must be at least 1");
    }
    if (!(inner_tol >= 0.0) || !(outer_tol >= 0.0)) {
        throw std::invalid_argument("tolerances must be nonnegative");
    }
    if (alpha_p > 0.0 && !clusters) {
        throw std::invalid_argument("alpha_p > 0 needs a cluster structure");
    }
    if (clusters && clusters->num_types() != num_types) {
        throw std::invalid_argument("cluster structure covers a different number of types");
    }
}

LearnConfig LearnConfig::for_method(Method m, double alpha_s, double alpha_g, double alpha_p,
                                    std::optional<ClusterStructure> clusters) {
    LearnConfig cfg;
    switch (m) {
        case Method::mle: break;
        case Method::mle_s: cfg.alpha_s = alpha_s; break;
        case Method::mle_gl: cfg.alpha_g = alpha_g; break;
        case Method::mle_sgl:
            cfg.alpha_s = alpha_s;
            cfg.alpha_g = alpha_g;
            break;
        case Method::mle_sglp:
            cfg.alpha_s = alpha_s;
            cfg.alpha_g = alpha_g;
            cfg.alpha_p = alpha_p;
            cfg.clusters = std::move(clusters);
            break;
    }
    return cfg;
}

double Responsibilities::normalization_residual() const {
    double worst = 0.0;
    for (std::size_t c = 0; c < baseline.size(); ++c) {
        for (std::size_t i = 0; i < baseline[c].size(); ++i) {
            double s = baseline[c][i];
            for (double p : excitation[c][i]) {
                s += p;
            }
            worst = std::max(worst, std::abs(s - 1.0));
        }
    }
    return worst;
}

Responsibilities e_step(const ModelParams& params, const BasisConfig& basis, const Dataset& data) {
    check_dimensions(params, basis, data);
    const std::size_t M = basis.size();
    Responsibilities r;
    r.num_bases = M;
    r.baseline.resize(data.size());
    r.excitation.resize(data.size());
    bool failed = false;
    const auto C = static_cast<std::ptrdiff_t>(data.size());
#pragma omp parallel for schedule(dynamic) reduction(|| : failed)
    for (std::ptrdiff_t cc = 0; cc < C; ++cc) {
        const auto c = static_cast<std::size_t>(cc);
        const auto& ev = data[c].events();
        r.baseline[c].assign(ev.size(), 0.0);
        r.excitation[c].resize(ev.size());
        for (std::size_t i = 0; i < ev.size(); ++i) {
            const int u = ev[i].type;
            auto& row = r.excitation[c][i];
            row.assign(i * M, 0.0);
            double lambda = params.mu(u);
            for (std::size_t j = 0; j < i; ++j) {
                for (std::size_t m = 0; m < M; ++m) {
                    const double x = params.a(u, ev[j].type, m) * kernel(basis, m, ev[i].time - ev[j].time);
                    row[j * M + m] = x;
                    lambda += x;
                }
            }
            if (!(lambda > 0.0)) {
                failed = true;
                continue;
            }
            r.baseline[c][i] = params.mu(u) / lambda;
            for (double& x : row) {
                x /= lambda;
            }
        }
    }
    if (failed) {
        throw std::domain_error("an observed event has zero intensity");
    }
    return r;
}

std::vector<double> update_mu(const Responsibilities& resp, const Dataset& data) {
    std::vector<double> mu(static_cast<std::size_t>(data.num_types()), 0.0);
    for (std::size_t c = 0; c < data.size(); ++c) {
        for (std::size_t i = 0; i < data[c].size(); ++i) {
            mu[static_cast<std::size_t>(data[c][i].type)] += resp.baseline[c][i];
        }
    }
    const double total = data.total_time();
    for (double& m : mu) {
        m /= total;
    }
    return mu;
}

std::vector<double> attributed_mass(const Responsibilities& resp, const Dataset& data) {
    const auto U = static_cast<std::size_t>(data.num_types());
    const std::size_t M = resp.num_bases;
    std::vector<double> mass(U * U * M, 0.0);
    for (std::size_t c = 0; c < data.size(); ++c) {
        const auto& ev = data[c].events();
        for (std::size_t i = 0; i < ev.size(); ++i) {
            const auto u = static_cast<std::size_t>(ev[i].type);
            for (std::size_t j = 0; j < i; ++j) {
                const auto v = static_cast<std::size_t>(ev[j].type);
                for (std::size_t m = 0; m < M; ++m) {
                    mass[(u * U + v) * M + m] += resp.excitation[c][i][j * M + m];
                }
            }
        }
    }
    return mass;
}

std::vector<double> compensator_mass(const Dataset& data, const BasisConfig& basis) {
    const std::size_t M = basis.size();
    std::vector<double> h(static_cast<std::size_t>(data.num_types()) * M, 0.0);
    for (const auto& seq : data.sequences()) {
        for (const auto& e : seq.events()) {
            for (std::size_t m = 0; m < M; ++m) {
                h[static_cast<std::size_t>(e.type) * M + m] += kernel_cumulative(basis, m, seq.horizon() - e.time);
            }
        }
    }
    return h;
}

double stationary_root(const Quadratic& q) {
    if (q.a > 0.0) {
        const double disc = std::max(q.b * q.b - 4.0 * q.a * q.c, 0.0);
        const double root = std::sqrt(disc);
        if (q.b >= 0.0) {
            const double denom = q.b + root;
            return denom > 0.0 ? -2.0 * q.c / denom : 0.0;
        }
        return (-q.b + root) / (2.0 * q.a);
    }
    if (q.c == 0.0) {
        return 0.0;
    }
    if (!(q.b > 0.0)) {
        throw std::domain_error("coefficient update has no nonnegative stationary point");
    }
    return -q.c / q.b;
}

Quadratic coefficient_quadratic(int u, int v, std::size_t m, double mass, double compensator,
                                const ModelParams& prev, const LearnConfig& cfg) {
    Quadratic q;
    q.b = compensator + cfg.alpha_s;
    q.c = -mass;
    if (cfg.alpha_g > 0.0) {
        q.a += cfg.alpha_g / prev.group_norm(u, v);
    }
    const double w = gated_weight(cfg, u, v);
    if (w > 0.0) {
        const auto [s, n] = peer_sum(prev, *cfg.clusters, u, v, m);
        q.a += 2.0 * n * w;
        q.b -= 2.0 * w * s;
    }
    return q;
}

std::vector<double> update_A(std::span<const double> mass, std::span<const double> compensator,
                             const ModelParams& prev, const LearnConfig& cfg) {
    const int U = prev.num_types();
    const std::size_t M = prev.num_bases();
    if (mass.size() != prev.coefficients().size() || compensator.size() != static_cast<std::size_t>(U) * M) {
        throw std::invalid_argument("update_A: statistics do not match the model dimensions");
    }
    std::vector<double> next(mass.size(), 0.0);
    const int pairs = U * U;
#pragma omp parallel for if (pairs * static_cast<int>(M) > 4096)
    for (int k = 0; k < pairs; ++k) {
        const int u = k / U;
        const int v = k % U;
        if (cfg.alpha_g > 0.0 && prev.group_norm(u, v) == 0.0) {
            continue;
        }
        for (std::size_t m = 0; m < M; ++m) {
            const std::size_t idx = static_cast<std::size_t>(k) * M + m;
            const auto q = coefficient_quadratic(u, v, m, mass[idx], compensator[static_cast<std::size_t>(v) * M + m],
                                                 prev, cfg);
            next[idx] = stationary_root(q);
        }
    }
    return next;
}

std::vector<double> update_A(const Responsibilities& resp, const Dataset& data, const BasisConfig& basis,
                             const ModelParams& prev, const LearnConfig& cfg) {
    const auto mass = attributed_mass(resp, data);
    const auto h = compensator_mass(data, basis);
    return update_A(mass, h, prev, cfg);
}

double soft_threshold(double x, double alpha) {
    const double r = std::abs(x) - alpha;
    return r > 0.0 ? std::copysign(r, x) : 0.0;
}

std::vector<double> prox_group(std::span<const double> candidate, std::span<const double> prev,
                               std::span<const double> grad, const LearnConfig& cfg) {
    if (!(cfg.eta > 0.0)) {
        throw std::invalid_argument("prox_group needs eta > 0");
    }
    if (candidate.size() != prev.size() || candidate.size() != grad.size()) {
        throw std::invalid_argument("prox_group: group sizes differ");
    }
    const double eta = cfg.eta;
    std::vector<double> z(candidate.size());
    double norm2 = 0.0;
    for (std::size_t m = 0; m < z.size(); ++m) {
        z[m] = std::max(soft_threshold(candidate[m] - eta * grad[m], eta * cfg.alpha_s), 0.0);
        norm2 += z[m] * z[m];
    }
    const double norm = std::sqrt(norm2);
    const double cut = eta * cfg.alpha_g;
    if (norm <= cut) {
        std::fill(z.begin(), z.end(), 0.0);
        return z;
    }
    const double scale = 1.0 - cut / norm;
    for (double& x : z) {
        x *= scale;
    }
    return z;
}

double pairwise_penalty(const ModelParams& params, const ModelParams& reference, const ClusterStructure& cl) {
    const int U = params.num_types();
    const std::size_t M = params.num_bases();
    double e = 0.0;
    for (int u = 0; u < U; ++u) {
        for (int v = 0; v < U; ++v) {
            if (!cl.are_peers(u, v)) {
                continue;
            }
            for (std::size_t m = 0; m < M; ++m) {
                const double a = params.a(u, v, m);
                for (int w : cl.peers(u)) {
                    const double d = a - reference.a(w, v, m);
                    e += d * d;
                }
                for (int w : cl.peers(v)) {
                    const double d = a - reference.a(u, w, m);
                    e += d * d;
                }
            }
        }
    }
    return e;
}

double penalized_objective(double log_likelihood, const ModelParams& params, const LearnConfig& cfg) {
    double f = -log_likelihood + cfg.alpha_s * l1_norm(params) + cfg.alpha_g * group_norm_sum(params);
    if (pairwise_active(cfg)) {
        f += cfg.alpha_p * pairwise_penalty(params, params, *cfg.clusters);
    }
    return f;
}

SmoothSurrogate::SmoothSurrogate(const EmMoments& moments, const ModelParams& at, const LearnConfig& cfg)
    : moments_(moments), at_(at), cfg_(cfg) {
    offset_ = -moments_.log_likelihood(at_) - value(at_);
    if (pairwise_active(cfg_)) {
        offset_ += cfg_.alpha_p * pairwise_penalty(at_, at_, *cfg_.clusters);
    }
}

double SmoothSurrogate::penalty_weight(int u, int v) const {
    return gated_weight(cfg_, u, v);
}

double SmoothSurrogate::value(const ModelParams& params) const {
    const int U = params.num_types();
    const std::size_t M = params.num_bases();
    double f = 0.0;
    for (int u = 0; u < U; ++u) {
        f += moments_.total_time * params.mu(u) - weighted_log(moments_.baseline_mass[static_cast<std::size_t>(u)],
                                                               params.mu(u));
        for (int v = 0; v < U; ++v) {
            for (std::size_t m = 0; m < M; ++m) {
                const double a = params.a(u, v, m);
                f += a * moments_.compensator[static_cast<std::size_t>(v) * M + m] -
                     weighted_log(moments_.excitation_mass[moments_.index(u, v, m)], a);
            }
        }
    }
    if (pairwise_active(cfg_)) {
        f += cfg_.alpha_p * pairwise_penalty(params, at_, *cfg_.clusters);
    }
    return f;
}

std::vector<double> SmoothSurrogate::gradient_mu(const ModelParams& params) const {
    std::vector<double> g(static_cast<std::size_t>(params.num_types()));
    for (int u = 0; u < params.num_types(); ++u) {
        const double b = moments_.baseline_mass[static_cast<std::size_t>(u)];
        g[static_cast<std::size_t>(u)] = moments_.total_time - (b == 0.0 ? 0.0 : b / params.mu(u));
    }
    return g;
}

std::vector<double> SmoothSurrogate::gradient_A(const ModelParams& params) const {
    const int U = params.num_types();
    const std::size_t M = params.num_bases();
    std::vector<double> g(params.coefficients().size());
    for (int u = 0; u < U; ++u) {
        for (int v = 0; v < U; ++v) {
            const double w = penalty_weight(u, v);
            for (std::size_t m = 0; m < M; ++m) {
                const std::size_t k = moments_.index(u, v, m);
                const double p = moments_.excitation_mass[k];
                const double a = params.a(u, v, m);
                double d = moments_.compensator[static_cast<std::size_t>(v) * M + m] - (p == 0.0 ? 0.0 : p / a);
                if (w > 0.0) {
                    const auto [s, n] = peer_sum(at_, *cfg_.clusters, u, v, m);
                    d += 2.0 * w * (n * a - s);
                }
                g[k] = d;
            }
        }
    }
    return g;
}

double SmoothSurrogate::objective(const ModelParams& params) const {
    return offset_ + value(params) + cfg_.alpha_s * l1_norm(params) + cfg_.alpha_g * group_norm_sum(params);
}

std::vector<double> smooth_gradient(const EmMoments& mo, const ModelParams& at, const LearnConfig& cfg) {
    const int U = at.num_types();
    const std::size_t M = at.num_bases();
    std::vector<double> g(at.coefficients().size());
    for (int u = 0; u < U; ++u) {
        for (int v = 0; v < U; ++v) {
            const double w = gated_weight(cfg, u, v);
            for (std::size_t m = 0; m < M; ++m) {
                const std::size_t k = mo.index(u, v, m);
                double d = mo.compensator[static_cast<std::size_t>(v) * M + m] - mo.excitation_ratio[k];
                if (w > 0.0) {
                    const auto [s, n] = peer_sum(at, *cfg.clusters, u, v, m);
                    d += 2.0 * w * (n * at.a(u, v, m) - s);
                }
                g[k] = d;
            }
        }
    }
    return g;
}

double default_eta(const Dataset& data) {
    const auto n = data.total_events();
    if (n == 0) {
        throw std::invalid_argument("default step size needs at least one event");
    }
    return 1e-2 * data.total_time() / static_cast<double>(n);
}

ModelParams initial_params(const EventFeatures& features, const BasisConfig& basis, std::uint64_t seed) {
    const int U = features.num_types;
    const std::size_t M = basis.size();
    CounterRng rng(seed, 0x696E6974);  // "init"
    ModelParams p(U, M);
    const double rate = static_cast<double>(features.num_events()) / (U * features.total_time);
    for (int u = 0; u < U; ++u) {
        p.mu(u) = rng.uniform(0.0, rate);
    }
    double mass = 0.0;
    for (std::size_t m = 0; m < M; ++m) {
        mass += kernel_cumulative(basis, m, basis.horizon());
    }
    mass /= static_cast<double>(M);
    const double top = 1.0 / (U * static_cast<double>(M) * mass);
    for (double& a : p.coefficients()) {
        a = rng.uniform(0.0, top);
    }
    return p;
}

FitResult fit(const Dataset& data, const BasisConfig& basis, const LearnConfig& cfg, const FitHooks& hooks) {
    if (data.empty() || data.total_events() == 0) {
        throw std::invalid_argument("fit needs a nonempty dataset");
    }
    return fit(build_features(data, basis), basis, cfg, hooks);
}

FitResult fit(const EventFeatures& features, const BasisConfig& basis, const LearnConfig& cfg, const FitHooks& hooks) {
    return fit_from(features, basis, cfg, initial_params(features, basis, cfg.seed), hooks);
}

FitResult fit_from(const EventFeatures& features, const BasisConfig& basis, const LearnConfig& cfg_in,
                   ModelParams params, const FitHooks& hooks) {
    cfg_in.validate(features.num_types);
    if (features.num_events() == 0) {
        throw std::invalid_argument("fit needs a nonempty dataset");
    }
    if (params.num_types() != features.num_types || params.num_bases() != basis.size() ||
        basis.size() != features.num_bases) {
        throw std::invalid_argument("fit: start point, basis and features disagree on dimensions");
    }
    LearnConfig cfg = cfg_in;
    if (cfg.eta == 0.0) {
        cfg.eta = 1e-2 * features.total_time / static_cast<double>(features.num_events());
    }
    const bool shrink = cfg.alpha_s > 0.0 || cfg.alpha_g > 0.0;
    const int U = features.num_types;

    FitReport rep;
    rep.eta = cfg.eta;

    auto moments_at = [&](const ModelParams& p) {
        if (hooks.on_e_step) {
            hooks.on_e_step(p);
        }
        EmMoments mo = em_moments(features, p);
        if (!mo.feasible) {
            throw std::domain_error("an observed event has zero intensity");
        }
        const double ll = mo.log_likelihood(p);
        rep.loglik_trace.push_back(ll);
        rep.objective_trace.push_back(penalized_objective(ll, p, cfg));
        return mo;
    };

    for (int outer = 0; outer < cfg.outer_max; ++outer) {
        const ModelParams outer_start = params;
        int inner = 0;
        while (inner < cfg.inner_max) {
            ++inner;
            const EmMoments mo = moments_at(params);
            ModelParams next = params;
            for (int u = 0; u < U; ++u) {
                next.mu(u) = mo.baseline_mass[static_cast<std::size_t>(u)] / mo.total_time;
            }
            next.coefficients() = update_A(mo.excitation_mass, mo.compensator, params, cfg);
            const SmoothSurrogate f(mo, params, cfg);
            rep.surrogate_before.push_back(f.objective(params));
            rep.surrogate_after.push_back(f.objective(next));
            const double change = relative_change(next, params);
            params = std::move(next);
            if (change < cfg.inner_tol) {
                break;
            }
        }
        rep.inner_iterations.push_back(inner);
        rep.outer_iterations = outer + 1;

        if (shrink) {
            const EmMoments mo = moments_at(params);
            const auto grad = smooth_gradient(mo, params, cfg);
            const ModelParams at = params;
            const std::size_t M = params.num_bases();
            auto frozen_objective = [&](const ModelParams& p, double ll) {
                double f = -ll + cfg.alpha_s * l1_norm(p) + cfg.alpha_g * group_norm_sum(p);
                if (pairwise_active(cfg)) {
                    f += cfg.alpha_p * pairwise_penalty(p, at, *cfg.clusters);
                }
                return f;
            };
            const double start = frozen_objective(at, mo.log_likelihood(at));
            LearnConfig step = cfg;
            bool accepted = false;
            for (int halving = 0; halving <= kMaxHalvings && !accepted; ++halving) {
                ModelParams trial = at;
                for (int u = 0; u < U; ++u) {
                    for (int v = 0; v < U; ++v) {
                        if (at.group_norm(u, v) == 0.0) {
                            continue;
                        }
                        const std::size_t off = (static_cast<std::size_t>(u) * U + static_cast<std::size_t>(v)) * M;
                        const auto z = prox_group(at.group(u, v), at.group(u, v),
                                                  std::span<const double>(grad).subspan(off, M), step);
                        std::copy(z.begin(), z.end(), trial.group(u, v).begin());
                    }
                }
                const EmMoments tm = em_moments(features, trial);
                if (tm.feasible && frozen_objective(trial, tm.log_likelihood(trial)) <= start) {
                    params = std::move(trial);
                    accepted = true;
                } else {
                    step.eta *= 0.5;
                }
            }
            rep.prox_steps.push_back(accepted ? step.eta : 0.0);
        }
        if (relative_change(params, outer_start) < cfg.outer_tol) {
            rep.converged = true;
            break;
        }
    }

    const EmMoments last = em_moments(features, params);
    rep.final_loglik = last.log_likelihood(params);
    rep.final_objective = penalized_objective(rep.final_loglik, params, cfg);
    for (int u = 0; u < U; ++u) {
        for (int v = 0; v < U; ++v) {
            rep.zero_groups += params.group_norm(u, v) == 0.0 ? 1 : 0;
        }
    }
    return {std::move(params), std::move(rep)};
}

}  // namespace hawkes
