// Acceptance suite. Prints one PASS/FAIL line per criterion and exits nonzero
// when any selected criterion fails. With an argument N only criterion N runs.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hawkes/basis.hpp"
#include "hawkes/core.hpp"
#include "hawkes/experiment.hpp"
#include "hawkes/kernels.hpp"
#include "hawkes/learn.hpp"
#include "hawkes/simulate.hpp"
#include "hawkes/stats.hpp"
#include "oracle.hpp"

using namespace hawkes;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Dataset sine_data(int U, std::size_t C, double T, std::uint64_t seed) {
    const auto gt = GroundTruth::sine(std::vector<double>(static_cast<std::size_t>(U), 0.2), benchmark_pairs(U),
                                      KernelFamily::sine_like);
    return sample_dataset(gt, C, T, seed);
}

ModelParams random_feasible(int U, std::size_t M, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 0.1);
    ModelParams p(U, M);
    for (int u = 0; u < U; ++u) p.mu(u) = 0.1 + unit(rng);
    for (auto& a : p.coefficients()) a = unit(rng) < 0.02 ? 0.0 : unit(rng);
    return p;
}

// EM run shared by criteria 2 and 3: U = 2, all weights zero, 100 iterations.
struct EmRun {
    Dataset data;
    BasisConfig basis;
    FitResult result;
    double worst_residual = 0.0;
    std::size_t e_steps = 0;
};

const EmRun& em_run() {
    static const EmRun run = [] {
        EmRun r{sine_data(2, 20, 50.0, 11), BasisConfig::uniform(8, 1.0, 50.0), {}, 0.0, 0};
        LearnConfig cfg;
        cfg.inner_max = 100;
        cfg.outer_max = 1;
        cfg.inner_tol = 0.0;
        FitHooks hooks;
        hooks.on_e_step = [&](const ModelParams& p) {
            r.worst_residual = std::max(r.worst_residual, e_step(p, r.basis, r.data).normalization_residual());
            ++r.e_steps;
        };
        r.result = fit(r.data, r.basis, cfg, hooks);
        return r;
    }();
    return run;
}

Outcome likelihood_oracle() {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(101);
    double worst = 0.0;
    for (int i = 0; i < 50; ++i) {
        const auto inst = oracle::random_instance(rng, 10, 3, 4);
        const double want = oracle::loglik(inst.params, inst.basis, inst.data, 1e-10);
        const double got = log_likelihood(inst.params, inst.basis, inst.data);
        worst = std::max(worst, std::abs(got - want) / std::max(std::abs(want), 1e-300));
    }
    const double secs = seconds_since(t0);
    return {worst <= 1e-8 && secs < 10.0, fmt("max rel err %.3g (<= 1e-8), %.2f s (< 10 s)", worst, secs)};
}

Outcome em_monotonicity() {
    const auto& run = em_run();
    const auto& tr = run.result.report.loglik_trace;
    double worst_dip = 0.0;
    for (std::size_t k = 1; k < tr.size(); ++k) {
        worst_dip = std::max(worst_dip, (tr[k - 1] - tr[k]) / std::abs(tr[k - 1]));
    }
    const bool em_ok = tr.size() == 100 && worst_dip <= 1e-9;

    LearnConfig cfg;
    cfg.alpha_s = 10.0;
    cfg.alpha_g = 100.0;
    cfg.alpha_p = 1000.0;
    cfg.clusters = ClusterStructure({{0, 1, 2}, {3, 4}}, 5);
    cfg.outer_max = 5;
    const auto data = sine_data(5, 30, 50.0, 12);
    const auto res = fit(data, BasisConfig::uniform(10, 0.8, 50.0), cfg);
    const auto& before = res.report.surrogate_before;
    const auto& after = res.report.surrogate_after;
    double worst_rise = 0.0;
    for (std::size_t k = 0; k < before.size(); ++k) {
        worst_rise = std::max(worst_rise, (after[k] - before[k]) / std::abs(before[k]));
    }
    const bool surrogate_ok = !before.empty() && worst_rise <= 1e-9;
    return {em_ok && surrogate_ok,
            fmt("%zu EM iterations, max rel dip %.3g (<= 1e-9); %zu inner steps, max rel surrogate rise %.3g (<= 1e-9)",
                tr.size(), std::max(worst_dip, 0.0), before.size(), std::max(worst_rise, 0.0))};
}

Outcome responsibility_normalization() {
    const auto& run = em_run();
    return {run.e_steps >= 100 && run.worst_residual <= 1e-10,
            fmt("%zu E-steps, max |sum - 1| %.3g (<= 1e-10)", run.e_steps, run.worst_residual)};
}

Outcome gradient_check() {
    std::mt19937_64 rng(104);
    const int U = 3;
    const std::size_t M = 4;
    const auto data = sine_data(U, 10, 30.0, 4);
    const auto basis = BasisConfig::uniform(M, 1.0, 30.0);
    const auto feat = build_features(data, basis);
    LearnConfig cfg;
    cfg.alpha_p = 5.0;
    cfg.clusters = ClusterStructure({{0, 1}, {2}}, U);
    double worst = 0.0;
    for (int rep = 0; rep < 20; ++rep) {
        const auto at = random_feasible(U, M, rng);
        const auto g = smooth_gradient(em_moments(feat, at), at, cfg);
        auto f = [&](const ModelParams& p) {
            return -log_likelihood(feat, p) + cfg.alpha_p * pairwise_penalty(p, at, *cfg.clusters);
        };
        double num = 0.0, den = 0.0;
        for (std::size_t k = 0; k < g.size(); ++k) {
            ModelParams hi = at, lo = at;
            const double h = 1e-6;
            hi.coefficients()[k] += h;
            lo.coefficients()[k] -= h;
            const double fd = (f(hi) - f(lo)) / (2.0 * h);
            num += (fd - g[k]) * (fd - g[k]);
            den += fd * fd;
        }
        worst = std::max(worst, std::sqrt(num / den));
    }
    return {worst <= 1e-4, fmt("20 points, max rel err %.3g (<= 1e-4)", worst)};
}

Outcome prox_oracle() {
    std::mt19937_64 rng(105);
    std::uniform_real_distribution<double> val(-1.0, 2.0), w(0.0, 1.5), e(0.1, 1.0);
    double worst = 0.0;
    for (int rep = 0; rep < 100; ++rep) {
        std::vector<double> cand(5), grad(5), y(5);
        for (auto& x : cand) x = std::abs(val(rng));
        for (auto& x : grad) x = val(rng);
        LearnConfig cfg;
        cfg.eta = e(rng);
        cfg.alpha_s = w(rng);
        cfg.alpha_g = w(rng);
        for (std::size_t m = 0; m < 5; ++m) y[m] = cand[m] - cfg.eta * grad[m];
        const auto want = oracle::prox(y, cfg.eta, cfg.alpha_s, cfg.alpha_g);
        const auto got = prox_group(cand, cand, grad, cfg);
        for (std::size_t m = 0; m < 5; ++m) worst = std::max(worst, std::abs(got[m] - want[m]));
    }

    // zero-group boundary: |S(y)+| <= eta alpha_g, and coordinatewise |y_m| <= eta alpha_s
    std::size_t zero_cases = 0, exact_zeros = 0;
    for (int rep = 0; rep < 100; ++rep) {
        std::vector<double> cand(5), grad(5, 0.0);
        for (auto& x : cand) x = std::abs(val(rng));
        LearnConfig cfg;
        cfg.eta = e(rng);
        cfg.alpha_s = w(rng);
        double n = 0.0;
        for (double x : cand) n += std::pow(std::max(x - cfg.eta * cfg.alpha_s, 0.0), 2);
        cfg.alpha_g = std::sqrt(n) / cfg.eta * (rep % 2 == 0 ? 1.0 : 1.0 + w(rng));
        while (cfg.eta * cfg.alpha_g < std::sqrt(n)) cfg.alpha_g = std::nextafter(cfg.alpha_g, HUGE_VAL);
        const auto got = prox_group(cand, cand, grad, cfg);
        ++zero_cases;
        bool all = true;
        for (double x : got) all = all && x == 0.0 && !std::signbit(x);
        exact_zeros += all ? 1 : 0;
    }
    std::size_t coord_cases = 0, coord_zeros = 0;
    for (int rep = 0; rep < 100; ++rep) {
        std::vector<double> cand(5), grad(5, 0.0);
        LearnConfig cfg;
        cfg.eta = e(rng);
        cfg.alpha_s = w(rng) + 0.1;
        for (std::size_t m = 0; m < 5; ++m) {
            cand[m] = m % 2 == 0 ? cfg.eta * cfg.alpha_s * (m == 0 ? 1.0 : 0.5) : cfg.eta * cfg.alpha_s + 1.0;
        }
        const auto got = prox_group(cand, cand, grad, cfg);
        for (std::size_t m = 0; m < 5; m += 2) {
            ++coord_cases;
            coord_zeros += got[m] == 0.0 ? 1 : 0;
        }
    }
    const bool ok = worst <= 1e-6 && exact_zeros == zero_cases && coord_zeros == coord_cases;
    return {ok, fmt("100 instances, max abs diff %.3g (<= 1e-6); group zeros %zu/%zu, coordinate zeros %zu/%zu", worst,
                    exact_zeros, zero_cases, coord_zeros, coord_cases)};
}

ExperimentPlan recovery_plan() {
    ExperimentPlan p;
    p.family = KernelFamily::sine_like;
    p.num_types = 5;
    p.pool_size = 500;
    p.test_size = 250;
    p.training_sizes = {50, 100, 150, 200, 250};
    p.num_trials = 10;
    p.horizon = 50.0;
    p.methods = {Method::mle, Method::mle_sglp};
    p.alpha_s = 10.0;
    p.alpha_g = 100.0;
    p.alpha_p = 1000.0;
    p.clusters = {{0, 1, 2}, {3, 4}};
    p.seed = 2024;
    return p;
}

const SummaryRow* find_row(const std::vector<SummaryRow>& s, const std::string& method, std::size_t C) {
    for (const auto& r : s) {
        if (r.method == method && r.train_size == C) return &r;
    }
    return nullptr;
}

Outcome graph_recovery() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto plan = recovery_plan();
    const auto res = run_experiment(plan);
    bool order_ok = true;
    std::ostringstream per_c;
    for (std::size_t C : plan.training_sizes) {
        const auto* mle = find_row(res.summary, "MLE", C);
        const auto* sglp = find_row(res.summary, "MLE-SGLP", C);
        if (!mle || !sglp || mle->trials_failed + sglp->trials_failed > 0) {
            order_ok = false;
            per_c << " C=" << C << ":missing";
            continue;
        }
        const bool phi = sglp->e_phi.mean < mle->e_phi.mean;
        const bool ll = sglp->loglike.mean > mle->loglike.mean;
        order_ok = order_ok && phi && ll;
        per_c << fmt(" C=%zu e_phi %.3f<%.3f %s loglike %.1f>%.1f %s;", C, sglp->e_phi.mean, mle->e_phi.mean,
                     phi ? "ok" : "no", sglp->loglike.mean, mle->loglike.mean, ll ? "ok" : "no");
    }
    const auto* top = find_row(res.summary, "MLE-SGLP", 250);
    const double f1 = top ? top->absent_f1.mean : 0.0;
    const double secs = seconds_since(t0);
    return {f1 >= 0.9 && order_ok && secs < 1800.0,
            fmt("absent-edge F1 at C=250 %.3f (>= 0.9); orderings %s; %.0f s (< 1800 s);", f1,
                order_ok ? "hold" : "broken", secs) +
                per_c.str()};
}

Outcome piecewise_constant_robustness() {
    auto plan = recovery_plan();
    plan.family = KernelFamily::piecewise_constant;
    plan.training_sizes = {250};
    plan.methods = {Method::mle_sglp};
    const auto res = run_experiment(plan);
    const auto* row = find_row(res.summary, "MLE-SGLP", 250);
    const double f1 = row ? row->absent_f1.mean : 0.0;
    std::size_t recovered = 0, total = 0;
    for (const auto& r : res.rows) {
        recovered += r.absent_recovered;
        total += r.absent_total;
    }
    return {f1 >= 0.9, fmt("pwc truth, C=250, %d trials: absent-edge F1 %.3f (>= 0.9), %zu/%zu absent edges recovered",
                           plan.num_trials, f1, recovered, total)};
}

Outcome basis_selection() {
    const auto data = sine_data(5, 50, 50.0, 108);
    const double h = silverman_bandwidth(data);
    const long long N = static_cast<long long>(data.total_events());
    double worst_residual = 0.0;
    bool bound_ok = true, minimal_ok = true, ceiling_ok = true, monotone_ok = true;
    double prev = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 10; ++k) {
        const double eps = 1e-6 * std::numbers::pi * static_cast<double>(N) * std::pow(3.0, k);
        const auto sel = select_basis(data, eps, 50.0);
        const double w = sel.omega0;
        const double tail = spectral_tail_bound(w, h, N);
        worst_residual = std::max(worst_residual, std::abs(tail - eps) / eps);
        bound_ok = bound_ok && tail <= eps * (1.0 + 1e-10);
        minimal_ok = minimal_ok && spectral_tail_bound(w * (1.0 - 1e-8), h, N) > eps;
        ceiling_ok = ceiling_ok && sel.basis.size() == static_cast<std::size_t>(std::ceil(50.0 * w / std::numbers::pi));
        monotone_ok = monotone_ok && w <= prev;
        prev = w;
    }
    const bool ok = worst_residual <= 1e-10 && bound_ok && minimal_ok && ceiling_ok && monotone_ok;
    return {ok, fmt("10-point ladder: max rel residual %.3g (<= 1e-10), bound %s, smallest %s, M = ceil(T w/pi) %s, "
                    "monotone %s",
                    worst_residual, bound_ok ? "ok" : "no", minimal_ok ? "ok" : "no", ceiling_ok ? "ok" : "no",
                    monotone_ok ? "ok" : "no")};
}

Outcome simulator_statistics() {
    // homogeneous Poisson
    const double mu = 0.7, T = 40.0;
    std::vector<SinePair> none(1);
    const auto poisson = GroundTruth::sine({mu}, none, KernelFamily::sine_like);
    std::vector<double> counts;
    for (std::uint64_t s = 0; s < 1000; ++s) counts.push_back(static_cast<double>(sample(poisson, T, s).size()));
    const auto pc = summarize(counts);
    const double pz = std::abs(pc.mean - mu * T) / (pc.stddev / std::sqrt(1000.0));

    // 1-D Hawkes with phi(t) = 0.25 (1 - cos(pi t)) on [0, 2]
    std::vector<SinePair> self{{0.25, std::numbers::pi, 0, true}};
    const auto hawkes1 = GroundTruth::sine({1.0}, self, KernelFamily::sine_like);
    const double mass = oracle::integrate([&](double t) { return hawkes1.kernel(0, 0, t); }, 0.0, 2.0) +
                        oracle::integrate([&](double t) { return hawkes1.kernel(0, 0, t); }, 2.0, 10.0);
    const double rate = 1.0 / (1.0 - mass);
    const double TH = 1000.0;
    std::vector<double> rates;
    for (std::uint64_t s = 0; s < 300; ++s) rates.push_back(static_cast<double>(sample(hawkes1, TH, 5000 + s).size()) / TH);
    const auto hc = summarize(rates);
    const double hz = std::abs(hc.mean - rate) / (hc.stddev / std::sqrt(300.0));

    // time rescaling on the five-type benchmark
    const auto bench = make_synthetic(SyntheticConfig{5, 200, 50.0, KernelFamily::sine_like, SupportWindow::continuous, 109});
    const auto gaps = rescaled_interarrivals(bench.truth, bench.data);
    const auto ks = ks_test_exponential(gaps);

    const bool ok = pz <= 3.0 && hz <= 3.0 && ks.p_value > 0.01;
    return {ok, fmt("Poisson mean %.3f vs %.3f (%.2f SE <= 3); Hawkes rate %.4f vs %.4f (%.2f SE <= 3, int phi %.6f); "
                    "KS on %zu gaps p = %.3f (> 0.01)",
                    pc.mean, mu * T, pz, hc.mean, rate, hz, mass, gaps.size(), ks.p_value)};
}

Outcome hyperparameter_stability() {
    SweepPlan p;
    p.family = KernelFamily::sine_like;
    p.train_size = 250;
    p.test_size = 250;
    p.grid = log_grid(1e-2, 1e4, 7);
    p.profiles = {"alpha_p"};
    p.alpha_s = 10.0;
    p.alpha_g = 100.0;
    p.seed = 2024;
    const auto rows = sweep_hyperparameters(p);
    std::vector<double> ll;
    for (const auto& r : rows) {
        if (r.status == "ok") ll.push_back(r.loglike);
    }
    if (ll.size() != p.grid.size()) {
        return {false, fmt("%zu of %zu fits failed", p.grid.size() - ll.size(), p.grid.size())};
    }
    const auto s = summarize(ll);
    const double spread = *std::max_element(ll.begin(), ll.end()) - *std::min_element(ll.begin(), ll.end());
    return {spread < 0.05 * std::abs(s.mean),
            fmt("alpha_p over [1e-2, 1e4], 7 points: spread %.3f, %.4f%% of |mean| %.1f (< 5%%)", spread,
                100.0 * spread / std::abs(s.mean), s.mean)};
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"likelihood oracle", likelihood_oracle},
        {"EM monotonicity", em_monotonicity},
        {"responsibility normalization", responsibility_normalization},
        {"gradient check", gradient_check},
        {"prox oracle", prox_oracle},
        {"graph recovery", graph_recovery},
        {"piecewise-constant robustness", piecewise_constant_robustness},
        {"basis selection", basis_selection},
        {"simulator statistics", simulator_statistics},
        {"hyperparameter stability", hyperparameter_stability},
    };
    int only = 0;
    if (argc > 1) {
        only = std::atoi(argv[1]);
        if (only < 1 || only > static_cast<int>(criteria.size())) {
            std::cerr << "usage: acceptance [criterion 1-" << criteria.size() << "]\n";
            return 2;
        }
    }
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        if (only != 0 && static_cast<int>(i) + 1 != only) continue;
        Outcome out;
        try {
            out = criteria[i].second();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        failed += out.pass ? 0 : 1;
        std::cout << "criterion " << i + 1 << " (" << criteria[i].first << "): " << (out.pass ? "PASS" : "FAIL") << "  "
                  << out.detail << std::endl;
    }
    return failed == 0 ? 0 : 1;
}
