#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hawkes/kernels.hpp"
#include "hawkes/learn.hpp"
#include "hawkes/simulate.hpp"
#include "oracle.hpp"

using namespace hawkes;

namespace {

Dataset small_data(int U, std::size_t C, double T, std::uint64_t seed) {
    auto gt = GroundTruth::sine(std::vector<double>(static_cast<std::size_t>(U), 0.2), benchmark_pairs(U),
                                KernelFamily::sine_like);
    return sample_dataset(gt, C, T, seed);
}

ModelParams random_params(int U, std::size_t M, std::mt19937_64& rng, double lo = 0.01) {
    std::uniform_real_distribution<double> unit(lo, 0.1);
    ModelParams p(U, M);
    for (int u = 0; u < U; ++u) p.mu(u) = unit(rng) + 0.1;
    for (auto& a : p.coefficients()) a = unit(rng);
    return p;
}


}  // namespace

TEST(config, validation) {
    LearnConfig c;
    EXPECT_NO_THROW(c.validate(3));
    c.alpha_p = 1.0;
    EXPECT_THROW(c.validate(3), std::invalid_argument);
    c.clusters = ClusterStructure({{0, 1}, {2}}, 3);
    EXPECT_NO_THROW(c.validate(3));
    EXPECT_THROW(c.validate(4), std::invalid_argument);
    c.eta = -1.0;
    EXPECT_THROW(c.validate(3), std::invalid_argument);
    c.eta = 0.0;
    c.alpha_s = -1.0;
    EXPECT_THROW(c.validate(3), std::invalid_argument);
}

TEST(config, methods) {
    const ClusterStructure cl({{0, 1}}, 2);
    const auto mle = LearnConfig::for_method(Method::mle, 1, 2, 3, cl);
    EXPECT_EQ(mle.alpha_s + mle.alpha_g + mle.alpha_p, 0.0);
    const auto gl = LearnConfig::for_method(Method::mle_gl, 1, 2, 3, cl);
    EXPECT_EQ(gl.alpha_s, 0.0);
    EXPECT_EQ(gl.alpha_g, 2.0);
    const auto sglp = LearnConfig::for_method(Method::mle_sglp, 1, 2, 3, cl);
    EXPECT_EQ(sglp.alpha_p, 3.0);
    EXPECT_TRUE(sglp.clusters.has_value());
    for (auto m : {Method::mle, Method::mle_s, Method::mle_gl, Method::mle_sgl, Method::mle_sglp}) {
        EXPECT_EQ(method_from_string(to_string(m)), m);
    }
    EXPECT_EQ(to_string(Method::mle_sglp), "MLE-SGLP");
}

TEST(e_step, examples) {
    const BasisConfig b({0.0}, 1.0, 5.0);
    const Dataset d({EventSequence({{1.0, 0}, {2.0, 0}}, 5.0)}, 1);
    const auto pure = e_step(ModelParams(std::vector<double>{0.4}, std::vector<double>{0.0}, 1), b, d);
    EXPECT_EQ(pure.baseline[0][0], 1.0);
    EXPECT_EQ(pure.baseline[0][1], 1.0);
    EXPECT_EQ(pure.excitation[0][1][0], 0.0);

    const Dataset two({EventSequence({{1.0, 0}, {1.5, 0}}, 5.0)}, 1);
    const auto r = e_step(ModelParams(std::vector<double>{0.3}, std::vector<double>{0.7}, 1), b, two);
    const double k = std::exp(-0.125);
    EXPECT_NEAR(r.baseline[0][1], 0.3 / (0.3 + 0.7 * k), 1e-15);
    EXPECT_NEAR(r.excitation[0][1][0], 0.7 * k / (0.3 + 0.7 * k), 1e-15);
    EXPECT_EQ(r.baseline[0][0], 1.0);
}

TEST(e_step, zero_baseline_attributes_everything_to_excitation) {
    // first event from a nonzero baseline of another type
    const BasisConfig b({0.0}, 1.0, 5.0);
    ModelParams p(std::vector<double>{0.5, 0.0}, std::vector<double>{0.0, 0.0, 0.4, 0.0}, 1);
    const Dataset d({EventSequence({{1.0, 0}, {1.5, 1}, {2.0, 1}}, 5.0)}, 2);
    const auto r = e_step(p, b, d);
    EXPECT_EQ(r.baseline[0][1], 0.0);
    EXPECT_EQ(r.baseline[0][2], 0.0);
    EXPECT_LE(r.normalization_residual(), 1e-15);
}

TEST(e_step, zero_intensity_throws) {
    const BasisConfig b({0.0}, 1.0, 5.0);
    EXPECT_THROW(e_step(ModelParams(std::vector<double>{0.0}, std::vector<double>{0.5}, 1), b,
                        Dataset({EventSequence({{2.0, 0}}, 5.0)}, 1)),
                 std::domain_error);
}

TEST(e_step, normalized_and_consistent_with_moments) {
    std::mt19937_64 rng(4);
    const auto d = small_data(3, 10, 20.0, 1);
    const auto b = BasisConfig::uniform(5, 1.0, 20.0);
    for (int rep = 0; rep < 5; ++rep) {
        const auto p = random_params(3, 5, rng);
        const auto r = e_step(p, b, d);
        EXPECT_LE(r.normalization_residual(), 1e-10);
        const auto mo = em_moments(build_features(d, b), p);
        const auto mass = attributed_mass(r, d);
        for (std::size_t k = 0; k < mass.size(); ++k) EXPECT_NEAR(mass[k], mo.excitation_mass[k], 1e-10);
        const auto h = compensator_mass(d, b);
        for (std::size_t k = 0; k < h.size(); ++k) EXPECT_NEAR(h[k], mo.compensator[k], 1e-10);
    }
}

TEST(update_mu, examples) {
    const Dataset one({EventSequence({{3.0, 0}}, 10.0)}, 2);
    Responsibilities r;
    r.num_bases = 1;
    r.baseline = {{1.0}};
    r.excitation = {{{}}};
    const auto mu = update_mu(r, one);
    EXPECT_DOUBLE_EQ(mu[0], 0.1);
    EXPECT_EQ(mu[1], 0.0);

    const Dataset two({EventSequence({{1.0, 1}, {2.0, 1}}, 5.0), EventSequence({{1.0, 1}}, 5.0)}, 2);
    Responsibilities s;
    s.num_bases = 1;
    s.baseline = {{1.0, 0.5}, {0.5}};
    s.excitation = {{{}, {0.5}}, {{}}};
    EXPECT_DOUBLE_EQ(update_mu(s, two)[1], 0.2);
}

TEST(stationary_root, examples) {
    EXPECT_EQ(stationary_root({2.0, 3.0, 0.0}), 0.0);
    EXPECT_EQ(stationary_root({0.0, 3.0, 0.0}), 0.0);
    EXPECT_DOUBLE_EQ(stationary_root({0.0, 1.0, -2.0}), 2.0);
    EXPECT_DOUBLE_EQ(stationary_root({1.0, 0.0, -4.0}), 2.0);
    EXPECT_THROW(stationary_root({0.0, 0.0, -1.0}), std::domain_error);
    EXPECT_THROW(stationary_root({0.0, -1.0, -1.0}), std::domain_error);
}

TEST(stationary_root, stable_when_b_dominates) {
    // x = -c / b (1 + O(ac/b^2)); the textbook formula cancels catastrophically here
    const Quadratic q{1e-8, 1e4, -3.0};
    const double r = q.a * -q.c / (q.b * q.b);
    const double want = -q.c / q.b * (1.0 - r + 2.0 * r * r);
    const double got = stationary_root(q);
    EXPECT_NEAR(got, want, 1e-14 * want);
    for (auto qq : {Quadratic{2.0, -5.0, -1.0}, Quadratic{0.5, 7.0, -0.1}, Quadratic{3.0, 1e-9, -2.0}}) {
        const double x = stationary_root(qq);
        EXPECT_GE(x, 0.0);
        EXPECT_NEAR(qq.a * x * x + qq.b * x + qq.c, 0.0, 1e-12 * (std::abs(qq.b * x) + std::abs(qq.c)));
    }
}

TEST(update_A, quadratic_coefficients) {
    const ClusterStructure cl({{0, 1, 2}, {3}}, 4);
    std::mt19937_64 rng(8);
    const auto prev = random_params(4, 2, rng);
    LearnConfig cfg;
    cfg.alpha_s = 0.3;
    cfg.alpha_g = 2.0;
    cfg.alpha_p = 5.0;
    cfg.clusters = cl;
    // peers: u = 1, v = 2 in the same cluster
    const auto q = coefficient_quadratic(1, 2, 1, 4.0, 7.0, prev, cfg);
    const double peer = prev.a(0, 2, 1) + prev.a(2, 2, 1) + prev.a(1, 0, 1) + prev.a(1, 1, 1);
    EXPECT_NEAR(q.a, 2.0 / prev.group_norm(1, 2) + 2.0 * 4.0 * 5.0, 1e-12);
    EXPECT_NEAR(q.b, 7.0 + 0.3 - 2.0 * 5.0 * peer, 1e-12);
    EXPECT_EQ(q.c, -4.0);
    // v = 3 is not a peer of u = 1: no pairwise terms
    const auto r = coefficient_quadratic(1, 3, 0, 4.0, 7.0, prev, cfg);
    EXPECT_NEAR(r.a, 2.0 / prev.group_norm(1, 3), 1e-12);
    EXPECT_NEAR(r.b, 7.3, 1e-12);
}

TEST(update_A, unpenalized_is_mass_over_compensator) {
    std::mt19937_64 rng(1);
    const auto prev = random_params(2, 3, rng);
    std::vector<double> mass(12), h(6);
    for (auto& x : mass) x = std::uniform_real_distribution<double>(0.0, 5.0)(rng);
    for (auto& x : h) x = std::uniform_real_distribution<double>(0.5, 5.0)(rng);
    mass[4] = 0.0;
    const auto next = update_A(mass, h, prev, LearnConfig{});
    for (int u = 0; u < 2; ++u) {
        for (int v = 0; v < 2; ++v) {
            for (std::size_t m = 0; m < 3; ++m) {
                const std::size_t k = (static_cast<std::size_t>(u) * 2 + static_cast<std::size_t>(v)) * 3 + m;
                EXPECT_NEAR(next[k], mass[k] / h[static_cast<std::size_t>(v) * 3 + m], 1e-14);
            }
        }
    }
    EXPECT_EQ(next[4], 0.0);
}

TEST(update_A, zero_group_stays_zero_under_group_penalty) {
    std::mt19937_64 rng(2);
    auto prev = random_params(2, 3, rng);
    for (double& x : prev.group(0, 1)) x = 0.0;
    std::vector<double> mass(12, 1.0), h(6, 2.0);
    LearnConfig cfg;
    cfg.alpha_g = 1.0;
    const auto next = update_A(mass, h, prev, cfg);
    for (std::size_t m = 0; m < 3; ++m) EXPECT_EQ(next[3 + m], 0.0);
    EXPECT_GT(next[0], 0.0);
}

TEST(update_A, responsibilities_overload_agrees) {
    std::mt19937_64 rng(3);
    const auto d = small_data(2, 6, 15.0, 4);
    const auto b = BasisConfig::uniform(4, 1.0, 15.0);
    const auto p = random_params(2, 4, rng);
    LearnConfig cfg;
    cfg.alpha_s = 1.0;
    cfg.alpha_g = 3.0;
    const auto a = update_A(e_step(p, b, d), d, b, p, cfg);
    const auto mo = em_moments(build_features(d, b), p);
    const auto c = update_A(mo.excitation_mass, mo.compensator, p, cfg);
    for (std::size_t k = 0; k < a.size(); ++k) EXPECT_NEAR(a[k], c[k], 1e-10);
}

TEST(prox, soft_threshold_examples) {
    EXPECT_EQ(soft_threshold(5.0, 2.0), 3.0);
    EXPECT_EQ(soft_threshold(-5.0, 2.0), -3.0);
    EXPECT_EQ(soft_threshold(1.0, 2.0), 0.0);
}

TEST(prox, group_examples) {
    LearnConfig cfg;
    cfg.eta = 1.0;
    cfg.alpha_g = 1.0;
    const std::vector<double> cand{3.0, 4.0}, zero{0.0, 0.0};
    const auto out = prox_group(cand, cand, zero, cfg);
    EXPECT_NEAR(out[0], 2.4, 1e-15);
    EXPECT_NEAR(out[1], 3.2, 1e-15);

    cfg.alpha_g = 5.0;  // |z| = eta alpha_g exactly
    const auto cut = prox_group(cand, cand, zero, cfg);
    EXPECT_EQ(cut[0], 0.0);
    EXPECT_EQ(cut[1], 0.0);
    EXPECT_FALSE(std::signbit(cut[0]) || std::signbit(cut[1]));

    cfg.eta = 0.0;
    EXPECT_THROW(prox_group(cand, cand, zero, cfg), std::invalid_argument);
}

TEST(prox, matches_projected_subgradient_oracle) {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> val(-1.0, 2.0), w(0.0, 1.5), e(0.1, 1.0);
    for (int rep = 0; rep < 10; ++rep) {
        std::vector<double> cand(5), grad(5);
        for (auto& x : cand) x = std::abs(val(rng));
        for (auto& x : grad) x = val(rng);
        LearnConfig cfg;
        cfg.eta = e(rng);
        cfg.alpha_s = w(rng);
        cfg.alpha_g = w(rng);
        std::vector<double> y(5);
        for (std::size_t m = 0; m < 5; ++m) y[m] = cand[m] - cfg.eta * grad[m];
        const auto want = oracle::prox(y, cfg.eta, cfg.alpha_s, cfg.alpha_g);
        const auto got = prox_group(cand, cand, grad, cfg);
        for (std::size_t m = 0; m < 5; ++m) EXPECT_NEAR(got[m], want[m], 1e-6) << rep;
    }
}

TEST(gradient, smooth_part_matches_finite_differences) {
    std::mt19937_64 rng(31);
    const auto d = small_data(3, 8, 20.0, 2);
    const auto b = BasisConfig::uniform(4, 1.0, 20.0);
    const auto feat = build_features(d, b);
    LearnConfig cfg;
    cfg.alpha_p = 3.0;
    cfg.clusters = ClusterStructure({{0, 1}, {2}}, 3);
    for (int rep = 0; rep < 5; ++rep) {
        const auto at = random_params(3, 4, rng);
        const auto g = smooth_gradient(em_moments(feat, at), at, cfg);
        auto f = [&](const ModelParams& p) {
            return -log_likelihood(feat, p) + cfg.alpha_p * pairwise_penalty(p, at, *cfg.clusters);
        };
        double num = 0.0, den = 0.0;
        for (std::size_t k = 0; k < g.size(); ++k) {
            ModelParams hi = at, lo = at;
            hi.coefficients()[k] += 1e-5;
            lo.coefficients()[k] -= 1e-5;
            const double fd = (f(hi) - f(lo)) / 2e-5;
            num += (fd - g[k]) * (fd - g[k]);
            den += fd * fd;
        }
        EXPECT_LE(std::sqrt(num / den), 1e-4);
    }
}

TEST(gradient, surrogate_matches_finite_differences) {
    std::mt19937_64 rng(32);
    const auto d = small_data(3, 8, 20.0, 3);
    const auto b = BasisConfig::uniform(4, 1.0, 20.0);
    const auto feat = build_features(d, b);
    LearnConfig cfg;
    cfg.alpha_p = 2.0;
    cfg.clusters = ClusterStructure({{0, 1, 2}}, 3);
    const auto at = random_params(3, 4, rng);
    const SmoothSurrogate s(em_moments(feat, at), at, cfg);
    const auto x = random_params(3, 4, rng);
    const auto ga = s.gradient_A(x);
    const auto gm = s.gradient_mu(x);
    for (std::size_t k = 0; k < ga.size(); ++k) {
        ModelParams hi = x, lo = x;
        hi.coefficients()[k] += 1e-6;
        lo.coefficients()[k] -= 1e-6;
        EXPECT_NEAR((s.value(hi) - s.value(lo)) / 2e-6, ga[k], 1e-4 * (1.0 + std::abs(ga[k])));
    }
    for (int u = 0; u < 3; ++u) {
        ModelParams hi = x, lo = x;
        hi.mu(u) += 1e-6;
        lo.mu(u) -= 1e-6;
        EXPECT_NEAR((s.value(hi) - s.value(lo)) / 2e-6, gm[static_cast<std::size_t>(u)],
                    1e-4 * (1.0 + std::abs(gm[static_cast<std::size_t>(u)])));
    }
    // gradient of -Q at the expansion point equals the likelihood gradient
    const auto g0 = s.gradient_A(at);
    const auto g1 = smooth_gradient(em_moments(feat, at), at, cfg);
    for (std::size_t k = 0; k < g0.size(); ++k) EXPECT_NEAR(g0[k], g1[k], 1e-9 * (1.0 + std::abs(g1[k])));
}

TEST(surrogate, tight_at_expansion_point) {
    std::mt19937_64 rng(33);
    const auto d = small_data(2, 5, 20.0, 5);
    const auto b = BasisConfig::uniform(3, 1.0, 20.0);
    const auto feat = build_features(d, b);
    LearnConfig cfg;
    cfg.alpha_s = 1.0;
    cfg.alpha_g = 2.0;
    cfg.alpha_p = 3.0;
    cfg.clusters = ClusterStructure({{0, 1}}, 2);
    const auto at = random_params(2, 3, rng);
    const SmoothSurrogate s(em_moments(feat, at), at, cfg);
    const double want = penalized_objective(log_likelihood(feat, at), at, cfg);
    EXPECT_NEAR(s.objective(at), want, 1e-10 * std::abs(want));
    // and it majorizes the penalized objective with the frozen pairwise reference elsewhere
    for (int rep = 0; rep < 10; ++rep) {
        const auto x = random_params(2, 3, rng);
        const double frozen = -log_likelihood(feat, x);
        double pen = 0.0;
        for (double a : x.coefficients()) pen += cfg.alpha_s * a;
        for (int u = 0; u < 2; ++u)
            for (int v = 0; v < 2; ++v) pen += cfg.alpha_g * x.group_norm(u, v);
        pen += cfg.alpha_p * pairwise_penalty(x, at, *cfg.clusters);
        EXPECT_GE(s.objective(x), frozen + pen - 1e-9 * std::abs(frozen));
    }
}

TEST(pairwise, gated_penalty) {
    const ClusterStructure cl({{0, 1}, {2}}, 3);
    ModelParams p(3, 1);
    p.a(0, 1, 0) = 1.0;  // peers 0 and 1: compared with a(1,1) and a(0,0)
    p.a(0, 2, 0) = 5.0;  // not a peer pair: no weight
    EXPECT_DOUBLE_EQ(pairwise_penalty(p, p, cl), 2.0);
}

TEST(fit, poisson_baseline_with_zero_kernels) {
    const auto gt = GroundTruth::sine({2.0}, {{}}, KernelFamily::sine_like);
    const auto d = sample_dataset(gt, 4, 25.0, 9);
    const auto b = BasisConfig::uniform(3, 1.0, 25.0);
    const auto feat = build_features(d, b);
    ModelParams start(std::vector<double>{0.7}, std::vector<double>(3, 0.0), 3);
    const auto res = fit_from(feat, b, LearnConfig{}, start);
    const double mle = static_cast<double>(d.total_events()) / d.total_time();
    EXPECT_NEAR(res.params.mu(0), mle, 1e-12);
    EXPECT_NEAR(mle, 2.0, 4.0 * std::sqrt(2.0 / 100.0));
    for (double a : res.params.coefficients()) EXPECT_EQ(a, 0.0);
}

TEST(fit, huge_group_penalty_zeroes_everything) {
    const auto d = small_data(3, 10, 20.0, 6);
    const auto b = BasisConfig::uniform(4, 1.0, 20.0);
    LearnConfig cfg;
    cfg.alpha_g = 1e8;
    const auto res = fit(d, b, cfg);
    for (double a : res.params.coefficients()) EXPECT_EQ(a, 0.0);
    EXPECT_EQ(res.report.zero_groups, 9u);
    std::vector<double> counts(3, 0.0);
    for (const auto& s : d.sequences())
        for (const auto& e : s.events()) counts[static_cast<std::size_t>(e.type)] += 1.0;
    for (int u = 0; u < 3; ++u) EXPECT_NEAR(res.params.mu(u), counts[static_cast<std::size_t>(u)] / d.total_time(), 1e-12);
}

TEST(fit, em_monotone_without_penalties) {
    const auto d = small_data(2, 10, 30.0, 7);
    const auto b = BasisConfig::uniform(6, 1.0, 30.0);
    LearnConfig cfg;
    cfg.inner_max = 60;
    cfg.outer_max = 1;
    cfg.inner_tol = 0.0;
    const auto res = fit(d, b, cfg);
    const auto& tr = res.report.loglik_trace;
    ASSERT_EQ(tr.size(), 60u);
    for (std::size_t k = 1; k < tr.size(); ++k) EXPECT_GE(tr[k], tr[k - 1] - 1e-9 * std::abs(tr[k - 1]));
    EXPECT_GT(tr.back(), tr.front());
}

TEST(fit, surrogate_decreases_with_all_penalties) {
    const auto d = small_data(3, 10, 30.0, 8);
    const auto b = BasisConfig::uniform(6, 1.0, 30.0);
    LearnConfig cfg;
    cfg.alpha_s = 5.0;
    cfg.alpha_g = 20.0;
    cfg.alpha_p = 50.0;
    cfg.clusters = ClusterStructure({{0, 1}, {2}}, 3);
    cfg.outer_max = 3;
    const auto res = fit(d, b, cfg);
    const auto& before = res.report.surrogate_before;
    const auto& after = res.report.surrogate_after;
    ASSERT_FALSE(before.empty());
    for (std::size_t k = 0; k < before.size(); ++k) EXPECT_LE(after[k], before[k] + 1e-9 * std::abs(before[k]));
    res.params.validate();
    for (int u = 0; u < 3; ++u)
        for (int v = 0; v < 3; ++v) {
            const auto g = res.params.group(u, v);
            const bool all_zero = std::all_of(g.begin(), g.end(), [](double x) { return x == 0.0; });
            if (res.params.group_norm(u, v) == 0.0) EXPECT_TRUE(all_zero);
        }
}

TEST(fit, deterministic_in_seed) {
    const auto d = small_data(2, 5, 20.0, 9);
    const auto b = BasisConfig::uniform(3, 1.0, 20.0);
    LearnConfig cfg;
    cfg.alpha_s = 1.0;
    cfg.alpha_g = 2.0;
    cfg.seed = 4;
    EXPECT_EQ(fit(d, b, cfg).params, fit(d, b, cfg).params);
    EXPECT_THROW(fit(Dataset({EventSequence({}, 1.0)}, 2), b, cfg), std::invalid_argument);
}

TEST(fit, pairwise_weight_pulls_cluster_rows_together) {
    auto gt = GroundTruth::sine({0.1, 0.2, 0.15}, benchmark_pairs(3), KernelFamily::sine_like);
    const auto d = sample_dataset(gt, 40, 50.0, 10);
    const auto b = BasisConfig::uniform(10, 0.6, 50.0);
    const auto feat = build_features(d, b);
    auto gap = [](const ModelParams& p) {
        double s = 0.0;
        for (int v = 0; v < 3; ++v)
            for (std::size_t m = 0; m < p.num_bases(); ++m) s += std::pow(p.a(0, v, m) - p.a(1, v, m), 2);
        return std::sqrt(s);
    };
    std::vector<double> gaps;
    for (double ap : {0.0, 1e1, 1e3, 1e5}) {
        LearnConfig cfg;
        cfg.alpha_p = ap;
        cfg.clusters = ClusterStructure({{0, 1}, {2}}, 3);
        cfg.outer_max = 1;
        cfg.inner_max = 200;
        gaps.push_back(gap(fit(feat, b, cfg).params));
    }
    for (std::size_t k = 1; k < gaps.size(); ++k) EXPECT_LE(gaps[k], gaps[k - 1] * (1.0 + 1e-6)) << k;
    EXPECT_LT(gaps.back(), 0.9 * gaps.front());
}

TEST(fit, hook_sees_every_e_step) {
    const auto d = small_data(2, 4, 20.0, 11);
    const auto b = BasisConfig::uniform(3, 1.0, 20.0);
    LearnConfig cfg;
    cfg.alpha_g = 1.0;
    cfg.outer_max = 2;
    int calls = 0;
    FitHooks hooks;
    hooks.on_e_step = [&](const ModelParams& p) {
        ++calls;
        EXPECT_LE(e_step(p, b, d).normalization_residual(), 1e-10);
    };
    const auto res = fit(d, b, cfg, hooks);
    EXPECT_EQ(static_cast<std::size_t>(calls), res.report.loglik_trace.size());
}
