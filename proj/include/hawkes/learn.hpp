#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hawkes/basis.hpp"
#include "hawkes/core.hpp"
#include "hawkes/kernels.hpp"

namespace hawkes {

enum class Method { mle, mle_s, mle_gl, mle_sgl, mle_sglp };

std::string to_string(Method m);
Method method_from_string(const std::string& s);

struct LearnConfig {
    double alpha_s = 0.0;
    double alpha_g = 0.0;
    double alpha_p = 0.0;
    std::optional<ClusterStructure> clusters;
    double eta = 0.0;  // 0 selects 1e-2 * sum_c T_c / N_total
    int inner_max = 100;
    int outer_max = 50;
    double inner_tol = 1e-5;
    double outer_tol = 1e-5;
    std::uint64_t seed = 0;

    // Throws std::invalid_argument on negative weights, negative eta, bad
    // caps, or alpha_p > 0 without clusters (or clusters of the wrong size).
    void validate(int num_types) const;

    // The weights a method keeps active; the others are set to zero.
    static LearnConfig for_method(Method m, double alpha_s, double alpha_g, double alpha_p,
                                  std::optional<ClusterStructure> clusters = std::nullopt);
};

// Posterior attribution of every event to the baseline or to basis m of a
// previous event. excitation[c][i] holds i * M values, entry j * M + m being
// p_ij^m.
struct Responsibilities {
    std::size_t num_bases = 0;
    std::vector<std::vector<double>> baseline;
    std::vector<std::vector<std::vector<double>>> excitation;

    // max over events of |p_ii + sum_j sum_m p_ij^m - 1|.
    double normalization_residual() const;
};

// Throws std::domain_error when an event has zero intensity.
Responsibilities e_step(const ModelParams& params, const BasisConfig& basis, const Dataset& data);

std::vector<double> update_mu(const Responsibilities& resp, const Dataset& data);

// sum over attributed pairs of p_ij^m, laid out like ModelParams coefficients.
std::vector<double> attributed_mass(const Responsibilities& resp, const Dataset& data);

// H[v][m] = sum_c sum_{i: u_i = v} K_m(T_c - t_i), U * M values.
std::vector<double> compensator_mass(const Dataset& data, const BasisConfig& basis);

struct Quadratic {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
};

// Nonnegative root of a x^2 + b x + c = 0 (c <= 0), or -c/b when a = 0.
// Throws std::domain_error when a = 0, b <= 0 and c < 0.
double stationary_root(const Quadratic& q);

// Coefficients of the per-entry quadratic for a(u, v, m).
Quadratic coefficient_quadratic(int u, int v, std::size_t m, double mass, double compensator,
                                const ModelParams& prev, const LearnConfig& cfg);

// New coefficient tensor from attributed mass P (U*U*M) and compensator mass
// H (U*M). Groups with zero norm are held at zero while alpha_g > 0.
std::vector<double> update_A(std::span<const double> mass, std::span<const double> compensator,
                             const ModelParams& prev, const LearnConfig& cfg);

std::vector<double> update_A(const Responsibilities& resp, const Dataset& data, const BasisConfig& basis,
                             const ModelParams& prev, const LearnConfig& cfg);

double soft_threshold(double x, double alpha);

// Sparse-group shrinkage of one group with step cfg.eta: the minimizer over
// x >= 0 of |x - (candidate - eta grad)|^2 / (2 eta) + alpha_s |x|_1 + alpha_g |x|_2.
// Soft-threshold, clamp at zero, then shrink the group (or zero it when its
// norm is at most eta alpha_g).
std::vector<double> prox_group(std::span<const double> candidate, std::span<const double> prev,
                               std::span<const double> grad, const LearnConfig& cfg);

// Pairwise-similarity penalty against a frozen reference tensor. Only pairs
// (u, v) with v a cluster peer of u carry weight. E(A; A) is the plain penalty.
double pairwise_penalty(const ModelParams& params, const ModelParams& reference, const ClusterStructure& clusters);

// Smooth part of the objective around the E-step point theta_k:
//   -Q_k(theta) + alpha_p E(A; A_k)
// with -Q_k(theta) = sum_u [T mu_u - B_u log mu_u] + sum_uvm [a H_vm - P_uvm log a].
class SmoothSurrogate {
public:
    SmoothSurrogate(const EmMoments& moments, const ModelParams& at, const LearnConfig& cfg);

    double value(const ModelParams& params) const;
    // Gradients with respect to mu (U values) and A (U*U*M values).
    std::vector<double> gradient_mu(const ModelParams& params) const;
    std::vector<double> gradient_A(const ModelParams& params) const;

    // F_k(theta) = -L(theta_k) - Q_k(theta) + Q_k(theta_k) + alpha_p E(A; A_k)
    //             + alpha_s ||A||_1 + alpha_g ||A||_{1,2},
    // equal to the penalized objective at theta_k and above it elsewhere.
    double objective(const ModelParams& params) const;

private:
    double penalty_weight(int u, int v) const;

    EmMoments moments_;
    ModelParams at_;
    LearnConfig cfg_;
    double offset_ = 0.0;
};

// -L + alpha_s ||A||_1 + alpha_g ||A||_{1,2} + alpha_p E(A; A).
double penalized_objective(double log_likelihood, const ModelParams& params, const LearnConfig& cfg);

// Gradient of the smooth part at the E-step point: H - G plus the pairwise term.
std::vector<double> smooth_gradient(const EmMoments& moments, const ModelParams& at, const LearnConfig& cfg);

struct FitReport {
    std::vector<double> objective_trace;   // penalized objective at every E-step
    std::vector<double> loglik_trace;      // log-likelihood at every E-step
    std::vector<double> surrogate_before;  // F_k(theta_k) per inner iteration
    std::vector<double> surrogate_after;   // F_k(theta_{k+1})
    std::vector<int> inner_iterations;     // per outer iteration
    std::vector<double> prox_steps;        // accepted step per shrinkage sweep, 0 if none was
    int outer_iterations = 0;
    bool converged = false;
    double final_objective = 0.0;
    double final_loglik = 0.0;
    double eta = 0.0;
    std::size_t zero_groups = 0;
};

struct FitResult {
    ModelParams params;
    FitReport report;
};

struct FitHooks {
    // Called with the parameters every E-step is taken at.
    std::function<void(const ModelParams&)> on_e_step;
};

// Random start on the data's scale.
ModelParams initial_params(const EventFeatures& features, const BasisConfig& basis, std::uint64_t seed);

double default_eta(const Dataset& data);

FitResult fit(const Dataset& data, const BasisConfig& basis, const LearnConfig& cfg, const FitHooks& hooks = {});

FitResult fit(const EventFeatures& features, const BasisConfig& basis, const LearnConfig& cfg,
              const FitHooks& hooks = {});

// Same, starting from the given parameters instead of a random draw.
FitResult fit_from(const EventFeatures& features, const BasisConfig& basis, const LearnConfig& cfg,
                   ModelParams start, const FitHooks& hooks = {});

}  // namespace hawkes
