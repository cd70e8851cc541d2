#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hawkes/basis.hpp"
#include "hawkes/core.hpp"

namespace hawkes {

enum class KernelFamily { sine_like, piecewise_constant, basis_expansion };

// Support of the sine-like bump.
//   continuous : [0, (2 - s) pi / omega], where the bump starts and ends at 0
//                (s = 0) or starts at its peak and decays to 0 (s = 1).
//   printed    : [0, (2 - s) / (4 pi omega)], a very short, discontinuous window.
enum class SupportWindow { continuous, printed };

std::string to_string(KernelFamily f);
std::string to_string(SupportWindow w);
KernelFamily kernel_family_from_string(const std::string& s);
SupportWindow support_window_from_string(const std::string& s);

// phi(t) = amplitude * (1 - cos(frequency * t - pi * phase)) on the support
// window; phase is 0 or 1.
struct SinePair {
    double amplitude = 0.0;
    double frequency = 1.0;
    int phase = 0;
    bool active = false;

    bool operator==(const SinePair&) const = default;
};

// Ground-truth Hawkes model used for synthetic data.
class GroundTruth {
public:
    // family must be sine_like or piecewise_constant; pairs is U x U row-major,
    // pairs[u * U + v] describing the impact of type v on type u.
    static GroundTruth sine(std::vector<double> mu, std::vector<SinePair> pairs, KernelFamily family,
                            SupportWindow window = SupportWindow::continuous);
    static GroundTruth expansion(ModelParams params, BasisConfig basis);

    int num_types() const noexcept { return static_cast<int>(mu_.size()); }
    KernelFamily family() const noexcept { return family_; }
    SupportWindow window() const noexcept { return window_; }
    const std::vector<double>& mu() const noexcept { return mu_; }
    const SinePair& pair(int u, int v) const;
    const std::optional<ModelParams>& params() const noexcept { return params_; }
    const std::optional<BasisConfig>& basis() const noexcept { return basis_; }

    double kernel(int u, int v, double t) const;
    // Integral of phi_{uv} over [0, t].
    double kernel_integral(int u, int v, double t) const;
    // sup of phi_{uv}(s) over s >= lag.
    double kernel_sup_after(int u, int v, double lag) const;
    // Lag beyond which phi_{uv} is identically zero (infinity for expansions).
    double support_end(int u, int v) const;
    bool is_zero(int u, int v) const;

    Eigen::MatrixXd integrated_kernels() const;
    double spectral_radius() const;
    // Edge v -> u present iff phi_{uv} is not identically zero.
    GrangerGraph graph() const;

private:
    std::vector<double> mu_;
    KernelFamily family_ = KernelFamily::sine_like;
    SupportWindow window_ = SupportWindow::continuous;
    std::vector<SinePair> pairs_;
    std::optional<ModelParams> params_;
    std::optional<BasisConfig> basis_;
};

// phi_{uv}(t) of the ground truth (0-based types).
double ground_truth_kernel(const GroundTruth& gt, int u, int v, double t);

// Exact draw on [0, horizon] by Ogata thinning with a piecewise-constant
// dominating rate. Deterministic in seed. Throws std::domain_error when the
// integrated-kernel matrix has spectral radius >= 1.
EventSequence sample(const GroundTruth& gt, double horizon, std::uint64_t seed);

// num_sequences independent draws; sequence c uses seed + c. Parallel over
// sequences.
Dataset sample_dataset(const GroundTruth& gt, std::size_t num_sequences, double horizon, std::uint64_t seed);

struct SyntheticConfig {
    int num_types = 5;
    std::size_t num_sequences = 500;
    double horizon = 50.0;
    KernelFamily family = KernelFamily::sine_like;
    SupportWindow window = SupportWindow::continuous;
    std::uint64_t seed = 0;
};

struct SyntheticData {
    Dataset data;
    GroundTruth truth;
};

// The five-type benchmark: (b, omega, s) = (0.05, 0.6 pi, 1) within {1,2,3},
// (0.05, 0.4 pi, 0) within {4,5}, (0.02, 0.2 pi, 0) between 4 and {1,2,3},
// zero elsewhere (1-based types). Types above 5 are unconnected.
std::vector<SinePair> benchmark_pairs(int num_types);

// Draws mu_u ~ Uniform[0, 1/U] and num_sequences sequences.
SyntheticData make_synthetic(const SyntheticConfig& config);

// Compensator Lambda_u(t) = integral of lambda_u over [0, t] under gt.
double compensator(const GroundTruth& gt, const EventSequence& seq, int u, double t);

// Time-rescaled inter-event times Lambda_u(t_k) - Lambda_u(t_{k-1}) of every
// type, pooled. Under the true model these are i.i.d. Exponential(1).
std::vector<double> rescaled_interarrivals(const GroundTruth& gt, const EventSequence& seq);

// Same over a dataset, with each type's rescaled sequences laid end to end so
// that gaps spanning a sequence boundary are kept whole. Short windows would
// otherwise drop the censored tail gaps and bias the sample low.
std::vector<double> rescaled_interarrivals(const GroundTruth& gt, const Dataset& data);

}  // namespace hawkes
