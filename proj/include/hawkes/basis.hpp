#pragma once

#include <cstddef>
#include <vector>

namespace hawkes {

class Dataset;

// Gaussian basis family kappa_m(t) = exp(-(t - t_m)^2 / (2 sigma^2)) with
// cut-off angular frequency omega0 = 1 / sigma. Centers live on [0, horizon].
class BasisConfig {
public:
    BasisConfig(std::vector<double> centers, double sigma, double horizon);

    // M evenly spaced centers t_m = (m-1) T / M.
    static BasisConfig uniform(std::size_t num_bases, double omega0, double horizon);

    std::size_t size() const noexcept { return centers_.size(); }
    double sigma() const noexcept { return sigma_; }
    double omega0() const noexcept { return 1.0 / sigma_; }
    double horizon() const noexcept { return horizon_; }
    const std::vector<double>& centers() const noexcept { return centers_; }
    double center(std::size_t m) const { return centers_.at(m); }

    bool operator==(const BasisConfig&) const = default;

private:
    std::vector<double> centers_;
    double sigma_;
    double horizon_;
};

// kappa_m(t); m is 0-based.
double kernel(const BasisConfig& config, std::size_t m, double t);

// K_m(t) = integral of kappa_m over [0, t], closed form via erf.
double kernel_cumulative(const BasisConfig& config, std::size_t m, double t);

// K_m(infinity).
double kernel_total_mass(const BasisConfig& config, std::size_t m);

/// Bandwidth and residual bound used while choosing the basis family.
struct SpectralEstimate {
    double bandwidth = 0.0;       // h
    long long total_events = 0;   // sum_c N_c
    double residual_bound = 0.0;  // epsilon
};

// Which closed form of the spectral tail integral to use.
//   exact      : pi N erfc(omega0 h / sqrt 2), the exact integral of the
//                Gaussian envelope; decays to zero.
//   non_decaying : pi N (1 - erf(omega0 h) / sqrt 2), kept for comparison;
//                bottoms out at pi N (1 - 1/sqrt 2).
enum class TailBound { exact, non_decaying };

// Silverman's rule of thumb over the pooled event timestamps,
// h = (4 sigma_hat^5 / (3 N))^(1/5) with the population standard deviation.
// Throws std::invalid_argument for fewer than two events or zero spread.
double silverman_bandwidth(const Dataset& data);

// Upper bound of the spectral mass above omega for N events at bandwidth h.
double spectral_tail_bound(double omega, double bandwidth, long long total_events,
                           TailBound form = TailBound::exact);

// Smallest omega0 with spectral_tail_bound(omega0) <= epsilon. Returns 0 when
// the bound already holds at omega0 = 0. Bisection on [0, 100/h] (widened if
// needed) to relative precision 1e-10, then inverse-erfc refinement for the
// exact form. Throws std::domain_error when the non-decaying form can never
// reach epsilon.
double smallest_cutoff(double epsilon, double bandwidth, long long total_events,
                       TailBound form = TailBound::exact);

struct BasisSelection {
    BasisConfig basis;
    SpectralEstimate estimate;
    double omega0 = 0.0;      // unclamped cut-off; 0 when degenerate
    bool degenerate = false;  // epsilon too large: single basis at t = 0
};

// Adaptive choice of the Gaussian basis family from data: omega0 from the
// spectral tail bound, M = ceil(T omega0 / pi), t_m = (m-1) T / M,
// sigma = 1 / omega0. In the degenerate case returns M = 1, center 0 and
// omega0 = pi / T.
BasisSelection select_basis(const Dataset& data, double epsilon, double horizon,
                            TailBound form = TailBound::exact);

// Same with epsilon = rho * pi * sum_c N_c.
BasisSelection select_basis_relative(const Dataset& data, double rho, double horizon,
                                     TailBound form = TailBound::exact);

}  // namespace hawkes
