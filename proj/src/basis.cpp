#include "hawkes/basis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include <boost/math/special_functions/erf.hpp>

#include "hawkes/core.hpp"

namespace hawkes {

namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;
constexpr double kPi = std::numbers::pi;

}  // namespace

BasisConfig::BasisConfig(std::vector<double> centers, double sigma, double horizon)
    : centers_(std::move(centers)), sigma_(sigma), horizon_(horizon) {
    if (centers_.empty()) {
        throw std::invalid_argument("basis needs at least one center");
    }
    if (!(sigma_ > 0.0) || !std::isfinite(sigma_)) {
        throw std::invalid_argument("basis sigma must be finite and positive");
    }
    if (!(horizon_ > 0.0) || !std::isfinite(horizon_)) {
        throw std::invalid_argument("basis horizon must be finite and positive");
    }
    for (std::size_t m = 0; m < centers_.size(); ++m) {
        const double c = centers_[m];
        if (!std::isfinite(c) || c < 0.0 || c > horizon_) {
            throw std::invalid_argument("basis center " + std::to_string(m) + " outside [0, horizon]");
        }
        if (m > 0 && c < centers_[m - 1]) {
            throw std::invalid_argument("basis centers must be nondecreasing");
        }
    }
}

BasisConfig BasisConfig::uniform(std::size_t num_bases, double omega0, double horizon) {
    if (num_bases == 0) {
        throw std::invalid_argument("basis needs at least one center");
    }
    if (!(omega0 > 0.0)) {
        throw std::invalid_argument("omega0 must be positive");
    }
    std::vector<double> centers(num_bases);
    for (std::size_t m = 0; m < num_bases; ++m) {
        centers[m] = static_cast<double>(m) * horizon / static_cast<double>(num_bases);
    }
    return BasisConfig(std::move(centers), 1.0 / omega0, horizon);
}

double kernel(const BasisConfig& config, std::size_t m, double t) {
    if (m >= config.size()) {
        throw std::out_of_range("basis index out of range");
    }
    const double d = (t - config.centers()[m]) / config.sigma();
    return std::exp(-0.5 * d * d);
}

double kernel_cumulative(const BasisConfig& config, std::size_t m, double t) {
    if (m >= config.size()) {
        throw std::out_of_range("basis index out of range");
    }
    if (!(t > 0.0)) {
        return 0.0;
    }
    const double s = config.sigma();
    const double scale = s * std::sqrt(kPi / 2.0);
    const double x = (t - config.centers()[m]) / (kSqrt2 * s);
    const double y = config.centers()[m] / (kSqrt2 * s);
    if (std::isinf(t)) {
        return scale * (1.0 + std::erf(y));
    }
    // erf(x) + erf(y) rewritten through erfc when x < 0 to avoid cancellation
    // far left of the center.
    if (x < 0.0) {
        return scale * (std::erfc(-x) - std::erfc(y));
    }
    return scale * (std::erf(x) + std::erf(y));
}

double kernel_total_mass(const BasisConfig& config, std::size_t m) {
    return kernel_cumulative(config, m, std::numeric_limits<double>::infinity());
}

double silverman_bandwidth(const Dataset& data) {
    const std::size_t n = data.total_events();
    if (n < 2) {
        throw std::invalid_argument("bandwidth needs at least two events");
    }
    double mean = 0.0;
    for (const auto& seq : data.sequences()) {
        for (const auto& e : seq.events()) {
            mean += e.time;
        }
    }
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (const auto& seq : data.sequences()) {
        for (const auto& e : seq.events()) {
            ss += (e.time - mean) * (e.time - mean);
        }
    }
    const double sd = std::sqrt(ss / static_cast<double>(n));
    if (!(sd > 0.0)) {
        throw std::invalid_argument("bandwidth needs timestamps with nonzero spread");
    }
    return std::pow(4.0 * std::pow(sd, 5) / (3.0 * static_cast<double>(n)), 0.2);
}

double spectral_tail_bound(double omega, double bandwidth, long long total_events, TailBound form) {
    const double mass = kPi * static_cast<double>(total_events);
    if (form == TailBound::exact) {
        return mass * std::erfc(omega * bandwidth / kSqrt2);
    }
    return mass * (1.0 - std::erf(omega * bandwidth) / kSqrt2);
}

double smallest_cutoff(double epsilon, double bandwidth, long long total_events, TailBound form) {
    if (!(epsilon > 0.0)) {
        throw std::invalid_argument("residual bound must be positive");
    }
    if (!(bandwidth > 0.0)) {
        throw std::invalid_argument("bandwidth must be positive");
    }
    auto bound = [&](double w) { return spectral_tail_bound(w, bandwidth, total_events, form); };
    if (bound(0.0) <= epsilon) {
        return 0.0;
    }
    if (form == TailBound::non_decaying) {
        const double floor = kPi * static_cast<double>(total_events) * (1.0 - 1.0 / kSqrt2);
        if (epsilon <= floor) {
            throw std::domain_error("non-decaying tail bound never reaches the requested residual");
        }
    }

    double lo = 0.0;
    double hi = 100.0 / bandwidth;
    for (int widen = 0; bound(hi) > epsilon; ++widen) {
        if (widen > 60) {
            throw std::domain_error("no cut-off frequency satisfies the residual bound");
        }
        lo = hi;
        hi *= 2.0;
    }
    while (hi - lo > 1e-10 * hi) {
        const double mid = 0.5 * (lo + hi);
        if (bound(mid) <= epsilon) {
            hi = mid;
        } else {
            lo = mid;
        }
    }

    if (form == TailBound::exact) {
        const double q = epsilon / (kPi * static_cast<double>(total_events));
        if (q > 0.0 && q < 1.0) {
            double w = kSqrt2 * boost::math::erfc_inv(q) / bandwidth;
            for (int k = 0; k < 8 && bound(w) > epsilon; ++k) {
                w = std::nextafter(w, std::numeric_limits<double>::infinity());
            }
            if (std::isfinite(w) && w >= lo && w <= hi && bound(w) <= epsilon) {
                return w;
            }
        }
    }
    return hi;
}

BasisSelection select_basis(const Dataset& data, double epsilon, double horizon, TailBound form) {
    if (!(horizon > 0.0)) {
        throw std::invalid_argument("basis horizon must be positive");
    }
    const double h = silverman_bandwidth(data);
    const auto n = static_cast<long long>(data.total_events());
    const double omega0 = smallest_cutoff(epsilon, h, n, form);
    SpectralEstimate est{h, n, epsilon};

    if (!(omega0 > 0.0)) {
        return BasisSelection{BasisConfig({0.0}, horizon / kPi, horizon), est, 0.0, true};
    }
    const double x = horizon * (omega0 / kPi);
    const auto M = static_cast<std::size_t>(std::max(1.0, std::ceil(x * (1.0 - 1e-12))));
    return BasisSelection{BasisConfig::uniform(M, omega0, horizon), est, omega0, false};
}

BasisSelection select_basis_relative(const Dataset& data, double rho, double horizon, TailBound form) {
    if (!(rho > 0.0)) {
        throw std::invalid_argument("relative residual must be positive");
    }
    const double eps = rho * kPi * static_cast<double>(data.total_events());
    return select_basis(data, eps, horizon, form);
}

}  // namespace hawkes
