#include "hawkes/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "hawkes/rng.hpp"

namespace hawkes {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

double window_end(const SinePair& p, SupportWindow w) {
    const double s = p.phase;
    if (w == SupportWindow::continuous) {
        return (2.0 - s) * kPi / p.frequency;
    }
    return (2.0 - s) / (4.0 * kPi * p.frequency);
}

double sine_value(const SinePair& p, double t) {
    return p.amplitude * (1.0 - std::cos(p.frequency * t - kPi * p.phase));
}

// Interval where the sine bump is at or above its amplitude:
// cos(omega t - pi s) <= 0 within the first period.
std::pair<double, double> upper_half(const SinePair& p, double end) {
    const double s = p.phase;
    const double lo = std::max(0.0, (kPi / 2.0 - kPi * s) / p.frequency);
    const double hi = std::min(end, (3.0 * kPi / 2.0 - kPi * s) / p.frequency);
    return {lo, hi};
}

}  // namespace

std::string to_string(KernelFamily f) {
    switch (f) {
        case KernelFamily::sine_like: return "sine";
        case KernelFamily::piecewise_constant: return "pwc";
        case KernelFamily::basis_expansion: return "basis";
    }
    return "sine";
}

std::string to_string(SupportWindow w) {
    return w == SupportWindow::continuous ? "continuous" : "printed";
}

KernelFamily kernel_family_from_string(const std::string& s) {
    if (s == "sine" || s == "sine_like") return KernelFamily::sine_like;
    if (s == "pwc" || s == "piecewise_constant") return KernelFamily::piecewise_constant;
    if (s == "basis" || s == "basis_expansion") return KernelFamily::basis_expansion;
    throw std::invalid_argument("unknown kernel family '" + s + "'");
}

SupportWindow support_window_from_string(const std::string& s) {
    if (s == "continuous") return SupportWindow::continuous;
    if (s == "printed") return SupportWindow::printed;
    throw std::invalid_argument("unknown support window '" + s + "'");
}

GroundTruth GroundTruth::sine(std::vector<double> mu, std::vector<SinePair> pairs, KernelFamily family,
                              SupportWindow window) {
    if (family == KernelFamily::basis_expansion) {
        throw std::invalid_argument("sine ground truth needs the sine_like or piecewise_constant family");
    }
    if (mu.empty() || pairs.size() != mu.size() * mu.size()) {
        throw std::invalid_argument("ground truth needs U base rates and U x U kernel pairs");
    }
    for (double m : mu) {
        if (!std::isfinite(m) || m < 0.0) {
            throw std::invalid_argument("base rates must be finite and nonnegative");
        }
    }
    for (const auto& p : pairs) {
        if (!p.active) {
            continue;
        }
        if (!(p.amplitude >= 0.0) || !(p.frequency > 0.0) || (p.phase != 0 && p.phase != 1)) {
            throw std::invalid_argument("sine pair needs amplitude >= 0, frequency > 0, phase in {0,1}");
        }
    }
    GroundTruth gt;
    gt.mu_ = std::move(mu);
    gt.pairs_ = std::move(pairs);
    gt.family_ = family;
    gt.window_ = window;
    return gt;
}

GroundTruth GroundTruth::expansion(ModelParams params, BasisConfig basis) {
    if (params.num_bases() != basis.size()) {
        throw std::invalid_argument("model and basis disagree on the number of bases");
    }
    params.validate();
    GroundTruth gt;
    gt.mu_ = params.mu_vector();
    gt.family_ = KernelFamily::basis_expansion;
    gt.params_ = std::move(params);
    gt.basis_ = std::move(basis);
    return gt;
}

const SinePair& GroundTruth::pair(int u, int v) const {
    if (u < 0 || v < 0 || u >= num_types() || v >= num_types()) {
        throw std::out_of_range("event type index out of range");
    }
    return pairs_.at(static_cast<std::size_t>(u * num_types() + v));
}

double GroundTruth::kernel(int u, int v, double t) const {
    if (family_ == KernelFamily::basis_expansion) {
        return t < 0.0 ? 0.0 : impact_function(*params_, *basis_, u, v, t);
    }
    const auto& p = pair(u, v);
    if (!p.active || t < 0.0) {
        return 0.0;
    }
    const double end = window_end(p, window_);
    if (t > end) {
        return 0.0;
    }
    if (family_ == KernelFamily::sine_like) {
        return sine_value(p, t);
    }
    const auto [lo, hi] = upper_half(p, end);
    return (t >= lo && t <= hi) ? p.amplitude : 0.0;
}

double GroundTruth::kernel_integral(int u, int v, double t) const {
    if (!(t > 0.0)) {
        return 0.0;
    }
    if (family_ == KernelFamily::basis_expansion) {
        const auto g = params_->group(u, v);
        double s = 0.0;
        for (std::size_t m = 0; m < g.size(); ++m) {
            s += g[m] * kernel_cumulative(*basis_, m, t);
        }
        return s;
    }
    const auto& p = pair(u, v);
    if (!p.active) {
        return 0.0;
    }
    const double end = window_end(p, window_);
    if (family_ == KernelFamily::sine_like) {
        const double L = std::min(t, end);
        const double ph = kPi * p.phase;
        return p.amplitude * (L - (std::sin(p.frequency * L - ph) - std::sin(-ph)) / p.frequency);
    }
    const auto [lo, hi] = upper_half(p, end);
    return p.amplitude * std::max(0.0, std::min(t, hi) - lo);
}

double GroundTruth::kernel_sup_after(int u, int v, double lag) const {
    lag = std::max(lag, 0.0);
    if (family_ == KernelFamily::basis_expansion) {
        const auto g = params_->group(u, v);
        double s = 0.0;
        for (std::size_t m = 0; m < g.size(); ++m) {
            s += g[m] * (lag <= basis_->center(m) ? 1.0 : hawkes::kernel(*basis_, m, lag));
        }
        return s;
    }
    const auto& p = pair(u, v);
    if (!p.active) {
        return 0.0;
    }
    const double end = window_end(p, window_);
    if (lag > end) {
        return 0.0;
    }
    if (family_ == KernelFamily::piecewise_constant) {
        const auto [lo, hi] = upper_half(p, end);
        return (lo <= hi && lag <= hi) ? p.amplitude : 0.0;
    }
    // Within the window the bump is unimodal, so the sup over [lag, end] is
    // attained at lag, at end, or at the peak.
    const double peak = std::fmod((1.0 + p.phase) * kPi, 2.0 * kPi) / p.frequency;
    double s = std::max(sine_value(p, lag), sine_value(p, end));
    if (peak >= lag && peak <= end) {
        s = std::max(s, sine_value(p, peak));
    }
    return s;
}

double GroundTruth::support_end(int u, int v) const {
    if (family_ == KernelFamily::basis_expansion) {
        return is_zero(u, v) ? 0.0 : kInf;
    }
    const auto& p = pair(u, v);
    return p.active ? window_end(p, window_) : 0.0;
}

bool GroundTruth::is_zero(int u, int v) const {
    if (family_ == KernelFamily::basis_expansion) {
        return params_->group_norm(u, v) == 0.0;
    }
    const auto& p = pair(u, v);
    return !p.active || p.amplitude == 0.0;
}

Eigen::MatrixXd GroundTruth::integrated_kernels() const {
    const int U = num_types();
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(U, U);
    for (int u = 0; u < U; ++u) {
        for (int v = 0; v < U; ++v) {
            m(u, v) = kernel_integral(u, v, kInf);
        }
    }
    return m;
}

double GroundTruth::spectral_radius() const {
    return hawkes::spectral_radius(integrated_kernels());
}

GrangerGraph GroundTruth::graph() const {
    const int U = num_types();
    GrangerGraph g(U);
    for (int u = 0; u < U; ++u) {
        for (int v = 0; v < U; ++v) {
            g.set_edge(u, v, !is_zero(u, v));
        }
    }
    return g;
}

double ground_truth_kernel(const GroundTruth& gt, int u, int v, double t) {
    return gt.kernel(u, v, t);
}

EventSequence sample(const GroundTruth& gt, double horizon, std::uint64_t seed) {
    if (!(horizon > 0.0)) {
        throw std::invalid_argument("sampling horizon must be positive");
    }
    if (!(gt.spectral_radius() < 1.0)) {
        throw std::domain_error("ground truth is not stationary (spectral radius >= 1)");
    }
    const int U = gt.num_types();
    double max_support = 0.0;
    for (int u = 0; u < U; ++u) {
        for (int v = 0; v < U; ++v) {
            max_support = std::max(max_support, gt.support_end(u, v));
        }
    }

    CounterRng rng(seed);
    std::vector<Event> events;
    std::size_t active_begin = 0;  // events older than max_support no longer matter
    std::vector<double> lambda(static_cast<std::size_t>(U));
    double t = 0.0;

    for (;;) {
        while (active_begin < events.size() && t - events[active_begin].time > max_support) {
            ++active_begin;
        }
        double bound = 0.0;
        for (int u = 0; u < U; ++u) {
            bound += gt.mu()[static_cast<std::size_t>(u)];
            for (std::size_t j = active_begin; j < events.size(); ++j) {
                bound += gt.kernel_sup_after(u, events[j].type, t - events[j].time);
            }
        }
        if (!(bound > 0.0)) {
            break;
        }
        t += rng.exponential(bound);
        if (t > horizon) {
            break;
        }
        const double draw = rng.uniform() * bound;
        if (!events.empty() && t == events.back().time) {
            continue;
        }
        double total = 0.0;
        for (int u = 0; u < U; ++u) {
            double l = gt.mu()[static_cast<std::size_t>(u)];
            for (std::size_t j = active_begin; j < events.size(); ++j) {
                l += gt.kernel(u, events[j].type, t - events[j].time);
            }
            lambda[static_cast<std::size_t>(u)] = l;
            total += l;
        }
        if (total > bound * (1.0 + 1e-9)) {
            throw std::logic_error("thinning bound violated");
        }
        double cum = 0.0;
        for (int u = 0; u < U; ++u) {
            cum += lambda[static_cast<std::size_t>(u)];
            if (draw < cum) {
                events.push_back({t, u});
                break;
            }
        }
    }
    return EventSequence(std::move(events), horizon);
}

Dataset sample_dataset(const GroundTruth& gt, std::size_t num_sequences, double horizon, std::uint64_t seed) {
    if (!(gt.spectral_radius() < 1.0)) {
        throw std::domain_error("ground truth is not stationary (spectral radius >= 1)");
    }
    std::vector<EventSequence> seqs(num_sequences);
    const auto C = static_cast<std::ptrdiff_t>(num_sequences);
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t c = 0; c < C; ++c) {
        seqs[static_cast<std::size_t>(c)] = sample(gt, horizon, seed + static_cast<std::uint64_t>(c));
    }
    return Dataset(std::move(seqs), gt.num_types());
}

std::vector<SinePair> benchmark_pairs(int num_types) {
    const int U = num_types;
    std::vector<SinePair> pairs(static_cast<std::size_t>(U * U));
    auto in = [](int x, int lo, int hi) { return x >= lo && x <= hi; };
    for (int u = 0; u < U; ++u) {
        for (int v = 0; v < U; ++v) {
            // 1-based labels
            const int a = u + 1;
            const int b = v + 1;
            SinePair p;
            if (in(a, 1, 3) && in(b, 1, 3)) {
                p = {0.05, 0.6 * kPi, 1, true};
            } else if (in(a, 4, 5) && in(b, 4, 5)) {
                p = {0.05, 0.4 * kPi, 0, true};
            } else if ((a == 4 && in(b, 1, 3)) || (b == 4 && in(a, 1, 3))) {
                p = {0.02, 0.2 * kPi, 0, true};
            }
            pairs[static_cast<std::size_t>(u * U + v)] = p;
        }
    }
    return pairs;
}

SyntheticData make_synthetic(const SyntheticConfig& config) {
    if (config.family == KernelFamily::basis_expansion) {
        throw std::invalid_argument("synthetic benchmark uses the sine or piecewise-constant family");
    }
    if (config.num_types < 1) {
        throw std::invalid_argument("synthetic benchmark needs at least one type");
    }
    const int U = config.num_types;
    CounterRng rng(config.seed, 0x6D75);  // "mu"
    std::vector<double> mu(static_cast<std::size_t>(U));
    for (auto& m : mu) {
        m = rng.uniform(0.0, 1.0 / U);
    }
    auto truth = GroundTruth::sine(std::move(mu), benchmark_pairs(U), config.family, config.window);
    auto data = sample_dataset(truth, config.num_sequences, config.horizon, config.seed);
    return {std::move(data), std::move(truth)};
}

double compensator(const GroundTruth& gt, const EventSequence& seq, int u, double t) {
    double total = gt.mu().at(static_cast<std::size_t>(u)) * t;
    for (const auto& e : seq.events()) {
        if (!(e.time < t)) {
            break;
        }
        total += gt.kernel_integral(u, e.type, t - e.time);
    }
    return total;
}

std::vector<double> rescaled_interarrivals(const GroundTruth& gt, const EventSequence& seq) {
    std::vector<double> out;
    const int U = gt.num_types();
    for (int u = 0; u < U; ++u) {
        double prev = 0.0;
        for (const auto& e : seq.events()) {
            if (e.type != u) {
                continue;
            }
            const double now = compensator(gt, seq, u, e.time);
            out.push_back(now - prev);
            prev = now;
        }
    }
    return out;
}

std::vector<double> rescaled_interarrivals(const GroundTruth& gt, const Dataset& data) {
    std::vector<double> out;
    const int U = gt.num_types();
    for (int u = 0; u < U; ++u) {
        double offset = 0.0;
        double prev = 0.0;
        for (const auto& seq : data.sequences()) {
            for (const auto& e : seq.events()) {
                if (e.type != u) {
                    continue;
                }
                const double now = offset + compensator(gt, seq, u, e.time);
                out.push_back(now - prev);
                prev = now;
            }
            offset += compensator(gt, seq, u, seq.horizon());
        }
    }
    return out;
}

}  // namespace hawkes
