#include "hawkes/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace hawkes {

namespace {

// Fills g_i for every event of one sequence plus its contribution to H.
void sequence_features(const EventSequence& seq, const BasisConfig& basis, int U, double* history,
                       double* compensator) {
    const std::size_t M = basis.size();
    const std::size_t w = static_cast<std::size_t>(U) * M;
    const auto& ev = seq.events();
    std::fill(history, history + ev.size() * w, 0.0);
    for (std::size_t i = 0; i < ev.size(); ++i) {
        double* row = history + i * w;
        for (std::size_t j = 0; j < i; ++j) {
            const double tau = ev[i].time - ev[j].time;
            double* slot = row + static_cast<std::size_t>(ev[j].type) * M;
            for (std::size_t m = 0; m < M; ++m) {
                slot[m] += kernel(basis, m, tau);
            }
        }
        double* h = compensator + static_cast<std::size_t>(ev[i].type) * M;
        for (std::size_t m = 0; m < M; ++m) {
            h[m] += kernel_cumulative(basis, m, seq.horizon() - ev[i].time);
        }
    }
}

EventFeatures layout(const Dataset& data, const BasisConfig& basis) {
    EventFeatures f;
    f.num_types = data.num_types();
    f.num_bases = basis.size();
    f.offsets.assign(data.size() + 1, 0);
    for (std::size_t c = 0; c < data.size(); ++c) {
        f.offsets[c + 1] = f.offsets[c] + data[c].size();
    }
    f.types.resize(f.offsets.back());
    f.horizons.resize(data.size());
    for (std::size_t c = 0; c < data.size(); ++c) {
        f.horizons[c] = data[c].horizon();
        for (std::size_t i = 0; i < data[c].size(); ++i) {
            f.types[f.offsets[c] + i] = data[c][i].type;
        }
    }
    f.history.assign(f.num_events() * static_cast<std::size_t>(f.num_types) * f.num_bases, 0.0);
    f.compensator.assign(static_cast<std::size_t>(f.num_types) * f.num_bases, 0.0);
    f.total_time = data.total_time();
    return f;
}

EmMoments empty_moments(const EventFeatures& f) {
    EmMoments mo;
    mo.num_types = f.num_types;
    mo.num_bases = f.num_bases;
    const auto U = static_cast<std::size_t>(f.num_types);
    mo.baseline_mass.assign(U, 0.0);
    mo.excitation_ratio.assign(U * U * f.num_bases, 0.0);
    mo.compensator = f.compensator;
    mo.total_time = f.total_time;
    mo.num_events = f.num_events();
    return mo;
}

struct Partial {
    std::vector<double> baseline;
    std::vector<double> ratio;
    double event_term = 0.0;
    bool feasible = true;
};

// E-step statistics for the events [begin, end).
void accumulate_events(const EventFeatures& f, const ModelParams& params, std::size_t begin, std::size_t end,
                       Partial& out) {
    const int U = f.num_types;
    const std::size_t M = f.num_bases;
    const std::size_t w = static_cast<std::size_t>(U) * M;
    const auto& coef = params.coefficients();
    for (std::size_t i = begin; i < end; ++i) {
        const int u = f.types[i];
        const double* g = f.history.data() + i * w;
        const double* a = coef.data() + static_cast<std::size_t>(u) * w;
        double lambda = params.mu(u);
        for (std::size_t k = 0; k < w; ++k) {
            lambda += a[k] * g[k];
        }
        if (!(lambda > 0.0)) {
            out.feasible = false;
            continue;
        }
        const double inv = 1.0 / lambda;
        out.event_term += std::log(lambda);
        out.baseline[static_cast<std::size_t>(u)] += params.mu(u) * inv;
        double* r = out.ratio.data() + static_cast<std::size_t>(u) * w;
        for (std::size_t k = 0; k < w; ++k) {
            r[k] += g[k] * inv;
        }
    }
}

void finish(EmMoments& mo, const ModelParams& params) {
    mo.excitation_mass.resize(mo.excitation_ratio.size());
    const auto& coef = params.coefficients();
    for (std::size_t k = 0; k < coef.size(); ++k) {
        mo.excitation_mass[k] = coef[k] * mo.excitation_ratio[k];
    }
    if (!mo.feasible) {
        mo.event_term = -std::numeric_limits<double>::infinity();
    }
}

void check_params(const EventFeatures& f, const ModelParams& params) {
    if (params.num_types() != f.num_types || params.num_bases() != f.num_bases) {
        throw std::invalid_argument("model dimensions do not match the feature cache");
    }
}

}  // namespace

std::size_t EventFeatures::type_count(int u) const {
    return static_cast<std::size_t>(std::count(types.begin(), types.end(), u));
}

double EmMoments::log_likelihood(const ModelParams& params) const {
    if (!feasible) {
        return -std::numeric_limits<double>::infinity();
    }
    double compensated = 0.0;
    for (int u = 0; u < num_types; ++u) {
        compensated += total_time * params.mu(u);
        for (int v = 0; v < num_types; ++v) {
            for (std::size_t m = 0; m < num_bases; ++m) {
                compensated += params.a(u, v, m) * compensator[static_cast<std::size_t>(v) * num_bases + m];
            }
        }
    }
    return event_term - compensated;
}

EventFeatures build_features(const Dataset& data, const BasisConfig& basis) {
    EventFeatures f = layout(data, basis);
    const std::size_t w = static_cast<std::size_t>(f.num_types) * f.num_bases;
    std::vector<std::vector<double>> comp(data.size(), std::vector<double>(w, 0.0));
    const auto C = static_cast<std::ptrdiff_t>(data.size());
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t c = 0; c < C; ++c) {
        const auto cc = static_cast<std::size_t>(c);
        sequence_features(data[cc], basis, f.num_types, f.history.data() + f.offsets[cc] * w, comp[cc].data());
    }
    for (const auto& part : comp) {
        for (std::size_t k = 0; k < w; ++k) {
            f.compensator[k] += part[k];
        }
    }
    return f;
}

EmMoments em_moments(const EventFeatures& f, const ModelParams& params) {
    check_params(f, params);
    EmMoments mo = empty_moments(f);
    const auto U = static_cast<std::size_t>(f.num_types);
    const auto C = static_cast<std::ptrdiff_t>(f.num_sequences());
    std::vector<Partial> parts(f.num_sequences());
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t c = 0; c < C; ++c) {
        const auto cc = static_cast<std::size_t>(c);
        Partial& p = parts[cc];
        p.baseline.assign(U, 0.0);
        p.ratio.assign(U * U * f.num_bases, 0.0);
        accumulate_events(f, params, f.offsets[cc], f.offsets[cc + 1], p);
    }
    for (const auto& p : parts) {
        mo.feasible = mo.feasible && p.feasible;
        mo.event_term += p.event_term;
        for (std::size_t u = 0; u < U; ++u) {
            mo.baseline_mass[u] += p.baseline[u];
        }
        for (std::size_t k = 0; k < p.ratio.size(); ++k) {
            mo.excitation_ratio[k] += p.ratio[k];
        }
    }
    finish(mo, params);
    return mo;
}

double log_likelihood(const EventFeatures& features, const ModelParams& params) {
    return em_moments(features, params).log_likelihood(params);
}

double relative_change(const ModelParams& next, const ModelParams& prev) {
    double diff = 0.0;
    double base = 0.0;
    for (int u = 0; u < prev.num_types(); ++u) {
        const double d = next.mu(u) - prev.mu(u);
        diff += d * d;
        base += prev.mu(u) * prev.mu(u);
    }
    const auto& a = next.coefficients();
    const auto& b = prev.coefficients();
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double d = a[k] - b[k];
        diff += d * d;
        base += b[k] * b[k];
    }
    return std::sqrt(diff) / std::max(std::sqrt(base), 1e-300);
}

namespace serial {

EventFeatures build_features(const Dataset& data, const BasisConfig& basis) {
    EventFeatures f = layout(data, basis);
    const std::size_t w = static_cast<std::size_t>(f.num_types) * f.num_bases;
    for (std::size_t c = 0; c < data.size(); ++c) {
        std::vector<double> comp(w, 0.0);
        sequence_features(data[c], basis, f.num_types, f.history.data() + f.offsets[c] * w, comp.data());
        for (std::size_t k = 0; k < w; ++k) {
            f.compensator[k] += comp[k];
        }
    }
    return f;
}

EmMoments em_moments(const EventFeatures& f, const ModelParams& params) {
    check_params(f, params);
    EmMoments mo = empty_moments(f);
    const auto U = static_cast<std::size_t>(f.num_types);
    for (std::size_t c = 0; c < f.num_sequences(); ++c) {
        Partial p;
        p.baseline.assign(U, 0.0);
        p.ratio.assign(U * U * f.num_bases, 0.0);
        accumulate_events(f, params, f.offsets[c], f.offsets[c + 1], p);
        mo.feasible = mo.feasible && p.feasible;
        mo.event_term += p.event_term;
        for (std::size_t u = 0; u < U; ++u) {
            mo.baseline_mass[u] += p.baseline[u];
        }
        for (std::size_t k = 0; k < p.ratio.size(); ++k) {
            mo.excitation_ratio[k] += p.ratio[k];
        }
    }
    finish(mo, params);
    return mo;
}

EmMoments em_moments_direct(const Dataset& data, const BasisConfig& basis, const ModelParams& params) {
    check_dimensions(params, basis, data);
    const int U = data.num_types();
    const std::size_t M = basis.size();
    EmMoments mo;
    mo.num_types = U;
    mo.num_bases = M;
    mo.baseline_mass.assign(static_cast<std::size_t>(U), 0.0);
    mo.excitation_ratio.assign(static_cast<std::size_t>(U * U) * M, 0.0);
    mo.compensator.assign(static_cast<std::size_t>(U) * M, 0.0);
    mo.total_time = data.total_time();
    mo.num_events = data.total_events();

    for (const auto& seq : data.sequences()) {
        const auto& ev = seq.events();
        for (std::size_t i = 0; i < ev.size(); ++i) {
            const int u = ev[i].type;
            double lambda = params.mu(u);
            for (std::size_t j = 0; j < i; ++j) {
                for (std::size_t m = 0; m < M; ++m) {
                    lambda += params.a(u, ev[j].type, m) * kernel(basis, m, ev[i].time - ev[j].time);
                }
            }
            for (std::size_t m = 0; m < M; ++m) {
                mo.compensator[static_cast<std::size_t>(u) * M + m] +=
                    kernel_cumulative(basis, m, seq.horizon() - ev[i].time);
            }
            if (!(lambda > 0.0)) {
                mo.feasible = false;
                continue;
            }
            mo.event_term += std::log(lambda);
            mo.baseline_mass[static_cast<std::size_t>(u)] += params.mu(u) / lambda;
            for (std::size_t j = 0; j < i; ++j) {
                for (std::size_t m = 0; m < M; ++m) {
                    mo.excitation_ratio[mo.index(u, ev[j].type, m)] +=
                        kernel(basis, m, ev[i].time - ev[j].time) / lambda;
                }
            }
        }
    }
    finish(mo, params);
    return mo;
}

}  // namespace serial

}  // namespace hawkes
