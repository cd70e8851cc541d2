#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "hawkes/core.hpp"

// Data-parallel kernels behind the learner. The EM updates only ever need,
// for every event i, the basis-projected history
//
//     g_i[v][m] = sum_{j < i, u_j = v} kappa_m(t_i - t_j)
//
// and, per type v, the compensator mass H[v][m] = sum_{i: u_i = v} K_m(T_c - t_i).
// Both depend on the data and the basis only, so they are computed once and
// every EM iteration becomes O(N U M) instead of O(N^2 M).
//
// Each kernel has an OpenMP version (parallel over sequences, partial sums
// reduced in sequence order, so results do not depend on the thread count)
// and a plain serial reference in hawkes::serial used by the tests and the
// benchmark.

namespace hawkes {

struct EventFeatures {
    int num_types = 0;
    std::size_t num_bases = 0;
    std::vector<std::size_t> offsets;   // C + 1 entries into the event arrays
    std::vector<int> types;             // per event
    std::vector<double> history;        // per event, U * M values of g_i
    std::vector<double> compensator;    // U * M values of H
    std::vector<double> horizons;       // per sequence
    double total_time = 0.0;

    std::size_t num_events() const noexcept { return types.size(); }
    std::size_t num_sequences() const noexcept { return horizons.size(); }
    std::span<const double> row(std::size_t i) const {
        const auto w = static_cast<std::size_t>(num_types) * num_bases;
        return {history.data() + i * w, w};
    }
    std::size_t type_count(int u) const;
};

// Sufficient statistics of one E-step at the current parameters.
struct EmMoments {
    int num_types = 0;
    std::size_t num_bases = 0;
    std::vector<double> baseline_mass;     // U: sum_{i: u_i = u} p_ii
    std::vector<double> excitation_ratio;  // U*U*M: sum_{i: u_i = u} g_i[v][m] / lambda_i
    std::vector<double> excitation_mass;   // U*U*M: sum of p_ij^m, i.e. a(u,v,m) * ratio
    std::vector<double> compensator;       // U*M, copy of EventFeatures::compensator
    double total_time = 0.0;
    double event_term = 0.0;               // sum_i log lambda_i
    bool feasible = true;                  // false if some lambda_i <= 0
    std::size_t num_events = 0;

    std::size_t index(int u, int v, std::size_t m) const {
        return (static_cast<std::size_t>(u) * static_cast<std::size_t>(num_types) + static_cast<std::size_t>(v)) *
                   num_bases + m;
    }

    // Log-likelihood at the parameters the moments were taken at.
    double log_likelihood(const ModelParams& params) const;
};

EventFeatures build_features(const Dataset& data, const BasisConfig& basis);

EmMoments em_moments(const EventFeatures& features, const ModelParams& params);

// Log-likelihood through the precomputed features.
double log_likelihood(const EventFeatures& features, const ModelParams& params);

// Relative change ||x - y|| / max(||y||, tiny) over mu and A jointly.
double relative_change(const ModelParams& next, const ModelParams& prev);

namespace serial {

EventFeatures build_features(const Dataset& data, const BasisConfig& basis);

EmMoments em_moments(const EventFeatures& features, const ModelParams& params);

// Moments from the raw event pairs, without the feature cache. O(N^2 M).
EmMoments em_moments_direct(const Dataset& data, const BasisConfig& basis, const ModelParams& params);

}  // namespace serial

}  // namespace hawkes
