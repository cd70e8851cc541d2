#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "hawkes/basis.hpp"
#include "hawkes/core.hpp"
#include "hawkes/simulate.hpp"

namespace hawkes {

// Held-out log-likelihood; same contract as log_likelihood.
double loglike_test(const ModelParams& params, const BasisConfig& basis, const Dataset& test);

// ||est - truth||_2 / ||truth||_2. Throws std::invalid_argument on a zero
// truth vector or a length mismatch.
double relative_error_mu(const std::vector<double>& est, const std::vector<double>& truth);

// Kernel error table. Pairs whose true kernel has zero mass on the grid are
// left out of the mean and counted in zero_mass_pairs; their estimated mass
// is kept in per_pair_mass for inspection.
struct PhiError {
    double mean = 0.0;                  // over pairs with positive true mass
    std::size_t pairs_used = 0;
    std::size_t zero_mass_pairs = 0;
    std::vector<double> per_pair;       // U*U relative errors, NaN when excluded
    std::vector<double> per_pair_mass;  // U*U estimated masses of the excluded pairs, 0 otherwise
};

using KernelFn = std::function<double(int u, int v, double t)>;

// Trapezoid rule on [0, horizon] with ceil(horizon / grid_step) intervals.
PhiError relative_error_phi(const KernelFn& est, const KernelFn& truth, int num_types, double horizon,
                            double grid_step);

// grid_step <= 0 selects horizon / 2000.
PhiError relative_error_phi(const ModelParams& est, const BasisConfig& basis, const GroundTruth& truth,
                            double horizon, double grid_step = 0.0);

struct EdgeScores {
    double precision = 1.0;
    double recall = 1.0;
    double f1 = 1.0;
};

// Confusion-matrix scores, once with present edges as positives and once with
// absent edges as positives. Empty denominators count as a perfect score.
struct GraphScores {
    EdgeScores present;
    EdgeScores absent;
    std::size_t true_present = 0;
    std::size_t false_present = 0;
    std::size_t true_absent = 0;
    std::size_t false_absent = 0;
    std::size_t absent_total = 0;     // absent edges in the truth
    std::size_t absent_recovered = 0; // of those, absent in the estimate
};

GraphScores score_graph(const GrangerGraph& est, const GrangerGraph& truth);

struct ThresholdPoint {
    double tolerance = 0.0;
    GraphScores scores;
};

// Scores of extract_graph(params, tol) for each tolerance.
std::vector<ThresholdPoint> threshold_sweep(const ModelParams& params, const GrangerGraph& truth,
                                            const std::vector<double>& tolerances);

struct EvalReport {
    double loglike_test = 0.0;
    double e_mu = 0.0;
    PhiError e_phi;
    GraphScores graph;
};

EvalReport evaluate(const ModelParams& params, const BasisConfig& basis, const GroundTruth& truth,
                    const Dataset& test, double graph_tolerance = kDefaultGraphTolerance);

}  // namespace hawkes
