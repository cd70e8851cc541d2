#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hawkes/learn.hpp"
#include "hawkes/simulate.hpp"

namespace hawkes {

// Multi-trial synthetic study. Every trial draws a fresh pool of sequences
// from a fresh ground truth, holds out test_size of them and fits each method
// on nested random training subsets of the remaining pool.
struct ExperimentPlan {
    KernelFamily family = KernelFamily::sine_like;
    SupportWindow window = SupportWindow::continuous;
    int num_types = 5;
    std::size_t pool_size = 500;
    std::size_t test_size = 250;
    std::vector<std::size_t> training_sizes{50, 100, 150, 200, 250};
    int num_trials = 10;
    double horizon = 50.0;
    std::vector<Method> methods{Method::mle, Method::mle_sglp};
    double alpha_s = 10.0;
    double alpha_g = 100.0;
    double alpha_p = 1000.0;
    std::vector<std::vector<int>> clusters{{0, 1, 2}, {3, 4}};  // 0-based
    double rho = 0.01;
    std::uint64_t seed = 0;
    // eta, caps and tolerances; its weights are ignored.
    LearnConfig learn;

    void validate() const;
    nlohmann::json to_json() const;
    static ExperimentPlan from_json(const nlohmann::json& doc);
    // 16 hex digits identifying the plan.
    std::string hash() const;
};

std::uint64_t trial_seed(std::uint64_t master, int trial);

struct ExperimentRow {
    std::string method;
    std::size_t train_size = 0;
    int trial = 0;
    std::uint64_t seed = 0;
    std::string config_hash;
    std::string status = "ok";
    double alpha_s = 0.0;
    double alpha_g = 0.0;
    double alpha_p = 0.0;
    std::size_t num_bases = 0;
    double omega0 = 0.0;
    double loglike = 0.0;
    double e_mu = 0.0;
    double e_phi = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double absent_precision = 0.0;
    double absent_recall = 0.0;
    double absent_f1 = 0.0;
    std::size_t absent_recovered = 0;
    std::size_t absent_total = 0;
    std::size_t zero_groups = 0;
    int outer_iterations = 0;
    bool converged = false;
};

struct SummaryStat {
    double mean = 0.0;
    double std = 0.0;
};

struct SummaryRow {
    std::string method;
    std::size_t train_size = 0;
    std::size_t trials_ok = 0;
    std::size_t trials_failed = 0;
    SummaryStat loglike;
    SummaryStat e_mu;
    SummaryStat e_phi;
    SummaryStat f1;
    SummaryStat absent_f1;
};

struct ExperimentResult {
    std::vector<ExperimentRow> rows;
    std::vector<SummaryRow> summary;
};

using Progress = std::function<void(const ExperimentRow&)>;

// out_dir, when given, receives rows.csv, summary.csv, summary.json and
// plot_<metric>.csv (one line per training size, mean and std per method).
ExperimentResult run_experiment(const ExperimentPlan& plan, const std::optional<std::string>& out_dir = std::nullopt,
                                const Progress& progress = {});

std::vector<SummaryRow> summarize_rows(const std::vector<ExperimentRow>& rows);

// n log-spaced points covering [lo, hi] exactly.
std::vector<double> log_grid(double lo, double hi, std::size_t n);

struct SweepPlan {
    KernelFamily family = KernelFamily::sine_like;
    SupportWindow window = SupportWindow::continuous;
    int num_types = 5;
    std::size_t train_size = 250;
    std::size_t test_size = 250;
    double horizon = 50.0;
    std::vector<double> grid = log_grid(1e-2, 1e4, 7);
    std::vector<std::string> profiles{"alpha_s", "alpha_g", "alpha_p"};
    double alpha_s = 10.0;
    double alpha_g = 100.0;
    double alpha_p = 1000.0;
    std::vector<std::vector<int>> clusters{{0, 1, 2}, {3, 4}};
    double rho = 0.01;
    std::uint64_t seed = 0;
    LearnConfig learn;

    void validate() const;
    nlohmann::json to_json() const;
    static SweepPlan from_json(const nlohmann::json& doc);
    std::string hash() const;
};

struct SweepRow {
    std::string profile;
    double value = 0.0;
    double alpha_s = 0.0;
    double alpha_g = 0.0;
    double alpha_p = 0.0;
    double loglike = 0.0;
    std::size_t zero_groups = 0;
    std::string status = "ok";
    std::uint64_t seed = 0;
    std::string config_hash;
};

// One fit per (profile, grid value) on fixed data. The profile's weight takes
// the grid value, the others keep the plan's values.
std::vector<SweepRow> sweep_hyperparameters(const SweepPlan& plan, const Dataset& train, const Dataset& test,
                                            const BasisConfig& basis, const std::optional<std::string>& out_csv = std::nullopt);

// Draws train and test sets from the synthetic generator first.
std::vector<SweepRow> sweep_hyperparameters(const SweepPlan& plan,
                                            const std::optional<std::string>& out_csv = std::nullopt);

std::string experiment_csv_header();
std::string csv_line(const ExperimentRow& row);

}  // namespace hawkes
