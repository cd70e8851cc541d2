#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "hawkes/basis.hpp"

namespace hawkes {

// Event types are 0-based inside the library; file formats and the CLI use
// 1-based indices and convert at the boundary.
struct Event {
    double time = 0.0;
    int type = 0;

    bool operator==(const Event&) const = default;
};

// One realization on [0, horizon]. Events are kept sorted by (time, type);
// equal timestamps are allowed only across distinct types.
class EventSequence {
public:
    EventSequence() = default;
    EventSequence(std::vector<Event> events, double horizon);

    const std::vector<Event>& events() const noexcept { return events_; }
    double horizon() const noexcept { return horizon_; }
    std::size_t size() const noexcept { return events_.size(); }
    bool empty() const noexcept { return events_.empty(); }
    const Event& operator[](std::size_t i) const { return events_[i]; }
    int max_type() const noexcept;

    bool operator==(const EventSequence&) const = default;

private:
    std::vector<Event> events_;
    double horizon_ = 1.0;
};

class Dataset {
public:
    Dataset() = default;
    Dataset(std::vector<EventSequence> sequences, int num_types);

    const std::vector<EventSequence>& sequences() const noexcept { return sequences_; }
    int num_types() const noexcept { return num_types_; }
    std::size_t size() const noexcept { return sequences_.size(); }
    bool empty() const noexcept { return sequences_.empty(); }
    const EventSequence& operator[](std::size_t c) const { return sequences_[c]; }

    std::size_t total_events() const noexcept;
    double total_time() const noexcept;
    double max_horizon() const noexcept;

    // Sub-dataset holding the listed sequences in the given order.
    Dataset subset(std::span<const std::size_t> indices) const;

private:
    std::vector<EventSequence> sequences_;
    int num_types_ = 1;
};

// Base rates mu (U) and the coefficient tensor A (U x U x M), where
// a(u, v, m) weights basis m in the impact of type-v events on type u.
class ModelParams {
public:
    ModelParams() = default;
    ModelParams(int num_types, std::size_t num_bases);
    ModelParams(std::vector<double> mu, std::vector<double> coefficients, std::size_t num_bases);

    int num_types() const noexcept { return static_cast<int>(mu_.size()); }
    std::size_t num_bases() const noexcept { return num_bases_; }

    double mu(int u) const { return mu_[static_cast<std::size_t>(u)]; }
    double& mu(int u) { return mu_[static_cast<std::size_t>(u)]; }
    const std::vector<double>& mu_vector() const noexcept { return mu_; }
    std::vector<double>& mu_vector() noexcept { return mu_; }

    double a(int u, int v, std::size_t m) const { return coef_[index(u, v, m)]; }
    double& a(int u, int v, std::size_t m) { return coef_[index(u, v, m)]; }

    // The group a_{uv} = [a(u,v,0) .. a(u,v,M-1)].
    std::span<const double> group(int u, int v) const;
    std::span<double> group(int u, int v);
    double group_norm(int u, int v) const;

    const std::vector<double>& coefficients() const noexcept { return coef_; }
    std::vector<double>& coefficients() noexcept { return coef_; }

    // Throws std::invalid_argument on negative or non-finite entries.
    void validate() const;

    bool operator==(const ModelParams&) const = default;

private:
    std::size_t index(int u, int v, std::size_t m) const {
        const auto U = mu_.size();
        return (static_cast<std::size_t>(u) * U + static_cast<std::size_t>(v)) * num_bases_ + m;
    }

    std::vector<double> mu_;
    std::vector<double> coef_;
    std::size_t num_bases_ = 0;
};

// Partition of the event types into clusters. peers(u) is the cluster of u
// without u itself.
class ClusterStructure {
public:
    ClusterStructure() = default;
    ClusterStructure(std::vector<std::vector<int>> clusters, int num_types);

    int num_types() const noexcept { return static_cast<int>(membership_.size()); }
    const std::vector<std::vector<int>>& clusters() const noexcept { return clusters_; }
    const std::vector<int>& peers(int u) const { return peers_.at(static_cast<std::size_t>(u)); }
    bool are_peers(int u, int v) const;

private:
    std::vector<std::vector<int>> clusters_;
    std::vector<int> membership_;
    std::vector<std::vector<int>> peers_;
};

// adjacency(u, v) == true means the edge v -> u (type-v events excite type u).
class GrangerGraph {
public:
    GrangerGraph() = default;
    explicit GrangerGraph(int num_types);

    int num_types() const noexcept { return num_types_; }
    bool edge(int u, int v) const { return adj_[index(u, v)] != 0; }
    void set_edge(int u, int v, bool present) { adj_[index(u, v)] = present ? 1 : 0; }
    std::size_t num_edges() const noexcept;

    bool operator==(const GrangerGraph&) const = default;

private:
    std::size_t index(int u, int v) const;

    int num_types_ = 0;
    std::vector<unsigned char> adj_;
};

inline constexpr double kDefaultGraphTolerance = 1e-7;

// phi_{uv}(t) = sum_m a(u,v,m) kappa_m(t).
double impact_function(const ModelParams& params, const BasisConfig& basis, int u, int v, double t);

// lambda_u(t) = mu_u + sum_{t_i < t} phi_{u,u_i}(t - t_i). Throws
// std::out_of_range when t lies outside [0, horizon].
double intensity(const ModelParams& params, const BasisConfig& basis, const EventSequence& seq,
                 int u, double t);

// Log-likelihood summed over sequences. The history of event i is the events
// before it in (time, type) order. Returns -infinity when an observed event
// has zero intensity; throws std::invalid_argument on dimension mismatch.
// Sequences are evaluated in parallel and reduced in sequence order.
double log_likelihood(const ModelParams& params, const BasisConfig& basis, const Dataset& data);

// Log-likelihood contribution of a single sequence.
double sequence_log_likelihood(const ModelParams& params, const BasisConfig& basis,
                               const EventSequence& seq);

// Edge v -> u present iff ||a_{uv}||_2 > tol.
GrangerGraph extract_graph(const ModelParams& params, double tol = kDefaultGraphTolerance);

struct BranchingReport {
    Eigen::MatrixXd matrix;  // entry (u, v) = integral of phi_{uv} over [0, inf)
    double spectral_radius = 0.0;
};

BranchingReport branching_matrix(const ModelParams& params, const BasisConfig& basis);

double spectral_radius(const Eigen::MatrixXd& m);

// Throws std::invalid_argument unless params, basis and data agree on U and M.
void check_dimensions(const ModelParams& params, const BasisConfig& basis, const Dataset& data);

namespace serial {

// Single-threaded reference for log_likelihood.
double log_likelihood(const ModelParams& params, const BasisConfig& basis, const Dataset& data);

}  // namespace serial

}  // namespace hawkes
