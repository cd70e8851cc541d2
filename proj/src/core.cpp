#include "hawkes/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace hawkes {

// ---------------------------------------------------------------- sequences

EventSequence::EventSequence(std::vector<Event> events, double horizon)
    : events_(std::move(events)), horizon_(horizon) {
    if (!(horizon_ > 0.0) || !std::isfinite(horizon_)) {
        throw std::invalid_argument("sequence horizon must be finite and positive");
    }
    for (const auto& e : events_) {
        if (!std::isfinite(e.time) || e.time < 0.0 || e.time > horizon_) {
            throw std::invalid_argument("event time " + std::to_string(e.time) + " outside [0, horizon]");
        }
        if (e.type < 0) {
            throw std::invalid_argument("event type must be nonnegative");
        }
    }
    std::stable_sort(events_.begin(), events_.end(), [](const Event& a, const Event& b) {
        return a.time < b.time || (a.time == b.time && a.type < b.type);
    });
    for (std::size_t i = 1; i < events_.size(); ++i) {
        if (events_[i].time == events_[i - 1].time && events_[i].type == events_[i - 1].type) {
            throw std::invalid_argument("simultaneous events of the same type");
        }
    }
}

int EventSequence::max_type() const noexcept {
    int m = -1;
    for (const auto& e : events_) {
        m = std::max(m, e.type);
    }
    return m;
}

Dataset::Dataset(std::vector<EventSequence> sequences, int num_types)
    : sequences_(std::move(sequences)), num_types_(num_types) {
    if (num_types_ < 1) {
        throw std::invalid_argument("dataset needs at least one event type");
    }
    for (const auto& s : sequences_) {
        if (s.max_type() >= num_types_) {
            throw std::invalid_argument("event type exceeds the number of types");
        }
    }
}

std::size_t Dataset::total_events() const noexcept {
    std::size_t n = 0;
    for (const auto& s : sequences_) {
        n += s.size();
    }
    return n;
}

double Dataset::total_time() const noexcept {
    double t = 0.0;
    for (const auto& s : sequences_) {
        t += s.horizon();
    }
    return t;
}

double Dataset::max_horizon() const noexcept {
    double t = 0.0;
    for (const auto& s : sequences_) {
        t = std::max(t, s.horizon());
    }
    return t;
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
    std::vector<EventSequence> out;
    out.reserve(indices.size());
    for (auto c : indices) {
        out.push_back(sequences_.at(c));
    }
    return Dataset(std::move(out), num_types_);
}

// ---------------------------------------------------------------- parameters

ModelParams::ModelParams(int num_types, std::size_t num_bases)
    : mu_(static_cast<std::size_t>(std::max(num_types, 0)), 0.0),
      coef_(mu_.size() * mu_.size() * num_bases, 0.0),
      num_bases_(num_bases) {
    if (num_types < 1 || num_bases < 1) {
        throw std::invalid_argument("model needs U >= 1 and M >= 1");
    }
}

ModelParams::ModelParams(std::vector<double> mu, std::vector<double> coefficients, std::size_t num_bases)
    : mu_(std::move(mu)), coef_(std::move(coefficients)), num_bases_(num_bases) {
    if (mu_.empty() || num_bases_ < 1) {
        throw std::invalid_argument("model needs U >= 1 and M >= 1");
    }
    if (coef_.size() != mu_.size() * mu_.size() * num_bases_) {
        throw std::invalid_argument("coefficient tensor size does not match U x U x M");
    }
    validate();
}

std::span<const double> ModelParams::group(int u, int v) const {
    return {coef_.data() + index(u, v, 0), num_bases_};
}

std::span<double> ModelParams::group(int u, int v) {
    return {coef_.data() + index(u, v, 0), num_bases_};
}

double ModelParams::group_norm(int u, int v) const {
    double ss = 0.0;
    for (double x : group(u, v)) {
        ss += x * x;
    }
    return std::sqrt(ss);
}

void ModelParams::validate() const {
    for (double x : mu_) {
        if (!std::isfinite(x) || x < 0.0) {
            throw std::invalid_argument("base rates must be finite and nonnegative");
        }
    }
    for (double x : coef_) {
        if (!std::isfinite(x) || x < 0.0) {
            throw std::invalid_argument("coefficients must be finite and nonnegative");
        }
    }
}

// ---------------------------------------------------------------- clusters, graph

ClusterStructure::ClusterStructure(std::vector<std::vector<int>> clusters, int num_types)
    : clusters_(std::move(clusters)),
      membership_(static_cast<std::size_t>(std::max(num_types, 0)), -1),
      peers_(membership_.size()) {
    if (num_types < 1) {
        throw std::invalid_argument("cluster structure needs at least one type");
    }
    for (std::size_t k = 0; k < clusters_.size(); ++k) {
        if (clusters_[k].empty()) {
            throw std::invalid_argument("clusters must be nonempty");
        }
        for (int u : clusters_[k]) {
            if (u < 0 || u >= num_types) {
                throw std::invalid_argument("cluster member out of range");
            }
            if (membership_[static_cast<std::size_t>(u)] != -1) {
                throw std::invalid_argument("clusters must be disjoint");
            }
            membership_[static_cast<std::size_t>(u)] = static_cast<int>(k);
        }
    }
    for (int m : membership_) {
        if (m == -1) {
            throw std::invalid_argument("clusters must cover every type");
        }
    }
    for (const auto& cluster : clusters_) {
        for (int u : cluster) {
            for (int v : cluster) {
                if (v != u) {
                    peers_[static_cast<std::size_t>(u)].push_back(v);
                }
            }
        }
    }
    for (auto& p : peers_) {
        std::sort(p.begin(), p.end());
    }
}

bool ClusterStructure::are_peers(int u, int v) const {
    return u != v && membership_.at(static_cast<std::size_t>(u)) == membership_.at(static_cast<std::size_t>(v));
}

GrangerGraph::GrangerGraph(int num_types)
    : num_types_(num_types), adj_(static_cast<std::size_t>(num_types * num_types), 0) {
    if (num_types < 1) {
        throw std::invalid_argument("graph needs at least one node");
    }
}

std::size_t GrangerGraph::index(int u, int v) const {
    if (u < 0 || v < 0 || u >= num_types_ || v >= num_types_) {
        throw std::out_of_range("graph node out of range");
    }
    return static_cast<std::size_t>(u * num_types_ + v);
}

std::size_t GrangerGraph::num_edges() const noexcept {
    return static_cast<std::size_t>(std::count(adj_.begin(), adj_.end(), 1));
}

// ---------------------------------------------------------------- operations

namespace {

void check_type(const ModelParams& params, int u) {
    if (u < 0 || u >= params.num_types()) {
        throw std::out_of_range("event type index out of range");
    }
}

}  // namespace

void check_dimensions(const ModelParams& params, const BasisConfig& basis, const Dataset& data) {
    if (params.num_types() != data.num_types()) {
        throw std::invalid_argument("model and dataset disagree on the number of types");
    }
    if (params.num_bases() != basis.size()) {
        throw std::invalid_argument("model and basis disagree on the number of bases");
    }
}

double impact_function(const ModelParams& params, const BasisConfig& basis, int u, int v, double t) {
    check_type(params, u);
    check_type(params, v);
    if (params.num_bases() != basis.size()) {
        throw std::invalid_argument("model and basis disagree on the number of bases");
    }
    double phi = 0.0;
    const auto g = params.group(u, v);
    for (std::size_t m = 0; m < g.size(); ++m) {
        if (g[m] != 0.0) {
            phi += g[m] * kernel(basis, m, t);
        }
    }
    return phi;
}

double intensity(const ModelParams& params, const BasisConfig& basis, const EventSequence& seq, int u,
                 double t) {
    check_type(params, u);
    if (!(t >= 0.0 && t <= seq.horizon())) {
        throw std::out_of_range("intensity queried outside the observation window");
    }
    double lambda = params.mu(u);
    for (const auto& e : seq.events()) {
        if (!(e.time < t)) {
            break;
        }
        lambda += impact_function(params, basis, u, e.type, t - e.time);
    }
    return lambda;
}

double sequence_log_likelihood(const ModelParams& params, const BasisConfig& basis, const EventSequence& seq) {
    const int U = params.num_types();
    const std::size_t M = basis.size();
    const auto& ev = seq.events();
    const double T = seq.horizon();

    double loglik = 0.0;
    for (std::size_t i = 0; i < ev.size(); ++i) {
        const int ui = ev[i].type;
        double lambda = params.mu(ui);
        for (std::size_t j = 0; j < i; ++j) {
            const auto g = params.group(ui, ev[j].type);
            const double tau = ev[i].time - ev[j].time;
            for (std::size_t m = 0; m < M; ++m) {
                if (g[m] != 0.0) {
                    lambda += g[m] * kernel(basis, m, tau);
                }
            }
        }
        if (!(lambda > 0.0)) {
            return -std::numeric_limits<double>::infinity();
        }
        loglik += std::log(lambda);
    }

    double compensator = 0.0;
    for (int u = 0; u < U; ++u) {
        compensator += T * params.mu(u);
    }
    std::vector<double> cum(M);
    for (const auto& e : ev) {
        for (std::size_t m = 0; m < M; ++m) {
            cum[m] = kernel_cumulative(basis, m, T - e.time);
        }
        for (int u = 0; u < U; ++u) {
            const auto g = params.group(u, e.type);
            for (std::size_t m = 0; m < M; ++m) {
                compensator += g[m] * cum[m];
            }
        }
    }
    return loglik - compensator;
}

double log_likelihood(const ModelParams& params, const BasisConfig& basis, const Dataset& data) {
    check_dimensions(params, basis, data);
    const auto C = static_cast<std::ptrdiff_t>(data.size());
    std::vector<double> partial(data.size(), 0.0);
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t c = 0; c < C; ++c) {
        partial[static_cast<std::size_t>(c)] = sequence_log_likelihood(params, basis, data[static_cast<std::size_t>(c)]);
    }
    double total = 0.0;
    for (double p : partial) {
        total += p;
    }
    return total;
}

namespace serial {

double log_likelihood(const ModelParams& params, const BasisConfig& basis, const Dataset& data) {
    check_dimensions(params, basis, data);
    double total = 0.0;
    for (const auto& seq : data.sequences()) {
        total += sequence_log_likelihood(params, basis, seq);
    }
    return total;
}

}  // namespace serial

GrangerGraph extract_graph(const ModelParams& params, double tol) {
    const int U = params.num_types();
    GrangerGraph g(U);
    for (int u = 0; u < U; ++u) {
        for (int v = 0; v < U; ++v) {
            g.set_edge(u, v, params.group_norm(u, v) > tol);
        }
    }
    return g;
}

double spectral_radius(const Eigen::MatrixXd& m) {
    if (m.size() == 0) {
        return 0.0;
    }
    Eigen::EigenSolver<Eigen::MatrixXd> solver(m, false);
    return solver.eigenvalues().cwiseAbs().maxCoeff();
}

BranchingReport branching_matrix(const ModelParams& params, const BasisConfig& basis) {
    if (params.num_bases() != basis.size()) {
        throw std::invalid_argument("model and basis disagree on the number of bases");
    }
    const int U = params.num_types();
    std::vector<double> mass(basis.size());
    for (std::size_t m = 0; m < basis.size(); ++m) {
        mass[m] = kernel_total_mass(basis, m);
    }
    BranchingReport r;
    r.matrix = Eigen::MatrixXd::Zero(U, U);
    for (int u = 0; u < U; ++u) {
        for (int v = 0; v < U; ++v) {
            const auto g = params.group(u, v);
            r.matrix(u, v) = std::inner_product(g.begin(), g.end(), mass.begin(), 0.0);
        }
    }
    r.spectral_radius = spectral_radius(r.matrix);
    return r;
}

}  // namespace hawkes
