#include "hawkes/io.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace hawkes::io {

namespace {

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open '" + path + "' for reading");
    }
    return in;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot open '" + path + "' for writing");
    }
    return out;
}

json nan_to_null(double x) {
    return std::isfinite(x) ? json(x) : json(nullptr);
}

}  // namespace

json read_json(const std::string& path) {
    auto in = open_in(path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw std::runtime_error("'" + path + "' is not valid JSON: " + e.what());
    }
}

void write_json(const std::string& path, const json& doc) {
    auto out = open_out(path);
    out << doc.dump(2) << '\n';
}

Dataset read_dataset(std::istream& in, int num_types) {
    std::vector<EventSequence> seqs;
    int max_type = 0;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        try {
            const json doc = json::parse(line);
            std::vector<Event> ev;
            for (const auto& e : doc.at("events")) {
                const int u = e.at(1).get<int>();
                if (u < 1) {
                    throw std::invalid_argument("event types are 1-based");
                }
                max_type = std::max(max_type, u);
                ev.push_back({e.at(0).get<double>(), u - 1});
            }
            seqs.emplace_back(std::move(ev), doc.at("T").get<double>());
        } catch (const std::exception& e) {
            throw std::invalid_argument("dataset line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return Dataset(std::move(seqs), num_types > 0 ? num_types : std::max(max_type, 1));
}

Dataset read_dataset(const std::string& path, int num_types) {
    auto in = open_in(path);
    return read_dataset(in, num_types);
}

void write_dataset(std::ostream& out, const Dataset& data) {
    for (const auto& seq : data.sequences()) {
        json ev = json::array();
        for (const auto& e : seq.events()) {
            ev.push_back(json::array({e.time, e.type + 1}));
        }
        out << json{{"T", seq.horizon()}, {"events", ev}}.dump() << '\n';
    }
}

void write_dataset(const std::string& path, const Dataset& data) {
    auto out = open_out(path);
    write_dataset(out, data);
}

json to_json(const BasisConfig& basis) {
    return {{"M", basis.size()},
            {"omega0", basis.omega0()},
            {"sigma", basis.sigma()},
            {"centers", basis.centers()},
            {"horizon", basis.horizon()}};
}

BasisConfig basis_from_json(const json& doc) {
    const auto centers = doc.at("centers").get<std::vector<double>>();
    double sigma = 0.0;
    if (doc.contains("sigma")) {
        sigma = doc.at("sigma").get<double>();
    } else {
        sigma = 1.0 / doc.at("omega0").get<double>();
    }
    double horizon = 0.0;
    if (doc.contains("horizon")) {
        horizon = doc.at("horizon").get<double>();
    } else if (centers.size() > 1) {
        horizon = static_cast<double>(centers.size()) * (centers[1] - centers[0]);
    } else {
        horizon = std::max(centers.empty() ? 0.0 : centers[0], std::numbers::pi * sigma);
    }
    if (doc.contains("M") && doc.at("M").get<std::size_t>() != centers.size()) {
        throw std::invalid_argument("basis: M does not match the number of centers");
    }
    return BasisConfig(centers, sigma, horizon);
}

json to_json(const ModelParams& params, const BasisConfig& basis) {
    const int U = params.num_types();
    json a = json::array();
    for (int u = 0; u < U; ++u) {
        json row = json::array();
        for (int v = 0; v < U; ++v) {
            const auto g = params.group(u, v);
            row.push_back(std::vector<double>(g.begin(), g.end()));
        }
        a.push_back(row);
    }
    return {{"U", U}, {"M", params.num_bases()}, {"mu", params.mu_vector()}, {"A", a}, {"basis", to_json(basis)}};
}

Model model_from_json(const json& doc) {
    const int U = doc.at("U").get<int>();
    const auto M = doc.at("M").get<std::size_t>();
    auto mu = doc.at("mu").get<std::vector<double>>();
    const auto& a = doc.at("A");
    if (static_cast<int>(mu.size()) != U || static_cast<int>(a.size()) != U) {
        throw std::invalid_argument("model: mu and A must have U rows");
    }
    std::vector<double> coef;
    coef.reserve(static_cast<std::size_t>(U * U) * M);
    for (const auto& row : a) {
        if (static_cast<int>(row.size()) != U) {
            throw std::invalid_argument("model: A must be U x U x M");
        }
        for (const auto& g : row) {
            const auto vals = g.get<std::vector<double>>();
            if (vals.size() != M) {
                throw std::invalid_argument("model: A must be U x U x M");
            }
            coef.insert(coef.end(), vals.begin(), vals.end());
        }
    }
    BasisConfig basis = basis_from_json(doc.at("basis"));
    if (basis.size() != M) {
        throw std::invalid_argument("model: basis size differs from M");
    }
    return {ModelParams(std::move(mu), std::move(coef), M), std::move(basis)};
}

json to_json(const ClusterStructure& clusters) {
    json out = json::array();
    for (const auto& c : clusters.clusters()) {
        json members = json::array();
        for (int u : c) {
            members.push_back(u + 1);
        }
        out.push_back(members);
    }
    return out;
}

ClusterStructure clusters_from_json(const json& doc, int num_types) {
    const json& list = doc.is_object() ? doc.at("clusters") : doc;
    std::vector<std::vector<int>> clusters;
    for (const auto& c : list) {
        std::vector<int> members;
        for (const auto& u : c) {
            members.push_back(u.get<int>() - 1);
        }
        clusters.push_back(std::move(members));
    }
    return ClusterStructure(std::move(clusters), num_types);
}

json to_json(const GrangerGraph& graph) {
    json out = json::array();
    for (int u = 0; u < graph.num_types(); ++u) {
        json row = json::array();
        for (int v = 0; v < graph.num_types(); ++v) {
            row.push_back(graph.edge(u, v) ? 1 : 0);
        }
        out.push_back(row);
    }
    return out;
}

GrangerGraph graph_from_json(const json& doc) {
    const int U = static_cast<int>(doc.size());
    GrangerGraph g(U);
    for (int u = 0; u < U; ++u) {
        if (static_cast<int>(doc[static_cast<std::size_t>(u)].size()) != U) {
            throw std::invalid_argument("adjacency must be square");
        }
        for (int v = 0; v < U; ++v) {
            const auto& x = doc[static_cast<std::size_t>(u)][static_cast<std::size_t>(v)];
            g.set_edge(u, v, x.is_boolean() ? x.get<bool>() : x.get<int>() != 0);
        }
    }
    return g;
}

json to_json(const GroundTruth& truth) {
    const int U = truth.num_types();
    json doc = {{"U", U}, {"family", to_string(truth.family())}, {"mu", truth.mu()}};
    if (truth.family() == KernelFamily::basis_expansion) {
        doc["model"] = to_json(*truth.params(), *truth.basis());
    } else {
        doc["window"] = to_string(truth.window());
        json pairs = json::array();
        for (int u = 0; u < U; ++u) {
            json row = json::array();
            for (int v = 0; v < U; ++v) {
                const auto& p = truth.pair(u, v);
                if (p.active) {
                    row.push_back({{"b", p.amplitude}, {"omega", p.frequency}, {"s", p.phase}});
                } else {
                    row.push_back(nullptr);
                }
            }
            pairs.push_back(row);
        }
        doc["pairs"] = pairs;
    }
    doc["adjacency"] = to_json(truth.graph());
    doc["spectral_radius"] = truth.spectral_radius();
    return doc;
}

GroundTruth truth_from_json(const json& doc) {
    const auto family = kernel_family_from_string(doc.at("family").get<std::string>());
    if (family == KernelFamily::basis_expansion) {
        auto m = model_from_json(doc.at("model"));
        return GroundTruth::expansion(std::move(m.params), std::move(m.basis));
    }
    const int U = doc.at("U").get<int>();
    auto mu = doc.at("mu").get<std::vector<double>>();
    const auto& rows = doc.at("pairs");
    if (static_cast<int>(rows.size()) != U) {
        throw std::invalid_argument("truth: pairs must be U x U");
    }
    std::vector<SinePair> pairs;
    for (const auto& row : rows) {
        if (static_cast<int>(row.size()) != U) {
            throw std::invalid_argument("truth: pairs must be U x U");
        }
        for (const auto& p : row) {
            SinePair sp;
            if (!p.is_null()) {
                sp = {p.at("b").get<double>(), p.at("omega").get<double>(), p.at("s").get<int>(), true};
            }
            pairs.push_back(sp);
        }
    }
    const auto window = doc.contains("window") ? support_window_from_string(doc.at("window").get<std::string>())
                                               : SupportWindow::continuous;
    return GroundTruth::sine(std::move(mu), std::move(pairs), family, window);
}

json to_json(const FitReport& r) {
    return {{"objective_trace", r.objective_trace},
            {"loglik_trace", r.loglik_trace},
            {"surrogate_before", r.surrogate_before},
            {"surrogate_after", r.surrogate_after},
            {"inner_iterations", r.inner_iterations},
            {"prox_steps", r.prox_steps},
            {"outer_iterations", r.outer_iterations},
            {"converged", r.converged},
            {"final_objective", r.final_objective},
            {"final_loglik", r.final_loglik},
            {"eta", r.eta},
            {"zero_groups", r.zero_groups}};
}

json to_json(const GraphScores& s) {
    return {{"precision", s.present.precision},
            {"recall", s.present.recall},
            {"f1", s.present.f1},
            {"absent_precision", s.absent.precision},
            {"absent_recall", s.absent.recall},
            {"absent_f1", s.absent.f1},
            {"absent_total", s.absent_total},
            {"absent_recovered", s.absent_recovered}};
}

json to_json(const EvalReport& r) {
    json doc = {{"loglike_test", r.loglike_test},
                {"e_mu", r.e_mu},
                {"e_phi", r.e_phi.mean},
                {"e_phi_pairs", r.e_phi.pairs_used},
                {"zero_mass_pairs", r.e_phi.zero_mass_pairs}};
    json per_pair = json::array();
    for (double e : r.e_phi.per_pair) {
        per_pair.push_back(nan_to_null(e));
    }
    doc["e_phi_per_pair"] = per_pair;
    const json graph = to_json(r.graph);
    for (const auto& [k, v] : graph.items()) {
        doc["edge_" + k] = v;
    }
    return doc;
}

}  // namespace hawkes::io
