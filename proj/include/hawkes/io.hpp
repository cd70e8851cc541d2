#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "hawkes/basis.hpp"
#include "hawkes/core.hpp"
#include "hawkes/eval.hpp"
#include "hawkes/learn.hpp"
#include "hawkes/simulate.hpp"

// File formats. Event types are 1-based in every file.
//   dataset  JSON Lines, one {"T": real, "events": [[t, u], ...]} per line
//   model    {"U", "M", "mu", "A": U x U x M, "basis": {...}}
//   basis    {"M", "omega0", "sigma", "centers", "horizon"}
//   clusters [[1, 2, 3], [4, 5]] or {"clusters": [...]}
//   truth    {"U", "family", "window", "mu", "pairs", "adjacency"} for sine
//            families, {"U", "family", "mu", "model", "adjacency"} otherwise;
//            adjacency[u][v] = 1 means the edge v -> u

namespace hawkes::io {

using nlohmann::json;

json read_json(const std::string& path);
void write_json(const std::string& path, const json& doc);

// num_types <= 0 takes U from the largest type seen.
Dataset read_dataset(std::istream& in, int num_types = 0);
Dataset read_dataset(const std::string& path, int num_types = 0);
void write_dataset(std::ostream& out, const Dataset& data);
void write_dataset(const std::string& path, const Dataset& data);

json to_json(const BasisConfig& basis);
BasisConfig basis_from_json(const json& doc);

json to_json(const ModelParams& params, const BasisConfig& basis);
struct Model {
    ModelParams params;
    BasisConfig basis;
};
Model model_from_json(const json& doc);

json to_json(const ClusterStructure& clusters);
ClusterStructure clusters_from_json(const json& doc, int num_types);

json to_json(const GrangerGraph& graph);
GrangerGraph graph_from_json(const json& doc);

json to_json(const GroundTruth& truth);
GroundTruth truth_from_json(const json& doc);

json to_json(const FitReport& report);
json to_json(const GraphScores& scores);
json to_json(const EvalReport& report);

}  // namespace hawkes::io
