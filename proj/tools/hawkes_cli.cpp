// hawkes: simulate, select-basis, fit, evaluate, experiment, sweep.
//
// Every flag may also come from a JSON document given by --config, either at
// the top level or under the subcommand's name; flags on the command line win.

#include <cstdlib>
#include <algorithm>
#include <cstring>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hawkes/basis.hpp"
#include "hawkes/eval.hpp"
#include "hawkes/experiment.hpp"
#include "hawkes/io.hpp"
#include "hawkes/learn.hpp"
#include "hawkes/parallel.hpp"
#include "hawkes/simulate.hpp"

using nlohmann::json;
using namespace hawkes;

namespace {

json g_config = json::object();

std::optional<std::string> config_path(int argc, char** argv) {
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--config") == 0 && i + 1 < argc) {
            return std::string(argv[i + 1]);
        }
        if (std::strncmp(argv[i], "--config=", 9) == 0) {
            return std::string(argv[i] + 9);
        }
    }
    return std::nullopt;
}

const json* lookup(const std::string& section, const std::string& flag) {
    std::string underscored = flag;
    std::replace(underscored.begin(), underscored.end(), '-', '_');
    for (const json* scope : {g_config.contains(section) ? &g_config[section] : nullptr, &g_config}) {
        if (scope == nullptr || !scope->is_object()) {
            continue;
        }
        for (const auto& key : {flag, underscored}) {
            if (scope->contains(key)) {
                return &(*scope)[key];
            }
        }
    }
    return nullptr;
}

// Registers --flag bound to var, seeding var from the config file.
template <typename T>
CLI::Option* opt(CLI::App* app, const std::string& flag, T& var, const std::string& help) {
    if (const json* v = lookup(app->get_name(), flag)) {
        var = v->get<T>();
    }
    return app->add_option("--" + flag, var, help)->capture_default_str();
}

CLI::Option* flag_opt(CLI::App* app, const std::string& flag, bool& var, const std::string& help) {
    if (const json* v = lookup(app->get_name(), flag)) {
        var = v->get<bool>();
    }
    return app->add_flag("--" + flag, var, help);
}

std::vector<std::vector<int>> parse_clusters_arg(const std::string& s) {
    // "1,2,3;4,5"
    std::vector<std::vector<int>> out;
    std::stringstream groups(s);
    std::string g;
    while (std::getline(groups, g, ';')) {
        std::vector<int> members;
        std::stringstream items(g);
        std::string item;
        while (std::getline(items, item, ',')) {
            if (!item.empty()) {
                members.push_back(std::stoi(item) - 1);
            }
        }
        if (!members.empty()) {
            out.push_back(members);
        }
    }
    return out;
}

ClusterStructure load_clusters(const std::string& arg, int U) {
    if (std::filesystem::exists(arg)) {
        return io::clusters_from_json(io::read_json(arg), U);
    }
    return ClusterStructure(parse_clusters_arg(arg), U);
}

void print_json(const json& doc, const std::string& out) {
    if (out.empty() || out == "-") {
        std::cout << doc.dump(2) << '\n';
    } else {
        io::write_json(out, doc);
    }
}

struct SimulateArgs {
    std::string family = "sine";
    std::string window = "continuous";
    std::size_t num_seq = 500;
    double horizon = 50.0;
    int num_types = 5;
    std::uint64_t seed = 0;
    std::string out;
    std::string truth;
};

struct BasisArgs {
    std::string data;
    double rho = 0.01;
    double epsilon = 0.0;
    double horizon = 0.0;
    std::string tail = "exact";
    int num_types = 0;
    std::string out;
};

struct FitArgs {
    std::string data;
    std::string basis;
    std::string method;
    double alpha_s = 0.0;
    double alpha_g = 0.0;
    double alpha_p = 0.0;
    std::string clusters;
    double eta = 0.0;
    int inner_max = 100;
    int outer_max = 50;
    double inner_tol = 1e-5;
    double outer_tol = 1e-5;
    std::uint64_t seed = 0;
    int num_types = 0;
    std::string out;
    std::string report;
};

struct EvalArgs {
    std::string model;
    std::string truth;
    std::string test;
    double tol = kDefaultGraphTolerance;
    double grid_step = 0.0;
    std::string out;
};

struct ExperimentArgs {
    std::string family = "sine";
    std::string window = "continuous";
    std::vector<std::size_t> sizes{50, 100, 150, 200, 250};
    int trials = 10;
    std::size_t test_size = 250;
    std::size_t pool_size = 500;
    double horizon = 50.0;
    int num_types = 5;
    std::vector<std::string> methods{"MLE", "MLE-SGLP"};
    double alpha_s = 10.0;
    double alpha_g = 100.0;
    double alpha_p = 1000.0;
    std::string clusters = "1,2,3;4,5";
    double rho = 0.01;
    double eta = 0.0;
    int inner_max = 100;
    int outer_max = 50;
    std::uint64_t seed = 0;
    std::string out_dir = "experiment_out";
    bool quiet = false;
};

struct SweepArgs {
    std::string data;
    std::string test;
    std::string basis;
    std::string family = "sine";
    std::size_t train_size = 250;
    std::size_t test_size = 250;
    double horizon = 50.0;
    int num_types = 5;
    double grid_min = 1e-2;
    double grid_max = 1e4;
    std::size_t grid_points = 7;
    std::vector<std::string> profiles{"alpha_s", "alpha_g", "alpha_p"};
    double alpha_s = 10.0;
    double alpha_g = 100.0;
    double alpha_p = 1000.0;
    std::string clusters = "1,2,3;4,5";
    double rho = 0.01;
    double eta = 0.0;
    int inner_max = 100;
    int outer_max = 50;
    std::uint64_t seed = 0;
    std::string out = "sweep.csv";
};

void run_simulate(const SimulateArgs& a) {
    SyntheticConfig sc;
    sc.num_types = a.num_types;
    sc.num_sequences = a.num_seq;
    sc.horizon = a.horizon;
    sc.family = kernel_family_from_string(a.family);
    sc.window = support_window_from_string(a.window);
    sc.seed = a.seed;
    const auto syn = make_synthetic(sc);
    if (a.out.empty() || a.out == "-") {
        io::write_dataset(std::cout, syn.data);
    } else {
        io::write_dataset(a.out, syn.data);
    }
    if (!a.truth.empty()) {
        io::write_json(a.truth, io::to_json(syn.truth));
    }
}

void run_select_basis(const BasisArgs& a) {
    const Dataset data = io::read_dataset(a.data, a.num_types);
    const double horizon = a.horizon > 0.0 ? a.horizon : data.max_horizon();
    const auto form = a.tail == "exact" ? TailBound::exact
                      : a.tail == "non-decaying" ? TailBound::non_decaying
                                                 : throw std::invalid_argument("--tail must be exact or non-decaying");
    const auto sel = a.epsilon > 0.0 ? select_basis(data, a.epsilon, horizon, form)
                                     : select_basis_relative(data, a.rho, horizon, form);
    json doc = io::to_json(sel.basis);
    doc["bandwidth"] = sel.estimate.bandwidth;
    doc["total_events"] = sel.estimate.total_events;
    doc["epsilon"] = sel.estimate.residual_bound;
    doc["degenerate"] = sel.degenerate;
    print_json(doc, a.out);
}

void run_fit(const FitArgs& a) {
    const Dataset data = io::read_dataset(a.data, a.num_types);
    const json bdoc = io::read_json(a.basis);
    const BasisConfig basis = io::basis_from_json(bdoc.contains("basis") ? bdoc.at("basis") : bdoc);
    LearnConfig cfg;
    std::optional<ClusterStructure> clusters;
    if (!a.clusters.empty()) {
        clusters = load_clusters(a.clusters, data.num_types());
    }
    if (!a.method.empty()) {
        cfg = LearnConfig::for_method(method_from_string(a.method), a.alpha_s, a.alpha_g, a.alpha_p, clusters);
    } else {
        cfg.alpha_s = a.alpha_s;
        cfg.alpha_g = a.alpha_g;
        cfg.alpha_p = a.alpha_p;
        cfg.clusters = clusters;
    }
    cfg.eta = a.eta;
    cfg.inner_max = a.inner_max;
    cfg.outer_max = a.outer_max;
    cfg.inner_tol = a.inner_tol;
    cfg.outer_tol = a.outer_tol;
    cfg.seed = a.seed;
    const auto res = fit(data, basis, cfg);
    print_json(io::to_json(res.params, basis), a.out);
    if (!a.report.empty()) {
        json rep = io::to_json(res.report);
        rep["graph"] = io::to_json(extract_graph(res.params));
        io::write_json(a.report, rep);
    }
}

void run_evaluate(const EvalArgs& a) {
    const auto model = io::model_from_json(io::read_json(a.model));
    const auto truth = io::truth_from_json(io::read_json(a.truth));
    const Dataset test = io::read_dataset(a.test, model.params.num_types());
    EvalReport r;
    r.loglike_test = loglike_test(model.params, model.basis, test);
    r.e_mu = relative_error_mu(model.params.mu_vector(), truth.mu());
    r.e_phi = relative_error_phi(model.params, model.basis, truth, model.basis.horizon(), a.grid_step);
    r.graph = score_graph(extract_graph(model.params, a.tol), truth.graph());
    print_json(io::to_json(r), a.out);
}

void run_experiment_cmd(const ExperimentArgs& a) {
    ExperimentPlan plan;
    plan.family = kernel_family_from_string(a.family);
    plan.window = support_window_from_string(a.window);
    plan.training_sizes = a.sizes;
    plan.num_trials = a.trials;
    plan.test_size = a.test_size;
    plan.pool_size = a.pool_size;
    plan.horizon = a.horizon;
    plan.num_types = a.num_types;
    plan.methods.clear();
    for (const auto& m : a.methods) {
        plan.methods.push_back(method_from_string(m));
    }
    plan.alpha_s = a.alpha_s;
    plan.alpha_g = a.alpha_g;
    plan.alpha_p = a.alpha_p;
    plan.clusters = parse_clusters_arg(a.clusters);
    plan.rho = a.rho;
    plan.learn.eta = a.eta;
    plan.learn.inner_max = a.inner_max;
    plan.learn.outer_max = a.outer_max;
    plan.seed = a.seed;
    Progress progress;
    if (!a.quiet) {
        progress = [](const ExperimentRow& r) {
            std::cerr << r.method << " C=" << r.train_size << " trial=" << r.trial << " loglike=" << r.loglike
                      << " e_phi=" << r.e_phi << " absent_f1=" << r.absent_f1 << " " << r.status << '\n';
        };
    }
    const auto res = run_experiment(plan, a.out_dir, progress);
    json summary = json::array();
    for (const auto& s : res.summary) {
        summary.push_back({{"method", s.method},
                           {"train_size", s.train_size},
                           {"loglike", s.loglike.mean},
                           {"e_phi", s.e_phi.mean},
                           {"absent_f1", s.absent_f1.mean}});
    }
    std::cout << summary.dump(2) << '\n';
}

void run_sweep(const SweepArgs& a) {
    SweepPlan plan;
    plan.family = kernel_family_from_string(a.family);
    plan.train_size = a.train_size;
    plan.test_size = a.test_size;
    plan.horizon = a.horizon;
    plan.num_types = a.num_types;
    plan.grid = log_grid(a.grid_min, a.grid_max, a.grid_points);
    plan.profiles = a.profiles;
    plan.alpha_s = a.alpha_s;
    plan.alpha_g = a.alpha_g;
    plan.alpha_p = a.alpha_p;
    plan.clusters = parse_clusters_arg(a.clusters);
    plan.rho = a.rho;
    plan.learn.eta = a.eta;
    plan.learn.inner_max = a.inner_max;
    plan.learn.outer_max = a.outer_max;
    plan.seed = a.seed;
    std::vector<SweepRow> rows;
    if (!a.data.empty()) {
        if (a.test.empty()) {
            throw std::invalid_argument("--data needs --test");
        }
        const Dataset train = io::read_dataset(a.data, a.num_types);
        const Dataset test = io::read_dataset(a.test, train.num_types());
        plan.num_types = train.num_types();
        const BasisConfig basis = a.basis.empty()
                                      ? select_basis_relative(train, a.rho, train.max_horizon()).basis
                                      : io::basis_from_json(io::read_json(a.basis));
        rows = sweep_hyperparameters(plan, train, test, basis, a.out);
    } else {
        rows = sweep_hyperparameters(plan, a.out);
    }
    std::cout << rows.size() << " rows written to " << a.out << '\n';
}

int fail(const std::string& kind, const std::string& message, int code) {
    std::cerr << json{{"error", kind}, {"message", message}}.dump() << '\n';
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        if (auto path = config_path(argc, argv)) {
            g_config = io::read_json(*path);
        }
    } catch (const std::exception& e) {
        return fail("config", e.what(), 2);
    }

    CLI::App app{"Multivariate Hawkes processes: simulation, sparse learning and Granger graphs"};
    app.require_subcommand(1);
    std::string config_file;
    int threads = 0;
    app.add_option("--config", config_file, "JSON file with default flag values");
    app.add_option("--threads", threads, "thread cap (overrides HG_THREADS)");

    SimulateArgs sim;
    auto* s = app.add_subcommand("simulate", "sample the synthetic benchmark");
    opt(s, "family", sim.family, "sine or pwc")->check(CLI::IsMember({"sine", "pwc"}));
    opt(s, "window", sim.window, "continuous or printed kernel support")->check(CLI::IsMember({"continuous", "printed"}));
    opt(s, "num-seq", sim.num_seq, "number of sequences");
    opt(s, "horizon", sim.horizon, "sequence length T");
    opt(s, "num-types", sim.num_types, "number of event types");
    opt(s, "seed", sim.seed, "random seed");
    opt(s, "out", sim.out, "dataset output (JSON Lines, '-' for stdout)");
    opt(s, "truth", sim.truth, "ground-truth output (JSON)");

    BasisArgs bas;
    auto* b = app.add_subcommand("select-basis", "choose the Gaussian basis family from data");
    opt(b, "data", bas.data, "dataset (JSON Lines)")->required();
    opt(b, "rho", bas.rho, "relative residual bound, epsilon = rho * pi * N");
    opt(b, "epsilon", bas.epsilon, "absolute residual bound (overrides --rho)");
    opt(b, "horizon", bas.horizon, "basis support T (default: longest sequence)");
    opt(b, "tail", bas.tail, "exact or non-decaying tail bound");
    opt(b, "num-types", bas.num_types, "number of event types (default: largest seen)");
    opt(b, "out", bas.out, "output file (default stdout)");

    FitArgs fa;
    auto* f = app.add_subcommand("fit", "learn mu and the impact functions");
    opt(f, "data", fa.data, "training dataset (JSON Lines)")->required();
    opt(f, "basis", fa.basis, "basis JSON")->required();
    opt(f, "method", fa.method, "MLE, MLE-S, MLE-GL, MLE-SGL or MLE-SGLP (masks the alphas)");
    opt(f, "alpha-s", fa.alpha_s, "lasso weight");
    opt(f, "alpha-g", fa.alpha_g, "group-lasso weight");
    opt(f, "alpha-p", fa.alpha_p, "pairwise-similarity weight");
    opt(f, "clusters", fa.clusters, "clusters JSON file or '1,2,3;4,5'");
    opt(f, "eta", fa.eta, "prox step size (0: data-scaled default)");
    opt(f, "inner-max", fa.inner_max, "inner iteration cap");
    opt(f, "outer-max", fa.outer_max, "outer iteration cap");
    opt(f, "inner-tol", fa.inner_tol, "inner relative-change tolerance");
    opt(f, "outer-tol", fa.outer_tol, "outer relative-change tolerance");
    opt(f, "seed", fa.seed, "initialization seed");
    opt(f, "num-types", fa.num_types, "number of event types (default: largest seen)");
    opt(f, "out", fa.out, "model output (default stdout)");
    opt(f, "report", fa.report, "fit report output");

    EvalArgs ea;
    auto* e = app.add_subcommand("evaluate", "score a model against the ground truth");
    opt(e, "model", ea.model, "model JSON")->required();
    opt(e, "truth", ea.truth, "ground-truth JSON")->required();
    opt(e, "test", ea.test, "held-out dataset (JSON Lines)")->required();
    opt(e, "tol", ea.tol, "graph extraction tolerance");
    opt(e, "grid-step", ea.grid_step, "kernel error grid step (0: horizon/2000)");
    opt(e, "out", ea.out, "report output (default stdout)");

    ExperimentArgs xa;
    auto* x = app.add_subcommand("experiment", "multi-trial synthetic study");
    opt(x, "family", xa.family, "sine or pwc")->check(CLI::IsMember({"sine", "pwc"}));
    opt(x, "window", xa.window, "continuous or printed kernel support");
    opt(x, "sizes", xa.sizes, "training sizes")->delimiter(',');
    opt(x, "trials", xa.trials, "number of trials");
    opt(x, "test-size", xa.test_size, "held-out sequences per trial");
    opt(x, "pool-size", xa.pool_size, "sequences drawn per trial");
    opt(x, "horizon", xa.horizon, "sequence length T");
    opt(x, "num-types", xa.num_types, "number of event types");
    opt(x, "methods", xa.methods, "methods to compare")->delimiter(',');
    opt(x, "alpha-s", xa.alpha_s, "lasso weight");
    opt(x, "alpha-g", xa.alpha_g, "group-lasso weight");
    opt(x, "alpha-p", xa.alpha_p, "pairwise-similarity weight");
    opt(x, "clusters", xa.clusters, "clusters as '1,2,3;4,5'");
    opt(x, "rho", xa.rho, "relative residual bound for basis selection");
    opt(x, "eta", xa.eta, "prox step size (0: data-scaled default)");
    opt(x, "inner-max", xa.inner_max, "inner iteration cap");
    opt(x, "outer-max", xa.outer_max, "outer iteration cap");
    opt(x, "seed", xa.seed, "master seed");
    opt(x, "out-dir", xa.out_dir, "output directory");
    flag_opt(x, "quiet", xa.quiet, "no per-row progress on stderr");

    SweepArgs wa;
    auto* w = app.add_subcommand("sweep", "held-out loglike over a hyperparameter grid");
    opt(w, "data", wa.data, "training dataset (default: synthetic)");
    opt(w, "test", wa.test, "held-out dataset");
    opt(w, "basis", wa.basis, "basis JSON (default: selected from the training data)");
    opt(w, "family", wa.family, "synthetic family, sine or pwc");
    opt(w, "train-size", wa.train_size, "synthetic training sequences");
    opt(w, "test-size", wa.test_size, "synthetic held-out sequences");
    opt(w, "horizon", wa.horizon, "synthetic sequence length");
    opt(w, "num-types", wa.num_types, "number of event types");
    opt(w, "grid-min", wa.grid_min, "smallest grid value");
    opt(w, "grid-max", wa.grid_max, "largest grid value");
    opt(w, "grid-points", wa.grid_points, "log-spaced grid points");
    opt(w, "profiles", wa.profiles, "weights to vary")->delimiter(',');
    opt(w, "alpha-s", wa.alpha_s, "fixed lasso weight");
    opt(w, "alpha-g", wa.alpha_g, "fixed group-lasso weight");
    opt(w, "alpha-p", wa.alpha_p, "fixed pairwise-similarity weight");
    opt(w, "clusters", wa.clusters, "clusters as '1,2,3;4,5'");
    opt(w, "rho", wa.rho, "relative residual bound for basis selection");
    opt(w, "eta", wa.eta, "prox step size (0: data-scaled default)");
    opt(w, "inner-max", wa.inner_max, "inner iteration cap");
    opt(w, "outer-max", wa.outer_max, "outer iteration cap");
    opt(w, "seed", wa.seed, "seed");
    opt(w, "out", wa.out, "CSV output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& ex) {
        return app.exit(ex);
    } catch (const CLI::CallForAllHelp& ex) {
        return app.exit(ex);
    } catch (const CLI::ParseError& ex) {
        return fail("usage", ex.what(), 2);
    }

    try {
        apply_thread_env();
        if (threads > 0) {
            set_thread_count(threads);
        }
        if (*s) run_simulate(sim);
        if (*b) run_select_basis(bas);
        if (*f) run_fit(fa);
        if (*e) run_evaluate(ea);
        if (*x) run_experiment_cmd(xa);
        if (*w) run_sweep(wa);
    } catch (const std::invalid_argument& ex) {
        return fail("invalid_argument", ex.what(), 1);
    } catch (const std::domain_error& ex) {
        return fail("domain_error", ex.what(), 1);
    } catch (const std::exception& ex) {
        return fail("runtime_error", ex.what(), 1);
    }
    return 0;
}
