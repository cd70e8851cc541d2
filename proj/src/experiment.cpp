#include "hawkes/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "hawkes/eval.hpp"
#include "hawkes/io.hpp"
#include "hawkes/rng.hpp"
#include "hawkes/stats.hpp"

namespace hawkes {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string hex64(std::uint64_t x) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
    return buf;
}

// FNV-1a over the compact JSON dump; object keys are sorted, so the hash
// depends only on the values.
std::string hash_json(const json& doc) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : doc.dump()) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return hex64(h);
}

std::string num(double x) {
    if (std::isnan(x)) {
        return "nan";
    }
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

json learn_knobs(const LearnConfig& c) {
    return {{"eta", c.eta},
            {"inner_max", c.inner_max},
            {"outer_max", c.outer_max},
            {"inner_tol", c.inner_tol},
            {"outer_tol", c.outer_tol}};
}

void read_knobs(const json& doc, LearnConfig& c) {
    c.eta = doc.value("eta", c.eta);
    c.inner_max = doc.value("inner_max", c.inner_max);
    c.outer_max = doc.value("outer_max", c.outer_max);
    c.inner_tol = doc.value("inner_tol", c.inner_tol);
    c.outer_tol = doc.value("outer_tol", c.outer_tol);
}

json clusters_to_json(const std::vector<std::vector<int>>& clusters) {
    json out = json::array();
    for (const auto& c : clusters) {
        json m = json::array();
        for (int u : c) {
            m.push_back(u + 1);
        }
        out.push_back(m);
    }
    return out;
}

std::vector<std::vector<int>> clusters_from(const json& doc) {
    std::vector<std::vector<int>> out;
    for (const auto& c : doc) {
        std::vector<int> m;
        for (const auto& u : c) {
            m.push_back(u.get<int>() - 1);
        }
        out.push_back(std::move(m));
    }
    return out;
}

std::optional<ClusterStructure> make_clusters(const std::vector<std::vector<int>>& clusters, int U) {
    if (clusters.empty()) {
        return std::nullopt;
    }
    return ClusterStructure(clusters, U);
}

std::vector<std::size_t> shuffled(std::size_t n, std::uint64_t seed) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    CounterRng rng(seed, 0x73706C6974);  // "split"
    for (std::size_t i = n; i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng() % i);
        std::swap(idx[i - 1], idx[j]);
    }
    return idx;
}

SummaryStat stat_of(const std::vector<double>& v) {
    const auto s = summarize(v);
    if (s.count == 0) {
        return {kNaN, kNaN};
    }
    return {s.mean, s.stddev};
}

json stat_json(const SummaryStat& s) {
    auto f = [](double x) { return std::isfinite(x) ? json(x) : json(nullptr); };
    return {{"mean", f(s.mean)}, {"std", f(s.std)}};
}

std::ofstream open_out(const std::filesystem::path& p) {
    std::ofstream out(p);
    if (!out) {
        throw std::runtime_error("cannot open '" + p.string() + "' for writing");
    }
    return out;
}

void write_outputs(const ExperimentPlan& plan, const ExperimentResult& res, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    const fs::path root(dir);
    {
        auto out = open_out(root / "rows.csv");
        out << experiment_csv_header() << '\n';
        for (const auto& r : res.rows) {
            out << csv_line(r) << '\n';
        }
    }
    {
        auto out = open_out(root / "summary.csv");
        out << "method,train_size,trials_ok,trials_failed,loglike_mean,loglike_std,e_mu_mean,e_mu_std,"
               "e_phi_mean,e_phi_std,f1_mean,f1_std,absent_f1_mean,absent_f1_std\n";
        for (const auto& s : res.summary) {
            out << s.method << ',' << s.train_size << ',' << s.trials_ok << ',' << s.trials_failed << ','
                << num(s.loglike.mean) << ',' << num(s.loglike.std) << ',' << num(s.e_mu.mean) << ','
                << num(s.e_mu.std) << ',' << num(s.e_phi.mean) << ',' << num(s.e_phi.std) << ','
                << num(s.f1.mean) << ',' << num(s.f1.std) << ',' << num(s.absent_f1.mean) << ','
                << num(s.absent_f1.std) << '\n';
        }
    }
    {
        json rows = json::array();
        for (const auto& s : res.summary) {
            rows.push_back({{"method", s.method},
                            {"train_size", s.train_size},
                            {"trials_ok", s.trials_ok},
                            {"trials_failed", s.trials_failed},
                            {"loglike", stat_json(s.loglike)},
                            {"e_mu", stat_json(s.e_mu)},
                            {"e_phi", stat_json(s.e_phi)},
                            {"f1", stat_json(s.f1)},
                            {"absent_f1", stat_json(s.absent_f1)}});
        }
        io::write_json((root / "summary.json").string(),
                       {{"config_hash", plan.hash()}, {"plan", plan.to_json()}, {"summary", rows}});
    }
    const std::vector<std::pair<std::string, SummaryStat SummaryRow::*>> metrics{
        {"loglike", &SummaryRow::loglike}, {"e_mu", &SummaryRow::e_mu}, {"e_phi", &SummaryRow::e_phi},
        {"absent_f1", &SummaryRow::absent_f1}};
    for (const auto& [name, field] : metrics) {
        auto out = open_out(root / ("plot_" + name + ".csv"));
        out << "train_size";
        for (Method m : plan.methods) {
            out << ',' << to_string(m) << "_mean," << to_string(m) << "_std";
        }
        out << '\n';
        for (std::size_t c : plan.training_sizes) {
            out << c;
            for (Method m : plan.methods) {
                const auto it = std::find_if(res.summary.begin(), res.summary.end(), [&](const SummaryRow& s) {
                    return s.method == to_string(m) && s.train_size == c;
                });
                const SummaryStat st = it == res.summary.end() ? SummaryStat{kNaN, kNaN} : (*it).*field;
                out << ',' << num(st.mean) << ',' << num(st.std);
            }
            out << '\n';
        }
    }
}

void fail_row(ExperimentRow& row, const std::string& what) {
    row.status = "error: " + what;
    for (double* x : {&row.loglike, &row.e_mu, &row.e_phi, &row.precision, &row.recall, &row.f1,
                      &row.absent_precision, &row.absent_recall, &row.absent_f1}) {
        *x = kNaN;
    }
}

}  // namespace

void ExperimentPlan::validate() const {
    if (num_types < 1 || num_trials < 1 || test_size < 1 || training_sizes.empty() || methods.empty()) {
        throw std::invalid_argument("experiment plan needs types, trials, a test set, training sizes and methods");
    }
    if (!(horizon > 0.0) || !(rho > 0.0)) {
        throw std::invalid_argument("experiment plan needs positive horizon and rho");
    }
    const auto largest = *std::max_element(training_sizes.begin(), training_sizes.end());
    if (std::find(training_sizes.begin(), training_sizes.end(), std::size_t{0}) != training_sizes.end()) {
        throw std::invalid_argument("training sizes must be positive");
    }
    if (largest + test_size > pool_size) {
        throw std::invalid_argument("pool too small for the largest training set plus the test set");
    }
    LearnConfig probe = learn;
    probe.alpha_s = alpha_s;
    probe.alpha_g = alpha_g;
    probe.alpha_p = alpha_p;
    probe.clusters = make_clusters(clusters, num_types);
    if (std::find(methods.begin(), methods.end(), Method::mle_sglp) == methods.end()) {
        probe.alpha_p = 0.0;
    }
    probe.validate(num_types);
}

json ExperimentPlan::to_json() const {
    json methods_j = json::array();
    for (Method m : methods) {
        methods_j.push_back(to_string(m));
    }
    return {{"family", to_string(family)},
            {"window", to_string(window)},
            {"num_types", num_types},
            {"pool_size", pool_size},
            {"test_size", test_size},
            {"training_sizes", training_sizes},
            {"num_trials", num_trials},
            {"horizon", horizon},
            {"methods", methods_j},
            {"alpha_s", alpha_s},
            {"alpha_g", alpha_g},
            {"alpha_p", alpha_p},
            {"clusters", clusters_to_json(clusters)},
            {"rho", rho},
            {"seed", seed},
            {"learn", learn_knobs(learn)}};
}

ExperimentPlan ExperimentPlan::from_json(const json& doc) {
    ExperimentPlan p;
    if (doc.contains("family")) p.family = kernel_family_from_string(doc.at("family").get<std::string>());
    if (doc.contains("window")) p.window = support_window_from_string(doc.at("window").get<std::string>());
    p.num_types = doc.value("num_types", p.num_types);
    p.pool_size = doc.value("pool_size", p.pool_size);
    p.test_size = doc.value("test_size", p.test_size);
    if (doc.contains("training_sizes")) p.training_sizes = doc.at("training_sizes").get<std::vector<std::size_t>>();
    p.num_trials = doc.value("num_trials", p.num_trials);
    p.horizon = doc.value("horizon", p.horizon);
    if (doc.contains("methods")) {
        p.methods.clear();
        for (const auto& m : doc.at("methods")) {
            p.methods.push_back(method_from_string(m.get<std::string>()));
        }
    }
    p.alpha_s = doc.value("alpha_s", p.alpha_s);
    p.alpha_g = doc.value("alpha_g", p.alpha_g);
    p.alpha_p = doc.value("alpha_p", p.alpha_p);
    if (doc.contains("clusters")) p.clusters = clusters_from(doc.at("clusters"));
    p.rho = doc.value("rho", p.rho);
    p.seed = doc.value("seed", p.seed);
    if (doc.contains("learn")) read_knobs(doc.at("learn"), p.learn);
    return p;
}

std::string ExperimentPlan::hash() const {
    return hash_json(to_json());
}

std::uint64_t trial_seed(std::uint64_t master, int trial) {
    return CounterRng::mix(master ^ CounterRng::mix(static_cast<std::uint64_t>(trial) + 0x747269616CULL));
}

std::string experiment_csv_header() {
    return "method,train_size,trial,seed,config_hash,status,alpha_s,alpha_g,alpha_p,num_bases,omega0,loglike,e_mu,"
           "e_phi,precision,recall,f1,absent_precision,absent_recall,absent_f1,absent_recovered,absent_total,"
           "zero_groups,outer_iterations,converged";
}

std::string csv_line(const ExperimentRow& r) {
    std::string status = r.status;
    std::replace(status.begin(), status.end(), ',', ';');
    std::replace(status.begin(), status.end(), '\n', ' ');
    std::ostringstream os;
    os << r.method << ',' << r.train_size << ',' << r.trial << ',' << r.seed << ',' << r.config_hash << ','
       << status << ',' << num(r.alpha_s) << ',' << num(r.alpha_g) << ',' << num(r.alpha_p) << ',' << r.num_bases
       << ',' << num(r.omega0) << ',' << num(r.loglike) << ',' << num(r.e_mu) << ',' << num(r.e_phi) << ','
       << num(r.precision) << ',' << num(r.recall) << ',' << num(r.f1) << ',' << num(r.absent_precision) << ','
       << num(r.absent_recall) << ',' << num(r.absent_f1) << ',' << r.absent_recovered << ',' << r.absent_total
       << ',' << r.zero_groups << ',' << r.outer_iterations << ',' << (r.converged ? 1 : 0);
    return os.str();
}

std::vector<SummaryRow> summarize_rows(const std::vector<ExperimentRow>& rows) {
    std::vector<std::pair<std::string, std::size_t>> keys;
    for (const auto& r : rows) {
        const std::pair<std::string, std::size_t> k{r.method, r.train_size};
        if (std::find(keys.begin(), keys.end(), k) == keys.end()) {
            keys.push_back(k);
        }
    }
    std::vector<SummaryRow> out;
    for (const auto& [method, c] : keys) {
        SummaryRow s;
        s.method = method;
        s.train_size = c;
        std::vector<double> ll, emu, ephi, f1, af1;
        for (const auto& r : rows) {
            if (r.method != method || r.train_size != c) {
                continue;
            }
            if (r.status != "ok") {
                ++s.trials_failed;
                continue;
            }
            ++s.trials_ok;
            ll.push_back(r.loglike);
            emu.push_back(r.e_mu);
            ephi.push_back(r.e_phi);
            f1.push_back(r.f1);
            af1.push_back(r.absent_f1);
        }
        s.loglike = stat_of(ll);
        s.e_mu = stat_of(emu);
        s.e_phi = stat_of(ephi);
        s.f1 = stat_of(f1);
        s.absent_f1 = stat_of(af1);
        out.push_back(s);
    }
    return out;
}

ExperimentResult run_experiment(const ExperimentPlan& plan, const std::optional<std::string>& out_dir,
                                const Progress& progress) {
    plan.validate();
    const std::string hash = plan.hash();
    const auto clusters = make_clusters(plan.clusters, plan.num_types);
    ExperimentResult res;

    for (int trial = 0; trial < plan.num_trials; ++trial) {
        const std::uint64_t seed = trial_seed(plan.seed, trial);
        SyntheticConfig sc;
        sc.num_types = plan.num_types;
        sc.num_sequences = plan.pool_size;
        sc.horizon = plan.horizon;
        sc.family = plan.family;
        sc.window = plan.window;
        sc.seed = seed;
        const auto syn = make_synthetic(sc);
        const auto order = shuffled(plan.pool_size, seed);
        const std::vector<std::size_t> test_idx(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(plan.test_size));
        const std::vector<std::size_t> pool(order.begin() + static_cast<std::ptrdiff_t>(plan.test_size), order.end());
        const Dataset test = syn.data.subset(test_idx);

        for (std::size_t c : plan.training_sizes) {
            const Dataset train = syn.data.subset(std::span<const std::size_t>(pool.data(), c));
            std::optional<BasisConfig> basis;
            std::optional<EventFeatures> features;
            std::string setup_error;
            try {
                basis = select_basis_relative(train, plan.rho, train.max_horizon()).basis;
                features = build_features(train, *basis);
            } catch (const std::exception& e) {
                setup_error = e.what();
            }
            for (Method m : plan.methods) {
                ExperimentRow row;
                row.method = to_string(m);
                row.train_size = c;
                row.trial = trial;
                row.seed = seed;
                row.config_hash = hash;
                LearnConfig cfg = LearnConfig::for_method(m, plan.alpha_s, plan.alpha_g, plan.alpha_p, clusters);
                row.alpha_s = cfg.alpha_s;
                row.alpha_g = cfg.alpha_g;
                row.alpha_p = cfg.alpha_p;
                if (!basis) {
                    fail_row(row, setup_error);
                } else {
                    row.num_bases = basis->size();
                    row.omega0 = basis->omega0();
                    cfg.eta = plan.learn.eta;
                    cfg.inner_max = plan.learn.inner_max;
                    cfg.outer_max = plan.learn.outer_max;
                    cfg.inner_tol = plan.learn.inner_tol;
                    cfg.outer_tol = plan.learn.outer_tol;
                    cfg.seed = seed;
                    try {
                        const auto fitted = fit(*features, *basis, cfg);
                        const auto ev = evaluate(fitted.params, *basis, syn.truth, test);
                        row.loglike = ev.loglike_test;
                        row.e_mu = ev.e_mu;
                        row.e_phi = ev.e_phi.mean;
                        row.precision = ev.graph.present.precision;
                        row.recall = ev.graph.present.recall;
                        row.f1 = ev.graph.present.f1;
                        row.absent_precision = ev.graph.absent.precision;
                        row.absent_recall = ev.graph.absent.recall;
                        row.absent_f1 = ev.graph.absent.f1;
                        row.absent_recovered = ev.graph.absent_recovered;
                        row.absent_total = ev.graph.absent_total;
                        row.zero_groups = fitted.report.zero_groups;
                        row.outer_iterations = fitted.report.outer_iterations;
                        row.converged = fitted.report.converged;
                    } catch (const std::exception& e) {
                        fail_row(row, e.what());
                    }
                }
                if (progress) {
                    progress(row);
                }
                res.rows.push_back(std::move(row));
            }
        }
    }
    res.summary = summarize_rows(res.rows);
    if (out_dir) {
        write_outputs(plan, res, *out_dir);
    }
    return res;
}

std::vector<double> log_grid(double lo, double hi, std::size_t n) {
    if (!(lo > 0.0) || !(hi >= lo) || n == 0) {
        throw std::invalid_argument("log_grid needs 0 < lo <= hi and n >= 1");
    }
    if (n == 1) {
        return {lo};
    }
    std::vector<double> g(n);
    const double a = std::log10(lo);
    const double b = std::log10(hi);
    for (std::size_t i = 0; i < n; ++i) {
        g[i] = std::pow(10.0, a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
    }
    g.front() = lo;
    g.back() = hi;
    return g;
}

void SweepPlan::validate() const {
    if (grid.empty() || profiles.empty()) {
        throw std::invalid_argument("sweep needs a nonempty grid and at least one profile");
    }
    for (const auto& p : profiles) {
        if (p != "alpha_s" && p != "alpha_g" && p != "alpha_p") {
            throw std::invalid_argument("unknown sweep profile '" + p + "'");
        }
    }
    for (double x : grid) {
        if (!(x >= 0.0)) {
            throw std::invalid_argument("sweep grid values must be nonnegative");
        }
    }
    if (num_types < 1 || train_size < 1 || test_size < 1 || !(horizon > 0.0) || !(rho > 0.0)) {
        throw std::invalid_argument("sweep plan needs types, train/test sizes, horizon and rho");
    }
}

json SweepPlan::to_json() const {
    return {{"family", to_string(family)},
            {"window", to_string(window)},
            {"num_types", num_types},
            {"train_size", train_size},
            {"test_size", test_size},
            {"horizon", horizon},
            {"grid", grid},
            {"profiles", profiles},
            {"alpha_s", alpha_s},
            {"alpha_g", alpha_g},
            {"alpha_p", alpha_p},
            {"clusters", clusters_to_json(clusters)},
            {"rho", rho},
            {"seed", seed},
            {"learn", learn_knobs(learn)}};
}

SweepPlan SweepPlan::from_json(const json& doc) {
    SweepPlan p;
    if (doc.contains("family")) p.family = kernel_family_from_string(doc.at("family").get<std::string>());
    if (doc.contains("window")) p.window = support_window_from_string(doc.at("window").get<std::string>());
    p.num_types = doc.value("num_types", p.num_types);
    p.train_size = doc.value("train_size", p.train_size);
    p.test_size = doc.value("test_size", p.test_size);
    p.horizon = doc.value("horizon", p.horizon);
    if (doc.contains("grid")) p.grid = doc.at("grid").get<std::vector<double>>();
    if (doc.contains("profiles")) p.profiles = doc.at("profiles").get<std::vector<std::string>>();
    p.alpha_s = doc.value("alpha_s", p.alpha_s);
    p.alpha_g = doc.value("alpha_g", p.alpha_g);
    p.alpha_p = doc.value("alpha_p", p.alpha_p);
    if (doc.contains("clusters")) p.clusters = clusters_from(doc.at("clusters"));
    p.rho = doc.value("rho", p.rho);
    p.seed = doc.value("seed", p.seed);
    if (doc.contains("learn")) read_knobs(doc.at("learn"), p.learn);
    return p;
}

std::string SweepPlan::hash() const {
    return hash_json(to_json());
}

std::vector<SweepRow> sweep_hyperparameters(const SweepPlan& plan, const Dataset& train, const Dataset& test,
                                            const BasisConfig& basis, const std::optional<std::string>& out_csv) {
    plan.validate();
    const std::string hash = plan.hash();
    const auto features = build_features(train, basis);
    const auto clusters = make_clusters(plan.clusters, train.num_types());
    std::vector<SweepRow> rows;
    for (const auto& profile : plan.profiles) {
        for (double x : plan.grid) {
            SweepRow row;
            row.profile = profile;
            row.value = x;
            row.alpha_s = profile == "alpha_s" ? x : plan.alpha_s;
            row.alpha_g = profile == "alpha_g" ? x : plan.alpha_g;
            row.alpha_p = profile == "alpha_p" ? x : plan.alpha_p;
            row.seed = plan.seed;
            row.config_hash = hash;
            LearnConfig cfg = plan.learn;
            cfg.alpha_s = row.alpha_s;
            cfg.alpha_g = row.alpha_g;
            cfg.alpha_p = row.alpha_p;
            cfg.clusters = clusters;
            cfg.seed = plan.seed;
            try {
                const auto fitted = fit(features, basis, cfg);
                row.loglike = loglike_test(fitted.params, basis, test);
                row.zero_groups = fitted.report.zero_groups;
            } catch (const std::exception& e) {
                row.status = std::string("error: ") + e.what();
                row.loglike = kNaN;
            }
            rows.push_back(std::move(row));
        }
    }
    if (out_csv) {
        auto out = open_out(*out_csv);
        out << "profile,value,alpha_s,alpha_g,alpha_p,loglike,zero_groups,status,seed,config_hash\n";
        for (const auto& r : rows) {
            std::string status = r.status;
            std::replace(status.begin(), status.end(), ',', ';');
            out << r.profile << ',' << num(r.value) << ',' << num(r.alpha_s) << ',' << num(r.alpha_g) << ','
                << num(r.alpha_p) << ',' << num(r.loglike) << ',' << r.zero_groups << ',' << status << ','
                << r.seed << ',' << r.config_hash << '\n';
        }
    }
    return rows;
}

std::vector<SweepRow> sweep_hyperparameters(const SweepPlan& plan, const std::optional<std::string>& out_csv) {
    plan.validate();
    SyntheticConfig sc;
    sc.num_types = plan.num_types;
    sc.num_sequences = plan.train_size + plan.test_size;
    sc.horizon = plan.horizon;
    sc.family = plan.family;
    sc.window = plan.window;
    sc.seed = plan.seed;
    const auto syn = make_synthetic(sc);
    std::vector<std::size_t> train_idx(plan.train_size);
    std::iota(train_idx.begin(), train_idx.end(), std::size_t{0});
    std::vector<std::size_t> test_idx(plan.test_size);
    std::iota(test_idx.begin(), test_idx.end(), plan.train_size);
    const Dataset train = syn.data.subset(train_idx);
    const Dataset test = syn.data.subset(test_idx);
    const auto basis = select_basis_relative(train, plan.rho, train.max_horizon()).basis;
    return sweep_hyperparameters(plan, train, test, basis, out_csv);
}

}  // namespace hawkes
