// ratelab: simulate interval maps and suspension flows, decompose
// observables through the transfer operator, and measure Wasserstein /
// Prokhorov distances between rescaled path processes and Brownian motion.
//
// Subcommands: decompose, simulate, distance, rates, selftest.
// Exit codes: 0 success, 2 configuration error, 3 solver/data error.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ratelab/decomp.hpp"
#include "ratelab/errors.hpp"
#include "ratelab/executor.hpp"
#include "ratelab/oracles.hpp"
#include "ratelab/otmetrics.hpp"
#include "ratelab/ratelab.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ratelab::ConfigError("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ratelab::ConfigError("cannot parse " + path + ": " + e.what());
    }
    return j;
}

std::string timestamp_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y%m%d-%H%M%S", std::gmtime(&t));
    return buf;
}

ratelab::ExperimentConfig experiment_from_file(const std::string& path,
                                               std::optional<std::uint64_t> seed,
                                               int jobs) {
    auto cfg = ratelab::ExperimentConfig::from_json(load_json(path));
    if (seed) cfg.master_seed = *seed;
    if (jobs > 0) cfg.jobs = jobs;
    return cfg;
}

int run_decompose(const std::string& config_path, const fs::path& out_dir) {
    const json j = load_json(config_path);
    std::vector<ratelab::Func> comps;
    ratelab::TransferOperator op = [&]() {
        const std::string kind = j.at("operator").value("kind", "doubling");
        if (kind == "doubling") return ratelab::TransferOperator::exact_doubling();
        if (kind == "induced-lsv") {
            const double gamma = j.at("operator").at("gamma").get<double>();
            const int grid = j.at("operator").value("grid", 4096);
            const double cutoff = j.at("operator").value("cutoff", 1e-10);
            ratelab::InducedMap induced(ratelab::MapSystem::lsv(gamma));
            return ratelab::TransferOperator::grid_gibbs_markov(induced, grid, cutoff);
        }
        throw ratelab::ConfigError("operator.kind must be 'doubling' or 'induced-lsv'");
    }();
    for (const auto& comp : j.at("observable").at("components")) {
        std::vector<ratelab::TrigPoly::Term> terms;
        for (const auto& t : comp)
            terms.push_back({t.at("k").get<int>(), t.value("a", 0.0), t.value("b", 0.0)});
        // observables are centered against the operator's invariant measure
        comps.push_back(op.centered(ratelab::Func(ratelab::TrigPoly(0.0, terms))));
    }
    const double tol = j.value("tol", 1e-10);
    ratelab::Decomposition dec = ratelab::primary_decomposition(op, comps, tol);

    json out = dec.to_json();
    out["operator"] = op.describe();
    out["branches_J"] = op.branch_count();
    out["grid_G"] = op.grid_size();
    fs::create_directories(out_dir);
    std::ofstream f(out_dir / "decomposition.json");
    f << out.dump(2) << "\n";
    std::cout << "decomposition: K=" << dec.truncation_K << " residual=" << dec.residual
              << " sigma[0][0]=" << dec.sigma(0, 0) << "\n"
              << "wrote " << (out_dir / "decomposition.json").string() << "\n";
    return 0;
}

int run_simulate(const ratelab::ExperimentConfig& cfg, const fs::path& out_dir,
                 std::size_t n_override) {
    const std::size_t n = n_override > 0 ? n_override : cfg.n_grid.back();
    ratelab::ExperimentConfig one = cfg;
    one.n_grid = {n};
    one.seeds = {cfg.replicate_seeds().front()};

    // reuse the experiment machinery by running a single cell and dumping paths
    std::vector<ratelab::PiecewisePath> process, brownian;
    const auto seeds = one.replicate_seeds();
    const std::uint64_t rep_seed = seeds.front();

    ratelab::RateReport probe = ratelab::run_rate_experiment(one);  // for sigma
    std::vector<double> times(static_cast<std::size_t>(cfg.d) + 1);
    for (int i = 0; i <= cfg.d; ++i)
        times[static_cast<std::size_t>(i)] = static_cast<double>(i) / cfg.d;

    for (int pm = 0; pm < cfg.M; ++pm)
        brownian.push_back(ratelab::sample_brownian(
            probe.sigma, cfg.d, ratelab::derive_seed(rep_seed, n, 202,
                                                     static_cast<std::uint64_t>(pm))));

    if (cfg.system.type == ratelab::SystemSpec::Type::Map) {
        std::vector<ratelab::Func> funcs;
        for (const auto& c : cfg.observable.components) funcs.emplace_back(c);
        ratelab::MapObservable obs = ratelab::MapObservable::components(funcs);
        for (int pm = 0; pm < cfg.M; ++pm) {
            ratelab::OrbitSampler sampler(
                cfg.system.map,
                ratelab::derive_seed(rep_seed, n, 101, static_cast<std::uint64_t>(pm)),
                cfg.burn_in);
            process.push_back(
                ratelab::build_Bn(sampler.sample(n), obs, n).restricted(times));
        }
    } else {
        ratelab::SuspensionFlow flow(cfg.system.map, *cfg.system.roof);
        ratelab::FlowObservable obs;
        obs.dim = cfg.observable.dim();
        obs.height_independent = true;
        auto comps = cfg.observable.components;
        obs.eval = [comps](double x, double, double* out) {
            for (std::size_t c = 0; c < comps.size(); ++c) out[c] = comps[c](x);
        };
        for (int pm = 0; pm < cfg.M; ++pm) {
            ratelab::OrbitSampler sampler(
                cfg.system.map,
                ratelab::derive_seed(rep_seed, n, 101, static_cast<std::uint64_t>(pm)),
                cfg.burn_in);
            const auto orbit =
                sampler.sample(flow.orbit_length_for(static_cast<double>(n)));
            process.push_back(ratelab::build_Wn(flow, obs, orbit, 0.0,
                                                static_cast<double>(n), cfg.d,
                                                cfg.quadrature_dt));
        }
    }

    fs::create_directories(out_dir);
    {
        std::ofstream f(out_dir / "process_paths.csv", std::ios::binary);
        ratelab::write_paths_csv(f, process);
    }
    {
        std::ofstream f(out_dir / "brownian_paths.csv", std::ios::binary);
        ratelab::write_paths_csv(f, brownian);
    }
    std::cout << "wrote " << cfg.M << " process and Brownian paths (n=" << n
              << ", d=" << cfg.d << ") under " << out_dir.string() << "\n";
    return 0;
}

int run_distance(const std::string& a_path, const std::string& b_path,
                 const std::vector<std::string>& metrics, std::uint64_t seed) {
    std::ifstream fa(a_path), fb(b_path);
    if (!fa) throw ratelab::ConfigError("cannot open " + a_path);
    if (!fb) throw ratelab::ConfigError("cannot open " + b_path);
    ratelab::EmpiricalPathMeasure mu(ratelab::read_paths_csv(fa));
    ratelab::EmpiricalPathMeasure nu(ratelab::read_paths_csv(fb));
    const ratelab::CostMatrix cost = ratelab::CostMatrix::between(mu, nu);
    json rec;
    rec["n"] = nullptr;
    rec["M"] = mu.size();
    rec["d"] = mu.paths.front().nodes() - 1;
    rec["seed"] = seed;
    for (const std::string& m : metrics) {
        if (m == "W1") rec["W1"] = ratelab::wasserstein1(cost);
        else if (m == "Pi") rec["Pi"] = ratelab::prokhorov(cost);
        else throw ratelab::ConfigError("unknown metric " + m);
    }
    std::cout << rec.dump() << "\n";
    return 0;
}

int run_rates(const ratelab::ExperimentConfig& cfg, const fs::path& out_root,
              const std::string& stamp) {
    const fs::path dir =
        out_root / cfg.name / (stamp.empty() ? timestamp_now() : stamp);
    ratelab::RateReport report = ratelab::run_rate_experiment(cfg);
    ratelab::write_report(cfg, report, dir);
    for (const auto& res : report.results) {
        std::cout << ratelab::metric_name(res.metric) << ":";
        if (res.raw_fit)
            std::cout << " slope=" << res.raw_fit->slope << " (stderr "
                      << res.raw_fit->stderr_slope << ")";
        else
            std::cout << " slope n/a (needs >= 4 grid points)";
        if (res.theory)
            std::cout << "  theory exponent=" << -res.theory->exponent
                      << " log_power=" << res.theory->log_power;
        std::cout << "\n";
    }
    std::cout << "wrote " << dir.string() << "\n";
    return 0;
}

int run_selftest(std::uint64_t seed, int jobs) {
    using namespace ratelab;
    int failures = 0;
    auto check = [&](const char* name, bool ok) {
        std::cout << (ok ? "[PASS] " : "[FAIL] ") << name << "\n";
        if (!ok) ++failures;
    };
    SplitMix64 rng(seed);

    auto random_measure = [&](int M, int d, int dim) {
        std::vector<PiecewisePath> paths;
        for (int p = 0; p < M; ++p) {
            std::vector<double> times(static_cast<std::size_t>(d) + 1);
            for (int i = 0; i <= d; ++i)
                times[static_cast<std::size_t>(i)] = static_cast<double>(i) / d;
            std::vector<double> inc(static_cast<std::size_t>(d) * dim);
            for (double& x : inc) x = rng.next_gaussian() * 0.3;
            paths.push_back(PiecewisePath::from_increments(
                times, std::vector<double>(static_cast<std::size_t>(dim), 0.0), inc,
                dim));
        }
        return EmpiricalPathMeasure(std::move(paths));
    };

    // assignment vs factorial enumeration
    bool w1_ok = true;
    for (int trial = 0; trial < 40; ++trial) {
        const int M = 2 + static_cast<int>(rng.next_u64() % 5);
        auto mu = random_measure(M, 4, 1);
        auto nu = random_measure(M, 4, 1);
        const CostMatrix cost = CostMatrix::between(mu, nu);
        if (std::abs(wasserstein1(cost) - w1_bruteforce(cost)) > 1e-10) w1_ok = false;
    }
    check("W1 assignment equals factorial brute force (M<=6)", w1_ok);

    bool pi_ok = true;
    for (int trial = 0; trial < 40; ++trial) {
        const int M = 2 + static_cast<int>(rng.next_u64() % 7);
        auto mu = random_measure(M, 4, 1);
        auto nu = random_measure(M, 4, 1);
        const CostMatrix cost = CostMatrix::between(mu, nu);
        if (prokhorov(cost) != prokhorov_bruteforce(cost)) pi_ok = false;
    }
    check("Prokhorov matching threshold equals subset brute force (M<=8)", pi_ok);

    // exact decomposition oracle on the doubling map
    {
        TransferOperator op = TransferOperator::exact_doubling();
        Decomposition dec =
            primary_decomposition(op, {Func(TrigPoly::cosine(2))});
        const bool ok = dec.residual < 1e-10 &&
                        std::abs(dec.sigma(0, 0) - 0.5) < 1e-6 &&
                        std::abs(dec.m[0](0.125) - std::cos(2.0 * 3.141592653589793 * 0.125)) < 1e-12;
        check("doubling decomposition oracle (v=cos 4 pi x)", ok);
    }

    // metric inequalities on random pairs
    {
        bool ok = true;
        for (int trial = 0; trial < 10; ++trial) {
            auto mu = random_measure(32, 8, 1);
            auto nu = random_measure(32, 8, 1);
            try {
                check_inequalities(mu, nu);
            } catch (const InequalityViolation&) {
                ok = false;
            }
        }
        check("Pi <= sqrt(W1) on random 32-atom pairs", ok);
    }

    // h-reversal involution
    {
        bool ok = true;
        for (int trial = 0; trial < 100; ++trial) {
            auto mu = random_measure(1, 16, 2);
            const PiecewisePath& f = mu.paths.front();
            if (!h_reversal(h_reversal(f)).identical(f)) ok = false;
        }
        check("h(h f) = f on pinned paths", ok);
    }

    (void)jobs;
    return failures == 0 ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dynamical-systems path-process laboratory"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    std::uint64_t seed = 0;
    bool seed_set = false;
    int jobs = 0;

    app.add_option("--config", config_path, "JSON config file");
    app.add_option("--out", out_dir, "output directory");
    auto* seed_opt = app.add_option("--seed", seed, "master seed (overrides config)");
    app.add_option("--jobs", jobs, "worker threads (default: config or 1)");

    auto* cmd_decompose = app.add_subcommand("decompose", "emit a decomposition JSON");
    auto* cmd_simulate = app.add_subcommand("simulate", "emit path CSV batches");
    std::size_t sim_n = 0;
    cmd_simulate->add_option("--n", sim_n, "path length n (default: max of n_grid)");
    auto* cmd_distance =
        app.add_subcommand("distance", "distances between two path batches");
    std::string a_path, b_path;
    std::vector<std::string> dist_metrics = {"W1", "Pi"};
    cmd_distance->add_option("--a", a_path, "first path batch CSV")->required();
    cmd_distance->add_option("--b", b_path, "second path batch CSV")->required();
    cmd_distance->add_option("--metrics", dist_metrics, "metrics to compute");
    auto* cmd_rates = app.add_subcommand("rates", "full rate experiment");
    std::string stamp;
    cmd_rates->add_option("--stamp", stamp,
                          "run directory name (default: UTC timestamp)");
    auto* cmd_selftest = app.add_subcommand("selftest", "run the oracle suites");

    // global flags may follow the subcommand
    for (auto* sub : {cmd_decompose, cmd_simulate, cmd_distance, cmd_rates, cmd_selftest})
        sub->fallthrough();

    try {
        app.parse(argc, argv);
        seed_set = seed_opt->count() > 0;
        std::optional<std::uint64_t> seed_override;
        if (seed_set) seed_override = seed;

        if (cmd_decompose->parsed()) {
            if (config_path.empty()) throw ratelab::ConfigError("--config is required");
            return run_decompose(config_path, out_dir);
        }
        if (cmd_simulate->parsed()) {
            if (config_path.empty()) throw ratelab::ConfigError("--config is required");
            return run_simulate(experiment_from_file(config_path, seed_override, jobs),
                                out_dir, sim_n);
        }
        if (cmd_distance->parsed())
            return run_distance(a_path, b_path, dist_metrics, seed_set ? seed : 0);
        if (cmd_rates->parsed()) {
            if (config_path.empty()) throw ratelab::ConfigError("--config is required");
            return run_rates(experiment_from_file(config_path, seed_override, jobs),
                             out_dir, stamp);
        }
        if (cmd_selftest->parsed())
            return run_selftest(seed_set ? seed : 0x5e1f7e57ull,
                                jobs > 0 ? jobs : ratelab::default_jobs());
        return 0;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const ratelab::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const ratelab::ReturnOverflow& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return 3;
    } catch (const std::runtime_error& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
