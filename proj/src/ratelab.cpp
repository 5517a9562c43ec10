#include "ratelab/ratelab.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "ratelab/errors.hpp"
#include "ratelab/executor.hpp"
#include "ratelab/otmetrics.hpp"

namespace ratelab {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt17(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}
}  // namespace

std::string metric_name(Metric m) { return m == Metric::W1 ? "W1" : "Pi"; }

Metric metric_from_name(const std::string& name) {
    if (name == "W1") return Metric::W1;
    if (name == "Pi") return Metric::Pi;
    throw ConfigError("unknown metric '" + name + "' (use W1 or Pi)");
}

RateExponent theoretical_exponent(const ExponentSetting& s) {
    if (s.dim < 1) throw OutOfRegime("observable dimension must be >= 1");
    if (s.gamma) {
        const double g = *s.gamma;
        if (!(g > 0.0 && g < 0.5))
            throw OutOfRegime("LSV rates require gamma in (0, 1/2)");
        if (s.metric == Metric::Pi && s.dim == 1)
            return {(1.0 - 2.0 * g) / 4.0, 0.0,
                    "LSV Prokhorov rate n^{-(1-2g)/4+eps}, N=1"};
        RateExponent w1 =
            (g <= 1.0 / 3.0)
                ? RateExponent{1.0 / 6.0, 0.0, "LSV W1 rate n^{-1/6+eps}, g <= 1/3"}
                : RateExponent{(1.0 - 2.0 * g) / 2.0, 0.0,
                               "LSV W1 rate n^{-(1-2g)/2+eps}, g in (1/3,1/2)"};
        if (s.metric == Metric::W1) return w1;
        return {0.5 * w1.exponent, 0.0, "LSV Prokhorov via Pi <= sqrt(W1), N >= 2"};
    }
    if (!s.p) throw OutOfRegime("need p or gamma to select a rate regime");
    const double p = *s.p;
    if (!(p > 2.0)) throw OutOfRegime("rates require order p > 2");
    if (s.metric == Metric::W1) {
        if (p < 3.0)
            return {(p - 2.0) / (2.0 * p), (p - 1.0) / (2.0 * p),
                    "W1 rate n^{-(p-2)/(2p)} (log n)^{(p-1)/(2p)}, p in (2,3)"};
        return {1.0 / 6.0, 1.0 / 3.0,
                "W1 rate capped at the p=3 value n^{-1/6}; the coupling bound "
                "does not improve for p > 3"};
    }
    if (s.dim == 1) {
        if (p == kInf)
            return {0.25, 0.75, "Prokhorov rate n^{-1/4} (log n)^{3/4}, p = inf"};
        return {(p - 2.0) / (4.0 * p), 0.0, "Prokhorov rate n^{-(p-2)/(4p)}"};
    }
    if (p < 3.0)
        return {(p - 2.0) / (4.0 * p), (p - 1.0) / (4.0 * p),
                "Prokhorov via Pi <= sqrt(W1), N >= 2"};
    return {1.0 / 12.0, 1.0 / 6.0,
            "Prokhorov via Pi <= sqrt(W1), capped at the p=3 value"};
}

namespace {

FitResult ols(const std::vector<double>& xs, const std::vector<double>& ys) {
    const std::size_t k = xs.size();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= static_cast<double>(k);
    my /= static_cast<double>(k);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    FitResult fit;
    fit.slope = sxy / sxx;
    const double intercept = my - fit.slope * mx;
    double ssr = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        const double r = ys[i] - (intercept + fit.slope * xs[i]);
        ssr += r * r;
    }
    if (k > 2) fit.stderr_slope = std::sqrt(ssr / static_cast<double>(k - 2) / sxx);
    return fit;
}

}  // namespace

FitResult fit_loglog(const std::vector<std::pair<double, double>>& points) {
    if (points.size() < 4)
        throw std::invalid_argument("log-log fit needs at least 4 points");
    std::vector<double> xs, ys;
    xs.reserve(points.size());
    ys.reserve(points.size());
    for (const auto& [n, value] : points) {
        if (!(value > 0.0))
            throw NonPositiveValue("log-log fit requires positive values");
        xs.push_back(std::log(n));
        ys.push_back(std::log(value));
    }
    return ols(xs, ys);
}

FitResult fit_loglog_corrected(const std::vector<std::pair<double, double>>& points,
                               double log_power) {
    if (points.size() < 4)
        throw std::invalid_argument("log-log fit needs at least 4 points");
    std::vector<double> xs, ys;
    xs.reserve(points.size());
    ys.reserve(points.size());
    for (const auto& [n, value] : points) {
        if (!(value > 0.0))
            throw NonPositiveValue("log-log fit requires positive values");
        if (!(n > 1.0))
            throw std::invalid_argument("log-corrected fit needs n > 1");
        xs.push_back(std::log(n));
        ys.push_back(std::log(value) - log_power * std::log(std::log(n)));
    }
    return ols(xs, ys);
}

std::vector<std::uint64_t> ExperimentConfig::replicate_seeds() const {
    if (!seeds.empty()) return seeds;
    std::vector<std::uint64_t> out(static_cast<std::size_t>(replicates));
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = derive_seed(master_seed, 0x5eedu, i);
    return out;
}

void ExperimentConfig::validate() const {
    if (n_grid.empty()) throw ConfigError("n_grid must be nonempty");
    for (std::size_t i = 1; i < n_grid.size(); ++i)
        if (n_grid[i] <= n_grid[i - 1])
            throw ConfigError("n_grid must be strictly increasing");
    if (M < 2) throw ConfigError("M must be >= 2");
    if (d < 2) throw ConfigError("comparison grid d must be >= 2");
    if (observable.components.empty()) throw ConfigError("observable has no components");
    if (metrics.empty()) throw ConfigError("select at least one metric");
    if (seeds.empty() && replicates < 1) throw ConfigError("need at least one replicate");
    if (system.type == SystemSpec::Type::Flow && !system.roof)
        throw ConfigError("flow system needs a roof function");
}

namespace {

TrigPoly trig_from_json(const nlohmann::json& terms) {
    std::vector<TrigPoly::Term> ts;
    for (const auto& t : terms)
        ts.push_back(TrigPoly::Term{t.at("k").get<int>(), t.value("a", 0.0),
                                    t.value("b", 0.0)});
    return TrigPoly(0.0, std::move(ts));
}

nlohmann::json trig_to_json(const TrigPoly& p) {
    nlohmann::json terms = nlohmann::json::array();
    for (const auto& t : p.terms())
        terms.push_back({{"k", t.k}, {"a", t.a}, {"b", t.b}});
    return terms;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
    ExperimentConfig cfg;
    try {
        cfg.name = j.value("name", cfg.name);
        const auto& sys = j.at("system");
        const std::string type = sys.value("type", "map");
        if (type == "map")
            cfg.system.type = SystemSpec::Type::Map;
        else if (type == "flow")
            cfg.system.type = SystemSpec::Type::Flow;
        else
            throw ConfigError("system.type must be 'map' or 'flow'");
        const std::string kind = sys.value("kind", "doubling");
        if (kind == "doubling")
            cfg.system.map = MapSystem::doubling();
        else if (kind == "lsv")
            cfg.system.map = MapSystem::lsv(sys.at("gamma").get<double>());
        else
            throw ConfigError("system.kind must be 'doubling' or 'lsv'");
        if (cfg.system.type == SystemSpec::Type::Flow) {
            const auto& roof = sys.at("roof");
            cfg.system.roof =
                RoofFunction::affine(roof.at("a").get<double>(), roof.value("b", 0.0));
        }
        for (const auto& comp : j.at("observable").at("components"))
            cfg.observable.components.push_back(trig_from_json(comp));
        if (j.contains("n_grid")) cfg.n_grid = j.at("n_grid").get<std::vector<std::size_t>>();
        cfg.M = j.value("M", cfg.M);
        cfg.d = j.value("d", cfg.d);
        cfg.master_seed = j.value("seed", cfg.master_seed);
        if (j.contains("seeds")) cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
        cfg.replicates = j.value("replicates", cfg.replicates);
        if (j.contains("metrics")) {
            cfg.metrics.clear();
            for (const auto& m : j.at("metrics"))
                cfg.metrics.push_back(metric_from_name(m.get<std::string>()));
        }
        cfg.burn_in = j.value("burn_in", cfg.burn_in);
        cfg.green_kubo_lag = j.value("green_kubo_lag", cfg.green_kubo_lag);
        cfg.green_kubo_orbit = j.value("green_kubo_orbit", cfg.green_kubo_orbit);
        cfg.centering_orbit = j.value("centering_orbit", cfg.centering_orbit);
        cfg.quadrature_dt = j.value("quadrature_dt", cfg.quadrature_dt);
        cfg.jobs = j.value("jobs", cfg.jobs);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

nlohmann::json ExperimentConfig::to_json() const {
    nlohmann::json j;
    j["name"] = name;
    nlohmann::json sys;
    sys["type"] = system.type == SystemSpec::Type::Map ? "map" : "flow";
    sys["kind"] = system.map.kind() == MapKind::Doubling ? "doubling" : "lsv";
    if (system.map.kind() == MapKind::Lsv) sys["gamma"] = system.map.gamma();
    if (system.roof)
        sys["roof"] = {{"a", system.roof->affine_a()}, {"b", system.roof->affine_b()}};
    j["system"] = sys;
    nlohmann::json comps = nlohmann::json::array();
    for (const auto& c : observable.components) comps.push_back(trig_to_json(c));
    j["observable"] = {{"components", comps}};
    j["n_grid"] = n_grid;
    j["M"] = M;
    j["d"] = d;
    j["seed"] = master_seed;
    if (!seeds.empty()) j["seeds"] = seeds;
    j["replicates"] = replicates;
    nlohmann::json ms = nlohmann::json::array();
    for (Metric m : metrics) ms.push_back(metric_name(m));
    j["metrics"] = ms;
    j["burn_in"] = burn_in;
    j["green_kubo_lag"] = green_kubo_lag;
    j["green_kubo_orbit"] = green_kubo_orbit;
    j["centering_orbit"] = centering_orbit;
    j["quadrature_dt"] = quadrature_dt;
    j["jobs"] = jobs;
    return j;
}

namespace {

// Observable prepared for path building: mean-zero evaluators plus the
// experiment covariance for the Brownian comparator.
struct PreparedExperiment {
    MapObservable map_observable;           // maps: centered components
    FlowObservable flow_observable;         // flows: centered, height-independent
    Matrix sigma;
    std::string sigma_source;
    std::optional<double> centering_mean;
};

// integral over [0,1] of p(x) r(x); closed form for affine roofs
// (int x cos(2 pi k x) = 0, int x sin(2 pi k x) = -1/(2 pi k)),
// composite Simpson otherwise
double trig_times_roof_mean(const TrigPoly& p, const RoofFunction& roof) {
    if (roof.is_affine()) {
        const double a = roof.affine_a();
        const double b = roof.affine_b();
        double s = p.constant_term() * (a + 0.5 * b);
        for (const auto& t : p.terms())
            s -= t.b * b / (2.0 * 3.14159265358979323846 * t.k);
        return s;
    }
    const int m = 4096;
    double s = 0.0;
    for (int i = 0; i <= m; ++i) {
        const double x = static_cast<double>(i) / m;
        const double w = (i == 0 || i == m) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        s += w * p(x) * roof(x);
    }
    return s / (3.0 * m);
}

PreparedExperiment prepare_experiment(const ExperimentConfig& cfg) {
    PreparedExperiment prep;
    const int dim = cfg.observable.dim();
    const bool doubling = cfg.system.map.kind() == MapKind::Doubling;

    if (cfg.system.type == SystemSpec::Type::Map) {
        std::vector<TrigPoly> comps;
        if (doubling) {
            // Lebesgue is invariant: centering is exact (drop the constant term)
            for (const auto& c : cfg.observable.components)
                comps.push_back(TrigPoly(0.0, c.terms()));
        } else {
            // LSV: center by a long-orbit estimate of the mean; the residual
            // bias is reported in the metadata
            OrbitSampler centering(cfg.system.map,
                                   derive_seed(cfg.master_seed, 0xCE27ull), cfg.burn_in);
            std::vector<double> mean(static_cast<std::size_t>(dim), 0.0);
            centering.visit(cfg.centering_orbit, [&](double x) {
                for (int c = 0; c < dim; ++c)
                    mean[static_cast<std::size_t>(c)] +=
                        cfg.observable.components[static_cast<std::size_t>(c)](x);
            });
            double mean_norm = 0.0;
            for (int c = 0; c < dim; ++c) {
                mean[static_cast<std::size_t>(c)] /=
                    static_cast<double>(cfg.centering_orbit);
                mean_norm += mean[static_cast<std::size_t>(c)] *
                             mean[static_cast<std::size_t>(c)];
                const auto& src = cfg.observable.components[static_cast<std::size_t>(c)];
                comps.push_back(TrigPoly(src.constant_term() -
                                             mean[static_cast<std::size_t>(c)],
                                         src.terms()));
            }
            prep.centering_mean = std::sqrt(mean_norm);
        }
        std::vector<Func> funcs(comps.begin(), comps.end());
        prep.map_observable = MapObservable::components(funcs);

        if (doubling) {
            Decomposition dec = primary_decomposition(TransferOperator::exact_doubling(),
                                                      funcs);
            prep.sigma = dec.sigma;
            prep.sigma_source = "martingale-decomposition(exact-doubling)";
        } else {
            OrbitSampler sampler(cfg.system.map, derive_seed(cfg.master_seed, 0x51C2ull),
                                 cfg.burn_in);
            prep.sigma = green_kubo_sigma(sampler, prep.map_observable,
                                          cfg.green_kubo_lag, cfg.green_kubo_orbit);
            prep.sigma_source = "green-kubo(lag=" + std::to_string(cfg.green_kubo_lag) +
                                ", orbit=" + std::to_string(cfg.green_kubo_orbit) + ")";
        }
        return prep;
    }

    // Flow case. Components are read height-independently: v(x,u) = p(x).
    const RoofFunction& roof = *cfg.system.roof;
    const double roof_mean = roof.mean_lebesgue();
    std::vector<TrigPoly> comps;
    if (doubling) {
        // center against mu^roof: subtract int p r / int r
        for (const auto& c : cfg.observable.components) {
            const double mean = trig_times_roof_mean(c, roof) / roof_mean;
            comps.push_back(TrigPoly(c.constant_term() - mean, c.terms()));
        }
    } else {
        // LSV base: mean along the flow from a long base orbit,
        // int v dmu_M = (sum v(x) r(x)) / (sum r(x))
        OrbitSampler centering(cfg.system.map, derive_seed(cfg.master_seed, 0xCE28ull),
                               cfg.burn_in);
        std::vector<double> num(static_cast<std::size_t>(dim), 0.0);
        double den = 0.0;
        centering.visit(cfg.centering_orbit, [&](double x) {
            const double r = roof(x);
            den += r;
            for (int c = 0; c < dim; ++c)
                num[static_cast<std::size_t>(c)] +=
                    cfg.observable.components[static_cast<std::size_t>(c)](x) * r;
        });
        double mean_norm = 0.0;
        for (int c = 0; c < dim; ++c) {
            const double m = num[static_cast<std::size_t>(c)] / den;
            mean_norm += m * m;
            const auto& src = cfg.observable.components[static_cast<std::size_t>(c)];
            comps.push_back(TrigPoly(src.constant_term() - m, src.terms()));
        }
        prep.centering_mean = std::sqrt(mean_norm);
    }

    prep.flow_observable.dim = dim;
    prep.flow_observable.height_independent = true;
    prep.flow_observable.declared_mean_zero = true;
    prep.flow_observable.eval = [comps](double x, double, double* out) {
        for (std::size_t c = 0; c < comps.size(); ++c) out[c] = comps[c](x);
    };

    SuspensionFlow flow(cfg.system.map, roof);
    if (doubling) {
        FlowDecomposition dec(flow, prep.flow_observable);
        prep.sigma = dec.sigma();
        prep.sigma_source = "flow-martingale-decomposition(exact-doubling)/roof-mean";
    } else {
        // Sigma of the induced observable v_X(x) = p(x) r(x) over the base
        // map, normalized by the mean roof (W = W_X / sqrt(mean r))
        MapObservable induced;
        induced.dim = dim;
        induced.eval = [comps, roof](double x, double* out) {
            const double r = roof(x);
            for (std::size_t c = 0; c < comps.size(); ++c) out[c] = comps[c](x) * r;
        };
        // center v_X empirically (p is centered along the flow, so v_X has a
        // small residual mean handled inside green_kubo_sigma's centering)
        OrbitSampler sampler(cfg.system.map, derive_seed(cfg.master_seed, 0x51C3ull),
                             cfg.burn_in);
        Matrix sig = green_kubo_sigma(sampler, induced, cfg.green_kubo_lag,
                                      cfg.green_kubo_orbit);
        // orbit estimate of the mean roof for the same normalization
        OrbitSampler rs(cfg.system.map, derive_seed(cfg.master_seed, 0x51C4ull),
                        cfg.burn_in);
        double rsum = 0.0;
        rs.visit(cfg.green_kubo_orbit, [&](double x) { rsum += roof(x); });
        const double rbar = rsum / static_cast<double>(cfg.green_kubo_orbit);
        prep.sigma = Matrix(dim);
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) prep.sigma(i, j) = sig(i, j) / rbar;
        prep.sigma_source = "green-kubo(induced observable)/orbit roof mean";
    }
    return prep;
}

std::vector<double> grid_times(int d) {
    std::vector<double> t(static_cast<std::size_t>(d) + 1);
    for (int i = 0; i <= d; ++i) t[static_cast<std::size_t>(i)] = static_cast<double>(i) / d;
    return t;
}

double quantile(std::vector<double> v, double q) {
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    if (lo + 1 >= v.size()) return v.back();
    const double frac = pos - static_cast<double>(lo);
    return v[lo] + frac * (v[lo + 1] - v[lo]);
}

}  // namespace

RateReport run_rate_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    const std::vector<std::uint64_t> seeds = cfg.replicate_seeds();
    const std::size_t reps = seeds.size();
    const std::size_t ns = cfg.n_grid.size();
    PreparedExperiment prep = prepare_experiment(cfg);
    const std::vector<double> times = grid_times(cfg.d);
    const bool is_flow = cfg.system.type == SystemSpec::Type::Flow;
    const int dim = cfg.observable.dim();
    const std::size_t n_metrics = cfg.metrics.size();

    // distances[metric][n][rep]
    std::vector<std::vector<std::vector<double>>> dist(
        n_metrics, std::vector<std::vector<double>>(ns, std::vector<double>(reps, 0.0)));

    std::optional<SuspensionFlow> flow;
    if (is_flow) flow.emplace(cfg.system.map, *cfg.system.roof);
    const std::size_t n_max = cfg.n_grid.back();

    // Common random numbers across the n-grid: each replicate draws one
    // Brownian batch and one orbit (or flow start) per path and reuses them
    // for every n. Medians per n are unchanged in law; differences across n,
    // which the slope fit measures, shed the shared sampling floor. Slopes
    // would otherwise drown in the empirical-OT bias of M-sample measures.
    const auto run_replicate = [&](std::size_t ri, std::size_t& current_n) {
        const std::uint64_t rep_seed = seeds[ri];
        std::vector<PiecewisePath> brownian;
        brownian.reserve(static_cast<std::size_t>(cfg.M));
        for (int pm = 0; pm < cfg.M; ++pm)
            brownian.push_back(sample_brownian(
                prep.sigma, cfg.d,
                derive_seed(rep_seed, 202, static_cast<std::uint64_t>(pm))));
        const EmpiricalPathMeasure nu(std::move(brownian));

        // per-path processes for every n, nested in one long orbit per path
        std::vector<std::vector<PiecewisePath>> process(ns);
        for (auto& batch : process) batch.reserve(static_cast<std::size_t>(cfg.M));
        for (int pm = 0; pm < cfg.M; ++pm) {
            const std::uint64_t path_seed =
                derive_seed(rep_seed, 101, static_cast<std::uint64_t>(pm));
            if (!is_flow) {
                OrbitSampler sampler(cfg.system.map, path_seed, cfg.burn_in);
                const std::vector<double> orbit = sampler.sample(n_max);
                for (std::size_t ni = 0; ni < ns; ++ni)
                    process[ni].push_back(
                        build_Bn(orbit, prep.map_observable, cfg.n_grid[ni])
                            .restricted(times));
            } else {
                // start (x0, u0) from the suspension measure: base point from
                // a length-biased draw by rejection, height uniform on the lap
                SplitMix64 urng(
                    derive_seed(rep_seed, 404, static_cast<std::uint64_t>(pm)));
                const double rmax = flow->roof().max_value();
                std::uint64_t attempt = 0;
                double u0 = 0.0;
                std::uint64_t accepted_seed = 0;
                for (;;) {
                    const std::uint64_t try_seed = derive_seed(path_seed, 303, attempt);
                    OrbitSampler peek(cfg.system.map, try_seed, cfg.burn_in);
                    const double x0 = peek.sample(1)[0];
                    const double u = urng.next_uniform() * rmax;
                    if (u < flow->roof()(x0)) {
                        u0 = u;
                        accepted_seed = try_seed;
                        break;
                    }
                    ++attempt;
                }
                OrbitSampler sampler(cfg.system.map, accepted_seed, cfg.burn_in);
                const std::vector<double> orbit = sampler.sample(
                    flow->orbit_length_for(static_cast<double>(n_max), u0));
                for (std::size_t ni = 0; ni < ns; ++ni)
                    process[ni].push_back(build_Wn(
                        *flow, prep.flow_observable, orbit, u0,
                        static_cast<double>(cfg.n_grid[ni]), cfg.d, cfg.quadrature_dt));
            }
        }

        for (std::size_t ni = 0; ni < ns; ++ni) {
            current_n = cfg.n_grid[ni];
            const EmpiricalPathMeasure mu(std::move(process[ni]));
            const CostMatrix cost = CostMatrix::between(mu, nu);
            for (std::size_t mi = 0; mi < n_metrics; ++mi)
                dist[mi][ni][ri] = cfg.metrics[mi] == Metric::W1 ? wasserstein1(cost)
                                                                 : prokhorov(cost);
        }
    };

    const auto annotate = [](const char* what, std::size_t n, std::uint64_t seed) {
        std::ostringstream os;
        os << what << " (n=" << n << ", seed=" << seed << ")";
        return os.str();
    };

    parallel_for(reps, cfg.jobs, [&](std::size_t ri) {
        std::size_t current_n = 0;  // 0 while sampling paths
        try {
            run_replicate(ri, current_n);
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument(annotate(e.what(), current_n, seeds[ri]));
        } catch (const std::runtime_error& e) {
            throw std::runtime_error(annotate(e.what(), current_n, seeds[ri]));
        }
    });

    RateReport report;
    report.sigma = prep.sigma;
    report.sigma_source = prep.sigma_source;
    report.centering_mean = prep.centering_mean;
    report.rng_name = SplitMix64::algorithm_name();

    ExponentSetting setting;
    setting.dim = dim;
    if (cfg.system.map.kind() == MapKind::Lsv)
        setting.gamma = cfg.system.map.gamma();
    else
        setting.p = kInf;

    for (std::size_t mi = 0; mi < n_metrics; ++mi) {
        RateReport::MetricResult res;
        res.metric = cfg.metrics[mi];
        std::vector<std::pair<double, double>> points;
        for (std::size_t ni = 0; ni < ns; ++ni) {
            RateReport::PerN per;
            per.n = cfg.n_grid[ni];
            per.values = dist[mi][ni];
            per.median = quantile(per.values, 0.5);
            per.iqr = quantile(per.values, 0.75) - quantile(per.values, 0.25);
            points.emplace_back(static_cast<double>(per.n), per.median);
            res.per_n.push_back(std::move(per));
        }
        bool all_equal = true;
        for (const auto& [n, value] : points)
            if (value != points.front().second) all_equal = false;
        setting.metric = res.metric;
        try {
            res.theory = theoretical_exponent(setting);
        } catch (const OutOfRegime&) {
            res.theory = std::nullopt;
        }
        if (all_equal) {
            res.raw_fit = FitResult{0.0, 0.0};  // degenerate: constant distances
        } else if (points.size() >= 4) {
            res.raw_fit = fit_loglog(points);
            if (res.theory && res.theory->log_power > 0.0)
                res.corrected_fit = fit_loglog_corrected(points, res.theory->log_power);
        }
        report.results.push_back(std::move(res));
    }
    return report;
}

std::string distances_csv(const RateReport& report) {
    std::ostringstream os;
    os << "metric,n,replicate,distance\n";
    for (const auto& res : report.results)
        for (const auto& per : res.per_n)
            for (std::size_t r = 0; r < per.values.size(); ++r)
                os << metric_name(res.metric) << ',' << per.n << ',' << r << ','
                   << fmt17(per.values[r]) << "\n";
    return os.str();
}

nlohmann::json RateReport::to_json(const ExperimentConfig& cfg) const {
    nlohmann::json j;
    j["experiment"] = cfg.name;
    j["rng"] = rng_name;
    nlohmann::json sig = nlohmann::json::array();
    for (int i = 0; i < sigma.dim(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (int k = 0; k < sigma.dim(); ++k) row.push_back(sigma(i, k));
        sig.push_back(row);
    }
    j["sigma"] = sig;
    j["sigma_source"] = sigma_source;
    j["metadata"] = {
        {"M", cfg.M},
        {"d", cfg.d},
        {"replicates", cfg.replicate_seeds().size()},
        {"estimator_caveat",
         "W1/Pi between M-sample empirical measures are upward-biased estimates of "
         "the distance between laws; compare slopes across n, not absolute values"},
        {"grid_caveat", "distances depend on the comparison grid d; d is reported, "
                        "not assumed away"},
    };
    if (centering_mean)
        j["metadata"]["centering_mean_estimate"] = *centering_mean;
    nlohmann::json out = nlohmann::json::array();
    for (const auto& res : results) {
        nlohmann::json r;
        r["metric"] = metric_name(res.metric);
        nlohmann::json per = nlohmann::json::array();
        for (const auto& pn : res.per_n)
            per.push_back({{"n", pn.n},
                           {"median", pn.median},
                           {"iqr", pn.iqr},
                           {"values", pn.values}});
        r["per_n"] = per;
        if (res.raw_fit)
            r["raw_fit"] = {{"slope", res.raw_fit->slope},
                            {"stderr", res.raw_fit->stderr_slope}};
        else
            r["raw_fit"] = nullptr;
        if (res.corrected_fit)
            r["log_corrected_fit"] = {{"slope", res.corrected_fit->slope},
                                      {"stderr", res.corrected_fit->stderr_slope}};
        if (res.theory)
            r["theory"] = {{"exponent", res.theory->exponent},
                           {"log_power", res.theory->log_power},
                           {"source", res.theory->source}};
        out.push_back(std::move(r));
    }
    j["results"] = out;
    return j;
}

void write_report(const ExperimentConfig& cfg, const RateReport& report,
                  const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream csv(dir / "distances.csv", std::ios::binary);
        csv << distances_csv(report);
    }
    {
        std::ofstream rep(dir / "report.json");
        rep << report.to_json(cfg).dump(2) << "\n";
    }
    {
        std::ofstream conf(dir / "config.json");
        conf << cfg.to_json().dump(2) << "\n";
    }
}

}  // namespace ratelab
