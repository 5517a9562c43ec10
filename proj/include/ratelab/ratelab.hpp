#ifndef RATELAB_RATELAB_HPP
#define RATELAB_RATELAB_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ratelab/decomp.hpp"
#include "ratelab/dynsys.hpp"
#include "ratelab/funcrep.hpp"
#include "ratelab/linalg.hpp"
#include "ratelab/pathspace.hpp"
#include "ratelab/suspension.hpp"

namespace ratelab {

enum class Metric { W1, Pi };

std::string metric_name(Metric m);
Metric metric_from_name(const std::string& name);

// Parameters determining a theoretical convergence-rate bound: the metric,
// the system's order p in (2, inf] (or the LSV parameter gamma, from which
// p = 1/gamma), and the observable dimension N.
struct ExponentSetting {
    Metric metric = Metric::W1;
    std::optional<double> p;      // use infinity() for p = inf
    int dim = 1;                  // N
    std::optional<double> gamma;  // LSV parameter, in (0, 1/2)
};

// Bound of the form C n^{-exponent} (log n)^{log_power}.
struct RateExponent {
    double exponent = 0.0;
    double log_power = 0.0;
    std::string source;
};

// The rate bound for the requested regime. Throws OutOfRegime outside the
// covered parameter ranges (p <= 2, gamma outside (0, 1/2), ...).
RateExponent theoretical_exponent(const ExponentSetting& setting);

struct FitResult {
    double slope = 0.0;
    double stderr_slope = 0.0;
};

// Ordinary least squares of log(value) against log(n). Needs >= 4 points and
// positive values (NonPositiveValue otherwise).
FitResult fit_loglog(const std::vector<std::pair<double, double>>& points);

// Same with the log factor pinned: fits value = c n^a (log n)^b for fixed b,
// returning a.
FitResult fit_loglog_corrected(const std::vector<std::pair<double, double>>& points,
                               double log_power);

struct SystemSpec {
    enum class Type { Map, Flow };
    Type type = Type::Map;
    MapSystem map = MapSystem::doubling();
    std::optional<RoofFunction> roof;  // flows only
};

// Observable components as trig polynomials in the base coordinate; flows
// read them height-independently: v(x, u) = p(x).
struct ObservableSpec {
    std::vector<TrigPoly> components;
    int dim() const { return static_cast<int>(components.size()); }
};

struct ExperimentConfig {
    std::string name = "experiment";
    SystemSpec system;
    ObservableSpec observable;
    std::vector<std::size_t> n_grid = {128, 256, 512, 1024, 2048, 4096, 8192};
    int M = 256;
    int d = 16;
    std::uint64_t master_seed = 1;
    std::vector<std::uint64_t> seeds;  // one per replicate; derived if empty
    int replicates = 8;               // used when seeds is empty
    std::vector<Metric> metrics = {Metric::W1};
    long burn_in = 10000;
    int green_kubo_lag = 100;
    std::size_t green_kubo_orbit = 1000000;
    std::size_t centering_orbit = 10000000;
    double quadrature_dt = SuspensionFlow::kDefaultQuadratureStep;
    int jobs = 1;

    std::vector<std::uint64_t> replicate_seeds() const;
    void validate() const;
    static ExperimentConfig from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

struct RateReport {
    struct PerN {
        std::size_t n = 0;
        double median = 0.0;
        double iqr = 0.0;
        std::vector<double> values;  // one per replicate, replicate order
    };
    struct MetricResult {
        Metric metric = Metric::W1;
        std::vector<PerN> per_n;
        // absent with fewer than 4 grid points
        std::optional<FitResult> raw_fit;
        std::optional<FitResult> corrected_fit;
        std::optional<RateExponent> theory;
    };

    std::vector<MetricResult> results;
    Matrix sigma;
    std::string sigma_source;
    std::optional<double> centering_mean;  // subtracted LSV mean estimate
    std::string rng_name;
    nlohmann::json to_json(const ExperimentConfig& cfg) const;
};

// Full pipeline: for each n and replicate, M process paths against M
// Brownian paths on the d-grid with the experiment's Sigma; exact OT
// distances; medians and log-log fits.
RateReport run_rate_experiment(const ExperimentConfig& cfg);

// distances.csv (deterministic bytes), report.json, config.json.
void write_report(const ExperimentConfig& cfg, const RateReport& report,
                  const std::filesystem::path& dir);

// Deterministic CSV of the per-replicate distances.
std::string distances_csv(const RateReport& report);

}  // namespace ratelab

#endif
