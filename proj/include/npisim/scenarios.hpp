#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "npisim/controller.hpp"

namespace npisim {

/// Single-region closed-loop scenario around the fitted parameter set.
/// Scenario runs use pure contact-maximization weights (w=1, q=0): the
/// controller pushes contacts as high as the hospitalization constraint
/// allows, which is what the days-to-normal experiments measure.
struct ScenarioBase {
    ModelParams params;
    EpiState init;
    double u0 = 0.21;
    double h_lim_per100k = 8.0;
    double horizon = 1100.0;
    double dt = 0.1;
    double gain = 0.5;
    int cadence = 1;
    int refresh = 1;
    double w_cost = 1.0;
    double q_cost = 0.0;
    PeakMapConfig peak;
    EndemicConfig endemic;

    ClosedLoopConfig make_config(int n_regions = 1) const;
};

/// First day index at which u meets or exceeds the target and stays
/// there for the remainder of the trace (sustained attainment); nullopt
/// when the horizon is too short.
std::optional<int> days_to_target(const std::vector<double>& u_daily,
                                  double u_target);
std::optional<int> days_to_target(const ClosedLoopTrace& trace, double u_target,
                                  int region = 0);

/// Grid sweep over hospitalization limit, vaccination rate and uptake.
struct SweepSpec {
    std::vector<double> h_lims;   ///< persons/day per 100k
    std::vector<double> y_rates;  ///< persons/day
    std::vector<double> uptakes;  ///< fraction
    double u_target = 1.0;
    int deaths_cutoff_day = 153;  ///< 2021-08-01 with day 0 = 2021-03-01
    double horizon = 1100.0;

    void validate() const;
};

struct SweepRow {
    double h_lim = 0.0;
    double y_rate = 0.0;
    double uptake = 0.0;
    std::optional<int> days_u1;
    std::optional<int> days_u08;
    double deaths_cutoff = 0.0;  ///< persons
    std::string status = "ok";
};

/// One closed-loop run per grid cell, rows in deterministic grid order
/// (h_lim outermost, uptake innermost). Per-cell failures are recorded
/// in the row's status and the sweep continues.
std::vector<SweepRow> sweep(const ScenarioBase& base, const SweepSpec& spec,
                            int n_threads = 0);

/// Latin hypercube sample: n points in [0,1)^dims, exactly one point in
/// each of the n equal-width bins per dimension. Deterministic per seed.
std::vector<std::vector<double>> latin_hypercube(int n, int dims, uint64_t seed);

struct MonteCarloSpec {
    int n = 100;
    double pct = 0.15;
    uint64_t seed = 1;
    std::vector<std::string> varied = {"beta", "gamma",    "epsilon",
                                       "rho",  "kappa_ih", "sigma"};
    bool stratified = true;  ///< false: plain IID sampling (oracle mode)

    void validate() const;
};

/// Per-day envelope statistics across the sampled runs.
struct Envelope {
    std::vector<int> day;
    struct Series {
        std::vector<double> mean, sd;
    };
    Series u, h, i, v;
    int n_runs = 0;
    int n_diverged = 0;
};

/// Closed-loop Monte Carlo with parameters sampled within +-pct of their
/// nominal values. Diverged runs are excluded and counted. Deterministic
/// for a fixed seed regardless of thread count.
Envelope monte_carlo(const ScenarioBase& base, const MonteCarloSpec& spec,
                     int n_threads = 0);

/// Applies a multiplicative perturbation vector (one entry per varied
/// name, each in [0,1) mapped to [1-pct, 1+pct]) to the nominal params.
ModelParams perturb_params(const ModelParams& nominal,
                           const std::vector<std::string>& varied,
                           const std::vector<double>& unit_sample, double pct);

/// Uncoordinated region-drop stress test.
struct DropSpec {
    std::vector<std::string> regions;  ///< regions that abandon control
    int drop_day = 61;                 ///< 2021-05-01 with day 0 = 2021-03-01
    double u_drop = 0.8;
};

struct DropSummaryRow {
    std::string region;
    bool dropped = false;
    double peak_h_per100k = 0.0;
    int days_above_limit = 0;
    double mean_u_post_drop = 0.0;
};

struct DropResult {
    ClosedLoopTrace trace;
    std::vector<DropSummaryRow> summary;
};

struct NetworkRunOptions {
    double horizon = 365.0;
    double u0 = 0.21;
    double dt = 0.1;
    double gain = 0.5;
    int cadence = 1;
    int refresh = 1;
    double w_cost = 1.0;
    double q_cost = 0.0;
    PeakMapConfig peak;
    EndemicConfig endemic;
    int n_threads = 0;
};

/// Runs local controllers in all regions; from spec.drop_day on, the
/// listed regions hold u_drop while the rest stay in closed loop.
/// An empty drop set reproduces the all-controlled baseline.
DropResult region_drop(const NetworkModel& net, const DropSpec& spec,
                       const NetworkRunOptions& opt = {});

} // namespace npisim
