#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "npisim/surrogate.hpp"

namespace npisim {

/// NPI-cost and infection-cost weights:
///   phi_i(u_i) = w_i * (1 - u_i)^2   (non-increasing on [0,1])
///   psi_i(iota_i) = q_i * iota_i
struct CostConfig {
    std::vector<double> w;
    std::vector<double> q;

    static CostConfig uniform(int n, double w_val = 1.0, double q_val = 1.0);

    double dphi(int i, double u_i) const { return -2.0 * w[i] * (1.0 - u_i); }
    double dpsi(int i, double /*iota_i*/) const { return q[i]; }
    bool any_infection_cost() const;
    void validate(int n) const;
};

/// Controller state: the NPI vector plus tuning.
struct ControlState {
    std::vector<double> u;
    double gain = 0.5;  ///< eta > 0
    int cadence = 1;    ///< days between controller updates
    int refresh = 1;    ///< days between surrogate refits
};

/// Euclidean projection onto the box product of intervals: because the
/// set is separable this is per-coordinate clamping (the unique nearest
/// point; idempotent and nonexpansive).
std::vector<double> project(std::span<const double> z, const FeasibleSet& set);

/// One explicit-Euler step of the projected gradient flow
///   u <- u + dt_c * ( P(u - eta*(grad phi(u) + J^T grad psi(iota))) - u )
/// followed by a clamp to [0,1]. Updates cs.u in place.
void centralized_step(ControlState& cs, const EndemicJacobian& J,
                      std::span<const double> iota, const FeasibleSet& set,
                      const CostConfig& costs, double dt_c);

/// Scalar per-region version using only local information: the region's
/// own cost gradients, the sensitivity dF_i/du_i, and its own interval.
double local_step(int i, double u_i, double gain, double dFi_dui,
                  double iota_i, const Interval& set_i, const CostConfig& costs,
                  double dt_c);

enum class ControllerMode { Centralized, Local };

/// Regions that abandon control at a given day and hold a fixed level.
struct DropPolicy {
    std::vector<int> regions;
    int drop_day = 61;
    double u_fixed = 0.8;
};

struct ClosedLoopConfig {
    ControllerMode mode = ControllerMode::Centralized;
    double horizon = 730.0;  ///< days
    double dt = 0.1;         ///< plant integrator step
    ControlState ctrl;       ///< u holds the initial control vector
    CostConfig costs;        ///< empty -> uniform(n, 1, 1)
    PeakMapConfig peak;
    EndemicConfig endemic;
    std::optional<DropPolicy> drop;
    int n_threads = 1;  ///< parallelism for per-region surrogate refits
};

/// Per-day record of the interleaved plant/controller run.
struct ClosedLoopTrace {
    std::vector<int> day;
    std::vector<std::vector<EpiState>> states;   ///< [day][region]
    std::vector<std::vector<double>> u;          ///< [day][region], as applied
    std::vector<std::vector<uint8_t>> feasible;  ///< [day][region]
    std::vector<double> h_lim_frac;
    std::vector<std::string> region_names;
    long clamp_events = 0;
    double max_fit_residual = 0.0;

    int n_days() const { return static_cast<int>(day.size()); }
    int n_regions() const { return states.empty() ? 0 : static_cast<int>(states[0].size()); }
    /// Daily u series for one region.
    std::vector<double> u_series(int region) const;
    /// Daily hospitalized fraction for one region.
    std::vector<double> h_series(int region) const;
};

/// Interleaves plant integration with controller updates at the
/// configured cadence; surrogates (and, when any q_i > 0, the endemic
/// Jacobian) are refit every `refresh` days from the instantaneous state.
/// Infeasibility is recorded per region-day, never fatal.
ClosedLoopTrace closed_loop(const NetworkModel& net, const ClosedLoopConfig& cfg);

} // namespace npisim
