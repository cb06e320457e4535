#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "npisim/integrate.hpp"

namespace npisim {

/// Convex one-dimensional quadratic q(t) = c0 + c1*t + c2*t^2 fitted to a
/// simulated response (peak hospitalizations or endemic infections) as a
/// function of one control coordinate over t in [0,1].
struct Surrogate {
    enum class Kind { PeakHosp, EndemicInfection };

    double c0 = 0.0;
    double c1 = 0.0;
    double c2 = 0.0;  ///< >= 0 (convexity enforced at fit time)
    std::vector<double> center;  ///< control vector at fit time
    int coord = 0;               ///< coordinate this surrogate varies
    Kind kind = Kind::PeakHosp;
    double max_rel_residual = 0.0;  ///< max relative misfit on the sample grid

    double eval(double t) const { return c0 + c1 * t + c2 * t * t; }
    /// Minimizer of q over [0,1].
    double argmin01() const;
};

/// Per-coordinate feasible interval. An infeasible coordinate is the
/// degenerate interval at the surrogate minimizer with feasible=false.
struct Interval {
    double lo = 0.0;
    double hi = 1.0;
    bool feasible = true;
};

/// Box product of per-coordinate intervals.
struct FeasibleSet {
    std::vector<Interval> coords;
    int size() const { return static_cast<int>(coords.size()); }
};

struct PeakMapConfig {
    double radius = 0.1;
    int n_samples = 9;
    double horizon = 30.0;  ///< prediction horizon, days
    double dt = 0.1;
    std::ostream* debug_sink = nullptr;  ///< CSV diagnostics when set
};

struct EndemicConfig {
    double t_end = 10000.0;   ///< settling horizon, days
    double settle_tol = 1e-9; ///< max |derivative| treated as settled
    double fd_step = 0.05;    ///< Jacobian finite-difference step
    double dt = 0.1;
};

/// Fits the local peak-hospitalization map for one region: samples
/// n_samples values of u[region] equally spaced on
/// [u_center-radius, u_center+radius] ∩ [0,1] with the other coordinates
/// held fixed, simulates `horizon` days from x for each, records the peak
/// hospitalized fraction, and least-squares-fits a quadratic. A negative
/// curvature is clipped to zero and the affine part refitted.
Surrogate estimate_peak_hosp(const NetworkModel& net,
                             const std::vector<EpiState>& x,
                             std::span<const double> u_center, int region,
                             const PeakMapConfig& cfg = {});

/// Same but with a caller-provided Simulator (reused buffers).
Surrogate estimate_peak_hosp(Simulator& sim, const NetworkModel& net,
                             const std::vector<EpiState>& x,
                             std::span<const double> u_center, int region,
                             const PeakMapConfig& cfg = {});

struct EndemicResult {
    std::vector<double> iota;  ///< per-region infectious fraction at rest
    bool settled = false;      ///< derivative dropped below settle_tol
};

/// Endemic infection fractions F(u): integrates from x0 under constant u
/// until settled or t_end.
EndemicResult estimate_endemic_infections(const NetworkModel& net,
                                          const std::vector<EpiState>& x0,
                                          std::span<const double> u,
                                          const EndemicConfig& cfg = {});

struct EndemicJacobian {
    int n = 0;
    std::vector<double> j;  ///< row-major, j[i*n + k] = dF_i/du_k
    bool all_settled = true;
    double at(int i, int k) const { return j[static_cast<size_t>(i) * n + k]; }
};

/// Central finite differences of F per control coordinate; one-sided step
/// placement at the [0,1] boundary.
EndemicJacobian endemic_jacobian(const NetworkModel& net,
                                 const std::vector<EpiState>& x0,
                                 std::span<const double> u,
                                 const EndemicConfig& cfg = {});

/// Solves q(t) <= h_lim over [0,1] analytically. An empty solution set
/// yields the degenerate interval at argmin q, flagged infeasible.
Interval feasible_interval(const Surrogate& s, double h_lim_frac);

/// One surrogate per region; the set is the box product of intervals.
FeasibleSet feasible_set(const std::vector<Surrogate>& per_region,
                         std::span<const double> h_lims_frac);

} // namespace npisim
