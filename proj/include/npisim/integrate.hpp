#pragma once

#include <functional>
#include <span>
#include <vector>

#include "npisim/model.hpp"

namespace npisim {

/// Time-indexed states for all regions, sampled at every integrator step.
struct Trajectory {
    double dt = 0.1;
    std::vector<double> t;                      ///< day stamp per record
    std::vector<std::vector<EpiState>> states;  ///< [record][region]
    std::vector<std::vector<double>> u;         ///< control signal at each record
    long clamp_events = 0;                      ///< compartments clamped to 0
    double worst_negative = 0.0;                ///< most negative pre-clamp value

    int n_records() const { return static_cast<int>(t.size()); }
    int n_regions() const { return states.empty() ? 0 : static_cast<int>(states[0].size()); }
    /// Record index closest to an integer day.
    int index_at_day(double day) const;
};

/// Control signal: fills u (one entry per region) for time t.
using ControlSignal = std::function<void(double t, std::span<double> u)>;

/// Classical fixed-step RK4 over [0, horizon]. Compartments are clamped
/// to >= 0 after each step with events counted. Throws DivergenceError
/// (naming the offending day) if the state becomes non-finite.
Trajectory integrate(const NetworkModel& net, std::vector<EpiState> x0,
                     const ControlSignal& u_signal, double horizon,
                     double dt = 0.1);

/// Single-region convenience wrapper.
Trajectory integrate_single(const ModelParams& p, const EpiState& x0,
                            const std::function<double(double)>& u_of_t,
                            double horizon, double dt = 0.1);

/// Reusable stepper with preallocated work buffers; the workhorse behind
/// surrogate estimation and closed-loop runs. Not thread-safe; use one
/// instance per thread.
class Simulator {
public:
    explicit Simulator(const NetworkModel& net, double dt = 0.1);

    int n_regions() const { return n_; }
    double dt() const { return dt_; }

    /// Advances x in place by `days` under constant control u.
    void advance(std::vector<EpiState>& x, std::span<const double> u,
                 double days, long* clamp_events = nullptr);

    /// Most negative compartment value seen before clamping, across all
    /// work done by this instance.
    double worst_negative() const { return worst_negative_; }

    /// Max hospitalized fraction per region over [0, horizon] (including
    /// the initial state) under constant control u.
    std::vector<double> peak_h(const std::vector<EpiState>& x0,
                               std::span<const double> u, double horizon);

    struct RestResult {
        std::vector<EpiState> x;
        bool settled = false;
        double t_reached = 0.0;
    };

    /// Integrates under constant u until the balance compartments
    /// (s,e,i,h,r,v — the monotone counters d and c_vax are excluded)
    /// all have |derivative| < settle_tol, or t_end is reached.
    RestResult run_to_rest(const std::vector<EpiState>& x0,
                           std::span<const double> u, double t_end,
                           double settle_tol);

private:
    void rk4_step(std::vector<EpiState>& x, std::span<const double> u, double t);
    void eval_rhs(const std::vector<EpiState>& x, std::span<const double> u,
                  std::vector<EpiState>& out) const;

    const NetworkModel* net_;
    int n_;
    double dt_;
    double worst_negative_ = 0.0;
    std::vector<EpiState> k1_, k2_, k3_, k4_, xt_;
};

} // namespace npisim
