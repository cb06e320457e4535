#include "npisim/controller.hpp"

#include <algorithm>
#include <cmath>

#include "npisim/parallel.hpp"

namespace npisim {

CostConfig CostConfig::uniform(int n, double w_val, double q_val) {
    CostConfig c;
    c.w.assign(n, w_val);
    c.q.assign(n, q_val);
    return c;
}

bool CostConfig::any_infection_cost() const {
    return std::any_of(q.begin(), q.end(), [](double qi) { return qi > 0.0; });
}

void CostConfig::validate(int n) const {
    if (static_cast<int>(w.size()) != n || static_cast<int>(q.size()) != n)
        throw StructuralError("cost weights must have one entry per region");
    for (double wi : w)
        if (!(wi >= 0.0)) throw DomainError("NPI-cost weights must be >= 0");
    for (double qi : q)
        if (!(qi >= 0.0)) throw DomainError("infection-cost weights must be >= 0");
}

std::vector<double> project(std::span<const double> z, const FeasibleSet& set) {
    if (static_cast<int>(z.size()) != set.size())
        throw StructuralError("project: dimension mismatch");
    std::vector<double> w(z.size());
    for (size_t i = 0; i < z.size(); ++i)
        w[i] = std::clamp(z[i], set.coords[i].lo, set.coords[i].hi);
    return w;
}

void centralized_step(ControlState& cs, const EndemicJacobian& J,
                      std::span<const double> iota, const FeasibleSet& set,
                      const CostConfig& costs, double dt_c) {
    const int n = static_cast<int>(cs.u.size());
    if (set.size() != n || static_cast<int>(iota.size()) != n || J.n != n)
        throw StructuralError("centralized_step: dimension mismatch");
    costs.validate(n);

    std::vector<double> target(n);
    for (int i = 0; i < n; ++i) {
        double grad = costs.dphi(i, cs.u[i]);
        for (int j = 0; j < n; ++j)
            grad += J.at(j, i) * costs.dpsi(j, iota[j]);  // (J^T grad psi)_i
        target[i] = cs.u[i] - cs.gain * grad;
    }
    const std::vector<double> proj = project(target, set);
    for (int i = 0; i < n; ++i) {
        cs.u[i] += dt_c * (proj[i] - cs.u[i]);
        cs.u[i] = std::clamp(cs.u[i], 0.0, 1.0);
    }
}

double local_step(int i, double u_i, double gain, double dFi_dui,
                  double iota_i, const Interval& set_i, const CostConfig& costs,
                  double dt_c) {
    const double grad = costs.dphi(i, u_i) + dFi_dui * costs.dpsi(i, iota_i);
    const double target = u_i - gain * grad;
    const double proj = std::clamp(target, set_i.lo, set_i.hi);
    return std::clamp(u_i + dt_c * (proj - u_i), 0.0, 1.0);
}

std::vector<double> ClosedLoopTrace::u_series(int region) const {
    std::vector<double> out(u.size());
    for (size_t k = 0; k < u.size(); ++k) out[k] = u[k][region];
    return out;
}

std::vector<double> ClosedLoopTrace::h_series(int region) const {
    std::vector<double> out(states.size());
    for (size_t k = 0; k < states.size(); ++k) out[k] = states[k][region].h;
    return out;
}

ClosedLoopTrace closed_loop(const NetworkModel& net, const ClosedLoopConfig& cfg) {
    net.validate();
    const int n = net.size();
    if (cfg.horizon < 1.0) throw DomainError("closed-loop horizon must be >= 1 day");
    if (!(cfg.ctrl.gain > 0.0)) throw DomainError("controller gain must be > 0");
    if (cfg.ctrl.cadence < 1 || cfg.ctrl.refresh < 1)
        throw DomainError("cadence and refresh must be >= 1 day");

    ControlState cs = cfg.ctrl;
    if (static_cast<int>(cs.u.size()) != n)
        throw StructuralError("initial control vector must have one entry per region");
    for (double ui : cs.u)
        if (!(ui >= 0.0 && ui <= 1.0)) throw DomainError("u0 must be in [0,1]");

    CostConfig costs = cfg.costs;
    if (costs.w.empty() && costs.q.empty()) costs = CostConfig::uniform(n);
    costs.validate(n);
    const bool need_jacobian = costs.any_infection_cost();

    if (cfg.drop) {
        for (int idx : cfg.drop->regions)
            if (idx < 0 || idx >= n)
                throw StructuralError("drop policy names an unknown region index");
        if (!(cfg.drop->u_fixed >= 0.0 && cfg.drop->u_fixed <= 1.0))
            throw DomainError("drop level must be in [0,1]");
    }
    const auto dropped_at = [&](int i, int day) {
        if (!cfg.drop || day < cfg.drop->drop_day) return false;
        const auto& regs = cfg.drop->regions;
        return std::find(regs.begin(), regs.end(), i) != regs.end();
    };

    const int days = static_cast<int>(std::lround(cfg.horizon));
    ClosedLoopTrace trace;
    trace.h_lim_frac = net.h_lims_frac();
    for (const auto& reg : net.regions) trace.region_names.push_back(reg.name);
    trace.day.reserve(days + 1);
    trace.states.reserve(days + 1);

    std::vector<EpiState> x = net.initial_states();
    std::vector<Surrogate> surr(n);
    FeasibleSet set;
    set.coords.assign(n, Interval{});
    EndemicJacobian jac;
    jac.n = n;
    jac.j.assign(static_cast<size_t>(n) * n, 0.0);

    Simulator plant(net, cfg.dt);
    const int workers = effective_threads(cfg.n_threads, n);
    std::vector<Simulator> sims;
    sims.reserve(workers);
    for (int w = 0; w < workers; ++w) sims.emplace_back(net, cfg.peak.dt);

    std::vector<double> iota(n);
    for (int day = 0; day < days; ++day) {
        if (day % cs.refresh == 0) {
            // Refit the peak maps around the current control from the
            // instantaneous state. Dropped regions hold a fixed level and
            // need no constraint set.
            parallel_for_workers(n, workers, [&](int worker, int i) {
                if (dropped_at(i, day)) return;
                surr[i] = estimate_peak_hosp(sims[worker], net, x, cs.u, i, cfg.peak);
                set.coords[i] = feasible_interval(surr[i], trace.h_lim_frac[i]);
            });
            for (int i = 0; i < n; ++i)
                if (!dropped_at(i, day))
                    trace.max_fit_residual =
                        std::max(trace.max_fit_residual, surr[i].max_rel_residual);
            if (need_jacobian)
                jac = endemic_jacobian(net, x, cs.u, cfg.endemic);
        }

        if (day % cs.cadence == 0) {
            for (int i = 0; i < n; ++i) iota[i] = x[i].i;
            const double dt_c = cs.cadence;
            if (cfg.mode == ControllerMode::Centralized) {
                centralized_step(cs, jac, iota, set, costs, dt_c);
            } else {
                // Jacobi update: all regions step from the same snapshot.
                std::vector<double> next = cs.u;
                for (int i = 0; i < n; ++i)
                    next[i] = local_step(i, cs.u[i], cs.gain, jac.at(i, i),
                                         iota[i], set.coords[i], costs, dt_c);
                cs.u = std::move(next);
            }
            for (int i = 0; i < n; ++i)
                if (dropped_at(i, day)) cs.u[i] = cfg.drop->u_fixed;
        }

        trace.day.push_back(day);
        trace.states.push_back(x);
        trace.u.push_back(cs.u);
        std::vector<uint8_t> feas(n);
        for (int i = 0; i < n; ++i)
            feas[i] = dropped_at(i, day) ? 1 : (set.coords[i].feasible ? 1 : 0);
        trace.feasible.push_back(std::move(feas));

        plant.advance(x, cs.u, 1.0, &trace.clamp_events);
    }

    // Final-day record carries the last applied control.
    trace.day.push_back(days);
    trace.states.push_back(x);
    trace.u.push_back(cs.u);
    trace.feasible.push_back(trace.feasible.back());
    return trace;
}

} // namespace npisim
