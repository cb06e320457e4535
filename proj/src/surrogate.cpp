#include "npisim/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace npisim {

namespace {

// Relative least-squares quadratic through (t_k, y_k) via weighted 3x3
// normal equations. Relative weighting keeps the fit accurate where the
// response is small, which is where the constraint boundary sits; plain
// least squares would let the largest peaks dominate. Falls back to the
// affine fit when the grid cannot identify curvature.
void fit_quadratic(const std::vector<double>& t, const std::vector<double>& y,
                   double& c0, double& c1, double& c2) {
    const size_t n = t.size();
    double y_scale = 0.0;
    for (double yk : y) y_scale = std::max(y_scale, std::abs(yk));
    if (y_scale == 0.0) {
        c0 = c1 = c2 = 0.0;
        return;
    }
    const double floor = y_scale * 1e-6;

    double s1 = 0, st = 0, st2 = 0, st3 = 0, st4 = 0;
    double sy = 0, sty = 0, st2y = 0;
    for (size_t k = 0; k < n; ++k) {
        const double tk = t[k], tk2 = tk * tk;
        const double wk = 1.0 / std::max(std::abs(y[k]), floor);
        const double w = wk * wk;
        s1 += w;
        st += w * tk;
        st2 += w * tk2;
        st3 += w * tk2 * tk;
        st4 += w * tk2 * tk2;
        sy += w * y[k];
        sty += w * tk * y[k];
        st2y += w * tk2 * y[k];
    }
    // Solve [s1 st st2; st st2 st3; st2 st3 st4] c = [sy; sty; st2y]
    const double a11 = s1, a12 = st, a13 = st2;
    const double a22 = st2, a23 = st3, a33 = st4;
    const double det = a11 * (a22 * a33 - a23 * a23) - a12 * (a12 * a33 - a23 * a13) +
                       a13 * (a12 * a23 - a22 * a13);
    const double scale = std::max({std::abs(a11), std::abs(a22), std::abs(a33)});
    if (std::abs(det) < 1e-12 * scale * scale * scale) {
        c2 = 0.0;
    } else {
        c0 = (sy * (a22 * a33 - a23 * a23) - a12 * (sty * a33 - a23 * st2y) +
              a13 * (sty * a23 - a22 * st2y)) / det;
        c1 = (a11 * (sty * a33 - a23 * st2y) - sy * (a12 * a33 - a23 * a13) +
              a13 * (a12 * st2y - sty * a13)) / det;
        c2 = (a11 * (a22 * st2y - sty * a23) - a12 * (a12 * st2y - sty * a13) +
              sy * (a12 * a23 - a22 * a13)) / det;
        if (c2 >= 0.0) return;
        c2 = 0.0;  // convexity: clip and refit the affine part
    }
    const double den = s1 * st2 - st * st;
    if (std::abs(den) < 1e-14 * std::max(1.0, st2)) {
        c0 = sy / s1;
        c1 = 0.0;
    } else {
        c1 = (s1 * sty - st * sy) / den;
        c0 = (sy - c1 * st) / s1;
    }
}

} // namespace

double Surrogate::argmin01() const {
    if (c2 > 0.0) {
        const double t_star = -c1 / (2.0 * c2);
        return std::clamp(t_star, 0.0, 1.0);
    }
    if (c1 > 0.0) return 0.0;
    if (c1 < 0.0) return 1.0;
    return 0.0;  // constant: most restrictive point
}

Surrogate estimate_peak_hosp(Simulator& sim, const NetworkModel& net,
                             const std::vector<EpiState>& x,
                             std::span<const double> u_center, int region,
                             const PeakMapConfig& cfg) {
    const int n = net.size();
    if (static_cast<int>(u_center.size()) != n ||
        static_cast<int>(x.size()) != n)
        throw StructuralError("estimate_peak_hosp: dimension mismatch");
    if (region < 0 || region >= n)
        throw StructuralError("estimate_peak_hosp: region index out of range");
    if (cfg.n_samples < 3) throw EstimationError("need at least 3 samples");
    if (!(cfg.radius > 0.0)) throw EstimationError("radius must be > 0");

    const double lo = std::max(0.0, u_center[region] - cfg.radius);
    const double hi = std::min(1.0, u_center[region] + cfg.radius);
    if (!(hi - lo > 0.0))
        throw EstimationError("degenerate sample grid for peak-map estimation");

    std::vector<double> u(u_center.begin(), u_center.end());
    std::vector<double> ts(cfg.n_samples), peaks(cfg.n_samples);
    for (int k = 0; k < cfg.n_samples; ++k) {
        const double t = lo + (hi - lo) * k / (cfg.n_samples - 1);
        u[region] = t;
        ts[k] = t;
        peaks[k] = sim.peak_h(x, u, cfg.horizon)[region];
    }

    Surrogate s;
    s.kind = Surrogate::Kind::PeakHosp;
    s.center.assign(u_center.begin(), u_center.end());
    s.coord = region;
    fit_quadratic(ts, peaks, s.c0, s.c1, s.c2);

    for (int k = 0; k < cfg.n_samples; ++k) {
        const double fit = s.eval(ts[k]);
        const double denom = std::max(std::abs(peaks[k]), 1e-300);
        s.max_rel_residual = std::max(s.max_rel_residual,
                                      std::abs(fit - peaks[k]) / denom);
        if (cfg.debug_sink)
            *cfg.debug_sink << region << ',' << ts[k] << ',' << peaks[k] << ','
                            << fit << '\n';
    }
    return s;
}

Surrogate estimate_peak_hosp(const NetworkModel& net,
                             const std::vector<EpiState>& x,
                             std::span<const double> u_center, int region,
                             const PeakMapConfig& cfg) {
    Simulator sim(net, cfg.dt);
    return estimate_peak_hosp(sim, net, x, u_center, region, cfg);
}

EndemicResult estimate_endemic_infections(const NetworkModel& net,
                                          const std::vector<EpiState>& x0,
                                          std::span<const double> u,
                                          const EndemicConfig& cfg) {
    const int n = net.size();
    if (static_cast<int>(u.size()) != n || static_cast<int>(x0.size()) != n)
        throw StructuralError("estimate_endemic_infections: dimension mismatch");
    for (double ui : u)
        if (!(ui >= 0.0 && ui <= 1.0))
            throw DomainError("control level u must be in [0,1]");

    Simulator sim(net, cfg.dt);
    auto rest = sim.run_to_rest(x0, u, cfg.t_end, cfg.settle_tol);
    EndemicResult res;
    res.settled = rest.settled;
    res.iota.resize(n);
    for (int i = 0; i < n; ++i) res.iota[i] = rest.x[i].i;
    return res;
}

EndemicJacobian endemic_jacobian(const NetworkModel& net,
                                 const std::vector<EpiState>& x0,
                                 std::span<const double> u,
                                 const EndemicConfig& cfg) {
    const int n = net.size();
    if (static_cast<int>(u.size()) != n)
        throw StructuralError("endemic_jacobian: dimension mismatch");
    EndemicJacobian jac;
    jac.n = n;
    jac.j.assign(static_cast<size_t>(n) * n, 0.0);

    std::vector<double> up(u.begin(), u.end());
    for (int k = 0; k < n; ++k) {
        // Shift the difference stencil inward at the [0,1] boundary.
        double center = std::clamp(u[k], cfg.fd_step, 1.0 - cfg.fd_step);
        const double t_plus = center + cfg.fd_step;
        const double t_minus = center - cfg.fd_step;

        up[k] = t_plus;
        auto f_plus = estimate_endemic_infections(net, x0, up, cfg);
        up[k] = t_minus;
        auto f_minus = estimate_endemic_infections(net, x0, up, cfg);
        up[k] = u[k];

        jac.all_settled = jac.all_settled && f_plus.settled && f_minus.settled;
        for (int i = 0; i < n; ++i)
            jac.j[static_cast<size_t>(i) * n + k] =
                (f_plus.iota[i] - f_minus.iota[i]) / (t_plus - t_minus);
    }
    return jac;
}

Interval feasible_interval(const Surrogate& s, double h_lim_frac) {
    if (!(h_lim_frac > 0.0)) throw DomainError("h_lim must be > 0");

    const auto infeasible = [&]() {
        Interval iv;
        iv.lo = iv.hi = s.argmin01();
        iv.feasible = false;
        return iv;
    };

    // Solve c0 + c1 t + c2 t^2 <= L on [0,1].
    const double L = h_lim_frac;
    double lo, hi;
    if (s.c2 > 0.0) {
        const double disc = s.c1 * s.c1 - 4.0 * s.c2 * (s.c0 - L);
        if (disc < 0.0) return infeasible();
        const double sq = std::sqrt(disc);
        lo = (-s.c1 - sq) / (2.0 * s.c2);
        hi = (-s.c1 + sq) / (2.0 * s.c2);
    } else if (s.c1 > 0.0) {
        lo = -std::numeric_limits<double>::infinity();
        hi = (L - s.c0) / s.c1;
    } else if (s.c1 < 0.0) {
        lo = (L - s.c0) / s.c1;
        hi = std::numeric_limits<double>::infinity();
    } else {
        if (s.c0 <= L) return Interval{0.0, 1.0, true};
        return infeasible();
    }
    lo = std::max(lo, 0.0);
    hi = std::min(hi, 1.0);
    if (lo > hi) return infeasible();
    return Interval{lo, hi, true};
}

FeasibleSet feasible_set(const std::vector<Surrogate>& per_region,
                         std::span<const double> h_lims_frac) {
    if (per_region.size() != h_lims_frac.size())
        throw StructuralError("feasible_set: one surrogate and limit per region");
    FeasibleSet set;
    set.coords.reserve(per_region.size());
    for (size_t i = 0; i < per_region.size(); ++i)
        set.coords.push_back(feasible_interval(per_region[i], h_lims_frac[i]));
    return set;
}

} // namespace npisim
