#include "npisim/integrate.hpp"

#include <algorithm>
#include <cmath>

namespace npisim {

namespace {

void clamp_nonnegative(std::vector<EpiState>& x, long& events, double& worst) {
    for (auto& st : x) {
        double* comps[] = {&st.s, &st.e, &st.i, &st.h, &st.r, &st.v, &st.d, &st.c_vax};
        for (double* c : comps) {
            if (*c < 0.0) {
                worst = std::min(worst, *c);
                *c = 0.0;
                ++events;
            }
        }
    }
}

bool all_finite(const std::vector<EpiState>& x) {
    return std::all_of(x.begin(), x.end(), [](const EpiState& s) { return s.finite(); });
}

} // namespace

int Trajectory::index_at_day(double day) const {
    if (t.empty()) return -1;
    const double step = dt > 0 ? dt : 1.0;
    long idx = std::lround(day / step);
    idx = std::clamp<long>(idx, 0, static_cast<long>(t.size()) - 1);
    return static_cast<int>(idx);
}

Simulator::Simulator(const NetworkModel& net, double dt)
    : net_(&net), n_(net.size()), dt_(dt) {
    if (!(dt > 0.0)) throw DomainError("dt must be > 0");
    k1_.resize(n_);
    k2_.resize(n_);
    k3_.resize(n_);
    k4_.resize(n_);
    xt_.resize(n_);
}

void Simulator::eval_rhs(const std::vector<EpiState>& x, std::span<const double> u,
                         std::vector<EpiState>& out) const {
    const auto& mob = net_->mobility;
    for (int i = 0; i < n_; ++i) {
        double pressure;
        if (mob.is_identity()) {
            pressure = x[i].i;
        } else {
            pressure = 0.0;
            for (int j = 0; j < n_; ++j) pressure += mob.at(i, j) * x[j].i;
        }
        out[i] = detail::rhs(x[i], net_->regions[i].params, u[i], pressure, dt_);
    }
}

void Simulator::rk4_step(std::vector<EpiState>& x, std::span<const double> u, double /*t*/) {
    const double half = 0.5 * dt_;
    eval_rhs(x, u, k1_);
    for (int i = 0; i < n_; ++i) {
        const EpiState& a = x[i];
        const EpiState& k = k1_[i];
        EpiState& b = xt_[i];
        b.s = a.s + half * k.s;
        b.e = a.e + half * k.e;
        b.i = a.i + half * k.i;
        b.h = a.h + half * k.h;
        b.r = a.r + half * k.r;
        b.v = a.v + half * k.v;
        b.d = a.d + half * k.d;
        b.c_vax = a.c_vax + half * k.c_vax;
    }
    eval_rhs(xt_, u, k2_);
    for (int i = 0; i < n_; ++i) {
        const EpiState& a = x[i];
        const EpiState& k = k2_[i];
        EpiState& b = xt_[i];
        b.s = a.s + half * k.s;
        b.e = a.e + half * k.e;
        b.i = a.i + half * k.i;
        b.h = a.h + half * k.h;
        b.r = a.r + half * k.r;
        b.v = a.v + half * k.v;
        b.d = a.d + half * k.d;
        b.c_vax = a.c_vax + half * k.c_vax;
    }
    eval_rhs(xt_, u, k3_);
    for (int i = 0; i < n_; ++i) {
        const EpiState& a = x[i];
        const EpiState& k = k3_[i];
        EpiState& b = xt_[i];
        b.s = a.s + dt_ * k.s;
        b.e = a.e + dt_ * k.e;
        b.i = a.i + dt_ * k.i;
        b.h = a.h + dt_ * k.h;
        b.r = a.r + dt_ * k.r;
        b.v = a.v + dt_ * k.v;
        b.d = a.d + dt_ * k.d;
        b.c_vax = a.c_vax + dt_ * k.c_vax;
    }
    eval_rhs(xt_, u, k4_);
    const double w = dt_ / 6.0;
    for (int i = 0; i < n_; ++i) {
        EpiState& a = x[i];
        const EpiState& ka = k1_[i];
        const EpiState& kb = k2_[i];
        const EpiState& kc = k3_[i];
        const EpiState& kd = k4_[i];
        a.s += w * (ka.s + 2.0 * (kb.s + kc.s) + kd.s);
        a.e += w * (ka.e + 2.0 * (kb.e + kc.e) + kd.e);
        a.i += w * (ka.i + 2.0 * (kb.i + kc.i) + kd.i);
        a.h += w * (ka.h + 2.0 * (kb.h + kc.h) + kd.h);
        a.r += w * (ka.r + 2.0 * (kb.r + kc.r) + kd.r);
        a.v += w * (ka.v + 2.0 * (kb.v + kc.v) + kd.v);
        a.d += w * (ka.d + 2.0 * (kb.d + kc.d) + kd.d);
        a.c_vax += w * (ka.c_vax + 2.0 * (kb.c_vax + kc.c_vax) + kd.c_vax);
    }
}

void Simulator::advance(std::vector<EpiState>& x, std::span<const double> u,
                        double days, long* clamp_events) {
    if (static_cast<int>(x.size()) != n_ || static_cast<int>(u.size()) != n_)
        throw StructuralError("state/control dimension does not match region count");
    const long n_steps = std::lround(days / dt_);
    long events = 0;
    for (long k = 0; k < n_steps; ++k) {
        rk4_step(x, u, k * dt_);
        clamp_nonnegative(x, events, worst_negative_);
        if (!all_finite(x))
            throw DivergenceError("integration diverged at day " +
                                      std::to_string((k + 1) * dt_),
                                  (k + 1) * dt_);
    }
    if (clamp_events) *clamp_events += events;
}

std::vector<double> Simulator::peak_h(const std::vector<EpiState>& x0,
                                      std::span<const double> u, double horizon) {
    std::vector<EpiState> x = x0;
    std::vector<double> peak(n_);
    for (int i = 0; i < n_; ++i) peak[i] = x[i].h;
    const long n_steps = std::lround(horizon / dt_);
    long events = 0;
    for (long k = 0; k < n_steps; ++k) {
        rk4_step(x, u, k * dt_);
        clamp_nonnegative(x, events, worst_negative_);
        if (!all_finite(x))
            throw DivergenceError("integration diverged at day " +
                                      std::to_string((k + 1) * dt_),
                                  (k + 1) * dt_);
        for (int i = 0; i < n_; ++i) peak[i] = std::max(peak[i], x[i].h);
    }
    return peak;
}

Simulator::RestResult Simulator::run_to_rest(const std::vector<EpiState>& x0,
                                             std::span<const double> u,
                                             double t_end, double settle_tol) {
    RestResult res;
    res.x = x0;
    const long n_steps = std::lround(t_end / dt_);
    long events = 0;
    for (long k = 0; k < n_steps; ++k) {
        // k1 of the upcoming step is the derivative at the current state;
        // use it for the settle check before committing the step.
        eval_rhs(res.x, u, k1_);
        double max_rate = 0.0;
        for (const auto& dx : k1_) {
            max_rate = std::max({max_rate, std::abs(dx.s), std::abs(dx.e),
                                 std::abs(dx.i), std::abs(dx.h), std::abs(dx.r),
                                 std::abs(dx.v)});
        }
        if (max_rate < settle_tol) {
            res.settled = true;
            res.t_reached = k * dt_;
            return res;
        }
        rk4_step(res.x, u, k * dt_);
        clamp_nonnegative(res.x, events, worst_negative_);
        if (!all_finite(res.x))
            throw DivergenceError("integration diverged at day " +
                                      std::to_string((k + 1) * dt_),
                                  (k + 1) * dt_);
    }
    res.t_reached = t_end;
    return res;
}

Trajectory integrate(const NetworkModel& net, std::vector<EpiState> x0,
                     const ControlSignal& u_signal, double horizon, double dt) {
    net.validate();
    if (horizon < 0.0) throw DomainError("horizon must be >= 0");
    if (!(dt > 0.0)) throw DomainError("dt must be > 0");
    const int n = net.size();
    if (static_cast<int>(x0.size()) != n)
        throw StructuralError("initial state count does not match region count");
    for (const auto& st : x0) st.validate();

    Simulator sim(net, dt);
    Trajectory traj;
    traj.dt = dt;
    const long n_steps = std::lround(horizon / dt);
    traj.t.reserve(n_steps + 1);
    traj.states.reserve(n_steps + 1);
    traj.u.reserve(n_steps + 1);
    traj.t.push_back(0.0);
    traj.states.push_back(x0);

    std::vector<double> u(n);
    std::vector<EpiState> x = std::move(x0);
    u_signal(0.0, u);
    traj.u.push_back(u);
    for (long k = 0; k < n_steps; ++k) {
        const double t = k * dt;
        u_signal(t, u);
        for (double ui : u)
            if (!(ui >= 0.0 && ui <= 1.0))
                throw DomainError("control signal must stay in [0,1]");
        sim.advance(x, u, dt, &traj.clamp_events);
        traj.t.push_back((k + 1) * dt);
        traj.states.push_back(x);
        u_signal((k + 1) * dt, u);
        traj.u.push_back(u);
    }
    traj.worst_negative = sim.worst_negative();
    return traj;
}

Trajectory integrate_single(const ModelParams& p, const EpiState& x0,
                            const std::function<double(double)>& u_of_t,
                            double horizon, double dt) {
    NetworkModel net = NetworkModel::single(p, x0);
    return integrate(
        net, {x0},
        [&](double t, std::span<double> u) { u[0] = u_of_t(t); }, horizon, dt);
}

} // namespace npisim
