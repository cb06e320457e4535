#include <doctest.h>

#include <cmath>

#include "npisim/integrate.hpp"
#include "test_support.hpp"

using namespace npisim;
using namespace npisim::test;

namespace {

ControlSignal constant_u(double value) {
    return [value](double, std::span<double> u) {
        for (double& ui : u) ui = value;
    };
}

} // namespace

TEST_CASE("zero horizon returns only the initial state") {
    const auto net = NetworkModel::single(co_params(), co_init());
    const auto traj = integrate(net, {co_init()}, constant_u(0.3), 0.0, 0.1);
    CHECK(traj.n_records() == 1);
    CHECK(traj.t[0] == 0.0);
    CHECK(traj.states[0][0].s == co_init().s);
}

TEST_CASE("integrator validation against a pure exponential decay") {
    // With epsilon = 1, delta = 0 and no transmission, e-dot = -e: a
    // closed-form test problem embedded in the model equations.
    ModelParams p;
    p.epsilon = 1.0;
    p.gamma = 0.1;
    p.n_pop = 1.0;
    EpiState x0;
    x0.e = 1.0;
    const auto traj = integrate_single(p, x0, [](double) { return 0.0; }, 1.0, 0.1);
    const double expected = std::exp(-1.0);
    CHECK(std::abs(traj.states.back()[0].e - expected) < 1e-6);
}

TEST_CASE("step halving changes the fitted-scenario trajectory below 1e-6") {
    const auto net = NetworkModel::single(co_params(), co_init());
    const auto coarse = integrate(net, {co_init()}, constant_u(co_u0), 365.0, 0.1);
    const auto fine = integrate(net, {co_init()}, constant_u(co_u0), 365.0, 0.01);
    double max_diff = 0.0;
    for (int day = 0; day <= 365; day += 5) {
        const EpiState& a = coarse.states[coarse.index_at_day(day)][0];
        const EpiState& b = fine.states[fine.index_at_day(day)][0];
        max_diff = std::max({max_diff, std::abs(a.s - b.s), std::abs(a.e - b.e),
                             std::abs(a.i - b.i), std::abs(a.h - b.h),
                             std::abs(a.r - b.r), std::abs(a.v - b.v),
                             std::abs(a.d - b.d), std::abs(a.c_vax - b.c_vax)});
    }
    CHECK(max_diff <= 1e-6);
}

TEST_CASE("monotone counters and nonnegativity over two years") {
    const auto net = NetworkModel::single(co_params(), co_init());
    const auto traj = integrate(net, {co_init()}, constant_u(co_u0), 730.0, 0.1);
    CHECK(traj.worst_negative >= -1e-9);
    double prev_d = -1.0, prev_c = -1.0;
    for (const auto& rec : traj.states) {
        CHECK(rec[0].d >= prev_d);
        CHECK(rec[0].c_vax >= prev_c);
        prev_d = rec[0].d;
        prev_c = rec[0].c_vax;
    }
    // administered doses respect the uptake ceiling
    CHECK(traj.states.back()[0].c_vax <= co_params().uptake_max + 1e-9);
    CHECK(traj.states.back()[0].c_vax ==
          doctest::Approx(co_params().uptake_max).epsilon(1e-9));
}

TEST_CASE("network trajectory with identity mobility equals independent "
          "single-region runs") {
    const ModelParams p = co_params();
    EpiState x_b = co_init();
    x_b.i *= 2.0;
    x_b.s -= x_b.i / 2.0;  // keep the sum at 1
    NetworkModel net;
    net.regions = {Region{"a", p, co_init(), 8.0}, Region{"b", p, x_b, 8.0}};
    net.mobility = MobilityMatrix::identity(2);

    const auto joint = integrate(net, net.initial_states(), constant_u(0.35), 120.0, 0.1);
    const auto solo_a = integrate(NetworkModel::single(p, co_init()), {co_init()},
                                  constant_u(0.35), 120.0, 0.1);
    const auto solo_b = integrate(NetworkModel::single(p, x_b), {x_b},
                                  constant_u(0.35), 120.0, 0.1);
    double max_diff = 0.0;
    for (int rec = 0; rec < joint.n_records(); ++rec) {
        max_diff = std::max(max_diff,
                            std::abs(joint.states[rec][0].i - solo_a.states[rec][0].i));
        max_diff = std::max(max_diff,
                            std::abs(joint.states[rec][1].i - solo_b.states[rec][0].i));
        max_diff = std::max(max_diff,
                            std::abs(joint.states[rec][1].h - solo_b.states[rec][0].h));
    }
    CHECK(max_diff <= 1e-12);
}

TEST_CASE("full lockdown with no waning extinguishes the epidemic") {
    ModelParams p = co_params();
    p.sigma = 0.0;
    p.eta_v = 0.0;
    const auto traj = integrate(NetworkModel::single(p, co_init()), {co_init()},
                                constant_u(0.0), 400.0, 0.1);
    double prev_e = 1.0, prev_i = 1.0;
    for (const auto& rec : traj.states) {
        CHECK(rec[0].e <= prev_e + 1e-15);
        CHECK(rec[0].i <= prev_i + 1e-15);
        prev_e = rec[0].e;
        prev_i = rec[0].i;
    }
    CHECK(traj.states.back()[0].e < 1e-10);
    CHECK(traj.states.back()[0].i < 1e-10);
}

TEST_CASE("control signal outside [0,1] is rejected") {
    const auto net = NetworkModel::single(co_params(), co_init());
    CHECK_THROWS_AS(integrate(net, {co_init()}, constant_u(1.2), 1.0, 0.1),
                    DomainError);
}

TEST_CASE("integrate rejects invalid setup") {
    const auto net = NetworkModel::single(co_params(), co_init());
    CHECK_THROWS_AS(integrate(net, {co_init()}, constant_u(0.5), -1.0, 0.1),
                    DomainError);
    CHECK_THROWS_AS(integrate(net, {co_init()}, constant_u(0.5), 10.0, 0.0),
                    DomainError);
    CHECK_THROWS_AS(integrate(net, {co_init(), co_init()}, constant_u(0.5), 10.0, 0.1),
                    StructuralError);
}

TEST_CASE("trajectory u column records the applied signal") {
    const auto net = NetworkModel::single(co_params(), co_init());
    const auto traj = integrate(
        net, {co_init()},
        [](double t, std::span<double> u) { u[0] = t < 5.0 ? 0.2 : 0.6; }, 10.0, 0.1);
    CHECK(traj.u.size() == traj.states.size());
    CHECK(traj.u.front()[0] == 0.2);
    CHECK(traj.u.back()[0] == 0.6);
}
