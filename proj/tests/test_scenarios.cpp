#include <doctest.h>

#include <cmath>
#include <set>

#include "npisim/scenarios.hpp"
#include "test_support.hpp"

using namespace npisim;
using namespace npisim::test;

namespace {

// Light scenario for unit tests: short horizon, cheap endemic settling.
ScenarioBase light_scenario() {
    ScenarioBase sc;
    sc.params = co_params();
    sc.init = co_init();
    sc.u0 = co_u0;
    sc.horizon = 120.0;
    sc.endemic.t_end = 500.0;
    return sc;
}

} // namespace

TEST_CASE("days_to_target: already at the target") {
    CHECK(days_to_target(std::vector<double>{1.0, 1.0, 1.0}, 1.0) == 0);
}

TEST_CASE("days_to_target: sustained attainment ignores transient spikes") {
    // spike at day 1 does not count; the sustained run starts at day 3
    CHECK(days_to_target(std::vector<double>{0.2, 0.9, 0.4, 0.9, 0.95, 1.0}, 0.9) == 3);
}

TEST_CASE("days_to_target: not reached within the horizon") {
    CHECK_FALSE(days_to_target(std::vector<double>{0.2, 0.4, 0.6}, 0.8).has_value());
    CHECK_FALSE(days_to_target(std::vector<double>{0.9, 0.9, 0.7}, 0.8).has_value());
    CHECK_FALSE(days_to_target(std::vector<double>{}, 0.8).has_value());
}

TEST_CASE("latin hypercube: exactly one sample per bin per dimension") {
    const int n = 100, dims = 6;
    const auto samples = latin_hypercube(n, dims, 42);
    REQUIRE(samples.size() == static_cast<size_t>(n));
    for (int dim = 0; dim < dims; ++dim) {
        std::set<int> bins;
        for (int k = 0; k < n; ++k) {
            const double x = samples[k][dim];
            CHECK(x >= 0.0);
            CHECK(x < 1.0);
            bins.insert(static_cast<int>(x * n));
        }
        CHECK(bins.size() == static_cast<size_t>(n));
    }
}

TEST_CASE("latin hypercube: deterministic per seed") {
    const auto a = latin_hypercube(50, 4, 7);
    const auto b = latin_hypercube(50, 4, 7);
    CHECK(a == b);
    const auto c = latin_hypercube(50, 4, 8);
    CHECK(a != c);
}

TEST_CASE("perturb_params applies multiplicative factors to named fields") {
    const ModelParams nominal = co_params();
    const auto p = perturb_params(nominal, {"beta", "gamma"}, {1.0, 0.0}, 0.15);
    CHECK(p.beta == doctest::Approx(nominal.beta * 1.15).epsilon(1e-12));
    CHECK(p.gamma == doctest::Approx(nominal.gamma * 0.85).epsilon(1e-12));
    CHECK(p.rho == nominal.rho);
    CHECK_THROWS_AS(perturb_params(nominal, {"nope"}, {0.5}, 0.15), DomainError);
}

TEST_CASE("single-cell sweep matches a direct closed-loop run") {
    ScenarioBase sc = light_scenario();
    SweepSpec spec;
    spec.h_lims = {8.0};
    spec.y_rates = {15000.0};
    spec.uptakes = {0.7};
    spec.horizon = sc.horizon;
    spec.deaths_cutoff_day = 100;
    const auto rows = sweep(sc, spec, 1);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].status == "ok");

    NetworkModel net = NetworkModel::single(sc.params, sc.init, 8.0);
    const auto trace = closed_loop(net, sc.make_config(1));
    const auto direct_u1 = days_to_target(trace, 1.0);
    CHECK(rows[0].days_u1 == direct_u1);
    CHECK(rows[0].days_u08 == days_to_target(trace, 0.8));
    CHECK(rows[0].deaths_cutoff ==
          doctest::Approx(trace.states[100][0].d * sc.params.n_pop));
}

TEST_CASE("sweep emits rows in deterministic grid order") {
    ScenarioBase sc = light_scenario();
    sc.horizon = 40.0;
    SweepSpec spec;
    spec.h_lims = {8.0, 12.0};
    spec.y_rates = {15000.0};
    spec.uptakes = {0.5, 0.7};
    spec.horizon = sc.horizon;
    spec.deaths_cutoff_day = 30;
    const auto rows = sweep(sc, spec, 2);
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].h_lim == 8.0);
    CHECK(rows[0].uptake == 0.5);
    CHECK(rows[1].uptake == 0.7);
    CHECK(rows[2].h_lim == 12.0);
    const auto again = sweep(sc, spec, 1);  // thread count must not matter
    for (size_t k = 0; k < rows.size(); ++k) {
        CHECK(rows[k].days_u1 == again[k].days_u1);
        CHECK(rows[k].deaths_cutoff == again[k].deaths_cutoff);
    }
}

TEST_CASE("monte carlo with one run degenerates to that run") {
    ScenarioBase sc = light_scenario();
    sc.horizon = 60.0;
    MonteCarloSpec spec;
    spec.n = 1;
    spec.seed = 5;
    const auto env = monte_carlo(sc, spec, 1);
    CHECK(env.n_runs == 1);
    CHECK(env.n_diverged == 0);
    REQUIRE(env.day.size() == 61);
    for (double sd : env.u.sd) CHECK(sd == 0.0);
    for (double sd : env.h.sd) CHECK(sd == 0.0);
}

TEST_CASE("monte carlo is deterministic for a fixed seed") {
    ScenarioBase sc = light_scenario();
    sc.horizon = 40.0;
    MonteCarloSpec spec;
    spec.n = 6;
    spec.seed = 11;
    const auto a = monte_carlo(sc, spec, 2);
    const auto b = monte_carlo(sc, spec, 1);
    CHECK(a.u.mean == b.u.mean);
    CHECK(a.h.sd == b.h.sd);
    CHECK(a.v.mean == b.v.mean);
}

TEST_CASE("stratified mean lies inside the plain-sampler band") {
    // Independent-sampler oracle at reduced size: the LHS mean trajectory
    // must stay within the IID run's 3-sigma envelope.
    ScenarioBase sc = light_scenario();
    sc.horizon = 60.0;
    sc.refresh = 3;
    MonteCarloSpec spec;
    spec.n = 60;
    spec.seed = 3;
    const auto lhs = monte_carlo(sc, spec, 0);
    spec.stratified = false;
    const auto iid = monte_carlo(sc, spec, 0);
    REQUIRE(lhs.n_runs == spec.n);
    REQUIRE(iid.n_runs == spec.n);
    for (size_t k = 0; k < lhs.u.mean.size(); ++k) {
        CHECK(std::abs(lhs.u.mean[k] - iid.u.mean[k]) <= 3.0 * iid.u.sd[k] + 1e-12);
        CHECK(std::abs(lhs.h.mean[k] - iid.h.mean[k]) <= 3.0 * iid.h.sd[k] + 1e-12);
    }
}

TEST_CASE("empty drop set reproduces the all-controlled baseline") {
    const ModelParams p = co_params();
    NetworkModel net;
    EpiState xa = co_init();
    EpiState xb = co_init();
    net.regions = {Region{"a", p, xa, 8.0}, Region{"b", p, xb, 8.0}};
    net.mobility = MobilityMatrix(2, {0.9, 0.1, 0.2, 0.8});
    net.allocate_statewide_vaccination(20000.0);

    NetworkRunOptions opt;
    opt.horizon = 30.0;
    opt.endemic.t_end = 400.0;
    DropSpec none;
    none.drop_day = 10;
    const auto dropped = region_drop(net, none, opt);

    ClosedLoopConfig cfg;
    cfg.mode = ControllerMode::Local;
    cfg.horizon = opt.horizon;
    cfg.ctrl.u.assign(2, opt.u0);
    cfg.costs = CostConfig::uniform(2, opt.w_cost, opt.q_cost);
    cfg.endemic = opt.endemic;
    const auto baseline = closed_loop(net, cfg);

    for (int day = 0; day < baseline.n_days(); ++day)
        for (int i = 0; i < 2; ++i) {
            CHECK(dropped.trace.u[day][i] == baseline.u[day][i]);
            CHECK(dropped.trace.states[day][i].h == baseline.states[day][i].h);
        }
    CHECK(dropped.summary.size() == 2);
    CHECK_FALSE(dropped.summary[0].dropped);
}

TEST_CASE("dropping a region pins its control level") {
    const ModelParams p = co_params();
    NetworkModel net;
    net.regions = {Region{"a", p, co_init(), 8.0}, Region{"b", p, co_init(), 8.0}};
    net.mobility = MobilityMatrix(2, {0.85, 0.15, 0.25, 0.75});
    net.allocate_statewide_vaccination(20000.0);

    NetworkRunOptions opt;
    opt.horizon = 25.0;
    opt.endemic.t_end = 400.0;
    DropSpec spec;
    spec.regions = {"b"};
    spec.drop_day = 5;
    spec.u_drop = 0.8;
    const auto res = region_drop(net, spec, opt);
    for (int day = 0; day < res.trace.n_days(); ++day) {
        if (day >= spec.drop_day) CHECK(res.trace.u[day][1] == 0.8);
    }
    CHECK(res.summary[1].dropped);
    CHECK(res.summary[1].mean_u_post_drop == doctest::Approx(0.8));
    CHECK_THROWS_AS(region_drop(net, DropSpec{{"nope"}, 5, 0.8}, opt),
                    StructuralError);
}
