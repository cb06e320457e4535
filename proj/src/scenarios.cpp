#include "npisim/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "npisim/parallel.hpp"
#include "npisim/rng.hpp"

namespace npisim {

ClosedLoopConfig ScenarioBase::make_config(int n_regions) const {
    ClosedLoopConfig cfg;
    cfg.mode = ControllerMode::Centralized;
    cfg.horizon = horizon;
    cfg.dt = dt;
    cfg.ctrl.u.assign(n_regions, u0);
    cfg.ctrl.gain = gain;
    cfg.ctrl.cadence = cadence;
    cfg.ctrl.refresh = refresh;
    cfg.costs = CostConfig::uniform(n_regions, w_cost, q_cost);
    cfg.peak = peak;
    cfg.endemic = endemic;
    return cfg;
}

std::optional<int> days_to_target(const std::vector<double>& u_daily,
                                  double u_target) {
    if (u_daily.empty()) return std::nullopt;
    // Walk backwards: the answer is one past the last day below target.
    int k = static_cast<int>(u_daily.size());
    while (k > 0 && u_daily[k - 1] >= u_target) --k;
    if (k == static_cast<int>(u_daily.size())) return std::nullopt;
    return k;
}

std::optional<int> days_to_target(const ClosedLoopTrace& trace, double u_target,
                                  int region) {
    return days_to_target(trace.u_series(region), u_target);
}

void SweepSpec::validate() const {
    if (h_lims.empty() || y_rates.empty() || uptakes.empty())
        throw DomainError("sweep grids must be non-empty");
    if (!(u_target > 0.0 && u_target <= 1.0))
        throw DomainError("u_target must be in (0,1]");
    if (deaths_cutoff_day < 0 || deaths_cutoff_day > horizon)
        throw DomainError("deaths cutoff day must lie within the horizon");
}

std::vector<SweepRow> sweep(const ScenarioBase& base, const SweepSpec& spec,
                            int n_threads) {
    spec.validate();

    struct Cell {
        double h_lim, y_rate, uptake;
    };
    std::vector<Cell> cells;
    for (double h_lim : spec.h_lims)
        for (double y_rate : spec.y_rates)
            for (double uptake : spec.uptakes)
                cells.push_back({h_lim, y_rate, uptake});

    std::vector<SweepRow> rows(cells.size());
    parallel_for(static_cast<int>(cells.size()), n_threads, [&](int idx) {
        const Cell& cell = cells[idx];
        SweepRow& row = rows[idx];
        row.h_lim = cell.h_lim;
        row.y_rate = cell.y_rate;
        row.uptake = cell.uptake;
        try {
            ScenarioBase sc = base;
            sc.params.y_rate = cell.y_rate;
            sc.params.uptake_max = cell.uptake;
            sc.h_lim_per100k = cell.h_lim;
            sc.horizon = spec.horizon;

            NetworkModel net =
                NetworkModel::single(sc.params, sc.init, sc.h_lim_per100k);
            ClosedLoopConfig cfg = sc.make_config(1);
            const ClosedLoopTrace trace = closed_loop(net, cfg);

            const auto u_series = trace.u_series(0);
            row.days_u1 = days_to_target(u_series, 1.0);
            row.days_u08 = days_to_target(u_series, 0.8);
            row.deaths_cutoff =
                trace.states[spec.deaths_cutoff_day][0].d * sc.params.n_pop;
        } catch (const Error& err) {
            row.status = std::string("failed: ") + err.what();
        }
    });
    return rows;
}

std::vector<std::vector<double>> latin_hypercube(int n, int dims, uint64_t seed) {
    if (n < 1 || dims < 1)
        throw DomainError("latin_hypercube needs n >= 1 and dims >= 1");
    std::vector<std::vector<double>> samples(n, std::vector<double>(dims));
    for (int dim = 0; dim < dims; ++dim) {
        Rng rng(seed, static_cast<uint64_t>(dim) + 1);
        // Fisher-Yates permutation of the n bins.
        std::vector<int> bins(n);
        std::iota(bins.begin(), bins.end(), 0);
        for (int k = n - 1; k > 0; --k)
            std::swap(bins[k], bins[rng.bounded(static_cast<uint64_t>(k) + 1)]);
        for (int k = 0; k < n; ++k)
            samples[k][dim] = (bins[k] + rng.uniform01()) / n;
    }
    return samples;
}

ModelParams perturb_params(const ModelParams& nominal,
                           const std::vector<std::string>& varied,
                           const std::vector<double>& unit_sample, double pct) {
    if (varied.size() != unit_sample.size())
        throw StructuralError("perturbation sample size mismatch");
    ModelParams p = nominal;
    for (size_t k = 0; k < varied.size(); ++k) {
        const double factor = 1.0 + pct * (2.0 * unit_sample[k] - 1.0);
        const std::string& name = varied[k];
        double* field = nullptr;
        if (name == "beta") field = &p.beta;
        else if (name == "theta") field = &p.theta;
        else if (name == "delta") field = &p.delta;
        else if (name == "sigma") field = &p.sigma;
        else if (name == "eta_v") field = &p.eta_v;
        else if (name == "epsilon") field = &p.epsilon;
        else if (name == "gamma") field = &p.gamma;
        else if (name == "kappa_ih") field = &p.kappa_ih;
        else if (name == "kappa_id") field = &p.kappa_id;
        else if (name == "kappa_hd") field = &p.kappa_hd;
        else if (name == "rho") field = &p.rho;
        else if (name == "nu") field = &p.nu;
        else throw DomainError("unknown varied parameter '" + name + "'");
        *field *= factor;
    }
    return p;
}

void MonteCarloSpec::validate() const {
    if (n < 1) throw DomainError("monte carlo needs n >= 1");
    if (!(pct > 0.0 && pct < 1.0)) throw DomainError("pct must be in (0,1)");
    if (varied.empty()) throw DomainError("varied parameter set is empty");
}

Envelope monte_carlo(const ScenarioBase& base, const MonteCarloSpec& spec,
                     int n_threads) {
    spec.validate();
    const int dims = static_cast<int>(spec.varied.size());

    std::vector<std::vector<double>> unit;
    if (spec.stratified) {
        unit = latin_hypercube(spec.n, dims, spec.seed);
    } else {
        unit.assign(spec.n, std::vector<double>(dims));
        for (int k = 0; k < spec.n; ++k) {
            Rng rng(spec.seed, 0x10000u + static_cast<uint64_t>(k));
            for (int dim = 0; dim < dims; ++dim) unit[k][dim] = rng.uniform01();
        }
    }

    const int n_days = static_cast<int>(std::lround(base.horizon)) + 1;
    struct RunOut {
        bool ok = false;
        std::vector<double> u, h, i, v;
    };
    std::vector<RunOut> runs(spec.n);

    parallel_for(spec.n, n_threads, [&](int k) {
        RunOut& out = runs[k];
        try {
            ScenarioBase sc = base;
            sc.params = perturb_params(base.params, spec.varied, unit[k], spec.pct);
            sc.params.validate();
            NetworkModel net =
                NetworkModel::single(sc.params, sc.init, sc.h_lim_per100k);
            const ClosedLoopTrace trace = closed_loop(net, sc.make_config(1));
            out.u.resize(n_days);
            out.h.resize(n_days);
            out.i.resize(n_days);
            out.v.resize(n_days);
            for (int day = 0; day < n_days; ++day) {
                out.u[day] = trace.u[day][0];
                out.h[day] = trace.states[day][0].h;
                out.i[day] = trace.states[day][0].i;
                out.v[day] = trace.states[day][0].v;
            }
            out.ok = true;
        } catch (const Error&) {
            out.ok = false;  // diverged or invalid draw: excluded and counted
        }
    });

    Envelope env;
    env.day.resize(n_days);
    std::iota(env.day.begin(), env.day.end(), 0);
    for (auto* series : {&env.u, &env.h, &env.i, &env.v}) {
        series->mean.assign(n_days, 0.0);
        series->sd.assign(n_days, 0.0);
    }
    for (const auto& run : runs) {
        if (run.ok) ++env.n_runs;
        else ++env.n_diverged;
    }
    if (env.n_runs == 0) return env;

    const auto reduce = [&](Envelope::Series& series,
                            std::vector<double> RunOut::*member) {
        for (int day = 0; day < n_days; ++day) {
            double sum = 0.0;
            for (const auto& run : runs)
                if (run.ok) sum += (run.*member)[day];
            const double mean = sum / env.n_runs;
            double var = 0.0;
            for (const auto& run : runs)
                if (run.ok) {
                    const double dev = (run.*member)[day] - mean;
                    var += dev * dev;
                }
            series.mean[day] = mean;
            series.sd[day] = env.n_runs > 1 ? std::sqrt(var / (env.n_runs - 1)) : 0.0;
        }
    };
    reduce(env.u, &RunOut::u);
    reduce(env.h, &RunOut::h);
    reduce(env.i, &RunOut::i);
    reduce(env.v, &RunOut::v);
    return env;
}

DropResult region_drop(const NetworkModel& net, const DropSpec& spec,
                       const NetworkRunOptions& opt) {
    net.validate();
    if (spec.drop_day < 0 || spec.drop_day > opt.horizon)
        throw DomainError("drop day must lie within the horizon");

    std::vector<int> drop_idx;
    for (const auto& name : spec.regions) {
        const auto it = std::find_if(
            net.regions.begin(), net.regions.end(),
            [&](const Region& reg) { return reg.name == name; });
        if (it == net.regions.end())
            throw StructuralError("drop region '" + name + "' not in network");
        drop_idx.push_back(static_cast<int>(it - net.regions.begin()));
    }

    ClosedLoopConfig cfg;
    cfg.mode = ControllerMode::Local;
    cfg.horizon = opt.horizon;
    cfg.dt = opt.dt;
    cfg.ctrl.u.assign(net.size(), opt.u0);
    cfg.ctrl.gain = opt.gain;
    cfg.ctrl.cadence = opt.cadence;
    cfg.ctrl.refresh = opt.refresh;
    cfg.costs = CostConfig::uniform(net.size(), opt.w_cost, opt.q_cost);
    cfg.peak = opt.peak;
    cfg.endemic = opt.endemic;
    cfg.n_threads = opt.n_threads;
    if (!drop_idx.empty())
        cfg.drop = DropPolicy{drop_idx, spec.drop_day, spec.u_drop};

    DropResult res;
    res.trace = closed_loop(net, cfg);

    const auto& trace = res.trace;
    const int n_days = trace.n_days();
    for (int i = 0; i < net.size(); ++i) {
        DropSummaryRow row;
        row.region = net.regions[i].name;
        row.dropped =
            std::find(drop_idx.begin(), drop_idx.end(), i) != drop_idx.end();
        double peak = 0.0;
        int above = 0;
        double u_sum = 0.0;
        int u_count = 0;
        for (int day = 0; day < n_days; ++day) {
            const double h = trace.states[day][i].h;
            peak = std::max(peak, h);
            if (h > trace.h_lim_frac[i]) ++above;
            if (day >= spec.drop_day) {
                u_sum += trace.u[day][i];
                ++u_count;
            }
        }
        row.peak_h_per100k = peak * 1e5;
        row.days_above_limit = above;
        row.mean_u_post_drop = u_count > 0 ? u_sum / u_count : 0.0;
        res.summary.push_back(std::move(row));
    }
    return res;
}

} // namespace npisim
