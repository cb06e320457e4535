#include "npisim/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "npisim/integrate.hpp"

namespace npisim {

void HospCensusSeries::validate() const {
    for (size_t k = 0; k < points.size(); ++k) {
        if (points[k].hospitalized < 0.0)
            throw DataError("census counts must be >= 0 (region " + region + ")");
        if (k > 0 && points[k].date <= points[k - 1].date)
            throw DataError("census dates must be strictly increasing (region " +
                            region + ")");
    }
}

HospCensusSeries HospCensusSeries::window(const DateRange& range) const {
    HospCensusSeries out;
    out.region = region;
    for (const auto& pt : points)
        if (range.contains(pt.date)) out.points.push_back(pt);
    return out;
}

namespace {

// Simulated daily hospitalized counts at the census dates; day 0 of the
// simulation is the first census date.
std::vector<double> predict_census(const ModelParams& p, const EpiState& x0,
                                   const HospCensusSeries& series,
                                   const FitOptions& opt) {
    NetworkModel net = NetworkModel::single(p, x0);
    Simulator sim(net, opt.dt);
    std::vector<EpiState> x = {x0};
    const double u[1] = {opt.u_known};

    std::vector<double> out;
    out.reserve(series.points.size());
    const int day0 = series.points.front().date;
    int current = 0;
    for (const auto& pt : series.points) {
        const int target = pt.date - day0;
        if (target > current) {
            sim.advance(x, u, static_cast<double>(target - current), nullptr);
            current = target;
        }
        out.push_back(x[0].h * p.n_pop);
    }
    return out;
}

double sse_between(const std::vector<double>& pred,
                   const HospCensusSeries& series) {
    double sse = 0.0;
    for (size_t k = 0; k < pred.size(); ++k) {
        const double err = pred[k] - series.points[k].hospitalized;
        sse += err * err;
    }
    return sse;
}

} // namespace

FitResult fit_parameters(const HospCensusSeries& series, ModelParams fixed,
                         const EpiState& x0, const FitOptions& opt) {
    series.validate();
    if (series.points.size() < 14)
        throw DomainError("census series must cover at least 14 days");
    if (!(opt.u_known > 0.0 && opt.u_known <= 1.0))
        throw DomainError("u_known must be in (0,1]");
    x0.validate();

    // Parameter box: beta >= 0, kappa_ih in [0, 1 - kappa_id].
    const double kappa_hi = 1.0 - fixed.kappa_id;
    const auto clamp_params = [&](double& beta, double& kappa) {
        beta = std::max(beta, 0.0);
        kappa = std::clamp(kappa, 0.0, kappa_hi);
    };

    double beta = fixed.beta;
    double kappa = fixed.kappa_ih;
    clamp_params(beta, kappa);

    const auto eval_sse = [&](double b, double k) {
        ModelParams p = fixed;
        p.beta = b;
        p.kappa_ih = k;
        p.validate();
        return sse_between(predict_census(p, x0, series, opt), series);
    };

    double sse = eval_sse(beta, kappa);
    FitResult res;
    res.sse_history.push_back(sse);

    double data_norm = 0.0;
    for (const auto& pt : series.points)
        data_norm += pt.hospitalized * pt.hospitalized;

    // Already an (essentially) exact fit: nothing to correct.
    if (sse <= 1e-12 * std::max(data_norm, 1.0)) {
        res.beta = beta;
        res.kappa_ih = kappa;
        res.sse = sse;
        res.rmse = std::sqrt(sse / series.points.size());
        return res;
    }

    // Gradient scaling: parameters measured relative to their initial
    // magnitude so the two coordinates are comparable.
    const double scale_b = std::max(std::abs(beta), 1e-3);
    const double scale_k = std::max(std::abs(kappa), 1e-6);

    double step_len = 0.25;  // in scaled coordinates
    int iter = 0;
    bool converged = false;
    for (; iter < opt.max_iterations && !converged; ++iter) {
        const double db = opt.fd_rel_step * scale_b;
        const double dk = opt.fd_rel_step * scale_k;
        const double gb = (eval_sse(beta + db, kappa) - eval_sse(std::max(beta - db, 0.0), kappa)) /
                          (db + std::min(beta, db));
        const double gk = (eval_sse(beta, std::min(kappa + dk, kappa_hi)) -
                           eval_sse(beta, std::max(kappa - dk, 0.0))) /
                          (std::min(kappa + dk, kappa_hi) - std::max(kappa - dk, 0.0));

        // Scaled steepest-descent direction.
        double dir_b = -gb * scale_b;
        double dir_k = -gk * scale_k;
        const double norm = std::hypot(dir_b, dir_k);
        if (norm < 1e-300) {
            if (iter == 0)
                throw FitError("fit cannot improve: zero gradient at the initial "
                               "guess (SSE " + std::to_string(sse) + ")");
            break;
        }
        dir_b /= norm;
        dir_k /= norm;

        // Backtracking line search with step growth on first-try success.
        bool accepted = false;
        double alpha = step_len;
        for (int bt = 0; bt < 40; ++bt) {
            double nb = beta + alpha * dir_b * scale_b;
            double nk = kappa + alpha * dir_k * scale_k;
            clamp_params(nb, nk);
            const double trial = eval_sse(nb, nk);
            if (trial < sse) {
                const double improvement = (sse - trial) / sse;
                beta = nb;
                kappa = nk;
                sse = trial;
                res.sse_history.push_back(sse);
                step_len = bt == 0 ? alpha * 2.0 : alpha;
                accepted = true;
                converged = improvement < opt.rel_tol;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted) {
            if (iter == 0)
                throw FitError("fit cannot improve from the initial guess: no "
                               "tested step reduced the error (SSE " +
                               std::to_string(sse) + ")");
            break;
        }
    }

    res.beta = beta;
    res.kappa_ih = kappa;
    res.sse = sse;
    res.rmse = std::sqrt(sse / series.points.size());
    res.iterations = iter;
    return res;
}

MobilityMatrix build_mobility_matrix(const std::vector<TravelRecord>& records,
                                     const std::vector<std::string>& regions,
                                     const DateRange& range) {
    const int n = static_cast<int>(regions.size());
    if (n == 0) throw StructuralError("region list is empty");
    std::map<std::string, int> index;
    for (int i = 0; i < n; ++i) index[regions[i]] = i;

    // visits[i][j]: visits into destination i from origin j.
    std::vector<double> visits(static_cast<size_t>(n) * n, 0.0);
    for (const auto& rec : records) {
        if (!range.contains(rec.date)) continue;
        const auto dst = index.find(rec.destination);
        const auto org = index.find(rec.origin);
        if (dst == index.end())
            throw DataError("travel record names unknown destination '" +
                            rec.destination + "'");
        if (org == index.end())
            throw DataError("travel record names unknown origin '" + rec.origin +
                            "'");
        if (rec.visits < 0.0) throw DataError("travel visits must be >= 0");
        visits[static_cast<size_t>(dst->second) * n + org->second] += rec.visits;
    }

    std::vector<double> a(static_cast<size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) {
        double total = 0.0;
        for (int j = 0; j < n; ++j) total += visits[static_cast<size_t>(i) * n + j];
        if (total <= 0.0)
            throw DataError("no travel activity into region '" + regions[i] +
                            "' within the date range");
        for (int j = 0; j < n; ++j)
            a[static_cast<size_t>(i) * n + j] =
                visits[static_cast<size_t>(i) * n + j] / total;
    }
    return MobilityMatrix(n, std::move(a));
}

} // namespace npisim
