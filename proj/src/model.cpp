#include "npisim/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace npisim {

namespace {

bool in01(double x) { return x >= 0.0 && x <= 1.0; }

void require(bool ok, const std::string& msg) {
    if (!ok) throw DomainError(msg);
}

} // namespace

void ModelParams::validate() const {
    const double rates[] = {beta, delta, sigma, eta_v, epsilon, gamma, rho, y_rate};
    for (double r : rates)
        require(std::isfinite(r) && r >= 0.0, "model parameter rates must be finite and >= 0");
    require(in01(theta), "theta must be in [0,1]");
    require(in01(kappa_ih) && in01(kappa_id) && in01(kappa_hd),
            "branching probabilities must be in [0,1]");
    require(kappa_ih + kappa_id <= 1.0, "kappa_ih + kappa_id must be <= 1");
    require(in01(nu), "nu must be in [0,1]");
    require(in01(uptake_max), "uptake_max must be in [0,1]");
    require(std::isfinite(n_pop) && n_pop > 0.0, "n_pop must be > 0");
}

double EpiState::min_compartment() const {
    return std::min({s, e, i, h, r, v, d});
}

bool EpiState::finite() const {
    return std::isfinite(s) && std::isfinite(e) && std::isfinite(i) &&
           std::isfinite(h) && std::isfinite(r) && std::isfinite(v) &&
           std::isfinite(d) && std::isfinite(c_vax);
}

void EpiState::validate() const {
    require(finite(), "state must be finite");
    const double comps[] = {s, e, i, h, r, v, d};
    for (double c : comps)
        require(in01(c), "compartments must be in [0,1]");
    require(c_vax >= 0.0, "c_vax must be >= 0");
}

MobilityMatrix::MobilityMatrix(int n, std::vector<double> row_major)
    : n_(n), a_(std::move(row_major)) {
    if (n <= 0 || a_.size() != static_cast<size_t>(n) * n)
        throw StructuralError("mobility matrix buffer size does not match dimension");
    identity_ = true;
    for (int i = 0; i < n_; ++i) {
        double row = 0.0;
        for (int j = 0; j < n_; ++j) {
            const double aij = at(i, j);
            if (!(aij >= 0.0 && aij <= 1.0))
                throw DomainError("mobility entries must be in [0,1]");
            row += aij;
            if (aij != (i == j ? 1.0 : 0.0)) identity_ = false;
        }
        if (std::abs(row - 1.0) > 1e-9)
            throw DomainError("mobility matrix row " + std::to_string(i) +
                              " sums to " + std::to_string(row) + ", not 1");
    }
}

MobilityMatrix MobilityMatrix::identity(int n) {
    std::vector<double> a(static_cast<size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) a[static_cast<size_t>(i) * n + i] = 1.0;
    return MobilityMatrix(n, std::move(a));
}

double NetworkModel::total_population() const {
    double tot = 0.0;
    for (const auto& reg : regions) tot += reg.params.n_pop;
    return tot;
}

std::vector<EpiState> NetworkModel::initial_states() const {
    std::vector<EpiState> x;
    x.reserve(regions.size());
    for (const auto& reg : regions) x.push_back(reg.init);
    return x;
}

std::vector<double> NetworkModel::initial_u(double u0) const {
    return std::vector<double>(regions.size(), u0);
}

std::vector<double> NetworkModel::h_lims_frac() const {
    std::vector<double> lims;
    lims.reserve(regions.size());
    for (const auto& reg : regions) lims.push_back(reg.h_lim_per100k / 1e5);
    return lims;
}

void NetworkModel::allocate_statewide_vaccination(double y_statewide) {
    const double total = total_population();
    for (auto& reg : regions)
        reg.params.y_rate = y_statewide * reg.params.n_pop / total;
}

void NetworkModel::validate() const {
    if (regions.empty()) throw StructuralError("network has no regions");
    if (mobility.size() != size())
        throw StructuralError("mobility dimension does not match region count");
    for (const auto& reg : regions) {
        reg.params.validate();
        reg.init.validate();
        if (reg.h_lim_per100k <= 0.0)
            throw DomainError("h_lim must be > 0 for region " + reg.name);
    }
}

NetworkModel NetworkModel::single(const ModelParams& p, const EpiState& init,
                                  double h_lim_per100k, std::string name) {
    NetworkModel net;
    net.regions.push_back(Region{std::move(name), p, init, h_lim_per100k});
    net.mobility = MobilityMatrix::identity(1);
    return net;
}

namespace detail {

EpiState rhs(const EpiState& x, const ModelParams& p, double u,
             double pressure, double dt) {
    // Vaccination: the supply y_rate covers booster doses that replace
    // waning vaccine immunity (eta_v*v/nu doses hold v steady against
    // waning) plus first doses to new people until the distinct-person
    // uptake ceiling is met. Only first doses advance c_vax, so the
    // counter saturates at uptake_max while coverage is maintained
    // afterwards. First doses follow the theta:(1-theta) compartment
    // split; boosters reach people whose waned immunity put them back in
    // s. Rates saturate over a one-day timescale near the uptake cap and
    // near empty source compartments, so no integrator step with dt <= 1
    // can overshoot the cap or push s or r negative, and the dynamics do
    // not depend on the step size.
    double fresh = 0.0;
    double boost = 0.0;
    const double supply = p.y_rate / p.n_pop;
    if (supply > 0.0) {
        const double tau = std::max(dt, 1.0);
        boost = p.nu > 0.0 ? std::min(supply, p.eta_v * x.v / p.nu) : 0.0;
        fresh = std::min(supply - boost,
                         std::max(0.0, p.uptake_max - x.c_vax) / tau);
        if (p.nu > 0.0) {
            if (p.theta < 1.0)
                fresh = std::min(
                    fresh, std::max(0.0, x.r) / (tau * (1.0 - p.theta) * p.nu));
            const double s_budget = std::max(0.0, x.s) / (tau * p.nu);
            if (p.theta > 0.0) fresh = std::min(fresh, s_budget / p.theta);
            boost = std::min(boost, s_budget - p.theta * fresh);
            if (boost < 0.0) boost = 0.0;
        }
    }

    const double infection = p.beta * u * x.s * pressure;
    const double gi = p.gamma * x.i;
    const double rh = p.rho * x.h;

    EpiState dx;
    dx.s = -infection - p.nu * (p.theta * fresh + boost) - p.delta * x.s +
           p.delta + p.sigma * x.r + p.eta_v * x.v;
    dx.e = -(p.epsilon + p.delta) * x.e + infection;
    dx.i = -(p.gamma + p.delta) * x.i + p.epsilon * x.e;
    dx.h = -rh + p.kappa_ih * gi;
    dx.r = -(p.sigma + p.delta) * x.r - (1.0 - p.theta) * p.nu * fresh +
           (1.0 - p.kappa_ih - p.kappa_id) * gi + (1.0 - p.kappa_hd) * rh;
    dx.v = -(p.eta_v + p.delta) * x.v + p.nu * (fresh + boost);
    dx.d = p.kappa_id * gi + p.kappa_hd * rh;
    dx.c_vax = fresh;
    return dx;
}

} // namespace detail

EpiState derivative_single(const EpiState& x, const ModelParams& p, double u,
                           double dt) {
    if (!(u >= 0.0 && u <= 1.0)) throw DomainError("control level u must be in [0,1]");
    if (!x.finite()) throw DomainError("state must be finite");
    if (!(dt > 0.0)) throw DomainError("dt must be > 0");
    return detail::rhs(x, p, u, x.i, dt);
}

std::vector<EpiState> derivative_network(const std::vector<EpiState>& x,
                                         const NetworkModel& net,
                                         std::span<const double> u, double dt) {
    const int n = net.size();
    if (static_cast<int>(x.size()) != n || static_cast<int>(u.size()) != n)
        throw StructuralError("state/control dimension does not match region count");
    for (int i = 0; i < n; ++i) {
        if (!(u[i] >= 0.0 && u[i] <= 1.0))
            throw DomainError("control level u must be in [0,1]");
        if (!x[i].finite()) throw DomainError("state must be finite");
    }
    std::vector<EpiState> out(n);
    for (int i = 0; i < n; ++i) {
        double pressure = 0.0;
        if (net.mobility.is_identity()) {
            pressure = x[i].i;
        } else {
            for (int j = 0; j < n; ++j) pressure += net.mobility.at(i, j) * x[j].i;
        }
        out[i] = detail::rhs(x[i], net.regions[i].params, u[i], pressure, dt);
    }
    return out;
}

} // namespace npisim
