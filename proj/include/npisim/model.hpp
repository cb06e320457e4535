#pragma once

#include <span>
#include <string>
#include <vector>

#include "npisim/errors.hpp"

namespace npisim {

/// Rate constants and vaccination policy of the SEIHRVS model.
/// All rates are per day, probabilities dimensionless.
struct ModelParams {
    double beta = 0.0;        ///< transmission rate
    double theta = 0.0;       ///< fraction of vaccines given to susceptibles
    double delta = 0.0;       ///< birth/death rate
    double sigma = 0.0;       ///< natural-immunity waning rate
    double eta_v = 0.0;       ///< vaccine-immunity waning rate
    double epsilon = 0.0;     ///< 1 / latency period
    double gamma = 0.0;       ///< recovery rate
    double kappa_ih = 0.0;    ///< P(hospitalization | infection)
    double kappa_id = 0.0;    ///< P(death | infection)
    double kappa_hd = 0.0;    ///< P(death | hospitalization)
    double rho = 0.0;         ///< hospital discharge rate
    double nu = 0.0;          ///< vaccine efficacy
    double y_rate = 0.0;      ///< vaccinations, persons/day
    double uptake_max = 1.0;  ///< cap on cumulative administered fraction
    double n_pop = 1.0;       ///< population size, persons

    /// Throws DomainError unless all rates are >= 0, probabilities in
    /// [0,1], kappa_ih + kappa_id <= 1 and n_pop > 0.
    void validate() const;
};

/// Compartment fractions plus the cumulative administered-vaccination
/// counter c_vax. All values are population fractions.
struct EpiState {
    double s = 0.0;
    double e = 0.0;
    double i = 0.0;
    double h = 0.0;
    double r = 0.0;
    double v = 0.0;
    double d = 0.0;
    double c_vax = 0.0;

    double compartment_sum() const { return s + e + i + h + r + v + d; }
    double min_compartment() const;
    bool finite() const;

    /// Throws DomainError if any compartment is outside [0,1] or non-finite.
    void validate() const;
};

/// Row-stochastic inter-region contact intensities a_ij: the share of
/// contact-relevant activity in region i attributable to residents of
/// region j.
class MobilityMatrix {
public:
    MobilityMatrix() = default;

    /// Validating constructor from a row-major n*n buffer. Every row must
    /// sum to 1 within 1e-9 and all entries lie in [0,1].
    MobilityMatrix(int n, std::vector<double> row_major);

    static MobilityMatrix identity(int n);

    int size() const { return n_; }
    double at(int i, int j) const { return a_[static_cast<size_t>(i) * n_ + j]; }
    bool is_identity() const { return identity_; }
    const std::vector<double>& data() const { return a_; }

private:
    int n_ = 0;
    std::vector<double> a_;
    bool identity_ = false;
};

/// One node of the metapopulation network.
struct Region {
    std::string name;
    ModelParams params;        ///< params.n_pop is the region population
    EpiState init;             ///< state at day 0
    double h_lim_per100k = 8.0;
};

/// Multi-region SEIHRVS model: regions coupled through a mobility matrix.
struct NetworkModel {
    std::vector<Region> regions;
    MobilityMatrix mobility;

    int size() const { return static_cast<int>(regions.size()); }
    double total_population() const;
    std::vector<EpiState> initial_states() const;
    std::vector<double> initial_u(double u0) const;
    /// Per-region limits converted from persons/day per 100k to fractions.
    std::vector<double> h_lims_frac() const;

    /// Splits a statewide vaccination rate (persons/day) across regions
    /// proportionally to population, writing each region's y_rate.
    void allocate_statewide_vaccination(double y_statewide);

    /// Throws StructuralError/DomainError on dimension or value problems.
    void validate() const;

    static NetworkModel single(const ModelParams& p, const EpiState& init,
                               double h_lim_per100k = 8.0,
                               std::string name = "region");
};

/// Right-hand side of the single-region model under control level u.
/// dt is the integrator step used to limit the effective vaccination
/// rate so that one step cannot push s or r negative or c_vax past
/// uptake_max. Validates inputs; throws DomainError.
EpiState derivative_single(const EpiState& x, const ModelParams& p, double u,
                           double dt);

/// Per-region right-hand side of the networked model. Infection pressure
/// on region i is beta_i * u_i * s_i * sum_j a_ij * iota_j.
/// Throws StructuralError on dimension mismatch.
std::vector<EpiState> derivative_network(const std::vector<EpiState>& x,
                                         const NetworkModel& net,
                                         std::span<const double> u, double dt);

namespace detail {

/// Unchecked RHS with an explicit infection pressure term (the coupled
/// sum of infectious fractions seen by this region).
EpiState rhs(const EpiState& x, const ModelParams& p, double u,
             double pressure, double dt);

} // namespace detail

} // namespace npisim
