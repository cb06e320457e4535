#pragma once

#include <string>
#include <vector>

#include "npisim/calibration.hpp"
#include "npisim/controller.hpp"
#include "npisim/scenarios.hpp"

namespace npisim {

/// Single-region setup as read from a flat key-value parameter file.
struct SingleRegionConfig {
    ModelParams params;
    EpiState init;
    double u0 = 0.21;
};

/// Reads a flat `key value` / `key = value` file with the Table-style
/// parameter names (beta, theta, delta, sigma, eta_v, epsilon, gamma,
/// kappa_ih, kappa_id, kappa_hd, rho, nu, y_rate, uptake_max, n_pop) and
/// initial conditions s0..d0, u0. Initial compartments are normalized to
/// sum to 1 when they are within 1e-3 of it; larger deviations are an
/// error. '#' starts a comment.
SingleRegionConfig load_params_file(const std::string& path);
void save_params_file(const SingleRegionConfig& cfg, const std::string& path);

/// Trajectory CSV: `day,s,e,i,h,r,v,d,c_vax,u` (a `region` column is
/// inserted after `day` for networks), one row per sampled step.
void write_trajectory_csv(const std::string& path, const Trajectory& traj,
                          const std::vector<std::string>& region_names = {});

/// Closed-loop trace CSV: `day,region,s,e,i,h,r,v,d,u,h_lim,feasible`.
void write_closed_loop_csv(const std::string& path, const ClosedLoopTrace& trace);

/// Sweep CSV: `h_lim,y_rate,uptake,days_u1,days_u08,deaths_cutoff,status`
/// (days columns carry NA when the target was not reached).
void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows);

/// Monte Carlo CSV: `day,quantity,mean,sd` for quantities u,h,i,v.
void write_envelope_csv(const std::string& path, const Envelope& env);

/// Drop summary CSV:
/// `region,peak_h_per100k,days_above_limit,mean_u_post_drop`.
void write_drop_summary_csv(const std::string& path,
                            const std::vector<DropSummaryRow>& rows);

/// Census CSV `date,region,hospitalized` (ISO-8601 dates). Returns one
/// series per region, in first-appearance order; `region_filter` empty
/// keeps all regions.
std::vector<HospCensusSeries> read_census_csv(const std::string& path,
                                              const std::string& region_filter = "");
void write_census_csv(const std::string& path, const HospCensusSeries& series);

/// Travel CSV `date,origin,destination,visits`.
std::vector<TravelRecord> read_travel_csv(const std::string& path);

/// Mobility matrix CSV: square matrix with region names as header row
/// and first column; row i holds a_ij for destination region i.
void write_mobility_csv(const std::string& path, const MobilityMatrix& matrix,
                        const std::vector<std::string>& regions);
MobilityMatrix read_mobility_csv(const std::string& path,
                                 std::vector<std::string>& regions);

/// Multi-region network description (JSON): region populations, limits,
/// initial states, parameter defaults/overrides, statewide vaccination,
/// and a mobility matrix (inline or as a CSV path relative to the file).
NetworkModel load_network_json(const std::string& path);

} // namespace npisim
