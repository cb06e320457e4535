#pragma once

#include <string>
#include <vector>

#include "npisim/dates.hpp"
#include "npisim/model.hpp"

namespace npisim {

/// Daily hospitalization census for one region.
struct HospCensusSeries {
    struct Point {
        int date = 0;  ///< days since 1970-01-01
        double hospitalized = 0.0;
    };
    std::string region;
    std::vector<Point> points;

    /// Throws DataError unless dates strictly increase and counts >= 0.
    void validate() const;
    /// Points whose date falls within the inclusive range.
    HospCensusSeries window(const DateRange& range) const;
};

/// Region-aggregated travel volume for one day (device stops > 1 minute).
struct TravelRecord {
    int date = 0;
    std::string origin;
    std::string destination;
    double visits = 0.0;
};

struct FitOptions {
    double u_known = 0.21;    ///< control level during the fit window
    double dt = 0.1;
    int max_iterations = 200;
    double rel_tol = 1e-6;    ///< stop when relative SSE improvement drops below
    double fd_rel_step = 1e-4;  ///< relative finite-difference step
};

struct FitResult {
    double beta = 0.0;
    double kappa_ih = 0.0;
    double rmse = 0.0;
    double sse = 0.0;
    int iterations = 0;
    std::vector<double> sse_history;  ///< accepted iterates, non-increasing
};

/// Fits (beta, kappa_ih) to a hospitalization census by iterating
/// prediction (simulate with current parameters) and correction (scaled
/// finite-difference gradient step with backtracking line search) on the
/// sum of squared errors between simulated h*n_pop and the census.
/// The first census date is day 0 of the simulation started from x0.
/// Throws FitError when no tested step improves at iteration 0, and
/// DomainError for series shorter than 14 days.
FitResult fit_parameters(const HospCensusSeries& series, ModelParams fixed,
                         const EpiState& x0, const FitOptions& opt = {});

/// Builds the row-stochastic mobility matrix from travel records:
/// a_ij = visits into region i from region j over the date range, divided
/// by the total visits into region i. Throws DataError (naming the
/// region) when a destination has no activity in the range.
MobilityMatrix build_mobility_matrix(const std::vector<TravelRecord>& records,
                                     const std::vector<std::string>& regions,
                                     const DateRange& range);

} // namespace npisim
