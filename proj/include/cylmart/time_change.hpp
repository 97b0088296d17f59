#pragma once

#include <string>
#include <vector>

#include "cylmart/grid.hpp"

namespace cylmart {

// Strictly increasing clock built from the first n_terms of a qv family:
//   F(t) = t * (1 + sum_{n=1}^{n_terms} 2^{-n} arctan(qv_n(t))).
// The multiplier sits in [1, 1 + pi/2), so t <= F(t) always, and every
// F-increment is at least dt. Inputs must share one grid and be
// nondecreasing from 0 (NonMonotonePath otherwise). Truncating at N costs
// at most t * 2^{-N} * (pi/2).
ScalarPath build_f_from_qv(const std::vector<ScalarPath>& qv_paths,
                           int n_terms);

// Same clock from martingale paths; realized qv is taken first.
ScalarPath build_f(const std::vector<ScalarPath>& m_paths, int n_terms);

// Right-continuous inverse on a grid of the changed time s:
//   tau_s = smallest grid point t_j with F(t_j) > s,
// so F(tau_s - dt) <= s < F(tau_s). An s-grid point at or past F(T) has no
// such t_j and raises HorizonExceeded. When ds <= dt, tau advances at most
// one input cell per s-cell (F-increments >= dt >= ds).
struct TimeChange {
    ScalarPath f;          // the clock on the input grid
    TimeGrid s_grid;       // grid of the changed time
    std::vector<int> tau;  // input-grid index of tau_s, length s_grid.K + 1
    int n_terms = 0;       // clock truncation, 0 when F was supplied directly
    double tau_time(int i) const {
        return f.grid.t(tau[static_cast<std::size_t>(i)]);
    }
};
TimeChange invert_f(const ScalarPath& f, TimeGrid s_grid);

// build_f + invert_f, recording n_terms.
TimeChange make_time_change(const std::vector<ScalarPath>& m_paths,
                            int n_terms, TimeGrid s_grid);

// Exclusive upper bound on usable changed time: F(T). Pick s_grid.T
// strictly below this.
double max_changed_horizon(const ScalarPath& f);

// Path s -> X(tau_s) on the changed grid (left-constant across tau jumps).
ScalarPath apply_time_change(const ScalarPath& path, const TimeChange& tc);

// Certificate that the n-th input path's qv in changed time has density
// bounded by 2^n (1 + K^2), K = its realized qv at the horizon. Discretized
// with one-cell slack — a changed-grid cell carries at most one input cell
// of qv mass when ds <= dt (enforced), so each s-cell must satisfy
//   d[M o tau] <= bound = 2^n (1 + K^2) * ds * (1 + slack),
//   slack = (max single-cell qv increment of the input path) / ds.
// violations lists s-cells exceeding bound; empty means certified.
struct AcCertificate {
    int n = 1;
    double k_path = 0.0;       // realized qv of the input path at T
    double ds = 0.0;
    double slack = 0.0;
    double bound = 0.0;        // per-s-cell qv bound
    double max_cell_qv = 0.0;  // worst observed per-s-cell changed qv
    double max_density = 0.0;  // max_cell_qv / ds
    std::vector<int> violations;
    bool pass() const { return violations.empty(); }
};
AcCertificate certify_ac(const ScalarPath& m_path, const TimeChange& tc, int n);

// CSV with header "s,tau_s,f_tau_s"; one line per changed-grid point.
std::string time_change_to_csv(const TimeChange& tc);

}  // namespace cylmart
