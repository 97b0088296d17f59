#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "cylmart/grid.hpp"
#include "cylmart/rng.hpp"

namespace cylmart {

// A simulated driving path. `dw` holds the native per-cell increments the
// values were accumulated from; downstream integrals consume `dw` directly
// so that exactness claims do not depend on re-differencing rounded values.
struct BrownianPath {
    VectorPath path;
    std::vector<Eigen::VectorXd> dw;  // length K
    RngSeed seed;
};

// Cylindrical Brownian motion with covariance q: increments over a cell are
// N(0, q dt), coordinates drawn in ascending order, cells in ascending time.
// Exactly-diagonal q uses the diagonal square root, so zero rows stay
// bitwise zero.
BrownianPath simulate_cyl_bm(int d, const Eigen::MatrixXd& q, TimeGrid grid,
                             RngSeed seed);
BrownianPath simulate_cyl_bm(int d, TimeGrid grid, RngSeed seed);  // q = I

// One rank-one summand x* (x) y of an elementary integrand.
struct ElementaryTerm {
    Eigen::VectorXd xstar;
    Eigen::VectorXd y;
};

// One event on one interval: a set-indicator value (known by the interval's
// left endpoint, i.e. previsible) scaling a finite-rank sum of terms.
struct ElementaryEvent {
    double indicator = 1.0;
    std::vector<ElementaryTerm> terms;
};

struct ElementaryInterval {
    std::vector<ElementaryEvent> events;
};

// Piecewise description over (t_{n-1}, t_n] with grid-aligned breakpoints.
struct ElementaryProcess {
    TimeGrid grid;
    std::vector<int> breakpoints;               // N+1 grid indices, increasing
    std::vector<ElementaryInterval> intervals;  // N

    // Breakpoints given as times; each must sit on the grid.
    static ElementaryProcess from_times(TimeGrid grid,
                                        const std::vector<double>& times,
                                        std::vector<ElementaryInterval> ivs);
    void validate() const;
    int output_dim() const;
};

// Per-cell increment of the scalar path t -> M_t(x*), for the functional
// family an elementary integrand references.
using IncrementFamily =
    std::function<double(const Eigen::VectorXd& xstar, int cell)>;

// The elementary stochastic integral: on interval n with events m and terms
// k the output gains indicator * (M(t_n /\ t) x*_k - M(t_{n-1} /\ t) x*_k) y.
// Accumulated cell by cell in ascending time, events and terms ascending
// within a cell, output coordinates ascending. No discretization error
// beyond the grid itself.
VectorPath step_integral(const ElementaryProcess& f, const IncrementFamily& dm);

// Cumulative sum of squared increments.
ScalarPath realized_qv(const ScalarPath& m);
// Cumulative sum of products of increments.
ScalarPath realized_cov(const ScalarPath& m, const ScalarPath& n);
// Sum over coordinates of realized_qv, ascending coordinate order.
ScalarPath qv_sum_hilbert(const VectorPath& m);

// Monte Carlo estimate of sum_{n=1}^{n_max} 2^{-n} E[1 /\ sup_{[0,n]}|M-N|]
// from paired trials. The dropped tail is at most 2^{-n_max}.
struct UcpDistance {
    double estimate = 0.0;
    double std_error = 0.0;
};
UcpDistance ucp_distance(const std::vector<ScalarPath>& m,
                         const std::vector<ScalarPath>& n, int n_max);

// Increments of a nondecreasing path. Dips beyond -1e-12 raise
// NonMonotonePath; smaller negative rounding noise clamps to zero.
std::vector<double> stieltjes_increments(const ScalarPath& f);

// max_k mu_k / nu_k with 0/0 = 0 and x/0 = +inf for x > 0: a discrete
// absolute-continuity diagnostic for one measure against another.
double ac_diagnostic(const std::vector<double>& mu,
                     const std::vector<double>& nu);

}  // namespace cylmart
