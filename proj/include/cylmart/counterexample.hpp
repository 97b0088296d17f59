#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "cylmart/grid.hpp"
#include "cylmart/rng.hpp"

namespace cylmart {

// Exhaustive enumeration walks prod_n 2^{n-1} = 2^{N(N-1)/2} outcomes;
// capped where that stays around 2^21.
inline constexpr int kLadderEnumCap = 7;

// Independent block indices xi_n uniform on {2^{n-1}, ..., 2^n - 1} with
// weights c_n = 2^{n/4}. Block n draws from substream n of the seed, so a
// sample at larger N extends a sample at smaller N (nested coupling).
struct LadderSample {
    int n_blocks = 0;
    RngSeed seed;
    std::vector<std::int64_t> xi;  // xi[n-1] in [2^{n-1}, 2^n)
};
LadderSample sample_ladder(int n_blocks, RngSeed seed);

double ladder_c(int n);  // 2^{n/4}

// l(h) = sum_n c_n h[xi_n] on the truncated span; coordinates of h are
// 1-based block indices, entries past h's dimension read as 0.
double ell(const LadderSample& sample, const Eigen::VectorXd& h);

// l(e_i) without materializing e_i: c_n if i lands in block n at xi_n else 0.
// At most one block matches (blocks partition the index range).
double ell_basis(const LadderSample& sample, std::int64_t i);

// Anchor a with a_k = 2^{-3n/4} on block n; dimension 2^N.
// |a|^2 = (1/2) sum_n 2^{-n/2}.
struct AnchorVector {
    int n_blocks = 0;
    Eigen::VectorXd a;
    double norm_sq = 0.0;
};
AnchorVector anchor_vector(int n_blocks);

// <h~, a> with h~ = entrywise |h|, over the common index range.
double anchor_pairing(const Eigen::VectorXd& h, int n_blocks);

// sum_{i=1}^{2^N} l(e_i)^2. Blocks are disjoint, so only i in {xi_n}
// contribute and the sum collapses to sum_n c_n^2 = sum_n 2^{n/2} —
// evaluated over the realized support, which is what makes N = 40 feasible.
double unboundedness_certificate(const LadderSample& sample);

// sum_{n <= N} 2^{n/2}, the certificate's seed-free value.
double certificate_closed_form(int n_blocks);

// Smallest N whose certificate exceeds the bound.
int blocks_needed_for(double bound);

// Exact E[f(xi_1..xi_N)] by enumerating all outcomes (uniform product law).
// N above kLadderEnumCap is refused.
double enumerate_expectation(
    int n_blocks,
    const std::function<double(const std::vector<std::int64_t>&)>& f);

// Majorant mean E[sum_n c_n |h[xi_n]|] = 2 <h~, a_N>: closed form and MC.
double majorant_closed_form(int n_blocks, const Eigen::VectorXd& h);
double majorant_mc(int n_blocks, const Eigen::VectorXd& h, int trials,
                   RngSeed seed, double* se_out);

// Second-moment control of the majorant:
//   E[(sum_n c_n |h[xi_n]|)^2] <= sqrt(2) |h|^2 + 4 <h~, a_N>^2
// (diagonal terms: c_n^2 2^{-(n-1)} <= sqrt(2) per unit |h|^2; cross terms:
// bounded by the squared majorant mean). estimate is MC; pass allows 4 SE.
struct L2BoundCheck {
    double estimate = 0.0;
    double se = 0.0;
    double bound = 0.0;
    bool pass = false;
};
L2BoundCheck l2_bound_check(int n_blocks, const Eigen::VectorXd& h, int trials,
                            RngSeed seed);

// M(h): zero on [0,1], increments l(h) dW on (1,2], frozen after 2 —
// non-support cells copy the previous value bitwise. Grid must reach 3.
struct CounterexamplePath {
    LadderSample ladder;
    double ell_h = 0.0;
    ScalarPath m;
    ScalarPath w;             // the scalar driver
    std::vector<double> dw;   // its native increments
};
CounterexamplePath simulate_counterexample_m(const LadderSample& sample,
                                             const Eigen::VectorXd& h,
                                             TimeGrid grid, RngSeed path_seed);

// Best nonnegative rank-one fit to the density diagonal {l(e_i)^2, i <= d}:
// for a diagonal matrix that keeps the largest entry, so
//   residual = sum_i l(e_i)^2 - max_i l(e_i)^2,
// which grows with d while any rank-one fit stays put.
struct RankOneFit {
    double total = 0.0;
    double dominant = 0.0;
    std::int64_t dominant_index = 0;
    double residual = 0.0;
};
RankOneFit rank_one_falsification(const LadderSample& sample, std::int64_t d);

// JSON certificate {N, seed, certificate, bound, estimate}.
std::string counterexample_to_json(const LadderSample& sample,
                                   double certificate, double bound,
                                   double estimate);

}  // namespace cylmart
