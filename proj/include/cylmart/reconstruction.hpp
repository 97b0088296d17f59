#pragma once

#include <Eigen/Dense>
#include <vector>

#include "cylmart/cyl_martingale.hpp"
#include "cylmart/grid.hpp"
#include "cylmart/rng.hpp"

namespace cylmart {

// Output of the band-decomposition rebuild of the driving noise.
// components[0] is the kernel component (fed by auxiliary noise only);
// components[n] for n >= 1 collects the spectrum in dyadic band n. w_hat is
// the pointwise sum of all components; dw_hat carries its native per-cell
// increments (component increments summed in ascending component order).
struct ReconstructionResult {
    int depth = 0;
    std::vector<VectorPath> components;
    VectorPath w_hat;
    std::vector<Eigen::VectorXd> dw_hat;
    // Diagnostics: per-coordinate realized qv of w_hat and the matrix of
    // pairwise realized covariations at the horizon.
    std::vector<ScalarPath> qv_coord;
    Eigen::MatrixXd cov_at_t;
    bool kernel_active = false;  // some cell had kernel spectrum
};

// Rebuilds a cylindrical Brownian motion from the model: with S = G*G, band
// component n integrates G psi_n(S) e_i against M, and the kernel component
// runs the spectral projection onto ker S against an independent auxiliary
// Brownian motion (its stream is derived from aux_seed). Requires a square
// model (d_X = d_H). Per-cell spectra not covered by `depth` bands raise
// BandDepthInsufficient. Components for different aux seeds agree bitwise on
// every band component; only the kernel component changes.
ReconstructionResult reconstruct_w(const CylModel& model, int depth,
                                   RngSeed aux_seed);

// Rebuilds M x* from the reconstructed noise: increments <G* x*, dW_hat>.
// For invertible constant G this is algebra (the band functions resolve to
// S^{-1} slices), so the gap is floating-point only; with G = I it is zero.
IdentityCheck roundtrip_check(const CylModel& model,
                              const ReconstructionResult& recon,
                              const Eigen::VectorXd& xstar);

// Windowed finite-difference estimate of the coefficient vector a_h(t) with
// components d[M h, W e_n]/dt, from one observed pair (M h, W). The same
// window smooths d[M h]/dt, giving the pathwise cross-variation bound
// |a_n(t)| <= sqrt(d[M h]/dt) whose worst observed ratio is reported.
struct CrossCovEstimate {
    IntegrandPath a_hat;  // per-cell estimate, dim = driving dimension
    double kw_max_ratio = 0.0;
    int window = 0;
};
CrossCovEstimate crosscov_representation(const ScalarPath& mh,
                                         const VectorPath& w, int window);

// Default boxcar width: ceil(sqrt(K)).
int default_crosscov_window(const TimeGrid& grid);

}  // namespace cylmart
