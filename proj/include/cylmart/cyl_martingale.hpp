#pragma once

#include <Eigen/Dense>
#include <vector>

#include "cylmart/grid.hpp"
#include "cylmart/path_engine.hpp"

#include <json.hpp>

namespace cylmart {

// Finite-dimensional cylindrical martingale M x* = integral of G* x* against
// a driving cylindrical Brownian motion. G maps the driving space (dim d_h)
// into the state space (dim d_x), so its matrix is d_x rows by d_h columns
// and the adjoint G* = G^T sends functionals to the driving space.
struct CylModel {
    int d_h = 0;
    int d_x = 0;
    TimeGrid grid;
    OperatorPath g;
    BrownianPath w;
    RngSeed seed;

    // Simulates the driving noise (standard cylindrical BM, covariance I).
    static CylModel simulate(const OperatorPath& g_path, RngSeed seed);
    // Adopts an externally built driving path; increments are re-derived by
    // differencing its values.
    static CylModel from_brownian(const OperatorPath& g_path, VectorPath w);

    // Native coordinate increments dM(e_i), i ascending: dm(k) = G_k dw_k.
    const Eigen::VectorXd& dm(int k) const { return dm_[static_cast<std::size_t>(k)]; }

    // Model stopped at grid index `cell`: increments from that cell on are
    // zero, so every evaluated path freezes at t_cell.
    CylModel stopped(int cell) const;

private:
    std::vector<Eigen::VectorXd> dm_;
    void finalize();
};

// Scalar path t -> M_t(x*), increments <x*, G_k dw_k> accumulated in time
// order.
ScalarPath eval_m(const CylModel& model, const Eigen::VectorXd& xstar);

// Adapter for elementary integrals against this model's functional family.
IncrementFamily make_increment_family(const CylModel& model);

// Two routes to the same object and their sup gap over the grid.
struct IdentityCheck {
    ScalarPath lhs;
    ScalarPath rhs;
    double sup_gap = 0.0;
};

// realized covariation of (M x*, M y*) against the predicted cumulative
// sum of <G* x*, G* y*> dt.
IdentityCheck covariation_identity_check(const CylModel& model,
                                         const Eigen::VectorXd& xstar,
                                         const Eigen::VectorXd& ystar);

// Integral of a previsible vector integrand f against M: increments
// sum_i f_i(t_k) dM(e_i)(t_k).
ScalarPath integrate_vs_m(const CylModel& model, const IntegrandPath& f);

// Deterministic quadratic-variation profile of that integral: cumulative
// sum of |G*(t_k) f(t_k)|^2 dt.
ScalarPath integrand_qv_profile(const CylModel& model, const IntegrandPath& f);

// N h = integral of Psi* h against M is itself a model of the same kind;
// integrating phi against N must agree with integrating Psi* phi against M.
// lhs evaluates N on basis functionals and combines; rhs integrates the
// composed integrand directly. Gap is floating-point only.
IdentityCheck compose_martingale(const CylModel& model, const OperatorPath& psi,
                                 const IntegrandPath& phi);

// Convergence certificate along a supplied approximating sequence: for each
// stage, the ucp distance (cap n_max) between the stage's elementary
// integral and the caller's candidate-limit paths, plus the gap between the
// stage's mean realized qv at T and the deterministic target. The module
// certifies convergence along this sequence only; non-convergence is
// reported, not raised.
struct InttheoryReport {
    std::vector<double> distances;
    std::vector<double> distance_ses;
    std::vector<double> qv_gaps;
    bool distances_nonincreasing = false;
};
InttheoryReport inttheory_limit_check(const std::vector<CylModel>& models,
                                      const std::vector<ElementaryProcess>& stages,
                                      const std::vector<ScalarPath>& reference,
                                      double target_qv_t, int n_max);

// Recipe serialization: {d_H, d_X, grid:{T,K}, seed, G:"constant"|"per_cell",
// entries:[...]} with entries row-major. The driving path is reproduced from
// the seed on load, so paths never need to be stored.
nlohmann::json model_to_json(const CylModel& model);
CylModel model_from_json(const nlohmann::json& j);

}  // namespace cylmart
