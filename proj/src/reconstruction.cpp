#include "cylmart/reconstruction.hpp"

#include <cmath>
#include <cstddef>
#include <limits>

#include "cylmart/errors.hpp"
#include "cylmart/operator_calculus.hpp"
#include "cylmart/path_engine.hpp"

namespace cylmart {

ReconstructionResult reconstruct_w(const CylModel& model, int depth,
                                   RngSeed aux_seed) {
    if (model.d_x != model.d_h)
        throw DimensionMismatch("reconstruct_w: requires d_X = d_H");
    if (depth < 1) throw ConfigError("reconstruct_w: depth must be >= 1");

    const int d = model.d_h;
    const int cells = model.grid.K;
    const double root_dt = std::sqrt(model.grid.dt());

    ReconstructionResult out;
    out.depth = depth;
    out.components.reserve(static_cast<std::size_t>(depth) + 1);
    for (int n = 0; n <= depth; ++n) out.components.emplace_back(model.grid, d);
    out.w_hat = VectorPath(model.grid, d);
    out.dw_hat.assign(static_cast<std::size_t>(cells),
                      Eigen::VectorXd::Zero(d));

    // Auxiliary noise for the kernel component, independent of the model's
    // own driver by stream separation.
    CounterRng aux(aux_seed);

    // Constant G: one spectral pass serves every cell.
    BandFunctions bf_const;
    const bool constant_g = model.g.constant;
    if (constant_g) {
        const Eigen::MatrixXd gram =
            model.g.cell(0).transpose() * model.g.cell(0);
        bf_const =
            band_functions(SymmetricPSD(0.5 * (gram + gram.transpose())), depth);
    }

    std::vector<Eigen::VectorXd> dcomp(static_cast<std::size_t>(depth) + 1);
    for (int k = 0; k < cells; ++k) {
        const Eigen::MatrixXd& gk = model.g.cell(k);
        BandFunctions bf_cell;
        const BandFunctions* bf = &bf_const;
        if (!constant_g) {
            const Eigen::MatrixXd gram = gk.transpose() * gk;
            bf_cell = band_functions(
                SymmetricPSD(0.5 * (gram + gram.transpose())), depth);
            bf = &bf_cell;
        }

        // Kernel component: psi0(S) projects onto ker S; its increment is
        // pure auxiliary noise, untouched by dm. The aux draw happens on
        // every cell so band components do not depend on where the kernel is.
        if (bf->psi0.trace() > 0.5) out.kernel_active = true;
        Eigen::VectorXd dbar(d);
        for (int i = 0; i < d; ++i) dbar[i] = root_dt * aux.next_gaussian();
        dcomp[0] = bf->psi0 * dbar;

        // Band n: integrand G psi_n(S) against M, i.e. (G psi_n(S))^T dm.
        const Eigen::VectorXd& dmk = model.dm(k);
        for (int n = 1; n <= depth; ++n)
            dcomp[static_cast<std::size_t>(n)] =
                (gk * bf->psi[static_cast<std::size_t>(n) - 1]).transpose() *
                dmk;

        Eigen::VectorXd dsum = Eigen::VectorXd::Zero(d);
        for (int n = 0; n <= depth; ++n) {
            const Eigen::VectorXd& dc = dcomp[static_cast<std::size_t>(n)];
            VectorPath& comp = out.components[static_cast<std::size_t>(n)];
            comp.values[static_cast<std::size_t>(k) + 1] =
                comp.values[static_cast<std::size_t>(k)] + dc;
            dsum += dc;
        }
        out.dw_hat[static_cast<std::size_t>(k)] = dsum;
        // Pointwise component sum, not a cumsum of dsum: keeps w_hat exactly
        // consistent with the components under rounding.
        Eigen::VectorXd v = Eigen::VectorXd::Zero(d);
        for (int n = 0; n <= depth; ++n)
            v += out.components[static_cast<std::size_t>(n)]
                     .values[static_cast<std::size_t>(k) + 1];
        out.w_hat.values[static_cast<std::size_t>(k) + 1] = v;
    }

    out.qv_coord.reserve(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i)
        out.qv_coord.push_back(realized_qv(out.w_hat.coordinate(i)));
    out.cov_at_t = Eigen::MatrixXd::Zero(d, d);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            const ScalarPath cov =
                realized_cov(out.w_hat.coordinate(i), out.w_hat.coordinate(j));
            out.cov_at_t(i, j) = cov.values.back();
        }
    }
    return out;
}

IdentityCheck roundtrip_check(const CylModel& model,
                              const ReconstructionResult& recon,
                              const Eigen::VectorXd& xstar) {
    if (xstar.size() != model.d_x)
        throw DimensionMismatch("roundtrip_check: x* dimension");
    if (recon.dw_hat.size() != static_cast<std::size_t>(model.grid.K))
        throw DimensionMismatch("roundtrip_check: grid mismatch");

    IdentityCheck chk;
    chk.lhs = eval_m(model, xstar);
    chk.rhs = ScalarPath(model.grid);
    chk.sup_gap = 0.0;
    double acc = 0.0;
    for (int k = 0; k < model.grid.K; ++k) {
        const Eigen::VectorXd gstar_x = model.g.cell(k).transpose() * xstar;
        acc += gstar_x.dot(recon.dw_hat[static_cast<std::size_t>(k)]);
        chk.rhs.values[static_cast<std::size_t>(k) + 1] = acc;
        const double gap =
            std::abs(chk.lhs.values[static_cast<std::size_t>(k) + 1] - acc);
        if (gap > chk.sup_gap) chk.sup_gap = gap;
    }
    return chk;
}

int default_crosscov_window(const TimeGrid& grid) {
    const int w =
        static_cast<int>(std::ceil(std::sqrt(static_cast<double>(grid.K))));
    return w < 1 ? 1 : w;
}

CrossCovEstimate crosscov_representation(const ScalarPath& mh,
                                         const VectorPath& w, int window) {
    if (!(mh.grid == w.grid))
        throw DimensionMismatch("crosscov_representation: grid mismatch");
    const int cells = mh.grid.K;
    if (window < 1 || window > cells)
        throw WindowTooLarge("crosscov_representation: window outside [1, K]");

    const int d = w.dim;
    const double dt = mh.grid.dt();

    std::vector<ScalarPath> cross;
    cross.reserve(static_cast<std::size_t>(d));
    for (int n = 0; n < d; ++n)
        cross.push_back(realized_cov(mh, w.coordinate(n)));
    const ScalarPath qv_m = realized_qv(mh);

    CrossCovEstimate est;
    est.window = window;
    est.a_hat = IntegrandPath(
        mh.grid, std::vector<Eigen::VectorXd>(static_cast<std::size_t>(cells),
                                              Eigen::VectorXd::Zero(d)));
    for (int k = 0; k < cells; ++k) {
        // Centered boxcar, clipped at the ends; hi - lo == window always.
        int lo = k - window / 2;
        if (lo < 0) lo = 0;
        int hi = lo + window;
        if (hi > cells) {
            hi = cells;
            lo = hi - window;
        }
        const double span = (hi - lo) * dt;
        const double rho = (qv_m.values[static_cast<std::size_t>(hi)] -
                            qv_m.values[static_cast<std::size_t>(lo)]) /
                           span;
        const double root_rho = rho > 0.0 ? std::sqrt(rho) : 0.0;
        for (int n = 0; n < d; ++n) {
            const double a = (cross[static_cast<std::size_t>(n)]
                                  .values[static_cast<std::size_t>(hi)] -
                              cross[static_cast<std::size_t>(n)]
                                  .values[static_cast<std::size_t>(lo)]) /
                             span;
            est.a_hat.cells[static_cast<std::size_t>(k)][n] = a;
            const double mag = std::abs(a);
            if (mag == 0.0) continue;
            const double ratio = root_rho > 0.0
                                     ? mag / root_rho
                                     : std::numeric_limits<double>::infinity();
            if (ratio > est.kw_max_ratio) est.kw_max_ratio = ratio;
        }
    }
    return est;
}

}  // namespace cylmart
