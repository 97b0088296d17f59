#include "cylmart/path_engine.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "cylmart/errors.hpp"
#include "cylmart/operator_calculus.hpp"
#include "cylmart/stats.hpp"

namespace cylmart {

namespace {

bool exactly_diagonal(const Eigen::MatrixXd& q) {
    for (Eigen::Index r = 0; r < q.rows(); ++r)
        for (Eigen::Index c = 0; c < q.cols(); ++c)
            if (r != c && q(r, c) != 0.0) return false;
    return true;
}

// Symmetric square root of a PSD covariance. Diagonal input takes the exact
// per-entry root so structural zeros survive bitwise.
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& q) {
    if (exactly_diagonal(q)) {
        Eigen::MatrixXd l = Eigen::MatrixXd::Zero(q.rows(), q.cols());
        for (Eigen::Index i = 0; i < q.rows(); ++i)
            l(i, i) = std::sqrt(std::max(q(i, i), 0.0));
        return l;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(q);
    Eigen::VectorXd root = es.eigenvalues();
    for (Eigen::Index i = 0; i < root.size(); ++i)
        root(i) = std::sqrt(std::max(root(i), 0.0));
    return es.eigenvectors() * root.asDiagonal() *
           es.eigenvectors().transpose();
}

}  // namespace

BrownianPath simulate_cyl_bm(int d, const Eigen::MatrixXd& q, TimeGrid grid,
                             RngSeed seed) {
    if (q.rows() != d || q.cols() != d)
        throw DimensionMismatch("covariance is " + std::to_string(q.rows()) +
                                "x" + std::to_string(q.cols()) +
                                ", expected " + std::to_string(d));
    SymmetricPSD check(q);  // validates symmetry and positivity
    const Eigen::MatrixXd l = psd_sqrt(check.matrix());
    const double root_dt = std::sqrt(grid.dt());

    BrownianPath out;
    out.seed = seed;
    out.path = VectorPath(grid, d);
    out.dw.reserve(static_cast<std::size_t>(grid.K));
    CounterRng rng(seed);
    Eigen::VectorXd z(d);
    for (int k = 0; k < grid.K; ++k) {
        for (int i = 0; i < d; ++i) z(i) = rng.next_gaussian();
        out.dw.emplace_back(root_dt * (l * z));
        out.path.values[static_cast<std::size_t>(k) + 1] =
            out.path.values[static_cast<std::size_t>(k)] + out.dw.back();
    }
    return out;
}

BrownianPath simulate_cyl_bm(int d, TimeGrid grid, RngSeed seed) {
    return simulate_cyl_bm(d, Eigen::MatrixXd::Identity(d, d), grid, seed);
}

ElementaryProcess ElementaryProcess::from_times(
    TimeGrid grid, const std::vector<double>& times,
    std::vector<ElementaryInterval> ivs) {
    ElementaryProcess f;
    f.grid = grid;
    f.breakpoints.reserve(times.size());
    for (double t : times) f.breakpoints.push_back(grid.index_of(t));
    f.intervals = std::move(ivs);
    f.validate();
    return f;
}

void ElementaryProcess::validate() const {
    if (breakpoints.size() < 2)
        throw GridMisalignment("elementary process needs >= 2 breakpoints");
    for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i)
        if (breakpoints[i] >= breakpoints[i + 1])
            throw GridMisalignment("breakpoints must be strictly increasing");
    if (breakpoints.front() < 0 || breakpoints.back() > grid.K)
        throw GridMisalignment("breakpoints outside the grid");
    if (intervals.size() + 1 != breakpoints.size())
        throw DimensionMismatch("need one interval per breakpoint pair");
    const int dy = output_dim();
    Eigen::Index dx = -1;
    for (const auto& iv : intervals)
        for (const auto& ev : iv.events)
            for (const auto& term : ev.terms) {
                if (dx < 0) dx = term.xstar.size();
                if (term.xstar.size() != dx)
                    throw DimensionMismatch("inconsistent functional dims");
                if (term.y.size() != dy)
                    throw DimensionMismatch("inconsistent output dims");
            }
}

int ElementaryProcess::output_dim() const {
    for (const auto& iv : intervals)
        for (const auto& ev : iv.events)
            for (const auto& term : ev.terms)
                return static_cast<int>(term.y.size());
    return 1;
}

VectorPath step_integral(const ElementaryProcess& f, const IncrementFamily& dm) {
    f.validate();
    const int dy = f.output_dim();
    VectorPath out(f.grid, dy);
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(dy);

    // Values before the first breakpoint and after the last stay flat; in
    // between, each cell adds its events' increments in declaration order.
    for (int j = 1; j <= f.breakpoints.front(); ++j)
        out.values[static_cast<std::size_t>(j)] = acc;
    for (std::size_t n = 0; n < f.intervals.size(); ++n) {
        const int lo = f.breakpoints[n];
        const int hi = f.breakpoints[n + 1];
        for (int k = lo; k < hi; ++k) {
            for (const auto& ev : f.intervals[n].events) {
                if (ev.indicator == 0.0) continue;
                for (const auto& term : ev.terms)
                    acc += (ev.indicator * dm(term.xstar, k)) * term.y;
            }
            out.values[static_cast<std::size_t>(k) + 1] = acc;
        }
    }
    for (int j = f.breakpoints.back() + 1; j <= f.grid.K; ++j)
        out.values[static_cast<std::size_t>(j)] = acc;
    return out;
}

ScalarPath realized_qv(const ScalarPath& m) {
    ScalarPath qv(m.grid);
    for (int k = 0; k < m.grid.K; ++k) {
        const double d = m.values[static_cast<std::size_t>(k) + 1] -
                         m.values[static_cast<std::size_t>(k)];
        qv.values[static_cast<std::size_t>(k) + 1] =
            qv.values[static_cast<std::size_t>(k)] + d * d;
    }
    return qv;
}

ScalarPath realized_cov(const ScalarPath& m, const ScalarPath& n) {
    if (!(m.grid == n.grid))
        throw DimensionMismatch("realized_cov: paths on different grids");
    ScalarPath cov(m.grid);
    for (int k = 0; k < m.grid.K; ++k) {
        const double dm = m.values[static_cast<std::size_t>(k) + 1] -
                          m.values[static_cast<std::size_t>(k)];
        const double dn = n.values[static_cast<std::size_t>(k) + 1] -
                          n.values[static_cast<std::size_t>(k)];
        cov.values[static_cast<std::size_t>(k) + 1] =
            cov.values[static_cast<std::size_t>(k)] + dm * dn;
    }
    return cov;
}

ScalarPath qv_sum_hilbert(const VectorPath& m) {
    ScalarPath sum(m.grid);
    for (int i = 0; i < m.dim; ++i) {
        const ScalarPath qi = realized_qv(m.coordinate(i));
        for (std::size_t k = 0; k < sum.values.size(); ++k)
            sum.values[k] += qi.values[k];
    }
    return sum;
}

UcpDistance ucp_distance(const std::vector<ScalarPath>& m,
                         const std::vector<ScalarPath>& n, int n_max) {
    if (m.empty() || m.size() != n.size())
        throw DimensionMismatch("ucp_distance: need paired nonempty families");
    if (n_max < 1) throw std::invalid_argument("ucp_distance: n_max >= 1");
    const TimeGrid grid = m[0].grid;
    if (grid.T + 1e-9 < static_cast<double>(n_max))
        throw HorizonTooShort("grid horizon " + std::to_string(grid.T) +
                              " below metric cap " + std::to_string(n_max));

    std::vector<double> per_trial(m.size());
    for (std::size_t tr = 0; tr < m.size(); ++tr) {
        if (!(m[tr].grid == grid) || !(n[tr].grid == grid))
            throw DimensionMismatch("ucp_distance: mixed grids");
        double sup = 0.0;
        double v = 0.0;
        int k = 0;
        for (int horizon = 1; horizon <= n_max; ++horizon) {
            const int k_end = std::min(
                grid.K, static_cast<int>(std::floor(horizon / grid.dt() + 1e-9)));
            for (; k <= k_end; ++k)
                sup = std::max(sup, std::abs(m[tr].values[static_cast<std::size_t>(
                                                 k)] -
                                             n[tr].values[static_cast<std::size_t>(
                                                 k)]));
            v += std::ldexp(std::min(1.0, sup), -horizon);
        }
        per_trial[tr] = v;
    }
    const MeanSe ms = mean_se(per_trial);
    return {ms.mean, ms.se};
}

std::vector<double> stieltjes_increments(const ScalarPath& f) {
    std::vector<double> inc(static_cast<std::size_t>(f.grid.K));
    for (int k = 0; k < f.grid.K; ++k) {
        const double d = f.values[static_cast<std::size_t>(k) + 1] -
                         f.values[static_cast<std::size_t>(k)];
        if (d < -1e-12)
            throw NonMonotonePath("decrement " + std::to_string(d) +
                                  " at cell " + std::to_string(k));
        inc[static_cast<std::size_t>(k)] = std::max(d, 0.0);
    }
    return inc;
}

double ac_diagnostic(const std::vector<double>& mu,
                     const std::vector<double>& nu) {
    if (mu.size() != nu.size())
        throw DimensionMismatch("ac_diagnostic: increment counts differ");
    double worst = 0.0;
    for (std::size_t k = 0; k < mu.size(); ++k) {
        if (nu[k] == 0.0) {
            if (mu[k] > 0.0) return std::numeric_limits<double>::infinity();
            continue;  // 0/0 counts as 0
        }
        worst = std::max(worst, mu[k] / nu[k]);
    }
    return worst;
}

}  // namespace cylmart
