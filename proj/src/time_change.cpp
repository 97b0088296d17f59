#include "cylmart/time_change.hpp"

#include <cmath>
#include <cstdio>
#include <cstddef>

#include "cylmart/errors.hpp"
#include "cylmart/path_engine.hpp"

namespace cylmart {

namespace {

// 17 significant digits round-trips a double exactly.
std::string fmt17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

ScalarPath build_f_from_qv(const std::vector<ScalarPath>& qv_paths,
                           int n_terms) {
    if (n_terms < 1 ||
        static_cast<std::size_t>(n_terms) > qv_paths.size())
        throw ConfigError("build_f: n_terms outside [1, #paths]");
    const TimeGrid grid = qv_paths[0].grid;
    for (int n = 0; n < n_terms; ++n) {
        const ScalarPath& q = qv_paths[static_cast<std::size_t>(n)];
        if (!(q.grid == grid))
            throw DimensionMismatch("build_f: qv paths on different grids");
        stieltjes_increments(q);  // NonMonotonePath on bad input
        if (q.values[0] != 0.0)
            throw NonMonotonePath("build_f: qv path must start at 0");
    }

    ScalarPath f(grid);
    for (int k = 0; k <= grid.K; ++k) {
        double s = 0.0;
        for (int n = 1; n <= n_terms; ++n)
            s += std::ldexp(
                std::atan(qv_paths[static_cast<std::size_t>(n) - 1]
                              .values[static_cast<std::size_t>(k)]),
                -n);
        f.values[static_cast<std::size_t>(k)] = grid.t(k) * (1.0 + s);
    }
    return f;
}

ScalarPath build_f(const std::vector<ScalarPath>& m_paths, int n_terms) {
    std::vector<ScalarPath> qv;
    qv.reserve(m_paths.size());
    for (const ScalarPath& m : m_paths) qv.push_back(realized_qv(m));
    return build_f_from_qv(qv, n_terms);
}

TimeChange invert_f(const ScalarPath& f, TimeGrid s_grid) {
    stieltjes_increments(f);  // the clock itself must be nondecreasing

    TimeChange tc;
    tc.f = f;
    tc.s_grid = s_grid;
    tc.tau.assign(static_cast<std::size_t>(s_grid.K) + 1, 0);

    // Two-pointer sweep: s ascends, so tau_s ascends too.
    int j = 0;
    const int kmax = f.grid.K;
    for (int i = 0; i <= s_grid.K; ++i) {
        const double s = s_grid.t(i);
        while (j <= kmax && !(f.values[static_cast<std::size_t>(j)] > s)) ++j;
        if (j > kmax)
            throw HorizonExceeded("invert_f: s = " + std::to_string(s) +
                                  " needs data past F(T) = " +
                                  std::to_string(f.values.back()));
        tc.tau[static_cast<std::size_t>(i)] = j;
    }
    return tc;
}

TimeChange make_time_change(const std::vector<ScalarPath>& m_paths,
                            int n_terms, TimeGrid s_grid) {
    TimeChange tc = invert_f(build_f(m_paths, n_terms), s_grid);
    tc.n_terms = n_terms;
    return tc;
}

double max_changed_horizon(const ScalarPath& f) { return f.values.back(); }

ScalarPath apply_time_change(const ScalarPath& path, const TimeChange& tc) {
    if (!(path.grid == tc.f.grid))
        throw DimensionMismatch("apply_time_change: grid mismatch");
    ScalarPath out(tc.s_grid);
    for (int i = 0; i <= tc.s_grid.K; ++i)
        out.values[static_cast<std::size_t>(i)] =
            path.values[static_cast<std::size_t>(
                tc.tau[static_cast<std::size_t>(i)])];
    return out;
}

AcCertificate certify_ac(const ScalarPath& m_path, const TimeChange& tc,
                         int n) {
    if (!(m_path.grid == tc.f.grid))
        throw DimensionMismatch("certify_ac: grid mismatch");
    if (n < 1) throw ConfigError("certify_ac: functional index must be >= 1");
    const double ds = tc.s_grid.dt();
    const double dt = m_path.grid.dt();
    if (ds > dt * (1.0 + 1e-9))
        throw GridMisalignment(
            "certify_ac: changed grid must be at least as fine as the input "
            "grid (ds <= dt)");

    AcCertificate cert;
    cert.n = n;
    cert.ds = ds;

    const ScalarPath qv = realized_qv(m_path);
    cert.k_path = qv.values.back();
    double max_input_cell = 0.0;
    for (int k = 0; k < m_path.grid.K; ++k) {
        const double d = qv.values[static_cast<std::size_t>(k) + 1] -
                         qv.values[static_cast<std::size_t>(k)];
        if (d > max_input_cell) max_input_cell = d;
    }
    cert.slack = max_input_cell / ds;
    cert.bound = std::ldexp(1.0, n) * (1.0 + cert.k_path * cert.k_path) * ds *
                 (1.0 + cert.slack);

    const ScalarPath changed = apply_time_change(m_path, tc);
    for (int i = 0; i < tc.s_grid.K; ++i) {
        const double inc = changed.values[static_cast<std::size_t>(i) + 1] -
                           changed.values[static_cast<std::size_t>(i)];
        const double cell_qv = inc * inc;
        if (cell_qv > cert.max_cell_qv) cert.max_cell_qv = cell_qv;
        if (cell_qv > cert.bound)
            cert.violations.push_back(i);
    }
    cert.max_density = cert.max_cell_qv / ds;
    return cert;
}

std::string time_change_to_csv(const TimeChange& tc) {
    std::string out = "s,tau_s,f_tau_s\n";
    for (int i = 0; i <= tc.s_grid.K; ++i) {
        const int j = tc.tau[static_cast<std::size_t>(i)];
        out += fmt17(tc.s_grid.t(i));
        out += ',';
        out += fmt17(tc.f.grid.t(j));
        out += ',';
        out += fmt17(tc.f.values[static_cast<std::size_t>(j)]);
        out += '\n';
    }
    return out;
}

}  // namespace cylmart
