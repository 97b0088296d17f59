#include "cylmart/cyl_martingale.hpp"

#include <cmath>
#include <string>

#include "cylmart/errors.hpp"
#include "cylmart/stats.hpp"

namespace cylmart {

void CylModel::finalize() {
    d_x = g.rows();
    d_h = g.cols();
    if (!(g.grid == grid) || !(w.path.grid == grid))
        throw DimensionMismatch("model pieces live on different grids");
    if (w.path.dim != d_h)
        throw DimensionMismatch("driving path dim " + std::to_string(w.path.dim) +
                                ", operator expects " + std::to_string(d_h));
    if (!g.constant)
        for (const auto& cell : g.cells)
            if (cell.rows() != d_x || cell.cols() != d_h)
                throw DimensionMismatch("ragged operator family");
    dm_.clear();
    dm_.reserve(static_cast<std::size_t>(grid.K));
    for (int k = 0; k < grid.K; ++k)
        dm_.emplace_back(g.cell(k) * w.dw[static_cast<std::size_t>(k)]);
}

CylModel CylModel::simulate(const OperatorPath& g_path, RngSeed seed) {
    CylModel m;
    m.grid = g_path.grid;
    m.g = g_path;
    m.seed = seed;
    m.w = simulate_cyl_bm(g_path.cols(), m.grid, seed);
    m.finalize();
    return m;
}

CylModel CylModel::from_brownian(const OperatorPath& g_path, VectorPath w_path) {
    CylModel m;
    m.grid = g_path.grid;
    m.g = g_path;
    m.seed = RngSeed{0, 0};
    m.w.path = std::move(w_path);
    m.w.seed = m.seed;
    m.w.dw.clear();
    m.w.dw.reserve(static_cast<std::size_t>(m.grid.K));
    for (int k = 0; k < m.grid.K; ++k)
        m.w.dw.emplace_back(m.w.path.values[static_cast<std::size_t>(k) + 1] -
                            m.w.path.values[static_cast<std::size_t>(k)]);
    m.finalize();
    return m;
}

CylModel CylModel::stopped(int cell) const {
    if (cell < 0 || cell > grid.K)
        throw DimensionMismatch("stop index outside grid");
    CylModel m = *this;
    for (int k = cell; k < grid.K; ++k) {
        m.w.dw[static_cast<std::size_t>(k)].setZero();
        m.w.path.values[static_cast<std::size_t>(k) + 1] =
            m.w.path.values[static_cast<std::size_t>(cell)];
    }
    m.finalize();
    return m;
}

ScalarPath eval_m(const CylModel& model, const Eigen::VectorXd& xstar) {
    if (xstar.size() != model.d_x)
        throw DimensionMismatch("functional dim " + std::to_string(xstar.size()) +
                                ", state dim " + std::to_string(model.d_x));
    ScalarPath m(model.grid);
    for (int k = 0; k < model.grid.K; ++k)
        m.values[static_cast<std::size_t>(k) + 1] =
            m.values[static_cast<std::size_t>(k)] + xstar.dot(model.dm(k));
    return m;
}

IncrementFamily make_increment_family(const CylModel& model) {
    return [&model](const Eigen::VectorXd& xstar, int cell) {
        return xstar.dot(model.dm(cell));
    };
}

IdentityCheck covariation_identity_check(const CylModel& model,
                                         const Eigen::VectorXd& xstar,
                                         const Eigen::VectorXd& ystar) {
    IdentityCheck out;
    out.lhs = realized_cov(eval_m(model, xstar), eval_m(model, ystar));
    out.rhs = ScalarPath(model.grid);
    const double dt = model.grid.dt();
    for (int k = 0; k < model.grid.K; ++k) {
        const Eigen::VectorXd gx = model.g.cell(k).transpose() * xstar;
        const Eigen::VectorXd gy = model.g.cell(k).transpose() * ystar;
        out.rhs.values[static_cast<std::size_t>(k) + 1] =
            out.rhs.values[static_cast<std::size_t>(k)] + gx.dot(gy) * dt;
    }
    out.sup_gap = 0.0;
    for (std::size_t k = 0; k < out.lhs.values.size(); ++k)
        out.sup_gap =
            std::max(out.sup_gap, std::abs(out.lhs.values[k] - out.rhs.values[k]));
    return out;
}

ScalarPath integrate_vs_m(const CylModel& model, const IntegrandPath& f) {
    if (!(f.grid == model.grid))
        throw DimensionMismatch("integrand on a different grid");
    if (f.dim() != model.d_x)
        throw DimensionMismatch("integrand dim " + std::to_string(f.dim()) +
                                ", functional space dim " +
                                std::to_string(model.d_x));
    ScalarPath n(model.grid);
    for (int k = 0; k < model.grid.K; ++k)
        n.values[static_cast<std::size_t>(k) + 1] =
            n.values[static_cast<std::size_t>(k)] + f.cell(k).dot(model.dm(k));
    return n;
}

ScalarPath integrand_qv_profile(const CylModel& model, const IntegrandPath& f) {
    if (!(f.grid == model.grid))
        throw DimensionMismatch("integrand on a different grid");
    ScalarPath q(model.grid);
    const double dt = model.grid.dt();
    for (int k = 0; k < model.grid.K; ++k) {
        const Eigen::VectorXd gf = model.g.cell(k).transpose() * f.cell(k);
        q.values[static_cast<std::size_t>(k) + 1] =
            q.values[static_cast<std::size_t>(k)] + gf.squaredNorm() * dt;
    }
    return q;
}

IdentityCheck compose_martingale(const CylModel& model, const OperatorPath& psi,
                                 const IntegrandPath& phi) {
    if (psi.rows() != model.d_x || psi.cols() != model.d_x)
        throw DimensionMismatch("composition operator must act on the state");
    if (phi.dim() != model.d_x)
        throw DimensionMismatch("outer integrand dim mismatch");

    IdentityCheck out;
    // lhs: evaluate N e_i = integral of Psi* e_i dM per coordinate, then
    // integrate phi against those increments, coordinates ascending.
    out.lhs = ScalarPath(model.grid);
    for (int k = 0; k < model.grid.K; ++k) {
        const Eigen::MatrixXd& pk = psi.cell(k);
        const Eigen::VectorXd& ph = phi.cell(k);
        double inc = 0.0;
        for (int i = 0; i < model.d_x; ++i) {
            // Psi* e_i is row i of Psi, so dN(e_i) = <row_i(Psi), dM>.
            const double dn_i = pk.row(i).dot(model.dm(k));
            inc += ph(i) * dn_i;
        }
        out.lhs.values[static_cast<std::size_t>(k) + 1] =
            out.lhs.values[static_cast<std::size_t>(k)] + inc;
    }
    // rhs: one integral of the composed integrand Psi* phi.
    std::vector<Eigen::VectorXd> composed;
    composed.reserve(static_cast<std::size_t>(model.grid.K));
    for (int k = 0; k < model.grid.K; ++k)
        composed.emplace_back(psi.cell(k).transpose() * phi.cell(k));
    out.rhs = integrate_vs_m(model, IntegrandPath(model.grid, std::move(composed)));

    out.sup_gap = 0.0;
    for (std::size_t k = 0; k < out.lhs.values.size(); ++k)
        out.sup_gap =
            std::max(out.sup_gap, std::abs(out.lhs.values[k] - out.rhs.values[k]));
    return out;
}

InttheoryReport inttheory_limit_check(const std::vector<CylModel>& models,
                                      const std::vector<ElementaryProcess>& stages,
                                      const std::vector<ScalarPath>& reference,
                                      double target_qv_t, int n_max) {
    if (models.empty() || models.size() != reference.size())
        throw DimensionMismatch("need one reference path per model trial");
    InttheoryReport report;
    for (const ElementaryProcess& stage : stages) {
        std::vector<ScalarPath> paths;
        paths.reserve(models.size());
        std::vector<double> qv_t;
        qv_t.reserve(models.size());
        for (const CylModel& model : models) {
            VectorPath p = step_integral(stage, make_increment_family(model));
            if (p.dim != 1)
                throw DimensionMismatch("limit check expects scalar stages");
            paths.push_back(p.coordinate(0));
            qv_t.push_back(realized_qv(paths.back()).values.back());
        }
        const UcpDistance d = ucp_distance(paths, reference, n_max);
        report.distances.push_back(d.estimate);
        report.distance_ses.push_back(d.std_error);
        report.qv_gaps.push_back(std::abs(mean_se(qv_t).mean - target_qv_t));
    }
    report.distances_nonincreasing = true;
    for (std::size_t i = 1; i < report.distances.size(); ++i)
        if (report.distances[i] > report.distances[i - 1])
            report.distances_nonincreasing = false;
    return report;
}

namespace {

nlohmann::json matrix_entries(const Eigen::MatrixXd& m) {
    nlohmann::json entries = nlohmann::json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) entries.push_back(m(r, c));
    return entries;
}

Eigen::MatrixXd matrix_from_entries(const nlohmann::json& entries, int rows,
                                    int cols) {
    if (static_cast<int>(entries.size()) != rows * cols)
        throw ConfigError("operator entries: expected " +
                          std::to_string(rows * cols) + " values");
    Eigen::MatrixXd m(rows, cols);
    int i = 0;
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c)
            m(r, c) = entries[static_cast<std::size_t>(i++)].get<double>();
    return m;
}

}  // namespace

nlohmann::json model_to_json(const CylModel& model) {
    nlohmann::json j;
    j["d_H"] = model.d_h;
    j["d_X"] = model.d_x;
    j["grid"] = {{"T", model.grid.T}, {"K", model.grid.K}};
    j["seed"] = {{"seed", model.seed.seed}, {"stream", model.seed.stream}};
    if (model.g.constant) {
        j["G"] = "constant";
        j["entries"] = matrix_entries(model.g.cells[0]);
    } else {
        j["G"] = "per_cell";
        nlohmann::json cells = nlohmann::json::array();
        for (const auto& cell : model.g.cells) cells.push_back(matrix_entries(cell));
        j["entries"] = cells;
    }
    return j;
}

CylModel model_from_json(const nlohmann::json& j) {
    for (const auto& [key, _] : j.items())
        if (key != "d_H" && key != "d_X" && key != "grid" && key != "seed" &&
            key != "G" && key != "entries")
            throw ConfigError("model json: unknown key '" + key + "'");
    const int d_h = j.at("d_H").get<int>();
    const int d_x = j.at("d_X").get<int>();
    const TimeGrid grid{j.at("grid").at("T").get<double>(),
                        j.at("grid").at("K").get<int>()};
    const RngSeed seed{j.at("seed").at("seed").get<std::uint64_t>(),
                       j.at("seed").at("stream").get<std::uint64_t>()};
    const std::string kind = j.at("G").get<std::string>();
    OperatorPath g;
    if (kind == "constant") {
        g = OperatorPath(grid, matrix_from_entries(j.at("entries"), d_x, d_h));
    } else if (kind == "per_cell") {
        std::vector<Eigen::MatrixXd> cells;
        cells.reserve(j.at("entries").size());
        for (const auto& e : j.at("entries"))
            cells.push_back(matrix_from_entries(e, d_x, d_h));
        g = OperatorPath(grid, std::move(cells));
    } else {
        throw ConfigError("model json: G must be 'constant' or 'per_cell'");
    }
    return CylModel::simulate(g, seed);
}

}  // namespace cylmart
