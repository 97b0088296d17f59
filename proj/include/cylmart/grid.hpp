#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <string>
#include <vector>

#include "cylmart/errors.hpp"

namespace cylmart {

// Uniform grid 0 = t_0 < t_1 < ... < t_K = T. Cell k is (t_k, t_{k+1}].
struct TimeGrid {
    double T = 1.0;
    int K = 1;

    double dt() const { return T / K; }
    double t(int k) const { return T * static_cast<double>(k) / K; }

    // Grid index of a time that must sit on the grid.
    int index_of(double time) const {
        const double step = dt();
        const int j = static_cast<int>(std::lround(time / step));
        if (j < 0 || j > K || std::abs(time - t(j)) > 1e-9 * step)
            throw GridMisalignment("time " + std::to_string(time) +
                                   " is not a grid point");
        return j;
    }

    bool operator==(const TimeGrid& o) const { return T == o.T && K == o.K; }
};

// Real-valued path sampled at grid points; values[0] = 0 for martingales.
struct ScalarPath {
    TimeGrid grid;
    std::vector<double> values;  // length K+1

    ScalarPath() = default;
    explicit ScalarPath(TimeGrid g, double start = 0.0)
        : grid(g), values(static_cast<std::size_t>(g.K) + 1, start) {}
};

// R^d-valued path sampled at grid points.
struct VectorPath {
    TimeGrid grid;
    int dim = 0;
    std::vector<Eigen::VectorXd> values;  // length K+1

    VectorPath() = default;
    VectorPath(TimeGrid g, int d)
        : grid(g),
          dim(d),
          values(static_cast<std::size_t>(g.K) + 1, Eigen::VectorXd::Zero(d)) {}

    ScalarPath coordinate(int i) const {
        ScalarPath p(grid);
        for (std::size_t k = 0; k < values.size(); ++k) p.values[k] = values[k](i);
        return p;
    }
};

// Piecewise-constant operator family: value on cell k is cell(k). A constant
// family stores a single matrix.
struct OperatorPath {
    TimeGrid grid;
    bool constant = true;
    std::vector<Eigen::MatrixXd> cells;  // length 1 if constant, else K

    OperatorPath() = default;
    OperatorPath(TimeGrid g, Eigen::MatrixXd value)
        : grid(g), constant(true), cells{std::move(value)} {}
    OperatorPath(TimeGrid g, std::vector<Eigen::MatrixXd> per_cell)
        : grid(g), constant(false), cells(std::move(per_cell)) {
        if (cells.size() != static_cast<std::size_t>(grid.K))
            throw DimensionMismatch("per-cell operator family needs K matrices");
    }

    const Eigen::MatrixXd& cell(int k) const {
        return constant ? cells[0] : cells[static_cast<std::size_t>(k)];
    }
    int rows() const { return static_cast<int>(cells[0].rows()); }
    int cols() const { return static_cast<int>(cells[0].cols()); }
};

// Piecewise-constant vector integrand: value on cell k (left-endpoint
// evaluation, i.e. previsible) is cell(k).
struct IntegrandPath {
    TimeGrid grid;
    bool constant = true;
    std::vector<Eigen::VectorXd> cells;  // length 1 if constant, else K

    IntegrandPath() = default;
    IntegrandPath(TimeGrid g, Eigen::VectorXd value)
        : grid(g), constant(true), cells{std::move(value)} {}
    IntegrandPath(TimeGrid g, std::vector<Eigen::VectorXd> per_cell)
        : grid(g), constant(false), cells(std::move(per_cell)) {
        if (cells.size() != static_cast<std::size_t>(grid.K))
            throw DimensionMismatch("per-cell integrand needs K vectors");
    }

    const Eigen::VectorXd& cell(int k) const {
        return constant ? cells[0] : cells[static_cast<std::size_t>(k)];
    }
    int dim() const { return static_cast<int>(cells[0].size()); }
};

// CSV exports. Paths use header "t,v_1,...,v_d" with 17 significant digits;
// matrices use a "rows,cols" header then row-major entries.
std::string path_to_csv(const ScalarPath& p);
std::string path_to_csv(const VectorPath& p);
std::string matrix_to_csv(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_csv(const std::string& csv);
void write_text_file(const std::string& path, const std::string& contents);

}  // namespace cylmart
