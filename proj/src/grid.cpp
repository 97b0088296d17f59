#include "cylmart/grid.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace cylmart {

namespace {

// 17 significant digits round-trips any double exactly.
std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

std::string path_to_csv(const ScalarPath& p) {
    std::string out = "t,v_1\n";
    for (int k = 0; k <= p.grid.K; ++k) {
        out += fmt17(p.grid.t(k));
        out += ',';
        out += fmt17(p.values[static_cast<std::size_t>(k)]);
        out += '\n';
    }
    return out;
}

std::string path_to_csv(const VectorPath& p) {
    std::string out = "t";
    for (int i = 1; i <= p.dim; ++i) out += ",v_" + std::to_string(i);
    out += '\n';
    for (int k = 0; k <= p.grid.K; ++k) {
        out += fmt17(p.grid.t(k));
        const Eigen::VectorXd& v = p.values[static_cast<std::size_t>(k)];
        for (int i = 0; i < p.dim; ++i) {
            out += ',';
            out += fmt17(v(i));
        }
        out += '\n';
    }
    return out;
}

std::string matrix_to_csv(const Eigen::MatrixXd& m) {
    std::string out =
        std::to_string(m.rows()) + "," + std::to_string(m.cols()) + "\n";
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            if (c) out += ',';
            out += fmt17(m(r, c));
        }
        out += '\n';
    }
    return out;
}

Eigen::MatrixXd matrix_from_csv(const std::string& csv) {
    std::istringstream in(csv);
    std::string line;
    if (!std::getline(in, line))
        throw DimensionMismatch("matrix csv: missing header");
    Eigen::Index rows = 0, cols = 0;
    if (std::sscanf(line.c_str(), "%td,%td", &rows, &cols) != 2 || rows < 0 ||
        cols < 0)
        throw DimensionMismatch("matrix csv: bad header '" + line + "'");
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        if (!std::getline(in, line))
            throw DimensionMismatch("matrix csv: missing row");
        std::istringstream row(line);
        std::string fld;
        for (Eigen::Index c = 0; c < cols; ++c) {
            if (!std::getline(row, fld, ','))
                throw DimensionMismatch("matrix csv: short row");
            m(r, c) = std::stod(fld);
        }
    }
    return m;
}

void write_text_file(const std::string& path, const std::string& contents) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f << contents;
}

}  // namespace cylmart
