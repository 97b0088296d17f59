#include "cylmart/operator_calculus.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace cylmart {

SymmetricPSD::SymmetricPSD(const Eigen::MatrixXd& s) : s_(s) {
    if (s.rows() != s.cols())
        throw DimensionMismatch("SymmetricPSD: matrix is " +
                                std::to_string(s.rows()) + "x" +
                                std::to_string(s.cols()));
    const double asym = (s - s.transpose()).cwiseAbs().maxCoeff();
    if (asym > kSymTol)
        throw std::invalid_argument("SymmetricPSD: asymmetry " +
                                    std::to_string(asym));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s_,
                                                      Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -kEigTol)
        throw std::invalid_argument("SymmetricPSD: eigenvalue " +
                                    std::to_string(es.eigenvalues().minCoeff()));
}

SpectralDecomposition SpectralDecomposition::compute(const SymmetricPSD& s) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s.matrix());
    return {es.eigenvalues(), es.eigenvectors()};
}

Eigen::MatrixXd SpectralDecomposition::assemble(const Eigen::VectorXd& g) const {
    return q * g.asDiagonal() * q.transpose();
}

Eigen::MatrixXd borel_calc(const std::function<double(double)>& g,
                           const SymmetricPSD& s) {
    const SpectralDecomposition sd = SpectralDecomposition::compute(s);
    Eigen::VectorXd vals(sd.eigenvalues.size());
    for (Eigen::Index i = 0; i < vals.size(); ++i) {
        const double v = g(sd.eigenvalues(i));
        if (!std::isfinite(v))
            throw FunctionUnboundedOnSpectrum(
                "function non-finite at eigenvalue " +
                std::to_string(sd.eigenvalues(i)));
        vals(i) = v;
    }
    return sd.assemble(vals);
}

BandSystem::BandSystem(int d) : depth(d) {
    if (d < 1) throw std::invalid_argument("band depth must be >= 1");
}

double BandSystem::lower_edge(int n) const {
    return std::ldexp(1.0, -(n - 1));  // 2^{-(n-1)}; band 1 edge is 1
}

double BandSystem::upper_edge(int n) const {
    if (n == 1) return std::numeric_limits<double>::infinity();
    return std::ldexp(1.0, -(n - 2));
}

int BandSystem::classify(double lambda) const {
    if (lambda <= eps0) return 0;
    if (lambda > 1.0) return 1;
    for (int n = 2; n <= depth; ++n)
        if (lambda > lower_edge(n)) return n;
    throw BandDepthInsufficient("eigenvalue " + std::to_string(lambda) +
                                " below lowest band edge " +
                                std::to_string(lowest_edge()) +
                                " at depth " + std::to_string(depth));
}

BandSystem band_system(const SymmetricPSD& s, int depth) {
    BandSystem bands(depth);
    const SpectralDecomposition sd = SpectralDecomposition::compute(s);
    for (Eigen::Index i = 0; i < sd.eigenvalues.size(); ++i)
        bands.classify(sd.eigenvalues(i));
    return bands;
}

BandFunctions band_functions(const SymmetricPSD& s, int depth) {
    BandFunctions out;
    out.bands = BandSystem(depth);
    const SpectralDecomposition sd = SpectralDecomposition::compute(s);
    const Eigen::Index d = sd.eigenvalues.size();

    Eigen::VectorXd kernel = Eigen::VectorXd::Zero(d);
    std::vector<Eigen::VectorXd> inv(static_cast<std::size_t>(depth),
                                     Eigen::VectorXd::Zero(d));
    std::vector<Eigen::VectorXd> ind(static_cast<std::size_t>(depth),
                                     Eigen::VectorXd::Zero(d));
    for (Eigen::Index i = 0; i < d; ++i) {
        const double lambda = sd.eigenvalues(i);
        const int n = out.bands.classify(lambda);
        if (n == 0) {
            kernel(i) = 1.0;
        } else {
            inv[static_cast<std::size_t>(n - 1)](i) = 1.0 / lambda;
            ind[static_cast<std::size_t>(n - 1)](i) = 1.0;
        }
    }
    out.psi0 = sd.assemble(kernel);
    out.psi.reserve(static_cast<std::size_t>(depth));
    out.c.reserve(static_cast<std::size_t>(depth));
    for (int n = 0; n < depth; ++n) {
        out.psi.push_back(sd.assemble(inv[static_cast<std::size_t>(n)]));
        out.c.push_back(sd.assemble(ind[static_cast<std::size_t>(n)]));
    }
    return out;
}

ProjectionLeftInverse gram_schmidt_left_inverse(
    const Eigen::MatrixXd& f, const Eigen::MatrixXd& basis_x0) {
    if (f.cols() != basis_x0.rows())
        throw DimensionMismatch("gram_schmidt_left_inverse: F is " +
                                std::to_string(f.rows()) + "x" +
                                std::to_string(f.cols()) + ", basis rows " +
                                std::to_string(basis_x0.rows()));
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(basis_x0);
    qr.setThreshold(kEigTol);
    if (qr.rank() < basis_x0.cols())
        throw std::invalid_argument(
            "gram_schmidt_left_inverse: basis vectors are dependent");

    const Eigen::Index m = f.rows();
    const Eigen::Index p = f.cols();
    std::vector<Eigen::VectorXd> gs;  // orthonormal images
    std::vector<Eigen::VectorXd> vs;  // preimages: F vs[i] = gs[i]
    for (Eigen::Index j = 0; j < basis_x0.cols(); ++j) {
        Eigen::VectorXd w = f * basis_x0.col(j);
        Eigen::VectorXd vw = basis_x0.col(j);
        // Modified Gram-Schmidt, twice for numerical orthogonality; the
        // preimage gets the same coefficients so F vw tracks w exactly.
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t i = 0; i < gs.size(); ++i) {
                const double cij = gs[i].dot(w);
                w -= cij * gs[i];
                vw -= cij * vs[i];
            }
        }
        const double norm = w.norm();
        if (norm < kGramSchmidtDrop) continue;  // image already spanned
        gs.push_back(w / norm);
        vs.push_back(vw / norm);
    }

    ProjectionLeftInverse out;
    out.rank = static_cast<int>(gs.size());
    out.p = Eigen::MatrixXd::Zero(m, m);
    out.l = Eigen::MatrixXd::Zero(p, m);
    for (std::size_t i = 0; i < gs.size(); ++i) {
        out.p += gs[i] * gs[i].transpose();
        out.l += vs[i] * gs[i].transpose();
    }
    return out;
}

Eigen::MatrixXd resolvent_oracle(const SymmetricPSD& s) {
    const Eigen::MatrixXd& m = s.matrix();
    const Eigen::Index d = m.rows();
    const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(d, d) + m * m;
    return a.ldlt().solve(Eigen::MatrixXd::Identity(d, d));
}

Eigen::MatrixXd resolvent_truncation_convergence(const Eigen::MatrixXd& a,
                                                 int k) {
    if (k < 0 || k > a.rows())
        throw DimensionMismatch("row truncation " + std::to_string(k) +
                                " outside [0, " + std::to_string(a.rows()) +
                                "]");
    Eigen::MatrixXd ak = a;
    ak.bottomRows(a.rows() - k).setZero();
    const Eigen::Index d = a.cols();
    const Eigen::MatrixXd m =
        Eigen::MatrixXd::Identity(d, d) + ak.transpose() * ak;
    return m.ldlt().solve(Eigen::MatrixXd::Identity(d, d));
}

double sym_operator_norm(const Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace cylmart
