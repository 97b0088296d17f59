#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "cylmart/errors.hpp"

namespace cylmart {

inline constexpr double kSymTol = 1e-10;       // symmetry validation
inline constexpr double kEigTol = 1e-10;       // PSD validation / rank cutoff
inline constexpr double kKernelEps = 1e-12;    // spectrum below this is kernel
inline constexpr double kGramSchmidtDrop = 1e-10;  // image vectors dropped below

// Symmetric positive-semidefinite matrix, validated on construction.
class SymmetricPSD {
public:
    explicit SymmetricPSD(const Eigen::MatrixXd& s);

    const Eigen::MatrixXd& matrix() const { return s_; }
    int dim() const { return static_cast<int>(s_.rows()); }

private:
    Eigen::MatrixXd s_;
};

// Eigendecomposition S = Q diag(lambda) Q^T with ascending eigenvalues.
struct SpectralDecomposition {
    Eigen::VectorXd eigenvalues;
    Eigen::MatrixXd q;

    static SpectralDecomposition compute(const SymmetricPSD& s);

    // Q diag(g(lambda)) Q^T for per-eigenvalue values g.
    Eigen::MatrixXd assemble(const Eigen::VectorXd& g) const;
};

// Scalar functional calculus g(S). Throws FunctionUnboundedOnSpectrum when
// g is non-finite at some eigenvalue. Operator norm of the result is at most
// the sup of |g| on the spectrum.
Eigen::MatrixXd borel_calc(const std::function<double(double)>& g,
                           const SymmetricPSD& s);

// Dyadic band layout covering (lowest_edge, inf):
//   band 1 = (1, inf), band n = (2^{-(n-1)}, 2^{-(n-2)}] for 2 <= n <= depth.
// Half-open cells mean a boundary eigenvalue belongs to exactly one band.
// Spectrum at or below kKernelEps counts as kernel (index 0); spectrum in
// (kKernelEps, lowest_edge] is uncovered and raises BandDepthInsufficient.
struct BandSystem {
    int depth = 1;
    double eps0 = kKernelEps;

    explicit BandSystem(int d);

    double lower_edge(int n) const;  // open lower endpoint of band n
    double upper_edge(int n) const;  // closed upper endpoint (inf for n = 1)
    double lowest_edge() const { return lower_edge(depth); }

    // 0 for kernel, 1..depth for the covering band.
    int classify(double lambda) const;
};

// Validates the band layout of s's spectrum; returns the system.
BandSystem band_system(const SymmetricPSD& s, int depth);

// psi_n(S) = (t -> 1/t on band n)(S), c_n(S) = (indicator of band n)(S),
// psi0(S) = (indicator of kernel)(S). These satisfy S psi_n(S) = c_n(S) and
// psi0(S) + sum_n c_n(S) = I.
struct BandFunctions {
    BandSystem bands;
    Eigen::MatrixXd psi0;
    std::vector<Eigen::MatrixXd> psi;  // index 0 <-> band 1
    std::vector<Eigen::MatrixXd> c;    // index 0 <-> band 1

    BandFunctions() : bands(1) {}
};
BandFunctions band_functions(const SymmetricPSD& s, int depth);

// Orthogonal projection P onto span{F x : x in basis_x0} and a left inverse
// L with F L = P and range(L) inside span(basis_x0). Built by Gram-Schmidt
// on the image vectors, carrying along preimages; images whose orthogonal
// residual falls below kGramSchmidtDrop are dropped, which makes the
// construction total on rank-deficient F.
struct ProjectionLeftInverse {
    Eigen::MatrixXd p;  // m x m projection
    Eigen::MatrixXd l;  // p x m left inverse
    int rank = 0;
};
ProjectionLeftInverse gram_schmidt_left_inverse(const Eigen::MatrixXd& f,
                                                const Eigen::MatrixXd& basis_x0);

// (I + S^2)^{-1} computed by direct linear solve; independent cross-check of
// the spectral route, which evaluates t -> 1/(1+t^2).
Eigen::MatrixXd resolvent_oracle(const SymmetricPSD& s);

// (I + A_k^T A_k)^{-1} where A_k keeps the first k rows of A and zeroes the
// rest. For k = rows(A) this is the full resolvent-type inverse; increasing
// k walks the finite-rank truncations toward it.
Eigen::MatrixXd resolvent_truncation_convergence(const Eigen::MatrixXd& a,
                                                 int k);

// Largest |eigenvalue| of a symmetric matrix (its operator norm).
double sym_operator_norm(const Eigen::MatrixXd& m);

}  // namespace cylmart
