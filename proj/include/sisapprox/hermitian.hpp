#pragma once

#include <complex>
#include <cstddef>

#include <Eigen/Dense>

namespace sisapprox {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

/// A validated complex Hermitian matrix of order at most 256.
///
/// Construction checks finiteness and conjugate symmetry (relative to the
/// largest entry magnitude), then symmetrizes so that the stored entries are
/// exactly Hermitian and the diagonal is exactly real.
class HermitianMatrix {
public:
    static constexpr Eigen::Index kMaxOrder = 256;
    static constexpr double kSymmetryTolerance = 1e-12;

    explicit HermitianMatrix(const ComplexMatrix& entries);

    Eigen::Index order() const { return entries_.rows(); }
    const ComplexMatrix& entries() const { return entries_; }
    double frobenius_norm() const { return entries_.norm(); }

private:
    ComplexMatrix entries_;
};

/// Largest |a_ij - conj(a_ji)| over all entries.
double max_asymmetry(const ComplexMatrix& a);

struct EigenSystem {
    RealVector eigenvalues;     // descending
    ComplexMatrix eigenvectors; // column i belongs to eigenvalues[i]
};

/// Cyclic Jacobi eigendecomposition.
///
/// Sweeps until the off-diagonal Frobenius norm falls to roundoff level;
/// `tol` (in (0, 1e-6]) is the relative off-diagonal norm that must be reached
/// for the result to be accepted. Eigenvalues in [-1e-10 |G|_F, 0) are
/// clamped to zero. Output is bit-for-bit deterministic.
EigenSystem eig_hermitian(const HermitianMatrix& g, double tol = 1e-12);

/// Number of eigenvalues strictly above rel_tol * max(largest eigenvalue, 0).
std::size_t rank_by_threshold(const EigenSystem& eigs, double rel_tol);
std::size_t rank_by_threshold(const RealVector& eigenvalues, double rel_tol);

/// Rotates v so its first component of magnitude > 1e-12 is real positive.
ComplexVector normalize_phase(ComplexVector v);

}  // namespace sisapprox
