#include "sisapprox/fiber_ops.hpp"

#include <algorithm>
#include <cmath>

namespace sisapprox {

ComplexMatrix fiber_matrix(const SpectralDataset& ds, std::size_t g) {
    const auto m = static_cast<Eigen::Index>(ds.num_functions());
    const auto nk = static_cast<Eigen::Index>(ds.grid().num_translations());
    ComplexMatrix out(m, nk);
    for (Eigen::Index j = 0; j < m; ++j) {
        const auto f = ds.fiber_view(static_cast<std::size_t>(j), g);
        for (Eigen::Index k = 0; k < nk; ++k) out(j, k) = f[static_cast<std::size_t>(k)];
    }
    return out;
}

ComplexMatrix span_projector(const ComplexMatrix& rows, double rel_tol) {
    const Eigen::Index nk = rows.cols();
    ComplexMatrix projector = ComplexMatrix::Zero(nk, nk);
    if (rows.rows() == 0 || rows.squaredNorm() == 0.0) return projector;
    // Gram of rows with <x, y> = sum x conj(y) is G = R R^*; for an eigenpair
    // G u = lambda u the vector R^T conj(u) / sqrt(lambda) is a unit element
    // of the row span, and distinct eigenpairs give orthogonal vectors.
    const ComplexMatrix gram = rows * rows.adjoint();
    const EigenSystem eig = eig_hermitian(HermitianMatrix(gram));
    const std::size_t rank = rank_by_threshold(eig, rel_tol);
    for (std::size_t s = 0; s < rank; ++s) {
        const auto idx = static_cast<Eigen::Index>(s);
        const ComplexVector w =
            rows.transpose() * eig.eigenvectors.col(idx).conjugate() / std::sqrt(eig.eigenvalues(idx));
        projector += w * w.adjoint();
    }
    return projector;
}

double orthonormality_defect(const ComplexMatrix& rows) {
    std::vector<Eigen::Index> nonzero;
    for (Eigen::Index s = 0; s < rows.rows(); ++s) {
        if (rows.row(s).squaredNorm() > 0.0) nonzero.push_back(s);
    }
    double worst = 0.0;
    for (std::size_t a = 0; a < nonzero.size(); ++a) {
        for (std::size_t b = a; b < nonzero.size(); ++b) {
            // <phi_a, phi_b> = sum phi_a conj(phi_b)
            const Complex ip = (rows.row(nonzero[a]).array() * rows.row(nonzero[b]).array().conjugate()).sum();
            const double target = (a == b) ? 1.0 : 0.0;
            worst = std::max(worst, std::abs(ip - target));
        }
    }
    return worst;
}

double projection_residual(const ComplexMatrix& data_rows, const ComplexMatrix& basis_rows) {
    const ComplexMatrix p = span_projector(basis_rows);
    double total = 0.0;
    for (Eigen::Index j = 0; j < data_rows.rows(); ++j) {
        const ComplexVector f = data_rows.row(j).transpose();
        total += (f - p * f).squaredNorm();
    }
    return total;
}

}  // namespace sisapprox
