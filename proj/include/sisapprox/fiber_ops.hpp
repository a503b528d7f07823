#pragma once

#include <cstddef>
#include <vector>

#include "sisapprox/hermitian.hpp"
#include "sisapprox/spectral_data.hpp"

namespace sisapprox {

/// Rows are the fibers of every function of `ds` at cell g.
ComplexMatrix fiber_matrix(const SpectralDataset& ds, std::size_t g);

/// Orthogonal projector (|K| x |K|) onto the span of the rows of `rows`.
/// Rows are orthogonalized through a thresholded eigendecomposition of their
/// Gram matrix, so linearly dependent or non-normalized rows are handled.
ComplexMatrix span_projector(const ComplexMatrix& rows, double rel_tol = 1e-10);

/// Per-cell Parseval check: the nonzero rows must be orthonormal.
/// Returns max |<phi_s, phi_t> - delta_st| over nonzero rows.
double orthonormality_defect(const ComplexMatrix& rows);

/// Squared distance sum_j |f_j - P f_j|^2 of the data rows from the span
/// of `basis_rows`.
double projection_residual(const ComplexMatrix& data_rows, const ComplexMatrix& basis_rows);

}  // namespace sisapprox
