#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sisapprox/spectral_data.hpp"

namespace sisapprox {

struct FitOptions {
    unsigned threads = 1;
    /// Eigenvalues at or below rank_rel_tol * (largest eigenvalue in the cell)
    /// count as zero: their generator fibers are set to zero.
    double rank_rel_tol = 1e-10;
    double eig_tol = 1e-12;
};

/// Optimal shift-invariant space of length at most `rank` on a grid.
struct FittedModel {
    SpectralGrid grid;
    std::size_t rank = 0;
    /// [g][s]: the eigenvalue behind generator s at cell g (zero-padded).
    std::vector<double> selected_eigenvalues;
    /// Generator spectra phi_s^(omega_g + k), stored like a dataset [s][g][k].
    SpectralDataset generators;
    std::vector<double> residuals;  // per cell
    double error = 0.0;
    std::size_t effective_length = 0;
    /// [g][i]: every eigenvalue at the cell, in selection order.
    std::vector<double> eigenvalue_curves;
    std::size_t curves_per_cell = 0;

    std::span<const double> selected_at(std::size_t g) const {
        return {selected_eigenvalues.data() + g * rank, rank};
    }
    std::span<const double> curve_at(std::size_t g) const {
        return {eigenvalue_curves.data() + g * curves_per_cell, curves_per_cell};
    }
};

FittedModel fit_sis(const SpectralDataset& ds, std::size_t rank, const FitOptions& options = {});

/// sum_{i > rank} integral of lambda_i over the grid; rank 0 gives the total energy.
double error_sis(const SpectralDataset& ds, std::size_t rank, const FitOptions& options = {});

struct Projection {
    SpectralDataset projected;
    std::vector<double> residuals;  // per function
};

/// Projects every fiber of `ds` onto the span of the generator fibers at the
/// same cell.
Projection project_onto(const SpectralDataset& generators, const SpectralDataset& ds, unsigned threads = 1);
Projection project_onto(const FittedModel& model, const SpectralDataset& ds, unsigned threads = 1);

/// Largest per-cell orthonormality defect of the nonzero generator fibers.
double parseval_defect(const SpectralDataset& generators);

}  // namespace sisapprox
