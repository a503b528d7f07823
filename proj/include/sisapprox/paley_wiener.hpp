#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sisapprox/sis.hpp"
#include "sisapprox/verification.hpp"

namespace sisapprox {

/// Optimal translation-invariant space V_Omega with Omega an ell multi-tile
/// inside C_N = [-(N+1/2), N+1/2]^d, represented cell by cell: at cell g,
/// Omega contains omega_g + k for exactly the chosen translations k.
struct MultiTileModel {
    SpectralGrid grid;
    std::size_t rank = 0;
    int box_radius = 0;
    /// Per cell, the chosen translations sorted lexicographically.
    std::vector<std::vector<IntPoint>> chosen;
    /// Per cell, weight of the in-box translations left out.
    std::vector<double> residuals;
    /// Quadrature of `residuals`.
    double error = 0.0;
    /// In-grid energy at translations outside the box.
    double out_of_box_energy = 0.0;
    /// Per cell, the in-box weights in selection order.
    std::vector<double> weight_curves;
    std::size_t curves_per_cell = 0;

    double total_error() const { return error + out_of_box_energy; }
};

/// One fundamental tile of the decomposition: a single translation per cell.
struct TileLayer {
    std::size_t index = 0;
    std::vector<IntPoint> translation;  // per cell
};

struct LayerDecomposition {
    std::vector<TileLayer> layers;
    /// Indicator spectra of the layers, [s][g][k].
    SpectralDataset generators;
};

/// sum_j |f_j^(omega_g + k)|^2 for k in the grid's translation set.
double weight(const SpectralDataset& ds, std::size_t g, std::span<const std::int64_t> k);

MultiTileModel fit_multitile(const SpectralDataset& ds, std::size_t rank, int box_radius,
                             const FitOptions& options = {});

LayerDecomposition decompose_layers(const MultiTileModel& model);

VerificationReport verify_multitile(const MultiTileModel& model);

/// Total error (in-box residual plus out-of-box energy) per box radius.
std::vector<double> error_multitile_series(const SpectralDataset& ds, std::size_t rank,
                                           std::span<const int> box_radii, const FitOptions& options = {});

}  // namespace sisapprox
