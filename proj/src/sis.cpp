#include "sisapprox/sis.hpp"

#include <algorithm>
#include <cmath>

#include "sisapprox/error.hpp"
#include "sisapprox/fiber_ops.hpp"
#include "sisapprox/parallel.hpp"

namespace sisapprox {

namespace {

void check_dataset(const SpectralDataset& ds) {
    if (ds.num_functions() == 0 || static_cast<Eigen::Index>(ds.num_functions()) > HermitianMatrix::kMaxOrder) {
        throw InputError("fitting needs between 1 and 256 functions");
    }
}

double tail_sum(const RealVector& eigenvalues, std::size_t rank) {
    double sum = 0.0;
    for (Eigen::Index i = static_cast<Eigen::Index>(rank); i < eigenvalues.size(); ++i) sum += eigenvalues(i);
    return sum;
}

double quadrature(const std::vector<double>& per_cell, double cell_volume) {
    double sum = 0.0;
    for (const double r : per_cell) sum += r;
    return sum * cell_volume;
}

}  // namespace

FittedModel fit_sis(const SpectralDataset& ds, std::size_t rank, const FitOptions& options) {
    if (rank < 1) throw InputError("rank must be at least 1");
    check_dataset(ds);
    const auto& grid = ds.grid();
    const std::size_t m = ds.num_functions();
    const std::size_t cells = grid.num_cells();
    const std::size_t nk = grid.num_translations();

    FittedModel model{grid,
                      rank,
                      std::vector<double>(cells * rank, 0.0),
                      SpectralDataset::zeros(grid, rank),
                      std::vector<double>(cells, 0.0),
                      0.0,
                      0,
                      std::vector<double>(cells * m, 0.0),
                      m};
    std::vector<std::size_t> nonzero(cells, 0);

    parallel_for(cells, options.threads, [&](std::size_t g) {
        const EigenSystem eig = eig_hermitian(gramian(ds, g), options.eig_tol);
        const double cut = options.rank_rel_tol * std::max(eig.eigenvalues(0), 0.0);
        for (std::size_t i = 0; i < m; ++i) model.eigenvalue_curves[g * m + i] = eig.eigenvalues(static_cast<Eigen::Index>(i));

        for (std::size_t s = 0; s < std::min(rank, m); ++s) {
            const auto si = static_cast<Eigen::Index>(s);
            const double lambda = eig.eigenvalues(si);
            model.selected_eigenvalues[g * rank + s] = lambda;
            if (!(lambda > cut)) continue;
            ++nonzero[g];
            // phi_s = lambda^{-1/2} sum_j conj(u_j) f_j: the left eigenvector
            // of G is the conjugate of the right one.
            const double theta = 1.0 / std::sqrt(lambda);
            auto out = model.generators.fiber_view(s, g);
            for (std::size_t j = 0; j < m; ++j) {
                const Complex w = theta * std::conj(eig.eigenvectors(static_cast<Eigen::Index>(j), si));
                const auto f = ds.fiber_view(j, g);
                for (std::size_t k = 0; k < nk; ++k) out[k] += w * f[k];
            }
        }
        model.residuals[g] = tail_sum(eig.eigenvalues, rank);
    });

    model.error = quadrature(model.residuals, grid.cell_volume());
    model.effective_length = *std::max_element(nonzero.begin(), nonzero.end());
    return model;
}

double error_sis(const SpectralDataset& ds, std::size_t rank, const FitOptions& options) {
    check_dataset(ds);
    std::vector<double> residuals(ds.grid().num_cells(), 0.0);
    parallel_for(residuals.size(), options.threads, [&](std::size_t g) {
        residuals[g] = tail_sum(eig_hermitian(gramian(ds, g), options.eig_tol).eigenvalues, rank);
    });
    return quadrature(residuals, ds.grid().cell_volume());
}

Projection project_onto(const SpectralDataset& generators, const SpectralDataset& ds, unsigned threads) {
    if (!(generators.grid() == ds.grid())) throw InputError("model and dataset grids differ");
    const auto& grid = ds.grid();
    const std::size_t m = ds.num_functions();
    const std::size_t cells = grid.num_cells();
    Projection out{SpectralDataset::zeros(grid, m), std::vector<double>(m, 0.0)};
    std::vector<double> per_cell(m * cells, 0.0);

    parallel_for(cells, threads, [&](std::size_t g) {
        const ComplexMatrix p = span_projector(fiber_matrix(generators, g));
        for (std::size_t j = 0; j < m; ++j) {
            const ComplexVector f = fiber(ds, g, j);
            const ComplexVector pf = p * f;
            auto dst = out.projected.fiber_view(j, g);
            for (std::size_t k = 0; k < dst.size(); ++k) dst[k] = pf(static_cast<Eigen::Index>(k));
            per_cell[j * cells + g] = (f - pf).squaredNorm();
        }
    });
    for (std::size_t j = 0; j < m; ++j) {
        double sum = 0.0;
        for (std::size_t g = 0; g < cells; ++g) sum += per_cell[j * cells + g];
        out.residuals[j] = sum * grid.cell_volume();
    }
    return out;
}

Projection project_onto(const FittedModel& model, const SpectralDataset& ds, unsigned threads) {
    return project_onto(model.generators, ds, threads);
}

double parseval_defect(const SpectralDataset& generators) {
    double worst = 0.0;
    for (std::size_t g = 0; g < generators.grid().num_cells(); ++g) {
        worst = std::max(worst, orthonormality_defect(fiber_matrix(generators, g)));
    }
    return worst;
}

}  // namespace sisapprox
