#include "sisapprox/extra_invariance.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "sisapprox/error.hpp"
#include "sisapprox/fiber_ops.hpp"
#include "sisapprox/parallel.hpp"

namespace sisapprox {

namespace {

constexpr double kCutoffTolerance = 1e-8;

void check_dims(const SpectralGrid& grid, const DualLattice& lattice) {
    if (grid.dim() != lattice.dim()) {
        throw InputError("lattice dimension " + std::to_string(lattice.dim()) +
                         " does not match data dimension " + std::to_string(grid.dim()));
    }
}

std::vector<std::vector<std::uint8_t>> coset_masks(const std::vector<std::size_t>& labels, std::size_t kappa) {
    std::vector<std::vector<std::uint8_t>> masks(kappa, std::vector<std::uint8_t>(labels.size(), 0));
    for (std::size_t k = 0; k < labels.size(); ++k) masks[labels[k]][k] = 1;
    return masks;
}

std::vector<BlockEigenRecord> records_at(const SpectralDataset& ds,
                                         const std::vector<std::vector<std::uint8_t>>& masks, std::size_t g,
                                         const FitOptions& options) {
    const std::size_t m = ds.num_functions();
    std::vector<BlockEigenRecord> records;
    records.reserve(masks.size() * m);
    for (std::size_t sigma = 0; sigma < masks.size(); ++sigma) {
        EigenSystem eig = eig_hermitian(gramian(ds, g, masks[sigma]), options.eig_tol);
        for (std::size_t j = 0; j < m; ++j) {
            const auto ji = static_cast<Eigen::Index>(j);
            records.push_back({g, PartitionLabel{sigma}, j, std::max(eig.eigenvalues(ji), 0.0),
                               eig.eigenvectors.col(ji)});
        }
    }
    // Records arrive ordered by (block, rank), so a stable sort on the
    // eigenvalue alone realizes the full tie-break.
    std::stable_sort(records.begin(), records.end(),
                     [](const BlockEigenRecord& a, const BlockEigenRecord& b) { return a.eigenvalue > b.eigenvalue; });
    return records;
}

double unselected_sum(const std::vector<BlockEigenRecord>& records, std::size_t rank) {
    double sum = 0.0;
    for (std::size_t i = rank; i < records.size(); ++i) sum += records[i].eigenvalue;
    return sum;
}

void check_dataset(const SpectralDataset& ds) {
    if (ds.num_functions() == 0 || static_cast<Eigen::Index>(ds.num_functions()) > HermitianMatrix::kMaxOrder) {
        throw InputError("fitting needs between 1 and 256 functions");
    }
}

}  // namespace

std::vector<std::size_t> coset_labels(const SpectralGrid& grid, const DualLattice& lattice) {
    check_dims(grid, lattice);
    std::vector<std::size_t> labels(grid.num_translations());
    for (std::size_t k = 0; k < labels.size(); ++k) labels[k] = lattice.coset_of(grid.translation(k)).index;
    return labels;
}

std::vector<SpectralDataset> split_by_coset(const SpectralDataset& ds, const DualLattice& lattice) {
    const auto labels = coset_labels(ds.grid(), lattice);
    const std::size_t nk = labels.size();
    std::vector<SpectralDataset> out;
    out.reserve(static_cast<std::size_t>(lattice.index()));
    for (std::size_t sigma = 0; sigma < static_cast<std::size_t>(lattice.index()); ++sigma) {
        std::vector<Complex> samples(ds.samples().size());
        for (std::size_t i = 0; i < samples.size(); ++i) {
            if (labels[i % nk] == sigma) samples[i] = ds.samples()[i];
        }
        out.emplace_back(ds.grid(), ds.num_functions(), std::move(samples));
    }
    return out;
}

std::vector<BlockEigenRecord> block_records(const SpectralDataset& ds, const DualLattice& lattice, std::size_t g,
                                            const FitOptions& options) {
    check_dataset(ds);
    if (g >= ds.grid().num_cells()) throw InputError("cell index out of range");
    const auto masks = coset_masks(coset_labels(ds.grid(), lattice), static_cast<std::size_t>(lattice.index()));
    return records_at(ds, masks, g, options);
}

ExtraInvariantModel fit_extra_invariant(const SpectralDataset& ds, const DualLattice& lattice, std::size_t rank,
                                        const FitOptions& options) {
    if (rank < 1) throw InputError("rank must be at least 1");
    check_dataset(ds);
    const auto& grid = ds.grid();
    const auto labels = coset_labels(grid, lattice);
    const std::size_t kappa = static_cast<std::size_t>(lattice.index());
    const auto masks = coset_masks(labels, kappa);
    const std::size_t m = ds.num_functions();
    const std::size_t cells = grid.num_cells();
    const std::size_t nk = grid.num_translations();
    const std::size_t total = m * kappa;

    ExtraInvariantModel model{FittedModel{grid,
                                          rank,
                                          std::vector<double>(cells * rank, 0.0),
                                          SpectralDataset::zeros(grid, rank),
                                          std::vector<double>(cells, 0.0),
                                          0.0,
                                          0,
                                          std::vector<double>(cells * total, 0.0),
                                          total},
                              lattice,
                              std::vector<std::int64_t>(cells * rank, ExtraInvariantModel::kNoCoset),
                              std::vector<std::int64_t>(cells * rank, ExtraInvariantModel::kNoCoset)};
    std::vector<std::size_t> nonzero(cells, 0);

    parallel_for(cells, options.threads, [&](std::size_t g) {
        const auto records = records_at(ds, masks, g, options);
        const double cut = options.rank_rel_tol * records.front().eigenvalue;
        for (std::size_t i = 0; i < total; ++i) model.eigenvalue_curves[g * total + i] = records[i].eigenvalue;

        for (std::size_t s = 0; s < std::min(rank, total); ++s) {
            const auto& rec = records[s];
            model.selected_eigenvalues[g * rank + s] = rec.eigenvalue;
            model.home_coset[g * rank + s] = static_cast<std::int64_t>(rec.block.index);
            model.block_rank[g * rank + s] = static_cast<std::int64_t>(rec.rank_in_block);
            if (!(rec.eigenvalue > cut)) continue;
            ++nonzero[g];
            const double theta = 1.0 / std::sqrt(rec.eigenvalue);
            const auto& mask = masks[rec.block.index];
            auto out = model.generators.fiber_view(s, g);
            for (std::size_t j = 0; j < m; ++j) {
                const Complex w = theta * std::conj(rec.eigenvector(static_cast<Eigen::Index>(j)));
                const auto f = ds.fiber_view(j, g);
                for (std::size_t k = 0; k < nk; ++k) {
                    if (mask[k]) out[k] += w * f[k];
                }
            }
        }
        model.residuals[g] = unselected_sum(records, rank);
    });

    double sum = 0.0;
    for (const double r : model.residuals) sum += r;
    model.error = sum * grid.cell_volume();
    model.effective_length = *std::max_element(nonzero.begin(), nonzero.end());
    return model;
}

double error_extra(const SpectralDataset& ds, const DualLattice& lattice, std::size_t rank,
                   const FitOptions& options) {
    check_dataset(ds);
    const auto masks = coset_masks(coset_labels(ds.grid(), lattice), static_cast<std::size_t>(lattice.index()));
    std::vector<double> residuals(ds.grid().num_cells(), 0.0);
    parallel_for(residuals.size(), options.threads,
                 [&](std::size_t g) { residuals[g] = unselected_sum(records_at(ds, masks, g, options), rank); });
    double sum = 0.0;
    for (const double r : residuals) sum += r;
    return sum * ds.grid().cell_volume();
}

namespace {

CheckResult cutoff_check(const SpectralDataset& generators, const std::vector<std::size_t>& labels,
                         std::size_t kappa) {
    const auto& grid = generators.grid();
    const std::size_t nk = labels.size();
    std::size_t mixed = 0;
    for (std::size_t g = 0; g < grid.num_cells(); ++g) {
        const ComplexMatrix rows = fiber_matrix(generators, g);
        const ComplexMatrix p = span_projector(rows);
        for (Eigen::Index s = 0; s < rows.rows(); ++s) {
            const double norm = rows.row(s).norm();
            if (norm == 0.0) continue;
            std::set<std::size_t> support;
            for (std::size_t k = 0; k < nk; ++k) {
                if (rows(s, static_cast<Eigen::Index>(k)) != Complex(0.0)) support.insert(labels[k]);
            }
            if (support.size() > 1) ++mixed;
            for (std::size_t sigma = 0; sigma < kappa; ++sigma) {
                ComplexVector cut = ComplexVector::Zero(static_cast<Eigen::Index>(nk));
                for (std::size_t k = 0; k < nk; ++k) {
                    if (labels[k] == sigma) cut(static_cast<Eigen::Index>(k)) = rows(s, static_cast<Eigen::Index>(k));
                }
                const double miss = (cut - p * cut).norm();
                if (miss > kCutoffTolerance * norm) {
                    std::ostringstream msg;
                    msg << "cell " << g << ", generator " << s << ", coset " << sigma
                        << ": cut-off leaves the generator span (relative residual " << miss / norm << ")";
                    return {"coset_cutoffs_in_span", false, msg.str()};
                }
            }
        }
    }
    return {"coset_cutoffs_in_span", true,
            mixed == 0 ? "every generator fiber lies in one coset"
                       : std::to_string(mixed) + " generator fibers span several cosets, cut-offs stay in span"};
}

}  // namespace

VerificationReport verify_extra_invariance(const SpectralDataset& generators, const DualLattice& lattice) {
    const auto labels = coset_labels(generators.grid(), lattice);
    VerificationReport report;
    report.checks.push_back(cutoff_check(generators, labels, static_cast<std::size_t>(lattice.index())));
    return report;
}

VerificationReport verify_extra_invariance(const ExtraInvariantModel& model, const DualLattice& lattice) {
    const auto& grid = model.generators.grid();
    const std::size_t rank = model.generators.num_functions();
    if (!(grid == model.grid) || rank != model.rank || model.home_coset.size() != grid.num_cells() * rank) {
        throw InputError("extra-invariant model shapes are inconsistent");
    }
    const auto labels = coset_labels(grid, lattice);
    const auto kappa = static_cast<std::int64_t>(lattice.index());
    VerificationReport report;

    std::string violation;
    for (std::size_t g = 0; g < grid.num_cells() && violation.empty(); ++g) {
        for (std::size_t s = 0; s < rank && violation.empty(); ++s) {
            const std::int64_t home = model.home_at(g, s);
            if (home < ExtraInvariantModel::kNoCoset || home >= kappa) {
                violation = "cell " + std::to_string(g) + ", generator " + std::to_string(s) +
                            ": home coset label " + std::to_string(home) + " out of range";
                break;
            }
            const auto f = model.generators.fiber_view(s, g);
            for (std::size_t k = 0; k < f.size(); ++k) {
                if (f[k] != Complex(0.0) && static_cast<std::int64_t>(labels[k]) != home) {
                    violation = "cell " + std::to_string(g) + ", generator " + std::to_string(s) +
                                ": nonzero at translation index " + std::to_string(k) + " in coset " +
                                std::to_string(labels[k]) + ", home coset " + std::to_string(home);
                    break;
                }
            }
        }
    }
    report.add("single_coset_support", violation.empty(), violation);
    report.checks.push_back(cutoff_check(model.generators, labels, static_cast<std::size_t>(kappa)));
    return report;
}

}  // namespace sisapprox
