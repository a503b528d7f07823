#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "sisapprox/lattice.hpp"
#include "sisapprox/sis.hpp"
#include "sisapprox/verification.hpp"

namespace sisapprox {

/// One eigenpair of the Gramian of the sigma-masked data at a cell.
struct BlockEigenRecord {
    std::size_t cell = 0;
    PartitionLabel block;
    std::size_t rank_in_block = 0;  // 0-based position in the block's descending list
    double eigenvalue = 0.0;
    ComplexVector eigenvector;
};

/// Optimal M-invariant SIS of length at most `rank`.
struct ExtraInvariantModel : FittedModel {
    static constexpr std::int64_t kNoCoset = -1;

    DualLattice lattice;
    /// [g][s]: coset label supporting generator s, or kNoCoset for padding
    /// generators beyond m * kappa.
    std::vector<std::int64_t> home_coset;
    /// [g][s]: 0-based within-block rank of the selected record.
    std::vector<std::int64_t> block_rank;

    std::int64_t home_at(std::size_t g, std::size_t s) const { return home_coset[g * rank + s]; }
};

/// Per-translation coset labels over the grid's translation set.
std::vector<std::size_t> coset_labels(const SpectralGrid& grid, const DualLattice& lattice);

/// kappa copies of the data, copy sigma keeping only translations k with
/// k - sigma in M*.
std::vector<SpectralDataset> split_by_coset(const SpectralDataset& ds, const DualLattice& lattice);

/// All kappa * m block eigen-records at cell g, in selection order:
/// eigenvalue descending, then block label, then within-block rank.
std::vector<BlockEigenRecord> block_records(const SpectralDataset& ds, const DualLattice& lattice,
                                            std::size_t g, const FitOptions& options = {});

ExtraInvariantModel fit_extra_invariant(const SpectralDataset& ds, const DualLattice& lattice,
                                        std::size_t rank, const FitOptions& options = {});

/// Sum of the unselected block eigenvalues integrated over the grid; rank 0
/// gives the total energy.
double error_extra(const SpectralDataset& ds, const DualLattice& lattice, std::size_t rank,
                   const FitOptions& options = {});

/// Checks a fitted model: each generator fiber vanishes exactly off its home
/// coset, and every coset cut-off of every generator lies in the span of the
/// generator fibers (relative residual 1e-8).
VerificationReport verify_extra_invariance(const ExtraInvariantModel& model, const DualLattice& lattice);

/// Checks arbitrary generators for M-invariance through the coset cut-off
/// criterion only.
VerificationReport verify_extra_invariance(const SpectralDataset& generators, const DualLattice& lattice);

}  // namespace sisapprox
