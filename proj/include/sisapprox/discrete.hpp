#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sisapprox/hermitian.hpp"
#include "sisapprox/lattice.hpp"
#include "sisapprox/verification.hpp"

namespace sisapprox {

struct SequenceEntry {
    IntPoint position;
    Complex value;
};

/// m finitely supported sequences in l2(Z^d).
class DiscreteDataset {
public:
    DiscreteDataset(int dim, std::vector<std::vector<SequenceEntry>> sequences);

    int dim() const { return dim_; }
    std::size_t num_sequences() const { return sequences_.size(); }
    const std::vector<SequenceEntry>& sequence(std::size_t j) const { return sequences_.at(j); }

    /// Sorted union of all positions.
    const std::vector<IntPoint>& support() const { return support_; }
    /// Componentwise bounds of the support (empty when there is no support).
    const IntPoint& support_min() const { return support_min_; }
    const IntPoint& support_max() const { return support_max_; }

    /// Dense m x |support| matrix, columns in support order.
    ComplexMatrix dense() const;

    double total_energy() const;

private:
    int dim_;
    std::vector<std::vector<SequenceEntry>> sequences_;
    std::vector<IntPoint> support_;
    IntPoint support_min_;
    IntPoint support_max_;
};

/// A finite partition of Z^d, either induced by the cosets of a dual lattice
/// or given as an explicit position -> label map over the data support.
class DiscretePartition {
public:
    static DiscretePartition from_lattice(const DualLattice& lattice);
    static DiscretePartition from_map(int dim, std::map<IntPoint, std::int64_t> labels);

    int dim() const { return dim_; }
    std::size_t num_labels() const { return labels_.size(); }
    /// Label values in ascending order; this order breaks eigenvalue ties.
    const std::vector<std::int64_t>& labels() const { return labels_; }
    std::size_t index_of_label(std::int64_t label) const;
    /// Position in labels() of the class containing `position`.
    std::size_t class_of(const IntPoint& position) const;

    const std::optional<DualLattice>& lattice() const { return lattice_; }
    const std::map<IntPoint, std::int64_t>& explicit_map() const { return map_; }

private:
    int dim_ = 0;
    std::vector<std::int64_t> labels_;
    std::optional<DualLattice> lattice_;
    std::map<IntPoint, std::int64_t> map_;
};

struct SelectedEigenvalue {
    double value = 0.0;
    std::int64_t label = 0;
    std::size_t rank_in_block = 0;
};

struct DiscreteModel {
    int dim = 0;
    std::size_t rank = 0;
    /// q_1..q_rank, nonzero entries only, sorted by position; zero for padding and
    /// for eigenvalues at or below 1e-10 of the largest.
    std::vector<std::vector<SequenceEntry>> generators;
    /// The kappa * m eigenvalues in selection order; the first min(rank, kappa*m) are selected.
    std::vector<SelectedEigenvalue> eigenvalues;
    std::size_t num_selected = 0;
    double error = 0.0;
};

HermitianMatrix block_gramian(const DiscreteDataset& data, const DiscretePartition& partition, std::int64_t label);

DiscreteModel fit_discrete(const DiscreteDataset& data, const DiscretePartition& partition, std::size_t rank,
                           double eig_tol = 1e-12);

/// Sum of the unselected block eigenvalues; rank 0 gives the total energy.
double error_discrete(const DiscreteDataset& data, const DiscretePartition& partition, std::size_t rank,
                      double eig_tol = 1e-12);

struct AllocationResult {
    double error = 0.0;
    /// alpha_sigma per label, in labels() order; preference among ties goes
    /// to the lexicographically largest allocation.
    std::vector<std::size_t> allocation;
    std::vector<std::vector<std::size_t>> minimizers;
    std::size_t allocations_examined = 0;
};

/// Minimizes E(alpha) = sum_sigma sum_{s > alpha_sigma} lambda_s^sigma over
/// all alpha with 0 <= alpha_sigma <= rank and sum alpha_sigma <= rank.
AllocationResult brute_force_optimal(const DiscreteDataset& data, const DiscretePartition& partition,
                                     std::size_t rank, double eig_tol = 1e-12);

/// Number of allocations brute_force_optimal would enumerate, saturating at
/// max + 1.
std::size_t allocation_count(std::size_t num_labels, std::size_t rank, std::size_t max = 1'000'000);

/// sum_j |a_j - P a_j|^2 with P the projector onto span{q_s}.
double projection_residual(const DiscreteDataset& data, const DiscreteModel& model);

/// Orthonormality, single-class support and residual identity.
VerificationReport verify_discrete(const DiscreteDataset& data, const DiscretePartition& partition,
                                   const DiscreteModel& model);

// File formats: one "j, position..., re, im" line per entry; partition is
// either "lattice: <matrix>" or "position..., label" lines.
DiscreteDataset read_discrete_dataset(const std::filesystem::path& path);
void write_discrete_dataset(const DiscreteDataset& data, const std::filesystem::path& path);
DiscretePartition parse_partition(const std::string& text, int dim);
DiscretePartition read_partition(const std::filesystem::path& path, int dim);

}  // namespace sisapprox
