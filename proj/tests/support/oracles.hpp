#pragma once

// Independent reference computations for the test suites. Nothing here calls
// the eigensolver or the fitting code.

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "sisapprox/discrete.hpp"
#include "sisapprox/lattice.hpp"
#include "sisapprox/spectral_data.hpp"

namespace oracle {

using sisapprox::Complex;
using sisapprox::ComplexMatrix;
using sisapprox::IntMatrix;
using sisapprox::IntPoint;

using Rng = std::mt19937_64;

/// Eigenvalues of a 2x2 or 3x3 Hermitian matrix from its characteristic
/// polynomial (closed form / trigonometric solution), descending.
std::vector<double> charpoly_eigenvalues(const ComplexMatrix& a);

ComplexMatrix random_hermitian(Rng& rng, int n);

/// Independent normal complex samples; with probability `dependent` each
/// function is replaced by a multiple of the first one, to exercise
/// rank-deficient Gramians.
sisapprox::SpectralDataset random_dataset(Rng& rng, int dim, int cells, int trunc, std::size_t m,
                                          double dependent = 0.0);

/// Double-loop Gramian at cell g over the translations with mask[k] != 0
/// (all when the mask is empty).
ComplexMatrix naive_gramian(const sisapprox::SpectralDataset& ds, std::size_t g,
                            const std::vector<std::uint8_t>& mask = {});

/// Determinant by cofactor expansion.
std::int64_t laplace_determinant(const IntMatrix& m);

/// Whether v lies in the column lattice of b, via the adjugate.
bool in_lattice(const IntMatrix& b, const IntPoint& v);

/// Index i of the section point with k - section[i] in the lattice, found by
/// scanning the whole section.
std::size_t scan_coset(const IntMatrix& basis, const std::vector<IntPoint>& section, const IntPoint& k);

/// All l-subsets of {0..n-1} maximizing the weight sum (exact ties kept, as
/// well as sums within 1e-14 relative of the best).
std::vector<std::vector<std::size_t>> best_subsets(const std::vector<double>& weights, std::size_t l);

/// min over allocations alpha (sum <= l) of sum_b sum_{s >= alpha_b} lambda_b[s],
/// each block descending.
double best_allocation_tail(const std::vector<std::vector<double>>& blocks, std::size_t l);

/// f^ = indicator of [-1, 1) sampled on d = 1, G = 8, N_tr = 1.
sisapprox::SpectralDataset indicator_fixture();

/// Random finitely supported sequences on [0, support).
sisapprox::DiscreteDataset random_sequences(Rng& rng, std::size_t m, int support);

/// Random explicit partition of {0..support-1} into kappa labels (every label used
/// when support >= kappa).
sisapprox::DiscretePartition random_partition(Rng& rng, int support, std::size_t kappa);

/// Scratch directory removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag);
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

/// Runs the command-line front end in-process.
struct CliResult {
    int code = 0;
    std::string out;
    std::string err;
};
CliResult run(const std::vector<std::string>& args);

/// File contents without lines starting with `skip_prefix`.
std::string read_without(const std::filesystem::path& path, const std::string& skip_prefix);

}  // namespace oracle
