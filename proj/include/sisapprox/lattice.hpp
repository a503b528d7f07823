#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace sisapprox {

using IntMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;
using IntPoint = std::vector<std::int64_t>;

/// Index of a coset sigma + M* inside a lattice's section.
struct PartitionLabel {
    std::size_t index = 0;
    friend auto operator<=>(const PartitionLabel&, const PartitionLabel&) = default;
};

struct Rational {
    std::int64_t num = 0;
    std::int64_t den = 1;  // always > 0, gcd(num, den) == 1

    static Rational make(std::int64_t num, std::int64_t den);
    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
    std::string to_string() const;
    friend bool operator==(const Rational&, const Rational&) = default;
};

/// A full-rank sublattice M* of Z^d, given by a basis whose columns generate
/// it, together with the lexicographically sorted coset section of Z^d / M*.
///
/// The primal group M = (M*)* then contains Z^d, and the cosets sigma + M*
/// partition the translation indices of every fiber.
class DualLattice {
public:
    static constexpr std::int64_t kMaxIndex = 1'000'000;

    explicit DualLattice(const IntMatrix& basis);

    int dim() const { return static_cast<int>(basis_.rows()); }
    const IntMatrix& basis() const { return basis_; }
    /// Lower-triangular column Hermite normal form of the basis.
    const IntMatrix& hermite_form() const { return hermite_; }
    std::int64_t index() const { return index_; }
    const std::vector<IntPoint>& section() const { return section_; }

    PartitionLabel coset_of(std::span<const std::int64_t> k) const;

    /// Row-major d x d rational matrix whose columns generate M = B^{-T} Z^d.
    std::vector<Rational> primal_description() const;

    bool operator==(const DualLattice& other) const { return basis_ == other.basis_; }

private:
    IntMatrix basis_;
    IntMatrix hermite_;
    std::int64_t index_ = 0;
    std::vector<IntPoint> section_;
};

DualLattice make_dual_lattice(const IntMatrix& basis);

/// Accepts real entries and rejects any that are not integers.
DualLattice make_dual_lattice(const Eigen::MatrixXd& basis);

/// Parses "2 0;0 1" (rows separated by ';', entries by whitespace or ',').
IntMatrix parse_integer_matrix(const std::string& text);
std::string format_integer_matrix(const IntMatrix& m);

/// Exact determinant by fraction-free elimination.
std::int64_t integer_determinant(const IntMatrix& m);

}  // namespace sisapprox
