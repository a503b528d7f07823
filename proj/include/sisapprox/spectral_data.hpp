#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sisapprox/hermitian.hpp"
#include "sisapprox/lattice.hpp"

namespace sisapprox {

/// Uniform midpoint grid over U = [-1/2, 1/2)^d together with the truncated
/// translation set K = { k in Z^d : |k|_inf <= trunc_radius }, sorted
/// lexicographically.
class SpectralGrid {
public:
    SpectralGrid(int dim, int cells_per_dim, int trunc_radius);

    int dim() const { return dim_; }
    int cells_per_dim() const { return cells_per_dim_; }
    int trunc_radius() const { return trunc_radius_; }

    std::size_t num_cells() const { return num_cells_; }
    std::size_t num_translations() const { return translations_.size(); }
    double cell_volume() const { return cell_volume_; }

    /// Grid coordinates of flattened cell g (first coordinate most significant).
    std::vector<int> cell_coordinates(std::size_t g) const;
    std::vector<double> cell_center(std::size_t g) const;

    const std::vector<IntPoint>& translations() const { return translations_; }
    const IntPoint& translation(std::size_t idx) const { return translations_[idx]; }
    std::optional<std::size_t> translation_index(std::span<const std::int64_t> k) const;

    bool operator==(const SpectralGrid& other) const {
        return dim_ == other.dim_ && cells_per_dim_ == other.cells_per_dim_ &&
               trunc_radius_ == other.trunc_radius_;
    }

private:
    int dim_;
    int cells_per_dim_;
    int trunc_radius_;
    std::size_t num_cells_;
    double cell_volume_;
    std::vector<IntPoint> translations_;
};

/// Samples f_j^(omega_g + k) for m functions, stored [j][g][k] row-major.
class SpectralDataset {
public:
    /// Validates shape and finiteness; rejects with the first offending (j,g,k).
    SpectralDataset(SpectralGrid grid, std::size_t num_functions, std::vector<Complex> samples);

    static SpectralDataset zeros(const SpectralGrid& grid, std::size_t num_functions);

    const SpectralGrid& grid() const { return grid_; }
    std::size_t num_functions() const { return num_functions_; }
    const std::vector<Complex>& samples() const { return samples_; }

    std::size_t offset(std::size_t j, std::size_t g) const {
        return (j * grid_.num_cells() + g) * grid_.num_translations();
    }
    const Complex& at(std::size_t j, std::size_t g, std::size_t k) const {
        return samples_[offset(j, g) + k];
    }
    Complex& at(std::size_t j, std::size_t g, std::size_t k) { return samples_[offset(j, g) + k]; }

    std::span<const Complex> fiber_view(std::size_t j, std::size_t g) const {
        return {samples_.data() + offset(j, g), grid_.num_translations()};
    }
    std::span<Complex> fiber_view(std::size_t j, std::size_t g) {
        return {samples_.data() + offset(j, g), grid_.num_translations()};
    }

    SpectralDataset scaled(double factor) const;

private:
    SpectralGrid grid_;
    std::size_t num_functions_;
    std::vector<Complex> samples_;
};

/// Translation-index mask: entry k nonzero keeps translation k. Empty keeps all.
using TranslationMask = std::span<const std::uint8_t>;

/// The fiber tau f_j(omega_g), indexed over K.
ComplexVector fiber(const SpectralDataset& ds, std::size_t g, std::size_t j);

/// [G]_{ij} = sum_{k in K (and mask)} f_i^(omega_g+k) conj(f_j^(omega_g+k)).
HermitianMatrix gramian(const SpectralDataset& ds, std::size_t g, TranslationMask mask = {});

/// Per-function quadrature energy sum_g |tau f_j(omega_g)|^2 * cell volume.
RealVector energy_report(const SpectralDataset& ds);

/// Energy carried by the outermost translation shell |k|_inf = trunc_radius,
/// summed over functions; a truncation diagnostic.
double truncation_shell_energy(const SpectralDataset& ds);

// ---------------------------------------------------------------- synthesis

enum class Family { Gaussian, BSpline, Boxcar };

Family parse_family(const std::string& name);
std::string family_name(Family family);

/// Closed-form Fourier transform of one family member at a frequency point.
///   gaussian(s): exp(-pi s^2 |xi|^2)
///   bspline(n):  prod_c sinc(xi_c)^(n+1)
///   boxcar(a):   prod_c sin(2 pi a xi_c) / (pi xi_c)
double evaluate_family(Family family, double param, std::span<const double> xi);

/// One function per entry of `params`.
SpectralDataset synthesize(Family family, std::span<const double> params, const SpectralGrid& grid);
SpectralDataset synthesize(const std::string& family, std::span<const double> params,
                           const SpectralGrid& grid);

// ----------------------------------------------------------------- file io

enum class PayloadFormat { BinaryC64LE, Csv };

PayloadFormat parse_payload_format(const std::string& name);
std::string payload_format_name(PayloadFormat format);

/// Reads a manifest (key: value lines with dim, m, cells_per_dim,
/// trunc_radius, payload_path, payload_format) and its payload. A relative
/// payload path is resolved against the manifest's directory.
SpectralDataset ingest(const std::filesystem::path& manifest);

/// Writes <dir>/<stem>.manifest and its payload; returns the manifest path.
std::filesystem::path write_dataset(const SpectralDataset& ds, const std::filesystem::path& dir,
                                    const std::string& stem = "dataset",
                                    PayloadFormat format = PayloadFormat::BinaryC64LE);

std::string encode_c64le(std::span<const Complex> values);
std::vector<Complex> decode_c64le(const std::string& bytes);

}  // namespace sisapprox
