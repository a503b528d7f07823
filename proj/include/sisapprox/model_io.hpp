#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "sisapprox/discrete.hpp"
#include "sisapprox/extra_invariance.hpp"
#include "sisapprox/paley_wiener.hpp"
#include "sisapprox/sis.hpp"

namespace sisapprox {

// A model directory holds model.txt (key: value) plus the tables it names:
//   generators.manifest + payload   generator spectra, dataset layout [s][g][k]
//   residuals.csv                   g,residual
//   curves.csv                      g,omega_1..omega_d,value_1..value_n
//   home_coset.csv                  g,s,label,rank            (extra)
//   chosen.csv                      g,k_1,...,k_l             (pw)
//   generators.txt, eigenvalues.csv, partition.txt            (discrete)

inline constexpr const char* kModelFormat = "sisapprox-model-1";

/// Value of the "regime" field of <dir>/model.txt: sis, extra, pw or discrete.
std::string read_model_regime(const std::filesystem::path& dir);

void write_model(const FittedModel& model, const std::filesystem::path& dir);
void write_model(const ExtraInvariantModel& model, const std::filesystem::path& dir);
/// Also writes the layer generators from decompose_layers.
void write_model(const MultiTileModel& model, const std::filesystem::path& dir);
void write_model(const DiscreteModel& model, const DiscretePartition& partition, const std::filesystem::path& dir);

FittedModel read_sis_model(const std::filesystem::path& dir);
ExtraInvariantModel read_extra_model(const std::filesystem::path& dir);

struct StoredMultiTile {
    MultiTileModel model;
    SpectralDataset generators;
};
StoredMultiTile read_multitile_model(const std::filesystem::path& dir);

struct StoredDiscrete {
    DiscreteModel model;
    DiscretePartition partition;
};
StoredDiscrete read_discrete_model(const std::filesystem::path& dir);

/// Per-cell curves with the cell center coordinates leading each row.
void write_curves_csv(const SpectralGrid& grid, const std::vector<double>& values, std::size_t per_cell,
                      const std::string& column_prefix, const std::filesystem::path& path);
/// Returns the values block of a curves table, row-major [g][i].
std::vector<double> read_curves_csv(const SpectralGrid& grid, const std::filesystem::path& path,
                                    std::size_t& per_cell);

void write_residuals_csv(const std::vector<double>& residuals, const std::filesystem::path& path);
std::vector<double> read_residuals_csv(const std::filesystem::path& path, std::size_t expected_cells);

std::string format_partition(const DiscretePartition& partition);

/// Comma-separated fields of every data row; blank lines, '#' comments and
/// rows starting with a letter (headers) are skipped.
std::vector<std::vector<std::string>> read_csv_rows(const std::filesystem::path& path);

}  // namespace sisapprox
