#include "sisapprox/paley_wiener.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>

#include "sisapprox/error.hpp"
#include "sisapprox/fiber_ops.hpp"
#include "sisapprox/parallel.hpp"

namespace sisapprox {

namespace {

bool in_box(std::span<const std::int64_t> k, int radius) {
    return std::all_of(k.begin(), k.end(), [radius](std::int64_t c) { return c >= -radius && c <= radius; });
}

std::string point_text(const IntPoint& k) {
    std::string out = "(";
    for (std::size_t c = 0; c < k.size(); ++c) out += (c ? "," : "") + std::to_string(k[c]);
    return out + ")";
}

}  // namespace

double weight(const SpectralDataset& ds, std::size_t g, std::span<const std::int64_t> k) {
    if (g >= ds.grid().num_cells()) throw InputError("cell index out of range");
    const auto idx = ds.grid().translation_index(k);
    if (!idx) throw InputError("translation outside the grid's truncation set");
    double sum = 0.0;
    for (std::size_t j = 0; j < ds.num_functions(); ++j) sum += std::norm(ds.at(j, g, *idx));
    return sum;
}

MultiTileModel fit_multitile(const SpectralDataset& ds, std::size_t rank, int box_radius, const FitOptions& options) {
    const auto& grid = ds.grid();
    if (rank < 1) throw InputError("rank must be at least 1");
    if (box_radius < 0 || box_radius > grid.trunc_radius()) {
        throw InputError("box radius must lie in [0, trunc_radius=" + std::to_string(grid.trunc_radius()) + "]");
    }
    std::vector<std::size_t> box;  // translation indices inside the box, lexicographic
    for (std::size_t k = 0; k < grid.num_translations(); ++k) {
        if (in_box(grid.translation(k), box_radius)) box.push_back(k);
    }
    if (box.size() < rank) {
        throw InputError("box of radius " + std::to_string(box_radius) + " holds only " + std::to_string(box.size()) +
                         " translations, fewer than rank " + std::to_string(rank));
    }

    const std::size_t cells = grid.num_cells();
    const std::size_t nk = grid.num_translations();
    MultiTileModel model{grid,
                         rank,
                         box_radius,
                         std::vector<std::vector<IntPoint>>(cells),
                         std::vector<double>(cells, 0.0),
                         0.0,
                         0.0,
                         std::vector<double>(cells * box.size(), 0.0),
                         box.size()};
    std::vector<double> outside(cells, 0.0);

    parallel_for(cells, options.threads, [&](std::size_t g) {
        std::vector<double> w(nk, 0.0);
        for (std::size_t j = 0; j < ds.num_functions(); ++j) {
            const auto f = ds.fiber_view(j, g);
            for (std::size_t k = 0; k < nk; ++k) w[k] += std::norm(f[k]);
        }
        std::vector<std::size_t> order = box;
        // Heavier first; equal weights keep lexicographic order.
        std::stable_sort(order.begin(), order.end(), [&w](std::size_t a, std::size_t b) { return w[a] > w[b]; });
        for (std::size_t i = 0; i < order.size(); ++i) model.weight_curves[g * box.size() + i] = w[order[i]];

        std::vector<std::size_t> picked(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(rank));
        std::sort(picked.begin(), picked.end());
        auto& chosen = model.chosen[g];
        chosen.reserve(rank);
        for (const std::size_t k : picked) chosen.push_back(grid.translation(k));

        double residual = 0.0;
        for (const std::size_t k : box) {
            if (!std::binary_search(picked.begin(), picked.end(), k)) residual += w[k];
        }
        model.residuals[g] = residual;
        double out = 0.0;
        for (std::size_t k = 0; k < nk; ++k) {
            if (!std::binary_search(box.begin(), box.end(), k)) out += w[k];
        }
        outside[g] = out;
    });

    model.error = std::accumulate(model.residuals.begin(), model.residuals.end(), 0.0) * grid.cell_volume();
    model.out_of_box_energy = std::accumulate(outside.begin(), outside.end(), 0.0) * grid.cell_volume();
    return model;
}

LayerDecomposition decompose_layers(const MultiTileModel& model) {
    const auto& grid = model.grid;
    LayerDecomposition out{{}, SpectralDataset::zeros(grid, model.rank)};
    for (std::size_t s = 0; s < model.rank; ++s) {
        TileLayer layer{s, std::vector<IntPoint>(grid.num_cells())};
        for (std::size_t g = 0; g < grid.num_cells() && g < model.chosen.size(); ++g) {
            if (s >= model.chosen[g].size()) continue;
            layer.translation[g] = model.chosen[g][s];
            if (const auto idx = grid.translation_index(model.chosen[g][s])) {
                out.generators.at(s, g, *idx) = 1.0;
            }
        }
        out.layers.push_back(std::move(layer));
    }
    return out;
}

VerificationReport verify_multitile(const MultiTileModel& model) {
    const auto& grid = model.grid;
    VerificationReport report;
    std::string count_issue, distinct_issue, box_issue;
    if (model.chosen.size() != grid.num_cells()) {
        count_issue = "model lists " + std::to_string(model.chosen.size()) + " cells, grid has " +
                      std::to_string(grid.num_cells());
    }
    for (std::size_t g = 0; g < model.chosen.size(); ++g) {
        const auto& ks = model.chosen[g];
        if (count_issue.empty() && ks.size() != model.rank) {
            count_issue = "cell " + std::to_string(g) + " holds " + std::to_string(ks.size()) +
                          " translations, expected " + std::to_string(model.rank);
        }
        if (distinct_issue.empty() && std::set<IntPoint>(ks.begin(), ks.end()).size() != ks.size()) {
            distinct_issue = "cell " + std::to_string(g) + " repeats a translation";
        }
        if (box_issue.empty()) {
            for (const auto& k : ks) {
                if (static_cast<int>(k.size()) != grid.dim() || !in_box(k, model.box_radius) ||
                    !grid.translation_index(k)) {
                    box_issue = "cell " + std::to_string(g) + " uses translation " + point_text(k) +
                                " outside the box of radius " + std::to_string(model.box_radius);
                    break;
                }
            }
        }
    }
    report.add("multitile_cover_count", count_issue.empty(), count_issue);
    report.add("distinct_translations", distinct_issue.empty(), distinct_issue);
    report.add("translations_in_box", box_issue.empty(), box_issue);

    if (count_issue.empty() && box_issue.empty()) {
        const auto layers = decompose_layers(model);
        const double defect = parseval_defect(layers.generators);
        std::ostringstream msg;
        msg << "max orthonormality defect " << defect;
        report.add("layer_generators_orthonormal", defect <= 1e-12, msg.str());
    } else {
        report.add("layer_generators_orthonormal", false, "skipped: malformed tiling");
    }
    return report;
}

std::vector<double> error_multitile_series(const SpectralDataset& ds, std::size_t rank,
                                           std::span<const int> box_radii, const FitOptions& options) {
    if (box_radii.empty()) throw InputError("box radius list is empty");
    if (!std::is_sorted(box_radii.begin(), box_radii.end())) throw InputError("box radius list must be ascending");
    std::vector<double> out;
    out.reserve(box_radii.size());
    for (const int n : box_radii) out.push_back(fit_multitile(ds, rank, n, options).total_error());
    return out;
}

}  // namespace sisapprox
