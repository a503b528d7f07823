#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "oracles.hpp"
#include "sisapprox/error.hpp"
#include "sisapprox/fiber_ops.hpp"
#include "sisapprox/paley_wiener.hpp"

using namespace sisapprox;

namespace {

SpectralDataset gaussian(int dim, int cells, int trunc) {
    const std::vector<double> sigma{0.5};
    return synthesize("gaussian", sigma, SpectralGrid(dim, cells, trunc));
}

std::vector<std::size_t> box_indices(const SpectralGrid& grid, int radius) {
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < grid.num_translations(); ++k) {
        const auto& t = grid.translation(k);
        if (std::all_of(t.begin(), t.end(), [radius](std::int64_t c) { return std::abs(c) <= radius; })) out.push_back(k);
    }
    return out;
}

}  // namespace

TEST_CASE("weight function") {
    const SpectralGrid grid(1, 2, 1);
    auto ds = SpectralDataset::zeros(grid, 2);
    ds.at(0, 1, 2) = 2.0;
    ds.at(1, 1, 2) = Complex(0.0, 1.0);
    const IntPoint one{1};
    const IntPoint zero{0};
    CHECK(weight(ds, 1, one) == 5.0);
    CHECK(weight(ds, 1, zero) == 0.0);
    CHECK(weight(ds, 0, one) == 0.0);
    CHECK_THROWS_AS(weight(ds, 0, IntPoint{2}), InputError);
    CHECK_THROWS_AS(weight(ds, 2, one), InputError);

    oracle::Rng rng(11);
    const auto rnd = oracle::random_dataset(rng, 2, 2, 1, 3);
    for (std::size_t g = 0; g < 4; ++g) {
        for (std::size_t k = 0; k < rnd.grid().num_translations(); ++k) {
            double naive = 0.0;
            for (std::size_t j = 0; j < 3; ++j) naive += std::norm(rnd.at(j, g, k));
            CHECK(weight(rnd, g, rnd.grid().translation(k)) == doctest::Approx(naive).epsilon(1e-14));
        }
    }
}

TEST_CASE("gaussian goldens") {
    const auto ds = gaussian(1, 16, 2);
    const auto one = fit_multitile(ds, 1, 2);
    for (const auto& c : one.chosen) CHECK(c == std::vector<IntPoint>{{0}});
    CHECK(verify_multitile(one).passed());

    const auto three = fit_multitile(ds, 3, 1);
    for (const auto& c : three.chosen) CHECK(c == std::vector<IntPoint>{{-1}, {0}, {1}});
    CHECK(std::abs(three.error) == 0.0);
    const auto layers = decompose_layers(three);
    REQUIRE(layers.layers.size() == 3);
    const std::int64_t expected[] = {-1, 0, 1};
    for (std::size_t s = 0; s < 3; ++s) {
        for (const auto& t : layers.layers[s].translation) CHECK(t == IntPoint{expected[s]});
    }
    CHECK(parseval_defect(layers.generators) == 0.0);
}

TEST_CASE("equal weights resolve to the lexicographically smallest translation") {
    const SpectralGrid grid(1, 4, 2);
    auto ds = SpectralDataset::zeros(grid, 1);
    for (std::size_t g = 0; g < 4; ++g) {
        for (std::size_t k = 0; k < 5; ++k) ds.at(0, g, k) = 1.0;
    }
    const auto model = fit_multitile(ds, 1, 1);
    for (const auto& c : model.chosen) CHECK(c == std::vector<IntPoint>{{-1}});
    CHECK(model.error == doctest::Approx(2.0));
    CHECK(model.out_of_box_energy == doctest::Approx(2.0));
    CHECK(model.total_error() == doctest::Approx(4.0));
}

TEST_CASE("chosen sets maximize the in-box weight") {
    oracle::Rng rng(12);
    for (int trial = 0; trial < 30; ++trial) {
        const int d = 1 + trial % 2;
        const int box = d == 1 ? 1 + trial % 3 : 1;
        const auto ds = oracle::random_dataset(rng, d, 2, 3, 1 + static_cast<std::size_t>(trial % 3));
        const auto inside = box_indices(ds.grid(), box);
        for (std::size_t rank = 1; rank <= std::min<std::size_t>(4, inside.size()); ++rank) {
            const auto model = fit_multitile(ds, rank, box);
            CHECK(verify_multitile(model).passed());
            for (std::size_t g = 0; g < ds.grid().num_cells(); ++g) {
                std::vector<double> w;
                for (const std::size_t k : inside) w.push_back(weight(ds, g, ds.grid().translation(k)));
                const auto best = oracle::best_subsets(w, rank);
                std::vector<IntPoint> ours = model.chosen[g];
                bool found = false;
                for (const auto& subset : best) {
                    std::vector<IntPoint> pts;
                    for (const std::size_t i : subset) pts.push_back(ds.grid().translation(inside[i]));
                    std::sort(pts.begin(), pts.end());
                    found = found || pts == ours;
                }
                CHECK(found);
            }
        }
    }
}

TEST_CASE("malformed tilings fail verification") {
    const auto ds = gaussian(1, 4, 2);
    const auto model = fit_multitile(ds, 2, 1);
    REQUIRE(verify_multitile(model).passed());

    auto dup = model;
    dup.chosen[1] = {{0}, {0}};
    auto report = verify_multitile(dup);
    CHECK_FALSE(report.passed());
    CHECK_FALSE(report.checks[1].passed);
    CHECK(report.checks[1].name == "distinct_translations");

    auto short_cell = model;
    short_cell.chosen[2].pop_back();
    report = verify_multitile(short_cell);
    CHECK_FALSE(report.checks[0].passed);
    CHECK(report.checks[0].detail.find("cell 2") != std::string::npos);

    auto outside = model;
    outside.chosen[0] = {{0}, {2}};
    report = verify_multitile(outside);
    CHECK_FALSE(report.checks[2].passed);
    CHECK(report.checks[2].name == "translations_in_box");
}

TEST_CASE("error identities and series") {
    oracle::Rng rng(13);
    const auto ds = oracle::random_dataset(rng, 1, 8, 3, 2);
    const auto model = fit_multitile(ds, 2, 2);
    const auto layers = decompose_layers(model);
    // Projecting onto the layer indicators leaves everything outside Omega.
    const auto proj = project_onto(layers.generators, ds);
    double residual = 0.0;
    for (const double r : proj.residuals) residual += r;
    CHECK(std::abs(residual - model.total_error()) <= 1e-10 * (1.0 + residual));

    const std::vector<int> radii{1, 2, 3};
    const auto series = error_multitile_series(ds, 2, radii);
    REQUIRE(series.size() == 3);
    CHECK(series[1] <= series[0] + 1e-12 * series[0]);
    CHECK(series[2] <= series[1] + 1e-12 * series[1]);
    CHECK(series[1] == fit_multitile(ds, 2, 2).total_error());
    const std::vector<int> single{3};
    CHECK(error_multitile_series(ds, 1, single).size() == 1);

    const auto full = fit_multitile(ds, 7, 3);
    CHECK(full.error == 0.0);
    CHECK(full.out_of_box_energy == 0.0);
}

TEST_CASE("preconditions") {
    const auto ds = gaussian(1, 4, 1);
    CHECK_THROWS_AS(fit_multitile(ds, 0, 1), InputError);
    CHECK_THROWS_AS(fit_multitile(ds, 1, 2), InputError);
    CHECK_THROWS_AS(fit_multitile(ds, 1, -1), InputError);
    CHECK_THROWS_AS(fit_multitile(ds, 2, 0), InputError);
    const std::vector<int> descending{1, 0};
    CHECK_THROWS_AS(error_multitile_series(ds, 1, descending), InputError);
    CHECK_THROWS_AS(error_multitile_series(ds, 1, std::vector<int>{}), InputError);
}

TEST_CASE("thread count does not change the fit") {
    const auto ds = gaussian(2, 8, 2);
    FitOptions many;
    many.threads = 4;
    const auto a = fit_multitile(ds, 3, 2);
    const auto b = fit_multitile(ds, 3, 2, many);
    CHECK(a.chosen == b.chosen);
    CHECK(a.error == b.error);
    CHECK(a.residuals == b.residuals);
}
