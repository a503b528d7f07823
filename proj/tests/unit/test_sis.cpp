#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "sisapprox/error.hpp"
#include "sisapprox/fiber_ops.hpp"
#include "sisapprox/sis.hpp"

using namespace sisapprox;

TEST_CASE("one function is fitted exactly by its normalized fibers") {
    oracle::Rng rng(1);
    const auto ds = oracle::random_dataset(rng, 1, 8, 2, 1);
    const auto model = fit_sis(ds, 1);
    CHECK(model.error == 0.0);
    CHECK(model.effective_length == 1);
    for (std::size_t g = 0; g < 8; ++g) {
        const ComplexVector f = fiber(ds, g, 0);
        const ComplexVector phi = fiber(model.generators, g, 0);
        // Equal up to a unimodular phase.
        const Complex phase = phi.dot(f) / f.norm();
        CHECK(std::abs(std::abs(phase) - 1.0) <= 1e-12);
        CHECK((phi * phase - f / f.norm()).norm() <= 1e-12);
    }
}

TEST_CASE("rank-one data has zero error") {
    oracle::Rng rng(2);
    const auto one = oracle::random_dataset(rng, 1, 8, 1, 1);
    std::vector<Complex> samples(one.samples());
    for (const auto& z : one.samples()) samples.push_back(2.0 * z);
    const SpectralDataset ds(one.grid(), 2, samples);
    const auto model = fit_sis(ds, 1);
    CHECK(std::abs(model.error) <= 1e-12 * energy_report(ds).sum());
    CHECK(model.effective_length == 1);
}

TEST_CASE("disjoint fibers: smaller energy per cell is discarded") {
    oracle::Rng rng(3);
    std::normal_distribution<double> normal;
    const SpectralGrid grid(1, 8, 1);
    auto ds = SpectralDataset::zeros(grid, 2);
    double expected = 0.0;
    for (std::size_t g = 0; g < 8; ++g) {
        ds.at(0, g, 1) = Complex(normal(rng), normal(rng));
        ds.at(1, g, 2) = Complex(normal(rng), normal(rng));
        expected += std::min(std::norm(ds.at(0, g, 1)), std::norm(ds.at(1, g, 2)));
    }
    expected *= grid.cell_volume();
    const auto model = fit_sis(ds, 1);
    CHECK(model.error == doctest::Approx(expected).epsilon(1e-13));
    // Brute force: best of the two candidate lines per cell.
    double brute = 0.0;
    for (std::size_t g = 0; g < 8; ++g) {
        const ComplexMatrix data = fiber_matrix(ds, g);
        double best = std::numeric_limits<double>::infinity();
        for (Eigen::Index r = 0; r < 2; ++r) best = std::min(best, projection_residual(data, data.row(r)));
        brute += best;
    }
    CHECK(model.error == doctest::Approx(brute * grid.cell_volume()).epsilon(1e-12));
}

TEST_CASE("error_sis edge ranks and consistency") {
    oracle::Rng rng(4);
    const auto ds = oracle::random_dataset(rng, 1, 8, 2, 3);
    const double energy = energy_report(ds).sum();
    CHECK(error_sis(ds, 3) == 0.0);
    CHECK(error_sis(ds, 7) == 0.0);
    CHECK(error_sis(ds, 0) == doctest::Approx(energy).epsilon(1e-12));
    CHECK(std::abs(error_sis(ds, 1) - fit_sis(ds, 1).error) <= 1e-12 * energy);
    CHECK_THROWS_AS(fit_sis(ds, 0), InputError);
}

TEST_CASE("rank beyond m pads with zero generators") {
    oracle::Rng rng(5);
    const auto ds = oracle::random_dataset(rng, 1, 4, 1, 2);
    const auto model = fit_sis(ds, 4);
    CHECK(model.error == 0.0);
    CHECK(model.effective_length == 2);
    for (std::size_t g = 0; g < 4; ++g) {
        CHECK(fiber(model.generators, g, 2).isZero(0.0));
        CHECK(fiber(model.generators, g, 3).isZero(0.0));
        CHECK(model.selected_at(g)[3] == 0.0);
    }
}

TEST_CASE("projection identities") {
    oracle::Rng rng(6);
    const auto ds = oracle::random_dataset(rng, 2, 4, 1, 4);
    const auto model = fit_sis(ds, 2);
    const auto proj = project_onto(model, ds);
    double total = 0.0;
    for (const double r : proj.residuals) total += r;
    CHECK(std::abs(total - model.error) <= 1e-8);

    const auto zero = project_onto(model, SpectralDataset::zeros(ds.grid(), 1));
    CHECK(zero.residuals[0] == 0.0);
    const auto self = project_onto(model, model.generators);
    for (const double r : self.residuals) CHECK(std::abs(r) <= 1e-10);

    const SpectralGrid other(2, 4, 2);
    CHECK_THROWS_AS(project_onto(model, SpectralDataset::zeros(other, 1)), InputError);
}

TEST_CASE("per-cell residual identity and Parseval") {
    oracle::Rng rng(7);
    for (int trial = 0; trial < 10; ++trial) {
        const auto ds = oracle::random_dataset(rng, 1 + trial % 2, 4, 1 + trial % 2, 1 + trial % 4, 0.3);
        const std::size_t rank = 1 + trial % 3;
        const auto model = fit_sis(ds, rank);
        CHECK(parseval_defect(model.generators) <= 1e-8);
        double quad = 0.0;
        for (std::size_t g = 0; g < ds.grid().num_cells(); ++g) {
            const ComplexMatrix data = fiber_matrix(ds, g);
            const double trace = data.squaredNorm();
            const double r = projection_residual(data, fiber_matrix(model.generators, g));
            CHECK(std::abs(r - model.residuals[g]) <= 1e-8 * (1.0 + trace));
            quad += model.residuals[g];
        }
        CHECK(std::abs(quad * ds.grid().cell_volume() - model.error) <= 1e-12 * std::max(model.error, 1e-300));
    }
}

TEST_CASE("scaling covariance") {
    oracle::Rng rng(8);
    const auto ds = oracle::random_dataset(rng, 1, 8, 1, 3);
    const auto a = fit_sis(ds, 1);
    const auto b = fit_sis(ds.scaled(3.0), 1);
    CHECK(b.error == doctest::Approx(9.0 * a.error).epsilon(1e-10));
    for (std::size_t g = 0; g < 8; ++g) {
        const ComplexMatrix pa = span_projector(fiber_matrix(a.generators, g));
        const ComplexMatrix pb = span_projector(fiber_matrix(b.generators, g));
        CHECK((pa - pb).norm() <= 1e-8);
    }
}

TEST_CASE("monotone in rank and deterministic across thread counts") {
    oracle::Rng rng(9);
    const auto ds = oracle::random_dataset(rng, 2, 6, 1, 4);
    const double energy = energy_report(ds).sum();
    double prev = error_sis(ds, 0);
    for (std::size_t r = 1; r <= 5; ++r) {
        const double e = error_sis(ds, r);
        CHECK(e <= prev + 1e-12 * energy);
        prev = e;
    }
    FitOptions many;
    many.threads = 4;
    const auto one = fit_sis(ds, 2);
    const auto four = fit_sis(ds, 2, many);
    CHECK(one.error == four.error);
    CHECK(one.generators.samples() == four.generators.samples());
    CHECK(one.residuals == four.residuals);
}

TEST_CASE("fiber operations") {
    ComplexMatrix rows(2, 3);
    rows << 1.0, 0.0, 0.0, 2.0, 0.0, 0.0;
    const ComplexMatrix p = span_projector(rows);
    CHECK((p - ComplexMatrix(ComplexVector::Unit(3, 0) * ComplexVector::Unit(3, 0).adjoint())).norm() <= 1e-15);
    CHECK(orthonormality_defect(rows) > 0.5);
    ComplexMatrix ortho = ComplexMatrix::Zero(3, 3);
    ortho(0, 1) = 1.0;
    ortho(2, 2) = Complex(0.0, 1.0);
    CHECK(orthonormality_defect(ortho) == 0.0);
    CHECK(span_projector(ComplexMatrix::Zero(2, 3)).isZero(0.0));
}
