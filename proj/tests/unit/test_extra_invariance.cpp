#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "sisapprox/error.hpp"
#include "sisapprox/extra_invariance.hpp"
#include "sisapprox/fiber_ops.hpp"

using namespace sisapprox;

namespace {

DualLattice lattice(const char* text) { return DualLattice(parse_integer_matrix(text)); }

}  // namespace

TEST_CASE("split by coset: parity mask and exact reassembly") {
    const SpectralGrid grid(1, 2, 1);
    auto ds = SpectralDataset::zeros(grid, 1);
    ds.at(0, 0, 0) = 1.0;
    ds.at(0, 0, 1) = 2.0;
    ds.at(0, 0, 2) = 3.0;
    const auto parts = split_by_coset(ds, lattice("2"));
    REQUIRE(parts.size() == 2);
    CHECK(parts[0].at(0, 0, 0) == 0.0);
    CHECK(parts[0].at(0, 0, 1) == 2.0);
    CHECK(parts[0].at(0, 0, 2) == 0.0);
    CHECK(parts[1].at(0, 0, 0) == 1.0);
    CHECK(parts[1].at(0, 0, 1) == 0.0);
    CHECK(parts[1].at(0, 0, 2) == 3.0);

    CHECK(split_by_coset(ds, lattice("1"))[0].samples() == ds.samples());

    oracle::Rng rng(1);
    const auto rnd = oracle::random_dataset(rng, 2, 4, 2, 2);
    const auto pieces = split_by_coset(rnd, lattice("2 1;0 2"));
    REQUIRE(pieces.size() == 4);
    for (std::size_t i = 0; i < rnd.samples().size(); ++i) {
        Complex sum = 0.0;
        for (const auto& p : pieces) sum += p.samples()[i];
        CHECK(sum == rnd.samples()[i]);
    }
    for (std::size_t a = 0; a < pieces.size(); ++a) {
        for (std::size_t b = a + 1; b < pieces.size(); ++b) {
            for (std::size_t g = 0; g < rnd.grid().num_cells(); ++g) {
                for (std::size_t i = 0; i < 2; ++i) {
                    for (std::size_t j = 0; j < 2; ++j) CHECK(fiber(pieces[a], g, i).dot(fiber(pieces[b], g, j)) == Complex(0.0));
                }
            }
        }
    }
    CHECK_THROWS_AS(split_by_coset(rnd, lattice("2")), InputError);
}

TEST_CASE("indicator golden case") {
    const auto ds = oracle::indicator_fixture();
    const auto l = lattice("2");
    CHECK(fit_extra_invariant(ds, l, 1).error == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(fit_extra_invariant(ds, l, 2).error) <= 1e-10);
    CHECK(error_extra(ds, l, 1) == doctest::Approx(1.0).epsilon(1e-12));
    // Without the extra invariance one generator captures the whole fiber.
    CHECK(std::abs(fit_sis(ds, 1).error) <= 1e-12);
}

TEST_CASE("identity lattice reduces to the plain fit") {
    oracle::Rng rng(2);
    for (int trial = 0; trial < 5; ++trial) {
        const int d = 1 + trial % 2;
        const auto ds = oracle::random_dataset(rng, d, 4, 1, 3, 0.3);
        const auto l = DualLattice(IntMatrix::Identity(d, d));
        const auto extra = fit_extra_invariant(ds, l, 2);
        const auto plain = fit_sis(ds, 2);
        CHECK(std::abs(extra.error - plain.error) <= 1e-12 * std::max(1.0, plain.error));
        for (std::size_t g = 0; g < ds.grid().num_cells(); ++g) {
            const ComplexMatrix pa = span_projector(fiber_matrix(extra.generators, g));
            const ComplexMatrix pb = span_projector(fiber_matrix(plain.generators, g));
            CHECK((pa - pb).norm() <= 1e-8);
        }
    }
}

TEST_CASE("error_extra edge ranks and consistency") {
    oracle::Rng rng(3);
    const auto ds = oracle::random_dataset(rng, 1, 8, 2, 2);
    const auto l = lattice("3");
    const double energy = energy_report(ds).sum();
    CHECK(error_extra(ds, l, 6) == 0.0);
    CHECK(error_extra(ds, l, 9) == 0.0);
    CHECK(error_extra(ds, l, 0) == doctest::Approx(energy).epsilon(1e-12));
    CHECK(std::abs(error_extra(ds, l, 2) - fit_extra_invariant(ds, l, 2).error) <= 1e-12 * energy);
    CHECK_THROWS_AS(fit_extra_invariant(ds, l, 0), InputError);
}

TEST_CASE("records: ordering, prefix property and exhaustive optimality") {
    oracle::Rng rng(4);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t m = 1 + static_cast<std::size_t>(trial % 3);
        const auto ds = oracle::random_dataset(rng, 1, 4, 2, m, 0.3);
        const char* texts[] = {"2", "3", "4"};
        const auto l = lattice(texts[trial % 3]);
        const std::size_t kappa = static_cast<std::size_t>(l.index());
        for (std::size_t g = 0; g < 4; ++g) {
            const auto recs = block_records(ds, l, g);
            REQUIRE(recs.size() == kappa * m);
            for (std::size_t i = 1; i < recs.size(); ++i) {
                CHECK(recs[i - 1].eigenvalue >= recs[i].eigenvalue);
                if (recs[i - 1].eigenvalue == recs[i].eigenvalue) {
                    CHECK(std::make_pair(recs[i - 1].block, recs[i - 1].rank_in_block) <
                          std::make_pair(recs[i].block, recs[i].rank_in_block));
                }
            }
            for (const auto& r : recs) {
                CHECK(r.eigenvalue >= 0.0);
                CHECK(std::abs(r.eigenvector.norm() - 1.0) <= 1e-10);
            }
            std::vector<std::vector<double>> blocks(kappa);
            for (const auto& r : recs) blocks[r.block.index].push_back(r.eigenvalue);
            for (auto& b : blocks) std::sort(b.begin(), b.end(), std::greater<>());
            for (std::size_t rank = 1; rank <= std::min<std::size_t>(kappa * m, 4); ++rank) {
                // Prefix property of the top `rank` records.
                std::vector<std::size_t> next(kappa, 0);
                for (std::size_t s = 0; s < rank; ++s) {
                    CHECK(recs[s].rank_in_block == next[recs[s].block.index]);
                    ++next[recs[s].block.index];
                }
                double tail = 0.0;
                for (std::size_t s = rank; s < recs.size(); ++s) tail += recs[s].eigenvalue;
                CHECK(std::abs(tail - oracle::best_allocation_tail(blocks, rank)) <= 1e-12 * (1.0 + tail));
            }
        }
    }
}

TEST_CASE("fitted generators live in their home coset") {
    oracle::Rng rng(5);
    const auto ds = oracle::random_dataset(rng, 2, 4, 1, 2);
    const auto l = lattice("2 0;0 1");
    const auto model = fit_extra_invariant(ds, l, 3);
    const auto report = verify_extra_invariance(model, l);
    CHECK(report.passed());
    const auto labels = coset_labels(ds.grid(), l);
    for (std::size_t g = 0; g < ds.grid().num_cells(); ++g) {
        for (std::size_t s = 0; s < 3; ++s) {
            const auto f = model.generators.fiber_view(s, g);
            for (std::size_t k = 0; k < f.size(); ++k) {
                if (static_cast<std::int64_t>(labels[k]) != model.home_at(g, s)) CHECK(f[k] == Complex(0.0));
            }
        }
    }
    CHECK(parseval_defect(model.generators) <= 1e-8);
}

TEST_CASE("a plain fit on coset-mixing data fails the check") {
    const SpectralGrid grid(1, 4, 1);
    auto ds = SpectralDataset::zeros(grid, 2);
    for (std::size_t g = 0; g < 4; ++g) {
        ds.at(0, g, 1) = 1.0;
        ds.at(0, g, 2) = 1.0;
        ds.at(1, g, 1) = 1.0;
        ds.at(1, g, 2) = 0.8;
    }
    const auto plain = fit_sis(ds, 1);
    const auto report = verify_extra_invariance(plain.generators, lattice("2"));
    CHECK_FALSE(report.passed());
    CHECK(report.checks[0].detail.find("cell 0, generator 0") != std::string::npos);
    // The same data fitted with the invariance passes.
    CHECK(verify_extra_invariance(fit_extra_invariant(ds, lattice("2"), 1), lattice("2")).passed());
}

TEST_CASE("zero model passes; corrupted models fail") {
    const SpectralGrid grid(1, 4, 1);
    const auto l = lattice("2");
    const auto zero = fit_extra_invariant(SpectralDataset::zeros(grid, 2), l, 2);
    CHECK(zero.error == 0.0);
    CHECK(zero.effective_length == 0);
    CHECK(verify_extra_invariance(zero, l).passed());
    CHECK(verify_extra_invariance(zero.generators, l).passed());

    oracle::Rng rng(6);
    auto model = fit_extra_invariant(oracle::random_dataset(rng, 1, 4, 1, 1), l, 1);
    auto bad_label = model;
    bad_label.home_coset[0] = 5;
    CHECK_FALSE(verify_extra_invariance(bad_label, l).passed());
    auto leaked = model;
    const auto labels = coset_labels(grid, l);
    for (std::size_t k = 0; k < 3; ++k) {
        if (static_cast<std::int64_t>(labels[k]) != leaked.home_at(0, 0)) leaked.generators.at(0, 0, k) = 1e-3;
    }
    const auto report = verify_extra_invariance(leaked, l);
    CHECK_FALSE(report.checks[0].passed);
    CHECK(report.checks[0].detail.find("cell 0, generator 0") != std::string::npos);
    auto wrong_shape = model;
    wrong_shape.home_coset.pop_back();
    CHECK_THROWS_AS(verify_extra_invariance(wrong_shape, l), InputError);
}

TEST_CASE("padding generators beyond m * kappa carry no coset") {
    oracle::Rng rng(7);
    const auto ds = oracle::random_dataset(rng, 1, 4, 1, 1);
    const auto model = fit_extra_invariant(ds, lattice("2"), 3);
    for (std::size_t g = 0; g < 4; ++g) {
        CHECK(model.home_at(g, 2) == ExtraInvariantModel::kNoCoset);
        CHECK(fiber(model.generators, g, 2).isZero(0.0));
    }
    CHECK(model.error == 0.0);
    CHECK(verify_extra_invariance(model, lattice("2")).passed());
}

TEST_CASE("class nesting and determinism across threads") {
    oracle::Rng rng(8);
    const auto ds = oracle::random_dataset(rng, 2, 4, 2, 3);
    const double energy = energy_report(ds).sum();
    const auto l = lattice("2 1;0 2");
    for (std::size_t rank = 1; rank <= 5; ++rank) CHECK(error_extra(ds, l, rank) >= error_sis(ds, rank) - 1e-12 * energy);
    FitOptions many;
    many.threads = 3;
    const auto a = fit_extra_invariant(ds, l, 4);
    const auto b = fit_extra_invariant(ds, l, 4, many);
    CHECK(a.generators.samples() == b.generators.samples());
    CHECK(a.home_coset == b.home_coset);
    CHECK(a.error == b.error);
}
