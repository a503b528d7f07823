#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "sisapprox/error.hpp"
#include "sisapprox/hermitian.hpp"

using namespace sisapprox;

namespace {

double reconstruction_residual(const ComplexMatrix& g, const EigenSystem& e) {
    const ComplexMatrix back = e.eigenvectors * e.eigenvalues.cast<Complex>().asDiagonal() * e.eigenvectors.adjoint();
    return (back - g).norm() / std::max(g.norm(), 1e-300);
}

double unitarity_defect(const EigenSystem& e) {
    const auto n = e.eigenvectors.cols();
    return (e.eigenvectors.adjoint() * e.eigenvectors - ComplexMatrix::Identity(n, n)).norm();
}

}  // namespace

TEST_CASE("diagonal matrix keeps its entries, sorted descending") {
    ComplexMatrix a = ComplexMatrix::Zero(2, 2);
    a(0, 0) = 1.0;
    a(1, 1) = 3.0;
    const auto e = eig_hermitian(HermitianMatrix(a));
    CHECK(e.eigenvalues(0) == 3.0);
    CHECK(e.eigenvalues(1) == 1.0);
    CHECK(std::abs(e.eigenvectors(1, 0)) == doctest::Approx(1.0));
}

TEST_CASE("[[2,i],[-i,2]] has eigenvalues 3 and 1") {
    ComplexMatrix a(2, 2);
    a << 2.0, Complex(0, 1), Complex(0, -1), 2.0;
    const auto e = eig_hermitian(HermitianMatrix(a));
    CHECK(e.eigenvalues(0) == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(e.eigenvalues(1) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(reconstruction_residual(a, e) <= 1e-14);
}

TEST_CASE("random Hermitian matrices reconstruct and stay unitary") {
    oracle::Rng rng(11);
    for (int n : {1, 2, 3, 5, 8, 17, 32}) {
        const ComplexMatrix a = oracle::random_hermitian(rng, n);
        const auto e = eig_hermitian(HermitianMatrix(a));
        CHECK(reconstruction_residual(a, e) <= 1e-10);
        CHECK(unitarity_defect(e) <= 1e-10);
        for (int i = 1; i < n; ++i) CHECK(e.eigenvalues(i - 1) >= e.eigenvalues(i));
    }
}

TEST_CASE("small orders match the characteristic polynomial") {
    oracle::Rng rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 2 + trial % 2;
        const ComplexMatrix a = oracle::random_hermitian(rng, n);
        const auto e = eig_hermitian(HermitianMatrix(a));
        const auto ref = oracle::charpoly_eigenvalues(a);
        for (int i = 0; i < n; ++i) CHECK(std::abs(e.eigenvalues(i) - ref[static_cast<std::size_t>(i)]) <= 1e-9);
    }
}

TEST_CASE("rank-one Gram matrix has a single nonzero eigenvalue") {
    ComplexVector v(4);
    v << 1.0, Complex(0, 2), -1.0, Complex(0.5, 0.5);
    const ComplexMatrix g = v * v.adjoint();
    const auto e = eig_hermitian(HermitianMatrix(g));
    CHECK(e.eigenvalues(0) == doctest::Approx(v.squaredNorm()).epsilon(1e-13));
    for (int i = 1; i < 4; ++i) CHECK(std::abs(e.eigenvalues(i)) <= 1e-12 * v.squaredNorm());
    CHECK(rank_by_threshold(e, 1e-10) == 1);
}

TEST_CASE("identical input gives identical bits") {
    oracle::Rng rng(99);
    const ComplexMatrix a = oracle::random_hermitian(rng, 9);
    const auto e1 = eig_hermitian(HermitianMatrix(a));
    const auto e2 = eig_hermitian(HermitianMatrix(a));
    CHECK(e1.eigenvalues == e2.eigenvalues);
    CHECK(e1.eigenvectors == e2.eigenvectors);
}

TEST_CASE("eigenvectors carry the phase convention") {
    oracle::Rng rng(3);
    const auto e = eig_hermitian(HermitianMatrix(oracle::random_hermitian(rng, 6)));
    for (Eigen::Index c = 0; c < 6; ++c) {
        Eigen::Index i = 0;
        while (std::abs(e.eigenvectors(i, c)) <= 1e-12) ++i;
        CHECK(e.eigenvectors(i, c).imag() == 0.0);
        CHECK(e.eigenvectors(i, c).real() > 0.0);
    }
}

TEST_CASE("zero matrix yields zero eigenvalues and the identity") {
    const auto e = eig_hermitian(HermitianMatrix(ComplexMatrix::Zero(3, 3)));
    CHECK(e.eigenvalues.isZero(0.0));
    CHECK(e.eigenvectors == ComplexMatrix::Identity(3, 3));
}

TEST_CASE("tiny negative roundoff eigenvalues are clamped, genuine negatives kept") {
    ComplexMatrix a = ComplexMatrix::Zero(2, 2);
    a(0, 0) = 1.0;
    a(1, 1) = -1e-13;
    auto e = eig_hermitian(HermitianMatrix(a));
    CHECK(e.eigenvalues(1) == 0.0);
    a(1, 1) = -0.5;
    e = eig_hermitian(HermitianMatrix(a));
    CHECK(e.eigenvalues(1) == -0.5);
}

TEST_CASE("invalid input is rejected") {
    ComplexMatrix a(2, 2);
    a << 1.0, 2.0, 3.0, 1.0;
    CHECK_THROWS_AS(HermitianMatrix{a}, InputError);
    try {
        HermitianMatrix h(a);
    } catch (const InputError& e) {
        CHECK(std::string(e.what()).find("asymmetry") != std::string::npos);
    }
    a << 1.0, std::nan(""), std::nan(""), 1.0;
    CHECK_THROWS_AS(HermitianMatrix{a}, InputError);
    CHECK_THROWS_AS(HermitianMatrix{ComplexMatrix(2, 3)}, InputError);
    CHECK_THROWS_AS(HermitianMatrix{ComplexMatrix(0, 0)}, InputError);
    CHECK_THROWS_AS(HermitianMatrix{ComplexMatrix::Zero(257, 257)}, InputError);
    const HermitianMatrix ok(ComplexMatrix::Identity(2, 2));
    CHECK_THROWS_AS(eig_hermitian(ok, 0.0), InputError);
    CHECK_THROWS_AS(eig_hermitian(ok, 1e-3), InputError);
}

TEST_CASE("asymmetry within tolerance is symmetrized") {
    ComplexMatrix a(2, 2);
    a << 1.0, Complex(1.0, 1e-14), Complex(1.0, 0.0), Complex(2.0, 1e-15);
    const HermitianMatrix h(a);
    CHECK(max_asymmetry(h.entries()) == 0.0);
    CHECK(h.entries()(1, 1).imag() == 0.0);
}

TEST_CASE("rank threshold counts relative to the top eigenvalue") {
    RealVector v(4);
    v << 10.0, 1.0, 1e-10, 0.0;
    CHECK(rank_by_threshold(v, 1e-10) == 2);
    CHECK(rank_by_threshold(v, 1e-12) == 3);
    CHECK(rank_by_threshold(RealVector::Zero(3), 1e-10) == 0);
}
