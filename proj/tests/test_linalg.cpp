#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "qrf/linalg.hpp"

using namespace qrf;

TEST_CASE("hermitian_eig on diag(3,1,2) sorts ascending") {
    auto m = ComplexMatrix::diag({cplx(3, 0), cplx(1, 0), cplx(2, 0)});
    auto eig = hermitian_eig(m);
    REQUIRE(eig.values.size() == 3);
    CHECK(eig.values[0] == doctest::Approx(1.0));
    CHECK(eig.values[1] == doctest::Approx(2.0));
    CHECK(eig.values[2] == doctest::Approx(3.0));
}

TEST_CASE("hermitian_eig on Pauli X") {
    ComplexMatrix x(2, 2);
    x(0, 1) = 1.0;
    x(1, 0) = 1.0;
    auto eig = hermitian_eig(x);
    CHECK(eig.values[0] == doctest::Approx(-1.0));
    CHECK(eig.values[1] == doctest::Approx(1.0));
    // eigenvectors (|0> -/+ |1>)/sqrt2 up to phase: check componentwise moduli
    const double s = 1.0 / std::sqrt(2.0);
    for (std::size_t k = 0; k < 2; ++k) {
        CHECK(std::abs(eig.vectors(0, k)) == doctest::Approx(s));
        CHECK(std::abs(eig.vectors(1, k)) == doctest::Approx(s));
    }
    // and the eigen-equation itself
    for (std::size_t k = 0; k < 2; ++k) {
        cplx r0 = x(0, 1) * eig.vectors(1, k) - eig.values[k] * eig.vectors(0, k);
        CHECK(std::abs(r0) < 1e-12);
    }
}

TEST_CASE("hermitian_eig of identity") {
    auto eig = hermitian_eig(ComplexMatrix::identity(5));
    for (double v : eig.values)
        CHECK(v == doctest::Approx(1.0));
}

TEST_CASE("hermitian_eig reconstruction on random Hermitian up to dim 36") {
    Rng rng(2024);
    for (std::size_t n : {2, 5, 12, 36}) {
        auto m = ComplexMatrix::random_hermitian(n, rng);
        auto eig = hermitian_eig(m);
        // V diag V^dagger
        ComplexMatrix lam = ComplexMatrix(n, n);
        for (std::size_t i = 0; i < n; ++i)
            lam(i, i) = eig.values[i];
        auto rec = eig.vectors * lam * eig.vectors.dagger();
        CHECK(distance(rec, m) < 1e-10);
        CHECK(distance(eig.vectors.dagger() * eig.vectors, ComplexMatrix::identity(n)) < 1e-11);
    }
}

TEST_CASE("hermitian_eig rejects non-Hermitian input") {
    ComplexMatrix m(2, 2);
    m(0, 1) = 1.0;
    CHECK_THROWS_AS(hermitian_eig(m), std::invalid_argument);
}

TEST_CASE("orthonormal_span collapses collinear inputs") {
    auto i2 = ComplexMatrix::identity(2);
    ComplexMatrix twice = i2;
    twice *= cplx(2.0, 0.0);
    auto basis = orthonormal_span({i2, twice});
    REQUIRE(basis.size() == 1);
    // I2/sqrt(2) up to sign convention: first-come pivot keeps direction of I2
    CHECK(distance(basis[0], i2 * cplx(1.0 / std::sqrt(2.0), 0.0)) < 1e-12);
}

TEST_CASE("orthonormal_span of the Pauli set has rank 4") {
    ComplexMatrix x(2, 2), z(2, 2);
    x(0, 1) = x(1, 0) = 1.0;
    z(0, 0) = 1.0;
    z(1, 1) = -1.0;
    auto xz = x * z;
    auto basis = orthonormal_span({ComplexMatrix::identity(2), x, z, xz});
    CHECK(basis.size() == 4);
    // Oracle: Gram determinant of the 4 inputs is nonzero (they are HS-orthogonal)
    for (std::size_t a = 0; a < basis.size(); ++a)
        for (std::size_t b = 0; b < basis.size(); ++b) {
            const cplx g = hs_inner(basis[a], basis[b]);
            CHECK(std::abs(g - (a == b ? cplx(1, 0) : cplx(0, 0))) < 1e-12);
        }
}

TEST_CASE("orthonormal_span of empty input is empty") {
    CHECK(orthonormal_span({}).empty());
}

TEST_CASE("solve_commutant of the full matrix basis is the scalars") {
    std::vector<ComplexMatrix> gens;
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) {
            ComplexMatrix e(2, 2);
            e(i, j) = 1.0;
            gens.push_back(e);
        }
    auto comm = solve_commutant(gens, 2);
    REQUIRE(comm.size() == 1);
    // spanned by I2 (normalized)
    CHECK(std::abs(std::abs(hs_inner(comm[0], ComplexMatrix::identity(2))) - std::sqrt(2.0)) < 1e-10);
}

TEST_CASE("solve_commutant of the identity is everything") {
    auto comm = solve_commutant({ComplexMatrix::identity(3)}, 3);
    CHECK(comm.size() == 9);
}

TEST_CASE("solve_commutant of diag(1,2) is the diagonal algebra") {
    auto comm = solve_commutant({ComplexMatrix::diag({cplx(1, 0), cplx(2, 0)})}, 2);
    REQUIRE(comm.size() == 2);
    for (const auto& c : comm) {
        CHECK(std::abs(c(0, 1)) < 1e-10);
        CHECK(std::abs(c(1, 0)) < 1e-10);
    }
}

TEST_CASE("solve_commutant output commutes and has the right cardinality") {
    Rng rng(55);
    for (int it = 0; it < 5; ++it) {
        const std::size_t d = 4 + it % 3;
        std::vector<ComplexMatrix> gens{ComplexMatrix::random_hermitian(d, rng),
                                        ComplexMatrix::random_hermitian(d, rng)};
        auto comm = solve_commutant(gens, d);
        for (const auto& c : comm)
            for (const auto& g : gens)
                CHECK(commutator_norm(c, g) < 1e-10);
        // cardinality = d^2 - rank of the stacked commutator superoperator
        // oracle: build the superoperator explicitly and count its null space
        ComplexMatrix stacked(gens.size() * d * d, d * d);
        for (std::size_t gi = 0; gi < gens.size(); ++gi) {
            const auto& g = gens[gi];
            // column (k,l): vec(E_kl g - g E_kl)
            for (std::size_t k = 0; k < d; ++k)
                for (std::size_t l = 0; l < d; ++l) {
                    ComplexMatrix e(d, d);
                    e(k, l) = 1.0;
                    auto c = e * g - g * e;
                    for (std::size_t r = 0; r < d; ++r)
                        for (std::size_t s = 0; s < d; ++s)
                            stacked(gi * d * d + r * d + s, k * d + l) = c(r, s);
                }
        }
        auto null = gram_nullspace(stacked);
        CHECK(comm.size() == null.size());
    }
}

TEST_CASE("group_eigenvalues splits on gaps") {
    auto groups = group_eigenvalues({1.0, 1.0 + 1e-9, 2.0, 3.0, 3.0}, 1e-7);
    REQUIRE(groups.size() == 3);
    CHECK(groups[0] == std::pair<std::size_t, std::size_t>{0, 2});
    CHECK(groups[1] == std::pair<std::size_t, std::size_t>{2, 3});
    CHECK(groups[2] == std::pair<std::size_t, std::size_t>{3, 5});
}
