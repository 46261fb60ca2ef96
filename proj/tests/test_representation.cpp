#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "polaris/representation.hpp"
#include "polaris/rng.hpp"
#include "testutil.hpp"

using namespace polaris;

TEST_CASE("reparameterise: stated examples") {
    SUBCASE("zero noise collapses to the mean") {
        Rng rng(1);
        const Matrix mean = testutil::random_matrix(3, 2, rng);
        const Matrix var = testutil::random_matrix(3, 2, rng, 0.1, 2.0);
        const Matrix zero(3, 2);
        const Matrix z = reparameterise(mean, var, zero);
        for (std::size_t i = 0; i < z.size(); ++i)
            CHECK(z.data()[i] == mean.data()[i]);
    }
    SUBCASE("standard-normal passthrough") {
        Rng rng(2);
        const Matrix mean(4, 3);
        const Matrix var = Matrix::filled(4, 3, 1.0);
        const Matrix noise = testutil::random_gaussian_matrix(4, 3, rng);
        const Matrix z = reparameterise(mean, var, noise);
        for (std::size_t i = 0; i < z.size(); ++i)
            CHECK(z.data()[i] == noise.data()[i]);
    }
    SUBCASE("hand-computed values") {
        Matrix mean(1, 2), var(1, 2), noise(1, 2);
        mean.at(0, 0) = 1.0;
        mean.at(0, 1) = 2.0;
        var.at(0, 0) = 4.0;
        var.at(0, 1) = 9.0;
        noise.at(0, 0) = 1.0;
        noise.at(0, 1) = -1.0;
        const Matrix z = reparameterise(mean, var, noise);
        CHECK(z.at(0, 0) == doctest::Approx(3.0));
        CHECK(z.at(0, 1) == doctest::Approx(-1.0));
    }
}

TEST_CASE("reparameterise: error paths") {
    const Matrix a(2, 2), b(2, 3);
    CHECK_THROWS_AS(reparameterise(a, b, a), DimensionError);
    Matrix var = Matrix::filled(2, 2, 1.0);
    var.at(1, 1) = 0.0;
    CHECK_THROWS_AS(reparameterise(a, var, a), DomainError);
    var.at(1, 1) = -1.0;
    CHECK_THROWS_AS(reparameterise(a, var, a), DomainError);
}

TEST_CASE("reparameterise linearity in the noise") {
    Rng rng(3);
    const Matrix var = testutil::random_matrix(5, 4, rng, 0.01, 3.0);
    const Matrix zero(5, 4);
    const Matrix e1 = testutil::random_gaussian_matrix(5, 4, rng);
    const Matrix e2 = testutil::random_gaussian_matrix(5, 4, rng);
    const Matrix mu = testutil::random_matrix(5, 4, rng);
    const double a = 0.7, b = -1.3;

    Matrix combined(5, 4);
    for (std::size_t i = 0; i < combined.size(); ++i)
        combined.data()[i] = a * e1.data()[i] + b * e2.data()[i];

    const Matrix lhs = reparameterise(mu, var, combined);
    const Matrix r1 = reparameterise(zero, var, e1);
    const Matrix r2 = reparameterise(zero, var, e2);
    for (std::size_t i = 0; i < lhs.size(); ++i) {
        const double rhs =
            mu.data()[i] + a * r1.data()[i] + b * r2.data()[i];
        CHECK(lhs.data()[i] == doctest::Approx(rhs).epsilon(1e-12));
    }
}

TEST_CASE("representation set validates the reparameterisation identity") {
    Rng rng(4);
    const Matrix mean = testutil::random_matrix(6, 3, rng);
    const Matrix var = testutil::random_matrix(6, 3, rng, 0.5, 1.5);
    const Matrix noise = testutil::random_gaussian_matrix(6, 3, rng);
    const Matrix sampled = reparameterise(mean, var, noise);

    const RepresentationSet ok =
        RepresentationSet::create(mean, var, sampled, noise);
    CHECK(ok.examples() == 6);
    CHECK(ok.dims() == 3);
    CHECK(ok.noise().has_value());

    Matrix tampered = sampled;
    tampered.at(0, 0) += 1e-13;  // breaks the bit-for-bit identity
    CHECK_THROWS_AS(RepresentationSet::create(mean, var, tampered, noise),
                    DomainError);

    // without noise, no identity to check
    const RepresentationSet no_noise =
        RepresentationSet::create(mean, var, tampered);
    CHECK_FALSE(no_noise.noise().has_value());
}

TEST_CASE("representation set shape and positivity checks") {
    const Matrix m(2, 2);
    const Matrix v = Matrix::filled(2, 2, 1.0);
    CHECK_THROWS_AS(
        RepresentationSet::create(m, Matrix::filled(2, 3, 1.0), m),
        DimensionError);
    CHECK_THROWS_AS(RepresentationSet::create(m, Matrix(2, 2), m),
                    DomainError);  // zero variance
    const RepresentationSet s = RepresentationSet::create(m, v, m);
    CHECK(&s.matrix_for(RepresentationKind::mean) == &s.mean());
    CHECK(&s.matrix_for(RepresentationKind::sampled) == &s.sampled());
    CHECK(&s.matrix_for(RepresentationKind::variance) == &s.variance());
}

TEST_CASE("representation kind round-trips through strings") {
    for (auto kind : {RepresentationKind::mean, RepresentationKind::sampled,
                      RepresentationKind::variance})
        CHECK(representation_kind_from_string(to_string(kind)) == kind);
    CHECK_THROWS_AS(representation_kind_from_string("latent"), DomainError);
}
