#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <set>

#include "doctest.h"
#include "polaris/classifier.hpp"
#include "polaris/rng.hpp"
#include "testutil.hpp"

using namespace polaris;

namespace {

Matrix variance_with_columns(const std::vector<std::vector<double>>& cols) {
    const std::size_t rows = cols.front().size();
    Matrix m(rows, cols.size());
    for (std::size_t j = 0; j < cols.size(); ++j)
        for (std::size_t i = 0; i < rows; ++i) m.at(i, j) = cols[j][i];
    return m;
}

}  // namespace

TEST_CASE("classification rules on the three canonical columns") {
    // constant 1.0 -> passive; constant 0.05 -> active (alpha 0.1);
    // alternating 0.02/0.98 -> mixed.
    const Matrix variance = variance_with_columns({
        {1.0, 1.0, 1.0, 1.0},
        {0.05, 0.05, 0.05, 0.05},
        {0.02, 0.98, 0.02, 0.98},
    });
    const VariableAssignment a =
        classify_variables(variance, ClassifierConfig{0.1});
    CHECK(a.type_of(0) == VariableType::passive);
    CHECK(a.type_of(1) == VariableType::active);
    CHECK(a.type_of(2) == VariableType::mixed);
    CHECK(a.dims[0].sigma_mean == doctest::Approx(1.0));
    CHECK(a.dims[1].sigma_mean == doctest::Approx(0.05));
}

TEST_CASE("band membership is inclusive at the boundary") {
    // sigma mean exactly 1 + alpha with zero variance stays passive;
    // dyadic values so the band edge is hit exactly.
    const Matrix variance =
        variance_with_columns({{1.125, 1.125}, {0.125, 0.125}});
    const VariableAssignment a =
        classify_variables(variance, ClassifierConfig{0.125});
    CHECK(a.type_of(0) == VariableType::passive);
    CHECK(a.type_of(1) == VariableType::active);
}

TEST_CASE("classifier config invariants") {
    CHECK_THROWS_AS(classify_variables(Matrix::filled(2, 1, 1.0),
                                       ClassifierConfig{0.5}),
                    DomainError);
    CHECK_THROWS_AS(classify_variables(Matrix::filled(2, 1, 1.0),
                                       ClassifierConfig{-0.1}),
                    DomainError);
    // alpha = 0 is legal (closed bands)
    const VariableAssignment a = classify_variables(
        Matrix::filled(3, 1, 1.0), ClassifierConfig{0.0});
    CHECK(a.type_of(0) == VariableType::passive);
    CHECK_THROWS_AS(classify_variables(Matrix::filled(1, 1, 1.0),
                                       ClassifierConfig{0.1}),
                    InsufficientDataError);
    CHECK_THROWS_AS(classify_variables(Matrix::filled(2, 1, 0.0),
                                       ClassifierConfig{0.1}),
                    DomainError);
}

TEST_CASE("determinism and partition") {
    Rng rng(21);
    const Matrix variance = testutil::random_matrix(50, 8, rng, 0.01, 1.2);
    const VariableAssignment a1 =
        classify_variables(variance, ClassifierConfig{0.1});
    const VariableAssignment a2 =
        classify_variables(variance, ClassifierConfig{0.1});
    CHECK(a1.to_json() == a2.to_json());
    const AssignmentCounts c = summarise_assignment(a1);
    CHECK(c.n_active + c.n_passive + c.n_mixed == 8);
}

TEST_CASE("mixed set never grows as alpha increases") {
    Rng rng(22);
    for (int trial = 0; trial < 20; ++trial) {
        const Matrix variance =
            testutil::random_matrix(40, 6, rng, 0.001, 1.3);
        std::set<std::size_t> prev_decided;
        for (double alpha : {0.02, 0.05, 0.1, 0.2, 0.4}) {
            const VariableAssignment a =
                classify_variables(variance, ClassifierConfig{alpha});
            std::set<std::size_t> decided;
            for (const DimensionRecord& rec : a.dims)
                if (rec.type != VariableType::mixed) decided.insert(rec.index);
            for (std::size_t idx : prev_decided) CHECK(decided.count(idx) == 1);
            prev_decided = decided;
        }
    }
}

TEST_CASE("select_subset slices positionally, uniformly across matrices") {
    Rng rng(23);
    const std::size_t n = 10, d = 3;
    Matrix variance(n, d);
    for (std::size_t i = 0; i < n; ++i) {
        variance.at(i, 0) = 0.02;                    // active
        variance.at(i, 1) = 1.0;                     // passive
        variance.at(i, 2) = i % 2 == 0 ? 0.02 : 1.0; // mixed
    }
    const Matrix mean = testutil::random_matrix(n, d, rng);
    const Matrix noise = testutil::random_gaussian_matrix(n, d, rng);
    const Matrix sampled = reparameterise(mean, variance, noise);
    const RepresentationSet set =
        RepresentationSet::create(mean, variance, sampled, noise);
    const VariableAssignment a =
        classify_variables(variance, ClassifierConfig{0.1});
    REQUIRE(a.type_of(0) == VariableType::active);
    REQUIRE(a.type_of(1) == VariableType::passive);
    REQUIRE(a.type_of(2) == VariableType::mixed);

    SUBCASE("all types is the identity") {
        const RepresentationSet full = select_subset(
            set, a,
            {VariableType::active, VariableType::passive, VariableType::mixed});
        CHECK(full.dims() == d);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < d; ++j)
                CHECK(full.mean().at(i, j) == mean.at(i, j));
    }
    SUBCASE("empty selection throws") {
        CHECK_THROWS_AS(select_subset(set, a, {}), EmptySubsetError);
    }
    SUBCASE("active+mixed keeps columns 0 and 2") {
        const RepresentationSet sub = select_subset(
            set, a, {VariableType::active, VariableType::mixed});
        REQUIRE(sub.dims() == 2);
        for (std::size_t i = 0; i < n; ++i) {
            CHECK(sub.mean().at(i, 0) == mean.at(i, 0));
            CHECK(sub.mean().at(i, 1) == mean.at(i, 2));
            CHECK(sub.sampled().at(i, 0) == sampled.at(i, 0));
            CHECK(sub.sampled().at(i, 1) == sampled.at(i, 2));
            CHECK(sub.variance().at(i, 1) == variance.at(i, 2));
        }
        CHECK(sub.noise().has_value());
    }
    SUBCASE("dimension mismatch is rejected") {
        VariableAssignment short_a = a;
        short_a.dims.pop_back();
        CHECK_THROWS_AS(select_subset(set, short_a, {VariableType::active}),
                        DimensionError);
    }
}

TEST_CASE("summarise_assignment counts") {
    Matrix variance(2, 4);
    for (std::size_t i = 0; i < 2; ++i) {
        variance.at(i, 0) = 0.03;  // active
        variance.at(i, 1) = 1.0;   // passive
        variance.at(i, 2) = i == 0 ? 0.02 : 1.0;  // mixed
        variance.at(i, 3) = 0.05;  // active
    }
    const VariableAssignment a =
        classify_variables(variance, ClassifierConfig{0.1});
    const AssignmentCounts c = summarise_assignment(a);
    CHECK(c.n_active == 2);
    CHECK(c.n_passive == 1);
    CHECK(c.n_mixed == 1);
}

TEST_CASE("assignment json round-trip and digest stability") {
    Matrix variance(3, 2);
    for (std::size_t i = 0; i < 3; ++i) {
        variance.at(i, 0) = 1.0;
        variance.at(i, 1) = 0.05;
    }
    const VariableAssignment a =
        classify_variables(variance, ClassifierConfig{0.1});
    const std::string json = a.to_json();
    CHECK(json.find("\"alpha\":0.1") != std::string::npos);
    CHECK(json.find("\"type\":\"passive\"") != std::string::npos);
    const VariableAssignment back = VariableAssignment::from_json(json);
    CHECK(back.to_json() == json);
    CHECK(back.digest() == a.digest());
    CHECK(a.digest().size() == 16);
    CHECK_THROWS_AS(VariableAssignment::from_json("{banana"), ParseError);

    // tampered type is caught by the re-derivation check
    std::string tampered = json;
    const auto pos = tampered.find("\"passive\"");
    REQUIRE(pos != std::string::npos);
    tampered.replace(pos, 9, "\"active\"");
    CHECK_THROWS_AS(VariableAssignment::from_json(tampered), ParseError);
}
