#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstring>
#include <set>

#include "doctest.h"
#include "polaris/manifest.hpp"
#include "polaris/toy_dataset.hpp"

using namespace polaris;

TEST_CASE("full factorial has 576 distinct examples in [0,1]") {
    const ToyDataset ds = make_toy_dataset(0);
    REQUIRE(ds.size() == 576);
    REQUIRE(ds.images.cols() == 256);
    std::set<std::string> fingerprints;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        for (std::size_t j = 0; j < 256; ++j) {
            CHECK(ds.images.at(i, j) >= 0.0);
            CHECK(ds.images.at(i, j) <= 1.0);
        }
        fingerprints.insert(
            hash_bytes(ds.images.row(i), 256 * sizeof(double)));
    }
    CHECK(fingerprints.size() == 576);

    // every image draws something
    for (std::size_t i = 0; i < ds.size(); ++i) {
        double total = 0.0;
        for (std::size_t j = 0; j < 256; ++j) total += ds.images.at(i, j);
        CHECK(total > 1.0);
    }
}

TEST_CASE("same seed gives bit-identical pixels") {
    const ToyDataset a = make_toy_dataset(42);
    const ToyDataset b = make_toy_dataset(42);
    CHECK(std::memcmp(a.images.data(), b.images.data(),
                      a.images.size() * 8) == 0);
}

TEST_CASE("subsample picks distinct factor combinations") {
    const ToyDataset ds = make_toy_dataset(7, 100);
    REQUIRE(ds.size() == 100);
    std::set<std::tuple<int, int, int, int>> combos;
    for (const ToyFactors& f : ds.factors)
        combos.insert({static_cast<int>(f.shape), f.scale, f.x_pos, f.y_pos});
    CHECK(combos.size() == 100);

    // deterministic for a fixed seed, different across seeds
    const ToyDataset same = make_toy_dataset(7, 100);
    CHECK(std::memcmp(ds.images.data(), same.images.data(),
                      ds.images.size() * 8) == 0);
    CHECK_THROWS_AS(make_toy_dataset(7, 0), DomainError);
    CHECK_THROWS_AS(make_toy_dataset(7, 577), DomainError);
}

TEST_CASE("labels follow the shape factor") {
    const ToyDataset ds = make_toy_dataset(0);
    std::set<int> labels(ds.labels.begin(), ds.labels.end());
    CHECK(labels == std::set<int>{0, 1, 2});
    for (std::size_t i = 0; i < ds.size(); ++i)
        CHECK(ds.labels[i] == static_cast<int>(ds.factors[i].shape));
}
