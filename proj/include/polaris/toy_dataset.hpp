#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "polaris/matrix.hpp"

namespace polaris {

enum class ToyShape { square, ellipse, triangle };

struct ToyFactors {
    ToyShape shape;
    int scale;  // 0..2
    int x_pos;  // 0..7
    int y_pos;  // 0..7
};

// Procedural 16x16 grayscale shapes, one image per factor combination
// (3 shapes x 3 scales x 8 x-positions x 8 y-positions = 576 examples).
// Pixels are supersampled coverage values in [0, 1].
struct ToyDataset {
    static constexpr std::size_t kSide = 16;
    static constexpr std::size_t kPixels = kSide * kSide;
    static constexpr std::size_t kFullSize = 3 * 3 * 8 * 8;

    Matrix images;  // n x 256
    std::vector<ToyFactors> factors;
    std::vector<int> labels;  // the shape factor, as class labels 0..2

    std::size_t size() const { return images.rows(); }
};

// Rasterisation is deterministic; the seed only drives the subsample
// selection. subsample, when given, must be in [1, 576] and picks distinct
// factor combinations.
ToyDataset make_toy_dataset(std::uint64_t seed,
                            std::optional<std::size_t> subsample = std::nullopt);

}  // namespace polaris
