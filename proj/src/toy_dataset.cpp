#include "polaris/toy_dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "polaris/rng.hpp"

namespace polaris {

namespace {

constexpr int kSupersample = 4;  // 4x4 coverage samples per pixel

// Shape half-extents per scale level, in pixels.
constexpr double kHalfExtent[3] = {2.2, 3.1, 4.0};

// Position grid: centers spaced so the largest shape stays inside the canvas.
double center_for(int pos) {
    return 4.0 + static_cast<double>(pos) * (8.0 / 7.0);
}

bool inside(ToyShape shape, double px, double py, double cx, double cy,
            double e) {
    const double dx = px - cx;
    const double dy = py - cy;
    switch (shape) {
        case ToyShape::square:
            return std::abs(dx) <= e && std::abs(dy) <= e;
        case ToyShape::ellipse: {
            const double rx = e;
            const double ry = 0.65 * e;
            return (dx * dx) / (rx * rx) + (dy * dy) / (ry * ry) <= 1.0;
        }
        case ToyShape::triangle: {
            // isoceles triangle: apex up
            const double x0 = cx, y0 = cy - e;
            const double x1 = cx - e, y1 = cy + e;
            const double x2 = cx + e, y2 = cy + e;
            const auto edge = [&](double ax, double ay, double bx, double by) {
                return (bx - ax) * (py - ay) - (by - ay) * (px - ax);
            };
            const double d0 = edge(x0, y0, x1, y1);
            const double d1 = edge(x1, y1, x2, y2);
            const double d2 = edge(x2, y2, x0, y0);
            const bool neg = (d0 < 0) || (d1 < 0) || (d2 < 0);
            const bool pos = (d0 > 0) || (d1 > 0) || (d2 > 0);
            return !(neg && pos);
        }
    }
    return false;
}

void rasterise(ToyShape shape, int scale, int x_pos, int y_pos, double* out) {
    const double cx = center_for(x_pos);
    const double cy = center_for(y_pos);
    const double e = kHalfExtent[scale];
    const double step = 1.0 / kSupersample;
    for (std::size_t py = 0; py < ToyDataset::kSide; ++py) {
        for (std::size_t px = 0; px < ToyDataset::kSide; ++px) {
            int hits = 0;
            for (int sy = 0; sy < kSupersample; ++sy) {
                for (int sx = 0; sx < kSupersample; ++sx) {
                    const double sample_x =
                        static_cast<double>(px) + (sx + 0.5) * step;
                    const double sample_y =
                        static_cast<double>(py) + (sy + 0.5) * step;
                    if (inside(shape, sample_x, sample_y, cx, cy, e)) ++hits;
                }
            }
            out[py * ToyDataset::kSide + px] =
                static_cast<double>(hits) /
                (kSupersample * kSupersample);
        }
    }
}

}  // namespace

ToyDataset make_toy_dataset(std::uint64_t seed,
                            std::optional<std::size_t> subsample) {
    if (subsample && (*subsample < 1 || *subsample > ToyDataset::kFullSize))
        throw DomainError("toy dataset: subsample must be in [1, 576]");

    std::vector<std::size_t> combo_ids(ToyDataset::kFullSize);
    std::iota(combo_ids.begin(), combo_ids.end(), 0);
    if (subsample && *subsample < ToyDataset::kFullSize) {
        Rng rng(derive_seed(seed, 11));
        // seeded partial Fisher-Yates, then keep the prefix
        for (std::size_t i = 0; i < *subsample; ++i) {
            const std::size_t j =
                i + static_cast<std::size_t>(rng.below(combo_ids.size() - i));
            std::swap(combo_ids[i], combo_ids[j]);
        }
        combo_ids.resize(*subsample);
        std::sort(combo_ids.begin(), combo_ids.end());
    }

    ToyDataset ds;
    ds.images = Matrix(combo_ids.size(), ToyDataset::kPixels);
    ds.factors.reserve(combo_ids.size());
    ds.labels.reserve(combo_ids.size());
    for (std::size_t row = 0; row < combo_ids.size(); ++row) {
        std::size_t id = combo_ids[row];
        const int y_pos = static_cast<int>(id % 8);
        id /= 8;
        const int x_pos = static_cast<int>(id % 8);
        id /= 8;
        const int scale = static_cast<int>(id % 3);
        id /= 3;
        const auto shape = static_cast<ToyShape>(id);
        rasterise(shape, scale, x_pos, y_pos, ds.images.row(row));
        ds.factors.push_back({shape, scale, x_pos, y_pos});
        ds.labels.push_back(static_cast<int>(shape));
    }
    return ds;
}

}  // namespace polaris
