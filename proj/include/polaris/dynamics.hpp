#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "polaris/matrix.hpp"
#include "polaris/representation.hpp"

namespace polaris {

// Pearson correlation matrix. Columns with variance below 1e-12 are treated
// as degenerate: zero correlation against everything, diagonal forced to 1.
// Requires at least 3 rows.
Matrix correlation_matrix(const Matrix& m);

struct SnapshotEntry {
    std::size_t step;
    RepresentationSet set;
};

// Representation sets extracted from model snapshots with a fixed
// evaluation batch and fixed noise; steps strictly increasing.
struct SnapshotSeries {
    std::vector<SnapshotEntry> entries;
};

struct CorrelationSeries {
    std::vector<std::size_t> steps;
    std::vector<Matrix> matrices;  // d x d per snapshot
    double threshold = 0.2;

    std::size_t dims() const {
        return matrices.empty() ? 0 : matrices.front().rows();
    }

    void save_csv(const std::filesystem::path& path) const;  // step,i,j,corr
};

// Per-snapshot correlation matrices of the mean representation.
CorrelationSeries correlation_series(const SnapshotSeries& series,
                                     double threshold);

// For each dimension, the number of snapshots where the absolute
// correlation with some other dimension strictly exceeds the threshold.
std::vector<std::size_t> count_exceedances(const CorrelationSeries& series,
                                           double threshold);

// Correlations of one dimension against all others (self omitted), ordered
// by step.
std::vector<std::vector<double>> correlation_timeseries(
    const CorrelationSeries& series, std::size_t dim);

}  // namespace polaris
