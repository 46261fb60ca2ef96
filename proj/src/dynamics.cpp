#include "polaris/dynamics.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

namespace polaris {

Matrix correlation_matrix(const Matrix& m) {
    if (m.rows() < 3)
        throw InsufficientDataError("correlation_matrix: need >= 3 rows");
    const std::size_t n = m.rows(), d = m.cols();
    const ColumnStats stats = column_stats(m);

    std::vector<bool> degenerate(d);
    std::vector<double> inv_sd(d, 0.0);
    for (std::size_t j = 0; j < d; ++j) {
        degenerate[j] = stats.variance[j] < 1e-12;
        if (!degenerate[j]) inv_sd[j] = 1.0 / std::sqrt(stats.variance[j]);
    }

    Matrix corr(d, d);
    for (std::size_t a = 0; a < d; ++a) {
        corr.at(a, a) = 1.0;
        for (std::size_t b2 = a + 1; b2 < d; ++b2) {
            double r = 0.0;
            if (!degenerate[a] && !degenerate[b2]) {
                double cov = 0.0;
                for (std::size_t i = 0; i < n; ++i)
                    cov += (m.at(i, a) - stats.mean[a]) *
                           (m.at(i, b2) - stats.mean[b2]);
                cov /= static_cast<double>(n - 1);
                r = cov * inv_sd[a] * inv_sd[b2];
                if (r > 1.0) r = 1.0;
                if (r < -1.0) r = -1.0;
            }
            corr.at(a, b2) = r;
            corr.at(b2, a) = r;
        }
    }
    return corr;
}

CorrelationSeries correlation_series(const SnapshotSeries& series,
                                     double threshold) {
    if (series.entries.size() < 2)
        throw InsufficientDataError("correlation_series: need >= 2 snapshots");
    CorrelationSeries out;
    out.threshold = threshold;
    std::size_t prev_step = 0;
    for (std::size_t i = 0; i < series.entries.size(); ++i) {
        const SnapshotEntry& e = series.entries[i];
        if (i > 0 && e.step <= prev_step)
            throw DomainError("correlation_series: steps must increase");
        prev_step = e.step;
        out.steps.push_back(e.step);
        out.matrices.push_back(correlation_matrix(e.set.mean()));
    }
    return out;
}

std::vector<std::size_t> count_exceedances(const CorrelationSeries& series,
                                           double threshold) {
    if (!(threshold > 0.0) || !(threshold < 1.0))
        throw DomainError("count_exceedances: threshold must be in (0, 1)");
    const std::size_t d = series.dims();
    std::vector<std::size_t> counts(d, 0);
    for (const Matrix& corr : series.matrices) {
        for (std::size_t j = 0; j < d; ++j) {
            double peak = 0.0;
            for (std::size_t k = 0; k < d; ++k) {
                if (k == j) continue;
                peak = std::max(peak, std::abs(corr.at(j, k)));
            }
            if (peak > threshold) ++counts[j];
        }
    }
    return counts;
}

std::vector<std::vector<double>> correlation_timeseries(
    const CorrelationSeries& series, std::size_t dim) {
    const std::size_t d = series.dims();
    if (dim >= d)
        throw IndexError("correlation_timeseries: dimension " +
                         std::to_string(dim) + " out of range");
    std::vector<std::vector<double>> out;
    out.reserve(series.matrices.size());
    for (const Matrix& corr : series.matrices) {
        std::vector<double> row;
        row.reserve(d - 1);
        for (std::size_t k = 0; k < d; ++k)
            if (k != dim) row.push_back(corr.at(dim, k));
        out.push_back(std::move(row));
    }
    return out;
}

void CorrelationSeries::save_csv(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << "step,i,j,corr\n";
    char buf[64];
    for (std::size_t s = 0; s < matrices.size(); ++s) {
        const Matrix& corr = matrices[s];
        for (std::size_t i = 0; i < corr.rows(); ++i) {
            for (std::size_t j = 0; j < corr.cols(); ++j) {
                out << steps[s] << ',' << i << ',' << j << ',';
                const auto res =
                    std::to_chars(buf, buf + sizeof(buf), corr.at(i, j),
                                  std::chars_format::general, 17);
                out.write(buf, res.ptr - buf);
                out << '\n';
            }
        }
    }
    if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace polaris
