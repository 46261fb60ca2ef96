#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "polaris/error.hpp"

namespace polaris {

// Dense row-major matrix of doubles. Rows index examples, columns index
// latent dimensions. Immutable by convention once handed to another module.
class Matrix {
  public:
    Matrix() = default;  // empty 0x0, for default-constructed members

    Matrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(check_shape(rows, cols), 0.0) {}

    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
        : rows_(rows), cols_(cols), data_(std::move(data)) {
        if (data_.size() != check_shape(rows, cols))
            throw DimensionError("matrix: data length " +
                                 std::to_string(data_.size()) +
                                 " does not equal rows*cols");
    }

    static Matrix filled(std::size_t rows, std::size_t cols, double v) {
        Matrix m(rows, cols);
        for (double& x : m.data_) x = v;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& at(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double at(std::size_t i, std::size_t j) const {
        return data_[i * cols_ + j];
    }

    double* row(std::size_t i) { return data_.data() + i * cols_; }
    const double* row(std::size_t i) const { return data_.data() + i * cols_; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    bool same_shape(const Matrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }

    // Throws DomainError naming the first non-finite entry.
    void ensure_finite(const std::string& what) const;

    Matrix select_columns(const std::vector<std::size_t>& cols) const;

  private:
    static std::size_t check_shape(std::size_t rows, std::size_t cols) {
        if (rows < 1 || cols < 1)
            throw DimensionError("matrix: rows and cols must be >= 1, got " +
                                 std::to_string(rows) + "x" +
                                 std::to_string(cols));
        return rows * cols;
    }

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

enum class MatrixFormat { csv, binary };

// CSV: header row of dimension names, then decimal values, comma-separated,
// LF line endings. Values are printed with 17 significant digits so the
// round-trip is lossless for doubles.
// Binary: magic "RPRM", u16 version (1), u32 rows, u32 cols, then rows*cols
// little-endian IEEE-754 doubles in row-major order.
Matrix load_matrix(const std::filesystem::path& path, MatrixFormat format);
void save_matrix(const Matrix& m, const std::filesystem::path& path,
                 MatrixFormat format);

struct ColumnStats {
    std::vector<double> mean;
    std::vector<double> variance;  // unbiased, n-1 denominator
};

// Requires rows >= 2.
ColumnStats column_stats(const Matrix& m);

}  // namespace polaris
