#include "polaris/matrix.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <system_error>

namespace polaris {

namespace {

constexpr char kBinaryMagic[4] = {'R', 'P', 'R', 'M'};
constexpr std::uint16_t kBinaryVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "matrix binary i/o assumes a little-endian host");

std::string cell_name(std::size_t row, std::size_t col) {
    return "row " + std::to_string(row) + ", column " + std::to_string(col);
}

double parse_cell(const std::string& cell, std::size_t row, std::size_t col) {
    double v = 0.0;
    const char* first = cell.data();
    const char* last = first + cell.size();
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last)
        throw ParseError("csv: non-numeric cell at " + cell_name(row, col) +
                         ": '" + cell + "'");
    if (!std::isfinite(v))
        throw ParseError("csv: non-finite value at " + cell_name(row, col));
    return v;
}

Matrix load_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());

    std::string line;
    if (!std::getline(in, line))
        throw ParseError("csv: empty file: " + path.string());
    if (!line.empty() && line.back() == '\r') line.pop_back();

    std::size_t cols = 1;
    for (char ch : line)
        if (ch == ',') ++cols;

    std::vector<double> data;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() && in.peek() == std::ifstream::traits_type::eof())
            break;  // trailing newline
        std::size_t col = 0;
        std::size_t start = 0;
        while (true) {
            const std::size_t comma = line.find(',', start);
            const std::string cell =
                line.substr(start, comma == std::string::npos
                                       ? std::string::npos
                                       : comma - start);
            if (col >= cols)
                throw ParseError("csv: ragged row " + std::to_string(row) +
                                 " has more than " + std::to_string(cols) +
                                 " columns");
            data.push_back(parse_cell(cell, row, col));
            ++col;
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (col != cols)
            throw ParseError("csv: ragged row " + std::to_string(row) +
                             " has " + std::to_string(col) + " columns, expected " +
                             std::to_string(cols));
        ++row;
    }
    if (row == 0) throw ParseError("csv: no data rows in " + path.string());
    return Matrix(row, cols, std::move(data));
}

void save_csv(const Matrix& m, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);  // binary: keep LF endings
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    for (std::size_t j = 0; j < m.cols(); ++j) {
        if (j) out << ',';
        out << 'z' << j;
    }
    out << '\n';
    char buf[64];
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            if (j) out << ',';
            const auto res = std::to_chars(buf, buf + sizeof(buf),
                                           m.at(i, j),
                                           std::chars_format::general, 17);
            out.write(buf, res.ptr - buf);
        }
        out << '\n';
    }
    if (!out) throw IoError("write failed: " + path.string());
}

template <typename T>
void read_raw(std::ifstream& in, T* out, std::size_t count,
              const std::string& what) {
    in.read(reinterpret_cast<char*>(out),
            static_cast<std::streamsize>(sizeof(T) * count));
    if (!in) throw ParseError("binary matrix: truncated " + what);
}

Matrix load_binary(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());

    char magic[4];
    read_raw(in, magic, 4, "magic");
    if (std::memcmp(magic, kBinaryMagic, 4) != 0)
        throw ParseError("binary matrix: bad magic in " + path.string());
    std::uint16_t version = 0;
    read_raw(in, &version, 1, "version");
    if (version != kBinaryVersion)
        throw ParseError("binary matrix: unsupported version " +
                         std::to_string(version));
    std::uint32_t rows = 0, cols = 0;
    read_raw(in, &rows, 1, "row count");
    read_raw(in, &cols, 1, "column count");
    if (rows < 1 || cols < 1)
        throw ParseError("binary matrix: degenerate shape " +
                         std::to_string(rows) + "x" + std::to_string(cols));

    std::vector<double> data(static_cast<std::size_t>(rows) * cols);
    read_raw(in, data.data(), data.size(), "payload");
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (!std::isfinite(data[i]))
            throw ParseError("binary matrix: non-finite value at " +
                             cell_name(i / cols, i % cols));
    }
    return Matrix(rows, cols, std::move(data));
}

void save_binary(const Matrix& m, const std::filesystem::path& path) {
    if (m.rows() > std::numeric_limits<std::uint32_t>::max() ||
        m.cols() > std::numeric_limits<std::uint32_t>::max())
        throw DomainError("binary matrix: shape exceeds u32");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(kBinaryMagic, 4);
    const std::uint16_t version = kBinaryVersion;
    const std::uint32_t rows = static_cast<std::uint32_t>(m.rows());
    const std::uint32_t cols = static_cast<std::uint32_t>(m.cols());
    out.write(reinterpret_cast<const char*>(&version), sizeof(version));
    out.write(reinterpret_cast<const char*>(&rows), sizeof(rows));
    out.write(reinterpret_cast<const char*>(&cols), sizeof(cols));
    out.write(reinterpret_cast<const char*>(m.data()),
              static_cast<std::streamsize>(m.size() * sizeof(double)));
    if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace

void Matrix::ensure_finite(const std::string& what) const {
    for (std::size_t i = 0; i < data_.size(); ++i) {
        if (!std::isfinite(data_[i]))
            throw DomainError(what + ": non-finite value at " +
                              cell_name(i / cols_, i % cols_));
    }
}

Matrix Matrix::select_columns(const std::vector<std::size_t>& cols) const {
    if (cols.empty()) throw DimensionError("select_columns: empty selection");
    Matrix out(rows_, cols.size());
    for (std::size_t j = 0; j < cols.size(); ++j) {
        if (cols[j] >= cols_)
            throw IndexError("select_columns: column " +
                             std::to_string(cols[j]) + " out of range");
    }
    for (std::size_t i = 0; i < rows_; ++i) {
        const double* src = row(i);
        double* dst = out.row(i);
        for (std::size_t j = 0; j < cols.size(); ++j) dst[j] = src[cols[j]];
    }
    return out;
}

Matrix load_matrix(const std::filesystem::path& path, MatrixFormat format) {
    return format == MatrixFormat::csv ? load_csv(path) : load_binary(path);
}

void save_matrix(const Matrix& m, const std::filesystem::path& path,
                 MatrixFormat format) {
    if (m.empty()) throw DimensionError("save_matrix: empty matrix");
    if (format == MatrixFormat::csv)
        save_csv(m, path);
    else
        save_binary(m, path);
}

ColumnStats column_stats(const Matrix& m) {
    if (m.rows() < 2)
        throw InsufficientDataError(
            "column_stats: need at least 2 rows, got " +
            std::to_string(m.rows()));
    const std::size_t n = m.rows(), d = m.cols();
    ColumnStats s;
    s.mean.assign(d, 0.0);
    s.variance.assign(d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double* r = m.row(i);
        for (std::size_t j = 0; j < d; ++j) s.mean[j] += r[j];
    }
    for (std::size_t j = 0; j < d; ++j) s.mean[j] /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double* r = m.row(i);
        for (std::size_t j = 0; j < d; ++j) {
            const double dev = r[j] - s.mean[j];
            s.variance[j] += dev * dev;
        }
    }
    for (std::size_t j = 0; j < d; ++j)
        s.variance[j] /= static_cast<double>(n - 1);
    return s;
}

}  // namespace polaris
