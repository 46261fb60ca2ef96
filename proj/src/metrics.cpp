#include "polaris/metrics.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>

#include "json.hpp"
#include "polaris/kernels.hpp"

namespace polaris {

namespace {

using EigenMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

EigenMatrix to_eigen(const Covariance& cov) {
    const std::size_t d = cov.dim();
    EigenMatrix m(d, d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) m(i, j) = cov.at(i, j);
    return m;
}

// Cholesky log-determinant with a single jitter retry on rank deficiency.
double cov_log_det(const Covariance& cov) {
    EigenMatrix m = to_eigen(cov);
    for (int attempt = 0; attempt < 2; ++attempt) {
        Eigen::LLT<EigenMatrix> llt(m);
        if (llt.info() == Eigen::Success) {
            double log_det = 0.0;
            const auto& l = llt.matrixLLT();
            bool ok = true;
            for (Eigen::Index i = 0; i < l.rows(); ++i) {
                if (!(l(i, i) > 0.0)) {
                    ok = false;
                    break;
                }
                log_det += std::log(l(i, i));
            }
            if (ok) return 2.0 * log_det;
        }
        if (attempt == 0) {
            double mean_diag = 0.0;
            for (Eigen::Index i = 0; i < m.rows(); ++i) mean_diag += m(i, i);
            mean_diag /= static_cast<double>(m.rows());
            for (Eigen::Index i = 0; i < m.rows(); ++i)
                m(i, i) += 1e-10 * mean_diag;
        }
    }
    throw SingularCovarianceError(
        "covariance is not positive definite (even after jitter)");
}

}  // namespace

Covariance::Covariance(std::size_t dim, std::vector<double> values)
    : dim_(dim), values_(std::move(values)) {
    if (dim < 1) throw DimensionError("covariance: dim must be >= 1");
    if (values_.size() != dim * dim)
        throw DimensionError("covariance: values length mismatch");
    for (std::size_t i = 0; i < dim; ++i) {
        if (!(values_[i * dim + i] > 0.0))
            throw DomainError("covariance: nonpositive diagonal entry at " +
                              std::to_string(i));
        for (std::size_t j = 0; j < i; ++j) {
            const double a = values_[i * dim + j];
            const double b = values_[j * dim + i];
            if (!std::isfinite(a) || !std::isfinite(b))
                throw DomainError("covariance: non-finite entry");
            const double scale =
                std::max({std::abs(a), std::abs(b), 1e-300});
            if (std::abs(a - b) > 1e-12 * std::max(scale, 1.0))
                throw DomainError("covariance: not symmetric at (" +
                                  std::to_string(i) + "," +
                                  std::to_string(j) + ")");
        }
    }
}

Covariance sample_covariance(const Matrix& m) {
    if (m.rows() < 2)
        throw InsufficientDataError("sample_covariance: need >= 2 rows");
    const std::size_t n = m.rows(), d = m.cols();
    const ColumnStats stats = column_stats(m);

    Matrix centered(n, d);
    for (std::size_t i = 0; i < n; ++i) {
        const double* src = m.row(i);
        double* dst = centered.row(i);
        for (std::size_t j = 0; j < d; ++j) dst[j] = src[j] - stats.mean[j];
    }

    std::vector<double> c(d * d, 0.0);
    kernels::ops().gemm_tn(d, d, n, centered.data(), d, centered.data(), d,
                           c.data(), d, 0.0);
    const double scale = 1.0 / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < d; ++i) {
        c[i * d + i] *= scale;
        for (std::size_t j = i + 1; j < d; ++j) {
            // symmetrise: average with the transpose
            const double v = 0.5 * (c[i * d + j] + c[j * d + i]) * scale;
            c[i * d + j] = v;
            c[j * d + i] = v;
        }
    }
    return Covariance(d, std::move(c));
}

double gaussian_tc(const Covariance& cov) {
    double sum_log_diag = 0.0;
    for (std::size_t j = 0; j < cov.dim(); ++j)
        sum_log_diag += std::log(cov.at(j, j));
    return 0.5 * (sum_log_diag - cov_log_det(cov));
}

double gaussian_tc_raw(const Covariance& cov) {
    const std::size_t d = cov.dim();
    // KL(N(0, Sigma) || N(0, diag(Sigma))), written out in full:
    // (log det(diag) - log det(Sigma) + tr(diag^-1 Sigma) - d) / 2.
    double log_det_diag = 0.0;
    double trace_term = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        log_det_diag += std::log(cov.at(j, j));
        trace_term += cov.at(j, j) / cov.at(j, j);
    }
    const double log_det = cov_log_det(cov);
    return 0.5 * (log_det_diag - log_det + trace_term -
                  static_cast<double>(d));
}

std::vector<std::size_t> discretise(const std::vector<double>& column,
                                    std::size_t bins) {
    if (bins < 2) throw DomainError("discretise: need at least 2 bins");
    if (column.empty()) throw DomainError("discretise: empty column");
    double lo = column[0], hi = column[0];
    for (double v : column) {
        if (!std::isfinite(v)) throw DomainError("discretise: non-finite value");
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    std::vector<std::size_t> out(column.size(), 0);
    if (hi == lo) return out;  // constant column: everything in bin 0
    const double width = (hi - lo) / static_cast<double>(bins);
    for (std::size_t i = 0; i < column.size(); ++i) {
        auto idx = static_cast<long>((column[i] - lo) / width);
        if (idx < 0) idx = 0;
        if (idx >= static_cast<long>(bins)) idx = static_cast<long>(bins) - 1;
        out[i] = static_cast<std::size_t>(idx);
    }
    return out;
}

Histogram2D Histogram2D::from_indices(const std::vector<std::size_t>& x,
                                      const std::vector<std::size_t>& y) {
    if (x.size() != y.size())
        throw DimensionError("histogram: index vectors differ in length");
    if (x.empty()) throw DomainError("histogram: empty input");
    Histogram2D h;
    h.bins_x = *std::max_element(x.begin(), x.end()) + 1;
    h.bins_y = *std::max_element(y.begin(), y.end()) + 1;
    h.joint.assign(h.bins_x * h.bins_y, 0);
    h.marginal_x.assign(h.bins_x, 0);
    h.marginal_y.assign(h.bins_y, 0);
    h.n = x.size();
    for (std::size_t i = 0; i < x.size(); ++i) {
        ++h.joint[x[i] * h.bins_y + y[i]];
        ++h.marginal_x[x[i]];
        ++h.marginal_y[y[i]];
    }
    return h;
}

double pairwise_mi(const Histogram2D& h) {
    const double n = static_cast<double>(h.n);
    const auto term = [&](std::size_t i, std::size_t j) {
        if (i >= h.bins_x || j >= h.bins_y) return 0.0;
        const std::uint64_t c = h.joint[i * h.bins_y + j];
        if (c == 0) return 0.0;
        const double num = n * static_cast<double>(c);
        const double den = static_cast<double>(h.marginal_x[i]) *
                           static_cast<double>(h.marginal_y[j]);
        return (static_cast<double>(c) / n) * std::log(num / den);
    };
    // Cells are summed in transpose-symmetric pairs so MI(x, y) and
    // MI(y, x) round identically.
    const std::size_t side = std::max(h.bins_x, h.bins_y);
    double mi = 0.0;
    for (std::size_t i = 0; i < side; ++i) {
        mi += term(i, i);
        for (std::size_t j = i + 1; j < side; ++j)
            mi += term(i, j) + term(j, i);
    }
    return mi < 0.0 ? 0.0 : mi;  // clip the tiny negative rounding residue
}

double pairwise_mi(const std::vector<std::size_t>& x,
                   const std::vector<std::size_t>& y) {
    return pairwise_mi(Histogram2D::from_indices(x, y));
}

double averaged_mi(const Matrix& m, std::size_t bins) {
    const std::size_t k = m.cols();
    if (k < 2) throw DomainError("averaged_mi: need at least 2 columns");
    std::vector<std::vector<std::size_t>> binned(k);
    std::vector<double> col(m.rows());
    for (std::size_t j = 0; j < k; ++j) {
        for (std::size_t i = 0; i < m.rows(); ++i) col[i] = m.at(i, j);
        binned[j] = discretise(col, bins);
    }
    // MI is symmetric, so the ordered-pair average equals the unordered one;
    // accumulation runs in fixed index order for reproducibility.
    double total = 0.0;
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i + 1; j < k; ++j)
            total += 2.0 * pairwise_mi(binned[i], binned[j]);
    return total / (static_cast<double>(k) * static_cast<double>(k) -
                    static_cast<double>(k));
}

double effective_rank(const Matrix& m) {
    if (m.rows() < 2)
        throw InsufficientDataError("effective_rank: need >= 2 rows");
    const std::size_t n = m.rows(), d = m.cols();
    const ColumnStats stats = column_stats(m);
    EigenMatrix centered(n, d);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j)
            centered(i, j) = m.at(i, j) - stats.mean[j];

    Eigen::BDCSVD<EigenMatrix> svd(centered);
    if (svd.info() != Eigen::Success)
        throw NumericalError("effective_rank: SVD failed");
    const auto& s = svd.singularValues();
    double total = 0.0;
    for (Eigen::Index i = 0; i < s.size(); ++i) total += s(i);
    if (total <= 0.0) return 1.0;  // all-zero spectrum
    double entropy = 0.0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        const double p = s(i) / total;
        if (p > 0.0) entropy -= p * std::log(p);
    }
    return std::exp(entropy);
}

std::string subset_label(const std::set<VariableType>& types) {
    if (types.size() == 3) return "full";
    std::string label;
    // canonical order: active, mixed, passive
    for (VariableType t :
         {VariableType::active, VariableType::mixed, VariableType::passive}) {
        if (!types.count(t)) continue;
        if (!label.empty()) label += '+';
        label += to_string(t);
    }
    if (label.empty()) throw DomainError("subset_label: empty type set");
    return label;
}

std::set<VariableType> subset_from_label(const std::string& label) {
    if (label == "full")
        return {VariableType::active, VariableType::mixed,
                VariableType::passive};
    std::set<VariableType> types;
    std::size_t start = 0;
    while (start <= label.size()) {
        const std::size_t plus = label.find('+', start);
        const std::string part =
            label.substr(start, plus == std::string::npos ? std::string::npos
                                                          : plus - start);
        types.insert(variable_type_from_string(part));
        if (plus == std::string::npos) break;
        start = plus + 1;
    }
    return types;
}

std::string MetricReport::to_json() const {
    nlohmann::json j;
    j["kind"] = to_string(kind);
    j["subset"] = subset_label;
    j["tc_nats"] = tc_nats ? nlohmann::json(*tc_nats) : nlohmann::json();
    j["mi_avg_nats"] =
        mi_avg_nats ? nlohmann::json(*mi_avg_nats) : nlohmann::json();
    j["erank"] = erank ? nlohmann::json(*erank) : nlohmann::json();
    j["n_examples"] = n_examples;
    j["dims"] = dims;
    j["bins"] = bins;
    j["assignment_digest"] = assignment_digest;
    return j.dump();
}

MetricReport metric_report(const RepresentationSet& set,
                           const VariableAssignment& assignment,
                           RepresentationKind kind,
                           const std::set<VariableType>& subset_types,
                           std::size_t bins) {
    if (kind == RepresentationKind::variance)
        throw DomainError(
            "metric_report: metrics are defined on mean/sampled only");
    const bool is_full = subset_types.size() == 3;
    const RepresentationSet subset =
        select_subset(set, assignment, subset_types);
    const Matrix& data = subset.matrix_for(kind);

    MetricReport report;
    report.kind = kind;
    report.subset_label = subset_label(subset_types);
    report.n_examples = data.rows();
    report.dims = data.cols();
    report.bins = bins;
    report.assignment_digest = assignment.digest();
    if (is_full) report.erank = effective_rank(data);
    if (data.cols() >= 2) {
        report.tc_nats = gaussian_tc(sample_covariance(data));
        report.mi_avg_nats = averaged_mi(data, bins);
    }
    return report;
}

}  // namespace polaris
