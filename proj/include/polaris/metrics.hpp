#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "polaris/classifier.hpp"
#include "polaris/representation.hpp"

namespace polaris {

// Symmetric covariance matrix with positive diagonal.
class Covariance {
  public:
    Covariance(std::size_t dim, std::vector<double> values);

    std::size_t dim() const { return dim_; }
    double at(std::size_t i, std::size_t j) const {
        return values_[i * dim_ + j];
    }
    const std::vector<double>& values() const { return values_; }

  private:
    std::size_t dim_;
    std::vector<double> values_;
};

// Joint bin-count table with marginals, the raw material of the discretised
// MI estimator.
struct Histogram2D {
    std::size_t bins_x = 0;
    std::size_t bins_y = 0;
    std::vector<std::uint64_t> joint;       // bins_x * bins_y, row-major
    std::vector<std::uint64_t> marginal_x;  // row sums
    std::vector<std::uint64_t> marginal_y;  // column sums
    std::uint64_t n = 0;

    static Histogram2D from_indices(const std::vector<std::size_t>& x,
                                    const std::vector<std::size_t>& y);
};

struct MetricReport {
    RepresentationKind kind = RepresentationKind::mean;
    std::string subset_label;
    std::optional<double> tc_nats;      // absent when dims < 2
    std::optional<double> mi_avg_nats;  // absent when dims < 2
    std::optional<double> erank;        // only computed for the full subset
    std::size_t n_examples = 0;
    std::size_t dims = 0;
    std::size_t bins = 0;
    std::string assignment_digest;

    std::string to_json() const;
};

// Unbiased sample covariance (n-1), symmetrised with its transpose.
Covariance sample_covariance(const Matrix& m);

// Total correlation of a zero-mean Gaussian fit, via the simplified form
// (sum of log variances minus log determinant) / 2.
double gaussian_tc(const Covariance& cov);

// Same quantity via the unsimplified KL between N(0, Cov) and the product
// of its marginals; kept as an independent algebraic route.
double gaussian_tc_raw(const Covariance& cov);

// Equal-width bins over [min, max]; the maximum value lands in the last
// bin, and a constant column maps everything to bin 0.
std::vector<std::size_t> discretise(const std::vector<double>& column,
                                    std::size_t bins);

// Plug-in MI in nats; zero joint counts contribute zero.
double pairwise_mi(const std::vector<std::size_t>& x,
                   const std::vector<std::size_t>& y);
double pairwise_mi(const Histogram2D& h);

// Mean of pairwise MI over all ordered distinct column pairs.
double averaged_mi(const Matrix& m, std::size_t bins);

// exp of the spectral entropy of the singular values of the column-centered
// data matrix; in [1, min(rows, cols)].
double effective_rank(const Matrix& m);

constexpr std::size_t kDefaultMiBins = 20;

// TC + averaged MI (+ erank for the full subset) on the selected columns of
// the selected representation matrix. kind must be mean or sampled.
MetricReport metric_report(const RepresentationSet& set,
                           const VariableAssignment& assignment,
                           RepresentationKind kind,
                           const std::set<VariableType>& subset_types,
                           std::size_t bins = kDefaultMiBins);

// Canonical subset labels: full, active, passive, mixed, active+mixed,
// active+passive, mixed+passive.
std::string subset_label(const std::set<VariableType>& types);
std::set<VariableType> subset_from_label(const std::string& label);

}  // namespace polaris
