#include "polaris/probe.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "polaris/kernels.hpp"
#include "polaris/metrics.hpp"
#include "polaris/rng.hpp"

namespace polaris {

namespace {

struct Encoded {
    std::vector<int> y;  // labels remapped to 0..classes-1
    std::size_t classes = 0;
};

Encoded encode_labels(const std::vector<int>& labels) {
    std::map<int, int> remap;
    for (int l : labels) remap.emplace(l, 0);
    int next = 0;
    for (auto& [k, v] : remap) v = next++;
    Encoded e;
    e.classes = remap.size();
    e.y.reserve(labels.size());
    for (int l : labels) e.y.push_back(remap[l]);
    return e;
}

// Stratified fold ids: examples of each class are shuffled and dealt
// round-robin, so every example is test data exactly once.
std::vector<std::size_t> stratified_folds(const std::vector<int>& y,
                                          std::size_t classes,
                                          std::size_t folds, Rng& rng) {
    std::vector<std::size_t> fold_of(y.size());
    for (std::size_t c = 0; c < classes; ++c) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < y.size(); ++i)
            if (static_cast<std::size_t>(y[i]) == c) members.push_back(i);
        for (std::size_t i = 0; i + 1 < members.size(); ++i) {
            const std::size_t j =
                i + static_cast<std::size_t>(rng.below(members.size() - i));
            std::swap(members[i], members[j]);
        }
        for (std::size_t i = 0; i < members.size(); ++i)
            fold_of[members[i]] = i % folds;
    }
    return fold_of;
}

struct Standardiser {
    std::vector<double> mean, inv_std;

    static Standardiser fit(const Matrix& x,
                            const std::vector<std::size_t>& rows) {
        const std::size_t d = x.cols();
        Standardiser s;
        s.mean.assign(d, 0.0);
        s.inv_std.assign(d, 1.0);
        for (std::size_t r : rows)
            for (std::size_t j = 0; j < d; ++j) s.mean[j] += x.at(r, j);
        for (std::size_t j = 0; j < d; ++j)
            s.mean[j] /= static_cast<double>(rows.size());
        std::vector<double> ss(d, 0.0);
        for (std::size_t r : rows)
            for (std::size_t j = 0; j < d; ++j) {
                const double dev = x.at(r, j) - s.mean[j];
                ss[j] += dev * dev;
            }
        for (std::size_t j = 0; j < d; ++j) {
            const double sd =
                std::sqrt(ss[j] / static_cast<double>(rows.size()));
            s.inv_std[j] = sd > 1e-12 ? 1.0 / sd : 1.0;
        }
        return s;
    }

    Matrix apply(const Matrix& x, const std::vector<std::size_t>& rows) const {
        Matrix out(rows.size(), x.cols());
        for (std::size_t i = 0; i < rows.size(); ++i)
            for (std::size_t j = 0; j < x.cols(); ++j)
                out.at(i, j) = (x.at(rows[i], j) - mean[j]) * inv_std[j];
        return out;
    }
};

struct SoftmaxFit {
    Matrix w;  // (d+1) x classes, last row is the unpenalised bias
    std::size_t iterations = 0;
};

// Full-batch gradient descent with a fixed 1/L step from the smoothness
// bound of the softmax loss; stops early on a small gradient norm.
SoftmaxFit fit_softmax(const Matrix& x, const std::vector<int>& y,
                       std::size_t classes, double l2,
                       std::size_t max_iterations) {
    const std::size_t n = x.rows(), d = x.cols();
    const double inv_n = 1.0 / static_cast<double>(n);

    // Smoothness bound: 0.5 * tr(X^T X)/n + l2 (plus the bias column).
    double trace = kernels::ops().sumsq(x.data(), x.size());
    const double lips = 0.5 * (trace * inv_n + 1.0) + l2;
    const double step_size = 1.0 / lips;

    SoftmaxFit fit;
    fit.w = Matrix(d + 1, classes);  // zero init: convex problem
    Matrix logits(n, classes), probs(n, classes), grad(d + 1, classes);

    for (std::size_t iter = 0; iter < max_iterations; ++iter) {
        kernels::ops().gemm_nn(n, classes, d, x.data(), d, fit.w.data(),
                               classes, logits.data(), classes, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            kernels::ops().add(logits.row(i), fit.w.row(d), logits.row(i),
                               classes);
        for (std::size_t i = 0; i < n; ++i) {
            const double* lr = logits.row(i);
            double mx = lr[0];
            for (std::size_t c = 1; c < classes; ++c) mx = std::max(mx, lr[c]);
            double sum = 0.0;
            double* pr = probs.row(i);
            for (std::size_t c = 0; c < classes; ++c) {
                pr[c] = std::exp(lr[c] - mx);
                sum += pr[c];
            }
            const double inv = 1.0 / sum;
            for (std::size_t c = 0; c < classes; ++c) pr[c] *= inv;
            pr[static_cast<std::size_t>(y[i])] -= 1.0;
        }
        kernels::ops().gemm_tn(d, classes, n, x.data(), d, probs.data(),
                               classes, grad.data(), classes, 0.0);
        kernels::ops().scale(inv_n, grad.data(), d * classes);
        // penalised weights (bias row excluded)
        kernels::ops().axpy(l2, fit.w.data(), grad.data(), d * classes);
        for (std::size_t c = 0; c < classes; ++c) {
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) acc += probs.at(i, c);
            grad.at(d, c) = acc * inv_n;
        }

        const double gnorm =
            std::sqrt(kernels::ops().sumsq(grad.data(), grad.size()));
        fit.iterations = iter + 1;
        if (gnorm < 1e-6) break;
        kernels::ops().axpy(-step_size, grad.data(), fit.w.data(),
                            fit.w.size());
    }
    return fit;
}

double accuracy(const SoftmaxFit& fit, const Matrix& x,
                const std::vector<int>& y) {
    const std::size_t n = x.rows(), d = x.cols();
    const std::size_t classes = fit.w.cols();
    std::size_t correct = 0;
    std::vector<double> logits(classes);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t c = 0; c < classes; ++c) logits[c] = fit.w.at(d, c);
        const double* xr = x.row(i);
        for (std::size_t j = 0; j < d; ++j)
            kernels::ops().axpy(xr[j], fit.w.row(j), logits.data(), classes);
        std::size_t best = 0;
        for (std::size_t c = 1; c < classes; ++c)
            if (logits[c] > logits[best]) best = c;
        if (static_cast<int>(best) == y[i]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(n);
}

}  // namespace

std::vector<double> ProbeConfig::resolved_grid() const {
    if (!l2_grid.empty()) return l2_grid;
    // 10 points, log-spaced over [1e-4, 1e2]
    std::vector<double> grid;
    for (int i = 0; i < 10; ++i)
        grid.push_back(std::pow(10.0, -4.0 + 6.0 * i / 9.0));
    return grid;
}

void ProbeConfig::validate() const {
    if (folds < 2) throw DomainError("probe: need at least 2 folds");
    if (max_iterations < 1)
        throw DomainError("probe: max_iterations must be >= 1");
    for (double l2 : l2_grid)
        if (!(l2 >= 0.0)) throw DomainError("probe: l2 must be >= 0");
}

double random_baseline(const std::vector<int>& labels) {
    if (labels.empty()) throw DomainError("random_baseline: no labels");
    std::map<int, int> distinct;
    for (int l : labels) distinct.emplace(l, 0);
    return 1.0 / static_cast<double>(distinct.size());
}

ProbeResult train_probe(const Matrix& features, const std::vector<int>& labels,
                        const ProbeConfig& config) {
    config.validate();
    if (features.empty()) throw EmptySubsetError("probe: empty feature matrix");
    if (features.rows() != labels.size())
        throw DimensionError("probe: features rows != labels length");
    const Encoded enc = encode_labels(labels);
    if (enc.classes < 2)
        throw DomainError("probe: need at least 2 distinct classes");

    Rng rng(derive_seed(config.seed, 31));
    const std::vector<std::size_t> fold_of =
        stratified_folds(enc.y, enc.classes, config.folds, rng);
    const std::vector<double> grid = config.resolved_grid();

    double best_mean = -1.0;
    double best_l2 = grid.front();
    std::vector<double> best_folds;
    std::size_t best_iterations = 0;

    for (double l2 : grid) {
        std::vector<double> fold_acc;
        std::size_t iterations = 0;
        for (std::size_t f = 0; f < config.folds; ++f) {
            std::vector<std::size_t> train_rows, test_rows;
            for (std::size_t i = 0; i < fold_of.size(); ++i)
                (fold_of[i] == f ? test_rows : train_rows).push_back(i);
            if (train_rows.empty() || test_rows.empty())
                throw InsufficientDataError("probe: a fold is empty");

            const Standardiser std_fit =
                Standardiser::fit(features, train_rows);
            const Matrix x_train = std_fit.apply(features, train_rows);
            const Matrix x_test = std_fit.apply(features, test_rows);
            std::vector<int> y_train, y_test;
            for (std::size_t r : train_rows) y_train.push_back(enc.y[r]);
            for (std::size_t r : test_rows) y_test.push_back(enc.y[r]);

            const SoftmaxFit fit = fit_softmax(
                x_train, y_train, enc.classes, l2, config.max_iterations);
            iterations += fit.iterations;
            fold_acc.push_back(accuracy(fit, x_test, y_test));
        }
        const double mean =
            kernels::ops().sum(fold_acc.data(), fold_acc.size()) /
            static_cast<double>(fold_acc.size());
        if (mean > best_mean + 1e-12) {  // ties keep the smaller l2
            best_mean = mean;
            best_l2 = l2;
            best_folds = fold_acc;
            best_iterations = iterations;
        }
    }

    ProbeResult result;
    result.mean_accuracy = best_mean;
    result.fold_accuracies = std::move(best_folds);
    result.chosen_l2 = best_l2;
    result.random_baseline = random_baseline(labels);
    result.n_examples = features.rows();
    result.dims = features.cols();
    result.iterations = best_iterations;
    return result;
}

std::vector<SubsetProbeOutcome> probe_all_subsets(
    const RepresentationSet& set, const VariableAssignment& assignment,
    RepresentationKind kind, const std::vector<int>& labels,
    const ProbeConfig& config) {
    static const std::vector<std::string> kSubsets = {
        "full",          "active",         "mixed",       "passive",
        "active+mixed",  "active+passive", "mixed+passive"};
    std::vector<SubsetProbeOutcome> outcomes;
    for (const std::string& label : kSubsets) {
        SubsetProbeOutcome outcome;
        outcome.subset_label = label;
        try {
            const RepresentationSet subset =
                select_subset(set, assignment, subset_from_label(label));
            ProbeResult r =
                train_probe(subset.matrix_for(kind), labels, config);
            r.subset_label = label;
            outcome.result = std::move(r);
        } catch (const Error& e) {
            outcome.skip_reason = e.what();
        }
        outcomes.push_back(std::move(outcome));
    }
    return outcomes;
}

}  // namespace polaris
