#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "polaris/classifier.hpp"
#include "polaris/matrix.hpp"

namespace polaris {

struct ProbeConfig {
    std::size_t max_iterations = 2000;  // per fold; converges much earlier
    std::vector<double> l2_grid;        // empty -> default 10-point log grid
    std::size_t folds = 5;
    std::uint64_t seed = 0;

    std::vector<double> resolved_grid() const;
    void validate() const;
};

struct ProbeResult {
    std::string subset_label;
    double mean_accuracy = 0.0;
    std::vector<double> fold_accuracies;
    double chosen_l2 = 0.0;
    double random_baseline = 0.0;
    std::size_t n_examples = 0;
    std::size_t dims = 0;
    std::size_t iterations = 0;  // total GD iterations across chosen folds
};

// Multinomial logistic regression trained by full-batch gradient descent
// with an L2 penalty. The penalty strength is chosen by stratified
// cross-validated accuracy; ties go to the smaller l2.
ProbeResult train_probe(const Matrix& features, const std::vector<int>& labels,
                        const ProbeConfig& config);

// 1 / number of distinct labels.
double random_baseline(const std::vector<int>& labels);

struct SubsetProbeOutcome {
    std::string subset_label;
    std::optional<ProbeResult> result;
    std::string skip_reason;  // set when result is absent
};

// Probes every canonical subset combination (full, active, mixed, passive,
// active+mixed, active+passive, mixed+passive) on the chosen representation
// kind. Empty subsets and per-subset failures are recorded, not fatal.
std::vector<SubsetProbeOutcome> probe_all_subsets(
    const RepresentationSet& set, const VariableAssignment& assignment,
    RepresentationKind kind, const std::vector<int>& labels,
    const ProbeConfig& config);

}  // namespace polaris
