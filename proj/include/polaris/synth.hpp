#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "polaris/classifier.hpp"
#include "polaris/representation.hpp"

namespace polaris {

enum class MeanDistribution { gaussian, uniform, bimodal };

std::string to_string(MeanDistribution d);
MeanDistribution mean_distribution_from_string(const std::string& s);

struct ActivePlan {
    MeanDistribution mean_distribution = MeanDistribution::gaussian;
    double sigma_level = 0.01;  // posterior variance, << 1
};

struct PassivePlan {
    double mu_noise = 0.02;     // std of the near-zero mean draws
    double sigma_level = 1.0;   // posterior variance, ~ 1
};

struct MixedPlan {
    double c = 0.5;  // mixture weight of the passive component
    ActivePlan active;
    PassivePlan passive;
};

using DimPlan = std::variant<ActivePlan, PassivePlan, MixedPlan>;

struct LabelRule {
    std::size_t classes = 4;  // equal-frequency quantisation of the first
                              // active mean dimension
};

struct SynthSpec {
    std::size_t n_examples = 0;
    std::vector<DimPlan> dims;
    // Optional correlation target for the latent mean draws, spanning all
    // dimensions (unit diagonal, positive definite). Passive entries shape
    // the tiny mean noise, which is how correlated passives are planted.
    std::optional<std::vector<double>> correlation;  // row-major d*d
    std::optional<LabelRule> label_rule;
    std::uint64_t seed = 0;

    void validate() const;

    std::string to_json() const;
    static SynthSpec from_json(const std::string& text);
};

struct SynthOutput {
    RepresentationSet set;
    std::vector<VariableType> planted_types;
    // For each mixed dimension: one flag per example, true when the example
    // took the active branch.
    std::vector<std::vector<bool>> per_example_activity;  // indexed per dim
    std::optional<std::vector<int>> labels;
    std::uint64_t seed = 0;
};

SynthOutput generate(const SynthSpec& spec);

struct MixtureComponentStats {
    double passive_mean = 0.0;
    double passive_variance = 0.0;
    std::size_t passive_count = 0;
    double active_mean = 0.0;
    double active_variance = 0.0;
    std::size_t active_count = 0;
    // Variance of the planted active-branch mean draws, for comparison.
    double planted_active_mean_variance = 0.0;
};

// Splits the sampled column of a mixed dimension by the planted activity.
MixtureComponentStats empirical_mixture_check(const SynthOutput& output,
                                              std::size_t dim);

}  // namespace polaris
