#include "polaris/synth.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "json.hpp"
#include "polaris/rng.hpp"

namespace polaris {

namespace {

constexpr double kSqrt3 = 1.7320508075688772935;
constexpr double kBimodalSeparation = 1.5;
constexpr double kBimodalComponentStd = 0.5;

// Pushes a standard normal draw through the requested marginal shape,
// keeping roughly unit scale.
double shape_mean(MeanDistribution dist, double u, Rng& rng) {
    switch (dist) {
        case MeanDistribution::gaussian:
            return u;
        case MeanDistribution::uniform: {
            // Gaussian copula: preserves the correlation ordering.
            const double p = 0.5 * std::erfc(-u * 0.70710678118654752440);
            return (2.0 * p - 1.0) * kSqrt3;
        }
        case MeanDistribution::bimodal: {
            const double sign = u >= 0.0 ? 1.0 : -1.0;
            return sign * kBimodalSeparation +
                   kBimodalComponentStd * rng.normal();
        }
    }
    return u;
}

double jitter_sigma(double level, Rng& rng) {
    return level * rng.uniform(0.98, 1.02);
}

}  // namespace

std::string to_string(MeanDistribution d) {
    switch (d) {
        case MeanDistribution::gaussian: return "gaussian";
        case MeanDistribution::uniform: return "uniform";
        case MeanDistribution::bimodal: return "bimodal";
    }
    return "gaussian";
}

MeanDistribution mean_distribution_from_string(const std::string& s) {
    if (s == "gaussian") return MeanDistribution::gaussian;
    if (s == "uniform") return MeanDistribution::uniform;
    if (s == "bimodal") return MeanDistribution::bimodal;
    throw DomainError("unknown mean distribution: '" + s + "'");
}

void SynthSpec::validate() const {
    if (n_examples < 2)
        throw DomainError("synth: n_examples must be >= 2");
    if (dims.empty()) throw DomainError("synth: no dimension plans");
    for (const DimPlan& plan : dims) {
        if (const auto* a = std::get_if<ActivePlan>(&plan)) {
            if (!(a->sigma_level > 0.0) || a->sigma_level > 0.1)
                throw DomainError("synth: active sigma_level must be in (0, 0.1]");
        } else if (const auto* p = std::get_if<PassivePlan>(&plan)) {
            if (p->sigma_level < 0.9 || p->sigma_level > 1.1)
                throw DomainError("synth: passive sigma_level must be in [0.9, 1.1]");
            if (!(p->mu_noise >= 0.0) || p->mu_noise > 0.2)
                throw DomainError("synth: passive mu_noise must be in [0, 0.2]");
        } else {
            const auto& m = std::get<MixedPlan>(plan);
            if (!(m.c > 0.0) || !(m.c < 1.0))
                throw DomainError("synth: mixed c must be in (0, 1)");
            if (!(m.active.sigma_level > 0.0) || m.active.sigma_level > 0.1)
                throw DomainError("synth: mixed active sigma_level must be in (0, 0.1]");
            if (m.passive.sigma_level < 0.9 || m.passive.sigma_level > 1.1)
                throw DomainError("synth: mixed passive sigma_level must be in [0.9, 1.1]");
        }
    }
    if (correlation) {
        const std::size_t d = dims.size();
        if (correlation->size() != d * d)
            throw DomainError("synth: correlation matrix must be d x d");
        for (std::size_t i = 0; i < d; ++i) {
            if (std::abs((*correlation)[i * d + i] - 1.0) > 1e-12)
                throw DomainError("synth: correlation diagonal must be 1");
            for (std::size_t j = 0; j < d; ++j)
                if (std::abs((*correlation)[i * d + j] -
                             (*correlation)[j * d + i]) > 1e-12)
                    throw DomainError("synth: correlation must be symmetric");
        }
    }
    if (label_rule) {
        if (label_rule->classes < 2)
            throw DomainError("synth: label rule needs >= 2 classes");
        bool has_active = false;
        for (const DimPlan& plan : dims)
            if (std::holds_alternative<ActivePlan>(plan)) has_active = true;
        if (!has_active)
            throw DomainError("synth: label rule requires an active dimension");
    }
}

SynthOutput generate(const SynthSpec& spec) {
    spec.validate();
    const std::size_t n = spec.n_examples;
    const std::size_t d = spec.dims.size();

    // Cholesky factor of the correlation target, identity when absent.
    Eigen::MatrixXd chol;
    if (spec.correlation) {
        Eigen::MatrixXd r(d, d);
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j)
                r(i, j) = (*spec.correlation)[i * d + j];
        Eigen::LLT<Eigen::MatrixXd> llt(r);
        if (llt.info() != Eigen::Success)
            throw DomainError("synth: correlation target is not positive definite");
        chol = llt.matrixL();
    }

    Matrix mean(n, d), variance(n, d), noise(n, d);
    std::vector<std::vector<bool>> activity(d);
    std::vector<VariableType> types(d);
    for (std::size_t j = 0; j < d; ++j) {
        if (std::holds_alternative<ActivePlan>(spec.dims[j]))
            types[j] = VariableType::active;
        else if (std::holds_alternative<PassivePlan>(spec.dims[j]))
            types[j] = VariableType::passive;
        else {
            types[j] = VariableType::mixed;
            activity[j].resize(n);
        }
    }

    Rng mean_rng(derive_seed(spec.seed, 1));
    Rng sigma_rng(derive_seed(spec.seed, 2));
    Rng coin_rng(derive_seed(spec.seed, 3));
    Rng noise_rng(derive_seed(spec.seed, 4));

    std::vector<double> u(d), v(d);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) u[j] = mean_rng.normal();
        if (spec.correlation) {
            for (std::size_t j = 0; j < d; ++j) {
                double acc = 0.0;
                for (std::size_t l = 0; l <= j; ++l) acc += chol(j, l) * u[l];
                v[j] = acc;
            }
        } else {
            v = u;
        }

        for (std::size_t j = 0; j < d; ++j) {
            const DimPlan& plan = spec.dims[j];
            if (const auto* a = std::get_if<ActivePlan>(&plan)) {
                mean.at(i, j) = shape_mean(a->mean_distribution, v[j], mean_rng);
                variance.at(i, j) = jitter_sigma(a->sigma_level, sigma_rng);
            } else if (const auto* p = std::get_if<PassivePlan>(&plan)) {
                mean.at(i, j) = p->mu_noise * v[j];
                variance.at(i, j) = jitter_sigma(p->sigma_level, sigma_rng);
            } else {
                const auto& mix = std::get<MixedPlan>(plan);
                const bool is_active = coin_rng.uniform01() >= mix.c;
                activity[j][i] = is_active;
                if (is_active) {
                    mean.at(i, j) =
                        shape_mean(mix.active.mean_distribution, v[j], mean_rng);
                    variance.at(i, j) = jitter_sigma(mix.active.sigma_level, sigma_rng);
                } else {
                    mean.at(i, j) = mix.passive.mu_noise * mean_rng.normal();
                    variance.at(i, j) = jitter_sigma(mix.passive.sigma_level, sigma_rng);
                }
            }
            noise.at(i, j) = noise_rng.normal();
        }
    }

    const Matrix sampled = reparameterise(mean, variance, noise);

    std::optional<std::vector<int>> labels;
    if (spec.label_rule) {
        std::size_t first_active = d;
        for (std::size_t j = 0; j < d; ++j) {
            if (types[j] == VariableType::active) {
                first_active = j;
                break;
            }
        }
        // Equal-frequency thresholds over the first active mean dimension.
        std::vector<double> col(n);
        for (std::size_t i = 0; i < n; ++i) col[i] = mean.at(i, first_active);
        std::vector<double> sorted = col;
        std::sort(sorted.begin(), sorted.end());
        const std::size_t q = spec.label_rule->classes;
        std::vector<double> cut(q - 1);
        for (std::size_t c = 1; c < q; ++c)
            cut[c - 1] = sorted[c * n / q];
        labels.emplace(n);
        for (std::size_t i = 0; i < n; ++i) {
            int lab = 0;
            while (lab < static_cast<int>(q) - 1 && col[i] >= cut[lab]) ++lab;
            (*labels)[i] = lab;
        }
    }

    return SynthOutput{
        RepresentationSet::create(std::move(mean), std::move(variance),
                                  sampled, std::move(noise)),
        std::move(types), std::move(activity), std::move(labels), spec.seed};
}

MixtureComponentStats empirical_mixture_check(const SynthOutput& output,
                                              std::size_t dim) {
    if (dim >= output.planted_types.size())
        throw IndexError("mixture check: dimension out of range");
    if (output.planted_types[dim] != VariableType::mixed)
        throw DomainError("mixture check: dimension " + std::to_string(dim) +
                          " is not mixed");
    const std::vector<bool>& act = output.per_example_activity[dim];
    const Matrix& sampled = output.set.sampled();
    const Matrix& mean = output.set.mean();

    MixtureComponentStats stats;
    double sum_a = 0.0, sum_p = 0.0, sum_ma = 0.0;
    for (std::size_t i = 0; i < sampled.rows(); ++i) {
        const double z = sampled.at(i, dim);
        if (act[i]) {
            sum_a += z;
            sum_ma += mean.at(i, dim);
            ++stats.active_count;
        } else {
            sum_p += z;
            ++stats.passive_count;
        }
    }
    if (stats.active_count < 2 || stats.passive_count < 2)
        throw InsufficientDataError("mixture check: a component has < 2 samples");
    stats.active_mean = sum_a / static_cast<double>(stats.active_count);
    stats.passive_mean = sum_p / static_cast<double>(stats.passive_count);
    const double mean_ma = sum_ma / static_cast<double>(stats.active_count);
    double ss_a = 0.0, ss_p = 0.0, ss_ma = 0.0;
    for (std::size_t i = 0; i < sampled.rows(); ++i) {
        const double z = sampled.at(i, dim);
        if (act[i]) {
            ss_a += (z - stats.active_mean) * (z - stats.active_mean);
            const double dm = mean.at(i, dim) - mean_ma;
            ss_ma += dm * dm;
        } else {
            ss_p += (z - stats.passive_mean) * (z - stats.passive_mean);
        }
    }
    stats.active_variance = ss_a / static_cast<double>(stats.active_count - 1);
    stats.passive_variance = ss_p / static_cast<double>(stats.passive_count - 1);
    stats.planted_active_mean_variance =
        ss_ma / static_cast<double>(stats.active_count - 1);
    return stats;
}

// --------------------------------------------------------------------------
// JSON spec form, used by the CLI.
// --------------------------------------------------------------------------

namespace {

nlohmann::json active_to_json(const ActivePlan& a) {
    return {{"type", "active"},
            {"mean_distribution", to_string(a.mean_distribution)},
            {"sigma_level", a.sigma_level}};
}

nlohmann::json passive_to_json(const PassivePlan& p) {
    return {{"type", "passive"},
            {"mu_noise", p.mu_noise},
            {"sigma_level", p.sigma_level}};
}

ActivePlan active_from_json(const nlohmann::json& j) {
    ActivePlan a;
    if (j.contains("mean_distribution"))
        a.mean_distribution = mean_distribution_from_string(
            j.at("mean_distribution").get<std::string>());
    if (j.contains("sigma_level"))
        a.sigma_level = j.at("sigma_level").get<double>();
    return a;
}

PassivePlan passive_from_json(const nlohmann::json& j) {
    PassivePlan p;
    if (j.contains("mu_noise")) p.mu_noise = j.at("mu_noise").get<double>();
    if (j.contains("sigma_level"))
        p.sigma_level = j.at("sigma_level").get<double>();
    return p;
}

}  // namespace

std::string SynthSpec::to_json() const {
    nlohmann::json j;
    j["n_examples"] = n_examples;
    j["seed"] = seed;
    j["dims"] = nlohmann::json::array();
    for (const DimPlan& plan : dims) {
        if (const auto* a = std::get_if<ActivePlan>(&plan)) {
            j["dims"].push_back(active_to_json(*a));
        } else if (const auto* p = std::get_if<PassivePlan>(&plan)) {
            j["dims"].push_back(passive_to_json(*p));
        } else {
            const auto& m = std::get<MixedPlan>(plan);
            j["dims"].push_back({{"type", "mixed"},
                                 {"c", m.c},
                                 {"active", active_to_json(m.active)},
                                 {"passive", passive_to_json(m.passive)}});
        }
    }
    if (correlation) j["correlation"] = *correlation;
    if (label_rule) j["labels"] = {{"classes", label_rule->classes}};
    return j.dump(2);
}

SynthSpec SynthSpec::from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("synth spec: ") + e.what());
    }
    SynthSpec spec;
    try {
        spec.n_examples = j.at("n_examples").get<std::size_t>();
        if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
        for (const auto& dj : j.at("dims")) {
            const std::string type = dj.at("type").get<std::string>();
            if (type == "active") {
                spec.dims.emplace_back(active_from_json(dj));
            } else if (type == "passive") {
                spec.dims.emplace_back(passive_from_json(dj));
            } else if (type == "mixed") {
                MixedPlan m;
                m.c = dj.at("c").get<double>();
                if (dj.contains("active"))
                    m.active = active_from_json(dj.at("active"));
                if (dj.contains("passive"))
                    m.passive = passive_from_json(dj.at("passive"));
                spec.dims.emplace_back(m);
            } else {
                throw ParseError("synth spec: unknown dim type '" + type + "'");
            }
        }
        if (j.contains("correlation")) {
            std::vector<double> flat;
            const auto& cj = j.at("correlation");
            // accept either a flat array or an array of rows
            if (!cj.empty() && cj.front().is_array()) {
                for (const auto& rowj : cj)
                    for (const auto& x : rowj) flat.push_back(x.get<double>());
            } else {
                for (const auto& x : cj) flat.push_back(x.get<double>());
            }
            spec.correlation = std::move(flat);
        }
        if (j.contains("labels")) {
            LabelRule rule;
            rule.classes = j.at("labels").at("classes").get<std::size_t>();
            spec.label_rule = rule;
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("synth spec: ") + e.what());
    }
    spec.validate();
    return spec;
}

}  // namespace polaris
