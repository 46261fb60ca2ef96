#include "polaris/classifier.hpp"

#include <cmath>
#include <cstdint>

#include "json.hpp"

namespace polaris {

std::string to_string(VariableType type) {
    switch (type) {
        case VariableType::active: return "active";
        case VariableType::passive: return "passive";
        case VariableType::mixed: return "mixed";
    }
    return "mixed";
}

VariableType variable_type_from_string(const std::string& s) {
    if (s == "active") return VariableType::active;
    if (s == "passive") return VariableType::passive;
    if (s == "mixed") return VariableType::mixed;
    throw DomainError("unknown variable type: '" + s + "'");
}

std::vector<std::size_t> VariableAssignment::indices_of(
    const std::set<VariableType>& types) const {
    std::vector<std::size_t> out;
    for (const DimensionRecord& rec : dims)
        if (types.count(rec.type)) out.push_back(rec.index);
    return out;
}

std::string VariableAssignment::to_json() const {
    nlohmann::json j;
    j["alpha"] = alpha;
    j["dims"] = nlohmann::json::array();
    for (const DimensionRecord& rec : dims) {
        j["dims"].push_back({{"index", rec.index},
                             {"type", to_string(rec.type)},
                             {"sigma_mean", rec.sigma_mean},
                             {"sigma_var", rec.sigma_variance}});
    }
    return j.dump();
}

VariableAssignment VariableAssignment::from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("assignment json: ") + e.what());
    }
    VariableAssignment a;
    try {
        a.alpha = j.at("alpha").get<double>();
        for (const auto& d : j.at("dims")) {
            DimensionRecord rec;
            rec.index = d.at("index").get<std::size_t>();
            rec.type =
                variable_type_from_string(d.at("type").get<std::string>());
            rec.sigma_mean = d.at("sigma_mean").get<double>();
            rec.sigma_variance = d.at("sigma_var").get<double>();
            a.dims.push_back(rec);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("assignment json: ") + e.what());
    }
    if (a.dims.empty()) throw ParseError("assignment json: no dimensions");

    // The stored types must be re-derivable from the recorded statistics,
    // and the indices must cover 0..d-1 exactly once.
    std::vector<bool> seen(a.dims.size(), false);
    for (const DimensionRecord& rec : a.dims) {
        if (rec.index >= a.dims.size() || seen[rec.index])
            throw ParseError("assignment json: indices are not a permutation");
        seen[rec.index] = true;
        VariableType expected = VariableType::mixed;
        if (std::abs(rec.sigma_mean - 1.0) <= a.alpha &&
            rec.sigma_variance <= a.alpha)
            expected = VariableType::passive;
        else if (std::abs(rec.sigma_mean) <= a.alpha &&
                 rec.sigma_variance <= a.alpha)
            expected = VariableType::active;
        if (expected != rec.type)
            throw ParseError(
                "assignment json: type of dimension " +
                std::to_string(rec.index) +
                " is inconsistent with its recorded statistics");
    }
    return a;
}

std::string VariableAssignment::digest() const {
    const std::string text = to_json();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(h));
    return std::string(buf);
}

VariableAssignment classify_variables(const Matrix& variance,
                                      const ClassifierConfig& config) {
    config.validate();
    if (variance.rows() < 2)
        throw InsufficientDataError("classify_variables: need >= 2 rows");
    for (std::size_t i = 0; i < variance.rows(); ++i)
        for (std::size_t j = 0; j < variance.cols(); ++j)
            if (!(variance.at(i, j) > 0.0))
                throw DomainError("classify_variables: nonpositive variance");

    const ColumnStats stats = column_stats(variance);
    VariableAssignment out;
    out.alpha = config.alpha;
    out.dims.reserve(variance.cols());
    for (std::size_t j = 0; j < variance.cols(); ++j) {
        const double mean = stats.mean[j];
        const double var = stats.variance[j];
        VariableType type = VariableType::mixed;
        if (std::abs(mean - 1.0) <= config.alpha && var <= config.alpha)
            type = VariableType::passive;
        else if (std::abs(mean) <= config.alpha && var <= config.alpha)
            type = VariableType::active;
        out.dims.push_back({j, type, mean, var});
    }
    return out;
}

RepresentationSet select_subset(const RepresentationSet& set,
                                const VariableAssignment& assignment,
                                const std::set<VariableType>& types) {
    if (assignment.size() != set.dims())
        throw DimensionError("select_subset: assignment has " +
                             std::to_string(assignment.size()) +
                             " dims, set has " + std::to_string(set.dims()));
    const std::vector<std::size_t> keep = assignment.indices_of(types);
    if (keep.empty())
        throw EmptySubsetError("select_subset: no dimensions of the requested types");
    std::optional<Matrix> noise;
    if (set.noise()) noise = set.noise()->select_columns(keep);
    return RepresentationSet::create(set.mean().select_columns(keep),
                                     set.variance().select_columns(keep),
                                     set.sampled().select_columns(keep),
                                     std::move(noise));
}

AssignmentCounts summarise_assignment(const VariableAssignment& assignment) {
    AssignmentCounts c;
    for (const DimensionRecord& rec : assignment.dims) {
        switch (rec.type) {
            case VariableType::active: ++c.n_active; break;
            case VariableType::passive: ++c.n_passive; break;
            case VariableType::mixed: ++c.n_mixed; break;
        }
    }
    return c;
}

}  // namespace polaris
