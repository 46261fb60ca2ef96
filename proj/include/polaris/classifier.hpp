#pragma once

#include <set>
#include <string>
#include <vector>

#include "polaris/representation.hpp"

namespace polaris {

enum class VariableType { active, passive, mixed };

std::string to_string(VariableType type);
VariableType variable_type_from_string(const std::string& s);

struct ClassifierConfig {
    double alpha = 0.1;

    void validate() const {
        if (!(alpha >= 0.0) || alpha >= 0.5)
            throw DomainError("classifier: alpha must satisfy 0 <= alpha < 0.5");
    }
};

struct DimensionRecord {
    std::size_t index;
    VariableType type;
    double sigma_mean;      // mean of the variance-representation column
    double sigma_variance;  // variance of that column
};

// Per-dimension variable types plus the statistics that justified them.
struct VariableAssignment {
    std::vector<DimensionRecord> dims;
    double alpha = 0.1;

    std::size_t size() const { return dims.size(); }
    VariableType type_of(std::size_t dim) const { return dims.at(dim).type; }
    std::vector<std::size_t> indices_of(const std::set<VariableType>& types) const;

    std::string to_json() const;
    static VariableAssignment from_json(const std::string& text);
    // FNV-1a over the canonical JSON form; used to tie reports to the
    // assignment they were computed against.
    std::string digest() const;
};

struct AssignmentCounts {
    std::size_t n_active = 0;
    std::size_t n_passive = 0;
    std::size_t n_mixed = 0;
};

// A dimension is passive when its variance-representation column stays in
// the closed band around 1 with column variance at most alpha, active when
// the band sits around 0, and mixed otherwise. Requires positive variance
// entries and at least 2 rows.
VariableAssignment classify_variables(const Matrix& variance,
                                      const ClassifierConfig& config);

// Slices every matrix of the set to the columns whose type is in `types`,
// preserving example order and the relative column order.
RepresentationSet select_subset(const RepresentationSet& set,
                                const VariableAssignment& assignment,
                                const std::set<VariableType>& types);

AssignmentCounts summarise_assignment(const VariableAssignment& assignment);

}  // namespace polaris
