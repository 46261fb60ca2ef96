#pragma once

#include <optional>
#include <string>

#include "polaris/matrix.hpp"

namespace polaris {

enum class RepresentationKind { mean, sampled, variance };

std::string to_string(RepresentationKind kind);
RepresentationKind representation_kind_from_string(const std::string& s);

// z = mean + sqrt(variance) * noise, elementwise. Shapes must match and
// every variance entry must be positive.
Matrix reparameterise(const Matrix& mean, const Matrix& variance,
                      const Matrix& noise);

// Aligned mean / variance / sampled matrices over a batch of examples,
// with the noise draws kept when available. When noise is present the
// construction checks sampled == mean + noise*sqrt(variance) bit-for-bit.
class RepresentationSet {
  public:
    static RepresentationSet create(Matrix mean, Matrix variance,
                                    Matrix sampled,
                                    std::optional<Matrix> noise = std::nullopt);

    std::size_t examples() const { return mean_.rows(); }
    std::size_t dims() const { return mean_.cols(); }

    const Matrix& mean() const { return mean_; }
    const Matrix& variance() const { return variance_; }
    const Matrix& sampled() const { return sampled_; }
    const std::optional<Matrix>& noise() const { return noise_; }

    const Matrix& matrix_for(RepresentationKind kind) const;

  private:
    RepresentationSet(Matrix mean, Matrix variance, Matrix sampled,
                      std::optional<Matrix> noise)
        : mean_(std::move(mean)),
          variance_(std::move(variance)),
          sampled_(std::move(sampled)),
          noise_(std::move(noise)) {}

    Matrix mean_, variance_, sampled_;
    std::optional<Matrix> noise_;
};

}  // namespace polaris
