#include "polaris/representation.hpp"

#include <cmath>
#include <cstring>

#include "polaris/kernels.hpp"

namespace polaris {

std::string to_string(RepresentationKind kind) {
    switch (kind) {
        case RepresentationKind::mean: return "mean";
        case RepresentationKind::sampled: return "sampled";
        case RepresentationKind::variance: return "variance";
    }
    return "mean";
}

RepresentationKind representation_kind_from_string(const std::string& s) {
    if (s == "mean") return RepresentationKind::mean;
    if (s == "sampled") return RepresentationKind::sampled;
    if (s == "variance") return RepresentationKind::variance;
    throw DomainError("unknown representation kind: '" + s + "'");
}

namespace {

void check_positive_variance(const Matrix& variance) {
    for (std::size_t i = 0; i < variance.rows(); ++i) {
        const double* r = variance.row(i);
        for (std::size_t j = 0; j < variance.cols(); ++j) {
            if (!(r[j] > 0.0))
                throw DomainError("variance entry at row " +
                                  std::to_string(i) + ", column " +
                                  std::to_string(j) + " is not positive");
        }
    }
}

}  // namespace

Matrix reparameterise(const Matrix& mean, const Matrix& variance,
                      const Matrix& noise) {
    if (!mean.same_shape(variance) || !mean.same_shape(noise))
        throw DimensionError("reparameterise: shape mismatch");
    check_positive_variance(variance);
    Matrix z(mean.rows(), mean.cols());
    kernels::ops().reparam(mean.data(), variance.data(), noise.data(),
                           z.data(), mean.size());
    return z;
}

RepresentationSet RepresentationSet::create(Matrix mean, Matrix variance,
                                            Matrix sampled,
                                            std::optional<Matrix> noise) {
    if (mean.empty())
        throw DimensionError("representation set: empty matrices");
    if (!mean.same_shape(variance) || !mean.same_shape(sampled))
        throw DimensionError("representation set: shape mismatch");
    if (noise && !mean.same_shape(*noise))
        throw DimensionError("representation set: noise shape mismatch");
    mean.ensure_finite("mean representation");
    sampled.ensure_finite("sampled representation");
    variance.ensure_finite("variance representation");
    check_positive_variance(variance);
    if (noise) {
        noise->ensure_finite("noise");
        const Matrix recomputed = reparameterise(mean, variance, *noise);
        if (std::memcmp(recomputed.data(), sampled.data(),
                        sampled.size() * sizeof(double)) != 0)
            throw DomainError(
                "representation set: sampled does not equal "
                "mean + noise*sqrt(variance)");
    }
    return RepresentationSet(std::move(mean), std::move(variance),
                             std::move(sampled), std::move(noise));
}

const Matrix& RepresentationSet::matrix_for(RepresentationKind kind) const {
    switch (kind) {
        case RepresentationKind::mean: return mean_;
        case RepresentationKind::sampled: return sampled_;
        case RepresentationKind::variance: return variance_;
    }
    return mean_;
}

}  // namespace polaris
