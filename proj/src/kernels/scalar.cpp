// Scalar reference kernels. These are the ground truth the SIMD lanes are
// tested against; keep them simple and obviously correct.

#include <cmath>
#include <cstddef>

#include "polaris/kernels.hpp"

#include "tables.hpp"

namespace polaris::kernels {
namespace {

constexpr double kBceEps = 1e-7;

void s_add(const double* a, const double* b, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
}

void s_sub(const double* a, const double* b, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] - b[i];
}

void s_mul(const double* a, const double* b, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void s_scale(double a, double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

void s_axpy(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void s_exp(const double* x, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = std::exp(x[i]);
}

void s_log(const double* x, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = std::log(x[i]);
}

void s_sigmoid(const double* x, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = 1.0 / (1.0 + std::exp(-x[i]));
}

void s_relu(const double* x, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void s_relu_mask_mul(const double* pre, const double* g, double* out,
                     std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = pre[i] > 0.0 ? g[i] : 0.0;
}

void s_reparam(const double* mean, const double* var, const double* eps,
               double* z, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        const double s = std::sqrt(var[i]);
        const double t = eps[i] * s;
        z[i] = mean[i] + t;
    }
}

double s_sum(const double* x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i];
    return acc;
}

double s_dot(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

double s_sumsq(const double* x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i] * x[i];
    return acc;
}

double s_bce_sum(const double* p, const double* t, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double q = p[i];
        if (q < kBceEps) q = kBceEps;
        if (q > 1.0 - kBceEps) q = 1.0 - kBceEps;
        acc -= t[i] * std::log(q) + (1.0 - t[i]) * std::log(1.0 - q);
    }
    return acc;
}

void prescale_c(double* c, std::size_t m, std::size_t n, std::size_t ldc,
                double beta) {
    if (beta == 1.0) return;
    for (std::size_t i = 0; i < m; ++i) {
        double* crow = c + i * ldc;
        if (beta == 0.0) {
            for (std::size_t j = 0; j < n; ++j) crow[j] = 0.0;
        } else {
            for (std::size_t j = 0; j < n; ++j) crow[j] *= beta;
        }
    }
}

void s_gemm_nn(std::size_t m, std::size_t n, std::size_t k, const double* a,
               std::size_t lda, const double* b, std::size_t ldb, double* c,
               std::size_t ldc, double beta) {
    prescale_c(c, m, n, ldc, beta);
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = a + i * lda;
        double* crow = c + i * ldc;
        for (std::size_t p = 0; p < k; ++p) {
            const double av = arow[p];
            const double* brow = b + p * ldb;
            for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
}

void s_gemm_nt(std::size_t m, std::size_t n, std::size_t k, const double* a,
               std::size_t lda, const double* b, std::size_t ldb, double* c,
               std::size_t ldc, double beta) {
    prescale_c(c, m, n, ldc, beta);
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = a + i * lda;
        double* crow = c + i * ldc;
        for (std::size_t j = 0; j < n; ++j) {
            const double* brow = b + j * ldb;
            double acc = 0.0;
            for (std::size_t p = 0; p < k; ++p) acc += arow[p] * brow[p];
            crow[j] += acc;
        }
    }
}

void s_gemm_tn(std::size_t m, std::size_t n, std::size_t k, const double* a,
               std::size_t lda, const double* b, std::size_t ldb, double* c,
               std::size_t ldc, double beta) {
    prescale_c(c, m, n, ldc, beta);
    for (std::size_t p = 0; p < k; ++p) {
        const double* arow = a + p * lda;
        const double* brow = b + p * ldb;
        for (std::size_t i = 0; i < m; ++i) {
            const double av = arow[i];
            double* crow = c + i * ldc;
            for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
}

}  // namespace

const Ops kScalarOps = {
    .name = "scalar",
    .add = s_add,
    .sub = s_sub,
    .mul = s_mul,
    .scale = s_scale,
    .axpy = s_axpy,
    .exp = s_exp,
    .log = s_log,
    .sigmoid = s_sigmoid,
    .relu = s_relu,
    .relu_mask_mul = s_relu_mask_mul,
    .reparam = s_reparam,
    .sum = s_sum,
    .dot = s_dot,
    .sumsq = s_sumsq,
    .bce_sum = s_bce_sum,
    .gemm_nn = s_gemm_nn,
    .gemm_nt = s_gemm_nt,
    .gemm_tn = s_gemm_tn,
};

}  // namespace polaris::kernels
