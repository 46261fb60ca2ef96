#pragma once

#include <cstddef>
#include <string>

namespace polaris::kernels {

enum class Isa { scalar, avx2 };

// Table of double-precision kernels. One table per instruction set; the
// active table is chosen at startup from CPUID (override with POLARIS_ISA
// or set_isa). Scalar and SIMD variants of every entry are equivalence-
// tested against each other.
//
// reparam, add, sub, mul, scale, relu and relu_mask_mul avoid FMA
// contraction in every lane, so their results are bit-identical across
// lanes. Reductions and GEMM reassociate and may differ by rounding.
struct Ops {
    const char* name;

    // Elementwise over length-n arrays. out may alias an input.
    void (*add)(const double* a, const double* b, double* out, std::size_t n);
    void (*sub)(const double* a, const double* b, double* out, std::size_t n);
    void (*mul)(const double* a, const double* b, double* out, std::size_t n);
    void (*scale)(double a, double* x, std::size_t n);               // x *= a
    void (*axpy)(double a, const double* x, double* y, std::size_t n);  // y += a*x
    void (*exp)(const double* x, double* out, std::size_t n);
    void (*log)(const double* x, double* out, std::size_t n);
    void (*sigmoid)(const double* x, double* out, std::size_t n);
    void (*relu)(const double* x, double* out, std::size_t n);
    // out = pre > 0 ? g : 0   (backward of relu)
    void (*relu_mask_mul)(const double* pre, const double* g, double* out,
                          std::size_t n);
    // z = mean + sqrt(var) * eps, elementwise; no FMA so the identity is
    // reproducible bit-for-bit regardless of the active lane.
    void (*reparam)(const double* mean, const double* var, const double* eps,
                    double* z, std::size_t n);

    // Reductions.
    double (*sum)(const double* x, std::size_t n);
    double (*dot)(const double* a, const double* b, std::size_t n);
    double (*sumsq)(const double* x, std::size_t n);
    // Bernoulli negative log-likelihood with p clamped to
    // [1e-7, 1 - 1e-7]: sum of -(t*log(p) + (1-t)*log(1-p)).
    double (*bce_sum)(const double* p, const double* t, std::size_t n);

    // Row-major GEMM, alpha = 1: C = op(A)*op(B) + beta*C with beta in {0,1}
    // semantics (any beta accepted; C is pre-scaled).
    //   nn: C[m x n] = A[m x k] * B[k x n]
    //   nt: C[m x n] = A[m x k] * B[n x k]^T
    //   tn: C[m x n] = A[k x m]^T * B[k x n]
    void (*gemm_nn)(std::size_t m, std::size_t n, std::size_t k,
                    const double* a, std::size_t lda, const double* b,
                    std::size_t ldb, double* c, std::size_t ldc, double beta);
    void (*gemm_nt)(std::size_t m, std::size_t n, std::size_t k,
                    const double* a, std::size_t lda, const double* b,
                    std::size_t ldb, double* c, std::size_t ldc, double beta);
    void (*gemm_tn)(std::size_t m, std::size_t n, std::size_t k,
                    const double* a, std::size_t lda, const double* b,
                    std::size_t ldb, double* c, std::size_t ldc, double beta);
};

// Active kernel table.
const Ops& ops();

Isa active_isa();
bool isa_supported(Isa isa);
// Switch the active table; returns false (and leaves the table unchanged)
// if the host does not support the requested lane. Not thread-safe; meant
// for startup and tests.
bool set_isa(Isa isa);

// Direct access to a specific lane, for equivalence tests.
const Ops& ops_for(Isa isa);

std::string isa_name(Isa isa);

}  // namespace polaris::kernels
