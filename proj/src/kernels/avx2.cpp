// AVX2+FMA kernel lane. This TU is compiled with -mavx2 -mfma and must only
// be reached through the dispatch table after a CPUID check.
//
// exp/log use the Cephes polynomial algorithms; agreement with the scalar
// (libm) lane is a couple of ulp and is pinned by the equivalence tests.
// reparam/add/sub/mul/scale/relu use plain intrinsics (no FMA) so they are
// bit-identical to the scalar lane.

#include <immintrin.h>

#include <cmath>
#include <cstddef>
#include <cstdint>

#include "polaris/kernels.hpp"

#include "tables.hpp"

namespace polaris::kernels {
namespace {

constexpr double kBceEps = 1e-7;

inline __m256d load4(const double* p) { return _mm256_loadu_pd(p); }
inline void store4(double* p, __m256d v) { _mm256_storeu_pd(p, v); }

inline __m256i tail_mask(std::size_t r) {
    alignas(32) static const std::int64_t rows[4][4] = {
        {0, 0, 0, 0},
        {-1, 0, 0, 0},
        {-1, -1, 0, 0},
        {-1, -1, -1, 0},
    };
    return _mm256_load_si256(reinterpret_cast<const __m256i*>(rows[r]));
}

// ---------------------------------------------------------------------------
// exp(x): range reduction x = n*ln2 + r, then a Pade approximant of exp(r).
// ---------------------------------------------------------------------------

inline __m256d exp4(__m256d x) {
    const __m256d log2e = _mm256_set1_pd(1.4426950408889634073599);
    const __m256d c1 = _mm256_set1_pd(6.93359375e-1);
    const __m256d c2 = _mm256_set1_pd(-2.121944400546905827679e-4);
    const __m256d p0 = _mm256_set1_pd(1.26177193074810590878e-4);
    const __m256d p1 = _mm256_set1_pd(3.02994407707441961300e-2);
    const __m256d p2 = _mm256_set1_pd(9.99999999999999999910e-1);
    const __m256d q0 = _mm256_set1_pd(3.00198505138664455042e-6);
    const __m256d q1 = _mm256_set1_pd(2.52448340349684104192e-3);
    const __m256d q2 = _mm256_set1_pd(2.27265548208155028766e-1);
    const __m256d q3 = _mm256_set1_pd(2.00000000000000000005e0);
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d two = _mm256_set1_pd(2.0);
    const __m256d max_x = _mm256_set1_pd(709.782712893384);
    const __m256d min_x = _mm256_set1_pd(-745.133219101941108420);

    const __m256d nf = _mm256_round_pd(
        _mm256_mul_pd(x, log2e), _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    __m256d r = _mm256_fnmadd_pd(nf, c1, x);
    r = _mm256_fnmadd_pd(nf, c2, r);
    const __m256d z = _mm256_mul_pd(r, r);

    __m256d px = _mm256_fmadd_pd(p0, z, p1);
    px = _mm256_fmadd_pd(px, z, p2);
    px = _mm256_mul_pd(px, r);
    __m256d qx = _mm256_fmadd_pd(q0, z, q1);
    qx = _mm256_fmadd_pd(qx, z, q2);
    qx = _mm256_fmadd_pd(qx, z, q3);
    __m256d e = _mm256_div_pd(px, _mm256_sub_pd(qx, px));
    e = _mm256_fmadd_pd(two, e, one);

    // Scale by 2^n in two halves so gradual underflow still works.
    const __m128i n32 = _mm256_cvtpd_epi32(nf);
    const __m128i h32 = _mm_srai_epi32(n32, 1);
    const __m128i rest32 = _mm_sub_epi32(n32, h32);
    const __m256i bias = _mm256_set1_epi64x(1023);
    const __m256d s1 = _mm256_castsi256_pd(_mm256_slli_epi64(
        _mm256_add_epi64(_mm256_cvtepi32_epi64(h32), bias), 52));
    const __m256d s2 = _mm256_castsi256_pd(_mm256_slli_epi64(
        _mm256_add_epi64(_mm256_cvtepi32_epi64(rest32), bias), 52));
    e = _mm256_mul_pd(_mm256_mul_pd(e, s1), s2);

    const __m256d inf = _mm256_set1_pd(HUGE_VAL);
    e = _mm256_blendv_pd(e, inf, _mm256_cmp_pd(x, max_x, _CMP_GT_OQ));
    e = _mm256_blendv_pd(e, _mm256_setzero_pd(),
                         _mm256_cmp_pd(x, min_x, _CMP_LT_OQ));
    // NaN input: both compares above are false, and r/z carry the NaN through.
    return e;
}

// ---------------------------------------------------------------------------
// log(x): mantissa/exponent split, then log(m) = 2*atanh(s) with
// s = (m-1)/(m+1) on [sqrt(1/2), sqrt(2)). |s| <= 0.172, so the odd Taylor
// series in s truncated at s^19 is exact to well below a double ulp.
// ---------------------------------------------------------------------------

inline __m256d log4(__m256d x) {
    const __m256d sqrth = _mm256_set1_pd(0.70710678118654752440);
    const __m256d one = _mm256_set1_pd(1.0);

    // Normalise subnormals so the exponent field is usable.
    const __m256d tiny = _mm256_set1_pd(2.2250738585072014e-308);
    const __m256d sub_mask = _mm256_and_pd(
        _mm256_cmp_pd(x, tiny, _CMP_LT_OQ),
        _mm256_cmp_pd(x, _mm256_setzero_pd(), _CMP_GT_OQ));
    const __m256d xs =
        _mm256_blendv_pd(x, _mm256_mul_pd(x, _mm256_set1_pd(0x1.0p54)), sub_mask);

    const __m256i bits = _mm256_castpd_si256(xs);
    // Exponent as a double via the 2^52 bias trick (no epi64->pd on AVX2).
    const __m256i raw_e =
        _mm256_and_si256(_mm256_srli_epi64(bits, 52), _mm256_set1_epi64x(0x7ff));
    const __m256d magic = _mm256_set1_pd(0x1.0p52);
    __m256d e = _mm256_sub_pd(
        _mm256_castsi256_pd(_mm256_or_si256(raw_e, _mm256_castpd_si256(magic))),
        magic);
    e = _mm256_sub_pd(e, _mm256_set1_pd(1022.0));
    e = _mm256_blendv_pd(e, _mm256_sub_pd(e, _mm256_set1_pd(54.0)), sub_mask);

    // Mantissa in [0.5, 1).
    const __m256i mant_bits = _mm256_or_si256(
        _mm256_and_si256(bits, _mm256_set1_epi64x(0x000fffffffffffffLL)),
        _mm256_set1_epi64x(0x3fe0000000000000LL));
    __m256d m = _mm256_castsi256_pd(mant_bits);

    const __m256d low = _mm256_cmp_pd(m, sqrth, _CMP_LT_OQ);
    e = _mm256_sub_pd(e, _mm256_and_pd(low, one));
    m = _mm256_blendv_pd(m, _mm256_add_pd(m, m), low);

    const __m256d s =
        _mm256_div_pd(_mm256_sub_pd(m, one), _mm256_add_pd(m, one));
    const __m256d z = _mm256_mul_pd(s, s);
    // coefficients 2/(2k+1), k = 9..1
    __m256d p = _mm256_set1_pd(2.0 / 19.0);
    p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(2.0 / 17.0));
    p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(2.0 / 15.0));
    p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(2.0 / 13.0));
    p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(2.0 / 11.0));
    p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(2.0 / 9.0));
    p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(2.0 / 7.0));
    p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(2.0 / 5.0));
    p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(2.0 / 3.0));

    const __m256d two_s = _mm256_add_pd(s, s);
    __m256d res = _mm256_fmadd_pd(_mm256_mul_pd(s, z), p, two_s);
    res = _mm256_fmadd_pd(e, _mm256_set1_pd(-2.121944400546905827679e-4), res);
    res = _mm256_fmadd_pd(e, _mm256_set1_pd(0.693359375), res);

    // Specials: log(0) = -inf, log(neg) = NaN, log(inf) = inf, NaN -> NaN.
    const __m256d zero_mask =
        _mm256_cmp_pd(x, _mm256_setzero_pd(), _CMP_EQ_OQ);
    const __m256d neg_mask = _mm256_cmp_pd(x, _mm256_setzero_pd(), _CMP_LT_OQ);
    const __m256d inf = _mm256_set1_pd(HUGE_VAL);
    const __m256d inf_mask = _mm256_cmp_pd(x, inf, _CMP_EQ_OQ);
    const __m256d nan_mask = _mm256_cmp_pd(x, x, _CMP_UNORD_Q);
    res = _mm256_blendv_pd(res, _mm256_set1_pd(-HUGE_VAL), zero_mask);
    res = _mm256_blendv_pd(res, _mm256_set1_pd(std::nan("")),
                           _mm256_or_pd(neg_mask, nan_mask));
    res = _mm256_blendv_pd(res, inf, inf_mask);
    return res;
}

inline __m256d sigmoid4(__m256d x) {
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d ex = exp4(_mm256_sub_pd(_mm256_setzero_pd(), x));
    return _mm256_div_pd(one, _mm256_add_pd(one, ex));
}

// ---------------------------------------------------------------------------
// Elementwise kernels.
// ---------------------------------------------------------------------------

void a_add(const double* a, const double* b, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        store4(out + i, _mm256_add_pd(load4(a + i), load4(b + i)));
    for (; i < n; ++i) out[i] = a[i] + b[i];
}

void a_sub(const double* a, const double* b, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        store4(out + i, _mm256_sub_pd(load4(a + i), load4(b + i)));
    for (; i < n; ++i) out[i] = a[i] - b[i];
}

void a_mul(const double* a, const double* b, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        store4(out + i, _mm256_mul_pd(load4(a + i), load4(b + i)));
    for (; i < n; ++i) out[i] = a[i] * b[i];
}

void a_scale(double a, double* x, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) store4(x + i, _mm256_mul_pd(load4(x + i), va));
    for (; i < n; ++i) x[i] *= a;
}

void a_axpy(double a, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        store4(y + i, _mm256_fmadd_pd(va, load4(x + i), load4(y + i)));
    for (; i < n; ++i) y[i] += a * x[i];
}

void a_exp(const double* x, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) store4(out + i, exp4(load4(x + i)));
    if (i < n) {
        const __m256i mask = tail_mask(n - i);
        const __m256d v = _mm256_maskload_pd(x + i, mask);
        _mm256_maskstore_pd(out + i, mask, exp4(v));
    }
}

void a_log(const double* x, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) store4(out + i, log4(load4(x + i)));
    if (i < n) {
        const __m256i mask = tail_mask(n - i);
        // Masked-out lanes read as +0.0; log4 maps them to -inf which the
        // masked store then drops.
        const __m256d v = _mm256_maskload_pd(x + i, mask);
        _mm256_maskstore_pd(out + i, mask, log4(v));
    }
}

void a_sigmoid(const double* x, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) store4(out + i, sigmoid4(load4(x + i)));
    if (i < n) {
        const __m256i mask = tail_mask(n - i);
        const __m256d v = _mm256_maskload_pd(x + i, mask);
        _mm256_maskstore_pd(out + i, mask, sigmoid4(v));
    }
}

void a_relu(const double* x, double* out, std::size_t n) {
    const __m256d zero = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        store4(out + i, _mm256_max_pd(load4(x + i), zero));
    for (; i < n; ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void a_relu_mask_mul(const double* pre, const double* g, double* out,
                     std::size_t n) {
    const __m256d zero = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d keep = _mm256_cmp_pd(load4(pre + i), zero, _CMP_GT_OQ);
        store4(out + i, _mm256_and_pd(load4(g + i), keep));
    }
    for (; i < n; ++i) out[i] = pre[i] > 0.0 ? g[i] : 0.0;
}

void a_reparam(const double* mean, const double* var, const double* eps,
               double* z, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d s = _mm256_sqrt_pd(load4(var + i));
        const __m256d t = _mm256_mul_pd(load4(eps + i), s);
        store4(z + i, _mm256_add_pd(load4(mean + i), t));
    }
    for (; i < n; ++i) z[i] = mean[i] + eps[i] * std::sqrt(var[i]);
}

// ---------------------------------------------------------------------------
// Reductions (4 parallel accumulators; association differs from scalar).
// ---------------------------------------------------------------------------

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double a_sum(const double* x, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, load4(x + i));
    double r = hsum(acc);
    for (; i < n; ++i) r += x[i];
    return r;
}

double a_dot(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        acc = _mm256_fmadd_pd(load4(a + i), load4(b + i), acc);
    double r = hsum(acc);
    for (; i < n; ++i) r += a[i] * b[i];
    return r;
}

double a_sumsq(const double* x, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d v = load4(x + i);
        acc = _mm256_fmadd_pd(v, v, acc);
    }
    double r = hsum(acc);
    for (; i < n; ++i) r += x[i] * x[i];
    return r;
}

double a_bce_sum(const double* p, const double* t, std::size_t n) {
    const __m256d lo = _mm256_set1_pd(kBceEps);
    const __m256d hi = _mm256_set1_pd(1.0 - kBceEps);
    const __m256d one = _mm256_set1_pd(1.0);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d q =
            _mm256_min_pd(_mm256_max_pd(load4(p + i), lo), hi);
        const __m256d tv = load4(t + i);
        const __m256d term = _mm256_add_pd(
            _mm256_mul_pd(tv, log4(q)),
            _mm256_mul_pd(_mm256_sub_pd(one, tv), log4(_mm256_sub_pd(one, q))));
        acc = _mm256_sub_pd(acc, term);
    }
    double r = hsum(acc);
    for (; i < n; ++i) {
        double q = p[i];
        if (q < kBceEps) q = kBceEps;
        if (q > 1.0 - kBceEps) q = 1.0 - kBceEps;
        // Stay on the vector log so both paths of this lane agree.
        double lq, l1q, in[4] = {q, 1.0 - q, 0, 0}, outv[4];
        _mm256_storeu_pd(outv, log4(_mm256_loadu_pd(in)));
        lq = outv[0];
        l1q = outv[1];
        r -= t[i] * lq + (1.0 - t[i]) * l1q;
    }
    return r;
}

// ---------------------------------------------------------------------------
// GEMM. 4x8 register tiles with broadcast-A / stream-B inner loops; edges
// fall back to plain loops. C is pre-scaled by beta, kernels accumulate.
// ---------------------------------------------------------------------------

void prescale_c(double* c, std::size_t m, std::size_t n, std::size_t ldc,
                double beta) {
    if (beta == 1.0) return;
    const __m256d vb = _mm256_set1_pd(beta);
    for (std::size_t i = 0; i < m; ++i) {
        double* crow = c + i * ldc;
        std::size_t j = 0;
        if (beta == 0.0) {
            const __m256d z = _mm256_setzero_pd();
            for (; j + 4 <= n; j += 4) store4(crow + j, z);
            for (; j < n; ++j) crow[j] = 0.0;
        } else {
            for (; j + 4 <= n; j += 4)
                store4(crow + j, _mm256_mul_pd(load4(crow + j), vb));
            for (; j < n; ++j) crow[j] *= beta;
        }
    }
}

// c[i0..i0+mr) x [j0..j0+8) += A-panel * B-panel, A indexed (row, p).
template <int MR>
inline void tile_nn(std::size_t i0, std::size_t j0, std::size_t k,
                    const double* a, std::size_t lda, const double* b,
                    std::size_t ldb, double* c, std::size_t ldc) {
    __m256d acc0[MR], acc1[MR];
    for (int r = 0; r < MR; ++r) {
        acc0[r] = load4(c + (i0 + r) * ldc + j0);
        acc1[r] = load4(c + (i0 + r) * ldc + j0 + 4);
    }
    for (std::size_t p = 0; p < k; ++p) {
        const double* brow = b + p * ldb + j0;
        const __m256d b0 = load4(brow);
        const __m256d b1 = load4(brow + 4);
        for (int r = 0; r < MR; ++r) {
            const __m256d av = _mm256_broadcast_sd(a + (i0 + r) * lda + p);
            acc0[r] = _mm256_fmadd_pd(av, b0, acc0[r]);
            acc1[r] = _mm256_fmadd_pd(av, b1, acc1[r]);
        }
    }
    for (int r = 0; r < MR; ++r) {
        store4(c + (i0 + r) * ldc + j0, acc0[r]);
        store4(c + (i0 + r) * ldc + j0 + 4, acc1[r]);
    }
}

void edge_nn(std::size_t i_begin, std::size_t i_end, std::size_t j_begin,
             std::size_t j_end, std::size_t k, const double* a,
             std::size_t lda, const double* b, std::size_t ldb, double* c,
             std::size_t ldc) {
    for (std::size_t i = i_begin; i < i_end; ++i) {
        const double* arow = a + i * lda;
        double* crow = c + i * ldc;
        for (std::size_t p = 0; p < k; ++p) {
            const double av = arow[p];
            const double* brow = b + p * ldb;
            for (std::size_t j = j_begin; j < j_end; ++j)
                crow[j] += av * brow[j];
        }
    }
}

void a_gemm_nn(std::size_t m, std::size_t n, std::size_t k, const double* a,
               std::size_t lda, const double* b, std::size_t ldb, double* c,
               std::size_t ldc, double beta) {
    prescale_c(c, m, n, ldc, beta);
    const std::size_t m4 = m - m % 4;
    const std::size_t n8 = n - n % 8;
    for (std::size_t i = 0; i < m4; i += 4)
        for (std::size_t j = 0; j < n8; j += 8)
            tile_nn<4>(i, j, k, a, lda, b, ldb, c, ldc);
    if (n8 < n) edge_nn(0, m4, n8, n, k, a, lda, b, ldb, c, ldc);
    if (m4 < m) edge_nn(m4, m, 0, n, k, a, lda, b, ldb, c, ldc);
}

void a_gemm_nt(std::size_t m, std::size_t n, std::size_t k, const double* a,
               std::size_t lda, const double* b, std::size_t ldb, double* c,
               std::size_t ldc, double beta) {
    prescale_c(c, m, n, ldc, beta);
    const std::size_t m2 = m - m % 2;
    const std::size_t n4 = n - n % 4;
    const std::size_t k4 = k - k % 4;
    for (std::size_t i = 0; i < m2; i += 2) {
        const double* a0 = a + i * lda;
        const double* a1 = a0 + lda;
        for (std::size_t j = 0; j < n4; j += 4) {
            __m256d acc[2][4];
            for (int r = 0; r < 2; ++r)
                for (int s = 0; s < 4; ++s) acc[r][s] = _mm256_setzero_pd();
            for (std::size_t p = 0; p < k4; p += 4) {
                const __m256d va0 = load4(a0 + p);
                const __m256d va1 = load4(a1 + p);
                for (int s = 0; s < 4; ++s) {
                    const __m256d vb = load4(b + (j + s) * ldb + p);
                    acc[0][s] = _mm256_fmadd_pd(va0, vb, acc[0][s]);
                    acc[1][s] = _mm256_fmadd_pd(va1, vb, acc[1][s]);
                }
            }
            for (int r = 0; r < 2; ++r) {
                // Fold the 4 column accumulators into one vector of dots.
                const __m256d t01 = _mm256_hadd_pd(acc[r][0], acc[r][1]);
                const __m256d t23 = _mm256_hadd_pd(acc[r][2], acc[r][3]);
                const __m256d swap = _mm256_permute2f128_pd(t01, t23, 0x21);
                const __m256d blend = _mm256_blend_pd(t01, t23, 0b1100);
                __m256d dots = _mm256_add_pd(swap, blend);
                if (k4 < k) {
                    alignas(32) double tailv[4];
                    const double* arow = r == 0 ? a0 : a1;
                    for (int s = 0; s < 4; ++s) {
                        double acc_t = 0.0;
                        const double* brow = b + (j + s) * ldb;
                        for (std::size_t p = k4; p < k; ++p)
                            acc_t += arow[p] * brow[p];
                        tailv[s] = acc_t;
                    }
                    dots = _mm256_add_pd(dots, _mm256_load_pd(tailv));
                }
                double* crow = c + (i + r) * ldc + j;
                store4(crow, _mm256_add_pd(load4(crow), dots));
            }
        }
    }
    // Edges: remaining columns for the unrolled rows, then remaining rows.
    for (std::size_t i = 0; i < m2; ++i) {
        const double* arow = a + i * lda;
        double* crow = c + i * ldc;
        for (std::size_t j = n4; j < n; ++j) {
            const double* brow = b + j * ldb;
            double acc_t = 0.0;
            for (std::size_t p = 0; p < k; ++p) acc_t += arow[p] * brow[p];
            crow[j] += acc_t;
        }
    }
    for (std::size_t i = m2; i < m; ++i) {
        const double* arow = a + i * lda;
        double* crow = c + i * ldc;
        for (std::size_t j = 0; j < n; ++j) {
            const double* brow = b + j * ldb;
            double acc_t = 0.0;
            for (std::size_t p = 0; p < k; ++p) acc_t += arow[p] * brow[p];
            crow[j] += acc_t;
        }
    }
}

template <int MR>
inline void tile_tn(std::size_t i0, std::size_t j0, std::size_t k,
                    const double* a, std::size_t lda, const double* b,
                    std::size_t ldb, double* c, std::size_t ldc) {
    __m256d acc0[MR], acc1[MR];
    for (int r = 0; r < MR; ++r) {
        acc0[r] = load4(c + (i0 + r) * ldc + j0);
        acc1[r] = load4(c + (i0 + r) * ldc + j0 + 4);
    }
    for (std::size_t p = 0; p < k; ++p) {
        const double* brow = b + p * ldb + j0;
        const double* acol = a + p * lda + i0;
        const __m256d b0 = load4(brow);
        const __m256d b1 = load4(brow + 4);
        for (int r = 0; r < MR; ++r) {
            const __m256d av = _mm256_broadcast_sd(acol + r);
            acc0[r] = _mm256_fmadd_pd(av, b0, acc0[r]);
            acc1[r] = _mm256_fmadd_pd(av, b1, acc1[r]);
        }
    }
    for (int r = 0; r < MR; ++r) {
        store4(c + (i0 + r) * ldc + j0, acc0[r]);
        store4(c + (i0 + r) * ldc + j0 + 4, acc1[r]);
    }
}

void edge_tn(std::size_t i_begin, std::size_t i_end, std::size_t j_begin,
             std::size_t j_end, std::size_t k, const double* a,
             std::size_t lda, const double* b, std::size_t ldb, double* c,
             std::size_t ldc) {
    for (std::size_t p = 0; p < k; ++p) {
        const double* arow = a + p * lda;
        const double* brow = b + p * ldb;
        for (std::size_t i = i_begin; i < i_end; ++i) {
            const double av = arow[i];
            double* crow = c + i * ldc;
            for (std::size_t j = j_begin; j < j_end; ++j)
                crow[j] += av * brow[j];
        }
    }
}

void a_gemm_tn(std::size_t m, std::size_t n, std::size_t k, const double* a,
               std::size_t lda, const double* b, std::size_t ldb, double* c,
               std::size_t ldc, double beta) {
    prescale_c(c, m, n, ldc, beta);
    const std::size_t m4 = m - m % 4;
    const std::size_t n8 = n - n % 8;
    for (std::size_t i = 0; i < m4; i += 4)
        for (std::size_t j = 0; j < n8; j += 8)
            tile_tn<4>(i, j, k, a, lda, b, ldb, c, ldc);
    if (n8 < n) edge_tn(0, m4, n8, n, k, a, lda, b, ldb, c, ldc);
    if (m4 < m) edge_tn(m4, m, 0, n, k, a, lda, b, ldb, c, ldc);
}

}  // namespace

const Ops kAvx2Ops = {
    .name = "avx2",
    .add = a_add,
    .sub = a_sub,
    .mul = a_mul,
    .scale = a_scale,
    .axpy = a_axpy,
    .exp = a_exp,
    .log = a_log,
    .sigmoid = a_sigmoid,
    .relu = a_relu,
    .relu_mask_mul = a_relu_mask_mul,
    .reparam = a_reparam,
    .sum = a_sum,
    .dot = a_dot,
    .sumsq = a_sumsq,
    .bce_sum = a_bce_sum,
    .gemm_nn = a_gemm_nn,
    .gemm_nt = a_gemm_nt,
    .gemm_tn = a_gemm_tn,
};

}  // namespace polaris::kernels
