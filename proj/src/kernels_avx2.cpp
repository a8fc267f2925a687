// AVX2/FMA kernel variants. Compiled with -mavx2 -mfma; only reached when the
// dispatcher has confirmed cpu support at runtime.
#include "wsnrl/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

namespace wsnrl::kernels {
namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d sh = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

void v_gemm_nn(std::size_t m, std::size_t n, std::size_t k,
               const double* a, const double* b, double* c) {
    std::size_t n4 = n & ~std::size_t(3);
    for (std::size_t i = 0; i < m; ++i) {
        double* ci = c + i * n;
        const double* ai = a + i * k;
        for (std::size_t p = 0; p < k; ++p) {
            __m256d va = _mm256_set1_pd(ai[p]);
            const double* bp = b + p * n;
            std::size_t j = 0;
            for (; j < n4; j += 4) {
                __m256d vc = _mm256_loadu_pd(ci + j);
                vc = _mm256_fmadd_pd(va, _mm256_loadu_pd(bp + j), vc);
                _mm256_storeu_pd(ci + j, vc);
            }
            for (; j < n; ++j) ci[j] += ai[p] * bp[j];
        }
    }
}

void v_gemm_nt(std::size_t m, std::size_t n, std::size_t k,
               const double* a, const double* b, double* c) {
    std::size_t k4 = k & ~std::size_t(3);
    for (std::size_t i = 0; i < m; ++i) {
        const double* ai = a + i * k;
        double* ci = c + i * n;
        for (std::size_t j = 0; j < n; ++j) {
            const double* bj = b + j * k;
            __m256d acc = _mm256_setzero_pd();
            std::size_t p = 0;
            for (; p < k4; p += 4)
                acc = _mm256_fmadd_pd(_mm256_loadu_pd(ai + p), _mm256_loadu_pd(bj + p), acc);
            double tail = 0.0;
            for (; p < k; ++p) tail += ai[p] * bj[p];
            ci[j] += hsum(acc) + tail;
        }
    }
}

void v_gemm_tn(std::size_t m, std::size_t n, std::size_t k,
               const double* a, const double* b, double* c) {
    std::size_t n4 = n & ~std::size_t(3);
    for (std::size_t p = 0; p < k; ++p) {
        const double* ap = a + p * m;
        const double* bp = b + p * n;
        for (std::size_t i = 0; i < m; ++i) {
            __m256d va = _mm256_set1_pd(ap[i]);
            double* ci = c + i * n;
            std::size_t j = 0;
            for (; j < n4; j += 4) {
                __m256d vc = _mm256_loadu_pd(ci + j);
                vc = _mm256_fmadd_pd(va, _mm256_loadu_pd(bp + j), vc);
                _mm256_storeu_pd(ci + j, vc);
            }
            for (; j < n; ++j) ci[j] += ap[i] * bp[j];
        }
    }
}

double v_dot(std::size_t n, const double* x, const double* y) {
    std::size_t n4 = n & ~std::size_t(3);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i < n4; i += 4)
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc);
    double tail = 0.0;
    for (; i < n; ++i) tail += x[i] * y[i];
    return hsum(acc) + tail;
}

void v_axpy(std::size_t n, double a, const double* x, double* y) {
    std::size_t n4 = n & ~std::size_t(3);
    __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i < n4; i += 4) {
        __m256d vy = _mm256_loadu_pd(y + i);
        vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy);
        _mm256_storeu_pd(y + i, vy);
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

double v_sum(std::size_t n, const double* x) {
    std::size_t n4 = n & ~std::size_t(3);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i < n4; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
    double tail = 0.0;
    for (; i < n; ++i) tail += x[i];
    return hsum(acc) + tail;
}

// Branchless select keeps these bitwise identical to the scalar path.
void v_leaky(std::size_t n, double slope, const double* x, double* y) {
    std::size_t n4 = n & ~std::size_t(3);
    __m256d vs = _mm256_set1_pd(slope);
    __m256d zero = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i < n4; i += 4) {
        __m256d vx = _mm256_loadu_pd(x + i);
        __m256d mask = _mm256_cmp_pd(vx, zero, _CMP_GT_OQ);
        _mm256_storeu_pd(y + i, _mm256_blendv_pd(_mm256_mul_pd(vx, vs), vx, mask));
    }
    for (; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : slope * x[i];
}

void v_leaky_grad(std::size_t n, double slope, const double* x,
                  const double* dy, double* dx) {
    std::size_t n4 = n & ~std::size_t(3);
    __m256d vs = _mm256_set1_pd(slope);
    __m256d zero = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i < n4; i += 4) {
        __m256d vx = _mm256_loadu_pd(x + i);
        __m256d vdy = _mm256_loadu_pd(dy + i);
        __m256d mask = _mm256_cmp_pd(vx, zero, _CMP_GT_OQ);
        _mm256_storeu_pd(dx + i, _mm256_blendv_pd(_mm256_mul_pd(vdy, vs), vdy, mask));
    }
    for (; i < n; ++i) dx[i] = x[i] > 0.0 ? dy[i] : slope * dy[i];
}

}  // namespace

const Ops& avx2_ops() {
    static const Ops ops{v_gemm_nn, v_gemm_nt, v_gemm_tn, v_dot,
                         v_axpy,    v_sum,     v_leaky,   v_leaky_grad};
    return ops;
}

}  // namespace wsnrl::kernels

#endif  // x86-64
