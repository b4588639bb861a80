// AVX2/FMA kernel variants. Compiled with -mavx2 -mfma on x86-64 only;
// selection happens at runtime in dispatch.cpp.

#include "fosls/kernels.hpp"

#if defined(__AVX2__) && defined(__FMA__)

#include <immintrin.h>

namespace fosls::kernels {
namespace {

double dot_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4)
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc0 = _mm256_add_pd(acc0, acc1);
    alignas(32) double lane[4];
    _mm256_store_pd(lane, acc0);
    double s = lane[0] + lane[1] + lane[2] + lane[3];
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vy = _mm256_loadu_pd(y + i);
        vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy);
        _mm256_storeu_pd(y + i, vy);
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

void axpby_avx2(double a, const double* x, double b, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    const __m256d vb = _mm256_set1_pd(b);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vy = _mm256_mul_pd(vb, _mm256_loadu_pd(y + i));
        vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy);
        _mm256_storeu_pd(y + i, vy);
    }
    for (; i < n; ++i) y[i] = a * x[i] + b * y[i];
}

void scal_avx2(double a, double* x, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(x + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
    for (; i < n; ++i) x[i] *= a;
}

void spmv_avx2(const Csr& m, const double* x, double* y) {
    for (int r = 0; r < m.rows; ++r) {
        int k = m.rowptr[r];
        const int end = m.rowptr[r + 1];
        __m256d acc = _mm256_setzero_pd();
        for (; k + 4 <= end; k += 4) {
            __m256d vx = _mm256_set_pd(x[m.colidx[k + 3]], x[m.colidx[k + 2]],
                                       x[m.colidx[k + 1]], x[m.colidx[k]]);
            acc = _mm256_fmadd_pd(_mm256_loadu_pd(m.vals.data() + k), vx, acc);
        }
        alignas(32) double lane[4];
        _mm256_store_pd(lane, acc);
        double s = lane[0] + lane[1] + lane[2] + lane[3];
        for (; k < end; ++k) s += m.vals[k] * x[m.colidx[k]];
        y[r] = s;
    }
}

void relu_avx2(double* z, std::size_t n) {
    const __m256d zero = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(z + i, _mm256_max_pd(_mm256_loadu_pd(z + i), zero));
    for (; i < n; ++i) z[i] = z[i] > 0.0 ? z[i] : 0.0;
}

void bisu_avx2(double* z, std::size_t n) {
    const __m256d zero = _mm256_setzero_pd();
    const __m256d one = _mm256_set1_pd(1.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d v = _mm256_loadu_pd(z + i);
        __m256d mask = _mm256_cmp_pd(v, zero, _CMP_GT_OQ);
        _mm256_storeu_pd(z + i, _mm256_and_pd(mask, one));
    }
    for (; i < n; ++i) z[i] = z[i] > 0.0 ? 1.0 : 0.0;
}

const KernelTable avx2_impl{"avx2",     dot_avx2,  axpy_avx2, axpby_avx2,
                            scal_avx2,  spmv_avx2, relu_avx2, bisu_avx2};

}  // namespace

const KernelTable* avx2_table_impl() { return &avx2_impl; }

}  // namespace fosls::kernels

#else

namespace fosls::kernels {
const KernelTable* avx2_table_impl() { return nullptr; }
}  // namespace fosls::kernels

#endif
