#include "detail.hpp"

#ifdef VITALFUSE_HAVE_AVX2_KERNELS

#include <immintrin.h>

namespace vf::kernels::detail {

namespace {

#define VF_AVX2 __attribute__((target("avx2,fma")))

VF_AVX2 inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

VF_AVX2 double dot_avx2(const double* x, const double* y, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc);
  double s = hsum(acc);
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

VF_AVX2 void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vy = _mm256_loadu_pd(y + i);
    vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy);
    _mm256_storeu_pd(y + i, vy);
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

VF_AVX2 void matvec_acc_avx2(const double* a, std::size_t rows,
                             std::size_t cols, const double* x, double* y) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = a + r * cols;
    __m256d acc = _mm256_setzero_pd();
    std::size_t c = 0;
    for (; c + 4 <= cols; c += 4)
      acc = _mm256_fmadd_pd(_mm256_loadu_pd(row + c), _mm256_loadu_pd(x + c),
                            acc);
    double s = hsum(acc);
    for (; c < cols; ++c) s += row[c] * x[c];
    y[r] += s;
  }
}

VF_AVX2 void matvec_t_acc_avx2(const double* a, std::size_t rows,
                               std::size_t cols, const double* x, double* y) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = a + r * cols;
    const __m256d xr = _mm256_set1_pd(x[r]);
    std::size_t c = 0;
    for (; c + 4 <= cols; c += 4) {
      __m256d vy = _mm256_loadu_pd(y + c);
      vy = _mm256_fmadd_pd(xr, _mm256_loadu_pd(row + c), vy);
      _mm256_storeu_pd(y + c, vy);
    }
    for (; c < cols; ++c) y[c] += row[c] * x[r];
  }
}

VF_AVX2 void outer_acc_avx2(const double* u, std::size_t m, const double* v,
                            std::size_t n, double* a) {
  for (std::size_t i = 0; i < m; ++i) {
    double* row = a + i * n;
    const __m256d ui = _mm256_set1_pd(u[i]);
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
      __m256d vr = _mm256_loadu_pd(row + j);
      vr = _mm256_fmadd_pd(ui, _mm256_loadu_pd(v + j), vr);
      _mm256_storeu_pd(row + j, vr);
    }
    for (; j < n; ++j) row[j] += u[i] * v[j];
  }
}

#undef VF_AVX2

}  // namespace

const Ops kAvx2Ops = {
    dot_avx2, axpy_avx2, matvec_acc_avx2, matvec_t_acc_avx2, outer_acc_avx2,
};

}  // namespace vf::kernels::detail

#endif  // VITALFUSE_HAVE_AVX2_KERNELS
