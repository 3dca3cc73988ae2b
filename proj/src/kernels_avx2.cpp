// Compiled with -mavx2; only reached after a runtime CPU check.
#include <immintrin.h>

#include "kernels_impl.hpp"

namespace gazenet::kernels::detail {

namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    acc1 = _mm256_add_pd(acc1, _mm256_mul_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4)));
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

double dot_strided(const double* a, const double* b, std::size_t b_stride, std::size_t n) {
  if (b_stride == 1) return dot(a, b, n);
  const auto st = static_cast<long long>(b_stride);
  const __m256i idx = _mm256_set_epi64x(3 * st, 2 * st, st, 0);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d bv = _mm256_i64gather_pd(b + i * b_stride, idx, 8);
    acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(a + i), bv));
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += a[i] * b[i * b_stride];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d av = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d yv = _mm256_loadu_pd(y + i);
    _mm256_storeu_pd(y + i, _mm256_add_pd(yv, _mm256_mul_pd(av, _mm256_loadu_pd(x + i))));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void axpy_gather(double alpha, const double* x, std::size_t x_stride, double* y, std::size_t n) {
  if (x_stride == 1) return axpy(alpha, x, y, n);
  const auto st = static_cast<long long>(x_stride);
  const __m256i idx = _mm256_set_epi64x(3 * st, 2 * st, st, 0);
  const __m256d av = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d xv = _mm256_i64gather_pd(x + i * x_stride, idx, 8);
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), _mm256_mul_pd(av, xv)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i * x_stride];
}

void axpy_scatter(double alpha, const double* x, double* y, std::size_t y_stride, std::size_t n) {
  if (y_stride == 1) return axpy(alpha, x, y, n);
  // AVX2 has no scatter; vectorize the products and store lane by lane.
  const __m256d av = _mm256_set1_pd(alpha);
  alignas(32) double prod[4];
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_store_pd(prod, _mm256_mul_pd(av, _mm256_loadu_pd(x + i)));
    y[i * y_stride] += prod[0];
    y[(i + 1) * y_stride] += prod[1];
    y[(i + 2) * y_stride] += prod[2];
    y[(i + 3) * y_stride] += prod[3];
  }
  for (; i < n; ++i) y[i * y_stride] += alpha * x[i];
}

double sum(const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
  double s = hsum(acc);
  for (; i < n; ++i) s += x[i];
  return s;
}

}  // namespace

const KernelTable& avx2_table() {
  static const KernelTable t{Backend::Avx2, dot, dot_strided, axpy, axpy_gather, axpy_scatter, sum};
  return t;
}

}  // namespace gazenet::kernels::detail
