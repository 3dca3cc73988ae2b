#include <arm_neon.h>

#include "kernels_impl.hpp"

namespace gazenet::kernels::detail {

namespace {

double dot(const double* a, const double* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vaddq_f64(acc0, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
    acc1 = vaddq_f64(acc1, vmulq_f64(vld1q_f64(a + i + 2), vld1q_f64(b + i + 2)));
  }
  double s = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

double dot_strided(const double* a, const double* b, std::size_t b_stride, std::size_t n) {
  if (b_stride == 1) return dot(a, b, n);
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i * b_stride];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const float64x2_t av = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(y + i, vaddq_f64(vld1q_f64(y + i), vmulq_f64(av, vld1q_f64(x + i))));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void axpy_gather(double alpha, const double* x, std::size_t x_stride, double* y, std::size_t n) {
  if (x_stride == 1) return axpy(alpha, x, y, n);
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i * x_stride];
}

void axpy_scatter(double alpha, const double* x, double* y, std::size_t y_stride, std::size_t n) {
  if (y_stride == 1) return axpy(alpha, x, y, n);
  for (std::size_t i = 0; i < n; ++i) y[i * y_stride] += alpha * x[i];
}

double sum(const double* x, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) acc = vaddq_f64(acc, vld1q_f64(x + i));
  double s = vaddvq_f64(acc);
  for (; i < n; ++i) s += x[i];
  return s;
}

}  // namespace

const KernelTable& neon_table() {
  static const KernelTable t{Backend::Neon, dot, dot_strided, axpy, axpy_gather, axpy_scatter, sum};
  return t;
}

}  // namespace gazenet::kernels::detail
