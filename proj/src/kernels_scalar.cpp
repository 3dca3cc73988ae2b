#include "kernels_impl.hpp"

namespace gazenet::kernels::detail {

namespace {

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double dot_strided(const double* a, const double* b, std::size_t b_stride, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i * b_stride];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void axpy_gather(double alpha, const double* x, std::size_t x_stride, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i * x_stride];
}

void axpy_scatter(double alpha, const double* x, double* y, std::size_t y_stride, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i * y_stride] += alpha * x[i];
}

double sum(const double* x, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i];
  return s;
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable t{Backend::Scalar, dot, dot_strided, axpy, axpy_gather, axpy_scatter, sum};
  return t;
}

}  // namespace gazenet::kernels::detail
