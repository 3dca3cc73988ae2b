#pragma once

#include <cstddef>
#include <string_view>

// Data-parallel inner loops shared by the saliency extractor, the CNN layers
// and the attribution pass. Each kernel has a scalar reference implementation
// and, where the target supports it, an AVX2 (x86-64) or NEON (AArch64)
// variant chosen once at runtime. Element-wise kernels (axpy family) are
// bit-identical across backends; reductions (dot family) may differ in the
// last bits because lanes are summed in a different order.
namespace gazenet::kernels {

enum class Backend { Scalar, Avx2, Neon };

std::string_view backend_name(Backend b);

struct KernelTable {
  Backend backend;
  // sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  // sum_i a[i] * b[i * b_stride]
  double (*dot_strided)(const double* a, const double* b, std::size_t b_stride, std::size_t n);
  // y[i] += alpha * x[i]
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // y[i] += alpha * x[i * x_stride]
  void (*axpy_gather)(double alpha, const double* x, std::size_t x_stride, double* y, std::size_t n);
  // y[i * y_stride] += alpha * x[i]
  void (*axpy_scatter)(double alpha, const double* x, double* y, std::size_t y_stride, std::size_t n);
  // sum_i x[i]
  double (*sum)(const double* x, std::size_t n);
};

// Table for the active backend. The first call resolves it from CPU
// features; GAZENET_KERNELS=scalar|avx2|neon|auto overrides the choice.
const KernelTable& active();

// Table for a specific backend; throws if it is not compiled in or not
// supported by this CPU.
const KernelTable& table(Backend b);

bool available(Backend b);

// Switches the process-wide backend. Intended for tests and benchmarks; must
// not be called while other threads are running kernels.
void set_backend(Backend b);

// RAII override for the active backend.
class ScopedBackend {
 public:
  explicit ScopedBackend(Backend b);
  ~ScopedBackend();
  ScopedBackend(const ScopedBackend&) = delete;
  ScopedBackend& operator=(const ScopedBackend&) = delete;

 private:
  Backend previous_;
};

}  // namespace gazenet::kernels
