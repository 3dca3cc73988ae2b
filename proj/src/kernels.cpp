#include "gazenet/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

#include "gazenet/error.hpp"
#include "kernels_impl.hpp"

namespace gazenet::kernels {

namespace {

bool cpu_has_avx2() {
#if defined(GAZENET_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

const KernelTable* resolve_default() {
  const char* env = std::getenv("GAZENET_KERNELS");
  const std::string choice = env ? env : "auto";
  if (choice == "scalar") return &detail::scalar_table();
  if (choice == "avx2") return &table(Backend::Avx2);
  if (choice == "neon") return &table(Backend::Neon);
  if (available(Backend::Avx2)) return &table(Backend::Avx2);
  if (available(Backend::Neon)) return &table(Backend::Neon);
  return &detail::scalar_table();
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> t{resolve_default()};
  return t;
}

}  // namespace

std::string_view backend_name(Backend b) {
  switch (b) {
    case Backend::Scalar: return "scalar";
    case Backend::Avx2: return "avx2";
    case Backend::Neon: return "neon";
  }
  return "unknown";
}

bool available(Backend b) {
  switch (b) {
    case Backend::Scalar: return true;
    case Backend::Avx2: return cpu_has_avx2();
    case Backend::Neon:
#if defined(GAZENET_HAVE_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& table(Backend b) {
  if (!available(b)) {
    fail(ErrorCategory::Config, "kernel backend '" + std::string(backend_name(b)) + "' is not available");
  }
  switch (b) {
#if defined(GAZENET_HAVE_AVX2)
    case Backend::Avx2: return detail::avx2_table();
#endif
#if defined(GAZENET_HAVE_NEON)
    case Backend::Neon: return detail::neon_table();
#endif
    default: return detail::scalar_table();
  }
}

const KernelTable& active() { return *current().load(std::memory_order_acquire); }

void set_backend(Backend b) { current().store(&table(b), std::memory_order_release); }

ScopedBackend::ScopedBackend(Backend b) : previous_(active().backend) { set_backend(b); }

ScopedBackend::~ScopedBackend() { set_backend(previous_); }

}  // namespace gazenet::kernels
