#pragma once

#include "gazenet/kernels.hpp"

namespace gazenet::kernels::detail {

const KernelTable& scalar_table();
#if defined(GAZENET_HAVE_AVX2)
const KernelTable& avx2_table();
#endif
#if defined(GAZENET_HAVE_NEON)
const KernelTable& neon_table();
#endif

}  // namespace gazenet::kernels::detail
