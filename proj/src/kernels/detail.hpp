#pragma once

#include "vitalfuse/kernels.hpp"

namespace vf::kernels::detail {

extern const Ops kScalarOps;

#if defined(__x86_64__) || defined(__i386__)
#define VITALFUSE_HAVE_AVX2_KERNELS 1
extern const Ops kAvx2Ops;
#endif

}  // namespace vf::kernels::detail
