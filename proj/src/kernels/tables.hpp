#pragma once

#include "polaris/kernels.hpp"

namespace polaris::kernels {

extern const Ops kScalarOps;
#ifdef POLARIS_HAVE_AVX2
extern const Ops kAvx2Ops;
#endif

}  // namespace polaris::kernels
