#pragma once

#include "cellcast/simd/kernels.hpp"

namespace cellcast::simd::detail {

// Defined only in the translation units compiled for the matching target.
const KernelTable* avx2_table();
const KernelTable* neon_table();

}  // namespace cellcast::simd::detail
