#pragma once

#include "skelfreq/kernels.hpp"

namespace skelfreq::kernels::detail {

const KernelTable& scalar_table();
// Defined only when the matching translation unit is compiled in.
const KernelTable* avx2_table();
const KernelTable* neon_table();

}  // namespace skelfreq::kernels::detail
