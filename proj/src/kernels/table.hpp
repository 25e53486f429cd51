// Copyright 2026 The msbg Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include "msbg/kernels.hpp"

namespace msbg::kernels::detail {

#if defined(MSBG_HAVE_AVX2)
// The AVX2 table as compiled; callers must check CPU support first.
const KernelTable& avx2_table();
#endif

}  // namespace msbg::kernels::detail
