// Copyright 2026 The msbg Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include "msbg/image.hpp"

namespace msbg::detail {

// Mean Gaussian-windowed SSIM of a against b. When grad_a is non-null it
// receives d(mean SSIM)/d(a) with a's shape.
double ssim_with_grad(const ImageD& a, const ImageD& b, const SsimParams& params,
                      ImageD* grad_a);

}  // namespace msbg::detail
