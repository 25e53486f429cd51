// Copyright 2026 The msbg Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "msbg/grid.hpp"
#include "msbg/image.hpp"
#include "msbg/loss.hpp"

namespace msbg {

// All grid coefficients, level-major then cell-index order, 12 per cell.
using ParamVector = std::vector<double>;
// d(loss)/d(coefficient), same layout as ParamVector.
using GradVector = std::vector<double>;

ParamVector pack(const MultiScaleGrid& msg);
// Throws if the length does not match the pyramid's parameter count.
void unpack(std::span<const double> params, MultiScaleGrid& msg);

enum class LossTerm { kL1 = 0, kSsim = 1, kTv = 2, kCircle = 3 };
inline constexpr std::array<LossTerm, 4> kAllTerms = {
    LossTerm::kL1, LossTerm::kSsim, LossTerm::kTv, LossTerm::kCircle};
const char* term_name(LossTerm t);
double term_value(const LossTerms& terms, LossTerm t);

struct LossGrad {
  LossBreakdown loss;
  GradVector grad;
  // Per-term weighted gradients (index = LossTerm); filled only on request.
  std::array<GradVector, 4> term_grads;
};

LossGrad loss_and_grad(const MultiScaleGrid& msg, const Image& img_r,
                       const Image& img_gt, const LossConfig& cfg,
                       bool want_term_grads = false);

using ScalarFn = std::function<double(std::span<const double>)>;

// Central differences (f(x + h e_i) - f(x - h e_i)) / 2h for every i.
GradVector finite_diff_grad(const ScalarFn& f, std::span<const double> x, double h);

// Finite-difference gradient of total_loss, or of one weighted term of it.
GradVector finite_diff_grad(const MultiScaleGrid& msg, const Image& img_r,
                            const Image& img_gt, const LossConfig& cfg, double h,
                            std::optional<LossTerm> term = std::nullopt);

struct GradComparison {
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
};

// Relative error per entry is |a - f| / max(1e-6, |a| + |f|).
GradComparison compare_gradients(std::span<const double> analytic,
                                 std::span<const double> numeric);

// A randomized gradient-check configuration. The grid is identity plus
// U(-0.1, 0.1) on every coefficient; img_r is a synthetic pattern; img_gt is
// the grid's own output with every value offset by a random sign times
// U(0.02, 0.2), so no L1 residual crosses zero within a stencil of h < 0.02.
struct GradcheckCase {
  MultiScaleGrid grid;
  Image img_r;
  Image img_gt;
};

GradcheckCase make_gradcheck_case(const std::vector<GridShape>& shapes, int size,
                                  std::uint64_t seed);

struct GradcheckEntry {
  std::optional<LossTerm> term;  // nullopt for the combined total
  GradComparison cmp;
};

// Analytic vs central differences for each term and the total.
std::vector<GradcheckEntry> check_gradients(const GradcheckCase& c, const LossConfig& cfg,
                                            double step);

}  // namespace msbg
