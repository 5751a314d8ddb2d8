#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "hetnids/adapt/mmd.hpp"
#include "hetnids/matrix.hpp"

namespace hetnids {

inline constexpr double kProbClamp = 1e-12;

struct LossBreakdown {
  double ce = 0.0;
  double mmd = 0.0;
  double total = 0.0;
};

// Mean binary cross-entropy over the batch. Predictions are clamped to
// [1e-12, 1-1e-12] before the logs.
inline double ce_loss(const Matrix& yhat, const std::vector<int>& y) {
  if (yhat.cols != 1) throw std::invalid_argument("ce_loss: yhat must be a column");
  if (static_cast<std::size_t>(yhat.rows) != y.size())
    throw std::invalid_argument("ce_loss: length mismatch");
  if (yhat.rows < 1) throw std::invalid_argument("ce_loss: empty batch");
  double sum = 0.0;
  for (int i = 0; i < yhat.rows; ++i) {
    const double p = std::clamp(yhat.at(i, 0), kProbClamp, 1.0 - kProbClamp);
    sum += y[static_cast<std::size_t>(i)] == 1 ? -std::log(p) : -std::log1p(-p);
  }
  return sum / static_cast<double>(yhat.rows);
}

// Gradient of the mean cross-entropy with respect to yhat. Entries that
// were clamped get zero gradient.
inline Matrix ce_backward(const Matrix& yhat, const std::vector<int>& y) {
  if (yhat.cols != 1 || static_cast<std::size_t>(yhat.rows) != y.size())
    throw std::invalid_argument("ce_backward: length mismatch");
  Matrix d(yhat.rows, 1, 0.0);
  const double inv_n = 1.0 / static_cast<double>(yhat.rows);
  for (int i = 0; i < yhat.rows; ++i) {
    const double p = yhat.at(i, 0);
    if (p < kProbClamp || p > 1.0 - kProbClamp) continue;
    d.at(i, 0) = (y[static_cast<std::size_t>(i)] == 1 ? -1.0 / p : 1.0 / (1.0 - p)) * inv_n;
  }
  return d;
}

// Combined objective: alpha * CE + beta * mean-over-references MMD^2.
// The pairwise mean over reference batches is how the two-domain loss
// generalizes to more domains.
inline LossBreakdown combined_loss(const Matrix& yhat, const std::vector<int>& y,
                                   const LatentBatch& z_active,
                                   const std::vector<LatentBatch>& z_refs, double alpha, double beta,
                                   const KernelConfig& kernel) {
  if (z_refs.empty()) throw std::invalid_argument("combined_loss: no reference batches");
  LossBreakdown out;
  out.ce = ce_loss(yhat, y);
  double mmd_sum = 0.0;
  for (const LatentBatch& ref : z_refs) mmd_sum += mmd2_biased(z_active, ref, kernel);
  out.mmd = mmd_sum / static_cast<double>(z_refs.size());
  out.total = alpha * out.ce + beta * out.mmd;
  return out;
}

}  // namespace hetnids
