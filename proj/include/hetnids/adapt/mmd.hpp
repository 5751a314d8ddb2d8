#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "hetnids/matrix.hpp"

namespace hetnids {

enum class BandwidthPolicy { kFixed, kMedianHeuristic, kMixture };

struct KernelConfig {
  BandwidthPolicy policy = BandwidthPolicy::kMedianHeuristic;
  double sigma2 = 1.0;  // used by the fixed policy
  // Applied to the median-heuristic value under the mixture policy.
  std::vector<double> mixture_multipliers = {0.25, 0.5, 1.0, 2.0, 4.0};
};

inline void validate_kernel_config(const KernelConfig& kc) {
  if (kc.policy == BandwidthPolicy::kFixed && !(kc.sigma2 > 0.0))
    throw std::invalid_argument("KernelConfig: fixed sigma2 must be positive");
  if (kc.policy == BandwidthPolicy::kMixture) {
    if (kc.mixture_multipliers.empty())
      throw std::invalid_argument("KernelConfig: empty mixture");
    for (std::size_t i = 0; i < kc.mixture_multipliers.size(); ++i) {
      if (!(kc.mixture_multipliers[i] > 0.0))
        throw std::invalid_argument("KernelConfig: mixture multipliers must be positive");
      for (std::size_t j = i + 1; j < kc.mixture_multipliers.size(); ++j) {
        if (kc.mixture_multipliers[i] == kc.mixture_multipliers[j])
          throw std::invalid_argument("KernelConfig: mixture multipliers must be distinct");
      }
    }
  }
}

// A batch of latent representations, one row per sample.
struct LatentBatch {
  Matrix z;
  int domain_id = 0;
};

inline double gaussian_kernel(const std::vector<double>& a, const std::vector<double>& b,
                              double sigma2) {
  if (a.size() != b.size()) throw std::invalid_argument("gaussian_kernel: dimension mismatch");
  if (!(sigma2 > 0.0)) throw std::invalid_argument("gaussian_kernel: sigma2 must be positive");
  return std::exp(-squared_distance(a.data(), b.data(), static_cast<int>(a.size())) / (2.0 * sigma2));
}

namespace detail {

// Pairwise squared distances flattened row-major (a.rows x b.rows).
inline std::vector<double> pairwise_sqdist(const Matrix& a, const Matrix& b) {
  std::vector<double> d(static_cast<std::size_t>(a.rows) * static_cast<std::size_t>(b.rows));
  for (int i = 0; i < a.rows; ++i) {
    const double* ra = a.row(i);
    double* out = d.data() + static_cast<std::size_t>(i) * b.rows;
    for (int j = 0; j < b.rows; ++j) out[j] = squared_distance(ra, b.row(j), a.cols);
  }
  return d;
}

// Content-based ordering so that cross-term accumulation order (and thus
// the floating-point result) is identical under argument swap.
inline bool batch_leq(const LatentBatch& a, const LatentBatch& b) {
  if (a.z.rows != b.z.rows) return a.z.rows < b.z.rows;
  if (a.z.cols != b.z.cols) return a.z.cols < b.z.cols;
  for (std::size_t i = 0; i < a.z.data.size(); ++i) {
    if (a.z.data[i] != b.z.data[i]) return a.z.data[i] < b.z.data[i];
  }
  return a.domain_id <= b.domain_id;
}

inline void check_batches(const LatentBatch& z1, const LatentBatch& z2) {
  if (z1.z.rows < 1 || z2.z.rows < 1) throw std::invalid_argument("mmd: empty latent batch");
  if (z1.z.cols != z2.z.cols) throw std::invalid_argument("mmd: latent dimension mismatch");
}

}  // namespace detail

// Median of the squared pairwise Euclidean distances over the pooled
// batch. Zero distances (self-pairs and coincident points) are excluded;
// if every pooled point coincides the fallback is 1.
inline double median_heuristic(const LatentBatch& z1, const LatentBatch& z2) {
  detail::check_batches(z1, z2);
  const int n1 = z1.z.rows;
  const int n2 = z2.z.rows;
  const int n = n1 + n2;
  if (n < 2) throw std::invalid_argument("median_heuristic: need at least 2 pooled points");
  const int dim = z1.z.cols;
  std::vector<double> dists;
  dists.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  auto row = [&](int i) { return i < n1 ? z1.z.row(i) : z2.z.row(i - n1); };
  for (int i = 0; i < n; ++i) {
    const double* ri = row(i);
    for (int j = i + 1; j < n; ++j) {
      const double d = squared_distance(ri, row(j), dim);
      if (d > 0.0) dists.push_back(d);
    }
  }
  if (dists.empty()) return 1.0;
  const std::size_t half = dists.size() / 2;
  std::nth_element(dists.begin(), dists.begin() + half, dists.end());
  const double upper = dists[half];
  if (dists.size() % 2 == 1) return upper;
  const double lower = *std::max_element(dists.begin(), dists.begin() + half);
  return 0.5 * (lower + upper);
}

// The bandwidth set the kernel config resolves to for a given batch pair.
inline std::vector<double> resolve_bandwidths(const KernelConfig& kc, const LatentBatch& z1,
                                              const LatentBatch& z2) {
  validate_kernel_config(kc);
  switch (kc.policy) {
    case BandwidthPolicy::kFixed:
      return {kc.sigma2};
    case BandwidthPolicy::kMedianHeuristic:
      return {median_heuristic(z1, z2)};
    case BandwidthPolicy::kMixture: {
      const double base = median_heuristic(z1, z2);
      std::vector<double> out;
      out.reserve(kc.mixture_multipliers.size());
      for (double m : kc.mixture_multipliers) out.push_back(m * base);
      return out;
    }
  }
  return {1.0};
}

namespace detail {

// Median of the positive entries of the pooled distance buffers; value
// matches median_heuristic() exactly (same multiset of distances).
inline double median_from_buffers(const std::vector<double>& daa, int n,
                                  const std::vector<double>& dbb, int m,
                                  const std::vector<double>& dab) {
  std::vector<double> dists;
  dists.reserve(static_cast<std::size_t>(n) * (n - 1) / 2 +
                static_cast<std::size_t>(m) * (m - 1) / 2 + dab.size());
  for (int i = 0; i < n; ++i) {
    const double* row = daa.data() + static_cast<std::size_t>(i) * n;
    for (int j = i + 1; j < n; ++j) {
      if (row[j] > 0.0) dists.push_back(row[j]);
    }
  }
  for (int i = 0; i < m; ++i) {
    const double* row = dbb.data() + static_cast<std::size_t>(i) * m;
    for (int j = i + 1; j < m; ++j) {
      if (row[j] > 0.0) dists.push_back(row[j]);
    }
  }
  for (double d : dab) {
    if (d > 0.0) dists.push_back(d);
  }
  if (dists.empty()) return 1.0;
  const std::size_t half = dists.size() / 2;
  std::nth_element(dists.begin(), dists.begin() + half, dists.end());
  const double upper = dists[half];
  if (dists.size() % 2 == 1) return upper;
  const double lower = *std::max_element(dists.begin(), dists.begin() + half);
  return 0.5 * (lower + upper);
}

// Shared evaluator for the biased V-statistic and its gradient with
// respect to either batch. Gradients are optional; the bandwidth is
// treated as a constant (no gradient through the median heuristic).
inline double mmd2_eval(const LatentBatch& z1, const LatentBatch& z2, const KernelConfig& kc,
                        Matrix* dz1, Matrix* dz2) {
  check_batches(z1, z2);
  validate_kernel_config(kc);
  const bool swap = !batch_leq(z1, z2);
  const LatentBatch& a = swap ? z2 : z1;
  const LatentBatch& b = swap ? z1 : z2;
  Matrix* da = swap ? dz2 : dz1;
  Matrix* db = swap ? dz1 : dz2;

  const int n = a.z.rows;
  const int m = b.z.rows;
  const int dim = a.z.cols;
  const std::vector<double> daa = pairwise_sqdist(a.z, a.z);
  const std::vector<double> dbb = pairwise_sqdist(b.z, b.z);
  const std::vector<double> dab = pairwise_sqdist(a.z, b.z);

  std::vector<double> sigmas;
  if (kc.policy == BandwidthPolicy::kFixed) {
    sigmas = {kc.sigma2};
  } else {
    const double base = median_from_buffers(daa, n, dbb, m, dab);
    if (kc.policy == BandwidthPolicy::kMedianHeuristic) {
      sigmas = {base};
    } else {
      sigmas.reserve(kc.mixture_multipliers.size());
      for (double mult : kc.mixture_multipliers) sigmas.push_back(mult * base);
    }
  }

  if (da) *da = Matrix(n, dim, 0.0);
  if (db) *db = Matrix(m, dim, 0.0);

  double total = 0.0;
  for (double sigma2 : sigmas) {
    const double inv2s = 1.0 / (2.0 * sigma2);
    double sum_aa = 0.0;
    for (double d : daa) sum_aa += std::exp(-d * inv2s);
    double sum_bb = 0.0;
    for (double d : dbb) sum_bb += std::exp(-d * inv2s);
    double sum_ab = 0.0;
    std::vector<double> kab;
    if (da || db) kab.resize(dab.size());
    for (std::size_t idx = 0; idx < dab.size(); ++idx) {
      const double k = std::exp(-dab[idx] * inv2s);
      sum_ab += k;
      if (!kab.empty()) kab[idx] = k;
    }
    total += sum_aa / (static_cast<double>(n) * n) + sum_bb / (static_cast<double>(m) * m) -
             2.0 * sum_ab / (static_cast<double>(n) * m);

    if (!da && !db) continue;
    const double w = 1.0 / static_cast<double>(sigmas.size());
    // d/dz_a of the self term: 2/N^2 * sum_j k(a_i,a_j) * -(a_i-a_j)/sigma2
    if (da) {
      const double c_self = -2.0 * w / (static_cast<double>(n) * n * sigma2);
      const double c_cross = 2.0 * w / (static_cast<double>(n) * m * sigma2);
      for (int i = 0; i < n; ++i) {
        double* g = da->row(i);
        const double* zi = a.z.row(i);
        const double* drow = daa.data() + static_cast<std::size_t>(i) * n;
        for (int j = 0; j < n; ++j) {
          if (j == i) continue;
          const double k = std::exp(-drow[j] * inv2s);
          const double* zj = a.z.row(j);
          for (int c = 0; c < dim; ++c) g[c] += c_self * k * (zi[c] - zj[c]);
        }
        const double* krow = kab.data() + static_cast<std::size_t>(i) * m;
        for (int j = 0; j < m; ++j) {
          const double k = krow[j];
          const double* zj = b.z.row(j);
          for (int c = 0; c < dim; ++c) g[c] += c_cross * k * (zi[c] - zj[c]);
        }
      }
    }
    if (db) {
      const double c_self = -2.0 * w / (static_cast<double>(m) * m * sigma2);
      const double c_cross = 2.0 * w / (static_cast<double>(n) * m * sigma2);
      for (int j = 0; j < m; ++j) {
        double* g = db->row(j);
        const double* zj = b.z.row(j);
        const double* drow = dbb.data() + static_cast<std::size_t>(j) * m;
        for (int i = 0; i < m; ++i) {
          if (i == j) continue;
          const double k = std::exp(-drow[i] * inv2s);
          const double* zi = b.z.row(i);
          for (int c = 0; c < dim; ++c) g[c] += c_self * k * (zj[c] - zi[c]);
        }
        for (int i = 0; i < n; ++i) {
          const double k = kab[static_cast<std::size_t>(i) * m + j];
          const double* zi = a.z.row(i);
          for (int c = 0; c < dim; ++c) g[c] += c_cross * k * (zj[c] - zi[c]);
        }
      }
    }
  }
  return total / static_cast<double>(sigmas.size());
}

}  // namespace detail

// Empirical squared MMD between two latent batches: the three-term
// biased V-statistic (diagonal terms included). Under the mixture policy
// the result is the mean over the bandwidth set.
inline double mmd2_biased(const LatentBatch& z1, const LatentBatch& z2, const KernelConfig& kc) {
  return detail::mmd2_eval(z1, z2, kc, nullptr, nullptr);
}

// Analytic gradient of mmd2_biased with respect to both batches.
inline std::pair<Matrix, Matrix> mmd2_backward(const LatentBatch& z1, const LatentBatch& z2,
                                               const KernelConfig& kc) {
  Matrix dz1, dz2;
  detail::mmd2_eval(z1, z2, kc, &dz1, &dz2);
  return {std::move(dz1), std::move(dz2)};
}

// One-pass value plus gradient with respect to the first batch only;
// this is the trainer's hot path (reference latents are frozen).
inline double mmd2_value_grad1(const LatentBatch& z1, const LatentBatch& z2,
                               const KernelConfig& kc, Matrix& dz1) {
  return detail::mmd2_eval(z1, z2, kc, &dz1, nullptr);
}

}  // namespace hetnids
