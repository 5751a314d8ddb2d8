#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <numeric>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "hetnids/data/csv.hpp"
#include "hetnids/data/table.hpp"
#include "hetnids/rng.hpp"

namespace hetnids {

// Removes rows with any missing feature cell or an empty label, then
// keeps the first occurrence of each exact duplicate (all columns, label
// included). Survivor order is preserved.
inline RawTable clean(const RawTable& table) {
  RawTable out;
  out.column_names = table.column_names;
  out.label_col = table.label_col;
  out.binarized = table.binarized;

  std::unordered_set<std::string> seen;
  seen.reserve(table.row_count());
  for (std::size_t r = 0; r < table.row_count(); ++r) {
    const std::vector<double>& row = table.features[r];
    const std::string& label = table.labels[r];
    bool missing = label.empty();
    for (double v : row) {
      if (std::isnan(v)) {
        missing = true;
        break;
      }
    }
    if (missing) continue;
    std::string key(reinterpret_cast<const char*>(row.data()), row.size() * sizeof(double));
    key += '\x1f';
    key += label;
    if (!seen.insert(std::move(key)).second) continue;
    out.features.push_back(row);
    out.labels.push_back(label);
  }
  if (out.features.empty()) throw std::runtime_error("no rows survive cleaning");
  return out;
}

// Rewrites labels to "0" where the original label matches the normal
// token (case-insensitive, trimmed) and "1" otherwise.
inline RawTable binarize_labels(const RawTable& table, const std::string& normal_token = "NORMAL") {
  RawTable out = table;
  const std::string token = detail::trim(normal_token);
  for (std::string& label : out.labels) {
    label = detail::iequals(detail::trim(label), token) ? "0" : "1";
  }
  out.binarized = true;
  return out;
}

// Projects a cleaned, binarized table onto the given feature ids, in the
// given order. Ids resolve to the canonical flow feature names.
inline DomainDataset select_features(const RawTable& table, const std::vector<int>& feature_ids,
                                     const std::string& name = "") {
  if (!table.binarized) throw std::invalid_argument("select_features: table must be binarized first");
  std::vector<std::size_t> col_of_id;
  col_of_id.reserve(feature_ids.size());
  for (std::size_t i = 0; i < feature_ids.size(); ++i) {
    const int id = feature_ids[i];
    if (id < 1 || id > kMaxFeatureId)
      throw std::invalid_argument("unknown feature id " + std::to_string(id));
    for (std::size_t j = i + 1; j < feature_ids.size(); ++j) {
      if (feature_ids[j] == id)
        throw std::invalid_argument("duplicate feature id " + std::to_string(id));
    }
    const std::string want = flow_feature_name(id);
    const std::string alias = "f" + std::to_string(id);  // synthetic exports use f<id>
    bool found = false;
    for (std::size_t j = 0; j < table.feature_count(); ++j) {
      const std::string& name = table.feature_column_name(j);
      if (name == want || name == alias) {
        col_of_id.push_back(j);
        found = true;
        break;
      }
    }
    if (!found)
      throw std::invalid_argument("feature id " + std::to_string(id) + " (column '" + want +
                                  "') not present in table");
  }

  DomainDataset ds;
  ds.name = name;
  ds.feature_ids = feature_ids;
  ds.features = Matrix(static_cast<int>(table.row_count()), static_cast<int>(feature_ids.size()));
  ds.labels.resize(table.row_count());
  for (std::size_t r = 0; r < table.row_count(); ++r) {
    const std::vector<double>& row = table.features[r];
    double* dst = ds.features.row(static_cast<int>(r));
    for (std::size_t c = 0; c < col_of_id.size(); ++c) {
      const double v = row[col_of_id[c]];
      if (!std::isfinite(v))
        throw std::invalid_argument("select_features: non-finite cell at row " + std::to_string(r) +
                                    "; clean the table first");
      dst[c] = v;
    }
    const std::string& label = table.labels[r];
    if (label == "0") {
      ds.labels[r] = 0;
    } else if (label == "1") {
      ds.labels[r] = 1;
    } else {
      throw std::invalid_argument("select_features: non-binary label '" + label + "' at row " +
                                  std::to_string(r));
    }
  }
  return ds;
}

struct SplitBundle {
  DomainDataset train;
  DomainDataset val;
  DomainDataset test;
};

namespace detail {

// Floor allocation topped up by largest fractional remainder; ties go to
// the lower split index so the result is deterministic.
inline std::array<int, 3> largest_remainder_alloc(int n, const std::array<double, 3>& ratios) {
  std::array<int, 3> alloc{};
  std::array<double, 3> frac{};
  int assigned = 0;
  for (int k = 0; k < 3; ++k) {
    const double target = static_cast<double>(n) * ratios[static_cast<std::size_t>(k)];
    alloc[static_cast<std::size_t>(k)] = static_cast<int>(std::floor(target));
    frac[static_cast<std::size_t>(k)] = target - std::floor(target);
    assigned += alloc[static_cast<std::size_t>(k)];
  }
  int remaining = n - assigned;
  std::array<int, 3> order = {0, 1, 2};
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (frac[static_cast<std::size_t>(a)] != frac[static_cast<std::size_t>(b)])
      return frac[static_cast<std::size_t>(a)] > frac[static_cast<std::size_t>(b)];
    return a < b;
  });
  for (int k = 0; k < 3 && remaining > 0; ++k, --remaining) ++alloc[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])];
  return alloc;
}

inline std::array<std::vector<int>, 2> indices_by_class(const DomainDataset& ds) {
  std::array<std::vector<int>, 2> idx;
  for (int i = 0; i < ds.size(); ++i) idx[static_cast<std::size_t>(ds.labels[static_cast<std::size_t>(i)])].push_back(i);
  return idx;
}

}  // namespace detail

// Stratified three-way split: per-class floor + largest-remainder
// allocation, shuffling driven solely by the seed. Row order within each
// split follows the original dataset order.
inline SplitBundle stratified_split(const DomainDataset& ds, const std::array<double, 3>& ratios,
                                    std::uint64_t seed) {
  const double sum = ratios[0] + ratios[1] + ratios[2];
  if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("stratified_split: ratios must sum to 1");
  for (double r : ratios) {
    if (r < 0.0) throw std::invalid_argument("stratified_split: negative ratio");
  }
  auto by_class = detail::indices_by_class(ds);
  for (const auto& cls : by_class) {
    if (cls.size() < 3)
      throw std::invalid_argument("stratified_split: each class needs at least 3 samples");
  }

  Rng rng(seed);
  std::array<std::vector<int>, 3> split_rows;
  for (auto& cls : by_class) {
    rng.shuffle(cls);
    const auto alloc = detail::largest_remainder_alloc(static_cast<int>(cls.size()), ratios);
    std::size_t pos = 0;
    for (int k = 0; k < 3; ++k) {
      for (int t = 0; t < alloc[static_cast<std::size_t>(k)]; ++t)
        split_rows[static_cast<std::size_t>(k)].push_back(cls[pos++]);
    }
  }
  for (auto& rows : split_rows) std::sort(rows.begin(), rows.end());

  SplitBundle out;
  out.train = take_rows(ds, split_rows[0]);
  out.val = take_rows(ds, split_rows[1]);
  out.test = take_rows(ds, split_rows[2]);
  return out;
}

// Stratified subsample. The output size is round-half-to-even of
// n * fraction; per-class counts are allocated by largest remainder.
inline DomainDataset subsample(const DomainDataset& ds, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0) || fraction > 1.0)
    throw std::invalid_argument("subsample: fraction must be in (0, 1]");
  const long long total = static_cast<long long>(
      std::nearbyint(static_cast<double>(ds.size()) * fraction));
  if (total <= 0) throw std::invalid_argument("subsample: resulting size is 0");
  if (total >= ds.size()) {
    DomainDataset copy = ds;
    return copy;
  }

  auto by_class = detail::indices_by_class(ds);
  // Floor per class, then top up by largest fractional remainder until
  // the rounded total is met.
  std::array<long long, 2> want{};
  std::array<double, 2> frac{};
  long long assigned = 0;
  for (int c = 0; c < 2; ++c) {
    const double target = static_cast<double>(by_class[static_cast<std::size_t>(c)].size()) * fraction;
    want[static_cast<std::size_t>(c)] = static_cast<long long>(std::floor(target));
    frac[static_cast<std::size_t>(c)] = target - std::floor(target);
    assigned += want[static_cast<std::size_t>(c)];
  }
  for (long long extra = total - assigned; extra > 0; --extra) {
    const int pick = (frac[0] > frac[1] || (frac[0] == frac[1] && by_class[0].size() >= by_class[1].size())) ? 0 : 1;
    ++want[static_cast<std::size_t>(pick)];
    frac[static_cast<std::size_t>(pick)] = -1.0;
  }
  for (int c = 0; c < 2; ++c) {
    want[static_cast<std::size_t>(c)] = std::min<long long>(
        want[static_cast<std::size_t>(c)], static_cast<long long>(by_class[static_cast<std::size_t>(c)].size()));
  }

  Rng rng(seed);
  std::vector<int> keep;
  keep.reserve(static_cast<std::size_t>(total));
  for (int c = 0; c < 2; ++c) {
    const auto& cls = by_class[static_cast<std::size_t>(c)];
    const auto chosen = sample_without_replacement(static_cast<int>(cls.size()),
                                                   static_cast<int>(want[static_cast<std::size_t>(c)]), rng);
    for (int pos : chosen) keep.push_back(cls[static_cast<std::size_t>(pos)]);
  }
  std::sort(keep.begin(), keep.end());
  return take_rows(ds, keep);
}

// SMOTE: raises the minority class to the majority count. Each synthetic
// sample interpolates between a random minority sample and one of its k
// nearest minority neighbours (Euclidean); originals are preserved.
inline DomainDataset smote(const DomainDataset& train, int k, std::uint64_t seed) {
  if (k < 1) throw std::invalid_argument("smote: k must be >= 1");
  auto by_class = detail::indices_by_class(train);
  const std::size_t n0 = by_class[0].size();
  const std::size_t n1 = by_class[1].size();
  if (n0 == n1) {
    DomainDataset copy = train;
    return copy;
  }
  const int minority = n0 < n1 ? 0 : 1;
  const std::vector<int>& min_idx = by_class[static_cast<std::size_t>(minority)];
  const long long deficit = static_cast<long long>(std::max(n0, n1)) - static_cast<long long>(min_idx.size());
  if (min_idx.size() < static_cast<std::size_t>(k) + 1)
    throw std::invalid_argument("smote: minority class too small for k=" + std::to_string(k) +
                                " neighbours");

  const int d = train.dim();
  const int m = static_cast<int>(min_idx.size());

  // k nearest minority neighbours per minority sample; ties broken by
  // index for determinism.
  std::vector<std::vector<int>> neighbours(static_cast<std::size_t>(m));
  std::vector<std::pair<double, int>> dist_buf(static_cast<std::size_t>(m) - 1);
  for (int i = 0; i < m; ++i) {
    const double* xi = train.features.row(min_idx[static_cast<std::size_t>(i)]);
    std::size_t w = 0;
    for (int j = 0; j < m; ++j) {
      if (j == i) continue;
      dist_buf[w++] = {squared_distance(xi, train.features.row(min_idx[static_cast<std::size_t>(j)]), d), j};
    }
    std::partial_sort(dist_buf.begin(), dist_buf.begin() + k, dist_buf.end());
    auto& nn = neighbours[static_cast<std::size_t>(i)];
    nn.reserve(static_cast<std::size_t>(k));
    for (int t = 0; t < k; ++t) nn.push_back(dist_buf[static_cast<std::size_t>(t)].second);
  }

  DomainDataset out;
  out.name = train.name;
  out.feature_ids = train.feature_ids;
  out.features = Matrix(train.size() + static_cast<int>(deficit), d);
  out.labels.resize(static_cast<std::size_t>(out.features.rows));
  for (int r = 0; r < train.size(); ++r) {
    std::memcpy(out.features.row(r), train.features.row(r), sizeof(double) * static_cast<std::size_t>(d));
    out.labels[static_cast<std::size_t>(r)] = train.labels[static_cast<std::size_t>(r)];
  }

  Rng rng(seed);
  for (long long s = 0; s < deficit; ++s) {
    const int i = static_cast<int>(rng.below(static_cast<std::uint64_t>(m)));
    const int nn = neighbours[static_cast<std::size_t>(i)][rng.below(static_cast<std::uint64_t>(k))];
    const double u = rng.uniform();
    const double* xi = train.features.row(min_idx[static_cast<std::size_t>(i)]);
    const double* xn = train.features.row(min_idx[static_cast<std::size_t>(nn)]);
    double* dst = out.features.row(train.size() + static_cast<int>(s));
    for (int c = 0; c < d; ++c) dst[c] = xi[c] + u * (xn[c] - xi[c]);
    out.labels[static_cast<std::size_t>(train.size()) + static_cast<std::size_t>(s)] = minority;
  }
  return out;
}

// Randomly discards majority samples (without replacement) until the
// classes balance. Kept rows stay in their original order.
inline DomainDataset random_undersample(const DomainDataset& train, std::uint64_t seed) {
  auto by_class = detail::indices_by_class(train);
  if (by_class[0].empty() || by_class[1].empty())
    throw std::invalid_argument("random_undersample: both classes must be present");
  const std::size_t n0 = by_class[0].size();
  const std::size_t n1 = by_class[1].size();
  if (n0 == n1) {
    DomainDataset copy = train;
    return copy;
  }
  const int majority = n0 > n1 ? 0 : 1;
  const std::size_t target = std::min(n0, n1);
  const std::vector<int>& maj_idx = by_class[static_cast<std::size_t>(majority)];

  Rng rng(seed);
  const auto chosen = sample_without_replacement(static_cast<int>(maj_idx.size()),
                                                 static_cast<int>(target), rng);
  std::vector<int> keep = by_class[static_cast<std::size_t>(1 - majority)];
  for (int pos : chosen) keep.push_back(maj_idx[static_cast<std::size_t>(pos)]);
  std::sort(keep.begin(), keep.end());
  return take_rows(train, keep);
}

// Per-column z-scoring statistics, fit on the training split only.
// Population (divide-by-n) convention; zero-variance columns scale by 1.
struct Scaler {
  std::vector<double> means;
  std::vector<double> stds;
};

inline Scaler fit_scaler(const DomainDataset& train) {
  if (train.size() < 1) throw std::invalid_argument("fit_scaler: empty training set");
  const int n = train.size();
  const int d = train.dim();
  Scaler sc;
  sc.means.assign(static_cast<std::size_t>(d), 0.0);
  sc.stds.assign(static_cast<std::size_t>(d), 0.0);
  for (int i = 0; i < n; ++i) {
    const double* row = train.features.row(i);
    for (int c = 0; c < d; ++c) sc.means[static_cast<std::size_t>(c)] += row[c];
  }
  for (int c = 0; c < d; ++c) sc.means[static_cast<std::size_t>(c)] /= n;
  for (int i = 0; i < n; ++i) {
    const double* row = train.features.row(i);
    for (int c = 0; c < d; ++c) {
      const double dv = row[c] - sc.means[static_cast<std::size_t>(c)];
      sc.stds[static_cast<std::size_t>(c)] += dv * dv;
    }
  }
  for (int c = 0; c < d; ++c) {
    double s = std::sqrt(sc.stds[static_cast<std::size_t>(c)] / n);
    sc.stds[static_cast<std::size_t>(c)] = s > 0.0 ? s : 1.0;
  }
  return sc;
}

inline DomainDataset apply_scaler(const Scaler& sc, const DomainDataset& ds) {
  if (static_cast<int>(sc.means.size()) != ds.dim())
    throw std::invalid_argument("apply_scaler: dimension mismatch");
  DomainDataset out = ds;
  for (int i = 0; i < out.size(); ++i) {
    double* row = out.features.row(i);
    for (int c = 0; c < out.dim(); ++c) {
      row[c] = (row[c] - sc.means[static_cast<std::size_t>(c)]) / sc.stds[static_cast<std::size_t>(c)];
    }
  }
  return out;
}

}  // namespace hetnids
