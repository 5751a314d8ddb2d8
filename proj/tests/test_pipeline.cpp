#include <array>
#include <cmath>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "hetnids/data/pipeline.hpp"
#include "hetnids/rng.hpp"

using namespace hetnids;

namespace {

// A binarized table over the full 77-feature header, with feature id i
// holding the value i * 1000 + row so selections are easy to verify.
RawTable shaped_table(int rows, double attack_ratio, std::uint64_t seed = 1) {
  RawTable t;
  for (int id = 1; id <= 78; ++id) t.column_names.push_back(flow_feature_name(id));
  t.label_col = 77;
  t.binarized = true;
  Rng rng(seed);
  for (int r = 0; r < rows; ++r) {
    std::vector<double> row(77);
    for (int c = 0; c < 77; ++c) row[static_cast<std::size_t>(c)] = (c + 1) * 1000.0 + r;
    t.features.push_back(std::move(row));
    t.labels.push_back(rng.uniform() < attack_ratio ? "1" : "0");
  }
  return t;
}

DomainDataset labelled_dataset(const std::vector<int>& labels, int dim = 2,
                               std::uint64_t seed = 3) {
  DomainDataset ds;
  ds.name = "fixture";
  ds.labels = labels;
  ds.feature_ids.resize(static_cast<std::size_t>(dim));
  std::iota(ds.feature_ids.begin(), ds.feature_ids.end(), 1);
  ds.features = Matrix(static_cast<int>(labels.size()), dim);
  Rng rng(seed);
  for (double& v : ds.features.data) v = rng.normal();
  return ds;
}

std::array<int, 2> class_counts(const DomainDataset& ds) {
  std::array<int, 2> counts{0, 0};
  for (int label : ds.labels) ++counts[static_cast<std::size_t>(label)];
  return counts;
}

}  // namespace

TEST_CASE("select_features") {
  const RawTable t = shaped_table(10, 0.5);
  SUBCASE("columns come out in the requested id order") {
    const DomainDataset ds = select_features(t, {13, 20, 26, 33, 72}, "view");
    CHECK(ds.dim() == 5);
    CHECK(ds.size() == 10);
    CHECK(ds.features.at(0, 0) == doctest::Approx(13000.0));
    CHECK(ds.features.at(0, 1) == doctest::Approx(20000.0));
    CHECK(ds.features.at(3, 4) == doctest::Approx(72003.0));
    CHECK(ds.feature_ids == std::vector<int>{13, 20, 26, 33, 72});
  }
  SUBCASE("the full id range gives d=77") {
    std::vector<int> ids(77);
    std::iota(ids.begin(), ids.end(), 1);
    CHECK(select_features(t, ids).dim() == 77);
  }
  SUBCASE("sr 14 dataset-1 view") {
    const DomainDataset ds = select_features(t, {5, 12, 15, 25, 33, 51, 64, 66, 67, 77});
    CHECK(ds.dim() == 10);
    CHECK(ds.features.at(0, 9) == doctest::Approx(77000.0));
  }
  SUBCASE("bad ids are rejected") {
    CHECK_THROWS_AS(select_features(t, {0}), std::invalid_argument);
    CHECK_THROWS_AS(select_features(t, {78}), std::invalid_argument);
    CHECK_THROWS_AS(select_features(t, {5, 5}), std::invalid_argument);
  }
  SUBCASE("unbinarized tables are rejected") {
    RawTable raw = t;
    raw.binarized = false;
    CHECK_THROWS_AS(select_features(raw, {1}), std::invalid_argument);
  }
  SUBCASE("synthetic f<id> column names are accepted as aliases") {
    RawTable synth;
    synth.column_names = {"f1", "f2", "f3", "multilabel"};
    synth.label_col = 3;
    synth.binarized = true;
    synth.features = {{1.0, 2.0, 3.0}, {4.0, 5.0, 6.0}};
    synth.labels = {"0", "1"};
    const DomainDataset ds = select_features(synth, {2, 1});
    CHECK(ds.features.at(0, 0) == doctest::Approx(2.0));
    CHECK(ds.features.at(0, 1) == doctest::Approx(1.0));
    CHECK_THROWS_AS(select_features(synth, {4}), std::invalid_argument);
  }
}

TEST_CASE("stratified_split allocates per class with largest remainder") {
  std::vector<int> labels(1000);
  for (int i = 0; i < 1000; ++i) labels[static_cast<std::size_t>(i)] = i < 797 ? 1 : 0;
  const DomainDataset ds = labelled_dataset(labels);
  const SplitBundle split = stratified_split(ds, {0.7, 0.15, 0.15}, 42);

  const auto train_counts = class_counts(split.train);
  CHECK(train_counts[1] == 558);  // 797 * 0.7 = 557.9 -> floor + remainder
  CHECK(train_counts[0] == 142);  // 203 * 0.7 = 142.1 -> floor
  CHECK(split.train.size() + split.val.size() + split.test.size() == 1000);

  SUBCASE("per-split class ratio within half a percentage point") {
    for (const DomainDataset* part : {&split.train, &split.val, &split.test}) {
      const auto counts = class_counts(*part);
      const double ratio = static_cast<double>(counts[1]) / part->size();
      CHECK(std::abs(ratio - 0.797) < 0.005);
    }
  }
  SUBCASE("splits partition the input exactly") {
    // count how often each feature row value appears across splits
    std::multiset<double> seen;
    for (const DomainDataset* part : {&split.train, &split.val, &split.test}) {
      for (int i = 0; i < part->size(); ++i) seen.insert(part->features.at(i, 0));
    }
    std::multiset<double> want;
    for (int i = 0; i < ds.size(); ++i) want.insert(ds.features.at(i, 0));
    CHECK(seen == want);
  }
  SUBCASE("same seed reproduces the split") {
    const SplitBundle again = stratified_split(ds, {0.7, 0.15, 0.15}, 42);
    CHECK(again.train.features.data == split.train.features.data);
    CHECK(again.test.labels == split.test.labels);
  }
  SUBCASE("different seed changes the split") {
    const SplitBundle other = stratified_split(ds, {0.7, 0.15, 0.15}, 43);
    CHECK(other.train.features.data != split.train.features.data);
  }
  SUBCASE("bad ratios and single-class inputs are rejected") {
    CHECK_THROWS_AS(stratified_split(ds, {0.7, 0.2, 0.2}, 1), std::invalid_argument);
    const DomainDataset single = labelled_dataset(std::vector<int>(50, 1));
    CHECK_THROWS_AS(stratified_split(single, {0.7, 0.15, 0.15}, 1), std::invalid_argument);
  }
}

TEST_CASE("subsample reproduces the reference row counts") {
  // (total, fraction) -> expected subsampled size
  const struct {
    int total;
    double fraction;
    int want;
  } cases[] = {
      {152055, 0.10, 15206},  {152055, 0.50, 76028},  {152055, 0.75, 114041},
      {199997, 0.10, 20000},  {199997, 0.50, 99998},  {199997, 0.75, 149998},
      {205167, 0.10, 20517},  {205167, 0.50, 102584}, {205167, 0.75, 153875},
      {100521, 0.10, 10052},  {100521, 0.50, 50260},  {100521, 0.75, 75391},
  };
  for (const auto& c : cases) {
    std::vector<int> labels(static_cast<std::size_t>(c.total));
    for (int i = 0; i < c.total; ++i) labels[static_cast<std::size_t>(i)] = i % 2;
    const DomainDataset ds = labelled_dataset(labels, 1);
    const DomainDataset out = subsample(ds, c.fraction, 7);
    CHECK_MESSAGE(out.size() == c.want, c.total << " @ " << c.fraction);
  }
}

TEST_CASE("subsample is stratified and deterministic") {
  std::vector<int> labels(1000);
  for (int i = 0; i < 1000; ++i) labels[static_cast<std::size_t>(i)] = i < 800 ? 1 : 0;
  const DomainDataset ds = labelled_dataset(labels);
  const DomainDataset out = subsample(ds, 0.25, 11);
  CHECK(out.size() == 250);
  const auto counts = class_counts(out);
  CHECK(counts[1] == 200);
  CHECK(counts[0] == 50);
  const DomainDataset again = subsample(ds, 0.25, 11);
  CHECK(again.features.data == out.features.data);
  CHECK_THROWS_AS(subsample(ds, 0.0, 1), std::invalid_argument);
  CHECK(subsample(ds, 1.0, 1).size() == 1000);
}

TEST_CASE("smote balances the minority class") {
  SUBCASE("counts 10/90 with k=5 give 90/90") {
    std::vector<int> labels(100);
    for (int i = 0; i < 100; ++i) labels[static_cast<std::size_t>(i)] = i < 10 ? 0 : 1;
    const DomainDataset ds = labelled_dataset(labels, 3);
    const DomainDataset out = smote(ds, 5, 21);
    const auto counts = class_counts(out);
    CHECK(counts[0] == 90);
    CHECK(counts[1] == 90);
    // originals preserved in place
    for (int i = 0; i < 100; ++i) {
      CHECK(out.features.at(i, 0) == ds.features.at(i, 0));
      CHECK(out.labels[static_cast<std::size_t>(i)] == ds.labels[static_cast<std::size_t>(i)]);
    }
  }
  SUBCASE("balanced input is unchanged") {
    std::vector<int> labels = {0, 0, 0, 0, 0, 0, 1, 1, 1, 1, 1, 1};
    const DomainDataset ds = labelled_dataset(labels);
    const DomainDataset out = smote(ds, 5, 2);
    CHECK(out.features.data == ds.features.data);
  }
  SUBCASE("1-d minority {0,1} with k=1 interpolates inside [0,1]") {
    DomainDataset ds;
    ds.name = "seg";
    ds.feature_ids = {1};
    ds.features = Matrix(7, 1);
    ds.features.data = {0.0, 1.0, 5.0, 6.0, 7.0, 8.0, 9.0};
    ds.labels = {0, 0, 1, 1, 1, 1, 1};
    const DomainDataset out = smote(ds, 1, 33);
    CHECK(out.size() == 10);
    for (int i = 7; i < 10; ++i) {
      CHECK(out.labels[static_cast<std::size_t>(i)] == 0);
      CHECK(out.features.at(i, 0) >= 0.0);
      CHECK(out.features.at(i, 0) <= 1.0);
    }
  }
  SUBCASE("synthetic points are convex combinations of minority pairs") {
    std::vector<int> labels(40);
    for (int i = 0; i < 40; ++i) labels[static_cast<std::size_t>(i)] = i < 8 ? 0 : 1;
    const DomainDataset ds = labelled_dataset(labels, 2, 17);
    const DomainDataset out = smote(ds, 3, 5);
    for (int s = 40; s < out.size(); ++s) {
      // check the synthetic point sits on a segment between two originals
      bool on_some_segment = false;
      for (int i = 0; i < 8 && !on_some_segment; ++i) {
        for (int j = 0; j < 8 && !on_some_segment; ++j) {
          if (i == j) continue;
          const double ax = ds.features.at(i, 0);
          const double ay = ds.features.at(i, 1);
          const double bx = ds.features.at(j, 0);
          const double by = ds.features.at(j, 1);
          const double px = out.features.at(s, 0);
          const double py = out.features.at(s, 1);
          if (std::abs(bx - ax) < 1e-12) continue;
          const double u = (px - ax) / (bx - ax);
          if (u < -1e-9 || u > 1.0 + 1e-9) continue;
          if (std::abs(ay + u * (by - ay) - py) < 1e-9) on_some_segment = true;
        }
      }
      CHECK(on_some_segment);
    }
  }
  SUBCASE("too-small minority is rejected") {
    std::vector<int> labels = {0, 0, 1, 1, 1, 1, 1, 1};
    const DomainDataset ds = labelled_dataset(labels);
    CHECK_THROWS_AS(smote(ds, 5, 1), std::invalid_argument);
  }
  SUBCASE("same seed synthesizes the same points") {
    std::vector<int> labels(60);
    for (int i = 0; i < 60; ++i) labels[static_cast<std::size_t>(i)] = i < 12 ? 0 : 1;
    const DomainDataset ds = labelled_dataset(labels, 4, 23);
    const DomainDataset a = smote(ds, 5, 77);
    const DomainDataset b = smote(ds, 5, 77);
    CHECK(a.features.data == b.features.data);
    const DomainDataset c = smote(ds, 5, 78);
    CHECK(a.features.data != c.features.data);
  }
}

TEST_CASE("random_undersample") {
  SUBCASE("counts 90/30 become 30/30") {
    std::vector<int> labels(120);
    for (int i = 0; i < 120; ++i) labels[static_cast<std::size_t>(i)] = i < 90 ? 1 : 0;
    const DomainDataset ds = labelled_dataset(labels);
    const DomainDataset out = random_undersample(ds, 9);
    const auto counts = class_counts(out);
    CHECK(counts[0] == 30);
    CHECK(counts[1] == 30);
  }
  SUBCASE("already balanced input is unchanged") {
    std::vector<int> labels = {0, 1, 0, 1};
    const DomainDataset ds = labelled_dataset(labels);
    CHECK(random_undersample(ds, 3).features.data == ds.features.data);
  }
  SUBCASE("same seed keeps the same majority subset") {
    std::vector<int> labels = {1, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0};
    const DomainDataset ds = labelled_dataset(labels);
    const DomainDataset a = random_undersample(ds, 4);
    const DomainDataset b = random_undersample(ds, 4);
    CHECK(a.features.data == b.features.data);
    CHECK(a.labels == b.labels);
  }
  SUBCASE("smote then undersample yields exactly balanced classes") {
    std::vector<int> labels(100);
    for (int i = 0; i < 100; ++i) labels[static_cast<std::size_t>(i)] = i < 37 ? 0 : 1;
    const DomainDataset ds = labelled_dataset(labels);
    const DomainDataset out = random_undersample(smote(ds, 5, 1), 2);
    const auto counts = class_counts(out);
    CHECK(counts[0] == counts[1]);
  }
}

TEST_CASE("scaler") {
  SUBCASE("population convention on {0,2}") {
    DomainDataset ds;
    ds.feature_ids = {1};
    ds.features = Matrix(2, 1);
    ds.features.data = {0.0, 2.0};
    ds.labels = {0, 1};
    const Scaler sc = fit_scaler(ds);
    CHECK(sc.means[0] == doctest::Approx(1.0));
    CHECK(sc.stds[0] == doctest::Approx(1.0));
    const DomainDataset out = apply_scaler(sc, ds);
    CHECK(out.features.data[0] == doctest::Approx(-1.0));
    CHECK(out.features.data[1] == doctest::Approx(1.0));
  }
  SUBCASE("constant columns map to zero") {
    DomainDataset ds;
    ds.feature_ids = {1};
    ds.features = Matrix(3, 1, 5.0);
    ds.labels = {0, 1, 0};
    const DomainDataset out = apply_scaler(fit_scaler(ds), ds);
    for (double v : out.features.data) CHECK(v == 0.0);
  }
  SUBCASE("scaled training data is centred with unit std") {
    std::vector<int> labels(400);
    for (int i = 0; i < 400; ++i) labels[static_cast<std::size_t>(i)] = i % 2;
    DomainDataset ds = labelled_dataset(labels, 6, 77);
    for (int i = 0; i < ds.size(); ++i) {
      for (int c = 0; c < ds.dim(); ++c) ds.features.at(i, c) = ds.features.at(i, c) * (c + 1) + c;
    }
    const Scaler sc = fit_scaler(ds);
    const DomainDataset out = apply_scaler(sc, ds);
    for (int c = 0; c < out.dim(); ++c) {
      double mean = 0.0;
      for (int i = 0; i < out.size(); ++i) mean += out.features.at(i, c);
      mean /= out.size();
      double var = 0.0;
      for (int i = 0; i < out.size(); ++i) {
        const double d = out.features.at(i, c) - mean;
        var += d * d;
      }
      var /= out.size();
      CHECK(std::abs(mean) < 1e-9);
      CHECK(std::abs(std::sqrt(var) - 1.0) < 1e-6);
    }
  }
  SUBCASE("empty training set is rejected") {
    DomainDataset ds;
    ds.features = Matrix(0, 2);
    CHECK_THROWS_AS(fit_scaler(ds), std::invalid_argument);
  }
}
