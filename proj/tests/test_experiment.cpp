#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "hetnids/data/persist.hpp"
#include "hetnids/eval/report.hpp"

using namespace hetnids;

namespace {

ExperimentInput small_input() {
  ExperimentInput input;
  input.name = "unit";
  SynthConfig sc;
  sc.dims = {4, 6};
  sc.samples_per_domain = {300, 300};
  input.synth = sc;
  return input;
}

TrainConfig small_cfg() {
  TrainConfig cfg;
  cfg.max_cycles = 2;
  cfg.epochs_per_phase = 1;
  cfg.cycle_subset_size = 64;
  cfg.batch_size = 32;
  cfg.eval_every = 1;
  cfg.latent_dim = 4;
  cfg.private_hidden = 8;
  cfg.shared_hidden = 4;
  cfg.baseline_epochs = 2;
  return cfg;
}

bool reports_equal(const AggregateReport& a, const AggregateReport& b) {
  if (a.raw.size() != b.raw.size() || a.cells.size() != b.cells.size()) return false;
  for (std::size_t i = 0; i < a.raw.size(); ++i) {
    if (a.raw[i].metrics.accuracy != b.raw[i].metrics.accuracy) return false;
    if (a.raw[i].data_hash != b.raw[i].data_hash) return false;
    if (a.raw[i].status != b.raw[i].status) return false;
  }
  for (std::size_t i = 0; i < a.cells.size(); ++i) {
    if (a.cells[i].accuracy.mean != b.cells[i].accuracy.mean) return false;
    if (a.cells[i].f1.stddev != b.cells[i].f1.stddev) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("single-run reports have zero stddev everywhere") {
  const AggregateReport report = run_experiment(small_input(), {1.0}, 1, 5, small_cfg());
  CHECK(report.cells.size() == 4);  // 1 fraction x 2 models x 2 domains
  for (const AggregateCell& c : report.cells) {
    CHECK(c.run_count == 1);
    CHECK(c.accuracy.stddev == 0.0);
    CHECK(c.f1.stddev == 0.0);
  }
}

TEST_CASE("reports are deterministic and job-count independent") {
  const AggregateReport a = run_experiment(small_input(), {1.0, 0.5}, 2, 9, small_cfg(), 1);
  const AggregateReport b = run_experiment(small_input(), {1.0, 0.5}, 2, 9, small_cfg(), 1);
  const AggregateReport c = run_experiment(small_input(), {1.0, 0.5}, 2, 9, small_cfg(), 2);
  CHECK(reports_equal(a, b));
  CHECK(reports_equal(a, c));
}

TEST_CASE("both models consume byte-identical prepared data") {
  const AggregateReport report = run_experiment(small_input(), {1.0}, 2, 13, small_cfg());
  for (const RunRecord& r : report.raw) {
    REQUIRE(r.status == "ok");
    CHECK_FALSE(r.data_hash.empty());
    // find the twin record for the other model
    for (const RunRecord& other : report.raw) {
      if (other.run == r.run && other.domain == r.domain && other.fraction == r.fraction &&
          other.model != r.model) {
        CHECK(other.data_hash == r.data_hash);
      }
    }
  }
}

TEST_CASE("export and import round trip reproduces the aggregates") {
  const AggregateReport report = run_experiment(small_input(), {1.0, 0.5}, 2, 17, small_cfg());
  const std::string dir = "/tmp/hetnids_tests/report_rt";
  export_report(report, dir);
  const AggregateReport loaded = import_report(dir);
  REQUIRE(loaded.cells.size() == report.cells.size());
  for (std::size_t i = 0; i < report.cells.size(); ++i) {
    CHECK(loaded.cells[i].accuracy.mean == report.cells[i].accuracy.mean);
    CHECK(loaded.cells[i].accuracy.stddev == report.cells[i].accuracy.stddev);
    CHECK(loaded.cells[i].precision.mean == report.cells[i].precision.mean);
    CHECK(loaded.cells[i].recall.stddev == report.cells[i].recall.stddev);
    CHECK(loaded.cells[i].f1.mean == report.cells[i].f1.mean);
  }
  // aggregates recomputed from the exported raw runs match the report
  const auto recomputed = compute_aggregates(loaded.raw, loaded.fractions, loaded.domains);
  REQUIRE(recomputed.size() == report.cells.size());
  for (std::size_t i = 0; i < recomputed.size(); ++i) {
    CHECK(std::abs(recomputed[i].accuracy.mean - report.cells[i].accuracy.mean) < 1e-12);
    CHECK(std::abs(recomputed[i].accuracy.stddev - report.cells[i].accuracy.stddev) < 1e-12);
    CHECK(std::abs(recomputed[i].f1.mean - report.cells[i].f1.mean) < 1e-12);
  }
}

TEST_CASE("report.csv has one row per cell and metric") {
  const AggregateReport report = run_experiment(small_input(), {1.0, 0.5}, 1, 21, small_cfg());
  const std::string dir = "/tmp/hetnids_tests/report_csv";
  export_report(report, dir);
  std::ifstream csv(dir + "/report.csv");
  std::string line;
  std::getline(csv, line);
  CHECK(line == "experiment,model,domain,fraction,metric,mean,std,status");
  int rows = 0;
  while (std::getline(csv, line)) ++rows;
  CHECK(rows == 2 * 2 * 2 * 4);  // fractions x models x domains x metrics
  // trace files land under traces/<fraction>/
  CHECK(std::filesystem::exists(dir + "/traces/fraction_1/mmd_trace_run0.csv"));
  CHECK(std::filesystem::exists(dir + "/traces/fraction_0.5/mmd_trace_run0.csv"));
}

TEST_CASE("failed runs are marked, not dropped") {
  ExperimentInput input = small_input();
  input.synth->samples_per_domain = {5, 5};  // too few per class: the split rejects it
  const AggregateReport report = run_experiment(input, {1.0}, 1, 23, small_cfg());
  REQUIRE_FALSE(report.raw.empty());
  for (const RunRecord& r : report.raw) CHECK(r.status != "ok");
  for (const AggregateCell& c : report.cells) {
    CHECK(c.run_count == 0);
    CHECK(c.status != "ok");
  }
  const std::string dir = "/tmp/hetnids_tests/report_fail";
  export_report(report, dir);
  std::ifstream csv(dir + "/report.csv");
  std::string line;
  std::getline(csv, line);
  std::getline(csv, line);
  // empty mean/std fields, status in the last column
  CHECK(line.find(",,,") != std::string::npos);
}

TEST_CASE("csv mode validation names the missing dataset") {
  ExperimentInput input;
  input.combination = combination_registry(14);
  input.csv_sources.push_back({"CIC17", "/tmp/nonexistent.csv", "multilabel"});
  CHECK_THROWS_WITH_AS(run_experiment(input, {1.0}, 1, 1, small_cfg()),
                       doctest::Contains("Sr#14 requires 2 datasets"), std::invalid_argument);
}

TEST_CASE("prepared datasets persist with a manifest") {
  const auto sources = synth_pair(*small_input().synth, 31);
  const auto prep = prepare_domains(sources, 1.0, 31, PipelineOptions{});
  const std::string dir = "/tmp/hetnids_tests/prepared";
  save_prepared(dir, prep, 31, "", true);
  std::ifstream m(dir + "/manifest.json");
  REQUIRE(m.good());
  nlohmann::json j;
  m >> j;
  CHECK(j.at("format") == "hetnids-prepared");
  CHECK(j.at("domains").size() == 2);
  CHECK(j.at("domains")[0].at("counts").at("train").get<int>() == prep[0].train.size());
  CHECK(std::filesystem::exists(dir + "/synth1_train.csv"));
  CHECK(std::filesystem::exists(dir + "/synth2_test.csv"));
  // balanced after smote + undersample
  long long attacks = j.at("domains")[0].at("train_attack_count").get<long long>();
  CHECK(attacks * 2 == prep[0].train.size());
}
