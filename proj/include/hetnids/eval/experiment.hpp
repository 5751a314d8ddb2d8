#pragma once

#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "hetnids/data/combinations.hpp"
#include "hetnids/data/pipeline.hpp"
#include "hetnids/data/synth.hpp"
#include "hetnids/eval/metrics.hpp"
#include "hetnids/model/train.hpp"

namespace hetnids {

struct PipelineOptions {
  std::array<double, 3> split_ratios = {0.7, 0.15, 0.15};
  int smote_k = 5;
  std::string normal_token = "NORMAL";
};

struct CsvDomainSource {
  std::string dataset_name;  // matches the registry names (CIC17, CIC18, SDN20, ANDMAL)
  std::string path;
  std::string label_column = kDefaultLabelColumn;
};

// What to run: either the synthetic generator or CSV-backed datasets
// with a feature combination (from the registry or explicit lists).
struct ExperimentInput {
  std::string name = "experiment";
  std::optional<SynthConfig> synth;
  std::vector<CsvDomainSource> csv_sources;
  std::optional<CrossDomainSpec> combination;
  PipelineOptions pipeline;
};

struct PreparedDomain {
  std::string name;
  std::vector<int> feature_ids;
  DomainDataset train;
  DomainDataset val;
  DomainDataset test;
  Scaler scaler;
  std::uint64_t content_hash = 0;
};

struct RunRecord {
  double fraction = 1.0;
  int run = 0;
  std::uint64_t seed = 0;
  std::string model;   // "baseline" or "proposed"
  std::string domain;
  Metrics metrics;
  std::string data_hash;
  std::string status = "ok";
};

struct MetricStats {
  double mean = 0.0;
  double stddev = 0.0;
};

struct AggregateCell {
  std::string model;
  std::string domain;
  double fraction = 1.0;
  int run_count = 0;
  MetricStats accuracy;
  MetricStats precision;
  MetricStats recall;
  MetricStats f1;
  std::string status = "ok";
};

struct MmdTrace {
  double fraction = 1.0;
  int run = 0;
  std::vector<std::pair<int, double>> trace;
};

struct AggregateReport {
  std::string experiment;
  std::string config_echo;  // verbatim configuration (JSON text), filled by the CLI
  std::uint64_t base_seed = 0;
  int runs = 0;
  std::vector<double> fractions;
  std::vector<std::string> domains;
  std::vector<std::pair<std::string, std::string>> input_hashes;  // dataset name -> file hash
  std::vector<RunRecord> raw;
  std::vector<AggregateCell> cells;
  std::vector<MmdTrace> traces;
};

namespace detail {

inline std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace detail

inline void validate_experiment_input(const ExperimentInput& input) {
  const bool synth_mode = input.synth.has_value();
  const bool csv_mode = !input.csv_sources.empty() || input.combination.has_value();
  if (synth_mode == csv_mode)
    throw std::invalid_argument("experiment: exactly one of synthetic and csv mode");
  if (csv_mode) {
    if (!input.combination.has_value())
      throw std::invalid_argument("experiment: csv mode needs a feature combination");
    const CrossDomainSpec& spec = *input.combination;
    if (spec.dataset_names.size() != spec.feature_id_lists.size())
      throw std::invalid_argument("experiment: combination name/list count mismatch");
    std::vector<std::string> distinct;
    for (const std::string& name : spec.dataset_names) {
      bool seen = false;
      for (const std::string& d : distinct) seen = seen || d == name;
      if (!seen) distinct.push_back(name);
    }
    for (const std::string& name : distinct) {
      bool found = false;
      for (const CsvDomainSource& src : input.csv_sources) found = found || src.dataset_name == name;
      if (!found) {
        std::string msg = spec.sr_id > 0
                              ? "Sr#" + std::to_string(spec.sr_id) + " requires " +
                                    std::to_string(distinct.size()) + " datasets"
                              : "combination requires dataset '" + name + "'";
        throw std::invalid_argument(msg + "; no csv path for '" + name + "'");
      }
    }
  }
}

// Domain names are fixed by the input, not by what a run happens to
// produce, so failed runs still aggregate into the right cells.
inline std::vector<std::string> expected_domain_names(const ExperimentInput& input) {
  if (input.synth) return {"synth1", "synth2"};
  std::vector<std::string> out;
  const CrossDomainSpec& spec = *input.combination;
  for (std::size_t i = 0; i < spec.dataset_names.size(); ++i)
    out.push_back(spec.dataset_names[i] + ":" + std::to_string(i + 1));
  return out;
}

// Loads, cleans and binarizes each distinct CSV source once.
inline std::map<std::string, RawTable> load_csv_tables(const ExperimentInput& input) {
  std::map<std::string, RawTable> tables;
  for (const CsvDomainSource& src : input.csv_sources) {
    if (tables.count(src.dataset_name)) continue;
    RawTable t = load_flow_csv(src.path, src.label_column);
    tables.emplace(src.dataset_name,
                   binarize_labels(clean(t), input.pipeline.normal_token));
  }
  return tables;
}

// Content hash of each input file, keyed by dataset name; recorded in
// manifests so a run can be re-checked against the exact inputs.
inline std::map<std::string, std::string> input_file_hashes(const ExperimentInput& input) {
  std::map<std::string, std::string> hashes;
  for (const CsvDomainSource& src : input.csv_sources) {
    if (hashes.count(src.dataset_name)) continue;
    std::ifstream in(src.path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + src.path);
    std::uint64_t h = 1469598103934665603ULL;
    char buf[1 << 16];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
      h = fnv1a_bytes(buf, static_cast<std::size_t>(in.gcount()), h);
      if (!in) break;
    }
    hashes.emplace(src.dataset_name, detail::hash_hex(h));
  }
  return hashes;
}

// Per-run domain datasets before splitting: synthetic draws depend on
// the run seed, csv views are deterministic projections.
inline std::vector<DomainDataset> materialize_sources(const ExperimentInput& input,
                                                      const std::map<std::string, RawTable>& tables,
                                                      std::uint64_t run_seed) {
  if (input.synth) return synth_pair(*input.synth, derive_seed(run_seed, {seed_tags::kSynth}));
  const CrossDomainSpec& spec = *input.combination;
  std::vector<DomainDataset> out;
  for (std::size_t i = 0; i < spec.dataset_names.size(); ++i) {
    const auto it = tables.find(spec.dataset_names[i]);
    if (it == tables.end())
      throw std::invalid_argument("experiment: missing table for '" + spec.dataset_names[i] + "'");
    const std::string domain_name = spec.dataset_names[i] + ":" + std::to_string(i + 1);
    out.push_back(select_features(it->second, spec.feature_id_lists[i], domain_name));
  }
  return out;
}

// The preparation pipeline for one run: stratified split, train-split
// subsampling for every domain after the first, SMOTE then random
// undersampling on the training split, and train-fitted scaling of all
// three splits.
inline std::vector<PreparedDomain> prepare_domains(const std::vector<DomainDataset>& sources,
                                                   double fraction, std::uint64_t run_seed,
                                                   const PipelineOptions& opts) {
  std::vector<PreparedDomain> out;
  out.reserve(sources.size());
  for (std::size_t i = 0; i < sources.size(); ++i) {
    const std::uint64_t dom = static_cast<std::uint64_t>(i);
    SplitBundle split = stratified_split(sources[i], opts.split_ratios,
                                         derive_seed(run_seed, {seed_tags::kSplit, dom}));
    if (i > 0 && fraction < 1.0) {
      split.train = subsample(split.train, fraction, derive_seed(run_seed, {seed_tags::kFraction, dom}));
    }
    DomainDataset balanced =
        random_undersample(smote(split.train, opts.smote_k, derive_seed(run_seed, {seed_tags::kSmote, dom})),
                           derive_seed(run_seed, {seed_tags::kUnder, dom}));
    PreparedDomain prep;
    prep.name = sources[i].name;
    prep.feature_ids = sources[i].feature_ids;
    prep.scaler = fit_scaler(balanced);
    prep.train = apply_scaler(prep.scaler, balanced);
    prep.val = apply_scaler(prep.scaler, split.val);
    prep.test = apply_scaler(prep.scaler, split.test);
    std::uint64_t h = hash_dataset(prep.train);
    h = hash_dataset(prep.val, h);
    h = hash_dataset(prep.test, h);
    prep.content_hash = h;
    out.push_back(std::move(prep));
  }
  return out;
}

namespace detail {

struct RunOutcome {
  std::vector<RunRecord> records;
  std::optional<MmdTrace> trace;
};

// One complete run: prepare, train the per-domain baselines and the
// proposed model on identical prepared data, evaluate on the untouched
// test splits.
inline RunOutcome execute_run(const ExperimentInput& input,
                              const std::map<std::string, RawTable>& tables, double fraction,
                              int run, std::uint64_t base_seed, const TrainConfig& train_cfg) {
  const std::uint64_t run_seed = base_seed + static_cast<std::uint64_t>(run);
  RunOutcome out;
  auto fail_all = [&](const std::string& why) {
    for (const char* model : {"baseline", "proposed"}) {
      RunRecord r;
      r.fraction = fraction;
      r.run = run;
      r.seed = run_seed;
      r.model = model;
      r.domain = "*";
      r.status = why;
      out.records.push_back(std::move(r));
    }
  };
  try {
    const std::vector<DomainDataset> sources = materialize_sources(input, tables, run_seed);
    const std::vector<PreparedDomain> prep = prepare_domains(sources, fraction, run_seed,
                                                             input.pipeline);
    // baselines
    for (std::size_t i = 0; i < prep.size(); ++i) {
      TrainConfig cfg = train_cfg;
      cfg.seed = derive_seed(run_seed, {seed_tags::kBaseline, static_cast<std::uint64_t>(i)});
      auto [net, hist] = train_baseline(prep[i].train, prep[i].val, cfg);
      RunRecord r;
      r.fraction = fraction;
      r.run = run;
      r.seed = run_seed;
      r.model = "baseline";
      r.domain = prep[i].name;
      r.data_hash = hash_hex(prep[i].content_hash);
      if (hist.aborted) {
        r.status = "baseline aborted: " + hist.abort_reason;
      } else {
        r.metrics = evaluate(predict(net, prep[i].test.features), prep[i].test.labels);
      }
      out.records.push_back(std::move(r));
    }
    // proposed model on the same prepared data
    TrainConfig cfg = train_cfg;
    cfg.seed = derive_seed(run_seed, {seed_tags::kProposed});
    std::vector<int> dims;
    std::vector<DomainSplits> splits;
    for (const PreparedDomain& p : prep) {
      dims.push_back(p.train.dim());
      splits.push_back({p.train, p.val});
    }
    HeteroModel model = build_model(dims, cfg);
    const TrainHistory hist = train_cyclic(model, splits, cfg);
    for (std::size_t i = 0; i < prep.size(); ++i) {
      RunRecord r;
      r.fraction = fraction;
      r.run = run;
      r.seed = run_seed;
      r.model = "proposed";
      r.domain = prep[i].name;
      r.data_hash = hash_hex(prep[i].content_hash);
      if (hist.aborted) {
        r.status = "proposed aborted: " + hist.abort_reason;
      } else {
        r.metrics = evaluate(predict(model, static_cast<int>(i), prep[i].test.features),
                             prep[i].test.labels);
      }
      out.records.push_back(std::move(r));
    }
    if (!hist.aborted) {
      MmdTrace trace;
      trace.fraction = fraction;
      trace.run = run;
      trace.trace = hist.mmd_trace();
      out.trace = std::move(trace);
    }
  } catch (const std::exception& e) {
    fail_all(e.what());
  }
  return out;
}

inline MetricStats stats_of(const std::vector<double>& xs) {
  MetricStats s;
  if (xs.empty()) return s;
  for (double x : xs) s.mean += x;
  s.mean /= static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double acc = 0.0;
    for (double x : xs) acc += (x - s.mean) * (x - s.mean);
    s.stddev = std::sqrt(acc / static_cast<double>(xs.size() - 1));
  }
  return s;
}

}  // namespace detail

// Pure fold from raw run records to the aggregate cells; also used to
// re-verify imported reports.
inline std::vector<AggregateCell> compute_aggregates(const std::vector<RunRecord>& raw,
                                                     const std::vector<double>& fractions,
                                                     const std::vector<std::string>& domains) {
  std::vector<AggregateCell> cells;
  for (double fraction : fractions) {
    for (const char* model : {"baseline", "proposed"}) {
      for (const std::string& domain : domains) {
        AggregateCell cell;
        cell.model = model;
        cell.domain = domain;
        cell.fraction = fraction;
        std::vector<double> acc, prec, rec, f1;
        std::string failure;
        for (const RunRecord& r : raw) {
          if (r.fraction != fraction || r.model != model) continue;
          if (r.domain != domain && r.domain != "*") continue;
          if (r.status != "ok") {
            failure = r.status;
            continue;
          }
          acc.push_back(r.metrics.accuracy);
          prec.push_back(r.metrics.precision);
          rec.push_back(r.metrics.recall);
          f1.push_back(r.metrics.f1);
        }
        cell.run_count = static_cast<int>(acc.size());
        cell.accuracy = detail::stats_of(acc);
        cell.precision = detail::stats_of(prec);
        cell.recall = detail::stats_of(rec);
        cell.f1 = detail::stats_of(f1);
        if (cell.run_count == 0) cell.status = failure.empty() ? "no data" : failure;
        else if (!failure.empty()) cell.status = "partial: " + failure;
        cells.push_back(std::move(cell));
      }
    }
  }
  return cells;
}

// Runs R seeded repetitions of (prepare -> train baseline + proposed ->
// evaluate) for every fraction and aggregates mean/std per cell. Runs
// are independent; `jobs` > 1 executes them on worker threads without
// changing any result.
inline AggregateReport run_experiment(const ExperimentInput& input,
                                      const std::vector<double>& fractions, int runs,
                                      std::uint64_t base_seed, const TrainConfig& train_cfg,
                                      int jobs = 1) {
  validate_experiment_input(input);
  validate_train_config(train_cfg);
  if (runs < 1) throw std::invalid_argument("run_experiment: runs must be >= 1");
  if (fractions.empty()) throw std::invalid_argument("run_experiment: no fractions");
  for (double f : fractions) {
    if (!(f > 0.0) || f > 1.0)
      throw std::invalid_argument("run_experiment: fractions must be in (0, 1]");
  }

  const std::map<std::string, RawTable> tables = load_csv_tables(input);

  struct Job {
    double fraction;
    int run;
  };
  std::vector<Job> work;
  for (double f : fractions) {
    for (int r = 0; r < runs; ++r) work.push_back({f, r});
  }
  std::vector<detail::RunOutcome> outcomes(work.size());
  const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(work.size())));
  if (workers == 1) {
    for (std::size_t w = 0; w < work.size(); ++w) {
      outcomes[w] = detail::execute_run(input, tables, work[w].fraction, work[w].run, base_seed,
                                        train_cfg);
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int t = 0; t < workers; ++t) {
      pool.emplace_back([&]() {
        for (;;) {
          const std::size_t w = next.fetch_add(1);
          if (w >= work.size()) return;
          outcomes[w] = detail::execute_run(input, tables, work[w].fraction, work[w].run,
                                            base_seed, train_cfg);
        }
      });
    }
    for (std::thread& t : pool) t.join();
  }

  AggregateReport report;
  report.experiment = input.name;
  report.base_seed = base_seed;
  report.runs = runs;
  report.fractions = fractions;
  report.domains = expected_domain_names(input);
  for (auto& [name, hash] : input_file_hashes(input)) report.input_hashes.emplace_back(name, hash);
  for (detail::RunOutcome& o : outcomes) {
    for (RunRecord& r : o.records) report.raw.push_back(std::move(r));
    if (o.trace) report.traces.push_back(std::move(*o.trace));
  }
  report.cells = compute_aggregates(report.raw, report.fractions, report.domains);
  return report;
}

}  // namespace hetnids
