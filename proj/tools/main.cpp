// Command-line entry point: dataset preparation, synthetic generation,
// model training and experiment reporting for the heterogeneous-domain
// intrusion-detection pipeline.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hetnids/hetnids.hpp"

namespace fs = std::filesystem;
using namespace hetnids;

namespace {

struct CommonFlags {
  std::string config_path;
  std::string out_override;
  std::optional<std::uint64_t> seed_override;
  std::optional<int> runs_override;
  std::optional<int> jobs_override;
  std::optional<double> beta_override;
  std::optional<int> cycles_override;
};

void add_common(CLI::App* cmd, CommonFlags& flags, bool config_required) {
  auto* opt = cmd->add_option("--config", flags.config_path, "experiment config file (json)");
  if (config_required) opt->required();
  cmd->add_option("--out", flags.out_override, "override the output directory");
  cmd->add_option("--seed", flags.seed_override, "override base_seed");
  cmd->add_option("--runs", flags.runs_override, "override the repetition count");
  cmd->add_option("--jobs", flags.jobs_override, "parallel runs (default 1, bitwise reproducible)");
  cmd->add_option("--beta", flags.beta_override, "override the alignment loss weight");
  cmd->add_option("--max-cycles", flags.cycles_override, "override the training cycle budget");
}

ExperimentConfig load_config(const CommonFlags& flags, bool allow_default_synth) {
  ExperimentConfig cfg;
  if (!flags.config_path.empty()) {
    cfg = parse_config(flags.config_path);
  } else if (allow_default_synth) {
    nlohmann::json j;
    j["mode"] = "synthetic";
    cfg = config_from_json(j);
  } else {
    throw std::invalid_argument("config: --config is required for this subcommand");
  }
  if (!flags.out_override.empty()) cfg.output_dir = flags.out_override;
  if (flags.seed_override) cfg.base_seed = *flags.seed_override;
  if (flags.runs_override) cfg.runs = *flags.runs_override;
  if (flags.jobs_override) cfg.jobs = *flags.jobs_override;
  if (flags.beta_override) cfg.train.beta = *flags.beta_override;
  if (flags.cycles_override) cfg.train.max_cycles = *flags.cycles_override;
  cfg.echo = detail::effective_echo(cfg).dump(1);
  return cfg;
}

// Run-0 preparation shared by prepare/train/baseline: the same seed
// derivation the reporting harness uses for its first run.
std::vector<PreparedDomain> prepare_run0(const ExperimentConfig& cfg, std::uint64_t* run_seed_out) {
  validate_experiment_input(cfg.input);
  const auto tables = load_csv_tables(cfg.input);
  const std::uint64_t run_seed = cfg.base_seed;
  const auto sources = materialize_sources(cfg.input, tables, run_seed);
  const double fraction = cfg.fractions.empty() ? 1.0 : cfg.fractions.front();
  if (run_seed_out) *run_seed_out = run_seed;
  return prepare_domains(sources, fraction, run_seed, cfg.input.pipeline);
}

std::string file_stem(const std::string& name) {
  std::string stem = name;
  for (char& c : stem) {
    if (c == '/' || c == ':' || c == ' ') c = '_';
  }
  return stem;
}

int cmd_synth(const CommonFlags& flags) {
  ExperimentConfig cfg = load_config(flags, true);
  if (!cfg.input.synth) throw std::invalid_argument("synth: config must be in synthetic mode");
  const auto domains = synth_pair(*cfg.input.synth, derive_seed(cfg.base_seed, {seed_tags::kSynth}));
  fs::create_directories(cfg.output_dir);
  for (const DomainDataset& d : domains) {
    const fs::path path = fs::path(cfg.output_dir) / (d.name + ".csv");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    for (int c = 0; c < d.dim(); ++c) out << 'f' << c + 1 << ',';
    out << kDefaultLabelColumn << "\n";
    char buf[40];
    for (int i = 0; i < d.size(); ++i) {
      for (int c = 0; c < d.dim(); ++c) {
        std::snprintf(buf, sizeof(buf), "%.17g", d.features.at(i, c));
        out << buf << ',';
      }
      out << (d.labels[static_cast<std::size_t>(i)] == 0 ? "NORMAL" : "ATTACK") << "\n";
    }
    std::cout << "wrote " << path.string() << " (" << d.size() << " rows, " << d.dim()
              << " features)\n";
  }
  std::ofstream manifest(fs::path(cfg.output_dir) / "synth_manifest.json");
  manifest << nlohmann::json{{"format", "hetnids-synth"},
                             {"version", 1},
                             {"base_seed", cfg.base_seed},
                             {"config_echo", nlohmann::json::parse(cfg.echo)}}
                  .dump(1)
           << "\n";
  return 0;
}

int cmd_prepare(const CommonFlags& flags) {
  const ExperimentConfig cfg = load_config(flags, false);
  std::uint64_t run_seed = 0;
  const auto prep = prepare_run0(cfg, &run_seed);
  save_prepared(cfg.output_dir, prep, run_seed, cfg.echo, cfg.mode == "synthetic",
                input_file_hashes(cfg.input));
  for (const PreparedDomain& d : prep) {
    std::cout << "prepared " << d.name << ": train " << d.train.size() << ", val " << d.val.size()
              << ", test " << d.test.size() << "\n";
  }
  std::cout << "wrote " << (fs::path(cfg.output_dir) / "manifest.json").string() << "\n";
  return 0;
}

int cmd_train(const CommonFlags& flags) {
  const ExperimentConfig cfg = load_config(flags, false);
  std::uint64_t run_seed = 0;
  const auto prep = prepare_run0(cfg, &run_seed);

  TrainConfig tc = cfg.train;
  tc.seed = derive_seed(run_seed, {seed_tags::kProposed});
  std::vector<int> dims;
  std::vector<DomainSplits> splits;
  for (const PreparedDomain& p : prep) {
    dims.push_back(p.train.dim());
    splits.push_back({p.train, p.val});
  }
  HeteroModel model = build_model(dims, tc);
  const TrainHistory hist = train_cyclic(model, splits, tc);

  fs::create_directories(cfg.output_dir);
  write_history_csv(hist, (fs::path(cfg.output_dir) / "history.csv").string());
  write_mmd_trace_csv(hist, (fs::path(cfg.output_dir) / "mmd_trace.csv").string());

  nlohmann::json manifest;
  manifest["format"] = "hetnids-model";
  manifest["version"] = 1;
  manifest["run_seed"] = run_seed;
  manifest["model_seed"] = tc.seed;
  manifest["seed_lineage"] = model.seed_lineage;
  manifest["config_echo"] = nlohmann::json::parse(cfg.echo);
  {
    nlohmann::json hashes = nlohmann::json::object();
    for (const auto& [name, hash] : input_file_hashes(cfg.input)) hashes[name] = hash;
    manifest["input_hashes"] = std::move(hashes);
  }
  manifest["best_mean_val_accuracy"] = hist.best_accuracy();
  manifest["aborted"] = hist.aborted;
  if (hist.aborted) manifest["abort_reason"] = hist.abort_reason;
  nlohmann::json domains_json = nlohmann::json::array();
  for (std::size_t i = 0; i < prep.size(); ++i) {
    const std::string file = "private_" + file_stem(prep[i].name) + ".json";
    save_checkpoint((fs::path(cfg.output_dir) / file).string(), model.privates[i],
                    &model.private_opt[i], model.seed_lineage);
    char hash_buf[17];
    std::snprintf(hash_buf, sizeof(hash_buf), "%016llx",
                  static_cast<unsigned long long>(prep[i].content_hash));
    domains_json.push_back({{"name", prep[i].name},
                            {"feature_ids", prep[i].feature_ids},
                            {"checkpoint", file},
                            {"data_hash", hash_buf}});
  }
  manifest["domains"] = std::move(domains_json);
  save_checkpoint((fs::path(cfg.output_dir) / "shared.json").string(), model.shared,
                  &model.shared_opt, model.seed_lineage);
  manifest["shared_checkpoint"] = "shared.json";
  std::ofstream mf(fs::path(cfg.output_dir) / "manifest.json");
  mf << manifest.dump(1) << "\n";

  if (hist.aborted) {
    std::cerr << "error: training aborted: " << hist.abort_reason << "\n";
    return 2;
  }
  std::cout << "trained " << prep.size() << " domains, best mean val accuracy "
            << hist.best_accuracy() << "\n";
  std::cout << "wrote checkpoints and history under " << cfg.output_dir << "\n";
  return 0;
}

int cmd_baseline(const CommonFlags& flags) {
  const ExperimentConfig cfg = load_config(flags, false);
  std::uint64_t run_seed = 0;
  const auto prep = prepare_run0(cfg, &run_seed);
  fs::create_directories(cfg.output_dir);

  nlohmann::json manifest;
  manifest["format"] = "hetnids-baseline";
  manifest["version"] = 1;
  manifest["run_seed"] = run_seed;
  manifest["config_echo"] = nlohmann::json::parse(cfg.echo);
  nlohmann::json domains_json = nlohmann::json::array();
  for (std::size_t i = 0; i < prep.size(); ++i) {
    TrainConfig tc = cfg.train;
    tc.seed = derive_seed(run_seed, {seed_tags::kBaseline, static_cast<std::uint64_t>(i)});
    auto [net, hist] = train_baseline(prep[i].train, prep[i].val, tc);
    const std::string stem = file_stem(prep[i].name);
    const std::string file = "baseline_" + stem + ".json";
    save_checkpoint((fs::path(cfg.output_dir) / file).string(), net, nullptr, {tc.seed});
    write_history_csv(hist,
                      (fs::path(cfg.output_dir) / ("baseline_" + stem + "_history.csv")).string());
    domains_json.push_back({{"name", prep[i].name},
                            {"checkpoint", file},
                            {"best_val_accuracy", hist.best_accuracy()}});
    std::cout << "baseline " << prep[i].name << ": best val accuracy " << hist.best_accuracy()
              << "\n";
  }
  manifest["domains"] = std::move(domains_json);
  std::ofstream mf(fs::path(cfg.output_dir) / "manifest.json");
  mf << manifest.dump(1) << "\n";
  return 0;
}

int cmd_report(const CommonFlags& flags) {
  const ExperimentConfig cfg = load_config(flags, false);
  AggregateReport report =
      run_experiment(cfg.input, cfg.fractions, cfg.runs, cfg.base_seed, cfg.train, cfg.jobs);
  report.config_echo = cfg.echo;
  export_report(report, cfg.output_dir);
  std::cout << "report for '" << report.experiment << "': " << report.raw.size()
            << " raw records, " << report.cells.size() << " aggregate cells\n";
  int failed = 0;
  for (const RunRecord& r : report.raw) failed += r.status != "ok";
  if (failed > 0) std::cout << failed << " records carry failure markers\n";
  std::cout << "wrote " << (fs::path(cfg.output_dir) / "report.csv").string() << "\n";
  return 0;
}

// ---- selftest: built-in oracle checks ---------------------------------

bool selftest_subsample_counts() {
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
    DomainDataset ds;
    ds.name = "counts";
    ds.feature_ids = {1};
    ds.features = Matrix(c.total, 1, 0.0);
    ds.labels.resize(static_cast<std::size_t>(c.total));
    for (int i = 0; i < c.total; ++i) ds.labels[static_cast<std::size_t>(i)] = i % 2;
    const int got = subsample(ds, c.fraction, 1).size();
    if (got != c.want) {
      std::printf("[FAIL] subsample rounding: %d @ %.2f gave %d, want %d\n", c.total, c.fraction,
                  got, c.want);
      return false;
    }
  }
  std::printf("[ok] subsample rounding reproduces all 12 reference counts\n");
  return true;
}

bool selftest_mmd_oracle() {
  Rng rng(424242);
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    const int n = 2 + static_cast<int>(rng.below(30));
    const int m = 2 + static_cast<int>(rng.below(30));
    const int d = 1 + static_cast<int>(rng.below(6));
    LatentBatch a, b;
    a.z = Matrix(n, d);
    b.z = Matrix(m, d);
    for (double& v : a.z.data) v = rng.normal();
    for (double& v : b.z.data) v = 0.5 + rng.normal();
    const double s2 = 0.3 + 3.0 * rng.uniform();
    // independent literal evaluation of the three kernel sums
    auto kern = [&](const double* x, const double* y) {
      double s = 0.0;
      for (int c = 0; c < d; ++c) s += (x[c] - y[c]) * (x[c] - y[c]);
      return std::exp(-s / (2.0 * s2));
    };
    double t1 = 0.0, t2 = 0.0, t3 = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) t1 += kern(a.z.row(i), a.z.row(j));
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) t2 += kern(b.z.row(i), b.z.row(j));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < m; ++j) t3 += kern(a.z.row(i), b.z.row(j));
    const double want = t1 / (static_cast<double>(n) * n) + t2 / (static_cast<double>(m) * m) -
                        2.0 * t3 / (static_cast<double>(n) * m);
    const double got = mmd2_biased(a, b, KernelConfig{BandwidthPolicy::kFixed, s2, {}});
    worst = std::max(worst, std::abs(got - want));
    if (std::abs(got - want) > 1e-10 || got < -1e-12) {
      std::printf("[FAIL] mmd oracle: |diff| = %.3e\n", std::abs(got - want));
      return false;
    }
    LatentBatch same = a;
    if (std::abs(mmd2_biased(a, same, KernelConfig{})) > 1e-12) {
      std::printf("[FAIL] mmd oracle: mmd(Z,Z) not ~0\n");
      return false;
    }
  }
  std::printf("[ok] mmd matches the brute-force evaluation (worst |diff| %.2e)\n", worst);
  return true;
}

bool selftest_gradients() {
  // layer stack vs central differences
  MlpParams net = init_mlp({LayerSpec::linear(4, 6), LayerSpec::batchnorm(6), LayerSpec::relu(6),
                            LayerSpec::linear(6, 2), LayerSpec::sigmoid(2)},
                           777);
  Rng rng(778);
  Matrix x(5, 4);
  for (double& v : x.data) v = rng.normal();
  Matrix c(5, 2);
  for (double& v : c.data) v = rng.normal();
  auto loss_at = [&](const MlpParams& p) {
    MlpParams copy = p;
    const Matrix y = forward(copy, x, Mode::kTrain, 1);
    double s = 0.0;
    for (std::size_t i = 0; i < y.data.size(); ++i) s += c.data[i] * y.data[i];
    return s;
  };
  ForwardCache cache;
  {
    MlpParams work = net;
    forward(work, x, Mode::kTrain, 1, &cache);
  }
  auto [grads, dx] = backward(net, cache, c);
  const double h = 1e-5;
  double worst = 0.0;
  for (std::size_t li = 0; li < net.layers.size(); ++li) {
    auto probe = [&](Matrix& param, const Matrix& analytic) {
      for (std::size_t i = 0; i < param.data.size(); ++i) {
        const double orig = param.data[i];
        param.data[i] = orig + h;
        const double up = loss_at(net);
        param.data[i] = orig - h;
        const double down = loss_at(net);
        param.data[i] = orig;
        const double fd = (up - down) / (2.0 * h);
        const double rel = std::abs(fd - analytic.data[i]) /
                           std::max({std::abs(fd), std::abs(analytic.data[i]), 1e-6});
        worst = std::max(worst, rel);
      }
    };
    if (net.layers[li].spec.kind == LayerKind::kLinear) {
      probe(net.layers[li].weight, grads.layers[li].d_weight);
      probe(net.layers[li].bias, grads.layers[li].d_bias);
    } else if (net.layers[li].spec.kind == LayerKind::kBatchNorm) {
      probe(net.layers[li].gamma, grads.layers[li].d_gamma);
      probe(net.layers[li].beta, grads.layers[li].d_beta);
    }
  }
  if (worst > 1e-4) {
    std::printf("[FAIL] layer gradients: worst rel err %.3e\n", worst);
    return false;
  }
  std::printf("[ok] layer gradients match finite differences (worst rel err %.2e)\n", worst);

  // mmd gradient vs central differences
  LatentBatch a, b;
  a.z = Matrix(4, 3);
  b.z = Matrix(5, 3);
  for (double& v : a.z.data) v = rng.normal();
  for (double& v : b.z.data) v = 0.4 + rng.normal();
  const KernelConfig kc{BandwidthPolicy::kFixed, 1.7, {}};
  auto [da, db] = mmd2_backward(a, b, kc);
  const double hm = 1e-6;
  double worst_mmd = 0.0;
  for (std::size_t i = 0; i < a.z.data.size(); ++i) {
    const double orig = a.z.data[i];
    a.z.data[i] = orig + hm;
    const double up = mmd2_biased(a, b, kc);
    a.z.data[i] = orig - hm;
    const double down = mmd2_biased(a, b, kc);
    a.z.data[i] = orig;
    const double fd = (up - down) / (2.0 * hm);
    const double rel = std::abs(fd - da.data[i]) / std::max({std::abs(fd), std::abs(da.data[i]), 1e-8});
    worst_mmd = std::max(worst_mmd, rel);
  }
  if (worst_mmd > 1e-6) {
    std::printf("[FAIL] mmd gradient: worst rel err %.3e\n", worst_mmd);
    return false;
  }
  std::printf("[ok] mmd gradient matches finite differences (worst rel err %.2e)\n", worst_mmd);

  // combined loss through shared + active private
  TrainConfig cfg;
  cfg.latent_dim = 3;
  cfg.private_hidden = 5;
  cfg.shared_hidden = 4;
  cfg.kernel = kc;
  cfg.seed = 99;
  HeteroModel model = build_model({4, 4}, cfg);
  Matrix xb(4, 4);
  for (double& v : xb.data) v = rng.normal();
  const std::vector<int> yb = {1, 0, 0, 1};
  std::vector<LatentBatch> refs(1);
  refs[0].z = Matrix(6, 3);
  for (double& v : refs[0].z.data) v = rng.normal();
  MlpGrads pg, sg;
  {
    HeteroModel work = model;
    hetero_loss_backward(work, 0, xb, yb, refs, cfg, 5, &pg, &sg);
  }
  auto total_at = [&]() {
    HeteroModel work = model;
    return hetero_loss_backward(work, 0, xb, yb, refs, cfg, 5, nullptr, nullptr).total;
  };
  double worst_total = 0.0;
  auto probe_net = [&](MlpParams& target, const MlpGrads& grads_net) {
    for (std::size_t li = 0; li < target.layers.size(); ++li) {
      auto probe = [&](Matrix& param, const Matrix& analytic) {
        for (std::size_t i = 0; i < param.data.size(); ++i) {
          const double orig = param.data[i];
          param.data[i] = orig + h;
          const double up = total_at();
          param.data[i] = orig - h;
          const double down = total_at();
          param.data[i] = orig;
          const double fd = (up - down) / (2.0 * h);
          const double rel = std::abs(fd - analytic.data[i]) /
                             std::max({std::abs(fd), std::abs(analytic.data[i]), 1e-6});
          worst_total = std::max(worst_total, rel);
        }
      };
      if (target.layers[li].spec.kind == LayerKind::kLinear) {
        probe(target.layers[li].weight, grads_net.layers[li].d_weight);
        probe(target.layers[li].bias, grads_net.layers[li].d_bias);
      } else if (target.layers[li].spec.kind == LayerKind::kBatchNorm) {
        probe(target.layers[li].gamma, grads_net.layers[li].d_gamma);
        probe(target.layers[li].beta, grads_net.layers[li].d_beta);
      }
    }
  };
  probe_net(model.privates[0], pg);
  probe_net(model.shared, sg);
  if (worst_total > 1e-4) {
    std::printf("[FAIL] combined-loss gradients: worst rel err %.3e\n", worst_total);
    return false;
  }
  std::printf("[ok] combined-loss gradients match finite differences (worst rel err %.2e)\n",
              worst_total);
  return true;
}

int cmd_selftest() {
  bool ok = true;
  ok = selftest_subsample_counts() && ok;
  ok = selftest_mmd_oracle() && ok;
  ok = selftest_gradients() && ok;
  std::printf("%s\n", ok ? "selftest: PASS" : "selftest: FAIL");
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"domain-adaptive intrusion detection pipeline"};
  app.require_subcommand(1);

  CommonFlags synth_flags, prepare_flags, train_flags, baseline_flags, report_flags;
  auto* synth = app.add_subcommand("synth", "generate a synthetic domain pair as csv");
  add_common(synth, synth_flags, false);
  auto* prepare = app.add_subcommand("prepare", "materialize prepared splits and a manifest");
  add_common(prepare, prepare_flags, true);
  auto* train = app.add_subcommand("train", "run the cyclic trainer and write checkpoints");
  add_common(train, train_flags, true);
  auto* baseline = app.add_subcommand("baseline", "train per-domain baseline classifiers");
  add_common(baseline, baseline_flags, true);
  auto* report = app.add_subcommand("report", "run the full experiment and write report files");
  add_common(report, report_flags, true);
  app.add_subcommand("selftest", "run the built-in oracle checks");

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) return cmd_synth(synth_flags);
    if (prepare->parsed()) return cmd_prepare(prepare_flags);
    if (train->parsed()) return cmd_train(train_flags);
    if (baseline->parsed()) return cmd_baseline(baseline_flags);
    if (report->parsed()) return cmd_report(report_flags);
    return cmd_selftest();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
