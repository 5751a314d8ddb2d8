#pragma once

#include <filesystem>
#include <fstream>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "hetnids/eval/experiment.hpp"
#include "hetnids/model/config.hpp"

namespace hetnids {

// A fully validated experiment description: mode, data sources, feature
// combination, pipeline knobs, training configuration and run plan.
struct ExperimentConfig {
  std::string mode;  // "synthetic" or "csv"
  std::string experiment_name = "experiment";
  std::string output_dir = "out";
  std::vector<double> fractions = {1.0};
  int runs = 5;
  std::uint64_t base_seed = 1;
  int jobs = 1;
  ExperimentInput input;
  TrainConfig train;
  std::string echo;  // the effective config with every default filled, as JSON text
};

namespace detail {

[[noreturn]] inline void config_error(const std::string& path, const std::string& what) {
  throw std::invalid_argument("config: " + (path.empty() ? what : path + ": " + what));
}

// Unknown keys are rejected, not ignored, so misspellings cannot
// silently fall back to defaults.
inline void check_keys(const nlohmann::json& j, const std::set<std::string>& allowed,
                       const std::string& path) {
  if (!j.is_object()) config_error(path, "expected an object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) config_error(path.empty() ? key : path + "." + key, "unknown key");
  }
}

template <typename T>
T get_or(const nlohmann::json& j, const std::string& key, const T& fallback,
         const std::string& path) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    config_error(path.empty() ? key : path + "." + key, "wrong type");
  }
}

inline KernelConfig parse_kernel(const nlohmann::json& j, const std::string& path) {
  check_keys(j, {"policy", "sigma2", "mixture_multipliers"}, path);
  KernelConfig kc;
  const std::string policy = get_or<std::string>(j, "policy", "median", path);
  if (policy == "median") kc.policy = BandwidthPolicy::kMedianHeuristic;
  else if (policy == "fixed") kc.policy = BandwidthPolicy::kFixed;
  else if (policy == "mixture") kc.policy = BandwidthPolicy::kMixture;
  else config_error(path + ".policy", "must be one of median, fixed, mixture");
  kc.sigma2 = get_or<double>(j, "sigma2", kc.sigma2, path);
  kc.mixture_multipliers =
      get_or<std::vector<double>>(j, "mixture_multipliers", kc.mixture_multipliers, path);
  try {
    validate_kernel_config(kc);
  } catch (const std::invalid_argument& e) {
    config_error(path, e.what());
  }
  return kc;
}

inline TrainConfig parse_train(const nlohmann::json& j) {
  check_keys(j, {"alpha", "beta", "latent_dim", "private_hidden", "shared_hidden", "max_cycles",
                 "epochs_per_phase", "cycle_subset_size", "batch_size", "eval_every", "phase_order",
                 "early_stop_target", "learning_rate", "adam_beta1", "adam_beta2", "adam_epsilon",
                 "baseline_epochs", "baseline_dropout", "kernel", "seed"},
             "train");
  TrainConfig cfg;
  cfg.alpha = get_or<double>(j, "alpha", cfg.alpha, "train");
  cfg.beta = get_or<double>(j, "beta", cfg.beta, "train");
  cfg.latent_dim = get_or<int>(j, "latent_dim", cfg.latent_dim, "train");
  cfg.private_hidden = get_or<int>(j, "private_hidden", cfg.private_hidden, "train");
  cfg.shared_hidden = get_or<int>(j, "shared_hidden", cfg.shared_hidden, "train");
  cfg.max_cycles = get_or<int>(j, "max_cycles", cfg.max_cycles, "train");
  cfg.epochs_per_phase = get_or<int>(j, "epochs_per_phase", cfg.epochs_per_phase, "train");
  cfg.cycle_subset_size = get_or<int>(j, "cycle_subset_size", cfg.cycle_subset_size, "train");
  cfg.batch_size = get_or<int>(j, "batch_size", cfg.batch_size, "train");
  cfg.eval_every = get_or<int>(j, "eval_every", cfg.eval_every, "train");
  cfg.seed = get_or<std::uint64_t>(j, "seed", cfg.seed, "train");
  const std::string order = get_or<std::string>(j, "phase_order", "ascending", "train");
  if (order == "ascending") cfg.phase_order = PhaseOrder::kAscending;
  else if (order == "descending") cfg.phase_order = PhaseOrder::kDescending;
  else config_error("train.phase_order", "must be ascending or descending");
  if (j.contains("early_stop_target") && !j.at("early_stop_target").is_null()) {
    cfg.early_stop.enabled = true;
    cfg.early_stop.target_accuracy = get_or<double>(j, "early_stop_target", 1.0, "train");
    if (cfg.early_stop.target_accuracy <= 0.0 || cfg.early_stop.target_accuracy > 1.0)
      config_error("train.early_stop_target", "must be in (0, 1]");
  }
  cfg.adam.lr = get_or<double>(j, "learning_rate", cfg.adam.lr, "train");
  cfg.adam.beta1 = get_or<double>(j, "adam_beta1", cfg.adam.beta1, "train");
  cfg.adam.beta2 = get_or<double>(j, "adam_beta2", cfg.adam.beta2, "train");
  cfg.adam.eps = get_or<double>(j, "adam_epsilon", cfg.adam.eps, "train");
  cfg.baseline_epochs = get_or<int>(j, "baseline_epochs", cfg.baseline_epochs, "train");
  cfg.baseline_dropout = get_or<double>(j, "baseline_dropout", cfg.baseline_dropout, "train");
  if (j.contains("kernel")) cfg.kernel = parse_kernel(j.at("kernel"), "train.kernel");
  try {
    validate_train_config(cfg);
  } catch (const std::invalid_argument& e) {
    config_error("train", e.what());
  }
  return cfg;
}

inline SynthConfig parse_synth(const nlohmann::json& j) {
  check_keys(j, {"latent_dim", "dims", "samples_per_domain", "class_separation", "domain_shift",
                 "noise_std"},
             "synth");
  SynthConfig sc;
  sc.latent_dim = get_or<int>(j, "latent_dim", sc.latent_dim, "synth");
  const auto dims = get_or<std::vector<int>>(j, "dims", {sc.dims[0], sc.dims[1]}, "synth");
  if (dims.size() != 2) config_error("synth.dims", "expected two entries");
  sc.dims = {dims[0], dims[1]};
  const auto samples = get_or<std::vector<int>>(
      j, "samples_per_domain", {sc.samples_per_domain[0], sc.samples_per_domain[1]}, "synth");
  if (samples.size() != 2) config_error("synth.samples_per_domain", "expected two entries");
  sc.samples_per_domain = {samples[0], samples[1]};
  sc.class_separation = get_or<double>(j, "class_separation", sc.class_separation, "synth");
  sc.domain_shift = get_or<double>(j, "domain_shift", sc.domain_shift, "synth");
  sc.noise_std = get_or<double>(j, "noise_std", sc.noise_std, "synth");
  try {
    validate_synth_config(sc);
  } catch (const std::invalid_argument& e) {
    config_error("synth", e.what());
  }
  return sc;
}

inline nlohmann::json effective_echo(const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["mode"] = cfg.mode;
  j["experiment_name"] = cfg.experiment_name;
  j["output_dir"] = cfg.output_dir;
  j["fractions"] = cfg.fractions;
  j["runs"] = cfg.runs;
  j["base_seed"] = cfg.base_seed;
  j["jobs"] = cfg.jobs;
  j["split_ratios"] = cfg.input.pipeline.split_ratios;
  j["smote_k"] = cfg.input.pipeline.smote_k;
  if (cfg.input.synth) {
    const SynthConfig& sc = *cfg.input.synth;
    j["synth"] = {{"latent_dim", sc.latent_dim},
                  {"dims", sc.dims},
                  {"samples_per_domain", sc.samples_per_domain},
                  {"class_separation", sc.class_separation},
                  {"domain_shift", sc.domain_shift},
                  {"noise_std", sc.noise_std}};
  } else {
    nlohmann::json datasets = nlohmann::json::array();
    for (const CsvDomainSource& src : cfg.input.csv_sources) {
      datasets.push_back(
          {{"name", src.dataset_name}, {"path", src.path}, {"label_column", src.label_column}});
    }
    j["csv"] = {{"datasets", datasets}, {"normal_token", cfg.input.pipeline.normal_token}};
    const CrossDomainSpec& spec = *cfg.input.combination;
    j["combination"] = spec.sr_id > 0
                           ? nlohmann::json{{"sr_id", spec.sr_id}}
                           : nlohmann::json{{"feature_id_lists", spec.feature_id_lists}};
    if (spec.sr_id > 0) {
      j["combination"]["dataset_names"] = spec.dataset_names;
      j["combination"]["feature_id_lists"] = spec.feature_id_lists;
      if (!spec.notes.empty()) j["combination"]["notes"] = spec.notes;
    }
  }
  const TrainConfig& t = cfg.train;
  j["train"] = {{"alpha", t.alpha},
                {"beta", t.beta},
                {"latent_dim", t.latent_dim},
                {"private_hidden", t.private_hidden},
                {"shared_hidden", t.shared_hidden},
                {"max_cycles", t.max_cycles},
                {"epochs_per_phase", t.epochs_per_phase},
                {"cycle_subset_size", t.cycle_subset_size},
                {"batch_size", t.batch_size},
                {"eval_every", t.eval_every},
                {"phase_order", t.phase_order == PhaseOrder::kAscending ? "ascending" : "descending"},
                {"learning_rate", t.adam.lr},
                {"adam_beta1", t.adam.beta1},
                {"adam_beta2", t.adam.beta2},
                {"adam_epsilon", t.adam.eps},
                {"baseline_epochs", t.baseline_epochs},
                {"baseline_dropout", t.baseline_dropout}};
  if (t.early_stop.enabled) j["train"]["early_stop_target"] = t.early_stop.target_accuracy;
  else j["train"]["early_stop_target"] = nullptr;
  const char* policy = t.kernel.policy == BandwidthPolicy::kFixed
                           ? "fixed"
                           : t.kernel.policy == BandwidthPolicy::kMixture ? "mixture" : "median";
  j["train"]["kernel"] = {{"policy", policy},
                          {"sigma2", t.kernel.sigma2},
                          {"mixture_multipliers", t.kernel.mixture_multipliers}};
  return j;
}

}  // namespace detail

// Parses and validates an experiment config. Unknown keys are rejected
// with their path; referenced CSV files must exist; defaults are filled
// and echoed back verbatim through ExperimentConfig::echo.
inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  detail::check_keys(j,
                     {"mode", "experiment_name", "output_dir", "fractions", "runs", "base_seed",
                      "jobs", "csv", "combination", "synth", "split_ratios", "smote_k", "train"},
                     "");
  ExperimentConfig cfg;
  if (!j.contains("mode")) detail::config_error("mode", "required (synthetic or csv)");
  cfg.mode = j.at("mode").get<std::string>();
  if (cfg.mode != "synthetic" && cfg.mode != "csv")
    detail::config_error("mode", "must be synthetic or csv");
  cfg.experiment_name = detail::get_or<std::string>(j, "experiment_name", cfg.experiment_name, "");
  cfg.output_dir = detail::get_or<std::string>(j, "output_dir", cfg.output_dir, "");
  cfg.fractions = detail::get_or<std::vector<double>>(j, "fractions", cfg.fractions, "");
  for (double f : cfg.fractions) {
    if (!(f > 0.0) || f > 1.0) detail::config_error("fractions", "entries must be in (0, 1]");
  }
  cfg.runs = detail::get_or<int>(j, "runs", cfg.runs, "");
  if (cfg.runs < 1) detail::config_error("runs", "must be >= 1");
  cfg.base_seed = detail::get_or<std::uint64_t>(j, "base_seed", cfg.base_seed, "");
  cfg.jobs = detail::get_or<int>(j, "jobs", cfg.jobs, "");
  if (cfg.jobs < 1) detail::config_error("jobs", "must be >= 1");

  const auto ratios =
      detail::get_or<std::vector<double>>(j, "split_ratios", {0.7, 0.15, 0.15}, "");
  if (ratios.size() != 3) detail::config_error("split_ratios", "expected three entries");
  cfg.input.pipeline.split_ratios = {ratios[0], ratios[1], ratios[2]};
  cfg.input.pipeline.smote_k = detail::get_or<int>(j, "smote_k", cfg.input.pipeline.smote_k, "");
  if (cfg.input.pipeline.smote_k < 1) detail::config_error("smote_k", "must be >= 1");

  cfg.input.name = cfg.experiment_name;
  if (cfg.mode == "synthetic") {
    if (j.contains("csv") || j.contains("combination"))
      detail::config_error("", "synthetic mode takes no csv or combination section");
    cfg.input.synth = j.contains("synth") ? detail::parse_synth(j.at("synth")) : SynthConfig{};
  } else {
    if (j.contains("synth")) detail::config_error("synth", "not allowed in csv mode");
    if (!j.contains("csv")) detail::config_error("csv", "required in csv mode");
    const nlohmann::json& cj = j.at("csv");
    detail::check_keys(cj, {"datasets", "normal_token"}, "csv");
    cfg.input.pipeline.normal_token =
        detail::get_or<std::string>(cj, "normal_token", cfg.input.pipeline.normal_token, "csv");
    if (!cj.contains("datasets") || !cj.at("datasets").is_array() || cj.at("datasets").empty())
      detail::config_error("csv.datasets", "at least one dataset entry required");
    for (const auto& dj : cj.at("datasets")) {
      detail::check_keys(dj, {"name", "path", "label_column"}, "csv.datasets[]");
      CsvDomainSource src;
      if (!dj.contains("name") || !dj.contains("path"))
        detail::config_error("csv.datasets[]", "name and path required");
      src.dataset_name = dj.at("name").get<std::string>();
      src.path = dj.at("path").get<std::string>();
      src.label_column =
          detail::get_or<std::string>(dj, "label_column", src.label_column, "csv.datasets[]");
      if (!std::filesystem::exists(src.path))
        detail::config_error("csv.datasets[]", "file does not exist: " + src.path);
      cfg.input.csv_sources.push_back(std::move(src));
    }

    if (!j.contains("combination")) detail::config_error("combination", "required in csv mode");
    const nlohmann::json& kj = j.at("combination");
    detail::check_keys(kj, {"sr_id", "feature_id_lists"}, "combination");
    const bool has_sr = kj.contains("sr_id");
    const bool has_lists = kj.contains("feature_id_lists");
    if (has_sr == has_lists)
      detail::config_error("combination", "exactly one of sr_id and feature_id_lists");
    if (has_sr) {
      cfg.input.combination = combination_registry(kj.at("sr_id").get<int>());
    } else {
      CrossDomainSpec spec;
      spec.sr_id = 0;
      spec.feature_id_lists = kj.at("feature_id_lists").get<std::vector<std::vector<int>>>();
      if (spec.feature_id_lists.size() < 2)
        detail::config_error("combination.feature_id_lists", "need at least two lists");
      if (spec.feature_id_lists.size() != cfg.input.csv_sources.size())
        detail::config_error("combination.feature_id_lists",
                             "one csv dataset entry per list required");
      for (const CsvDomainSource& src : cfg.input.csv_sources)
        spec.dataset_names.push_back(src.dataset_name);
      cfg.input.combination = std::move(spec);
    }
    try {
      validate_experiment_input(cfg.input);
    } catch (const std::invalid_argument& e) {
      detail::config_error("", e.what());
    }
  }

  cfg.train = j.contains("train") ? detail::parse_train(j.at("train")) : TrainConfig{};
  cfg.echo = detail::effective_echo(cfg).dump(1);
  return cfg;
}

inline ExperimentConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("config: " + path + " is not valid json: " + e.what());
  }
  return config_from_json(j);
}

}  // namespace hetnids
