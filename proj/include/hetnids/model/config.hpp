#pragma once

#include <cstdint>
#include <stdexcept>

#include "hetnids/adapt/mmd.hpp"
#include "hetnids/nn/adam.hpp"

namespace hetnids {

enum class PhaseOrder { kAscending, kDescending };

struct EarlyStop {
  bool enabled = false;
  double target_accuracy = 1.0;
};

// Everything the trainers need: loss weighting, architecture widths,
// cycle structure, optimizer settings and the run seed. Defaults are the
// artifact-wide defaults; configs echo these into output manifests.
struct TrainConfig {
  double alpha = 1.0;  // cross-entropy weight
  double beta = 1.0;   // latent-alignment weight

  int latent_dim = 32;
  int private_hidden = 64;
  int shared_hidden = 16;

  int max_cycles = 1000;
  int epochs_per_phase = 2;
  int cycle_subset_size = 512;
  int batch_size = 128;
  int eval_every = 10;  // cycles between validation passes
  PhaseOrder phase_order = PhaseOrder::kAscending;
  EarlyStop early_stop;

  KernelConfig kernel;
  AdamHyper adam;
  std::uint64_t seed = 1;

  int baseline_epochs = 50;
  double baseline_dropout = 0.2;
};

inline void validate_train_config(const TrainConfig& cfg) {
  if (cfg.alpha < 0.0 || cfg.beta < 0.0)
    throw std::invalid_argument("TrainConfig: alpha and beta must be >= 0");
  if (cfg.latent_dim < 1 || cfg.private_hidden < 1 || cfg.shared_hidden < 1)
    throw std::invalid_argument("TrainConfig: layer widths must be >= 1");
  if (cfg.max_cycles < 1) throw std::invalid_argument("TrainConfig: max_cycles must be >= 1");
  if (cfg.epochs_per_phase < 1)
    throw std::invalid_argument("TrainConfig: epochs_per_phase must be >= 1");
  if (cfg.cycle_subset_size < 1)
    throw std::invalid_argument("TrainConfig: cycle_subset_size must be >= 1");
  if (cfg.batch_size < 2) throw std::invalid_argument("TrainConfig: batch_size must be >= 2");
  if (cfg.eval_every < 1) throw std::invalid_argument("TrainConfig: eval_every must be >= 1");
  if (cfg.baseline_epochs < 0)
    throw std::invalid_argument("TrainConfig: baseline_epochs must be >= 0");
  if (cfg.baseline_dropout < 0.0 || cfg.baseline_dropout >= 1.0)
    throw std::invalid_argument("TrainConfig: baseline_dropout must be in [0,1)");
  validate_kernel_config(cfg.kernel);
}

// Seed-derivation tags. Together with derive_seed these make every
// random draw of a run reproducible in isolation; the values are part of
// the project's reproducibility contract.
namespace seed_tags {
inline constexpr std::uint64_t kPrivateInit = 11;
inline constexpr std::uint64_t kSharedInit = 12;
inline constexpr std::uint64_t kBaselineInit = 13;
inline constexpr std::uint64_t kBaselineRun = 14;
inline constexpr std::uint64_t kCycleSubset = 21;   // (cycle, domain)
inline constexpr std::uint64_t kEpochShuffle = 22;  // (cycle, domain, epoch)
inline constexpr std::uint64_t kForward = 23;       // (cycle, domain, epoch, batch)
inline constexpr std::uint64_t kFitShuffle = 31;    // (epoch)
inline constexpr std::uint64_t kFitForward = 32;    // (epoch, batch)
inline constexpr std::uint64_t kSynth = 41;
inline constexpr std::uint64_t kSplit = 42;      // (domain)
inline constexpr std::uint64_t kFraction = 43;   // (domain)
inline constexpr std::uint64_t kSmote = 44;      // (domain)
inline constexpr std::uint64_t kUnder = 45;      // (domain)
inline constexpr std::uint64_t kBaseline = 46;   // (domain)
inline constexpr std::uint64_t kProposed = 47;
}  // namespace seed_tags

}  // namespace hetnids
