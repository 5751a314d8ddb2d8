#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hetnids/data/pipeline.hpp"
#include "hetnids/model/hetero.hpp"
#include "hetnids/model/loss.hpp"

namespace hetnids {

struct DomainSplits {
  DomainDataset train;
  DomainDataset val;
};

struct EpochRecord {
  int cycle = 0;
  int domain = 0;
  int epoch = 0;
  LossBreakdown loss;
};

struct EvalRecord {
  int cycle = 0;
  std::vector<double> val_accuracy;  // one entry per domain
  double mean_accuracy = 0.0;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  std::vector<EvalRecord> evals;
  int best_eval = -1;
  bool aborted = false;
  std::string abort_reason;
  int abort_cycle = -1;

  // Mean alignment loss per cycle, in cycle order.
  std::vector<std::pair<int, double>> mmd_trace() const {
    std::map<int, std::pair<double, int>> acc;
    for (const EpochRecord& r : epochs) {
      auto& slot = acc[r.cycle];
      slot.first += r.loss.mmd;
      slot.second += 1;
    }
    std::vector<std::pair<int, double>> out;
    out.reserve(acc.size());
    for (const auto& [cycle, sum_count] : acc)
      out.emplace_back(cycle, sum_count.first / sum_count.second);
    return out;
  }

  double best_accuracy() const {
    return best_eval >= 0 ? evals[static_cast<std::size_t>(best_eval)].mean_accuracy : 0.0;
  }
};

inline double accuracy_of(const std::vector<int>& preds, const std::vector<int>& labels) {
  if (preds.size() != labels.size() || preds.empty())
    throw std::invalid_argument("accuracy_of: length mismatch");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) hits += preds[i] == labels[i];
  return static_cast<double>(hits) / static_cast<double>(preds.size());
}

namespace detail {

inline void gather_batch(const DomainDataset& ds, const std::vector<int>& rows, int begin, int end,
                         Matrix& x, std::vector<int>& y) {
  const int b = end - begin;
  x = Matrix(b, ds.dim());
  y.resize(static_cast<std::size_t>(b));
  for (int r = 0; r < b; ++r) {
    const int src = rows[static_cast<std::size_t>(begin + r)];
    const double* in = ds.features.row(src);
    double* out = x.row(r);
    for (int c = 0; c < ds.dim(); ++c) out[c] = in[c];
    y[static_cast<std::size_t>(r)] = ds.labels[static_cast<std::size_t>(src)];
  }
}

struct ModelSnapshot {
  std::vector<MlpParams> privates;
  MlpParams shared;
};

inline ModelSnapshot snapshot(const HeteroModel& model) {
  return {model.privates, model.shared};
}

inline void restore(HeteroModel& model, const ModelSnapshot& snap) {
  model.privates = snap.privates;
  model.shared = snap.shared;
}

}  // namespace detail

// Forward + combined loss + (optionally) gradients for one minibatch of
// the active domain. Reference latents are constants: the alignment
// gradient flows into the active private network only, the
// classification gradient into the shared and active private networks.
inline LossBreakdown hetero_loss_backward(HeteroModel& model, int domain_id, const Matrix& xb,
                                          const std::vector<int>& yb,
                                          const std::vector<LatentBatch>& refs,
                                          const TrainConfig& cfg, std::uint64_t forward_seed,
                                          MlpGrads* private_grads, MlpGrads* shared_grads) {
  check_domain_id(model, domain_id);
  if (refs.empty()) throw std::invalid_argument("hetero_loss_backward: no reference batches");
  MlpParams& priv = model.privates[static_cast<std::size_t>(domain_id)];

  ForwardCache priv_cache;
  ForwardCache shared_cache;
  const bool want_grads = private_grads != nullptr || shared_grads != nullptr;
  LatentBatch z;
  z.domain_id = domain_id;
  z.z = forward(priv, xb, Mode::kTrain, derive_seed(forward_seed, {0}),
                want_grads ? &priv_cache : nullptr);
  if (!all_finite(z.z)) {
    // diverged parameters; report a non-finite loss so the trainer aborts
    const double nan = std::nan("");
    return {nan, nan, nan};
  }
  const Matrix yhat = forward(model.shared, z.z, Mode::kTrain, derive_seed(forward_seed, {1}),
                              want_grads ? &shared_cache : nullptr);

  LossBreakdown out;
  out.ce = ce_loss(yhat, yb);
  double mmd_sum = 0.0;
  Matrix dz_mmd;
  const bool mmd_grad = want_grads && cfg.beta != 0.0;
  if (mmd_grad) dz_mmd = Matrix(z.z.rows, z.z.cols, 0.0);
  for (const LatentBatch& ref : refs) {
    if (mmd_grad) {
      Matrix g;
      mmd_sum += mmd2_value_grad1(z, ref, cfg.kernel, g);
      for (std::size_t i = 0; i < dz_mmd.data.size(); ++i) dz_mmd.data[i] += g.data[i];
    } else {
      mmd_sum += mmd2_biased(z, ref, cfg.kernel);
    }
  }
  out.mmd = mmd_sum / static_cast<double>(refs.size());
  out.total = cfg.alpha * out.ce + cfg.beta * out.mmd;

  if (!want_grads) return out;

  Matrix dyhat = ce_backward(yhat, yb);
  if (cfg.alpha != 1.0) {
    for (double& v : dyhat.data) v *= cfg.alpha;
  }
  auto [sg, dz] = backward(model.shared, shared_cache, dyhat);
  if (mmd_grad) {
    const double scale = cfg.beta / static_cast<double>(refs.size());
    for (std::size_t i = 0; i < dz.data.size(); ++i) dz.data[i] += scale * dz_mmd.data[i];
  }
  auto [pg, dx] = backward(priv, priv_cache, dz);
  if (shared_grads) *shared_grads = std::move(sg);
  if (private_grads) *private_grads = std::move(pg);
  return out;
}

namespace detail {

// One phase of one cycle: train the active domain's private network and
// the shared network on a fresh subset, against frozen reference latents
// from every other domain. Returns false on a non-finite loss.
inline bool run_phase(HeteroModel& model, const std::vector<DomainSplits>& domains,
                      const std::vector<std::vector<int>>& cycle_subsets, int cycle, int domain_id,
                      const TrainConfig& cfg, TrainHistory& history) {
  const std::uint64_t c = static_cast<std::uint64_t>(cycle);
  const std::uint64_t d = static_cast<std::uint64_t>(domain_id);

  std::vector<LatentBatch> refs;
  refs.reserve(domains.size() - 1);
  Matrix ref_x;
  std::vector<int> ref_y;
  for (std::size_t j = 0; j < domains.size(); ++j) {
    if (static_cast<int>(j) == domain_id) continue;
    const auto& rows = cycle_subsets[j];
    gather_batch(domains[j].train, rows, 0, static_cast<int>(rows.size()), ref_x, ref_y);
    refs.push_back(latent_eval(model, static_cast<int>(j), ref_x));
  }

  std::vector<int> subset = cycle_subsets[static_cast<std::size_t>(domain_id)];
  Matrix xb;
  std::vector<int> yb;
  for (int epoch = 0; epoch < cfg.epochs_per_phase; ++epoch) {
    Rng shuffle_rng(derive_seed(cfg.seed, {seed_tags::kEpochShuffle, c, d,
                                           static_cast<std::uint64_t>(epoch)}));
    shuffle_rng.shuffle(subset);
    double ce_sum = 0.0;
    double mmd_sum = 0.0;
    int batches = 0;
    for (int begin = 0; begin < static_cast<int>(subset.size()); begin += cfg.batch_size) {
      const int end = std::min<int>(begin + cfg.batch_size, static_cast<int>(subset.size()));
      gather_batch(domains[static_cast<std::size_t>(domain_id)].train, subset, begin, end, xb, yb);
      MlpGrads pg, sg;
      const std::uint64_t fwd = derive_seed(
          cfg.seed, {seed_tags::kForward, c, d, static_cast<std::uint64_t>(epoch),
                     static_cast<std::uint64_t>(begin)});
      const LossBreakdown lb =
          hetero_loss_backward(model, domain_id, xb, yb, refs, cfg, fwd, &pg, &sg);
      if (!std::isfinite(lb.total)) {
        history.aborted = true;
        history.abort_cycle = cycle;
        history.abort_reason = "non-finite loss in cycle " + std::to_string(cycle) + ", domain " +
                               std::to_string(domain_id) + ", epoch " + std::to_string(epoch);
        return false;
      }
      adam_step(model.privates[static_cast<std::size_t>(domain_id)], pg,
                model.private_opt[static_cast<std::size_t>(domain_id)]);
      adam_step(model.shared, sg, model.shared_opt);
      ce_sum += lb.ce;
      mmd_sum += lb.mmd;
      ++batches;
    }
    const double mean_ce = ce_sum / batches;
    const double mean_mmd = mmd_sum / batches;
    history.epochs.push_back(
        {cycle, domain_id, epoch,
         {mean_ce, mean_mmd, cfg.alpha * mean_ce + cfg.beta * mean_mmd}});
  }
  return true;
}

inline std::vector<double> validation_accuracies(const HeteroModel& model,
                                                 const std::vector<DomainSplits>& domains) {
  std::vector<double> accs;
  accs.reserve(domains.size());
  for (std::size_t i = 0; i < domains.size(); ++i) {
    const auto preds = predict(model, static_cast<int>(i), domains[i].val.features);
    accs.push_back(accuracy_of(preds, domains[i].val.labels));
  }
  return accs;
}

}  // namespace detail

// Sequential cyclic training: each cycle draws a fresh subset per domain
// and walks the domains in a fixed order, updating only the active
// private network and the shared network while the other domains provide
// frozen reference latents for the alignment term. The parameters with
// the best mean validation accuracy are restored into the model before
// returning. A non-finite loss aborts the run with a diagnostic record
// in the history instead of training on.
inline TrainHistory train_cyclic(HeteroModel& model, const std::vector<DomainSplits>& domains,
                                 const TrainConfig& cfg) {
  validate_train_config(cfg);
  if (domains.size() < 2) throw std::invalid_argument("train_cyclic: need at least 2 domains");
  if (static_cast<int>(domains.size()) != model.num_domains())
    throw std::invalid_argument("train_cyclic: domain count does not match model");
  for (std::size_t i = 0; i < domains.size(); ++i) {
    if (domains[i].train.size() < 1 || domains[i].val.size() < 1)
      throw std::invalid_argument("train_cyclic: empty domain " + std::to_string(i));
    if (domains[i].train.dim() != model.privates[i].input_dim())
      throw std::invalid_argument("train_cyclic: dimension mismatch for domain " + std::to_string(i));
  }

  std::vector<int> order(domains.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  if (cfg.phase_order == PhaseOrder::kDescending) std::reverse(order.begin(), order.end());

  TrainHistory history;
  detail::ModelSnapshot best = detail::snapshot(model);
  double best_acc = -1.0;

  for (int cycle = 0; cycle < cfg.max_cycles; ++cycle) {
    std::vector<std::vector<int>> cycle_subsets(domains.size());
    for (std::size_t i = 0; i < domains.size(); ++i) {
      const int n = domains[i].train.size();
      const int take = std::min(cfg.cycle_subset_size, n);
      Rng rng(derive_seed(cfg.seed, {seed_tags::kCycleSubset, static_cast<std::uint64_t>(cycle),
                                     static_cast<std::uint64_t>(i)}));
      cycle_subsets[i] = sample_without_replacement(n, take, rng);
    }
    for (int domain_id : order) {
      if (!detail::run_phase(model, domains, cycle_subsets, cycle, domain_id, cfg, history)) {
        detail::restore(model, best);
        return history;
      }
    }
    const bool last = cycle == cfg.max_cycles - 1;
    if ((cycle + 1) % cfg.eval_every == 0 || last) {
      EvalRecord rec;
      rec.cycle = cycle;
      rec.val_accuracy = detail::validation_accuracies(model, domains);
      double sum = 0.0;
      for (double a : rec.val_accuracy) sum += a;
      rec.mean_accuracy = sum / static_cast<double>(rec.val_accuracy.size());
      history.evals.push_back(rec);
      if (rec.mean_accuracy > best_acc) {
        best_acc = rec.mean_accuracy;
        best = detail::snapshot(model);
        history.best_eval = static_cast<int>(history.evals.size()) - 1;
      }
      if (cfg.early_stop.enabled && rec.mean_accuracy >= cfg.early_stop.target_accuracy) break;
    }
  }
  detail::restore(model, best);
  return history;
}

// Plain cross-entropy trainer over one network. The minibatch schedule
// is either derived from the seed (shuffled chunks per epoch) or passed
// in explicitly as row-index batches.
struct FitCeOptions {
  int epochs = 50;
  int batch_size = 128;
  std::uint64_t seed = 1;
  int eval_every = 1;  // epochs between validation passes
  const std::vector<std::vector<std::vector<int>>>* explicit_epochs = nullptr;
};

inline TrainHistory fit_ce(MlpParams& net, AdamState& opt, const DomainDataset& train,
                           const DomainDataset* val, const FitCeOptions& options) {
  if (train.size() < 1) throw std::invalid_argument("fit_ce: empty training data");
  if (train.dim() != net.input_dim()) throw std::invalid_argument("fit_ce: dimension mismatch");
  const int epochs = options.explicit_epochs
                         ? static_cast<int>(options.explicit_epochs->size())
                         : options.epochs;

  TrainHistory history;
  detail::ModelSnapshot best{{}, net};
  double best_acc = -1.0;

  std::vector<int> all_rows(static_cast<std::size_t>(train.size()));
  for (int i = 0; i < train.size(); ++i) all_rows[static_cast<std::size_t>(i)] = i;

  Matrix xb;
  std::vector<int> yb;
  for (int epoch = 0; epoch < epochs; ++epoch) {
    std::vector<std::vector<int>> batches;
    if (options.explicit_epochs) {
      batches = (*options.explicit_epochs)[static_cast<std::size_t>(epoch)];
    } else {
      Rng rng(derive_seed(options.seed, {seed_tags::kFitShuffle, static_cast<std::uint64_t>(epoch)}));
      rng.shuffle(all_rows);
      for (int begin = 0; begin < train.size(); begin += options.batch_size) {
        const int end = std::min(begin + options.batch_size, train.size());
        batches.emplace_back(all_rows.begin() + begin, all_rows.begin() + end);
      }
    }
    double ce_sum = 0.0;
    int count = 0;
    for (const std::vector<int>& batch : batches) {
      detail::gather_batch(train, batch, 0, static_cast<int>(batch.size()), xb, yb);
      ForwardCache cache;
      const std::uint64_t fwd = derive_seed(
          options.seed,
          {seed_tags::kFitForward, static_cast<std::uint64_t>(epoch), static_cast<std::uint64_t>(count)});
      const Matrix yhat = forward(net, xb, Mode::kTrain, fwd, &cache);
      const double ce = ce_loss(yhat, yb);
      if (!std::isfinite(ce)) {
        history.aborted = true;
        history.abort_cycle = epoch;
        history.abort_reason = "non-finite loss in epoch " + std::to_string(epoch);
        net = best.shared;
        return history;
      }
      auto [grads, dx] = backward(net, cache, ce_backward(yhat, yb));
      adam_step(net, grads, opt);
      ce_sum += ce;
      ++count;
    }
    const double mean_ce = ce_sum / std::max(count, 1);
    history.epochs.push_back({epoch, 0, 0, {mean_ce, 0.0, mean_ce}});

    const bool last = epoch == epochs - 1;
    if (val && ((epoch + 1) % options.eval_every == 0 || last)) {
      EvalRecord rec;
      rec.cycle = epoch;
      rec.val_accuracy = {accuracy_of(predict(net, val->features), val->labels)};
      rec.mean_accuracy = rec.val_accuracy[0];
      history.evals.push_back(rec);
      if (rec.mean_accuracy > best_acc) {
        best_acc = rec.mean_accuracy;
        best.shared = net;
        history.best_eval = static_cast<int>(history.evals.size()) - 1;
      }
    }
  }
  if (val && history.best_eval >= 0) net = best.shared;
  return history;
}

// Standalone per-domain classifier: [d -> 64 -> 32 -> 16 -> 1] with
// batchnorm, relu and dropout on the hidden layers and a sigmoid head,
// trained with plain cross-entropy. The best-validation-accuracy
// parameters are returned.
inline std::pair<MlpParams, TrainHistory> train_baseline(const DomainDataset& train,
                                                         const DomainDataset& val,
                                                         const TrainConfig& cfg) {
  validate_train_config(cfg);
  MlpParams net = init_mlp(baseline_specs(train.dim(), cfg),
                           derive_seed(cfg.seed, {seed_tags::kBaselineInit}));
  if (cfg.baseline_epochs == 0) return {std::move(net), TrainHistory{}};
  AdamState opt = make_adam_state(net, cfg.adam);
  FitCeOptions options;
  options.epochs = cfg.baseline_epochs;
  options.batch_size = cfg.batch_size;
  options.seed = derive_seed(cfg.seed, {seed_tags::kBaselineRun});
  TrainHistory history = fit_ce(net, opt, train, &val, options);
  return {std::move(net), std::move(history)};
}

// History exports: per-epoch loss breakdown and the per-cycle alignment
// trace, both as plain CSV.
inline void write_history_csv(const TrainHistory& history, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "cycle,domain,epoch,ce,mmd,total\n";
  char buf[160];
  for (const EpochRecord& r : history.epochs) {
    std::snprintf(buf, sizeof(buf), "%d,%d,%d,%.17g,%.17g,%.17g\n", r.cycle, r.domain, r.epoch,
                  r.loss.ce, r.loss.mmd, r.loss.total);
    out << buf;
  }
}

inline void write_mmd_trace_csv(const TrainHistory& history, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "cycle,mean_mmd\n";
  char buf[80];
  for (const auto& [cycle, mmd] : history.mmd_trace()) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g\n", cycle, mmd);
    out << buf;
  }
}

}  // namespace hetnids
