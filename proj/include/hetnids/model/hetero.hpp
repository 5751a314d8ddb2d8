#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "hetnids/adapt/mmd.hpp"
#include "hetnids/model/config.hpp"
#include "hetnids/nn/adam.hpp"
#include "hetnids/nn/layers.hpp"

namespace hetnids {

// One private projection network per domain plus the shared classifier,
// each with its own optimizer state.
struct HeteroModel {
  int latent_dim = 0;
  std::vector<MlpParams> privates;
  MlpParams shared;
  std::vector<AdamState> private_opt;
  AdamState shared_opt;
  std::vector<std::uint64_t> seed_lineage;  // model seed, per-network init seeds

  int num_domains() const { return static_cast<int>(privates.size()); }
};

inline std::vector<LayerSpec> private_specs(int input_dim, const TrainConfig& cfg) {
  return {LayerSpec::linear(input_dim, cfg.private_hidden), LayerSpec::batchnorm(cfg.private_hidden),
          LayerSpec::relu(cfg.private_hidden), LayerSpec::linear(cfg.private_hidden, cfg.latent_dim)};
}

inline std::vector<LayerSpec> shared_specs(const TrainConfig& cfg) {
  return {LayerSpec::linear(cfg.latent_dim, cfg.shared_hidden), LayerSpec::relu(cfg.shared_hidden),
          LayerSpec::linear(cfg.shared_hidden, 1), LayerSpec::sigmoid(1)};
}

inline std::vector<LayerSpec> baseline_specs(int input_dim, const TrainConfig& cfg) {
  const double p = cfg.baseline_dropout;
  return {LayerSpec::linear(input_dim, 64), LayerSpec::batchnorm(64), LayerSpec::relu(64),
          LayerSpec::dropout(64, p),        LayerSpec::linear(64, 32), LayerSpec::batchnorm(32),
          LayerSpec::relu(32),              LayerSpec::dropout(32, p), LayerSpec::linear(32, 16),
          LayerSpec::batchnorm(16),         LayerSpec::relu(16),       LayerSpec::dropout(16, p),
          LayerSpec::linear(16, 1),         LayerSpec::sigmoid(1)};
}

// Builds the model for the given per-domain input dimensions. Each
// network gets an independent seeded initialization derived from the
// config seed.
inline HeteroModel build_model(const std::vector<int>& domain_dims, const TrainConfig& cfg) {
  validate_train_config(cfg);
  if (domain_dims.empty()) throw std::invalid_argument("build_model: no domains");
  for (int d : domain_dims) {
    if (d < 1) throw std::invalid_argument("build_model: domain input dims must be >= 1");
  }
  HeteroModel model;
  model.latent_dim = cfg.latent_dim;
  model.seed_lineage.push_back(cfg.seed);
  for (std::size_t i = 0; i < domain_dims.size(); ++i) {
    const std::uint64_t s =
        derive_seed(cfg.seed, {seed_tags::kPrivateInit, static_cast<std::uint64_t>(i)});
    model.privates.push_back(init_mlp(private_specs(domain_dims[i], cfg), s));
    model.private_opt.push_back(make_adam_state(model.privates.back(), cfg.adam));
    model.seed_lineage.push_back(s);
  }
  const std::uint64_t s = derive_seed(cfg.seed, {seed_tags::kSharedInit});
  model.shared = init_mlp(shared_specs(cfg), s);
  model.shared_opt = make_adam_state(model.shared, cfg.adam);
  model.seed_lineage.push_back(s);
  return model;
}

inline void check_domain_id(const HeteroModel& model, int domain_id) {
  if (domain_id < 0 || domain_id >= model.num_domains())
    throw std::invalid_argument("unknown domain id " + std::to_string(domain_id));
}

struct DomainForward {
  LatentBatch z;
  Matrix yhat;  // batch x 1, entries in (0, 1)
};

// Projects a batch through the domain's private network and classifies
// the latents with the shared network. Eval mode is deterministic.
inline DomainForward forward_domain(HeteroModel& model, int domain_id, const Matrix& x, Mode mode,
                                    std::uint64_t seed) {
  check_domain_id(model, domain_id);
  DomainForward out;
  out.z.domain_id = domain_id;
  if (mode == Mode::kEval) {
    out.z.z = forward_eval(model.privates[static_cast<std::size_t>(domain_id)], x);
    out.yhat = forward_eval(model.shared, out.z.z);
  } else {
    out.z.z = forward(model.privates[static_cast<std::size_t>(domain_id)], x, mode,
                      derive_seed(seed, {0}));
    out.yhat = forward(model.shared, out.z.z, mode, derive_seed(seed, {1}));
  }
  return out;
}

// Eval-mode latents only (used for frozen reference batches).
inline LatentBatch latent_eval(const HeteroModel& model, int domain_id, const Matrix& x) {
  check_domain_id(model, domain_id);
  LatentBatch z;
  z.domain_id = domain_id;
  z.z = forward_eval(model.privates[static_cast<std::size_t>(domain_id)], x);
  return z;
}

// Thresholded predictions; the 0.5 boundary goes to the positive class.
inline std::vector<int> predict_scores(const Matrix& yhat) {
  std::vector<int> out(static_cast<std::size_t>(yhat.rows));
  for (int i = 0; i < yhat.rows; ++i) out[static_cast<std::size_t>(i)] = yhat.at(i, 0) >= 0.5 ? 1 : 0;
  return out;
}

inline std::vector<int> predict(const HeteroModel& model, int domain_id, const Matrix& x) {
  check_domain_id(model, domain_id);
  const Matrix z = forward_eval(model.privates[static_cast<std::size_t>(domain_id)], x);
  return predict_scores(forward_eval(model.shared, z));
}

inline std::vector<int> predict(const MlpParams& net, const Matrix& x) {
  return predict_scores(forward_eval(net, x));
}

}  // namespace hetnids
