#pragma once

#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "hetnids/nn/adam.hpp"
#include "hetnids/nn/layers.hpp"

namespace hetnids {

// Self-describing single-file network checkpoint: layer specs, all
// parameters, optional optimizer state and the seed lineage that
// produced the network. JSON keeps doubles at shortest-round-trip
// precision, so save/load is bit-exact.
inline constexpr const char* kCheckpointFormat = "hetnids-checkpoint";
inline constexpr int kCheckpointVersion = 1;

namespace detail {

inline nlohmann::json matrix_to_json(const Matrix& m) {
  return nlohmann::json{{"rows", m.rows}, {"cols", m.cols}, {"data", m.data}};
}

inline Matrix matrix_from_json(const nlohmann::json& j) {
  Matrix m(j.at("rows").get<int>(), j.at("cols").get<int>());
  m.data = j.at("data").get<std::vector<double>>();
  if (m.data.size() != static_cast<std::size_t>(m.rows) * static_cast<std::size_t>(m.cols))
    throw std::runtime_error("checkpoint: matrix payload size mismatch");
  return m;
}

inline LayerKind layer_kind_from_name(const std::string& name) {
  if (name == "linear") return LayerKind::kLinear;
  if (name == "relu") return LayerKind::kRelu;
  if (name == "batchnorm") return LayerKind::kBatchNorm;
  if (name == "dropout") return LayerKind::kDropout;
  if (name == "sigmoid") return LayerKind::kSigmoid;
  throw std::runtime_error("checkpoint: unknown layer kind '" + name + "'");
}

inline nlohmann::json grads_block_to_json(const std::vector<LayerGrads>& buffers) {
  nlohmann::json arr = nlohmann::json::array();
  for (const LayerGrads& g : buffers) {
    nlohmann::json j;
    if (!g.d_weight.empty()) j["weight"] = matrix_to_json(g.d_weight);
    if (!g.d_bias.empty()) j["bias"] = matrix_to_json(g.d_bias);
    if (!g.d_gamma.empty()) j["gamma"] = matrix_to_json(g.d_gamma);
    if (!g.d_beta.empty()) j["beta"] = matrix_to_json(g.d_beta);
    arr.push_back(std::move(j));
  }
  return arr;
}

inline std::vector<LayerGrads> grads_block_from_json(const nlohmann::json& arr) {
  std::vector<LayerGrads> out;
  for (const auto& j : arr) {
    LayerGrads g;
    if (j.contains("weight")) g.d_weight = matrix_from_json(j.at("weight"));
    if (j.contains("bias")) g.d_bias = matrix_from_json(j.at("bias"));
    if (j.contains("gamma")) g.d_gamma = matrix_from_json(j.at("gamma"));
    if (j.contains("beta")) g.d_beta = matrix_from_json(j.at("beta"));
    out.push_back(std::move(g));
  }
  return out;
}

}  // namespace detail

inline nlohmann::json checkpoint_to_json(const MlpParams& net, const AdamState* opt,
                                         const std::vector<std::uint64_t>& seed_lineage) {
  nlohmann::json j;
  j["format"] = kCheckpointFormat;
  j["version"] = kCheckpointVersion;
  j["seed_lineage"] = seed_lineage;
  nlohmann::json layers = nlohmann::json::array();
  for (const Layer& layer : net.layers) {
    nlohmann::json lj;
    lj["kind"] = layer_kind_name(layer.spec.kind);
    lj["in_dim"] = layer.spec.in_dim;
    lj["out_dim"] = layer.spec.out_dim;
    switch (layer.spec.kind) {
      case LayerKind::kLinear:
        lj["weight"] = detail::matrix_to_json(layer.weight);
        lj["bias"] = detail::matrix_to_json(layer.bias);
        break;
      case LayerKind::kBatchNorm:
        lj["momentum"] = layer.spec.bn_momentum;
        lj["eps"] = layer.spec.bn_eps;
        lj["gamma"] = detail::matrix_to_json(layer.gamma);
        lj["beta"] = detail::matrix_to_json(layer.beta);
        lj["running_mean"] = detail::matrix_to_json(layer.running_mean);
        lj["running_var"] = detail::matrix_to_json(layer.running_var);
        break;
      case LayerKind::kDropout:
        lj["p"] = layer.spec.dropout_p;
        break;
      default:
        break;
    }
    layers.push_back(std::move(lj));
  }
  j["layers"] = std::move(layers);
  if (opt) {
    j["optimizer"] = {{"type", "adam"},
                      {"lr", opt->hyper.lr},
                      {"beta1", opt->hyper.beta1},
                      {"beta2", opt->hyper.beta2},
                      {"eps", opt->hyper.eps},
                      {"t", opt->t},
                      {"m", detail::grads_block_to_json(opt->m)},
                      {"v", detail::grads_block_to_json(opt->v)}};
  }
  return j;
}

inline std::pair<MlpParams, AdamState> checkpoint_from_json(const nlohmann::json& j) {
  if (j.at("format").get<std::string>() != kCheckpointFormat)
    throw std::runtime_error("checkpoint: unrecognized format field");
  if (j.at("version").get<int>() != kCheckpointVersion)
    throw std::runtime_error("checkpoint: unsupported version");
  MlpParams net;
  for (const auto& lj : j.at("layers")) {
    Layer layer;
    layer.spec.kind = detail::layer_kind_from_name(lj.at("kind").get<std::string>());
    layer.spec.in_dim = lj.at("in_dim").get<int>();
    layer.spec.out_dim = lj.at("out_dim").get<int>();
    switch (layer.spec.kind) {
      case LayerKind::kLinear:
        layer.weight = detail::matrix_from_json(lj.at("weight"));
        layer.bias = detail::matrix_from_json(lj.at("bias"));
        break;
      case LayerKind::kBatchNorm:
        layer.spec.bn_momentum = lj.at("momentum").get<double>();
        layer.spec.bn_eps = lj.at("eps").get<double>();
        layer.gamma = detail::matrix_from_json(lj.at("gamma"));
        layer.beta = detail::matrix_from_json(lj.at("beta"));
        layer.running_mean = detail::matrix_from_json(lj.at("running_mean"));
        layer.running_var = detail::matrix_from_json(lj.at("running_var"));
        break;
      case LayerKind::kDropout:
        layer.spec.dropout_p = lj.at("p").get<double>();
        break;
      default:
        break;
    }
    net.layers.push_back(std::move(layer));
  }
  AdamState st;
  if (j.contains("optimizer")) {
    const auto& oj = j.at("optimizer");
    st.hyper = {oj.at("lr").get<double>(), oj.at("beta1").get<double>(),
                oj.at("beta2").get<double>(), oj.at("eps").get<double>()};
    st.t = oj.at("t").get<long long>();
    st.m = detail::grads_block_from_json(oj.at("m"));
    st.v = detail::grads_block_from_json(oj.at("v"));
  } else {
    st = make_adam_state(net);
  }
  return {std::move(net), std::move(st)};
}

inline void save_checkpoint(const std::string& path, const MlpParams& net,
                            const AdamState* opt = nullptr,
                            const std::vector<std::uint64_t>& seed_lineage = {}) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path);
  out << checkpoint_to_json(net, opt, seed_lineage).dump(1) << "\n";
}

inline std::pair<MlpParams, AdamState> load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read checkpoint " + path);
  nlohmann::json j;
  in >> j;
  return checkpoint_from_json(j);
}

}  // namespace hetnids
