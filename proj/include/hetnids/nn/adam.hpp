#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "hetnids/nn/layers.hpp"

namespace hetnids {

struct AdamHyper {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// First/second moment buffers share the LayerGrads layout so the update
// loop can walk parameters and moments in lockstep.
struct AdamState {
  AdamHyper hyper;
  long long t = 0;
  std::vector<LayerGrads> m;
  std::vector<LayerGrads> v;
};

namespace detail {

inline LayerGrads zeros_like_layer(const Layer& layer) {
  LayerGrads g;
  if (layer.spec.kind == LayerKind::kLinear) {
    g.d_weight = Matrix(layer.weight.rows, layer.weight.cols, 0.0);
    g.d_bias = Matrix(1, layer.bias.cols, 0.0);
  } else if (layer.spec.kind == LayerKind::kBatchNorm) {
    g.d_gamma = Matrix(1, layer.gamma.cols, 0.0);
    g.d_beta = Matrix(1, layer.beta.cols, 0.0);
  }
  return g;
}

inline void adam_update_tensor(Matrix& param, const Matrix& grad, Matrix& m, Matrix& v,
                               const AdamHyper& h, double bc1, double bc2) {
  if (!param.same_shape(grad)) throw std::invalid_argument("adam_step: gradient shape mismatch");
  for (std::size_t i = 0; i < param.data.size(); ++i) {
    const double g = grad.data[i];
    m.data[i] = h.beta1 * m.data[i] + (1.0 - h.beta1) * g;
    v.data[i] = h.beta2 * v.data[i] + (1.0 - h.beta2) * g * g;
    const double mhat = m.data[i] / bc1;
    const double vhat = v.data[i] / bc2;
    param.data[i] -= h.lr * mhat / (std::sqrt(vhat) + h.eps);
  }
}

}  // namespace detail

inline AdamState make_adam_state(const MlpParams& net, const AdamHyper& hyper = {}) {
  AdamState st;
  st.hyper = hyper;
  st.m.reserve(net.layers.size());
  st.v.reserve(net.layers.size());
  for (const Layer& layer : net.layers) {
    st.m.push_back(detail::zeros_like_layer(layer));
    st.v.push_back(detail::zeros_like_layer(layer));
  }
  return st;
}

// Standard bias-corrected Adam; the step counter advances exactly once
// per call.
inline void adam_step(MlpParams& net, const MlpGrads& grads, AdamState& st) {
  if (grads.layers.size() != net.layers.size() || st.m.size() != net.layers.size())
    throw std::invalid_argument("adam_step: state/gradient layout mismatch");
  st.t += 1;
  const double bc1 = 1.0 - std::pow(st.hyper.beta1, static_cast<double>(st.t));
  const double bc2 = 1.0 - std::pow(st.hyper.beta2, static_cast<double>(st.t));
  for (std::size_t li = 0; li < net.layers.size(); ++li) {
    Layer& layer = net.layers[li];
    const LayerGrads& g = grads.layers[li];
    LayerGrads& m = st.m[li];
    LayerGrads& v = st.v[li];
    if (layer.spec.kind == LayerKind::kLinear) {
      detail::adam_update_tensor(layer.weight, g.d_weight, m.d_weight, v.d_weight, st.hyper, bc1, bc2);
      detail::adam_update_tensor(layer.bias, g.d_bias, m.d_bias, v.d_bias, st.hyper, bc1, bc2);
    } else if (layer.spec.kind == LayerKind::kBatchNorm) {
      detail::adam_update_tensor(layer.gamma, g.d_gamma, m.d_gamma, v.d_gamma, st.hyper, bc1, bc2);
      detail::adam_update_tensor(layer.beta, g.d_beta, m.d_beta, v.d_beta, st.hyper, bc1, bc2);
    }
  }
}

}  // namespace hetnids
