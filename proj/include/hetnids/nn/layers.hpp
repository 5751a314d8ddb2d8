#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "hetnids/matrix.hpp"
#include "hetnids/rng.hpp"

namespace hetnids {

enum class LayerKind { kLinear, kRelu, kBatchNorm, kDropout, kSigmoid };

struct LayerSpec {
  LayerKind kind = LayerKind::kLinear;
  int in_dim = 0;
  int out_dim = 0;
  double dropout_p = 0.2;
  double bn_momentum = 0.9;
  double bn_eps = 1e-5;

  static LayerSpec linear(int in, int out) { return {LayerKind::kLinear, in, out, 0.0, 0.0, 0.0}; }
  static LayerSpec relu(int dim) { return {LayerKind::kRelu, dim, dim, 0.0, 0.0, 0.0}; }
  static LayerSpec batchnorm(int dim, double momentum = 0.9, double eps = 1e-5) {
    return {LayerKind::kBatchNorm, dim, dim, 0.0, momentum, eps};
  }
  static LayerSpec dropout(int dim, double p = 0.2) { return {LayerKind::kDropout, dim, dim, p, 0.0, 0.0}; }
  static LayerSpec sigmoid(int dim) { return {LayerKind::kSigmoid, dim, dim, 0.0, 0.0, 0.0}; }
};

inline const char* layer_kind_name(LayerKind k) {
  switch (k) {
    case LayerKind::kLinear: return "linear";
    case LayerKind::kRelu: return "relu";
    case LayerKind::kBatchNorm: return "batchnorm";
    case LayerKind::kDropout: return "dropout";
    case LayerKind::kSigmoid: return "sigmoid";
  }
  return "?";
}

// One layer with its parameters. Non-parametric layers leave the
// matrices empty.
struct Layer {
  LayerSpec spec;
  Matrix weight;        // linear: in_dim x out_dim
  Matrix bias;          // linear: 1 x out_dim
  Matrix gamma;         // batchnorm: 1 x dim
  Matrix beta;          // batchnorm: 1 x dim
  Matrix running_mean;  // batchnorm: 1 x dim
  Matrix running_var;   // batchnorm: 1 x dim
};

struct MlpParams {
  std::vector<Layer> layers;

  int input_dim() const { return layers.empty() ? 0 : layers.front().spec.in_dim; }
  int output_dim() const { return layers.empty() ? 0 : layers.back().spec.out_dim; }
};

enum class Mode { kTrain, kEval };

struct LayerCache {
  Matrix input;              // linear, relu
  Matrix output;             // sigmoid
  Matrix mask;               // dropout (already scaled by 1/(1-p))
  Matrix xhat;               // batchnorm normalized activations
  std::vector<double> inv_std;  // batchnorm 1/sqrt(var+eps) per feature
};

struct ForwardCache {
  Mode mode = Mode::kTrain;
  std::vector<LayerCache> layers;
};

// Gradient (or moment) buffers shaped exactly like a layer's parameters.
struct LayerGrads {
  Matrix d_weight;
  Matrix d_bias;
  Matrix d_gamma;
  Matrix d_beta;
};

struct MlpGrads {
  std::vector<LayerGrads> layers;
};

inline void validate_specs(const std::vector<LayerSpec>& specs) {
  if (specs.empty()) throw std::invalid_argument("init_mlp: empty layer list");
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const LayerSpec& s = specs[i];
    if (s.in_dim < 1 || s.out_dim < 1) throw std::invalid_argument("init_mlp: layer dims must be >= 1");
    if (s.kind != LayerKind::kLinear && s.in_dim != s.out_dim)
      throw std::invalid_argument("init_mlp: non-linear layers preserve width");
    if (s.kind == LayerKind::kDropout && (s.dropout_p < 0.0 || s.dropout_p >= 1.0))
      throw std::invalid_argument("init_mlp: dropout_p must be in [0,1)");
    if (i > 0 && specs[i - 1].out_dim != s.in_dim)
      throw std::invalid_argument("init_mlp: layer dims do not chain at layer " + std::to_string(i));
  }
}

// He-normal weights (std = sqrt(2/in_dim)), zero biases; batchnorm starts
// at identity with running mean 0 / var 1. Fully determined by the seed.
inline MlpParams init_mlp(const std::vector<LayerSpec>& specs, std::uint64_t seed) {
  validate_specs(specs);
  Rng rng(seed);
  MlpParams net;
  net.layers.reserve(specs.size());
  for (const LayerSpec& s : specs) {
    Layer layer;
    layer.spec = s;
    if (s.kind == LayerKind::kLinear) {
      layer.weight = Matrix(s.in_dim, s.out_dim);
      const double std_dev = std::sqrt(2.0 / static_cast<double>(s.in_dim));
      for (double& w : layer.weight.data) w = std_dev * rng.normal();
      layer.bias = Matrix(1, s.out_dim, 0.0);
    } else if (s.kind == LayerKind::kBatchNorm) {
      layer.gamma = Matrix(1, s.out_dim, 1.0);
      layer.beta = Matrix(1, s.out_dim, 0.0);
      layer.running_mean = Matrix(1, s.out_dim, 0.0);
      layer.running_var = Matrix(1, s.out_dim, 1.0);
    }
    net.layers.push_back(std::move(layer));
  }
  return net;
}

namespace detail {

inline Matrix linear_forward(const Layer& layer, const Matrix& x) {
  Matrix y = matmul(x, layer.weight);
  for (int i = 0; i < y.rows; ++i) {
    double* yrow = y.row(i);
    for (int j = 0; j < y.cols; ++j) yrow[j] += layer.bias.data[static_cast<std::size_t>(j)];
  }
  return y;
}

inline double stable_sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace detail

// Forward pass. Train mode uses batch statistics for batchnorm (and
// updates the running estimates on `net`) and draws inverted-dropout
// masks from `seed`; eval mode is a pure deterministic function of the
// parameters. Pass `cache` to enable a later backward().
inline Matrix forward(MlpParams& net, const Matrix& x, Mode mode, std::uint64_t seed,
                      ForwardCache* cache = nullptr) {
  if (net.layers.empty()) throw std::invalid_argument("forward: empty network");
  require_shape(x.cols == net.input_dim(), "forward input dim");
  if (x.rows < 1) throw std::invalid_argument("forward: empty batch");
  if (!all_finite(x)) throw std::invalid_argument("forward: non-finite input");

  if (cache) {
    cache->mode = mode;
    cache->layers.assign(net.layers.size(), LayerCache{});
  }
  Rng rng(seed);
  Matrix cur = x;
  for (std::size_t li = 0; li < net.layers.size(); ++li) {
    Layer& layer = net.layers[li];
    LayerCache* lc = cache ? &cache->layers[li] : nullptr;
    switch (layer.spec.kind) {
      case LayerKind::kLinear: {
        if (lc) lc->input = cur;
        cur = detail::linear_forward(layer, cur);
        break;
      }
      case LayerKind::kRelu: {
        if (lc) lc->input = cur;
        for (double& v : cur.data) v = v > 0.0 ? v : 0.0;
        break;
      }
      case LayerKind::kSigmoid: {
        for (double& v : cur.data) v = detail::stable_sigmoid(v);
        if (lc) lc->output = cur;
        break;
      }
      case LayerKind::kDropout: {
        if (mode == Mode::kTrain) {
          const double p = layer.spec.dropout_p;
          const double scale = 1.0 / (1.0 - p);
          Matrix mask(cur.rows, cur.cols);
          for (double& m : mask.data) m = rng.uniform() < p ? 0.0 : scale;
          for (std::size_t i = 0; i < cur.data.size(); ++i) cur.data[i] *= mask.data[i];
          if (lc) lc->mask = std::move(mask);
        }
        break;
      }
      case LayerKind::kBatchNorm: {
        const int dim = layer.spec.out_dim;
        const int batch = cur.rows;
        if (mode == Mode::kTrain) {
          Matrix xhat(batch, dim);
          std::vector<double> inv_std(static_cast<std::size_t>(dim));
          for (int j = 0; j < dim; ++j) {
            double mean = 0.0;
            for (int i = 0; i < batch; ++i) mean += cur.at(i, j);
            mean /= batch;
            double var = 0.0;
            for (int i = 0; i < batch; ++i) {
              const double d = cur.at(i, j) - mean;
              var += d * d;
            }
            var /= batch;
            const double inv = 1.0 / std::sqrt(var + layer.spec.bn_eps);
            inv_std[static_cast<std::size_t>(j)] = inv;
            const double g = layer.gamma.data[static_cast<std::size_t>(j)];
            const double b = layer.beta.data[static_cast<std::size_t>(j)];
            for (int i = 0; i < batch; ++i) {
              const double xh = (cur.at(i, j) - mean) * inv;
              xhat.at(i, j) = xh;
              cur.at(i, j) = g * xh + b;
            }
            const double m = layer.spec.bn_momentum;
            layer.running_mean.data[static_cast<std::size_t>(j)] =
                m * layer.running_mean.data[static_cast<std::size_t>(j)] + (1.0 - m) * mean;
            layer.running_var.data[static_cast<std::size_t>(j)] =
                m * layer.running_var.data[static_cast<std::size_t>(j)] + (1.0 - m) * var;
          }
          if (lc) {
            lc->xhat = std::move(xhat);
            lc->inv_std = std::move(inv_std);
          }
        } else {
          for (int j = 0; j < dim; ++j) {
            const double mean = layer.running_mean.data[static_cast<std::size_t>(j)];
            const double inv = 1.0 / std::sqrt(layer.running_var.data[static_cast<std::size_t>(j)] + layer.spec.bn_eps);
            const double g = layer.gamma.data[static_cast<std::size_t>(j)];
            const double b = layer.beta.data[static_cast<std::size_t>(j)];
            for (int i = 0; i < batch; ++i) cur.at(i, j) = g * (cur.at(i, j) - mean) * inv + b;
          }
        }
        break;
      }
    }
  }
  return cur;
}

// Eval-mode forward on a const network: running batchnorm statistics,
// no dropout, no mutation.
inline Matrix forward_eval(const MlpParams& net, const Matrix& x) {
  if (net.layers.empty()) throw std::invalid_argument("forward: empty network");
  require_shape(x.cols == net.input_dim(), "forward input dim");
  if (x.rows < 1) throw std::invalid_argument("forward: empty batch");
  if (!all_finite(x)) throw std::invalid_argument("forward: non-finite input");
  Matrix cur = x;
  for (const Layer& layer : net.layers) {
    switch (layer.spec.kind) {
      case LayerKind::kLinear:
        cur = detail::linear_forward(layer, cur);
        break;
      case LayerKind::kRelu:
        for (double& v : cur.data) v = v > 0.0 ? v : 0.0;
        break;
      case LayerKind::kSigmoid:
        for (double& v : cur.data) v = detail::stable_sigmoid(v);
        break;
      case LayerKind::kDropout:
        break;
      case LayerKind::kBatchNorm: {
        for (int j = 0; j < layer.spec.out_dim; ++j) {
          const double mean = layer.running_mean.data[static_cast<std::size_t>(j)];
          const double inv =
              1.0 / std::sqrt(layer.running_var.data[static_cast<std::size_t>(j)] + layer.spec.bn_eps);
          const double g = layer.gamma.data[static_cast<std::size_t>(j)];
          const double b = layer.beta.data[static_cast<std::size_t>(j)];
          for (int i = 0; i < cur.rows; ++i) cur.at(i, j) = g * (cur.at(i, j) - mean) * inv + b;
        }
        break;
      }
    }
  }
  return cur;
}

// Exact analytic gradients for every layer kind, including the
// batch-statistics terms of batchnorm. Also returns the gradient with
// respect to the input (needed to chain a downstream network into an
// upstream one). Requires a cache recorded in train mode.
inline std::pair<MlpGrads, Matrix> backward(const MlpParams& net, const ForwardCache& cache,
                                            const Matrix& dy) {
  if (cache.layers.size() != net.layers.size())
    throw std::invalid_argument("backward: cache does not match network");
  if (cache.mode != Mode::kTrain) throw std::invalid_argument("backward: cache must come from train mode");
  require_shape(dy.cols == net.output_dim(), "backward dY dim");

  MlpGrads grads;
  grads.layers.assign(net.layers.size(), LayerGrads{});
  Matrix cur = dy;
  for (int li = static_cast<int>(net.layers.size()) - 1; li >= 0; --li) {
    const Layer& layer = net.layers[static_cast<std::size_t>(li)];
    const LayerCache& lc = cache.layers[static_cast<std::size_t>(li)];
    LayerGrads& lg = grads.layers[static_cast<std::size_t>(li)];
    switch (layer.spec.kind) {
      case LayerKind::kLinear: {
        lg.d_weight = matmul_tn(lc.input, cur);
        lg.d_bias = colsum(cur);
        cur = matmul_nt(cur, layer.weight);
        break;
      }
      case LayerKind::kRelu: {
        for (std::size_t i = 0; i < cur.data.size(); ++i) {
          if (lc.input.data[i] <= 0.0) cur.data[i] = 0.0;
        }
        break;
      }
      case LayerKind::kSigmoid: {
        for (std::size_t i = 0; i < cur.data.size(); ++i) {
          const double y = lc.output.data[i];
          cur.data[i] *= y * (1.0 - y);
        }
        break;
      }
      case LayerKind::kDropout: {
        if (!lc.mask.empty()) {
          for (std::size_t i = 0; i < cur.data.size(); ++i) cur.data[i] *= lc.mask.data[i];
        }
        break;
      }
      case LayerKind::kBatchNorm: {
        const int dim = layer.spec.out_dim;
        const int batch = cur.rows;
        lg.d_gamma = Matrix(1, dim, 0.0);
        lg.d_beta = Matrix(1, dim, 0.0);
        Matrix dx(batch, dim);
        for (int j = 0; j < dim; ++j) {
          const double g = layer.gamma.data[static_cast<std::size_t>(j)];
          const double inv = lc.inv_std[static_cast<std::size_t>(j)];
          double sum_dy = 0.0;
          double sum_dy_xhat = 0.0;
          for (int i = 0; i < batch; ++i) {
            const double d = cur.at(i, j);
            sum_dy += d;
            sum_dy_xhat += d * lc.xhat.at(i, j);
          }
          lg.d_beta.data[static_cast<std::size_t>(j)] = sum_dy;
          lg.d_gamma.data[static_cast<std::size_t>(j)] = sum_dy_xhat;
          const double mean_dxhat = g * sum_dy / batch;
          const double mean_dxhat_xhat = g * sum_dy_xhat / batch;
          for (int i = 0; i < batch; ++i) {
            const double dxhat = g * cur.at(i, j);
            dx.at(i, j) = inv * (dxhat - mean_dxhat - lc.xhat.at(i, j) * mean_dxhat_xhat);
          }
        }
        cur = std::move(dx);
        break;
      }
    }
  }
  return {std::move(grads), std::move(cur)};
}

}  // namespace hetnids
