/*
 * Copyright 2026 The WFC Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "wfc/neural.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <random>

#include "wfc/error.hpp"

namespace wfc {
namespace {

void ApplyActivation(Activation activation, Matrix& m) {
  switch (activation) {
    case Activation::kTanh:
      m = m.array().tanh();
      break;
    case Activation::kRelu:
      m = m.cwiseMax(0.0);
      break;
    case Activation::kIdentity:
      break;
  }
}

// Multiplies `grad` in place by the activation derivative, given the
// pre-activation and post-activation values.
void ActivationBackward(Activation activation, const Matrix& pre,
                        const Matrix& post, Matrix& grad) {
  switch (activation) {
    case Activation::kTanh:
      grad.array() *= 1.0 - post.array().square();
      break;
    case Activation::kRelu:
      grad.array() *= (pre.array() > 0.0).cast<double>();
      break;
    case Activation::kIdentity:
      break;
  }
}

void CheckTrace(const MlpParameters& params, const ForwardTrace& trace,
                const Matrix& grad_logits) {
  const auto layers = static_cast<std::size_t>(params.num_layers());
  if (trace.pre.size() != layers || trace.post.size() != layers + 1) {
    throw ShapeError("trace layer count does not match parameters");
  }
  for (std::size_t k = 0; k < layers; ++k) {
    if (trace.post[k].cols() != params.layers[k].weight.cols() ||
        trace.pre[k].cols() != params.layers[k].weight.rows()) {
      throw ShapeError("trace shapes do not match parameters at layer " +
                       std::to_string(k));
    }
  }
  if (grad_logits.rows() != trace.logits().rows() ||
      grad_logits.cols() != trace.logits().cols()) {
    throw ShapeError("grad_logits shape does not match logits");
  }
}

template <typename Fn>
void ForEachBlock(MlpParameters& params, Fn&& fn) {
  for (auto& layer : params.layers) {
    fn(layer.weight);
    fn(layer.bias);
  }
}

}  // namespace

std::string_view ActivationName(Activation activation) {
  switch (activation) {
    case Activation::kTanh:
      return "tanh";
    case Activation::kRelu:
      return "relu";
    case Activation::kIdentity:
      return "identity";
  }
  return "unknown";
}

Activation ParseActivation(std::string_view name) {
  if (name == "tanh") return Activation::kTanh;
  if (name == "relu") return Activation::kRelu;
  if (name == "identity") return Activation::kIdentity;
  throw ConfigError("unknown activation '" + std::string(name) + "'");
}

std::size_t MlpParameters::size() const {
  std::size_t n = 0;
  for (const auto& layer : layers) {
    n += static_cast<std::size_t>(layer.weight.size() + layer.bias.size());
  }
  return n;
}

void MlpParameters::Validate() const {
  if (layer_sizes.size() < 2) {
    throw ConfigError("an MLP needs at least an input and an output size");
  }
  for (int size : layer_sizes) {
    if (size <= 0) throw ConfigError("layer sizes must be positive");
  }
  if (layers.size() + 1 != layer_sizes.size()) {
    throw ShapeError("layer count does not match layer_sizes");
  }
  for (std::size_t k = 0; k < layers.size(); ++k) {
    if (layers[k].weight.rows() != layer_sizes[k + 1] ||
        layers[k].weight.cols() != layer_sizes[k] ||
        layers[k].bias.size() != layer_sizes[k + 1]) {
      throw ShapeError("layer " + std::to_string(k) + " has shape " +
                       std::to_string(layers[k].weight.rows()) + "x" +
                       std::to_string(layers[k].weight.cols()) +
                       ", expected " + std::to_string(layer_sizes[k + 1]) +
                       "x" + std::to_string(layer_sizes[k]));
    }
  }
}

bool operator==(const MlpParameters& a, const MlpParameters& b) {
  if (a.layer_sizes != b.layer_sizes || a.activation != b.activation ||
      a.layers.size() != b.layers.size()) {
    return false;
  }
  for (std::size_t k = 0; k < a.layers.size(); ++k) {
    if (a.layers[k].weight != b.layers[k].weight ||
        a.layers[k].bias != b.layers[k].bias) {
      return false;
    }
  }
  return true;
}

Gradients& Gradients::operator+=(const Gradients& other) {
  if (other.layers.size() != layers.size()) {
    throw ShapeError("gradient layer counts differ");
  }
  for (std::size_t k = 0; k < layers.size(); ++k) {
    layers[k].weight += other.layers[k].weight;
    layers[k].bias += other.layers[k].bias;
  }
  return *this;
}

Gradients& Gradients::operator*=(double scale) {
  for (auto& layer : layers) {
    layer.weight *= scale;
    layer.bias *= scale;
  }
  return *this;
}

Gradients ZeroGradients(const MlpParameters& params) {
  Gradients grads;
  grads.layers.reserve(params.layers.size());
  for (const auto& layer : params.layers) {
    grads.layers.push_back({Matrix::Zero(layer.weight.rows(), layer.weight.cols()),
                            Vector::Zero(layer.bias.size())});
  }
  return grads;
}

double GlorotLimit(int fan_in, int fan_out) {
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

MlpParameters MlpInit(std::span<const int> layer_sizes, Activation activation,
                      std::uint64_t seed) {
  MlpParameters params;
  params.layer_sizes.assign(layer_sizes.begin(), layer_sizes.end());
  params.activation = activation;
  if (params.layer_sizes.size() < 2) {
    throw ConfigError("an MLP needs at least an input and an output size");
  }
  for (int size : params.layer_sizes) {
    if (size <= 0) throw ConfigError("layer sizes must be positive");
  }

  std::mt19937_64 rng(seed);
  for (std::size_t k = 0; k + 1 < params.layer_sizes.size(); ++k) {
    const int fan_in = params.layer_sizes[k];
    const int fan_out = params.layer_sizes[k + 1];
    const double limit = GlorotLimit(fan_in, fan_out);
    std::uniform_real_distribution<double> dist(-limit, limit);
    Layer layer{Matrix(fan_out, fan_in), Vector::Zero(fan_out)};
    for (Eigen::Index j = 0; j < layer.weight.cols(); ++j) {
      for (Eigen::Index i = 0; i < layer.weight.rows(); ++i) {
        layer.weight(i, j) = dist(rng);
      }
    }
    params.layers.push_back(std::move(layer));
  }
  return params;
}

ForwardTrace MlpForward(const MlpParameters& params, const Matrix& x) {
  if (x.cols() != params.input_dim()) {
    throw ShapeError("input has " + std::to_string(x.cols()) +
                     " columns, network expects " +
                     std::to_string(params.input_dim()));
  }
  ForwardTrace trace;
  trace.pre.reserve(params.layers.size());
  trace.post.reserve(params.layers.size() + 1);
  trace.post.push_back(x);
  for (int k = 0; k < params.num_layers(); ++k) {
    const Layer& layer = params.layers[k];
    Matrix z = trace.post.back() * layer.weight.transpose();
    z.rowwise() += layer.bias.transpose();
    Matrix a = z;
    if (k + 1 < params.num_layers()) ApplyActivation(params.activation, a);
    trace.pre.push_back(std::move(z));
    trace.post.push_back(std::move(a));
  }
  return trace;
}

Gradients MlpBackward(const MlpParameters& params, const ForwardTrace& trace,
                      const Matrix& grad_logits,
                      std::span<const RepresentationGradient> extra,
                      Matrix* grad_input) {
  CheckTrace(params, trace, grad_logits);
  const int layers = params.num_layers();
  for (const auto& injected : extra) {
    if (injected.post_index < 1 || injected.post_index > layers ||
        injected.grad.rows() != trace.post[injected.post_index].rows() ||
        injected.grad.cols() != trace.post[injected.post_index].cols()) {
      throw ShapeError("injected representation gradient has wrong shape");
    }
  }

  Gradients grads;
  grads.layers.resize(layers);
  // `upstream` holds dLoss/dPost[k + 1] while processing layer k.
  Matrix upstream = grad_logits;
  for (int k = layers - 1; k >= 0; --k) {
    for (const auto& injected : extra) {
      if (injected.post_index == k + 1) upstream += injected.grad;
    }
    Matrix delta = std::move(upstream);
    if (k + 1 < layers) {
      ActivationBackward(params.activation, trace.pre[k], trace.post[k + 1],
                         delta);
    }
    grads.layers[k].weight = delta.transpose() * trace.post[k];
    grads.layers[k].bias = delta.colwise().sum().transpose();
    if (k > 0 || grad_input != nullptr) {
      upstream = delta * params.layers[k].weight;
    }
  }
  if (grad_input != nullptr) *grad_input = std::move(upstream);
  return grads;
}

Matrix MlpInputGradient(const MlpParameters& params, const ForwardTrace& trace,
                        const Matrix& grad_logits) {
  CheckTrace(params, trace, grad_logits);
  Matrix upstream = grad_logits;
  for (int k = params.num_layers() - 1; k >= 0; --k) {
    if (k + 1 < params.num_layers()) {
      ActivationBackward(params.activation, trace.pre[k], trace.post[k + 1],
                         upstream);
    }
    upstream = upstream * params.layers[k].weight;
  }
  return upstream;
}

CrossEntropyResult CrossEntropy(const Matrix& logits,
                                std::span<const int> labels) {
  const Eigen::Index n = logits.rows();
  const Eigen::Index k = logits.cols();
  if (static_cast<Eigen::Index>(labels.size()) != n) {
    throw ShapeError("label count does not match logits rows");
  }
  if (n == 0) throw DataError("cross entropy on an empty batch");

  CrossEntropyResult result;
  result.grad_logits.resize(n, k);
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const int label = labels[i];
    if (label < 0 || label >= k) {
      throw DataError("label " + std::to_string(label) + " at row " +
                      std::to_string(i) + " outside [0, " + std::to_string(k) +
                      ")");
    }
    const double max = logits.row(i).maxCoeff();
    auto shifted = (logits.row(i).array() - max).eval();
    auto exps = shifted.exp().eval();
    const double sum = exps.sum();
    total += std::log(sum) - shifted(label);
    result.grad_logits.row(i) = exps / sum;
    result.grad_logits(i, label) -= 1.0;
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  result.loss = total * inv_n;
  result.grad_logits *= inv_n;
  return result;
}

std::vector<int> ArgmaxRows(const Matrix& logits) {
  std::vector<int> out(static_cast<std::size_t>(logits.rows()));
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index j = 1; j < logits.cols(); ++j) {
      if (logits(i, j) > logits(i, best)) best = j;
    }
    out[i] = static_cast<int>(best);
  }
  return out;
}

std::string_view OptimizerName(OptimizerKind kind) {
  return kind == OptimizerKind::kAdam ? "adam" : "rmsprop";
}

OptimizerKind ParseOptimizer(std::string_view name) {
  if (name == "adam") return OptimizerKind::kAdam;
  if (name == "rmsprop") return OptimizerKind::kRmsProp;
  throw ConfigError("unknown optimizer '" + std::string(name) + "'");
}

OptimizerState MakeOptimizerState(const OptimizerConfig& config,
                                  const MlpParameters& params) {
  if (!(config.learning_rate > 0.0)) {
    throw ConfigError("learning rate must be positive");
  }
  OptimizerState state;
  state.config = config;
  state.second_moment = ZeroGradients(params).layers;
  if (config.kind == OptimizerKind::kAdam) {
    state.first_moment = ZeroGradients(params).layers;
  }
  return state;
}

void OptimizerStep(MlpParameters& params, const Gradients& grads,
                   OptimizerState& state) {
  const std::size_t layers = params.layers.size();
  if (grads.layers.size() != layers || state.second_moment.size() != layers) {
    throw ShapeError("optimizer state does not match parameters");
  }
  for (std::size_t k = 0; k < layers; ++k) {
    if (grads.layers[k].weight.rows() != params.layers[k].weight.rows() ||
        grads.layers[k].weight.cols() != params.layers[k].weight.cols() ||
        grads.layers[k].bias.size() != params.layers[k].bias.size() ||
        state.second_moment[k].weight.rows() != params.layers[k].weight.rows() ||
        state.second_moment[k].weight.cols() != params.layers[k].weight.cols()) {
      throw ShapeError("gradient shape mismatch at layer " + std::to_string(k));
    }
  }

  const OptimizerConfig& cfg = state.config;
  ++state.step;
  if (cfg.kind == OptimizerKind::kAdam) {
    const double t = static_cast<double>(state.step);
    const double correction1 = 1.0 - std::pow(cfg.beta1, t);
    const double correction2 = 1.0 - std::pow(cfg.beta2, t);
    auto update = [&](auto& param, auto& m, auto& v, const auto& g) {
      m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
      v = cfg.beta2 * v + (1.0 - cfg.beta2) * g.cwiseProduct(g);
      param.array() -= cfg.learning_rate * (m.array() / correction1) /
                       ((v.array() / correction2).sqrt() + cfg.epsilon);
    };
    for (std::size_t k = 0; k < layers; ++k) {
      update(params.layers[k].weight, state.first_moment[k].weight,
             state.second_moment[k].weight, grads.layers[k].weight);
      update(params.layers[k].bias, state.first_moment[k].bias,
             state.second_moment[k].bias, grads.layers[k].bias);
    }
  } else {
    auto update = [&](auto& param, auto& v, const auto& g) {
      v = cfg.rho * v + (1.0 - cfg.rho) * g.cwiseProduct(g);
      param.array() -= cfg.learning_rate * g.array() / (v.array().sqrt() + cfg.epsilon);
    };
    for (std::size_t k = 0; k < layers; ++k) {
      update(params.layers[k].weight, state.second_moment[k].weight,
             grads.layers[k].weight);
      update(params.layers[k].bias, state.second_moment[k].bias,
             grads.layers[k].bias);
    }
  }
}

void ClampWeights(MlpParameters& params, double c, bool include_biases) {
  if (!(c > 0.0)) throw ConfigError("clamp value must be positive");
  for (auto& layer : params.layers) {
    layer.weight = layer.weight.cwiseMax(-c).cwiseMin(c);
    if (include_biases) layer.bias = layer.bias.cwiseMax(-c).cwiseMin(c);
  }
}

double MaxAbsParameter(const MlpParameters& params) {
  double best = 0.0;
  for (const auto& layer : params.layers) {
    if (layer.weight.size() > 0) best = std::max(best, layer.weight.cwiseAbs().maxCoeff());
    if (layer.bias.size() > 0) best = std::max(best, layer.bias.cwiseAbs().maxCoeff());
  }
  return best;
}

std::vector<double> Flatten(const MlpParameters& params) {
  std::vector<double> flat;
  flat.reserve(params.size());
  for (const auto& layer : params.layers) {
    flat.insert(flat.end(), layer.weight.data(),
                layer.weight.data() + layer.weight.size());
    flat.insert(flat.end(), layer.bias.data(),
                layer.bias.data() + layer.bias.size());
  }
  return flat;
}

std::vector<double> Flatten(const Gradients& grads) {
  std::vector<double> flat;
  for (const auto& layer : grads.layers) {
    flat.insert(flat.end(), layer.weight.data(),
                layer.weight.data() + layer.weight.size());
    flat.insert(flat.end(), layer.bias.data(),
                layer.bias.data() + layer.bias.size());
  }
  return flat;
}

void Unflatten(std::span<const double> flat, MlpParameters& params) {
  if (flat.size() != params.size()) {
    throw ShapeError("flat parameter vector has wrong length");
  }
  std::size_t offset = 0;
  ForEachBlock(params, [&](auto& block) {
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(offset), block.size(),
                block.data());
    offset += static_cast<std::size_t>(block.size());
  });
}

std::uint64_t ParameterHash(const MlpParameters& params) {
  std::uint64_t hash = 14695981039346656037ULL;
  auto mix = [&hash](const void* data, std::size_t bytes) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < bytes; ++i) {
      hash ^= p[i];
      hash *= 1099511628211ULL;
    }
  };
  for (int size : params.layer_sizes) mix(&size, sizeof(size));
  for (const auto& layer : params.layers) {
    mix(layer.weight.data(), sizeof(double) * layer.weight.size());
    mix(layer.bias.data(), sizeof(double) * layer.bias.size());
  }
  return hash;
}

}  // namespace wfc
