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

#ifndef WFC_NEURAL_HPP_
#define WFC_NEURAL_HPP_

// Minimal feed-forward network engine: construction, cached forward pass,
// analytic backpropagation, Adam/RMSProp and weight clamping. All arithmetic
// is double precision.

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace wfc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class Activation { kTanh, kRelu, kIdentity };

std::string_view ActivationName(Activation activation);
// Throws ConfigError on unknown names.
Activation ParseActivation(std::string_view name);

// One affine layer. `weight` is (out x in).
struct Layer {
  Matrix weight;
  Vector bias;
};

// Parameters of an MLP. `activation` applies to every hidden layer; the
// output layer is always affine (logits).
struct MlpParameters {
  std::vector<int> layer_sizes;
  std::vector<Layer> layers;
  Activation activation = Activation::kTanh;

  int input_dim() const { return layer_sizes.front(); }
  int output_dim() const { return layer_sizes.back(); }
  int num_layers() const { return static_cast<int>(layers.size()); }
  int num_hidden() const { return num_layers() - 1; }

  // Total number of scalar parameters.
  std::size_t size() const;

  // Throws ShapeError if the layer shapes do not chain or ConfigError if
  // any size is non-positive.
  void Validate() const;
};

bool operator==(const MlpParameters& a, const MlpParameters& b);

// Gradients mirror the parameter layout.
struct Gradients {
  std::vector<Layer> layers;

  Gradients& operator+=(const Gradients& other);
  Gradients& operator*=(double scale);
};

Gradients ZeroGradients(const MlpParameters& params);

// Cached activations of one forward pass. `post[0]` is the input batch,
// `post[k + 1]` is the output of layer k; `pre[k]` is the affine output of
// layer k before its activation. The last post-activation equals the logits.
struct ForwardTrace {
  std::vector<Matrix> pre;
  std::vector<Matrix> post;

  const Matrix& input() const { return post.front(); }
  const Matrix& logits() const { return post.back(); }
};

// Glorot-uniform weights in [-sqrt(6/(fan_in+fan_out)), +...], zero biases.
MlpParameters MlpInit(std::span<const int> layer_sizes, Activation activation,
                      std::uint64_t seed);

// Scale of the Glorot-uniform bound for a layer.
double GlorotLimit(int fan_in, int fan_out);

ForwardTrace MlpForward(const MlpParameters& params, const Matrix& x);

// Extra upstream gradient injected at post-activation `post_index` (1 is the
// first hidden layer, num_layers() is the logits).
struct RepresentationGradient {
  int post_index = 0;
  Matrix grad;
};

// Backpropagates `grad_logits` (dLoss/dLogits, batch x d_out) plus any
// injected representation gradients. When `grad_input` is non-null it
// receives dLoss/dInput.
Gradients MlpBackward(const MlpParameters& params, const ForwardTrace& trace,
                      const Matrix& grad_logits,
                      std::span<const RepresentationGradient> extra = {},
                      Matrix* grad_input = nullptr);

// dLoss/dInput only; skips the parameter gradients.
Matrix MlpInputGradient(const MlpParameters& params, const ForwardTrace& trace,
                        const Matrix& grad_logits);

struct CrossEntropyResult {
  double loss = 0.0;
  Matrix grad_logits;
};

// Mean negative log-softmax of the true class. Throws DataError if a label
// is out of range.
CrossEntropyResult CrossEntropy(const Matrix& logits,
                                std::span<const int> labels);

// Row-wise argmax; ties go to the lower index.
std::vector<int> ArgmaxRows(const Matrix& logits);

enum class OptimizerKind { kAdam, kRmsProp };

std::string_view OptimizerName(OptimizerKind kind);
OptimizerKind ParseOptimizer(std::string_view name);

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::kAdam;
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double rho = 0.9;
  double epsilon = 1e-8;
};

struct OptimizerState {
  OptimizerConfig config;
  std::int64_t step = 0;
  // First moments (Adam only) and second moments / squared averages.
  std::vector<Layer> first_moment;
  std::vector<Layer> second_moment;
};

OptimizerState MakeOptimizerState(const OptimizerConfig& config,
                                  const MlpParameters& params);

// One descent step. Callers maximizing an objective pass negated gradients.
void OptimizerStep(MlpParameters& params, const Gradients& grads,
                   OptimizerState& state);

// Clips every weight (and bias, if requested) into [-c, c].
void ClampWeights(MlpParameters& params, double c, bool include_biases = true);

// Largest absolute parameter value.
double MaxAbsParameter(const MlpParameters& params);

// Flattened views used by gradient checks and hashing. Order: per layer,
// weight (column-major) then bias.
std::vector<double> Flatten(const MlpParameters& params);
std::vector<double> Flatten(const Gradients& grads);
void Unflatten(std::span<const double> flat, MlpParameters& params);

// FNV-1a over the raw bytes of every parameter.
std::uint64_t ParameterHash(const MlpParameters& params);

// Checkpoint file: "WFCMODEL v1" then a text header and little-endian
// float64 blocks.
void SaveModel(const MlpParameters& params, const std::string& path);
MlpParameters LoadModel(const std::string& path);

}  // namespace wfc

#endif  // WFC_NEURAL_HPP_
