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

#ifndef WFC_WASSDEP_HPP_
#define WFC_WASSDEP_HPP_

// Critic-based estimation of the Wasserstein dependency between two
// representations: W1(p(z_y, z_s), p(z_y) p(z_s)). The joint sample pairs
// rows in their original order; the product sample pairs z_y with a shuffled
// z_s.

#include <functional>
#include <random>
#include <span>
#include <vector>

#include "wfc/neural.hpp"

namespace wfc {

struct RepresentationBatch {
  Matrix z_y;
  Matrix z_s;
  // Row i is [z_y[i] | z_s[i]].
  Matrix dependent;
  // Row i is [z_y[i] | z_s[permutation[i]]].
  Matrix independent;
  std::vector<std::size_t> permutation;

  Eigen::Index size() const { return z_y.rows(); }
};

struct PairingOptions {
  // Draw a permutation without fixed points instead of a uniform one.
  bool derangement = false;
};

// Uniform random permutation of [0, n), or a uniform random cyclic one
// (no fixed points) when `options.derangement` is set.
std::vector<std::size_t> DrawPermutation(std::size_t n, std::mt19937_64& rng,
                                         PairingOptions options = {});

RepresentationBatch PairBatches(const Matrix& z_y, const Matrix& z_s,
                                std::mt19937_64& rng,
                                PairingOptions options = {});

// Builds the batch from an explicit permutation of [0, n).
RepresentationBatch PairWithPermutation(const Matrix& z_y, const Matrix& z_s,
                                        std::vector<std::size_t> permutation);

struct CriticObjectiveResult {
  // mean C(dependent) - mean C(independent)
  double value = 0.0;
  // Gradient of `value` with respect to the critic parameters.
  Gradients grads;
};

CriticObjectiveResult CriticObjective(const MlpParameters& critic,
                                      const RepresentationBatch& batch);

// Objective value only.
double CriticObjectiveValue(const MlpParameters& critic,
                            const RepresentationBatch& batch);

// Gradient of the objective value with respect to every z_y row. Each z_y
// row appears once in the joint sample and once in the product sample; z_s
// is held constant.
Matrix RegularizerGrads(const MlpParameters& critic,
                        const RepresentationBatch& batch);

struct CriticEstimate {
  double value = 0.0;
  int n_batches_averaged = 0;
  std::vector<double> per_batch;
};

// Averages the objective over `n_batches` batches drawn from `stream`
// (called with the batch number).
CriticEstimate EstimateDependency(
    const MlpParameters& critic,
    const std::function<RepresentationBatch(int)>& stream, int n_batches);

// Upper bound on the L1-Lipschitz constant of a network whose parameters all
// lie in [-c, c] with 1-Lipschitz activations: the product over layers of
// c * (output width).
double ClampedLipschitzBound(const MlpParameters& critic, double c);

}  // namespace wfc

#endif  // WFC_WASSDEP_HPP_
