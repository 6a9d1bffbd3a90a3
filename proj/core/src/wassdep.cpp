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

#include "wfc/wassdep.hpp"

#include <algorithm>
#include <numeric>

#include "wfc/error.hpp"

namespace wfc {
namespace {

void CheckCritic(const MlpParameters& critic, const RepresentationBatch& batch) {
  if (critic.output_dim() != 1) {
    throw ConfigError("critic must have a single output unit, has " +
                      std::to_string(critic.output_dim()));
  }
  if (critic.input_dim() != batch.dependent.cols()) {
    throw ConfigError("critic input dim " + std::to_string(critic.input_dim()) +
                      " does not match d_y + d_s = " +
                      std::to_string(batch.dependent.cols()));
  }
}

}  // namespace

RepresentationBatch PairWithPermutation(const Matrix& z_y, const Matrix& z_s,
                                        std::vector<std::size_t> permutation) {
  const Eigen::Index n = z_y.rows();
  if (z_s.rows() != n) {
    throw ShapeError("z_y has " + std::to_string(n) + " rows but z_s has " +
                     std::to_string(z_s.rows()));
  }
  if (n < 2) throw ShapeError("pairing needs at least 2 rows");
  if (static_cast<Eigen::Index>(permutation.size()) != n) {
    throw ShapeError("permutation length does not match batch");
  }
  std::vector<bool> seen(permutation.size(), false);
  for (std::size_t p : permutation) {
    if (p >= permutation.size() || seen[p]) {
      throw ShapeError("not a permutation");
    }
    seen[p] = true;
  }

  RepresentationBatch batch;
  batch.z_y = z_y;
  batch.z_s = z_s;
  const Eigen::Index dy = z_y.cols();
  const Eigen::Index ds = z_s.cols();
  batch.dependent.resize(n, dy + ds);
  batch.dependent.leftCols(dy) = z_y;
  batch.dependent.rightCols(ds) = z_s;
  batch.independent.resize(n, dy + ds);
  batch.independent.leftCols(dy) = z_y;
  for (Eigen::Index i = 0; i < n; ++i) {
    batch.independent.row(i).tail(ds) =
        z_s.row(static_cast<Eigen::Index>(permutation[i]));
  }
  batch.permutation = std::move(permutation);
  return batch;
}

std::vector<std::size_t> DrawPermutation(std::size_t n, std::mt19937_64& rng,
                                         PairingOptions options) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  if (options.derangement && n > 1) {
    // Sattolo's algorithm.
    for (std::size_t i = n - 1; i > 0; --i) {
      std::uniform_int_distribution<std::size_t> pick(0, i - 1);
      std::swap(perm[i], perm[pick(rng)]);
    }
  } else {
    std::shuffle(perm.begin(), perm.end(), rng);
  }
  return perm;
}

RepresentationBatch PairBatches(const Matrix& z_y, const Matrix& z_s,
                                std::mt19937_64& rng, PairingOptions options) {
  if (z_y.rows() != z_s.rows()) {
    throw ShapeError("z_y has " + std::to_string(z_y.rows()) +
                     " rows but z_s has " + std::to_string(z_s.rows()));
  }
  if (z_y.rows() < 2) throw ShapeError("pairing needs at least 2 rows");
  return PairWithPermutation(
      z_y, z_s,
      DrawPermutation(static_cast<std::size_t>(z_y.rows()), rng, options));
}

CriticObjectiveResult CriticObjective(const MlpParameters& critic,
                                      const RepresentationBatch& batch) {
  CheckCritic(critic, batch);
  const Eigen::Index n = batch.size();
  const double inv_n = 1.0 / static_cast<double>(n);
  const ForwardTrace dep = MlpForward(critic, batch.dependent);
  const ForwardTrace ind = MlpForward(critic, batch.independent);

  CriticObjectiveResult result;
  result.value = dep.logits().mean() - ind.logits().mean();
  result.grads = MlpBackward(critic, dep, Matrix::Constant(n, 1, inv_n));
  result.grads += MlpBackward(critic, ind, Matrix::Constant(n, 1, -inv_n));
  return result;
}

double CriticObjectiveValue(const MlpParameters& critic,
                            const RepresentationBatch& batch) {
  CheckCritic(critic, batch);
  return MlpForward(critic, batch.dependent).logits().mean() -
         MlpForward(critic, batch.independent).logits().mean();
}

Matrix RegularizerGrads(const MlpParameters& critic,
                        const RepresentationBatch& batch) {
  CheckCritic(critic, batch);
  const Eigen::Index n = batch.size();
  const double inv_n = 1.0 / static_cast<double>(n);
  const Eigen::Index dy = batch.z_y.cols();
  const Matrix dep_grad = MlpInputGradient(
      critic, MlpForward(critic, batch.dependent), Matrix::Constant(n, 1, inv_n));
  const Matrix ind_grad =
      MlpInputGradient(critic, MlpForward(critic, batch.independent),
                       Matrix::Constant(n, 1, -inv_n));
  // z_y keeps its row position in both samples.
  return dep_grad.leftCols(dy) + ind_grad.leftCols(dy);
}

CriticEstimate EstimateDependency(
    const MlpParameters& critic,
    const std::function<RepresentationBatch(int)>& stream, int n_batches) {
  if (n_batches < 1) throw ConfigError("n_batches must be at least 1");
  CriticEstimate estimate;
  estimate.per_batch.reserve(static_cast<std::size_t>(n_batches));
  for (int b = 0; b < n_batches; ++b) {
    estimate.per_batch.push_back(CriticObjectiveValue(critic, stream(b)));
  }
  estimate.n_batches_averaged = n_batches;
  estimate.value =
      std::accumulate(estimate.per_batch.begin(), estimate.per_batch.end(), 0.0) /
      n_batches;
  return estimate;
}

double ClampedLipschitzBound(const MlpParameters& critic, double c) {
  double bound = 1.0;
  for (const auto& layer : critic.layers) {
    bound *= c * static_cast<double>(layer.weight.rows());
  }
  return bound;
}

}  // namespace wfc
