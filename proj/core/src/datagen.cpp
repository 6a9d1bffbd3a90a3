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

#include "wfc/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>

#include "wfc/error.hpp"
#include "wfc/io_util.hpp"

namespace wfc {
namespace {

constexpr std::string_view kDataMagic = "WFCDATA v1";

struct Header {
  bool binary = false;
  long n = 0;
  long d = 0;
  long classes = 0;
  long groups = 0;
};

std::string FormatHeader(const EmbeddingDataset& dataset, bool binary) {
  std::ostringstream out;
  out << kDataMagic << " n=" << dataset.size() << " d=" << dataset.dim()
      << " classes=" << dataset.num_classes << " groups=" << dataset.num_groups;
  if (binary) out << " format=binary";
  return out.str();
}

Header ParseHeader(const std::string& line, const std::string& path) {
  const std::string where = path + ": line 1";
  if (line.rfind(kDataMagic, 0) != 0) {
    throw DataError(where + ": expected magic '" + std::string(kDataMagic) + "'");
  }
  Header header;
  bool seen[4] = {false, false, false, false};
  std::istringstream fields(line.substr(kDataMagic.size()));
  std::string field;
  while (fields >> field) {
    const auto eq = field.find('=');
    if (eq == std::string::npos) {
      throw DataError(where + ": malformed header field '" + field + "'");
    }
    const std::string key = field.substr(0, eq);
    if (key == "format") {
      const std::string kind = field.substr(eq + 1);
      if (kind != "binary" && kind != "text") {
        throw DataError(where + ": unknown format '" + kind + "'");
      }
      header.binary = kind == "binary";
      continue;
    }
    const long value = io::ParseInt(field.substr(eq + 1), where + " " + key);
    if (key == "n") {
      header.n = value, seen[0] = true;
    } else if (key == "d") {
      header.d = value, seen[1] = true;
    } else if (key == "classes") {
      header.classes = value, seen[2] = true;
    } else if (key == "groups") {
      header.groups = value, seen[3] = true;
    } else {
      throw DataError(where + ": unknown header field '" + key + "'");
    }
  }
  if (!(seen[0] && seen[1] && seen[2] && seen[3])) {
    throw DataError(where + ": header must declare n, d, classes and groups");
  }
  if (header.n <= 0 || header.d <= 0 || header.classes <= 0 || header.groups <= 0) {
    throw DataError(where + ": header values must be positive");
  }
  return header;
}

void CheckLabel(long value, long limit, const char* what, const std::string& where) {
  if (value < 0 || value >= limit) {
    throw DataError(where + ": " + what + " " + std::to_string(value) +
                    " outside [0, " + std::to_string(limit) + ")");
  }
}

}  // namespace

void EmbeddingDataset::Validate() const {
  const std::size_t n = y.size();
  if (n == 0 || features.cols() == 0) {
    throw DataError("dataset must have n > 0 and d > 0");
  }
  if (static_cast<std::size_t>(features.rows()) != n || s.size() != n) {
    throw DataError("dataset features, y and s lengths differ");
  }
  if (num_classes <= 0 || num_groups <= 0) {
    throw DataError("dataset must declare positive class and group counts");
  }
  for (std::size_t i = 0; i < n; ++i) {
    const std::string where = "row " + std::to_string(i);
    CheckLabel(y[i], num_classes, "label", where);
    CheckLabel(s[i], num_groups, "attribute", where);
    if (!features.row(static_cast<Eigen::Index>(i)).allFinite()) {
      throw DataError(where + ": non-finite feature");
    }
  }
}

EmbeddingDataset EmbeddingDataset::Subset(
    std::span<const std::size_t> indices) const {
  EmbeddingDataset out;
  out.features = GatherRows(features, indices);
  out.y = Gather(y, indices);
  out.s = Gather(s, indices);
  out.num_classes = num_classes;
  out.num_groups = num_groups;
  out.class_names = class_names;
  out.group_names = group_names;
  return out;
}

std::vector<std::size_t> EmbeddingDataset::CellCounts() const {
  std::vector<std::size_t> counts(
      static_cast<std::size_t>(num_classes) * num_groups, 0);
  for (std::size_t i = 0; i < size(); ++i) {
    ++counts[static_cast<std::size_t>(y[i]) * num_groups + s[i]];
  }
  return counts;
}

void SyntheticSpec::Validate() const {
  if (num_classes < 1 || num_groups < 1 || n_per_cell < 1 || dim < 1) {
    throw ConfigError("synthetic counts and dimension must be positive");
  }
  if (domain < 0) throw ConfigError("synthetic domain must be non-negative");
  if (!std::isfinite(class_separation) || class_separation < 0.0) {
    throw ConfigError("synthetic class_separation must be finite and >= 0");
  }
  if (!std::isfinite(bias_strength) || bias_strength < 0.0) {
    throw ConfigError("synthetic bias_strength must be finite and >= 0");
  }
  if (!std::isfinite(noise_std) || noise_std <= 0.0) {
    throw ConfigError("synthetic noise_std must be finite and > 0");
  }
  if (!(correlation >= 0.0 && correlation <= 1.0)) {
    throw ConfigError("synthetic correlation must lie in [0, 1]");
  }
  const int needed = num_groups + (domain + 1) * num_classes;
  if (dim < needed) {
    throw ConfigError("synthetic dim " + std::to_string(dim) +
                      " too small for orthogonal directions (need " +
                      std::to_string(needed) + ")");
  }
}

int SyntheticCellCount(const SyntheticSpec& spec, int y, int s) {
  const double weight = (y % spec.num_groups == s) ? 1.0 + spec.correlation
                                                   : 1.0 - spec.correlation;
  return static_cast<int>(std::lround(spec.n_per_cell * weight));
}

EmbeddingDataset GenerateSynthetic(const SyntheticSpec& spec) {
  spec.Validate();

  // Orthonormal directions: the first num_groups columns are the sensitive
  // directions, then one block of num_classes columns per domain.
  const int columns = spec.num_groups + (spec.domain + 1) * spec.num_classes;
  std::mt19937_64 dir_rng(spec.direction_seed);
  std::normal_distribution<double> standard(0.0, 1.0);
  Matrix raw(spec.dim, columns);
  for (Eigen::Index j = 0; j < raw.cols(); ++j) {
    for (Eigen::Index i = 0; i < raw.rows(); ++i) raw(i, j) = standard(dir_rng);
  }
  Eigen::HouseholderQR<Matrix> qr(raw);
  const Matrix q = qr.householderQ() * Matrix::Identity(spec.dim, columns);
  const Matrix group_dirs = q.leftCols(spec.num_groups);
  const Matrix class_dirs =
      q.block(0, spec.num_groups + spec.domain * spec.num_classes, spec.dim,
              spec.num_classes);

  std::vector<std::pair<int, int>> cells;
  for (int y = 0; y < spec.num_classes; ++y) {
    for (int s = 0; s < spec.num_groups; ++s) {
      const int count = SyntheticCellCount(spec, y, s);
      for (int i = 0; i < count; ++i) cells.emplace_back(y, s);
    }
  }
  if (cells.empty()) throw ConfigError("synthetic spec produces no rows");

  std::mt19937_64 rng(spec.seed);
  std::shuffle(cells.begin(), cells.end(), rng);
  std::normal_distribution<double> noise(0.0, spec.noise_std);

  EmbeddingDataset out;
  out.num_classes = spec.num_classes;
  out.num_groups = spec.num_groups;
  out.features.resize(static_cast<Eigen::Index>(cells.size()), spec.dim);
  out.y.reserve(cells.size());
  out.s.reserve(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto [y, s] = cells[i];
    auto row = out.features.row(static_cast<Eigen::Index>(i));
    row = spec.class_separation * class_dirs.col(y).transpose() +
          spec.bias_strength * group_dirs.col(s).transpose();
    for (Eigen::Index j = 0; j < row.size(); ++j) row(j) += noise(rng);
    out.y.push_back(y);
    out.s.push_back(s);
  }
  return out;
}

void SaveDataset(const EmbeddingDataset& dataset, const std::string& path,
                 DatasetFormat format) {
  dataset.Validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  out << FormatHeader(dataset, format == DatasetFormat::kBinary) << '\n';
  if (format == DatasetFormat::kText) {
    for (std::size_t i = 0; i < dataset.size(); ++i) {
      const auto row = static_cast<Eigen::Index>(i);
      for (Eigen::Index j = 0; j < dataset.features.cols(); ++j) {
        if (j) out << ',';
        out << io::FormatDouble(dataset.features(row, j));
      }
      out << ',' << dataset.y[i] << ',' << dataset.s[i] << '\n';
    }
  } else {
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(dataset.features.size()));
    for (Eigen::Index i = 0; i < dataset.features.rows(); ++i) {
      for (Eigen::Index j = 0; j < dataset.features.cols(); ++j) {
        values.push_back(dataset.features(i, j));
      }
    }
    io::WriteLittleEndian(out, std::span<const double>(values));
    std::vector<std::int32_t> ys(dataset.y.begin(), dataset.y.end());
    std::vector<std::int32_t> ss(dataset.s.begin(), dataset.s.end());
    io::WriteLittleEndian(out, std::span<const std::int32_t>(ys));
    io::WriteLittleEndian(out, std::span<const std::int32_t>(ss));
  }
  if (!out) throw DataError("failed writing '" + path + "'");
}

EmbeddingDataset LoadDataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open dataset '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw DataError(path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const Header header = ParseHeader(line, path);

  EmbeddingDataset out;
  out.num_classes = static_cast<int>(header.classes);
  out.num_groups = static_cast<int>(header.groups);
  out.features.resize(header.n, header.d);
  out.y.resize(static_cast<std::size_t>(header.n));
  out.s.resize(static_cast<std::size_t>(header.n));

  if (!header.binary) {
    for (long i = 0; i < header.n; ++i) {
      const std::string where = path + ": line " + std::to_string(i + 2);
      if (!std::getline(in, line)) {
        throw DataError(where + ": expected " + std::to_string(header.n) +
                        " rows, file ended");
      }
      if (!line.empty() && line.back() == '\r') line.pop_back();
      const auto fields = io::SplitString(line, ',');
      if (static_cast<long>(fields.size()) != header.d + 2) {
        throw DataError(where + ": expected " + std::to_string(header.d + 2) +
                        " fields, found " + std::to_string(fields.size()));
      }
      for (long j = 0; j < header.d; ++j) {
        const double value = io::ParseDouble(fields[j], where);
        if (!std::isfinite(value)) throw DataError(where + ": non-finite feature");
        out.features(i, j) = value;
      }
      const long y = io::ParseInt(fields[header.d], where);
      const long s = io::ParseInt(fields[header.d + 1], where);
      CheckLabel(y, header.classes, "label", where);
      CheckLabel(s, header.groups, "attribute", where);
      out.y[i] = static_cast<int>(y);
      out.s[i] = static_cast<int>(s);
    }
    while (std::getline(in, line)) {
      if (!io::Trim(line).empty()) {
        throw DataError(path + ": more rows than declared n=" +
                        std::to_string(header.n));
      }
    }
  } else {
    std::vector<double> values(static_cast<std::size_t>(header.n * header.d));
    std::vector<std::int32_t> ys(static_cast<std::size_t>(header.n));
    std::vector<std::int32_t> ss(static_cast<std::size_t>(header.n));
    io::ReadLittleEndian(in, std::span<double>(values));
    io::ReadLittleEndian(in, std::span<std::int32_t>(ys));
    io::ReadLittleEndian(in, std::span<std::int32_t>(ss));
    if (!in) throw DataError(path + ": truncated binary payload");
    for (long i = 0; i < header.n; ++i) {
      const std::string where = path + ": record " + std::to_string(i);
      for (long j = 0; j < header.d; ++j) {
        const double value = values[static_cast<std::size_t>(i * header.d + j)];
        if (!std::isfinite(value)) throw DataError(where + ": non-finite feature");
        out.features(i, j) = value;
      }
      CheckLabel(ys[i], header.classes, "label", where);
      CheckLabel(ss[i], header.groups, "attribute", where);
      out.y[i] = ys[i];
      out.s[i] = ss[i];
    }
  }
  return out;
}

namespace {

SplitResult StratifiedSplitImpl(
    std::span<const int> strata, int num_strata,
    std::span<const double> fractions, std::uint64_t seed,
    const std::function<std::string(std::size_t)>& name_stratum) {
  if (fractions.empty()) throw ConfigError("split needs at least one fraction");
  double total = 0.0;
  for (double f : fractions) {
    if (!(f > 0.0)) throw ConfigError("split fractions must be positive");
    total += f;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw ConfigError("split fractions must sum to 1");
  }

  const std::size_t parts = fractions.size();
  SplitResult result;
  result.indices.resize(parts);

  std::vector<std::vector<std::size_t>> cells(static_cast<std::size_t>(num_strata));
  for (std::size_t i = 0; i < strata.size(); ++i) {
    if (strata[i] < 0 || strata[i] >= num_strata) {
      throw DataError("stratum of row " + std::to_string(i) + " out of range");
    }
    cells[static_cast<std::size_t>(strata[i])].push_back(i);
  }

  std::mt19937_64 rng(seed);
  for (std::size_t c = 0; c < cells.size(); ++c) {
    auto& members = cells[c];
    if (members.empty()) continue;
    std::shuffle(members.begin(), members.end(), rng);
    if (parts > 1 && members.size() < parts) {
      result.warnings.push_back(name_stratum(c) + " has only " +
                                std::to_string(members.size()) +
                                " members; assigned to the first split");
      result.indices[0].insert(result.indices[0].end(), members.begin(),
                               members.end());
      continue;
    }
    // Cumulative rounding keeps every part within one example of its share.
    double cumulative = 0.0;
    std::size_t begin = 0;
    for (std::size_t p = 0; p < parts; ++p) {
      cumulative += fractions[p];
      const std::size_t end =
          p + 1 == parts
              ? members.size()
              : static_cast<std::size_t>(std::lround(cumulative * members.size()));
      const std::size_t stop = std::max(begin, std::min(end, members.size()));
      result.indices[p].insert(result.indices[p].end(), members.begin() + begin,
                               members.begin() + stop);
      begin = stop;
    }
  }
  for (auto& part : result.indices) std::sort(part.begin(), part.end());
  return result;
}

}  // namespace

SplitResult StratifiedSplitIndices(std::span<const int> strata, int num_strata,
                                   std::span<const double> fractions,
                                   std::uint64_t seed) {
  return StratifiedSplitImpl(strata, num_strata, fractions, seed,
                             [](std::size_t c) {
                               return "stratum " + std::to_string(c);
                             });
}

SplitResult SplitIndices(const EmbeddingDataset& dataset,
                         std::span<const double> fractions, std::uint64_t seed) {
  std::vector<int> strata(dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    strata[i] = dataset.y[i] * dataset.num_groups + dataset.s[i];
  }
  const int groups = dataset.num_groups;
  return StratifiedSplitImpl(
      strata, dataset.num_classes * groups, fractions, seed,
      [groups](std::size_t c) {
        return "cell (y=" + std::to_string(c / groups) +
               ", s=" + std::to_string(c % groups) + ")";
      });
}

std::vector<EmbeddingDataset> Split(const EmbeddingDataset& dataset,
                                    std::span<const double> fractions,
                                    std::uint64_t seed,
                                    std::vector<std::string>* warnings) {
  SplitResult split = SplitIndices(dataset, fractions, seed);
  if (warnings != nullptr) *warnings = split.warnings;
  std::vector<EmbeddingDataset> out;
  out.reserve(split.indices.size());
  for (const auto& indices : split.indices) out.push_back(dataset.Subset(indices));
  return out;
}

void BatchPlan::Validate() const {
  if (batch_size < 2) throw ConfigError("batch size must be at least 2");
}

std::vector<std::vector<std::size_t>> MakeBatches(std::size_t n,
                                                  const BatchPlan& plan,
                                                  std::uint64_t epoch) {
  plan.Validate();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(plan.seed + epoch);
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t start = 0; start < n; start += plan.batch_size) {
    const std::size_t end = std::min(n, start + plan.batch_size);
    if (plan.drop_last && end - start < plan.batch_size) break;
    batches.emplace_back(order.begin() + start, order.begin() + end);
  }
  return batches;
}

BatchStream::BatchStream(std::size_t n, BatchPlan plan) : n_(n), plan_(plan) {
  plan_.Validate();
  if (n_ == 0 || (plan_.drop_last && n_ < plan_.batch_size)) {
    throw ConfigError("dataset of " + std::to_string(n_) +
                      " rows cannot fill a batch of " +
                      std::to_string(plan_.batch_size));
  }
  batches_ = MakeBatches(n_, plan_, epoch_);
}

const std::vector<std::size_t>& BatchStream::Next() {
  if (cursor_ == batches_.size()) {
    ++epoch_;
    batches_ = MakeBatches(n_, plan_, epoch_);
    cursor_ = 0;
  }
  return batches_[cursor_++];
}

Matrix GatherRows(const Matrix& m, std::span<const std::size_t> indices) {
  Matrix out(static_cast<Eigen::Index>(indices.size()), m.cols());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) =
        m.row(static_cast<Eigen::Index>(indices[i]));
  }
  return out;
}

std::vector<int> Gather(std::span<const int> values,
                        std::span<const std::size_t> indices) {
  std::vector<int> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(values[i]);
  return out;
}

}  // namespace wfc
