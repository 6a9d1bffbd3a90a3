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

// Model checkpoint format:
//
//   WFCMODEL v1
//   layer_sizes=4,3,2
//   activation=tanh
//   order=row_major
//   block=w0 rows=3 cols=4 offset=0
//   block=b0 rows=3 cols=1 offset=96
//   ...
//   data_bytes=<total>
//   end
//   <raw little-endian float64 payload>
//
// Offsets are bytes from the first payload byte.

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "wfc/error.hpp"
#include "wfc/io_util.hpp"
#include "wfc/neural.hpp"

namespace wfc {
namespace {

constexpr std::string_view kModelMagic = "WFCMODEL v1";

}  // namespace

void SaveModel(const MlpParameters& params, const std::string& path) {
  params.Validate();
  std::ostringstream header;
  header << kModelMagic << '\n';
  header << "layer_sizes=";
  for (std::size_t i = 0; i < params.layer_sizes.size(); ++i) {
    header << (i ? "," : "") << params.layer_sizes[i];
  }
  header << '\n' << "activation=" << ActivationName(params.activation) << '\n';
  header << "order=row_major\n";

  std::vector<double> payload;
  for (int k = 0; k < params.num_layers(); ++k) {
    const Layer& layer = params.layers[k];
    header << "block=w" << k << " rows=" << layer.weight.rows()
           << " cols=" << layer.weight.cols()
           << " offset=" << payload.size() * sizeof(double) << '\n';
    for (Eigen::Index i = 0; i < layer.weight.rows(); ++i) {
      for (Eigen::Index j = 0; j < layer.weight.cols(); ++j) {
        payload.push_back(layer.weight(i, j));
      }
    }
    header << "block=b" << k << " rows=" << layer.bias.size() << " cols=1"
           << " offset=" << payload.size() * sizeof(double) << '\n';
    payload.insert(payload.end(), layer.bias.data(),
                   layer.bias.data() + layer.bias.size());
  }
  header << "data_bytes=" << payload.size() * sizeof(double) << '\n';
  header << "end\n";

  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  const std::string text = header.str();
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  io::WriteLittleEndian(out, std::span<const double>(payload));
  if (!out) throw DataError("failed writing '" + path + "'");
}

MlpParameters LoadModel(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model file '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || line != kModelMagic) {
    throw DataError(path + ": line 1: expected magic '" +
                    std::string(kModelMagic) + "'");
  }

  MlpParameters params;
  bool have_activation = false;
  std::size_t data_bytes = 0;
  struct Block {
    char kind;
    int layer;
    long rows;
    long cols;
    std::size_t offset;
  };
  std::vector<Block> blocks;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line == "end") break;
    const auto where = path + ": line " + std::to_string(line_no) + ": ";
    if (line.rfind("layer_sizes=", 0) == 0) {
      for (const auto& field : io::SplitString(line.substr(12), ',')) {
        params.layer_sizes.push_back(io::ParseInt(field, where + "layer size"));
      }
    } else if (line.rfind("activation=", 0) == 0) {
      try {
        params.activation = ParseActivation(line.substr(11));
      } catch (const ConfigError& e) {
        throw DataError(where + e.what());
      }
      have_activation = true;
    } else if (line == "order=row_major") {
    } else if (line.rfind("block=", 0) == 0) {
      std::istringstream fields(line.substr(6));
      std::string name, rows, cols, offset;
      fields >> name >> rows >> cols >> offset;
      if (name.size() < 2 || (name[0] != 'w' && name[0] != 'b') ||
          rows.rfind("rows=", 0) != 0 || cols.rfind("cols=", 0) != 0 ||
          offset.rfind("offset=", 0) != 0) {
        throw DataError(where + "malformed block descriptor");
      }
      blocks.push_back({name[0], static_cast<int>(io::ParseInt(name.substr(1), where + "block")),
                        io::ParseInt(rows.substr(5), where + "rows"),
                        io::ParseInt(cols.substr(5), where + "cols"),
                        static_cast<std::size_t>(
                            io::ParseInt(offset.substr(7), where + "offset"))});
    } else if (line.rfind("data_bytes=", 0) == 0) {
      data_bytes = static_cast<std::size_t>(
          io::ParseInt(line.substr(11), where + "data_bytes"));
    } else {
      throw DataError(where + "unrecognized header line '" + line + "'");
    }
  }
  if (line != "end") throw DataError(path + ": missing 'end' header line");
  if (params.layer_sizes.size() < 2 || !have_activation) {
    throw DataError(path + ": header lacks layer_sizes or activation");
  }
  if (data_bytes % sizeof(double) != 0) {
    throw DataError(path + ": data_bytes is not a multiple of 8");
  }

  std::vector<double> payload(data_bytes / sizeof(double));
  io::ReadLittleEndian(in, std::span<double>(payload));
  if (!in) throw DataError(path + ": truncated payload");

  const int layers = static_cast<int>(params.layer_sizes.size()) - 1;
  params.layers.resize(layers);
  std::vector<int> seen(2 * layers, 0);
  for (const Block& block : blocks) {
    if (block.layer < 0 || block.layer >= layers) {
      throw DataError(path + ": block refers to missing layer " +
                      std::to_string(block.layer));
    }
    const std::size_t count = static_cast<std::size_t>(block.rows * block.cols);
    if (block.rows <= 0 || block.cols <= 0 || block.offset % sizeof(double) ||
        block.offset / sizeof(double) + count > payload.size()) {
      throw DataError(path + ": block for layer " +
                      std::to_string(block.layer) + " is out of bounds");
    }
    const double* src = payload.data() + block.offset / sizeof(double);
    Layer& layer = params.layers[block.layer];
    if (block.kind == 'w') {
      layer.weight.resize(block.rows, block.cols);
      for (long i = 0; i < block.rows; ++i) {
        for (long j = 0; j < block.cols; ++j) layer.weight(i, j) = *src++;
      }
      seen[2 * block.layer]++;
    } else {
      layer.bias = Eigen::Map<const Vector>(src, block.rows);
      seen[2 * block.layer + 1]++;
    }
  }
  for (int count : seen) {
    if (count != 1) throw DataError(path + ": missing or duplicate block");
  }
  try {
    params.Validate();
  } catch (const Error& e) {
    throw DataError(path + ": " + e.what());
  }
  return params;
}

}  // namespace wfc
