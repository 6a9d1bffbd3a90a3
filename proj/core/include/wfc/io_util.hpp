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

#ifndef WFC_IO_UTIL_HPP_
#define WFC_IO_UTIL_HPP_

// Small parsing and binary I/O helpers shared by the file formats.

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace wfc::io {

std::vector<std::string> SplitString(std::string_view text, char sep);
std::string_view Trim(std::string_view text);

// Strict parsers: the whole field must be consumed. `context` prefixes the
// DataError message.
long ParseInt(std::string_view text, const std::string& context);
double ParseDouble(std::string_view text, const std::string& context);

// Shortest decimal text that round-trips the double exactly.
std::string FormatDouble(double value);

template <typename T>
void WriteLittleEndian(std::ostream& out, std::span<const T> values) {
  static_assert(sizeof(T) == 4 || sizeof(T) == 8);
  using Raw = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
  std::vector<unsigned char> bytes(values.size() * sizeof(T));
  for (std::size_t i = 0; i < values.size(); ++i) {
    Raw raw;
    std::memcpy(&raw, &values[i], sizeof(T));
    for (std::size_t b = 0; b < sizeof(T); ++b) {
      bytes[i * sizeof(T) + b] = static_cast<unsigned char>(raw >> (8 * b));
    }
  }
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

template <typename T>
void ReadLittleEndian(std::istream& in, std::span<T> values) {
  static_assert(sizeof(T) == 4 || sizeof(T) == 8);
  using Raw = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
  std::vector<unsigned char> bytes(values.size() * sizeof(T));
  in.read(reinterpret_cast<char*>(bytes.data()),
          static_cast<std::streamsize>(bytes.size()));
  for (std::size_t i = 0; i < values.size(); ++i) {
    Raw raw = 0;
    for (std::size_t b = 0; b < sizeof(T); ++b) {
      raw |= static_cast<Raw>(bytes[i * sizeof(T) + b]) << (8 * b);
    }
    std::memcpy(&values[i], &raw, sizeof(T));
  }
}

}  // namespace wfc::io

#endif  // WFC_IO_UTIL_HPP_
