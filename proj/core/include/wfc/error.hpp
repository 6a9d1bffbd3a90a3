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

#ifndef WFC_ERROR_HPP_
#define WFC_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace wfc {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid hyperparameters, unknown config keys, unsupported settings.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Matrix or parameter shapes that do not chain.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Malformed input data: bad files, labels out of range, unnormalized tables.
class DataError : public Error {
 public:
  using Error::Error;
};

// A fairness metric whose conditioning cell is empty.
class UndefinedMetricError : public Error {
 public:
  using Error::Error;
};

// Training diverged or some other failure happened at run time.
class RuntimeFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace wfc

#endif  // WFC_ERROR_HPP_
