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

#ifndef WFC_TOOLS_SELFTEST_HPP_
#define WFC_TOOLS_SELFTEST_HPP_

#include <cstdint>
#include <ostream>

namespace wfc::tools {

// Runs the oracle-backed invariant checks and prints one line per check.
// Returns true when every check passes.
bool RunSelfTest(std::ostream& out, std::uint64_t seed);

}  // namespace wfc::tools

#endif  // WFC_TOOLS_SELFTEST_HPP_
