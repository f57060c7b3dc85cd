// include/cascade/common.h

// Copyright 2026  Cascade ASR Project Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CASCADE_COMMON_H_
#define CASCADE_COMMON_H_

#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>

namespace cascade {

// Caller violated a documented precondition (maps to CLI exit code 1).
class UsageError : public std::runtime_error {
 public:
  explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

// Runtime or numeric failure: NaN losses, corrupt files, failed I/O
// (maps to CLI exit code 2).
class RuntimeFailure : public std::runtime_error {
 public:
  explicit RuntimeFailure(const std::string& msg) : std::runtime_error(msg) {}
};

namespace internal {
inline void FormatTo(std::ostringstream&) {}
template <typename T, typename... Rest>
void FormatTo(std::ostringstream& os, const T& v, const Rest&... rest) {
  os << v;
  FormatTo(os, rest...);
}
}  // namespace internal

template <typename... Args>
std::string StrCat(const Args&... args) {
  std::ostringstream os;
  internal::FormatTo(os, args...);
  return os.str();
}

#define CASCADE_CHECK_USAGE(cond, ...)                          \
  do {                                                          \
    if (!(cond)) throw ::cascade::UsageError(                   \
        ::cascade::StrCat("usage error: ", __VA_ARGS__));       \
  } while (0)

#define CASCADE_CHECK_RUNTIME(cond, ...)                        \
  do {                                                          \
    if (!(cond)) throw ::cascade::RuntimeFailure(               \
        ::cascade::StrCat(__VA_ARGS__));                        \
  } while (0)

}  // namespace cascade

#endif  // CASCADE_COMMON_H_
