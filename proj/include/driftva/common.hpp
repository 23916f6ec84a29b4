// Copyright 2026 The driftva Authors
//
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

#pragma once

#include <stdexcept>
#include <string>

namespace driftva {

inline constexpr const char* kToolVersion = "driftva 0.1.0";

/// Error taxonomy mapped onto CLI exit codes.
enum class ErrorKind {
  usage = 2,     // bad flags, unreadable config
  io = 3,        // missing/corrupt files, network failure
  data = 4,      // schema violations, empty vocabularies, bad labels
  internal = 5,  // invariants broken inside the library
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }
  int exit_code() const noexcept { return static_cast<int>(kind_); }

 private:
  ErrorKind kind_;
};

struct UsageError : Error {
  explicit UsageError(const std::string& what) : Error(ErrorKind::usage, what) {}
};

struct IoError : Error {
  /// retryable: transient condition (network); re-running may succeed.
  explicit IoError(const std::string& what, bool retryable = false)
      : Error(ErrorKind::io, what), retryable_(retryable) {}
  bool retryable() const noexcept { return retryable_; }

 private:
  bool retryable_;
};

struct DataError : Error {
  explicit DataError(const std::string& what) : Error(ErrorKind::data, what) {}
};

struct InternalError : Error {
  explicit InternalError(const std::string& what) : Error(ErrorKind::internal, what) {}
};

}  // namespace driftva
