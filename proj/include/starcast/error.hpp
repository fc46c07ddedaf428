// Copyright 2026 The StarCast Authors
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
#include <string_view>

namespace starcast {

enum class ErrorCode {
  kInvalidArgument,
  kPolicySyntax,
  kPolicyNotSatisfied,
  kAuthenticationFailure,
  kEpochMismatch,
  kMalformedInput,
  kVersionUnsupported,
  kUnsupportedLevel,
  kRngFailure,
  kNotFound,
  kAlreadyExists,
  kIo,
  kNetwork,
};

std::string_view error_code_name(ErrorCode code);

// Every failure surfaced by the library is an Error carrying a code; callers
// (the CLI in particular) dispatch on code() rather than on message text.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace starcast
