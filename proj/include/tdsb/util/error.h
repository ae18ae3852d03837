// tdsb/util/error.h

// Copyright 2026  The tdspkbeam Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef TDSB_UTIL_ERROR_H_
#define TDSB_UTIL_ERROR_H_

#include <stdexcept>
#include <string>

namespace tdsb {

/// Coarse error category. The CLI maps each kind onto an exit code.
enum class ErrorKind {
  kUsage,    // bad flags, bad config keys, unsupported combinations
  kData,     // unreadable / malformed files, precondition failures on data
  kShape,    // tensor shape mismatches
  kNumeric,  // NaN losses, failed gradient checks
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string &msg)
      : std::runtime_error(msg), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

struct UsageError : Error {
  explicit UsageError(const std::string &msg) : Error(ErrorKind::kUsage, msg) {}
};
struct DataError : Error {
  explicit DataError(const std::string &msg) : Error(ErrorKind::kData, msg) {}
};
struct ShapeError : Error {
  explicit ShapeError(const std::string &msg) : Error(ErrorKind::kShape, msg) {}
};
struct NumericError : Error {
  explicit NumericError(const std::string &msg)
      : Error(ErrorKind::kNumeric, msg) {}
};

/// Exit code convention of the command-line tool:
/// 0 success, 2 usage, 3 data (and shape), 4 numeric failure.
int ExitCodeFor(ErrorKind kind);

}  // namespace tdsb

#endif  // TDSB_UTIL_ERROR_H_
