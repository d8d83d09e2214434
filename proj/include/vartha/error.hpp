/* Copyright 2026 The Vartha Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef VARTHA_ERROR_HPP_
#define VARTHA_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace vartha {

// Failure categories surfaced across module boundaries. The CLI and the HTTP
// service map these onto exit codes and status codes respectively.
enum class ErrorCode {
  kMissingColumn,
  kBadLabel,
  kEmptyHeadline,
  kMalformedRow,
  kTooFewRecords,
  kEmptyCorpus,
  kDecodeError,
  kNotAnImage,
  kExtractorUnavailable,
  kCacheMiss,
  kShapeMismatch,
  kEmptySplit,
  kNonFiniteLoss,
  kCorruptBundle,
  kLengthMismatch,
  kEmptyMatrix,
  kImageFetchFailed,
  kModelUnavailable,
  kInvalidArgument,
  kIo,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace vartha

#endif  // VARTHA_ERROR_HPP_
