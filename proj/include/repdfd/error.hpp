// Copyright 2026 The repdfd Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef REPDFD_ERROR_HPP_
#define REPDFD_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace repdfd {

// Every error raised by the library carries a machine-readable category so
// the CLI can report it and pick an exit code.
enum class ErrorCategory {
  kConfiguration,
  kGeometry,
  kInput,
  kNumeric,
  kContract,
  kCorruptCheckpoint,
  kUndefinedMetric,
  kIo,
};

const char* category_name(ErrorCategory c);

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}
  ErrorCategory category() const { return category_; }

 private:
  ErrorCategory category_;
};

#define REPDFD_DEFINE_ERROR(Name, Category)                            \
  class Name : public Error {                                          \
   public:                                                             \
    explicit Name(const std::string& what) : Error(Category, what) {}  \
  };

REPDFD_DEFINE_ERROR(ConfigError, ErrorCategory::kConfiguration)
REPDFD_DEFINE_ERROR(GeometryError, ErrorCategory::kGeometry)
REPDFD_DEFINE_ERROR(InputError, ErrorCategory::kInput)
REPDFD_DEFINE_ERROR(NumericError, ErrorCategory::kNumeric)
REPDFD_DEFINE_ERROR(ContractError, ErrorCategory::kContract)
REPDFD_DEFINE_ERROR(CorruptCheckpointError, ErrorCategory::kCorruptCheckpoint)
REPDFD_DEFINE_ERROR(UndefinedMetricError, ErrorCategory::kUndefinedMetric)
REPDFD_DEFINE_ERROR(IoError, ErrorCategory::kIo)

#undef REPDFD_DEFINE_ERROR

}  // namespace repdfd

#endif  // REPDFD_ERROR_HPP_
