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

#include "repdfd/error.hpp"

namespace repdfd {

const char* category_name(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::kConfiguration:
      return "configuration";
    case ErrorCategory::kGeometry:
      return "geometry";
    case ErrorCategory::kInput:
      return "input";
    case ErrorCategory::kNumeric:
      return "numeric";
    case ErrorCategory::kContract:
      return "contract";
    case ErrorCategory::kCorruptCheckpoint:
      return "corrupt-checkpoint";
    case ErrorCategory::kUndefinedMetric:
      return "undefined-metric";
    case ErrorCategory::kIo:
      return "io";
  }
  return "unknown";
}

}  // namespace repdfd
