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

#include "repdfd/image.hpp"

#include "repdfd/error.hpp"

namespace repdfd {

Image::Image(int height, int width, double fill)
    : height_(height), width_(width) {
  if (height < 0 || width < 0) throw InputError("image: negative size");
  data_.assign(static_cast<std::size_t>(height) * width * kChannels, fill);
}

}  // namespace repdfd
