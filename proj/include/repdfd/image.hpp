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

#ifndef REPDFD_IMAGE_HPP_
#define REPDFD_IMAGE_HPP_

#include <cstddef>
#include <span>
#include <vector>

namespace repdfd {

// Dense H x W x 3 image, row-major with interleaved channels (HWC).
class Image {
 public:
  static constexpr int kChannels = 3;

  Image() = default;
  Image(int height, int width, double fill = 0.0);

  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& at(int row, int col, int ch) {
    return data_[index(row, col, ch)];
  }
  double at(int row, int col, int ch) const {
    return data_[index(row, col, ch)];
  }
  std::size_t index(int row, int col, int ch) const {
    return (static_cast<std::size_t>(row) * width_ + col) * kChannels + ch;
  }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  bool same_shape(const Image& other) const {
    return height_ == other.height_ && width_ == other.width_;
  }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<double> data_;
};

}  // namespace repdfd

#endif  // REPDFD_IMAGE_HPP_
