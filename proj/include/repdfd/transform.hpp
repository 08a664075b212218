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

#ifndef REPDFD_TRANSFORM_HPP_
#define REPDFD_TRANSFORM_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "repdfd/image.hpp"

namespace repdfd {

// H x W binary mask that is 1 on the border of width p and 0 inside.
class BorderMask {
 public:
  BorderMask() = default;
  BorderMask(int height, int width, int border);

  int height() const { return height_; }
  int width() const { return width_; }
  int border() const { return border_; }

  bool on_border(int row, int col) const {
    return row < border_ || row >= height_ - border_ || col < border_ ||
           col >= width_ - border_;
  }
  // Number of mask entries equal to 1.
  std::size_t count() const;

 private:
  int height_ = 0;
  int width_ = 0;
  int border_ = 0;
};

// Throws GeometryError unless p >= 0 and 2p < min(H, W).
void check_prompt_geometry(int height, int width, int border);

BorderMask build_border_mask(int height, int width, int border);

// Trainable coordinates of a border prompt over RGB: 6p(H+W) - 12p^2.
std::int64_t prompt_param_count(int height, int width, int border);

enum class ResizeKernel : std::uint8_t {
  // Bilinear, half-pixel centers (align_corners disabled), edge clamped.
  kBilinearHalfPixel = 0,
};

Image resize_bilinear(const Image& x, int out_height, int out_width);

// Shrinks x to (H - 2p) x (W - 2p), where H x W is x's own size.
Image resize_for_prompt(const Image& x, int border);

// Learnable additive border perturbation. Interior entries are zero at all
// times; every mutator enforces it.
class VisualPrompt {
 public:
  VisualPrompt() = default;
  // Zero-initialized prompt.
  VisualPrompt(int height, int width, int border);

  int height() const { return mask_.height(); }
  int width() const { return mask_.width(); }
  int border() const { return mask_.border(); }
  const BorderMask& mask() const { return mask_; }
  const Image& delta() const { return delta_; }

  // Flat HWC offsets of every border coordinate, in row-major order.
  const std::vector<std::size_t>& border_offsets() const {
    return border_offsets_;
  }
  std::size_t param_count() const { return border_offsets_.size(); }

  std::vector<double> border_values() const;
  void set_border_values(std::span<const double> values);
  // Replaces delta; throws ContractError on a nonzero interior entry.
  void set_delta(const Image& delta);

  friend bool operator==(const VisualPrompt& a, const VisualPrompt& b) {
    return a.border() == b.border() && a.delta_ == b.delta_;
  }

 private:
  BorderMask mask_;
  Image delta_;
  std::vector<std::size_t> border_offsets_;
};

struct PromptedImage {
  Image pixels;
  std::string source_id;
};

// Resize_p(x) centered in an H x W zero canvas, plus M_p * delta. x may be
// any size; it is resized to the prompt interior.
PromptedImage apply_input_transform(const Image& x, const VisualPrompt& vp,
                                    std::string source_id = {});

// Interior (H - 2p) x (W - 2p) slice of an H x W image.
Image interior_of(const Image& x, int border);

// Keeps only border coordinates of g (interior set to exactly zero).
Image mask_to_border(const Image& g, const BorderMask& mask);

}  // namespace repdfd

#endif  // REPDFD_TRANSFORM_HPP_
