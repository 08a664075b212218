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

#include "repdfd/transform.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "repdfd/error.hpp"

namespace repdfd {

void check_prompt_geometry(int height, int width, int border) {
  if (height <= 0 || width <= 0 || border < 0 ||
      2 * border >= std::min(height, width)) {
    std::ostringstream os;
    os << "prompt geometry: border " << border << " invalid for " << height
       << "x" << width << " (need 0 <= p and 2p < min(H, W))";
    throw GeometryError(os.str());
  }
}

BorderMask::BorderMask(int height, int width, int border)
    : height_(height), width_(width), border_(border) {
  check_prompt_geometry(height, width, border);
}

std::size_t BorderMask::count() const {
  std::size_t n = 0;
  for (int r = 0; r < height_; ++r)
    for (int c = 0; c < width_; ++c) n += on_border(r, c) ? 1 : 0;
  return n;
}

BorderMask build_border_mask(int height, int width, int border) {
  return BorderMask(height, width, border);
}

std::int64_t prompt_param_count(int height, int width, int border) {
  check_prompt_geometry(height, width, border);
  const std::int64_t p = border;
  return 6 * p * (std::int64_t{height} + width) - 12 * p * p;
}

Image resize_bilinear(const Image& x, int out_height, int out_width) {
  if (x.empty()) throw InputError("resize: empty image");
  if (out_height <= 0 || out_width <= 0)
    throw GeometryError("resize: output size must be positive");
  if (out_height == x.height() && out_width == x.width()) return x;

  const double sy = static_cast<double>(x.height()) / out_height;
  const double sx = static_cast<double>(x.width()) / out_width;
  const int max_r = x.height() - 1;
  const int max_c = x.width() - 1;

  Image out(out_height, out_width);
  for (int r = 0; r < out_height; ++r) {
    const double fy = std::clamp((r + 0.5) * sy - 0.5, 0.0, double(max_r));
    const int r0 = static_cast<int>(fy);
    const int r1 = std::min(r0 + 1, max_r);
    const double wy = fy - r0;
    for (int c = 0; c < out_width; ++c) {
      const double fx = std::clamp((c + 0.5) * sx - 0.5, 0.0, double(max_c));
      const int c0 = static_cast<int>(fx);
      const int c1 = std::min(c0 + 1, max_c);
      const double wx = fx - c0;
      for (int ch = 0; ch < Image::kChannels; ++ch) {
        // Lerp form keeps constant regions exactly constant.
        const double a = x.at(r0, c0, ch), b = x.at(r0, c1, ch);
        const double d = x.at(r1, c0, ch), e = x.at(r1, c1, ch);
        const double top = a + wx * (b - a);
        const double bottom = d + wx * (e - d);
        out.at(r, c, ch) = top + wy * (bottom - top);
      }
    }
  }
  return out;
}

Image resize_for_prompt(const Image& x, int border) {
  check_prompt_geometry(x.height(), x.width(), border);
  return resize_bilinear(x, x.height() - 2 * border, x.width() - 2 * border);
}

VisualPrompt::VisualPrompt(int height, int width, int border)
    : mask_(height, width, border), delta_(height, width) {
  for (int r = 0; r < height; ++r)
    for (int c = 0; c < width; ++c)
      if (mask_.on_border(r, c))
        for (int ch = 0; ch < Image::kChannels; ++ch)
          border_offsets_.push_back(delta_.index(r, c, ch));
}

std::vector<double> VisualPrompt::border_values() const {
  std::vector<double> out;
  out.reserve(border_offsets_.size());
  auto d = delta_.values();
  for (std::size_t off : border_offsets_) out.push_back(d[off]);
  return out;
}

void VisualPrompt::set_border_values(std::span<const double> values) {
  if (values.size() != border_offsets_.size())
    throw ContractError("visual prompt: expected " +
                        std::to_string(border_offsets_.size()) +
                        " border values, got " + std::to_string(values.size()));
  auto d = delta_.values();
  for (std::size_t k = 0; k < values.size(); ++k) d[border_offsets_[k]] = values[k];
}

void VisualPrompt::set_delta(const Image& delta) {
  if (!delta.same_shape(delta_))
    throw GeometryError("visual prompt: delta shape mismatch");
  for (int r = 0; r < height(); ++r)
    for (int c = 0; c < width(); ++c)
      if (!mask_.on_border(r, c))
        for (int ch = 0; ch < Image::kChannels; ++ch)
          if (delta.at(r, c, ch) != 0.0)
            throw ContractError("visual prompt: nonzero interior delta at (" +
                                std::to_string(r) + ", " + std::to_string(c) +
                                ")");
  delta_ = delta;
}

PromptedImage apply_input_transform(const Image& x, const VisualPrompt& vp,
                                    std::string source_id) {
  const int p = vp.border();
  Image inner = resize_bilinear(x, vp.height() - 2 * p, vp.width() - 2 * p);
  PromptedImage out{vp.delta(), std::move(source_id)};
  for (int r = 0; r < inner.height(); ++r)
    for (int c = 0; c < inner.width(); ++c)
      for (int ch = 0; ch < Image::kChannels; ++ch)
        out.pixels.at(r + p, c + p, ch) = inner.at(r, c, ch);
  return out;
}

Image interior_of(const Image& x, int border) {
  check_prompt_geometry(x.height(), x.width(), border);
  Image out(x.height() - 2 * border, x.width() - 2 * border);
  for (int r = 0; r < out.height(); ++r)
    for (int c = 0; c < out.width(); ++c)
      for (int ch = 0; ch < Image::kChannels; ++ch)
        out.at(r, c, ch) = x.at(r + border, c + border, ch);
  return out;
}

Image mask_to_border(const Image& g, const BorderMask& mask) {
  if (g.height() != mask.height() || g.width() != mask.width())
    throw GeometryError("mask_to_border: shape mismatch");
  Image out(g.height(), g.width());
  for (int r = 0; r < g.height(); ++r)
    for (int c = 0; c < g.width(); ++c)
      if (mask.on_border(r, c))
        for (int ch = 0; ch < Image::kChannels; ++ch)
          out.at(r, c, ch) = g.at(r, c, ch);
  return out;
}

}  // namespace repdfd
