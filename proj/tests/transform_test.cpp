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

#include <random>

#include "gtest/gtest.h"
#include "repdfd/error.hpp"
#include "test_util.hpp"

namespace repdfd {
namespace {

using testing::random_image;

TEST(BorderMaskTest, FourByFourRing) {
  const BorderMask m = build_border_mask(4, 4, 1);
  EXPECT_EQ(m.count(), 12u);
  for (int r = 1; r <= 2; ++r)
    for (int c = 1; c <= 2; ++c) EXPECT_FALSE(m.on_border(r, c));
  EXPECT_TRUE(m.on_border(0, 2));
  EXPECT_TRUE(m.on_border(3, 3));
}

TEST(BorderMaskTest, FullSizeInput) {
  EXPECT_EQ(build_border_mask(224, 224, 34).count(), 25840u);
  EXPECT_EQ(224 * 224 - 156 * 156, 25840);
}

TEST(BorderMaskTest, ZeroBorderIsEmpty) {
  EXPECT_EQ(build_border_mask(10, 12, 0).count(), 0u);
}

TEST(BorderMaskTest, InvalidGeometry) {
  EXPECT_THROW(build_border_mask(4, 4, 2), GeometryError);
  EXPECT_THROW(build_border_mask(10, 4, 2), GeometryError);
  EXPECT_THROW(build_border_mask(10, 10, -1), GeometryError);
  EXPECT_THROW(prompt_param_count(224, 224, 112), GeometryError);
}

TEST(ParamCountTest, ReportedValues) {
  EXPECT_EQ(prompt_param_count(224, 224, 34), 77520);
  EXPECT_EQ(prompt_param_count(224, 224, 12), 30528);
  EXPECT_EQ(prompt_param_count(224, 224, 0), 0);
  EXPECT_EQ(prompt_param_count(224, 224, 78), 136656);
}

TEST(ParamCountTest, MatchesMaskOverRandomGeometries) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> side(1, 96);
  for (int trial = 0; trial < 200; ++trial) {
    const int h = side(rng), w = side(rng);
    const int max_p = (std::min(h, w) - 1) / 2;
    const int p = std::uniform_int_distribution<int>(0, max_p)(rng);
    const auto count = static_cast<std::int64_t>(build_border_mask(h, w, p).count());
    EXPECT_EQ(prompt_param_count(h, w, p), 3 * count)
        << h << "x" << w << " p=" << p;
    EXPECT_EQ(VisualPrompt(h, w, p).param_count(),
              static_cast<std::size_t>(3 * count));
  }
}

TEST(ResizeTest, ZeroBorderIsIdentity) {
  std::mt19937_64 rng(2);
  const Image x = random_image(rng, 9, 7);
  EXPECT_EQ(resize_for_prompt(x, 0), x);
}

TEST(ResizeTest, ConstantStaysConstant) {
  const Image x(20, 30, 0.37);
  const Image y = resize_for_prompt(x, 3);
  EXPECT_EQ(y.height(), 14);
  EXPECT_EQ(y.width(), 24);
  for (double v : y.values()) EXPECT_EQ(v, 0.37);
}

TEST(ResizeTest, FullSizeGeometry) {
  const Image y = resize_for_prompt(Image(224, 224), 34);
  EXPECT_EQ(y.height(), 156);
  EXPECT_EQ(y.width(), 156);
  EXPECT_THROW(resize_for_prompt(Image(8, 8), 4), GeometryError);
}

TEST(ResizeTest, HalfPixelDownsampleAveragesBlocks) {
  Image x(4, 4);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c)
      for (int ch = 0; ch < 3; ++ch) x.at(r, c, ch) = r * 4 + c;
  const Image y = resize_bilinear(x, 2, 2);
  EXPECT_DOUBLE_EQ(y.at(0, 0, 0), 2.5);
  EXPECT_DOUBLE_EQ(y.at(0, 1, 1), 4.5);
  EXPECT_DOUBLE_EQ(y.at(1, 0, 2), 10.5);
  EXPECT_DOUBLE_EQ(y.at(1, 1, 0), 12.5);
}

TEST(InputTransformTest, ZeroPromptGivesCenteredImageWithZeroBorder) {
  std::mt19937_64 rng(5);
  const Image x = random_image(rng, 50, 40);
  const VisualPrompt vp(32, 32, 6);
  const Image out = apply_input_transform(x, vp).pixels;
  const BorderMask& m = vp.mask();
  for (int r = 0; r < 32; ++r)
    for (int c = 0; c < 32; ++c)
      if (m.on_border(r, c))
        for (int ch = 0; ch < 3; ++ch) EXPECT_EQ(out.at(r, c, ch), 0.0);
  EXPECT_EQ(interior_of(out, 6), resize_bilinear(x, 20, 20));
}

TEST(InputTransformTest, HandComputedFourByFour) {
  Image x(4, 4);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c)
      for (int ch = 0; ch < 3; ++ch) x.at(r, c, ch) = r * 4 + c;
  VisualPrompt vp(4, 4, 1);
  vp.set_border_values(std::vector<double>(vp.param_count(), 1.0));
  const Image out = apply_input_transform(x, vp, "s0").pixels;

  const double center[2][2] = {{2.5, 4.5}, {10.5, 12.5}};
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c)
      for (int ch = 0; ch < 3; ++ch) {
        const bool inner = r >= 1 && r <= 2 && c >= 1 && c <= 2;
        EXPECT_EQ(out.at(r, c, ch), inner ? center[r - 1][c - 1] : 1.0);
      }
}

TEST(InputTransformTest, InteriorPreservedAndLinearInDelta) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const Image x = random_image(rng, 24 + trial, 28);
    const VisualPrompt d1 = testing::random_prompt(rng, 16, 16, 3, 1.0);
    const VisualPrompt d2 = testing::random_prompt(rng, 16, 16, 3, 1.0);
    const double a = 0.7 - 0.1 * trial, b = 1.3;

    VisualPrompt mix(16, 16, 3);
    std::vector<double> v1 = d1.border_values(), v2 = d2.border_values(), v;
    for (std::size_t k = 0; k < v1.size(); ++k) v.push_back(a * v1[k] + b * v2[k]);
    mix.set_border_values(v);

    const Image t_mix = apply_input_transform(x, mix).pixels;
    const Image t1 = apply_input_transform(x, d1).pixels;
    const Image t2 = apply_input_transform(x, d2).pixels;
    const Image t0 = apply_input_transform(x, VisualPrompt(16, 16, 3)).pixels;
    EXPECT_EQ(interior_of(t1, 3), resize_bilinear(x, 10, 10));
    for (std::size_t i = 0; i < t_mix.size(); ++i) {
      const double rhs = a * t1.values()[i] + b * t2.values()[i] -
                         (a + b - 1.0) * t0.values()[i];
      EXPECT_NEAR(t_mix.values()[i], rhs, 1e-10);
    }
  }
}

TEST(VisualPromptTest, InteriorCannotBeSet) {
  VisualPrompt vp(8, 8, 2);
  Image d(8, 8);
  d.at(0, 0, 1) = 3.0;
  vp.set_delta(d);
  EXPECT_EQ(vp.delta().at(0, 0, 1), 3.0);
  d.at(4, 4, 0) = 1.0;
  EXPECT_THROW(vp.set_delta(d), ContractError);
  EXPECT_THROW(vp.set_border_values(std::vector<double>(3)), ContractError);
  EXPECT_THROW(vp.set_delta(Image(8, 9)), GeometryError);
}

}  // namespace
}  // namespace repdfd
