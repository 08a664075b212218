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

#include "repdfd/checkpoint.hpp"

#include <cstring>
#include <random>

#include "gtest/gtest.h"
#include "repdfd/error.hpp"
#include "test_util.hpp"

namespace repdfd {
namespace {

Checkpoint sample_checkpoint(bool with_projection) {
  std::mt19937_64 rng(21);
  Checkpoint c{testing::random_prompt(rng, 16, 12, 3, 0.5),
               TemplateConfig::parse("T2T3"), ResizeKernel::kBilinearHalfPixel,
               with_projection ? init_projection(8, 6, 4)
                               : FaceProjection::identity(6)};
  // Round to float32 so the round trip is exact.
  std::vector<double> v = c.prompt.border_values();
  for (double& x : v) x = static_cast<float>(x);
  c.prompt.set_border_values(v);
  return c;
}

void expect_same(const Checkpoint& a, const Checkpoint& b) {
  EXPECT_EQ(a.prompt, b.prompt);
  EXPECT_EQ(a.templates.id(), b.templates.id());
  EXPECT_EQ(a.kernel, b.kernel);
  EXPECT_EQ(a.projection.is_identity(), b.projection.is_identity());
  EXPECT_EQ(a.projection.digest(), b.projection.digest());
}

TEST(CheckpointTest, RoundTripInMemory) {
  for (bool proj : {false, true}) {
    const Checkpoint c = sample_checkpoint(proj);
    const auto bytes = encode_checkpoint(c);
    const Checkpoint d = decode_checkpoint(bytes);
    expect_same(c, d);
    EXPECT_EQ(encode_checkpoint(d), bytes);
    EXPECT_EQ(checkpoint_hash(c), checkpoint_hash(d));
  }
}

TEST(CheckpointTest, RoundTripOnDisk) {
  const auto dir = testing::scratch_dir("ckpt");
  const Checkpoint c = sample_checkpoint(true);
  save_checkpoint(dir / "a.rpdf", c);
  expect_same(c, load_checkpoint(dir / "a.rpdf"));
  EXPECT_THROW(load_checkpoint(dir / "missing.rpdf"), IoError);
  std::filesystem::remove_all(dir);
}

TEST(CheckpointTest, HashTracksContent) {
  Checkpoint a = sample_checkpoint(false);
  Checkpoint b = sample_checkpoint(false);
  std::vector<double> v = b.prompt.border_values();
  v[0] += 1.0;
  b.prompt.set_border_values(v);
  EXPECT_NE(checkpoint_hash(a), checkpoint_hash(b));
  b = sample_checkpoint(false);
  b.templates = TemplateConfig::parse("T0T3");
  EXPECT_NE(checkpoint_hash(a), checkpoint_hash(b));
}

TEST(CheckpointTest, RejectsCorruption) {
  const Checkpoint c = sample_checkpoint(false);
  const auto good = encode_checkpoint(c);

  auto bad_magic = good;
  bad_magic[0] = 'X';
  EXPECT_THROW(decode_checkpoint(bad_magic), CorruptCheckpointError);

  auto truncated = good;
  truncated.pop_back();
  EXPECT_THROW(decode_checkpoint(truncated), CorruptCheckpointError);

  auto trailing = good;
  trailing.push_back(0);
  EXPECT_THROW(decode_checkpoint(trailing), CorruptCheckpointError);

  EXPECT_THROW(decode_checkpoint({}), CorruptCheckpointError);

  // Nonzero value at the center pixel of the stored delta.
  auto interior = good;
  const std::size_t h = 16, w = 12;
  const std::size_t delta_start = good.size() - h * w * 3 * 4;
  const std::size_t center = ((h / 2) * w + w / 2) * 3;
  const float one = 1.0f;
  std::memcpy(&interior[delta_start + center * 4], &one, 4);
  EXPECT_THROW(decode_checkpoint(interior), CorruptCheckpointError);
}

}  // namespace
}  // namespace repdfd
