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

#ifndef REPDFD_CHECKPOINT_HPP_
#define REPDFD_CHECKPOINT_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "repdfd/face2text.hpp"
#include "repdfd/transform.hpp"

namespace repdfd {

// Binary prompt checkpoint. Layout, all integers little-endian:
//
//   "RPDF" | version u16 | H u16 | W u16 | p u16 | template id u8 |
//   resize kernel u8 | D_face u16 | D_tok u16 |
//   projection f32[D_face * D_tok] row-major (absent when D_face == D_tok) |
//   delta f32[H * W * 3] row-major HWC
struct Checkpoint {
  static constexpr std::uint16_t kVersion = 1;

  VisualPrompt prompt;
  TemplateConfig templates;
  ResizeKernel kernel = ResizeKernel::kBilinearHalfPixel;
  FaceProjection projection = FaceProjection::identity(1);
};

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt);
// Throws CorruptCheckpointError on bad magic, truncation, trailing bytes,
// an unknown id, or a nonzero interior delta entry.
Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// SHA-256 of the encoded bytes.
std::string checkpoint_hash(const Checkpoint& ckpt);

}  // namespace repdfd

#endif  // REPDFD_CHECKPOINT_HPP_
