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

#ifndef REPDFD_FACE2TEXT_HPP_
#define REPDFD_FACE2TEXT_HPP_

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "repdfd/encoders.hpp"
#include "repdfd/image.hpp"

namespace repdfd {

// Class text templates, verbatim.
enum class Template : std::uint8_t { kT0, kT1, kT2, kT3 };

std::string_view template_text(Template t);
bool template_has_id(Template t);

// Serialized as a single byte in checkpoints; values are stable.
enum class TemplateConfigId : std::uint8_t {
  kT0T1 = 0,
  kT2T1 = 1,
  kT2T3 = 2,
  kT0T3 = 3,
  kRand = 4,
};

class TemplateConfig {
 public:
  static constexpr std::uint64_t kDefaultRandomSeed = 0x5eedULL;

  TemplateConfig() = default;
  explicit TemplateConfig(TemplateConfigId id,
                          std::uint64_t random_seed = kDefaultRandomSeed)
      : id_(id), random_seed_(random_seed) {}

  // "T0T1", "T2T1", "T2T3", "T0T3" or "RAND"; anything else is a
  // configuration error.
  static TemplateConfig parse(std::string_view name);
  static TemplateConfig from_byte(std::uint8_t id);
  static const std::array<TemplateConfigId, 5>& all_ids();

  TemplateConfigId id() const { return id_; }
  std::string_view name() const;
  bool is_random() const { return id_ == TemplateConfigId::kRand; }
  // Templates for each class; meaningless for RAND.
  Template real_template() const;
  Template fake_template() const;
  std::uint64_t random_seed() const { return random_seed_; }

  friend bool operator==(const TemplateConfig&, const TemplateConfig&) =
      default;

 private:
  TemplateConfigId id_ = TemplateConfigId::kT0T3;
  std::uint64_t random_seed_ = kDefaultRandomSeed;
};

struct TemplatePair {
  TokenEmbeddingSequence real;
  TokenEmbeddingSequence fake;
};

// Whitespace-tokenizes the template and looks every word up; [ID] becomes a
// zero placeholder embedding at id_slot.
TokenEmbeddingSequence template_sequence(Template t, const Vocabulary& vocab);

// RAND yields two frozen Gaussian sequences with the T0/T1 token count.
TemplatePair build_template_sequences(const TemplateConfig& cfg,
                                      const Vocabulary& vocab);

// f_map: a frozen D_face -> D_tok linear map, or the identity when the
// dimensions already agree.
class FaceProjection {
 public:
  static FaceProjection identity(int dim);
  // matrix is D_face x D_tok; output_j = sum_i e_i * matrix(i, j).
  static FaceProjection from_matrix(Matrix matrix, std::uint64_t seed = 0);

  bool is_identity() const { return identity_; }
  int face_dim() const { return face_dim_; }
  int token_dim() const { return token_dim_; }
  const Matrix& matrix() const { return matrix_; }
  std::uint64_t seed() const { return seed_; }
  std::string digest() const;

 private:
  FaceProjection() = default;
  bool identity_ = true;
  int face_dim_ = 0;
  int token_dim_ = 0;
  std::uint64_t seed_ = 0;
  Matrix matrix_;
};

// Identity when dims agree, else N(0, (1/D_tok)^2) entries rounded to
// float32 so the checkpoint copy is exact.
FaceProjection init_projection(int face_dim, int token_dim,
                               std::uint64_t seed);

Vector project_face(const FaceProjection& proj, const Vector& face_embedding);

TokenEmbeddingSequence substitute_id(TokenEmbeddingSequence seq,
                                     const Vector& s_star);

struct ClassTextFeatures {
  Vector real;
  Vector fake;
};

// Image the face encoder sees: x resized (full frame) to the backend input.
Image face_encoder_input(const FrozenEncoders& enc, const Image& x);

// Computes w_real / w_fake. Sides without an [ID] slot are encoded once at
// construction and reused; sides with one are re-encoded per image from the
// face embedding of the raw (unprompted) image.
class TextFeatureProvider {
 public:
  TextFeatureProvider(const FrozenEncoders& enc, TemplateConfig cfg,
                      const FaceProjection& proj);

  ClassTextFeatures features(const Image& x) const;
  // Uncached recomputation, used to check the cache.
  ClassTextFeatures recompute(const Image& x) const;
  bool image_dependent() const;

  const TemplateConfig& config() const { return cfg_; }
  const FaceProjection& projection() const { return proj_; }
  const FrozenEncoders& encoders() const { return enc_; }

 private:
  Vector encode_side(const TokenEmbeddingSequence& seq, const Image& x) const;

  const FrozenEncoders& enc_;
  TemplateConfig cfg_;
  FaceProjection proj_;
  TemplatePair sequences_;
  std::optional<Vector> cached_real_;
  std::optional<Vector> cached_fake_;
};

ClassTextFeatures class_text_features(const FrozenEncoders& enc,
                                      const TemplateConfig& cfg,
                                      const FaceProjection& proj,
                                      const Image& x);

}  // namespace repdfd

#endif  // REPDFD_FACE2TEXT_HPP_
