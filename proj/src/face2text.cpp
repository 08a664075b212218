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

#include "repdfd/face2text.hpp"

#include <random>
#include <sstream>

#include "repdfd/digest.hpp"
#include "repdfd/error.hpp"
#include "repdfd/transform.hpp"

namespace repdfd {

std::string_view template_text(Template t) {
  switch (t) {
    case Template::kT0:
      return "A real photo of person";
    case Template::kT1:
      return "A fake photo of person";
    case Template::kT2:
      return "A real photo of [ID] person";
    case Template::kT3:
      return "A fake photo of [ID] person";
  }
  throw ConfigError("unknown template");
}

bool template_has_id(Template t) {
  return t == Template::kT2 || t == Template::kT3;
}

namespace {

struct ConfigEntry {
  TemplateConfigId id;
  std::string_view name;
  Template real;
  Template fake;
};

constexpr ConfigEntry kConfigs[] = {
    {TemplateConfigId::kT0T1, "T0T1", Template::kT0, Template::kT1},
    {TemplateConfigId::kT2T1, "T2T1", Template::kT2, Template::kT1},
    {TemplateConfigId::kT2T3, "T2T3", Template::kT2, Template::kT3},
    {TemplateConfigId::kT0T3, "T0T3", Template::kT0, Template::kT3},
    {TemplateConfigId::kRand, "RAND", Template::kT0, Template::kT1},
};

const ConfigEntry& entry(TemplateConfigId id) {
  for (const auto& e : kConfigs)
    if (e.id == id) return e;
  throw ConfigError("unknown template config id " +
                    std::to_string(static_cast<int>(id)));
}

}  // namespace

TemplateConfig TemplateConfig::parse(std::string_view name) {
  for (const auto& e : kConfigs)
    if (e.name == name) return TemplateConfig(e.id);
  throw ConfigError("unknown template config '" + std::string(name) +
                    "' (expected T0T1, T2T1, T2T3, T0T3 or RAND)");
}

TemplateConfig TemplateConfig::from_byte(std::uint8_t id) {
  if (id > static_cast<std::uint8_t>(TemplateConfigId::kRand))
    throw ConfigError("unknown template config id " + std::to_string(id));
  return TemplateConfig(static_cast<TemplateConfigId>(id));
}

const std::array<TemplateConfigId, 5>& TemplateConfig::all_ids() {
  static const std::array<TemplateConfigId, 5> ids = {
      TemplateConfigId::kT0T1, TemplateConfigId::kT2T1,
      TemplateConfigId::kT2T3, TemplateConfigId::kT0T3,
      TemplateConfigId::kRand};
  return ids;
}

std::string_view TemplateConfig::name() const { return entry(id_).name; }
Template TemplateConfig::real_template() const { return entry(id_).real; }
Template TemplateConfig::fake_template() const { return entry(id_).fake; }

TokenEmbeddingSequence template_sequence(Template t, const Vocabulary& vocab) {
  TokenEmbeddingSequence seq;
  std::istringstream words{std::string(template_text(t))};
  std::string w;
  while (words >> w) {
    if (w == Vocabulary::kIdPlaceholder) {
      seq.id_slot = seq.embeddings.size();
      seq.embeddings.push_back(Vector::Zero(vocab.dim()));
    } else {
      seq.embeddings.push_back(vocab.lookup(w));
    }
  }
  return seq;
}

TemplatePair build_template_sequences(const TemplateConfig& cfg,
                                      const Vocabulary& vocab) {
  if (!cfg.is_random()) {
    return {template_sequence(cfg.real_template(), vocab),
            template_sequence(cfg.fake_template(), vocab)};
  }
  const std::size_t length =
      template_sequence(Template::kT0, vocab).embeddings.size();
  std::mt19937_64 rng(cfg.random_seed());
  std::normal_distribution<double> n(0.0, 1.0);
  auto draw = [&] {
    TokenEmbeddingSequence seq;
    for (std::size_t i = 0; i < length; ++i) {
      Vector e(vocab.dim());
      for (int k = 0; k < vocab.dim(); ++k)
        e(k) = static_cast<double>(static_cast<float>(n(rng)));
      seq.embeddings.push_back(std::move(e));
    }
    return seq;
  };
  TemplatePair pair;
  pair.real = draw();
  pair.fake = draw();
  return pair;
}

FaceProjection FaceProjection::identity(int dim) {
  if (dim <= 0) throw ConfigError("projection: dims must be positive");
  FaceProjection p;
  p.identity_ = true;
  p.face_dim_ = p.token_dim_ = dim;
  return p;
}

FaceProjection FaceProjection::from_matrix(Matrix matrix, std::uint64_t seed) {
  if (matrix.rows() <= 0 || matrix.cols() <= 0)
    throw ConfigError("projection: dims must be positive");
  FaceProjection p;
  p.identity_ = false;
  p.face_dim_ = static_cast<int>(matrix.rows());
  p.token_dim_ = static_cast<int>(matrix.cols());
  p.seed_ = seed;
  p.matrix_ = std::move(matrix);
  return p;
}

std::string FaceProjection::digest() const {
  Sha256 h;
  h.update(static_cast<std::uint64_t>(identity_));
  h.update(static_cast<std::uint64_t>(face_dim_));
  h.update(static_cast<std::uint64_t>(token_dim_));
  if (!identity_) h.update(matrix_);
  return h.hex();
}

FaceProjection init_projection(int face_dim, int token_dim,
                               std::uint64_t seed) {
  if (face_dim <= 0 || token_dim <= 0)
    throw ConfigError("projection: dims must be positive");
  if (face_dim == token_dim) return FaceProjection::identity(face_dim);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0 / token_dim);
  Matrix m(face_dim, token_dim);
  for (int r = 0; r < face_dim; ++r)
    for (int c = 0; c < token_dim; ++c)
      m(r, c) = static_cast<double>(static_cast<float>(n(rng)));
  return FaceProjection::from_matrix(std::move(m), seed);
}

Vector project_face(const FaceProjection& proj, const Vector& face_embedding) {
  if (face_embedding.size() != proj.face_dim())
    throw InputError("project_face: embedding has dim " +
                     std::to_string(face_embedding.size()) + ", expected " +
                     std::to_string(proj.face_dim()));
  if (proj.is_identity()) return face_embedding;
  return proj.matrix().transpose() * face_embedding;
}

TokenEmbeddingSequence substitute_id(TokenEmbeddingSequence seq,
                                     const Vector& s_star) {
  if (!seq.id_slot)
    throw ContractError("substitute_id: sequence has no [ID] slot");
  if (*seq.id_slot >= seq.size())
    throw ContractError("substitute_id: id_slot out of range");
  if (s_star.size() != seq.embeddings[*seq.id_slot].size())
    throw InputError("substitute_id: S* has wrong dim");
  seq.embeddings[*seq.id_slot] = s_star;
  return seq;
}

Image face_encoder_input(const FrozenEncoders& enc, const Image& x) {
  return resize_bilinear(x, enc.input_height(), enc.input_width());
}

TextFeatureProvider::TextFeatureProvider(const FrozenEncoders& enc,
                                         TemplateConfig cfg,
                                         const FaceProjection& proj)
    : enc_(enc),
      cfg_(cfg),
      proj_(proj),
      sequences_(build_template_sequences(cfg, enc.vocabulary())) {
  if (proj.face_dim() != enc.face_dim() || proj.token_dim() != enc.token_dim())
    throw ConfigError("projection " + std::to_string(proj.face_dim()) + "x" +
                      std::to_string(proj.token_dim()) +
                      " does not match backend dims " +
                      std::to_string(enc.face_dim()) + "x" +
                      std::to_string(enc.token_dim()));
  if (!sequences_.real.id_slot)
    cached_real_ = enc_.encode_text(sequences_.real);
  if (!sequences_.fake.id_slot)
    cached_fake_ = enc_.encode_text(sequences_.fake);
}

Vector TextFeatureProvider::encode_side(const TokenEmbeddingSequence& seq,
                                        const Image& x) const {
  if (!seq.id_slot) return enc_.encode_text(seq);
  const Vector face = enc_.encode_face(face_encoder_input(enc_, x));
  return enc_.encode_text(substitute_id(seq, project_face(proj_, face)));
}

ClassTextFeatures TextFeatureProvider::features(const Image& x) const {
  return {cached_real_ ? *cached_real_ : encode_side(sequences_.real, x),
          cached_fake_ ? *cached_fake_ : encode_side(sequences_.fake, x)};
}

ClassTextFeatures TextFeatureProvider::recompute(const Image& x) const {
  return {encode_side(sequences_.real, x), encode_side(sequences_.fake, x)};
}

bool TextFeatureProvider::image_dependent() const {
  return !cached_real_ || !cached_fake_;
}

ClassTextFeatures class_text_features(const FrozenEncoders& enc,
                                      const TemplateConfig& cfg,
                                      const FaceProjection& proj,
                                      const Image& x) {
  return TextFeatureProvider(enc, cfg, proj).features(x);
}

}  // namespace repdfd
