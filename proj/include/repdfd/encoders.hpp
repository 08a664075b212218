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

#ifndef REPDFD_ENCODERS_HPP_
#define REPDFD_ENCODERS_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "repdfd/image.hpp"

namespace repdfd {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Word embeddings fed to the text encoder, with the position of the [ID]
// placeholder when the template has one.
struct TokenEmbeddingSequence {
  std::vector<Vector> embeddings;
  std::optional<std::size_t> id_slot;

  std::size_t size() const { return embeddings.size(); }
};

bool operator==(const TokenEmbeddingSequence& a,
                const TokenEmbeddingSequence& b);

// Word -> embedding table (the ToEmbedding step). The [ID] placeholder is
// reserved: it is never stored and looking it up is a contract error.
class Vocabulary {
 public:
  static constexpr std::string_view kIdPlaceholder = "[ID]";

  explicit Vocabulary(int dim = 0) : dim_(dim) {}

  void add(std::string word, Vector embedding);
  bool contains(std::string_view word) const;
  const Vector& lookup(std::string_view word) const;
  int dim() const { return dim_; }
  const std::map<std::string, Vector, std::less<>>& entries() const {
    return table_;
  }

 private:
  int dim_;
  std::map<std::string, Vector, std::less<>> table_;
};

// Per-channel affine map from [0,1] pixels into model-input space. The
// visual prompt lives in the normalized space.
struct ChannelNormalization {
  double mean[3] = {0.0, 0.0, 0.0};
  double std[3] = {1.0, 1.0, 1.0};

  Image apply(const Image& pixels01) const;
};

// Frozen image / text / face encoders. Implementations are immutable after
// construction, so every method is safe to call concurrently.
//
// The public methods validate shapes and then dispatch to the backend.
class FrozenEncoders {
 public:
  virtual ~FrozenEncoders() = default;

  virtual std::string backend_name() const = 0;
  virtual int input_height() const = 0;
  virtual int input_width() const = 0;
  virtual int embed_dim() const = 0;
  virtual int face_dim() const = 0;
  virtual int token_dim() const = 0;
  virtual std::size_t max_text_length() const = 0;
  virtual double temperature() const = 0;
  virtual const Vocabulary& vocabulary() const = 0;
  virtual ChannelNormalization normalization() const = 0;
  // Content hash over every parameter, including the vocabulary and tau.
  virtual std::string weights_digest() const = 0;

  Vector encode_image(const Image& x) const;
  // Vector-Jacobian product: d<upstream, encode_image(x)>/dx.
  Image encode_image_vjp(const Image& x, const Vector& upstream) const;
  Vector encode_text(const TokenEmbeddingSequence& tokens) const;
  Vector encode_face(const Image& x) const;

 protected:
  virtual Vector do_encode_image(const Image& x) const = 0;
  virtual Image do_encode_image_vjp(const Image& x,
                                    const Vector& upstream) const = 0;
  virtual Vector do_encode_text(const TokenEmbeddingSequence& tokens) const = 0;
  virtual Vector do_encode_face(const Image& x) const = 0;

 private:
  void check_image(const Image& x, const char* what) const;
};

struct ToyBackendSpec {
  std::uint64_t seed = 7;
  int embed_dim = 32;
  int face_dim = 16;
  int token_dim = 24;
  int hidden_layers = 1;
  int hidden_width = 128;
  int input_height = 32;
  int input_width = 32;
  double temperature = 0.01;
  double bias_scale = 0.05;
  std::size_t max_text_length = 16;
};

// Deterministic seeded stand-in for a pretrained vision-language model:
// tanh multilayer maps with an un-normalized linear read-out.
std::unique_ptr<FrozenEncoders> build_toy_backend(const ToyBackendSpec& spec);

using BackendOptions = std::map<std::string, std::string, std::less<>>;
using BackendFactory =
    std::function<std::unique_ptr<FrozenEncoders>(const BackendOptions&)>;

// Parses "toy.*" style keys (seed, embed_dim, face_dim, token_dim,
// hidden_layers, hidden_width, input_size, temperature). Unknown keys are
// a configuration error.
ToyBackendSpec toy_spec_from_options(const BackendOptions& options);

// Name -> factory table. "toy" is always registered. Real backends register
// themselves under their own key before the CLI resolves --backend.
class BackendRegistry {
 public:
  static BackendRegistry& global();

  void add(std::string name, BackendFactory factory);
  bool contains(std::string_view name) const;
  std::unique_ptr<FrozenEncoders> create(std::string_view name,
                                         const BackendOptions& options) const;
  std::vector<std::string> names() const;

 private:
  std::map<std::string, BackendFactory, std::less<>> factories_;
};

}  // namespace repdfd

#endif  // REPDFD_ENCODERS_HPP_
