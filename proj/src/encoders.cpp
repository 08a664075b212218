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

#include "repdfd/encoders.hpp"

#include <charconv>
#include <cmath>
#include <random>
#include <sstream>
#include <utility>

#include "repdfd/digest.hpp"
#include "repdfd/error.hpp"

namespace repdfd {

bool operator==(const TokenEmbeddingSequence& a,
                const TokenEmbeddingSequence& b) {
  if (a.id_slot != b.id_slot || a.embeddings.size() != b.embeddings.size())
    return false;
  for (std::size_t i = 0; i < a.embeddings.size(); ++i) {
    if (a.embeddings[i].size() != b.embeddings[i].size() ||
        a.embeddings[i] != b.embeddings[i])
      return false;
  }
  return true;
}

void Vocabulary::add(std::string word, Vector embedding) {
  if (word == kIdPlaceholder)
    throw ContractError("vocabulary: [ID] is reserved");
  if (embedding.size() != dim_)
    throw InputError("vocabulary: embedding for '" + word + "' has dim " +
                     std::to_string(embedding.size()) + ", expected " +
                     std::to_string(dim_));
  table_.insert_or_assign(std::move(word), std::move(embedding));
}

bool Vocabulary::contains(std::string_view word) const {
  return table_.find(word) != table_.end();
}

const Vector& Vocabulary::lookup(std::string_view word) const {
  if (word == kIdPlaceholder)
    throw ContractError("vocabulary: [ID] placeholder is never looked up");
  auto it = table_.find(word);
  if (it == table_.end())
    throw ConfigError("vocabulary: no embedding for '" + std::string(word) +
                      "'");
  return it->second;
}

Image ChannelNormalization::apply(const Image& pixels01) const {
  Image out(pixels01.height(), pixels01.width());
  auto src = pixels01.values();
  auto dst = out.values();
  for (std::size_t i = 0; i < src.size(); ++i) {
    const int ch = static_cast<int>(i % Image::kChannels);
    dst[i] = (src[i] - mean[ch]) / std[ch];
  }
  return out;
}

void FrozenEncoders::check_image(const Image& x, const char* what) const {
  if (x.height() != input_height() || x.width() != input_width()) {
    std::ostringstream os;
    os << what << ": image is " << x.height() << "x" << x.width()
       << ", backend expects " << input_height() << "x" << input_width();
    throw InputError(os.str());
  }
}

Vector FrozenEncoders::encode_image(const Image& x) const {
  check_image(x, "encode_image");
  return do_encode_image(x);
}

Image FrozenEncoders::encode_image_vjp(const Image& x,
                                       const Vector& upstream) const {
  check_image(x, "encode_image_vjp");
  if (upstream.size() != embed_dim())
    throw InputError("encode_image_vjp: upstream gradient has wrong dim");
  return do_encode_image_vjp(x, upstream);
}

Vector FrozenEncoders::encode_text(const TokenEmbeddingSequence& tokens) const {
  if (tokens.embeddings.empty())
    throw InputError("encode_text: empty token sequence");
  if (tokens.size() > max_text_length())
    throw InputError("encode_text: sequence of " +
                     std::to_string(tokens.size()) +
                     " tokens exceeds limit " +
                     std::to_string(max_text_length()));
  for (const auto& e : tokens.embeddings) {
    if (e.size() != token_dim())
      throw InputError("encode_text: token embedding has wrong dim");
  }
  if (tokens.id_slot && *tokens.id_slot >= tokens.size())
    throw ContractError("encode_text: id_slot out of range");
  return do_encode_text(tokens);
}

Vector FrozenEncoders::encode_face(const Image& x) const {
  check_image(x, "encode_face");
  return do_encode_face(x);
}

namespace {

double to_f32(double v) { return static_cast<double>(static_cast<float>(v)); }

struct Dense {
  Matrix weight;
  Vector bias;
  bool activate = true;
};

Matrix gaussian_matrix(std::mt19937_64& rng, int rows, int cols, double sd) {
  std::normal_distribution<double> n(0.0, sd);
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = to_f32(n(rng));
  return m;
}

Vector gaussian_vector(std::mt19937_64& rng, int size, double sd) {
  std::normal_distribution<double> n(0.0, sd);
  Vector v(size);
  for (int i = 0; i < size; ++i) v(i) = to_f32(n(rng));
  return v;
}

Dense make_dense(std::mt19937_64& rng, int in, int out, double bias_scale,
                 bool activate) {
  Dense d;
  d.weight = gaussian_matrix(rng, out, in, 1.0 / std::sqrt(double(in)));
  d.bias = gaussian_vector(rng, out, bias_scale);
  d.activate = activate;
  return d;
}

// Stack of affine layers; tanh on every layer flagged `activate`.
class Mlp {
 public:
  Mlp() = default;
  explicit Mlp(std::vector<Dense> layers) : layers_(std::move(layers)) {}

  Vector forward(const Vector& x) const {
    Vector h = x;
    for (const auto& l : layers_) {
      h = l.weight * h + l.bias;
      if (l.activate) h = h.array().tanh();
    }
    return h;
  }

  Vector vjp(const Vector& x, const Vector& upstream) const {
    std::vector<Vector> outputs;
    outputs.reserve(layers_.size());
    Vector h = x;
    for (const auto& l : layers_) {
      h = l.weight * h + l.bias;
      if (l.activate) h = h.array().tanh();
      outputs.push_back(h);
    }
    Vector g = upstream;
    for (std::size_t i = layers_.size(); i-- > 0;) {
      const auto& l = layers_[i];
      if (l.activate) g = g.array() * (1.0 - outputs[i].array().square());
      g = l.weight.transpose() * g;
    }
    return g;
  }

  void hash_into(Sha256& h) const {
    h.update(static_cast<std::uint64_t>(layers_.size()));
    for (const auto& l : layers_) {
      h.update(l.weight).update(l.bias);
      h.update(static_cast<std::uint64_t>(l.activate));
    }
  }

 private:
  std::vector<Dense> layers_;
};

Vector flatten(const Image& x) {
  auto v = x.values();
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

class ToyBackend final : public FrozenEncoders {
 public:
  explicit ToyBackend(const ToyBackendSpec& spec)
      : spec_(spec), vocab_(spec.token_dim) {
    std::mt19937_64 rng(spec.seed);
    const int in = spec.input_height * spec.input_width * Image::kChannels;

    std::vector<Dense> image_layers;
    int width = in;
    for (int i = 0; i < spec.hidden_layers; ++i) {
      image_layers.push_back(
          make_dense(rng, width, spec.hidden_width, spec.bias_scale, true));
      width = spec.hidden_width;
    }
    image_layers.push_back(
        make_dense(rng, width, spec.embed_dim, spec.bias_scale, false));
    image_ = Mlp(std::move(image_layers));

    const int face_hidden = std::max(spec.hidden_width / 2, 4);
    std::vector<Dense> face_layers;
    face_layers.push_back(
        make_dense(rng, in, face_hidden, spec.bias_scale, true));
    face_layers.push_back(
        make_dense(rng, face_hidden, spec.face_dim, spec.bias_scale, false));
    face_ = Mlp(std::move(face_layers));

    positions_ = gaussian_matrix(rng, static_cast<int>(spec.max_text_length),
                                 spec.token_dim, 1.0);
    text_token_ =
        make_dense(rng, spec.token_dim, spec.hidden_width, spec.bias_scale, true);
    text_out_ = make_dense(rng, spec.hidden_width, spec.embed_dim,
                           spec.bias_scale, false);

    for (const char* word : {"A", "fake", "of", "person", "photo", "real"}) {
      vocab_.add(word, gaussian_vector(rng, spec.token_dim, 1.0));
    }

    Sha256 h;
    h.update(std::string_view("toy"));
    h.update(spec.seed);
    h.update(static_cast<std::uint64_t>(spec.input_height));
    h.update(static_cast<std::uint64_t>(spec.input_width));
    h.update(spec.temperature);
    image_.hash_into(h);
    face_.hash_into(h);
    h.update(positions_);
    h.update(text_token_.weight).update(text_token_.bias);
    h.update(text_out_.weight).update(text_out_.bias);
    for (const auto& [word, emb] : vocab_.entries()) {
      h.update(std::string_view(word));
      h.update(emb);
    }
    digest_ = h.hex();
  }

  std::string backend_name() const override { return "toy"; }
  int input_height() const override { return spec_.input_height; }
  int input_width() const override { return spec_.input_width; }
  int embed_dim() const override { return spec_.embed_dim; }
  int face_dim() const override { return spec_.face_dim; }
  int token_dim() const override { return spec_.token_dim; }
  std::size_t max_text_length() const override {
    return spec_.max_text_length;
  }
  double temperature() const override { return spec_.temperature; }
  const Vocabulary& vocabulary() const override { return vocab_; }
  ChannelNormalization normalization() const override {
    ChannelNormalization n;
    for (int c = 0; c < 3; ++c) {
      n.mean[c] = 0.5;
      n.std[c] = 0.25;
    }
    return n;
  }
  std::string weights_digest() const override { return digest_; }

 protected:
  Vector do_encode_image(const Image& x) const override {
    return image_.forward(flatten(x));
  }

  Image do_encode_image_vjp(const Image& x,
                            const Vector& upstream) const override {
    Vector g = image_.vjp(flatten(x), upstream);
    Image out(x.height(), x.width());
    auto dst = out.values();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = g(Eigen::Index(i));
    return out;
  }

  Vector do_encode_text(const TokenEmbeddingSequence& tokens) const override {
    Vector pooled = Vector::Zero(spec_.hidden_width);
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      Vector in = tokens.embeddings[i] +
                  positions_.row(static_cast<Eigen::Index>(i)).transpose();
      Vector z = text_token_.weight * in + text_token_.bias;
      pooled += z.array().tanh().matrix();
    }
    pooled /= static_cast<double>(tokens.size());
    return text_out_.weight * pooled + text_out_.bias;
  }

  Vector do_encode_face(const Image& x) const override {
    return face_.forward(flatten(x));
  }

 private:
  ToyBackendSpec spec_;
  Vocabulary vocab_;
  Mlp image_;
  Mlp face_;
  Matrix positions_;
  Dense text_token_;
  Dense text_out_;
  std::string digest_;
};

template <typename T>
T parse_number(std::string_view key, std::string_view text) {
  if constexpr (std::is_floating_point_v<T>) {
    try {
      std::size_t used = 0;
      const double v = std::stod(std::string(text), &used);
      if (used == text.size()) return static_cast<T>(v);
    } catch (const std::exception&) {
    }
  } else {
    T v{};
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec == std::errc() && ptr == text.data() + text.size()) return v;
  }
  throw ConfigError("backend option " + std::string(key) + ": cannot parse '" +
                    std::string(text) + "'");
}

}  // namespace

std::unique_ptr<FrozenEncoders> build_toy_backend(const ToyBackendSpec& spec) {
  if (spec.embed_dim <= 0 || spec.face_dim <= 0 || spec.token_dim <= 0 ||
      spec.hidden_layers <= 0 || spec.hidden_width <= 0 ||
      spec.max_text_length == 0)
    throw ConfigError("toy backend: dimensions must be positive");
  if (spec.input_height < 8 || spec.input_width < 8)
    throw ConfigError("toy backend: input size must be at least 8x8");
  if (!(spec.temperature > 0.0) || !std::isfinite(spec.temperature))
    throw ConfigError("toy backend: temperature must be positive");
  return std::make_unique<ToyBackend>(spec);
}

ToyBackendSpec toy_spec_from_options(const BackendOptions& options) {
  ToyBackendSpec spec;
  for (const auto& [key, value] : options) {
    if (key == "seed") {
      spec.seed = parse_number<std::uint64_t>(key, value);
    } else if (key == "embed_dim") {
      spec.embed_dim = parse_number<int>(key, value);
    } else if (key == "face_dim") {
      spec.face_dim = parse_number<int>(key, value);
    } else if (key == "token_dim") {
      spec.token_dim = parse_number<int>(key, value);
    } else if (key == "hidden_layers") {
      spec.hidden_layers = parse_number<int>(key, value);
    } else if (key == "hidden_width") {
      spec.hidden_width = parse_number<int>(key, value);
    } else if (key == "input_size") {
      spec.input_height = spec.input_width = parse_number<int>(key, value);
    } else if (key == "temperature") {
      spec.temperature = parse_number<double>(key, value);
    } else {
      throw ConfigError("toy backend: unknown option '" + key + "'");
    }
  }
  return spec;
}

BackendRegistry& BackendRegistry::global() {
  static BackendRegistry* registry = [] {
    auto* r = new BackendRegistry;
    r->add("toy", [](const BackendOptions& opts) {
      return build_toy_backend(toy_spec_from_options(opts));
    });
    return r;
  }();
  return *registry;
}

void BackendRegistry::add(std::string name, BackendFactory factory) {
  factories_.insert_or_assign(std::move(name), std::move(factory));
}

bool BackendRegistry::contains(std::string_view name) const {
  return factories_.find(name) != factories_.end();
}

std::unique_ptr<FrozenEncoders> BackendRegistry::create(
    std::string_view name, const BackendOptions& options) const {
  auto it = factories_.find(name);
  if (it == factories_.end())
    throw ConfigError("unknown backend '" + std::string(name) + "'");
  return it->second(options);
}

std::vector<std::string> BackendRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& [name, _] : factories_) out.push_back(name);
  return out;
}

}  // namespace repdfd
