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

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "repdfd/digest.hpp"
#include "repdfd/error.hpp"

namespace repdfd {
namespace {

constexpr char kMagic[4] = {'R', 'P', 'D', 'F'};

class ByteWriter {
 public:
  void raw(const char* s, std::size_t n) {
    bytes_.insert(bytes_.end(), s, s + n);
  }
  void u8(std::uint8_t v) { bytes_.push_back(v); }
  void u16(std::uint16_t v) {
    bytes_.push_back(static_cast<std::uint8_t>(v & 0xFF));
    bytes_.push_back(static_cast<std::uint8_t>(v >> 8));
  }
  void f32(double v) {
    const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(v));
    for (int i = 0; i < 4; ++i)
      bytes_.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
  }
  std::vector<std::uint8_t> take() { return std::move(bytes_); }

 private:
  std::vector<std::uint8_t> bytes_;
};

class ByteReader {
 public:
  explicit ByteReader(const std::vector<std::uint8_t>& b) : bytes_(b) {}

  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size())
      throw CorruptCheckpointError("checkpoint: truncated at byte " +
                                   std::to_string(pos_));
  }
  std::uint8_t u8() {
    need(1);
    return bytes_[pos_++];
  }
  std::uint16_t u16() {
    need(2);
    const std::uint16_t v = bytes_[pos_] | (bytes_[pos_ + 1] << 8);
    pos_ += 2;
    return v;
  }
  double f32() {
    need(4);
    std::uint32_t bits = 0;
    for (int i = 0; i < 4; ++i)
      bits |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return static_cast<double>(std::bit_cast<float>(bits));
  }
  bool at_end() const { return pos_ == bytes_.size(); }
  std::size_t pos() const { return pos_; }

 private:
  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

std::uint16_t checked_u16(long v, const char* what) {
  if (v < 0 || v > 0xFFFF)
    throw ConfigError(std::string("checkpoint: ") + what +
                      " does not fit in u16");
  return static_cast<std::uint16_t>(v);
}

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt) {
  const VisualPrompt& vp = ckpt.prompt;
  const FaceProjection& proj = ckpt.projection;
  ByteWriter w;
  w.raw(kMagic, 4);
  w.u16(Checkpoint::kVersion);
  w.u16(checked_u16(vp.height(), "H"));
  w.u16(checked_u16(vp.width(), "W"));
  w.u16(checked_u16(vp.border(), "p"));
  w.u8(static_cast<std::uint8_t>(ckpt.templates.id()));
  w.u8(static_cast<std::uint8_t>(ckpt.kernel));
  w.u16(checked_u16(proj.face_dim(), "D_face"));
  w.u16(checked_u16(proj.token_dim(), "D_tok"));
  if (proj.face_dim() != proj.token_dim()) {
    const Matrix& m = proj.matrix();
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) w.f32(m(r, c));
  }
  for (double v : vp.delta().values()) w.f32(v);
  return w.take();
}

Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes) {
  ByteReader r(bytes);
  r.need(4);
  if (std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw CorruptCheckpointError("checkpoint: bad magic");
  for (int i = 0; i < 4; ++i) r.u8();
  const std::uint16_t version = r.u16();
  if (version != Checkpoint::kVersion)
    throw CorruptCheckpointError("checkpoint: unsupported version " +
                                 std::to_string(version));
  const int height = r.u16();
  const int width = r.u16();
  const int border = r.u16();
  const std::uint8_t template_id = r.u8();
  const std::uint8_t kernel = r.u8();
  const int face_dim = r.u16();
  const int token_dim = r.u16();

  Checkpoint ckpt;
  try {
    ckpt.templates = TemplateConfig::from_byte(template_id);
    ckpt.prompt = VisualPrompt(height, width, border);
  } catch (const Error& e) {
    throw CorruptCheckpointError(std::string("checkpoint: ") + e.what());
  }
  if (kernel != static_cast<std::uint8_t>(ResizeKernel::kBilinearHalfPixel))
    throw CorruptCheckpointError("checkpoint: unknown resize kernel " +
                                 std::to_string(kernel));
  if (face_dim == 0 || token_dim == 0)
    throw CorruptCheckpointError("checkpoint: zero projection dim");
  ckpt.kernel = static_cast<ResizeKernel>(kernel);

  if (face_dim == token_dim) {
    ckpt.projection = FaceProjection::identity(face_dim);
  } else {
    Matrix m(face_dim, token_dim);
    for (int i = 0; i < face_dim; ++i)
      for (int j = 0; j < token_dim; ++j) m(i, j) = r.f32();
    ckpt.projection = FaceProjection::from_matrix(std::move(m));
  }

  Image delta(height, width);
  for (double& v : delta.values()) v = r.f32();
  if (!r.at_end())
    throw CorruptCheckpointError("checkpoint: trailing bytes after delta");
  try {
    ckpt.prompt.set_delta(delta);
  } catch (const ContractError& e) {
    throw CorruptCheckpointError(std::string("checkpoint: ") + e.what());
  }
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path,
                     const Checkpoint& ckpt) {
  const auto bytes = encode_checkpoint(ckpt);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write checkpoint " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

std::string checkpoint_hash(const Checkpoint& ckpt) {
  return sha256_hex(encode_checkpoint(ckpt));
}

}  // namespace repdfd
