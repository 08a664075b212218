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

#ifndef REPDFD_DATA_HPP_
#define REPDFD_DATA_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "repdfd/encoders.hpp"
#include "repdfd/image.hpp"

namespace repdfd {

enum class Split : std::uint8_t { kTrain, kVal, kTest };

std::string_view split_name(Split s);
Split parse_split(std::string_view name);

// Pixel box [x0, x1) x [y0, y1).
struct BoundingBox {
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

struct SampleRecord {
  std::string image_path;
  int label = 0;
  std::string video_id;
  Split split = Split::kTrain;
  std::string dataset;
  std::optional<BoundingBox> bbox;

  friend bool operator==(const SampleRecord&, const SampleRecord&) = default;
};

// JSON-lines manifest, one SampleRecord per line. Blank lines are skipped.
// Errors name the 1-based line number.
std::vector<SampleRecord> parse_manifest(std::istream& in);
std::vector<SampleRecord> load_manifest(const std::filesystem::path& path);
void write_manifest(std::ostream& out, std::span<const SampleRecord> records);
void write_manifest(const std::filesystem::path& path,
                    std::span<const SampleRecord> records);

std::vector<SampleRecord> filter_split(std::span<const SampleRecord> records,
                                       Split split);

struct CropSpec {
  double enlarge_factor = 1.3;
  int output_height = 224;
  int output_width = 224;

  void validate() const;
};

struct CropRegion {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  int width() const { return x1 - x0; }
  int height() const { return y1 - y0; }
  friend bool operator==(const CropRegion&, const CropRegion&) = default;
};

// bbox scaled about its center by `enlarge_factor`, rounded to whole pixels
// and clamped to the image.
CropRegion enlarged_crop_region(const BoundingBox& bbox, int image_height,
                                int image_width, double enlarge_factor);

Image crop_face(const Image& image, const BoundingBox& bbox,
                const CropSpec& spec);

// 8-bit RGB files <-> [0, 1] images.
Image load_image(const std::filesystem::path& path);
void save_image(const std::filesystem::path& path, const Image& pixels01);

struct SplitFractions {
  double train = 0.8;
  double val = 0.1;
  double test = 0.1;
};

// Reassigns `split` so that all frames of a video share one split. Video
// counts per split follow the fractions by largest remainder after a seeded
// shuffle of the video ids.
std::vector<SampleRecord> split_by_video(std::span<const SampleRecord> records,
                                         const SplitFractions& fractions,
                                         std::uint64_t seed);

// A record with its decoded, cropped and normalized model input.
struct Sample {
  SampleRecord record;
  Image input;
};

// Resolves relative image paths against base_dir, crops when the record
// has a bbox, and applies the backend normalization.
std::vector<Sample> load_samples(std::span<const SampleRecord> records,
                                 const std::filesystem::path& base_dir,
                                 const ChannelNormalization& norm,
                                 const std::optional<CropSpec>& crop);

// Synthetic two-family face task for desk-scale runs. Each video has a
// smooth per-identity base image plus per-frame noise. Fake frames add a
// fixed blocky texture with a random sign per frame, so the classes differ
// only in second-order statistics. With identity_signal > 0, fake videos
// also share a mean offset along a fixed direction.
struct SyntheticSpec {
  std::uint64_t seed = 7;
  int height = 32;
  int width = 32;
  int train_videos = 20;
  int train_frames_per_video = 20;
  int test_videos = 20;
  int test_frames_per_video = 10;
  double texture_amplitude = 0.25;
  double identity_signal = 0.0;
  double frame_noise = 0.02;
  // Std of the per-video low-frequency appearance waves.
  double identity_contrast = 0.03;
  std::string dataset = "toy";
};

struct SyntheticDataset {
  std::vector<SampleRecord> records;
  std::vector<Image> pixels;  // [0, 1], parallel to records
};

SyntheticDataset generate_synthetic(const SyntheticSpec& spec);

// Writes PNG frames under dir/frames and dir/manifest.jsonl; returns the
// manifest path.
std::filesystem::path write_synthetic(const SyntheticDataset& data,
                                      const std::filesystem::path& dir);

// In-memory equivalent of write_synthetic + load_samples (8-bit quantized).
std::vector<Sample> synthetic_samples(const SyntheticDataset& data,
                                      const ChannelNormalization& norm);

}  // namespace repdfd

#endif  // REPDFD_DATA_HPP_
