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

#include "repdfd/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>
#include <opencv2/imgcodecs.hpp>

#include "repdfd/error.hpp"
#include "repdfd/transform.hpp"

namespace repdfd {

std::string_view split_name(Split s) {
  switch (s) {
    case Split::kTrain:
      return "train";
    case Split::kVal:
      return "val";
    case Split::kTest:
      return "test";
  }
  return "?";
}

Split parse_split(std::string_view name) {
  if (name == "train") return Split::kTrain;
  if (name == "val") return Split::kVal;
  if (name == "test") return Split::kTest;
  throw InputError("unknown split '" + std::string(name) + "'");
}

namespace {

SampleRecord record_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InputError("row is not a JSON object");
  auto require_string = [&](const char* key) -> std::string {
    if (!j.contains(key) || !j[key].is_string())
      throw InputError(std::string("missing or non-string field '") + key +
                       "'");
    return j[key].get<std::string>();
  };

  SampleRecord r;
  r.image_path = require_string("image_path");
  if (r.image_path.empty()) throw InputError("empty image_path");
  if (!j.contains("label") || !j["label"].is_number_integer())
    throw InputError("missing or non-integer field 'label'");
  const auto label = j["label"].get<std::int64_t>();
  if (label != 0 && label != 1)
    throw InputError("label " + std::to_string(label) + " is not 0 or 1");
  r.label = static_cast<int>(label);
  r.video_id = require_string("video_id");
  if (r.video_id.empty()) throw InputError("empty video_id");
  r.split = parse_split(require_string("split"));
  r.dataset = j.contains("dataset") ? j["dataset"].get<std::string>() : "";
  if (j.contains("bbox") && !j["bbox"].is_null()) {
    const auto& b = j["bbox"];
    if (!b.is_array() || b.size() != 4)
      throw InputError("bbox must be [x0, y0, x1, y1]");
    for (const auto& v : b)
      if (!v.is_number()) throw InputError("bbox entries must be numbers");
    r.bbox = BoundingBox{b[0].get<double>(), b[1].get<double>(),
                         b[2].get<double>(), b[3].get<double>()};
  }
  return r;
}

nlohmann::ordered_json record_to_json(const SampleRecord& r) {
  nlohmann::ordered_json j;
  j["image_path"] = r.image_path;
  j["label"] = r.label;
  j["video_id"] = r.video_id;
  j["split"] = split_name(r.split);
  j["dataset"] = r.dataset;
  if (r.bbox) j["bbox"] = {r.bbox->x0, r.bbox->y0, r.bbox->x1, r.bbox->y1};
  return j;
}

}  // namespace

std::vector<SampleRecord> parse_manifest(std::istream& in) {
  std::vector<SampleRecord> out;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      SampleRecord r = record_from_json(nlohmann::json::parse(line));
      if (!seen.insert(r.image_path).second)
        throw InputError("duplicate image_path '" + r.image_path + "'");
      out.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw InputError("manifest line " + std::to_string(line_no) + ": " +
                       e.what());
    } catch (const InputError& e) {
      throw InputError("manifest line " + std::to_string(line_no) + ": " +
                       e.what());
    }
  }
  return out;
}

std::vector<SampleRecord> load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest " + path.string());
  return parse_manifest(in);
}

void write_manifest(std::ostream& out, std::span<const SampleRecord> records) {
  for (const auto& r : records) out << record_to_json(r).dump() << '\n';
}

void write_manifest(const std::filesystem::path& path,
                    std::span<const SampleRecord> records) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write manifest " + path.string());
  write_manifest(out, records);
}

std::vector<SampleRecord> filter_split(std::span<const SampleRecord> records,
                                       Split split) {
  std::vector<SampleRecord> out;
  for (const auto& r : records)
    if (r.split == split) out.push_back(r);
  return out;
}

void CropSpec::validate() const {
  if (!(enlarge_factor >= 1.0) || !std::isfinite(enlarge_factor))
    throw ConfigError("crop: enlarge_factor must be >= 1");
  if (output_height <= 0 || output_width <= 0)
    throw ConfigError("crop: output size must be positive");
}

CropRegion enlarged_crop_region(const BoundingBox& bbox, int image_height,
                                int image_width, double enlarge_factor) {
  const double w = bbox.x1 - bbox.x0;
  const double h = bbox.y1 - bbox.y0;
  if (!(w > 0.0) || !(h > 0.0))
    throw InputError("crop: degenerate bounding box");
  const double cx = 0.5 * (bbox.x0 + bbox.x1);
  const double cy = 0.5 * (bbox.y0 + bbox.y1);
  const double hw = 0.5 * w * enlarge_factor;
  const double hh = 0.5 * h * enlarge_factor;
  CropRegion r;
  r.x0 = static_cast<int>(std::clamp<long>(std::lround(cx - hw), 0, image_width));
  r.x1 = static_cast<int>(std::clamp<long>(std::lround(cx + hw), 0, image_width));
  r.y0 = static_cast<int>(std::clamp<long>(std::lround(cy - hh), 0, image_height));
  r.y1 = static_cast<int>(std::clamp<long>(std::lround(cy + hh), 0, image_height));
  if (r.width() <= 0 || r.height() <= 0)
    throw InputError("crop: bounding box lies outside the image");
  return r;
}

Image crop_face(const Image& image, const BoundingBox& bbox,
                const CropSpec& spec) {
  spec.validate();
  const CropRegion region = enlarged_crop_region(
      bbox, image.height(), image.width(), spec.enlarge_factor);
  Image crop(region.height(), region.width());
  for (int r = 0; r < region.height(); ++r)
    for (int c = 0; c < region.width(); ++c)
      for (int ch = 0; ch < Image::kChannels; ++ch)
        crop.at(r, c, ch) = image.at(region.y0 + r, region.x0 + c, ch);
  return resize_bilinear(crop, spec.output_height, spec.output_width);
}

Image load_image(const std::filesystem::path& path) {
  cv::Mat bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
  if (bgr.empty()) throw IoError("cannot decode image " + path.string());
  Image out(bgr.rows, bgr.cols);
  for (int r = 0; r < bgr.rows; ++r) {
    const auto* row = bgr.ptr<cv::Vec3b>(r);
    for (int c = 0; c < bgr.cols; ++c)
      for (int ch = 0; ch < 3; ++ch)
        out.at(r, c, ch) = row[c][2 - ch] / 255.0;
  }
  return out;
}

void save_image(const std::filesystem::path& path, const Image& pixels01) {
  cv::Mat bgr(pixels01.height(), pixels01.width(), CV_8UC3);
  for (int r = 0; r < bgr.rows; ++r) {
    auto* row = bgr.ptr<cv::Vec3b>(r);
    for (int c = 0; c < bgr.cols; ++c)
      for (int ch = 0; ch < 3; ++ch) {
        const double v = std::clamp(pixels01.at(r, c, ch), 0.0, 1.0);
        row[c][2 - ch] = static_cast<unsigned char>(std::lround(v * 255.0));
      }
  }
  if (!cv::imwrite(path.string(), bgr))
    throw IoError("cannot write image " + path.string());
}

std::vector<SampleRecord> split_by_video(std::span<const SampleRecord> records,
                                         const SplitFractions& fractions,
                                         std::uint64_t seed) {
  const double f[3] = {fractions.train, fractions.val, fractions.test};
  for (double v : f)
    if (!(v >= 0.0)) throw ConfigError("split: fractions must be >= 0");
  if (std::abs(f[0] + f[1] + f[2] - 1.0) > 1e-9)
    throw ConfigError("split: fractions must sum to 1");

  std::vector<std::string> videos;
  std::set<std::string> seen;
  for (const auto& r : records)
    if (seen.insert(r.video_id).second) videos.push_back(r.video_id);

  const int active = static_cast<int>(std::count_if(
      std::begin(f), std::end(f), [](double v) { return v > 0.0; }));
  const auto n = static_cast<std::int64_t>(videos.size());
  if (n < active)
    throw ConfigError("split: " + std::to_string(n) + " videos for " +
                      std::to_string(active) + " splits");

  // Largest remainder, then make sure every active split gets a video.
  std::int64_t counts[3];
  double rem[3];
  std::int64_t assigned = 0;
  for (int i = 0; i < 3; ++i) {
    const double exact = f[i] * static_cast<double>(n);
    counts[i] = static_cast<std::int64_t>(std::floor(exact));
    rem[i] = exact - static_cast<double>(counts[i]);
    assigned += counts[i];
  }
  while (assigned < n) {
    int best = 0;
    for (int i = 1; i < 3; ++i)
      if (rem[i] > rem[best]) best = i;
    ++counts[best];
    rem[best] = -1.0;
    ++assigned;
  }
  for (int i = 0; i < 3; ++i) {
    if (f[i] > 0.0 && counts[i] == 0) {
      const int donor = static_cast<int>(
          std::max_element(std::begin(counts), std::end(counts)) - counts);
      --counts[donor];
      ++counts[i];
    }
  }

  std::mt19937_64 rng(seed);
  std::shuffle(videos.begin(), videos.end(), rng);
  std::map<std::string, Split> assignment;
  std::size_t k = 0;
  const Split order[3] = {Split::kTrain, Split::kVal, Split::kTest};
  for (int i = 0; i < 3; ++i)
    for (std::int64_t j = 0; j < counts[i]; ++j) assignment[videos[k++]] = order[i];

  std::vector<SampleRecord> out(records.begin(), records.end());
  for (auto& r : out) r.split = assignment.at(r.video_id);
  return out;
}

std::vector<Sample> load_samples(std::span<const SampleRecord> records,
                                 const std::filesystem::path& base_dir,
                                 const ChannelNormalization& norm,
                                 const std::optional<CropSpec>& crop) {
  std::vector<Sample> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    std::filesystem::path path(r.image_path);
    if (path.is_relative()) path = base_dir / path;
    Image pixels = load_image(path);
    if (crop && r.bbox) pixels = crop_face(pixels, *r.bbox, *crop);
    out.push_back({r, norm.apply(pixels)});
  }
  return out;
}

namespace {

// +-1 pattern constant over block x block tiles, independent per channel.
Image sign_blocks(std::mt19937_64& rng, int height, int width, int block) {
  std::bernoulli_distribution coin(0.5);
  const int br = (height + block - 1) / block;
  const int bc = (width + block - 1) / block;
  std::vector<double> signs(static_cast<std::size_t>(br) * bc * 3);
  for (double& s : signs) s = coin(rng) ? 1.0 : -1.0;
  Image out(height, width);
  for (int r = 0; r < height; ++r)
    for (int c = 0; c < width; ++c)
      for (int ch = 0; ch < 3; ++ch)
        out.at(r, c, ch) =
            signs[(static_cast<std::size_t>(r / block) * bc + c / block) * 3 + ch];
  return out;
}

Image identity_base(std::mt19937_64& rng, int height, int width,
                    double contrast) {
  std::uniform_real_distribution<double> freq(0.5, 2.0);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  std::normal_distribution<double> amp(0.0, contrast);
  std::normal_distribution<double> tint(0.0, 0.05);
  Image out(height, width);
  for (int ch = 0; ch < 3; ++ch) {
    const double offset = 0.5 + tint(rng);
    for (int r = 0; r < height; ++r)
      for (int c = 0; c < width; ++c) out.at(r, c, ch) = offset;
  }
  for (int k = 0; k < 4; ++k) {
    const double fy = freq(rng), fx = freq(rng), ph = phase(rng);
    double a[3];
    for (double& v : a) v = amp(rng);
    for (int r = 0; r < height; ++r)
      for (int c = 0; c < width; ++c) {
        const double wave = std::cos(2.0 * std::numbers::pi *
                                         (fy * r / height + fx * c / width) +
                                     ph);
        for (int ch = 0; ch < 3; ++ch) out.at(r, c, ch) += a[ch] * wave;
      }
  }
  return out;
}

double quantize(double v) {
  return static_cast<double>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)) /
         255.0;
}

}  // namespace

SyntheticDataset generate_synthetic(const SyntheticSpec& spec) {
  if (spec.height < 8 || spec.width < 8)
    throw ConfigError("synthetic: image size must be at least 8x8");
  if (spec.train_videos < 0 || spec.test_videos < 0 ||
      spec.train_frames_per_video <= 0 || spec.test_frames_per_video <= 0)
    throw ConfigError("synthetic: counts must be positive");

  std::mt19937_64 rng(spec.seed);
  const Image texture = sign_blocks(rng, spec.height, spec.width, 2);
  const Image identity_dir = sign_blocks(rng, spec.height, spec.width, 4);
  std::normal_distribution<double> noise(0.0, spec.frame_noise);
  std::bernoulli_distribution coin(0.5);

  SyntheticDataset data;
  auto emit_videos = [&](Split split, int videos, int frames) {
    for (int v = 0; v < videos; ++v) {
      const int label = v % 2;
      const std::string video_id =
          std::string(split_name(split)) + "_v" + std::to_string(1000 + v).substr(1);
      const Image base = identity_base(rng, spec.height, spec.width,
                                       spec.identity_contrast);
      for (int k = 0; k < frames; ++k) {
        const double sign = coin(rng) ? 1.0 : -1.0;
        Image frame(spec.height, spec.width);
        auto dst = frame.values();
        auto b = base.values();
        auto t = texture.values();
        auto id = identity_dir.values();
        for (std::size_t i = 0; i < dst.size(); ++i) {
          double v = b[i] + noise(rng);
          if (label == 1)
            v += sign * spec.texture_amplitude * t[i] +
                 spec.identity_signal * id[i];
          dst[i] = quantize(v);
        }
        SampleRecord rec;
        rec.image_path = "frames/" + video_id + "_f" +
                         std::to_string(1000 + k).substr(1) + ".png";
        rec.label = label;
        rec.video_id = video_id;
        rec.split = split;
        rec.dataset = spec.dataset;
        data.records.push_back(std::move(rec));
        data.pixels.push_back(std::move(frame));
      }
    }
  };
  emit_videos(Split::kTrain, spec.train_videos, spec.train_frames_per_video);
  emit_videos(Split::kTest, spec.test_videos, spec.test_frames_per_video);
  return data;
}

std::filesystem::path write_synthetic(const SyntheticDataset& data,
                                      const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "frames");
  for (std::size_t i = 0; i < data.records.size(); ++i)
    save_image(dir / data.records[i].image_path, data.pixels[i]);
  const auto manifest = dir / "manifest.jsonl";
  write_manifest(manifest, data.records);
  return manifest;
}

std::vector<Sample> synthetic_samples(const SyntheticDataset& data,
                                      const ChannelNormalization& norm) {
  std::vector<Sample> out;
  out.reserve(data.records.size());
  for (std::size_t i = 0; i < data.records.size(); ++i)
    out.push_back({data.records[i], norm.apply(data.pixels[i])});
  return out;
}

}  // namespace repdfd
