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

#ifndef REPDFD_EVAL_HPP_
#define REPDFD_EVAL_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "repdfd/checkpoint.hpp"
#include "repdfd/data.hpp"
#include "repdfd/encoders.hpp"
#include "repdfd/trainer.hpp"

namespace repdfd {

// Area under the ROC curve with label 1 as positive: the probability that a
// positive outscores a negative, ties counting one half. Exact, O(n log n).
// Throws UndefinedMetricError unless both classes are present.
double auc(std::span<const double> scores, std::span<const int> labels);

// Mean frame score per video. Empty frame lists are an input error.
std::map<std::string, double> video_scores(
    const std::map<std::string, std::vector<double>>& frame_scores);

struct EvalReport {
  std::string dataset;
  double frame_auc = 0.0;
  double video_auc = 0.0;
  std::int64_t n_frames = 0;
  std::int64_t n_videos = 0;
  std::string prompt_checkpoint;
  std::string template_config;
};

nlohmann::json to_json(const EvalReport& r);

// p_fake per sample, in input order.
std::vector<double> score_samples(std::span<const Sample> samples,
                                  const Checkpoint& ckpt,
                                  const FrozenEncoders& enc);

// One report per dataset (sorted by name) followed by an "all" row when
// more than one dataset is present. Throws ConfigError if the checkpoint
// geometry does not match the backend input size.
std::vector<EvalReport> evaluate(std::span<const Sample> samples,
                                 const Checkpoint& ckpt,
                                 const FrozenEncoders& enc,
                                 const std::string& checkpoint_label = {});

struct BorderSweepRow {
  int border = 0;
  std::int64_t param_count = 0;
  bool is_default = false;
  std::vector<EvalReport> reports;
};

inline constexpr int kDefaultBorderWidth = 34;

std::vector<BorderSweepRow> sweep_border_width(
    std::span<const Sample> train_set, std::span<const Sample> test_set,
    std::span<const int> borders, const TrainConfig& cfg,
    const FrozenEncoders& enc);

struct TemplateSweepRow {
  std::string config;
  std::vector<EvalReport> reports;
};

std::vector<TemplateSweepRow> sweep_templates(
    std::span<const Sample> train_set, std::span<const Sample> test_set,
    std::span<const TemplateConfigId> configs, const TrainConfig& cfg,
    const FrozenEncoders& enc);

struct SimilarityRow {
  std::string dataset;
  std::string template_name;  // "T0".."T3"
  double mean_cosine = 0.0;
  std::int64_t n_images = 0;
};

// Mean cos(w_T, f) per template and dataset, with f taken from the prompted
// image. Rows are ordered by dataset, then template.
std::vector<SimilarityRow> similarity_analysis(std::span<const Sample> samples,
                                               const VisualPrompt& vp,
                                               const FrozenEncoders& enc,
                                               const FaceProjection& proj);

// Feature dump: u32 header length, JSON header, then for each frame the
// "raw" row (image resized to the full input, no prompt) followed by the
// "prompted" row, each `dims` little-endian float32 values.
struct FeatureDump {
  int dims = 0;
  std::vector<std::string> variants;
  std::vector<SampleRecord> frames;
  // frames.size() * variants.size() rows of `dims` floats
  std::vector<float> values;

  friend bool operator==(const FeatureDump&, const FeatureDump&) = default;
};

FeatureDump compute_features(std::span<const Sample> samples,
                             const std::optional<VisualPrompt>& vp,
                             const FrozenEncoders& enc);
void write_features(const std::filesystem::path& path, const FeatureDump& d);
FeatureDump read_features(const std::filesystem::path& path);

// Aligned plain-text renderings.
std::string format_reports(std::span<const EvalReport> reports);
std::string format_border_sweep(std::span<const BorderSweepRow> rows);
std::string format_template_sweep(std::span<const TemplateSweepRow> rows);
std::string format_similarity(std::span<const SimilarityRow> rows);

}  // namespace repdfd

#endif  // REPDFD_EVAL_HPP_
