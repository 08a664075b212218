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

#ifndef REPDFD_TRAINER_HPP_
#define REPDFD_TRAINER_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "repdfd/checkpoint.hpp"
#include "repdfd/data.hpp"
#include "repdfd/encoders.hpp"
#include "repdfd/face2text.hpp"
#include "repdfd/objective.hpp"
#include "repdfd/transform.hpp"

namespace repdfd {

enum class OptimizerKind { kAdamW, kPlainGradient };

std::string_view optimizer_name(OptimizerKind kind);
OptimizerKind parse_optimizer(std::string_view name);

struct TrainConfig {
  int border_width = 34;
  double learning_rate = 1.0;
  double weight_decay = 0.0;
  int batch_size = 32;
  int epochs = 10;
  std::uint64_t seed = 0;
  OptimizerKind optimizer = OptimizerKind::kAdamW;
  TemplateConfigId template_config = TemplateConfigId::kT0T3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_epsilon = 1e-8;

  // lr and weight decay may be zero; batch size must be positive, epochs
  // non-negative.
  void validate() const;
};

struct TrainState {
  VisualPrompt prompt;
  std::int64_t step = 0;
  // Indexed like prompt.border_offsets().
  std::vector<double> first_moment;
  std::vector<double> second_moment;
  std::mt19937_64 rng;
};

// Zero prompt over an H x W input with border p.
VisualPrompt init_prompt(int height, int width, int border);
TrainState init_state(int height, int width, int border, std::uint64_t seed);

struct StepStats {
  double loss = 0.0;
  double grad_max = 0.0;
};

// One update of delta on the batch. Plain-gradient mode is
// delta <- delta - lr * grad; AdamW mode uses bias-corrected moments with
// decoupled weight decay. Only border coordinates move. A non-finite
// gradient throws NumericError naming the step and max |grad|.
StepStats train_step(TrainState& state, std::span<const LabeledImage> batch,
                     const TrainConfig& cfg, const TextFeatureProvider& text);

struct StepRecord {
  std::int64_t step = 0;
  int epoch = 0;
  double loss = 0.0;
  double lr = 0.0;
  double grad_max = 0.0;
  double wallclock = 0.0;  // seconds since training start
};

struct EpochRecord {
  int epoch = 0;
  double mean_loss = 0.0;
  std::optional<double> val_auc;
};

struct TrainResult {
  Checkpoint checkpoint;
  std::vector<StepRecord> steps;
  std::vector<EpochRecord> epochs;
};

// Optional side outputs. With out_dir set, train writes train_log.jsonl,
// epoch_<k>.rpdf after every epoch, best.rpdf (best validation AUC, when a
// validation set exists) and final.rpdf.
struct TrainOutputs {
  std::optional<std::filesystem::path> out_dir;
};

// Projection for a run: seeded from cfg.seed.
FaceProjection projection_for(const FrozenEncoders& enc,
                              const TrainConfig& cfg);

TrainResult train(std::span<const Sample> train_set,
                  std::span<const Sample> val_set, const TrainConfig& cfg,
                  const FrozenEncoders& enc, const TrainOutputs& outputs = {});

std::string step_record_json(const StepRecord& r);

}  // namespace repdfd

#endif  // REPDFD_TRAINER_HPP_
