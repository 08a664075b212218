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

#include "repdfd/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "repdfd/error.hpp"
#include "repdfd/eval.hpp"

namespace repdfd {

std::string_view optimizer_name(OptimizerKind kind) {
  return kind == OptimizerKind::kAdamW ? "adamw-like" : "plain-gradient";
}

OptimizerKind parse_optimizer(std::string_view name) {
  if (name == "adamw-like" || name == "adamw") return OptimizerKind::kAdamW;
  if (name == "plain-gradient" || name == "sgd")
    return OptimizerKind::kPlainGradient;
  throw ConfigError("unknown optimizer '" + std::string(name) +
                    "' (expected adamw-like or plain-gradient)");
}

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
    throw ConfigError("train: learning rate must be finite and >= 0");
  if (!(weight_decay >= 0.0)) throw ConfigError("train: weight decay must be >= 0");
  if (batch_size <= 0) throw ConfigError("train: batch size must be positive");
  if (epochs < 0) throw ConfigError("train: epochs must be >= 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0) ||
      !(adam_epsilon > 0.0))
    throw ConfigError("train: invalid AdamW hyperparameters");
}

VisualPrompt init_prompt(int height, int width, int border) {
  return VisualPrompt(height, width, border);
}

TrainState init_state(int height, int width, int border, std::uint64_t seed) {
  TrainState s;
  s.prompt = init_prompt(height, width, border);
  s.first_moment.assign(s.prompt.param_count(), 0.0);
  s.second_moment.assign(s.prompt.param_count(), 0.0);
  s.rng.seed(seed);
  return s;
}

StepStats train_step(TrainState& state, std::span<const LabeledImage> batch,
                     const TrainConfig& cfg, const TextFeatureProvider& text) {
  GradientResult gr = loss_and_grad_delta(text, state.prompt, batch);
  const auto& offsets = state.prompt.border_offsets();
  auto g = gr.gradient.values();

  StepStats stats;
  stats.loss = gr.mean_loss;
  bool finite = true;
  for (std::size_t off : offsets) {
    finite = finite && std::isfinite(g[off]);
    stats.grad_max = std::max(stats.grad_max, std::abs(g[off]));
  }
  if (!finite || !std::isfinite(stats.grad_max)) {
    std::ostringstream os;
    os << "train_step " << state.step << ": non-finite gradient (max|grad| = "
       << stats.grad_max << ")";
    throw NumericError(os.str());
  }

  std::vector<double> values = state.prompt.border_values();
  const double lr = cfg.learning_rate;
  if (cfg.optimizer == OptimizerKind::kPlainGradient) {
    for (std::size_t k = 0; k < values.size(); ++k) values[k] -= lr * g[offsets[k]];
  } else {
    const double t = static_cast<double>(state.step + 1);
    const double c1 = 1.0 - std::pow(cfg.beta1, t);
    const double c2 = 1.0 - std::pow(cfg.beta2, t);
    for (std::size_t k = 0; k < values.size(); ++k) {
      const double gk = g[offsets[k]];
      double& m = state.first_moment[k];
      double& v = state.second_moment[k];
      values[k] *= 1.0 - lr * cfg.weight_decay;
      m = cfg.beta1 * m + (1.0 - cfg.beta1) * gk;
      v = cfg.beta2 * v + (1.0 - cfg.beta2) * gk * gk;
      values[k] -= lr * (m / c1) / (std::sqrt(v / c2) + cfg.adam_epsilon);
    }
  }
  state.prompt.set_border_values(values);
  ++state.step;
  return stats;
}

FaceProjection projection_for(const FrozenEncoders& enc,
                              const TrainConfig& cfg) {
  return init_projection(enc.face_dim(), enc.token_dim(), cfg.seed);
}

std::string step_record_json(const StepRecord& r) {
  nlohmann::ordered_json j;
  j["step"] = r.step;
  j["epoch"] = r.epoch;
  j["loss"] = r.loss;
  j["lr"] = r.lr;
  j["grad_max"] = r.grad_max;
  j["wallclock"] = r.wallclock;
  return j.dump();
}

namespace {

// float32-rounded copy, i.e. exactly what a saved checkpoint holds.
Checkpoint snapshot(const TrainState& state, const TrainConfig& cfg,
                    const FaceProjection& proj) {
  Checkpoint ckpt;
  ckpt.prompt = state.prompt;
  std::vector<double> v = state.prompt.border_values();
  for (double& x : v) x = static_cast<double>(static_cast<float>(x));
  ckpt.prompt.set_border_values(v);
  ckpt.templates = TemplateConfig(cfg.template_config);
  ckpt.projection = proj;
  return ckpt;
}

std::optional<double> validation_auc(std::span<const Sample> val,
                                     const Checkpoint& ckpt,
                                     const FrozenEncoders& enc) {
  if (val.empty()) return std::nullopt;
  std::vector<int> labels;
  for (const auto& s : val) labels.push_back(s.record.label);
  if (std::count(labels.begin(), labels.end(), 1) == 0 ||
      std::count(labels.begin(), labels.end(), 0) == 0)
    return std::nullopt;
  const std::vector<double> scores = score_samples(val, ckpt, enc);
  return auc(scores, labels);
}

}  // namespace

TrainResult train(std::span<const Sample> train_set,
                  std::span<const Sample> val_set, const TrainConfig& cfg,
                  const FrozenEncoders& enc, const TrainOutputs& outputs) {
  cfg.validate();
  if (train_set.empty()) throw ConfigError("train: empty training set");
  for (const auto& s : train_set)
    if (s.record.label != kLabelReal && s.record.label != kLabelFake)
      throw ConfigError("train: label outside {0, 1} for " +
                        s.record.image_path);

  const FaceProjection proj = projection_for(enc, cfg);
  const TextFeatureProvider text(enc, TemplateConfig(cfg.template_config), proj);
  TrainState state = init_state(enc.input_height(), enc.input_width(),
                                cfg.border_width, cfg.seed);

  std::ofstream log;
  if (outputs.out_dir) {
    std::filesystem::create_directories(*outputs.out_dir);
    log.open(*outputs.out_dir / "train_log.jsonl", std::ios::trunc);
    if (!log) throw IoError("cannot write training log");
  }

  TrainResult result;
  const auto start = std::chrono::steady_clock::now();
  std::vector<std::size_t> order(train_set.size());
  std::optional<double> best_auc;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), state.rng);

    double loss_sum = 0.0;
    for (std::size_t begin = 0; begin < order.size();
         begin += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end =
          std::min(order.size(), begin + static_cast<std::size_t>(cfg.batch_size));
      std::vector<LabeledImage> batch;
      for (std::size_t i = begin; i < end; ++i) {
        const Sample& s = train_set[order[i]];
        batch.push_back({&s.input, s.record.label});
      }
      const StepStats stats = train_step(state, batch, cfg, text);
      loss_sum += stats.loss * static_cast<double>(batch.size());

      StepRecord rec;
      rec.step = state.step;
      rec.epoch = epoch;
      rec.loss = stats.loss;
      rec.lr = cfg.learning_rate;
      rec.grad_max = stats.grad_max;
      rec.wallclock = std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - start)
                          .count();
      if (log) log << step_record_json(rec) << '\n';
      result.steps.push_back(rec);
    }

    const Checkpoint ckpt = snapshot(state, cfg, proj);
    EpochRecord er;
    er.epoch = epoch;
    er.mean_loss = loss_sum / static_cast<double>(train_set.size());
    er.val_auc = validation_auc(val_set, ckpt, enc);
    result.epochs.push_back(er);

    if (outputs.out_dir) {
      save_checkpoint(*outputs.out_dir / ("epoch_" + std::to_string(epoch) + ".rpdf"),
                      ckpt);
      if (er.val_auc && (!best_auc || *er.val_auc > *best_auc)) {
        best_auc = er.val_auc;
        save_checkpoint(*outputs.out_dir / "best.rpdf", ckpt);
      }
    }
  }

  result.checkpoint = snapshot(state, cfg, proj);
  if (outputs.out_dir) {
    save_checkpoint(*outputs.out_dir / "final.rpdf", result.checkpoint);
    std::ofstream epochs(*outputs.out_dir / "epoch_log.jsonl", std::ios::trunc);
    for (const auto& e : result.epochs) {
      nlohmann::ordered_json j;
      j["epoch"] = e.epoch;
      j["mean_loss"] = e.mean_loss;
      j["val_auc"] = e.val_auc ? nlohmann::ordered_json(*e.val_auc)
                               : nlohmann::ordered_json(nullptr);
      epochs << j.dump() << '\n';
    }
  }
  return result;
}

}  // namespace repdfd
