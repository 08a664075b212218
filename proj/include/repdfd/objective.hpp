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

#ifndef REPDFD_OBJECTIVE_HPP_
#define REPDFD_OBJECTIVE_HPP_

#include <span>

#include "repdfd/encoders.hpp"
#include "repdfd/face2text.hpp"
#include "repdfd/image.hpp"
#include "repdfd/transform.hpp"

namespace repdfd {

inline constexpr int kLabelReal = 0;
inline constexpr int kLabelFake = 1;
inline constexpr double kProbabilityEpsilon = 1e-12;

struct ClassScores {
  double p_real = 0.5;
  double p_fake = 0.5;
  // cos(w_i, f) / tau
  double logit_real = 0.0;
  double logit_fake = 0.0;
};

// Throws NumericError when either vector has zero norm.
double cosine(const Vector& a, const Vector& b);

// Two-way softmax over the cosine logits.
ClassScores scores_from_features(const Vector& image_feature,
                                 const ClassTextFeatures& text,
                                 double temperature);

ClassScores predict(const TextFeatureProvider& text, const VisualPrompt& vp,
                    const Image& x);
ClassScores predict(const FrozenEncoders& enc, const VisualPrompt& vp,
                    const TemplateConfig& cfg, const FaceProjection& proj,
                    const Image& x);

// Cross-entropy -log P(label | x); the probability is clamped at 1e-12.
double loss(const ClassScores& scores, int label);

struct LabeledImage {
  const Image* image = nullptr;
  int label = kLabelReal;
};

struct GradientResult {
  // Mean d loss / d delta over the batch; interior entries exactly zero.
  Image gradient;
  double mean_loss = 0.0;
};

// Backpropagates through the image encoder only; text features are treated
// as constants. Per-sample terms are reduced in batch order.
GradientResult loss_and_grad_delta(const TextFeatureProvider& text,
                                   const VisualPrompt& vp,
                                   std::span<const LabeledImage> batch);

Image grad_delta(const TextFeatureProvider& text, const VisualPrompt& vp,
                 std::span<const LabeledImage> batch);

// Mean loss over the batch, forward only.
double batch_loss(const TextFeatureProvider& text, const VisualPrompt& vp,
                  std::span<const LabeledImage> batch);

}  // namespace repdfd

#endif  // REPDFD_OBJECTIVE_HPP_
