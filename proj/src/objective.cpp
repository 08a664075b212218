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

#include "repdfd/objective.hpp"

#include <algorithm>
#include <cmath>

#include "repdfd/error.hpp"

namespace repdfd {

double cosine(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw InputError("cosine: dimension mismatch");
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0)
    throw NumericError("cosine: zero-norm feature vector");
  return a.dot(b) / (na * nb);
}

ClassScores scores_from_features(const Vector& image_feature,
                                 const ClassTextFeatures& text,
                                 double temperature) {
  ClassScores s;
  s.logit_real = cosine(text.real, image_feature) / temperature;
  s.logit_fake = cosine(text.fake, image_feature) / temperature;
  const double m = std::max(s.logit_real, s.logit_fake);
  const double er = std::exp(s.logit_real - m);
  const double ef = std::exp(s.logit_fake - m);
  s.p_real = er / (er + ef);
  s.p_fake = ef / (er + ef);
  return s;
}

ClassScores predict(const TextFeatureProvider& text, const VisualPrompt& vp,
                    const Image& x) {
  const FrozenEncoders& enc = text.encoders();
  const Image prompted = apply_input_transform(x, vp).pixels;
  return scores_from_features(enc.encode_image(prompted), text.features(x),
                              enc.temperature());
}

ClassScores predict(const FrozenEncoders& enc, const VisualPrompt& vp,
                    const TemplateConfig& cfg, const FaceProjection& proj,
                    const Image& x) {
  return predict(TextFeatureProvider(enc, cfg, proj), vp, x);
}

double loss(const ClassScores& scores, int label) {
  if (label != kLabelReal && label != kLabelFake)
    throw InputError("loss: label must be 0 or 1");
  const double p = label == kLabelFake ? scores.p_fake : scores.p_real;
  return -std::log(std::max(p, kProbabilityEpsilon));
}

namespace {

void check_batch(const VisualPrompt& vp, std::span<const LabeledImage> batch) {
  if (batch.empty()) throw InputError("empty batch");
  if (vp.delta().empty()) throw ContractError("uninitialized visual prompt");
  for (const auto& s : batch)
    if (s.image == nullptr) throw InputError("batch holds a null image");
}

// d cos(w, f) / d f
Vector cosine_grad(const Vector& w, const Vector& f) {
  const double nw = w.norm();
  const double nf = f.norm();
  if (nw == 0.0 || nf == 0.0)
    throw NumericError("cosine: zero-norm feature vector");
  const double c = w.dot(f) / (nw * nf);
  return w / (nw * nf) - c * f / (nf * nf);
}

}  // namespace

GradientResult loss_and_grad_delta(const TextFeatureProvider& text,
                                   const VisualPrompt& vp,
                                   std::span<const LabeledImage> batch) {
  check_batch(vp, batch);
  const FrozenEncoders& enc = text.encoders();
  const double tau = enc.temperature();

  GradientResult out;
  out.gradient = Image(vp.height(), vp.width());
  auto acc = out.gradient.values();
  double loss_sum = 0.0;

  for (const auto& sample : batch) {
    const Image prompted = apply_input_transform(*sample.image, vp).pixels;
    const Vector f = enc.encode_image(prompted);
    const ClassTextFeatures w = text.features(*sample.image);
    const ClassScores s = scores_from_features(f, w, tau);
    loss_sum += loss(s, sample.label);

    // d loss / d logit_i = p_i - [i == label]
    const double d_real = s.p_real - (sample.label == kLabelReal ? 1.0 : 0.0);
    const double d_fake = s.p_fake - (sample.label == kLabelFake ? 1.0 : 0.0);
    const Vector df = (d_real * cosine_grad(w.real, f) +
                       d_fake * cosine_grad(w.fake, f)) /
                      tau;
    const Image dx = enc.encode_image_vjp(prompted, df);
    auto g = dx.values();
    for (std::size_t off : vp.border_offsets()) acc[off] += g[off];
  }

  const double n = static_cast<double>(batch.size());
  for (std::size_t off : vp.border_offsets()) acc[off] /= n;
  out.mean_loss = loss_sum / n;
  return out;
}

Image grad_delta(const TextFeatureProvider& text, const VisualPrompt& vp,
                 std::span<const LabeledImage> batch) {
  return loss_and_grad_delta(text, vp, batch).gradient;
}

double batch_loss(const TextFeatureProvider& text, const VisualPrompt& vp,
                  std::span<const LabeledImage> batch) {
  check_batch(vp, batch);
  double sum = 0.0;
  for (const auto& s : batch) sum += loss(predict(text, vp, *s.image), s.label);
  return sum / static_cast<double>(batch.size());
}

}  // namespace repdfd
