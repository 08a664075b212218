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

#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <set>

#include "gtest/gtest.h"
#include <nlohmann/json.hpp>

#include "repdfd/error.hpp"
#include "test_util.hpp"

namespace repdfd {
namespace {

// Forwards to a toy backend, optionally flattening the text encoder or
// poisoning the image gradient.
class ForwardingEncoders : public FrozenEncoders {
 public:
  enum class Mode { kPlain, kConstantText, kNanGradient };

  ForwardingEncoders(std::unique_ptr<FrozenEncoders> inner, Mode mode)
      : inner_(std::move(inner)), mode_(mode) {}

  std::string backend_name() const override { return "forwarding"; }
  int input_height() const override { return inner_->input_height(); }
  int input_width() const override { return inner_->input_width(); }
  int embed_dim() const override { return inner_->embed_dim(); }
  int face_dim() const override { return inner_->face_dim(); }
  int token_dim() const override { return inner_->token_dim(); }
  std::size_t max_text_length() const override {
    return inner_->max_text_length();
  }
  double temperature() const override { return inner_->temperature(); }
  const Vocabulary& vocabulary() const override { return inner_->vocabulary(); }
  ChannelNormalization normalization() const override {
    return inner_->normalization();
  }
  std::string weights_digest() const override {
    return inner_->weights_digest();
  }

 protected:
  Vector do_encode_image(const Image& x) const override {
    return inner_->encode_image(x);
  }
  Image do_encode_image_vjp(const Image& x,
                            const Vector& upstream) const override {
    Image g = inner_->encode_image_vjp(x, upstream);
    if (mode_ == Mode::kNanGradient)
      g.values()[0] = std::numeric_limits<double>::quiet_NaN();
    return g;
  }
  Vector do_encode_text(const TokenEmbeddingSequence& tokens) const override {
    if (mode_ == Mode::kConstantText) return Vector::Ones(embed_dim());
    return inner_->encode_text(tokens);
  }
  Vector do_encode_face(const Image& x) const override {
    return inner_->encode_face(x);
  }

 private:
  std::unique_ptr<FrozenEncoders> inner_;
  Mode mode_;
};

class TrainerTest : public ::testing::Test {
 protected:
  void SetUp() override {
    enc_ = build_toy_backend(testing::small_toy_spec());
    SyntheticSpec spec;
    spec.train_videos = 4;
    spec.train_frames_per_video = 4;
    spec.test_videos = 2;
    spec.test_frames_per_video = 2;
    auto all = synthetic_samples(generate_synthetic(spec),
                                 enc_->normalization());
    for (auto& s : all)
      (s.record.split == Split::kTrain ? train_ : val_).push_back(s);
    cfg_.border_width = 4;
    cfg_.learning_rate = 0.05;
    cfg_.batch_size = 5;
    cfg_.epochs = 2;
    cfg_.seed = 3;
  }

  std::vector<LabeledImage> batch(std::size_t n) const {
    std::vector<LabeledImage> b;
    for (std::size_t i = 0; i < n; ++i)
      b.push_back({&train_[i].input, train_[i].record.label});
    return b;
  }

  std::unique_ptr<FrozenEncoders> enc_;
  std::vector<Sample> train_;
  std::vector<Sample> val_;
  TrainConfig cfg_;
};

double max_abs(const Image& x) {
  double m = 0.0;
  for (double v : x.values()) m = std::max(m, std::abs(v));
  return m;
}

void expect_interior_zero(const VisualPrompt& vp) {
  const BorderMask& m = vp.mask();
  const Image& d = vp.delta();
  for (int r = 0; r < d.height(); ++r)
    for (int c = 0; c < d.width(); ++c)
      for (int ch = 0; ch < 3; ++ch)
        if (!m.on_border(r, c)) ASSERT_EQ(d.at(r, c, ch), 0.0);
}

TEST(InitTest, ZeroPrompt) {
  for (auto [h, w, p] : {std::tuple{32, 32, 6}, {224, 224, 34}, {9, 15, 4}}) {
    const VisualPrompt vp = init_prompt(h, w, p);
    EXPECT_EQ(max_abs(vp.delta()), 0.0);
    EXPECT_EQ(vp.param_count(),
              static_cast<std::size_t>(prompt_param_count(h, w, p)));
  }
  EXPECT_THROW(init_prompt(8, 8, 4), GeometryError);
  const TrainState s = init_state(32, 32, 6, 1);
  EXPECT_EQ(s.step, 0);
  EXPECT_EQ(s.first_moment.size(), s.prompt.param_count());
  EXPECT_EQ(s.second_moment.size(), s.prompt.param_count());
}

TEST_F(TrainerTest, FreshPromptEqualsPlainResize) {
  const FaceProjection proj = projection_for(*enc_, cfg_);
  TextFeatureProvider text(*enc_, TemplateConfig::parse("T0T3"), proj);
  const VisualPrompt vp = init_prompt(32, 32, 4);
  const Image& x = train_[0].input;
  Image centered(32, 32);
  const Image inner = resize_bilinear(x, 24, 24);
  for (int r = 0; r < 24; ++r)
    for (int c = 0; c < 24; ++c)
      for (int ch = 0; ch < 3; ++ch)
        centered.at(r + 4, c + 4, ch) = inner.at(r, c, ch);
  const ClassScores a = predict(text, vp, x);
  const ClassScores b = scores_from_features(
      enc_->encode_image(centered), text.features(x), enc_->temperature());
  EXPECT_EQ(a.p_fake, b.p_fake);

  const Checkpoint c{vp, TemplateConfig::parse("T0T3"),
                     ResizeKernel::kBilinearHalfPixel, proj};
  EXPECT_EQ(encode_checkpoint(decode_checkpoint(encode_checkpoint(c))),
            encode_checkpoint(c));
}

TEST_F(TrainerTest, PlainStepIsNegativeGradient) {
  cfg_.optimizer = OptimizerKind::kPlainGradient;
  cfg_.learning_rate = 1.0;
  const FaceProjection proj = projection_for(*enc_, cfg_);
  TextFeatureProvider text(*enc_, TemplateConfig::parse("T0T3"), proj);
  TrainState s = init_state(32, 32, 4, 0);
  const auto b = batch(1);
  const Image g = grad_delta(text, s.prompt, b);
  train_step(s, b, cfg_, text);
  EXPECT_EQ(s.step, 1);
  for (std::size_t i = 0; i < g.size(); ++i)
    EXPECT_EQ(s.prompt.delta().values()[i], -g.values()[i]);
}

TEST_F(TrainerTest, ZeroGradientLeavesPromptUnchanged) {
  ForwardingEncoders flat(build_toy_backend(testing::small_toy_spec()),
                          ForwardingEncoders::Mode::kConstantText);
  cfg_.optimizer = OptimizerKind::kPlainGradient;
  const FaceProjection proj = projection_for(flat, cfg_);
  TextFeatureProvider text(flat, TemplateConfig::parse("RAND"), proj);
  std::mt19937_64 rng(4);
  TrainState s = init_state(32, 32, 4, 0);
  s.prompt = testing::random_prompt(rng, 32, 32, 4, 0.1);
  const VisualPrompt before = s.prompt;
  const StepStats st = train_step(s, batch(4), cfg_, text);
  EXPECT_EQ(st.grad_max, 0.0);
  EXPECT_EQ(s.prompt, before);
}

TEST_F(TrainerTest, NonFiniteGradientAborts) {
  ForwardingEncoders bad(build_toy_backend(testing::small_toy_spec()),
                         ForwardingEncoders::Mode::kNanGradient);
  const FaceProjection proj = projection_for(bad, cfg_);
  TextFeatureProvider text(bad, TemplateConfig::parse("T0T3"), proj);
  TrainState s = init_state(32, 32, 4, 0);
  try {
    train_step(s, batch(2), cfg_, text);
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("step 0"), std::string::npos)
        << e.what();
  }
}

TEST_F(TrainerTest, StepsAreDeterministicAndKeepInteriorZero) {
  for (OptimizerKind kind :
       {OptimizerKind::kAdamW, OptimizerKind::kPlainGradient}) {
    cfg_.optimizer = kind;
    const FaceProjection proj = projection_for(*enc_, cfg_);
    TextFeatureProvider text(*enc_, TemplateConfig::parse("T0T3"), proj);
    TrainState a = init_state(32, 32, 4, 9);
    TrainState b = init_state(32, 32, 4, 9);
    std::set<std::size_t> touched;
    for (int step = 0; step < 10; ++step) {
      const auto bt = batch(1 + step % 5);
      train_step(a, bt, cfg_, text);
      train_step(b, bt, cfg_, text);
      expect_interior_zero(a.prompt);
      for (std::size_t i = 0; i < a.prompt.delta().size(); ++i)
        if (a.prompt.delta().values()[i] != 0.0) touched.insert(i);
    }
    EXPECT_EQ(a.prompt, b.prompt);
    EXPECT_EQ(a.step, 10);
    EXPECT_EQ(touched.size(), a.prompt.param_count());
  }
}

TEST_F(TrainerTest, ZeroLearningRateIsNoOp) {
  cfg_.learning_rate = 0.0;
  const TrainResult r = train(train_, val_, cfg_, *enc_);
  EXPECT_EQ(max_abs(r.checkpoint.prompt.delta()), 0.0);
  EXPECT_FALSE(r.steps.empty());
}

TEST_F(TrainerTest, ZeroEpochsReturnsZeroPrompt) {
  cfg_.epochs = 0;
  const TrainResult r = train(train_, val_, cfg_, *enc_);
  EXPECT_EQ(max_abs(r.checkpoint.prompt.delta()), 0.0);
  EXPECT_TRUE(r.steps.empty());
}

TEST_F(TrainerTest, TrainingLeavesEncodersFrozen) {
  const std::string before = enc_->weights_digest();
  const FaceProjection proj_before = projection_for(*enc_, cfg_);
  const TrainResult r = train(train_, val_, cfg_, *enc_);
  EXPECT_EQ(enc_->weights_digest(), before);
  EXPECT_EQ(r.checkpoint.projection.digest(), proj_before.digest());
  EXPECT_GT(max_abs(r.checkpoint.prompt.delta()), 0.0);
  expect_interior_zero(r.checkpoint.prompt);
}

TEST_F(TrainerTest, EndToEndDeterminism) {
  const TrainResult a = train(train_, val_, cfg_, *enc_);
  const TrainResult b = train(train_, val_, cfg_, *enc_);
  EXPECT_EQ(checkpoint_hash(a.checkpoint), checkpoint_hash(b.checkpoint));
  ASSERT_EQ(a.steps.size(), b.steps.size());
  for (std::size_t i = 0; i < a.steps.size(); ++i)
    EXPECT_EQ(a.steps[i].loss, b.steps[i].loss);
  cfg_.seed = 4;
  const TrainResult c = train(train_, val_, cfg_, *enc_);
  EXPECT_NE(checkpoint_hash(a.checkpoint), checkpoint_hash(c.checkpoint));
}

TEST_F(TrainerTest, WritesLogsAndCheckpoints) {
  const auto dir = testing::scratch_dir("train");
  const TrainResult r = train(train_, val_, cfg_, *enc_, {dir});
  // 16 samples in batches of 5: four steps per epoch.
  ASSERT_EQ(r.steps.size(), 8u);
  ASSERT_EQ(r.epochs.size(), 2u);
  EXPECT_TRUE(r.epochs[0].val_auc.has_value());
  for (const char* f : {"train_log.jsonl", "epoch_log.jsonl", "epoch_1.rpdf",
                        "epoch_2.rpdf", "best.rpdf", "final.rpdf"})
    EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
  EXPECT_EQ(checkpoint_hash(load_checkpoint(dir / "final.rpdf")),
            checkpoint_hash(r.checkpoint));

  std::ifstream log(dir / "train_log.jsonl");
  std::string line;
  std::int64_t prev = 0;
  int lines = 0;
  while (std::getline(log, line)) {
    const auto j = nlohmann::json::parse(line);
    for (const char* k : {"step", "epoch", "loss", "lr", "grad_max", "wallclock"})
      EXPECT_TRUE(j.contains(k)) << k;
    EXPECT_GT(j["step"].get<std::int64_t>(), prev);
    prev = j["step"].get<std::int64_t>();
    ++lines;
  }
  EXPECT_EQ(lines, 8);
  std::filesystem::remove_all(dir);
}

TEST_F(TrainerTest, RejectsBadInputs) {
  EXPECT_THROW(train({}, val_, cfg_, *enc_), ConfigError);
  TrainConfig bad = cfg_;
  bad.batch_size = 0;
  EXPECT_THROW(train(train_, val_, bad, *enc_), ConfigError);
  bad = cfg_;
  bad.learning_rate = -1.0;
  EXPECT_THROW(bad.validate(), ConfigError);
  auto mislabeled = train_;
  mislabeled[0].record.label = 2;
  EXPECT_THROW(train(mislabeled, val_, cfg_, *enc_), ConfigError);
  EXPECT_EQ(parse_optimizer("adamw-like"), OptimizerKind::kAdamW);
  EXPECT_EQ(parse_optimizer("plain-gradient"), OptimizerKind::kPlainGradient);
  EXPECT_THROW(parse_optimizer("lbfgs"), ConfigError);
}

}  // namespace
}  // namespace repdfd
