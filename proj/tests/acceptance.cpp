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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "repdfd/checkpoint.hpp"
#include "repdfd/data.hpp"
#include "repdfd/encoders.hpp"
#include "repdfd/eval.hpp"
#include "repdfd/face2text.hpp"
#include "repdfd/objective.hpp"
#include "repdfd/trainer.hpp"
#include "repdfd/transform.hpp"
#include "test_util.hpp"

namespace repdfd {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      if (pass) detail << "failed: ";
      else detail << "; ";
      detail << what;
      pass = false;
    }
  }
};

// ---------------------------------------------------------------------------
// 1. Parameter accounting.

Verdict parameter_accounting() {
  Verdict v;
  const auto t0 = Clock::now();
  // Border width and the reported trainable-parameter count in millions.
  const std::pair<int, const char*> table[] = {
      {12, "0.031"}, {23, "0.055"}, {34, "0.078"}, {45, "0.097"},
      {56, "0.113"}, {67, "0.126"}, {78, "0.137"}};
  for (auto [p, printed] : table) {
    const std::int64_t n = prompt_param_count(224, 224, p);
    const std::int64_t direct = 3 * (224LL * 224 - (224LL - 2 * p) * (224 - 2 * p));
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", static_cast<double>(n) / 1e6);
    v.require(n == direct, "p=" + std::to_string(p) + " count " + std::to_string(n));
    v.require(std::string(buf) == printed,
              "p=" + std::to_string(p) + " gives " + buf + "M, reported " + printed);
  }
  v.require(prompt_param_count(224, 224, 34) == 77520, "p=34 != 77520");

  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> side(1, 256);
  for (int trial = 0; trial < 200; ++trial) {
    const int h = side(rng), w = side(rng);
    const int p = std::uniform_int_distribution<int>(0, (std::min(h, w) - 1) / 2)(rng);
    const auto mask = build_border_mask(h, w, p);
    if (prompt_param_count(h, w, p) != 3 * static_cast<std::int64_t>(mask.count()))
      v.require(false, "mask mismatch at " + std::to_string(h) + "x" +
                           std::to_string(w) + " p=" + std::to_string(p));
  }
  const double t = seconds_since(t0);
  v.require(t < 1.0, "runtime " + std::to_string(t) + " s");
  if (v.pass) v.detail << "7 reported counts exact, 200 random geometries, " << t << " s";
  return v;
}

// ---------------------------------------------------------------------------
// 2. Gradient correctness.

Verdict gradient_correctness() {
  Verdict v;
  const auto t0 = Clock::now();
  auto enc = build_toy_backend(ToyBackendSpec{});
  SyntheticSpec spec;
  spec.train_videos = 4;
  spec.train_frames_per_video = 2;
  spec.test_videos = 0;
  const auto samples = synthetic_samples(generate_synthetic(spec), enc->normalization());
  std::vector<LabeledImage> batch;
  for (const auto& s : samples) batch.push_back({&s.input, s.record.label});

  const FaceProjection proj = init_projection(enc->face_dim(), enc->token_dim(), 0);
  TextFeatureProvider text(*enc, TemplateConfig::parse("T0T3"), proj);
  std::mt19937_64 rng(2);
  VisualPrompt vp = testing::random_prompt(rng, 32, 32, 6, 0.3);
  const Image g = grad_delta(text, vp, batch);

  const BorderMask& mask = vp.mask();
  for (int r = 0; r < 32; ++r)
    for (int c = 0; c < 32; ++c)
      for (int ch = 0; ch < 3; ++ch)
        if (!mask.on_border(r, c) && g.at(r, c, ch) != 0.0)
          v.require(false, "nonzero interior gradient");

  std::vector<double> values = vp.border_values();
  const auto& offsets = vp.border_offsets();
  std::uniform_int_distribution<std::size_t> pick(0, values.size() - 1);
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    const std::size_t j = pick(rng);
    const double numeric = testing::central_difference(
        [&] {
          vp.set_border_values(values);
          return batch_loss(text, vp, batch);
        },
        values[j], 1e-4);
    worst = std::max(worst, testing::relative_error(g.values()[offsets[j]], numeric));
  }
  v.require(worst <= 1e-4, "max relative error " + std::to_string(worst));
  const double t = seconds_since(t0);
  v.require(t < 30.0, "runtime " + std::to_string(t) + " s");
  if (v.pass)
    v.detail << "50 border coordinates, max relative error " << worst
             << ", interior exactly zero, " << t << " s";
  return v;
}

// ---------------------------------------------------------------------------
// 3, 4, 8. Learnability, frozenness and determinism on the synthetic task.

struct ToyRun {
  std::vector<std::uint8_t> checkpoint_bytes;
  double test_auc = 0.0;
  double seconds = 0.0;
};

TrainConfig toy_config() {
  TrainConfig cfg;
  cfg.border_width = 6;
  cfg.learning_rate = 0.02;
  cfg.batch_size = 32;
  cfg.epochs = 10;
  cfg.seed = 7;
  cfg.optimizer = OptimizerKind::kAdamW;
  cfg.template_config = TemplateConfigId::kT0T3;
  return cfg;
}

ToyRun run_toy(const FrozenEncoders& enc, const std::vector<Sample>& train_set,
               const std::vector<Sample>& test_set) {
  const auto t0 = Clock::now();
  const TrainResult r = train(train_set, {}, toy_config(), enc);
  ToyRun run;
  run.checkpoint_bytes = encode_checkpoint(r.checkpoint);
  run.test_auc = evaluate(test_set, r.checkpoint, enc)[0].frame_auc;
  run.seconds = seconds_since(t0);
  return run;
}

struct ToyTask {
  std::unique_ptr<FrozenEncoders> enc = build_toy_backend(ToyBackendSpec{});
  std::vector<Sample> train_set;
  std::vector<Sample> test_set;
  std::size_t videos = 0;

  ToyTask() {
    const auto all = synthetic_samples(generate_synthetic(SyntheticSpec{}),
                                       enc->normalization());
    std::set<std::string> ids;
    for (const auto& s : all) {
      ids.insert(s.record.video_id);
      (s.record.split == Split::kTrain ? train_set : test_set).push_back(s);
    }
    videos = ids.size();
  }
};

Verdict learnability(const ToyTask& task, const ToyRun& run) {
  Verdict v;
  const TrainConfig cfg = toy_config();
  const Checkpoint zero{init_prompt(32, 32, cfg.border_width),
                        TemplateConfig(cfg.template_config),
                        ResizeKernel::kBilinearHalfPixel,
                        projection_for(*task.enc, cfg)};
  const double baseline = evaluate(task.test_set, zero, *task.enc)[0].frame_auc;
  v.require(task.train_set.size() == 400 && task.test_set.size() == 200 &&
                task.videos == 40,
            "synthetic task shape");
  v.require(run.test_auc >= 0.95, "test AUC " + std::to_string(run.test_auc));
  v.require(baseline <= 0.65, "baseline AUC " + std::to_string(baseline));
  v.require(run.seconds < 120.0, "runtime " + std::to_string(run.seconds) + " s");
  if (v.pass)
    v.detail << "test AUC " << run.test_auc << " after 10 epochs, zero-prompt "
             << "baseline " << baseline << ", " << run.seconds << " s";
  return v;
}

Verdict frozenness(const std::string& enc_before, const std::string& enc_after,
                   const std::string& proj_before, const std::string& proj_after) {
  Verdict v;
  v.require(enc_before == enc_after, "encoder digest changed");
  v.require(proj_before == proj_after, "projection digest changed");
  if (v.pass) v.detail << "encoder " << enc_after.substr(0, 12) << ", projection "
                       << proj_after.substr(0, 12) << " unchanged";
  return v;
}

Verdict determinism(const ToyRun& a, const ToyRun& b) {
  Verdict v;
  v.require(a.checkpoint_bytes == b.checkpoint_bytes, "checkpoints differ");
  if (v.pass) v.detail << "two runs, " << a.checkpoint_bytes.size()
                       << "-byte checkpoints identical";
  return v;
}

// ---------------------------------------------------------------------------
// 5. AUC oracle equivalence.

Verdict auc_oracle() {
  Verdict v;
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 199);
    std::vector<double> s(n);
    std::vector<int> y(n);
    std::normal_distribution<double> z;
    for (int i = 0; i < n; ++i) {
      s[i] = z(rng);
      y[i] = static_cast<int>(rng() % 2);
    }
    y[0] = 0;
    y[1] = 1;
    // Inject ties.
    for (int k = 0; k < n / 3; ++k) s[rng() % n] = s[rng() % n];
    const double a = auc(s, y);
    const double oracle = testing::brute_force_auc(s, y);
    std::vector<int> flipped(n);
    std::vector<double> mono(n);
    for (int i = 0; i < n; ++i) {
      flipped[i] = 1 - y[i];
      mono[i] = std::atan(s[i]) * 5.0 + 2.0;
    }
    const std::string at = " (case " + std::to_string(trial) + ")";
    if (std::abs(a - oracle) > 1e-12) v.require(false, "oracle mismatch" + at);
    if (std::abs(auc(s, flipped) - (1.0 - a)) > 1e-12)
      v.require(false, "complement symmetry" + at);
    if (std::abs(auc(mono, y) - a) > 1e-12)
      v.require(false, "monotone invariance" + at);
  }
  if (v.pass) v.detail << "100 cases with ties match the pairwise oracle to 1e-12";
  return v;
}

// ---------------------------------------------------------------------------
// 6. Input transformation structure.

Verdict transform_structure() {
  Verdict v;
  std::mt19937_64 rng(6);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int h = 16 + static_cast<int>(rng() % 48);
    const int w = 16 + static_cast<int>(rng() % 48);
    const int p = static_cast<int>(rng() % ((std::min(h, w) - 1) / 2 + 1));
    const Image x = testing::random_image(rng, 8 + rng() % 80, 8 + rng() % 80);
    const VisualPrompt d1 = testing::random_prompt(rng, h, w, p, 1.0);
    const VisualPrompt d2 = testing::random_prompt(rng, h, w, p, 1.0);
    const Image t1 = apply_input_transform(x, d1).pixels;
    if (!(interior_of(t1, p) == resize_bilinear(x, h - 2 * p, w - 2 * p)))
      v.require(false, "interior differs (case " + std::to_string(trial) + ")");

    const double a = std::normal_distribution<double>()(rng);
    const double b = std::normal_distribution<double>()(rng);
    std::vector<double> mixed(d1.param_count());
    for (std::size_t k = 0; k < mixed.size(); ++k)
      mixed[k] = a * d1.border_values()[k] + b * d2.border_values()[k];
    VisualPrompt dm(h, w, p);
    dm.set_border_values(mixed);
    const Image tm = apply_input_transform(x, dm).pixels;
    const Image t2 = apply_input_transform(x, d2).pixels;
    const Image t0 = apply_input_transform(x, VisualPrompt(h, w, p)).pixels;
    for (std::size_t i = 0; i < tm.size(); ++i) {
      const double rhs = a * t1.values()[i] + b * t2.values()[i] +
                         (1.0 - a - b) * t0.values()[i];
      worst = std::max(worst, std::abs(tm.values()[i] - rhs));
    }
  }
  v.require(worst <= 1e-10, "linearity error " + std::to_string(worst));
  if (v.pass) v.detail << "100 cases, interior bit-exact, max linearity error " << worst;
  return v;
}

// ---------------------------------------------------------------------------
// 7. Template semantics.

Verdict template_semantics(const ToyTask& task) {
  Verdict v;
  const FrozenEncoders& enc = *task.enc;
  const FaceProjection proj = init_projection(enc.face_dim(), enc.token_dim(), 7);
  const Image& face_a = task.train_set.front().input;
  const Image& face_b = task.train_set.back().input;
  v.require(task.train_set.front().record.video_id != task.train_set.back().record.video_id,
            "faces not distinct");

  TextFeatureProvider t0t3(enc, TemplateConfig::parse("T0T3"), proj);
  const auto a = t0t3.features(face_a), b = t0t3.features(face_b);
  v.require(a.real == b.real, "T0T3 w_real depends on the image");
  v.require(a.fake != b.fake, "T0T3 w_fake is image independent");

  TextFeatureProvider t0t1(enc, TemplateConfig::parse("T0T1"), proj);
  const auto c = t0t1.features(face_a), d = t0t1.features(face_b);
  v.require(c.real == d.real && c.fake == d.fake, "T0T1 depends on the image");

  std::mt19937_64 rng(7);
  for (TemplateConfigId id : TemplateConfig::all_ids()) {
    const Checkpoint ck{testing::random_prompt(rng, 32, 32, 6, 0.5), TemplateConfig(id),
                        ResizeKernel::kBilinearHalfPixel, proj};
    const Checkpoint back = decode_checkpoint(encode_checkpoint(ck));
    v.require(back.templates.id() == id, "template id lost");
    // delta is stored as float32; compare against the float32 image of the input.
    bool exact = back.prompt.delta().size() == ck.prompt.delta().size();
    for (std::size_t i = 0; exact && i < ck.prompt.delta().size(); ++i)
      exact = back.prompt.delta().values()[i] ==
              static_cast<double>(static_cast<float>(ck.prompt.delta().values()[i]));
    v.require(exact, "delta not preserved");
    v.require(encode_checkpoint(back) == encode_checkpoint(ck), "re-encoding differs");
  }
  if (v.pass)
    v.detail << "T0T3 dynamic fake side only, T0T1 static, 5 template ids round-trip";
  return v;
}

}  // namespace
}  // namespace repdfd

int main() {
  using namespace repdfd;
  std::vector<std::pair<std::string, Verdict>> results;
  auto record = [&](const std::string& name, Verdict v) {
    std::cout << (v.pass ? "PASS" : "FAIL") << "  " << name << ": "
              << v.detail.str() << std::endl;
    results.emplace_back(name, std::move(v));
  };

  try {
    record("1 parameter accounting", parameter_accounting());
    record("2 gradient correctness", gradient_correctness());

    ToyTask task;
    const std::string enc_before = task.enc->weights_digest();
    const std::string proj_before = projection_for(*task.enc, toy_config()).digest();
    const ToyRun first = run_toy(*task.enc, task.train_set, task.test_set);
    const std::string enc_after = task.enc->weights_digest();
    const std::string proj_after =
        decode_checkpoint(first.checkpoint_bytes).projection.digest();
    record("3 reprogramming learnability", learnability(task, first));
    record("4 frozenness", frozenness(enc_before, enc_after, proj_before, proj_after));
    record("5 AUC oracle equivalence", auc_oracle());
    record("6 input transformation structure", transform_structure());
    record("7 template semantics", template_semantics(task));
    const ToyRun second = run_toy(*task.enc, task.train_set, task.test_set);
    record("8 determinism", determinism(first, second));
  } catch (const std::exception& e) {
    std::cout << "FAIL  aborted: " << e.what() << std::endl;
    return 1;
  }

  int failed = 0;
  for (const auto& [name, v] : results) failed += v.pass ? 0 : 1;
  std::cout << (results.size() - failed) << "/" << results.size()
            << " acceptance criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
