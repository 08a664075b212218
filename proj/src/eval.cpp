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

#include "repdfd/eval.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <numeric>
#include <sstream>

#include "repdfd/error.hpp"
#include "repdfd/objective.hpp"

namespace repdfd {

double auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size())
    throw InputError("auc: scores and labels differ in length");
  std::int64_t n_pos = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1)
      throw InputError("auc: labels must be 0 or 1");
    if (std::isnan(scores[i])) throw InputError("auc: NaN score");
    n_pos += labels[i];
  }
  const std::int64_t n_neg = static_cast<std::int64_t>(labels.size()) - n_pos;
  if (n_pos == 0 || n_neg == 0)
    throw UndefinedMetricError("auc: both classes must be present");

  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Mann-Whitney U from midranks. Ranks are doubled to stay integral.
  std::int64_t rank_sum2 = 0;
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) ++j;
    const auto doubled_midrank = static_cast<std::int64_t>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k)
      if (labels[idx[k]] == 1) rank_sum2 += doubled_midrank;
    i = j;
  }
  const std::int64_t u2 = rank_sum2 - n_pos * (n_pos + 1);
  return static_cast<double>(u2) /
         (2.0 * static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

std::map<std::string, double> video_scores(
    const std::map<std::string, std::vector<double>>& frame_scores) {
  std::map<std::string, double> out;
  for (const auto& [video, frames] : frame_scores) {
    if (frames.empty())
      throw InputError("video_scores: video '" + video + "' has no frames");
    // Summing in sorted order makes the mean independent of frame order.
    std::vector<double> sorted = frames;
    std::sort(sorted.begin(), sorted.end());
    const double sum = std::accumulate(sorted.begin(), sorted.end(), 0.0);
    out[video] = sum / static_cast<double>(sorted.size());
  }
  return out;
}

nlohmann::json to_json(const EvalReport& r) {
  return {{"dataset", r.dataset},
          {"frame_auc", r.frame_auc},
          {"video_auc", r.video_auc},
          {"n_frames", r.n_frames},
          {"n_videos", r.n_videos},
          {"prompt_checkpoint", r.prompt_checkpoint},
          {"template_config", r.template_config}};
}

namespace {

void check_compatible(const Checkpoint& ckpt, const FrozenEncoders& enc) {
  if (ckpt.prompt.height() != enc.input_height() ||
      ckpt.prompt.width() != enc.input_width())
    throw ConfigError("checkpoint prompt is " +
                      std::to_string(ckpt.prompt.height()) + "x" +
                      std::to_string(ckpt.prompt.width()) +
                      " but backend input is " +
                      std::to_string(enc.input_height()) + "x" +
                      std::to_string(enc.input_width()));
  if (ckpt.projection.face_dim() != enc.face_dim() ||
      ckpt.projection.token_dim() != enc.token_dim())
    throw ConfigError("checkpoint projection dims do not match backend");
}

EvalReport report_for(const std::string& dataset,
                      std::span<const Sample> samples,
                      std::span<const double> scores,
                      const std::vector<std::size_t>& members) {
  EvalReport r;
  r.dataset = dataset;
  std::vector<double> s;
  std::vector<int> l;
  std::map<std::string, std::vector<double>> per_video;
  std::map<std::string, int> video_label;
  for (std::size_t i : members) {
    const SampleRecord& rec = samples[i].record;
    s.push_back(scores[i]);
    l.push_back(rec.label);
    per_video[rec.video_id].push_back(scores[i]);
    auto [it, inserted] = video_label.emplace(rec.video_id, rec.label);
    if (!inserted && it->second != rec.label)
      throw InputError("video '" + rec.video_id + "' mixes labels");
  }
  r.frame_auc = auc(s, l);
  std::vector<double> vs;
  std::vector<int> vl;
  for (const auto& [video, score] : video_scores(per_video)) {
    vs.push_back(score);
    vl.push_back(video_label.at(video));
  }
  r.video_auc = auc(vs, vl);
  r.n_frames = static_cast<std::int64_t>(s.size());
  r.n_videos = static_cast<std::int64_t>(vs.size());
  return r;
}

}  // namespace

std::vector<double> score_samples(std::span<const Sample> samples,
                                  const Checkpoint& ckpt,
                                  const FrozenEncoders& enc) {
  check_compatible(ckpt, enc);
  const TextFeatureProvider text(enc, ckpt.templates, ckpt.projection);
  std::vector<double> scores;
  scores.reserve(samples.size());
  for (const auto& s : samples)
    scores.push_back(predict(text, ckpt.prompt, s.input).p_fake);
  return scores;
}

std::vector<EvalReport> evaluate(std::span<const Sample> samples,
                                 const Checkpoint& ckpt,
                                 const FrozenEncoders& enc,
                                 const std::string& checkpoint_label) {
  if (samples.empty()) throw InputError("evaluate: no samples");
  const std::vector<double> scores = score_samples(samples, ckpt, enc);

  std::map<std::string, std::vector<std::size_t>> by_dataset;
  std::vector<std::size_t> all(samples.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  for (std::size_t i = 0; i < samples.size(); ++i)
    by_dataset[samples[i].record.dataset].push_back(i);

  std::vector<EvalReport> reports;
  for (const auto& [name, members] : by_dataset)
    reports.push_back(report_for(name, samples, scores, members));
  if (by_dataset.size() > 1)
    reports.push_back(report_for("all", samples, scores, all));
  for (auto& r : reports) {
    r.prompt_checkpoint = checkpoint_label;
    r.template_config = std::string(ckpt.templates.name());
  }
  return reports;
}

std::vector<BorderSweepRow> sweep_border_width(
    std::span<const Sample> train_set, std::span<const Sample> test_set,
    std::span<const int> borders, const TrainConfig& cfg,
    const FrozenEncoders& enc) {
  for (int p : borders)
    check_prompt_geometry(enc.input_height(), enc.input_width(), p);
  std::vector<BorderSweepRow> rows;
  for (int p : borders) {
    TrainConfig run = cfg;
    run.border_width = p;
    const TrainResult tr = train(train_set, {}, run, enc);
    BorderSweepRow row;
    row.border = p;
    row.param_count = prompt_param_count(enc.input_height(), enc.input_width(), p);
    row.is_default = p == kDefaultBorderWidth;
    row.reports = evaluate(test_set, tr.checkpoint, enc,
                           "sweep-p=" + std::to_string(p));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<TemplateSweepRow> sweep_templates(
    std::span<const Sample> train_set, std::span<const Sample> test_set,
    std::span<const TemplateConfigId> configs, const TrainConfig& cfg,
    const FrozenEncoders& enc) {
  std::vector<TemplateSweepRow> rows;
  for (TemplateConfigId id : configs) {
    TrainConfig run = cfg;
    run.template_config = id;
    const TrainResult tr = train(train_set, {}, run, enc);
    const std::string name(TemplateConfig(id).name());
    rows.push_back({name, evaluate(test_set, tr.checkpoint, enc,
                                   "sweep-templates=" + name)});
  }
  return rows;
}

std::vector<SimilarityRow> similarity_analysis(std::span<const Sample> samples,
                                               const VisualPrompt& vp,
                                               const FrozenEncoders& enc,
                                               const FaceProjection& proj) {
  if (samples.empty()) throw InputError("similarity_analysis: no samples");
  if (vp.height() != enc.input_height() || vp.width() != enc.input_width())
    throw ConfigError("similarity_analysis: prompt geometry mismatch");
  if (proj.face_dim() != enc.face_dim() || proj.token_dim() != enc.token_dim())
    throw ConfigError("similarity_analysis: projection dims mismatch");

  const Template templates[] = {Template::kT0, Template::kT1, Template::kT2,
                                Template::kT3};
  std::vector<TokenEmbeddingSequence> seqs;
  std::vector<std::optional<Vector>> static_w;
  for (Template t : templates) {
    seqs.push_back(template_sequence(t, enc.vocabulary()));
    static_w.push_back(seqs.back().id_slot
                           ? std::nullopt
                           : std::optional<Vector>(enc.encode_text(seqs.back())));
  }

  std::map<std::string, std::array<double, 4>> sums;
  std::map<std::string, std::int64_t> counts;
  for (const auto& s : samples) {
    const Vector f = enc.encode_image(apply_input_transform(s.input, vp).pixels);
    std::optional<Vector> s_star;
    auto& acc = sums.try_emplace(s.record.dataset, std::array<double, 4>{}).first->second;
    for (std::size_t t = 0; t < 4; ++t) {
      Vector w;
      if (static_w[t]) {
        w = *static_w[t];
      } else {
        if (!s_star)
          s_star = project_face(proj, enc.encode_face(face_encoder_input(enc, s.input)));
        w = enc.encode_text(substitute_id(seqs[t], *s_star));
      }
      acc[t] += cosine(w, f);
    }
    ++counts[s.record.dataset];
  }

  std::vector<SimilarityRow> rows;
  for (const auto& [dataset, acc] : sums) {
    const std::int64_t n = counts.at(dataset);
    for (std::size_t t = 0; t < 4; ++t)
      rows.push_back({dataset, "T" + std::to_string(t),
                      acc[t] / static_cast<double>(n), n});
  }
  return rows;
}

FeatureDump compute_features(std::span<const Sample> samples,
                             const std::optional<VisualPrompt>& vp,
                             const FrozenEncoders& enc) {
  if (vp && (vp->height() != enc.input_height() ||
             vp->width() != enc.input_width()))
    throw ConfigError("dump_features: prompt geometry mismatch");
  FeatureDump d;
  d.dims = enc.embed_dim();
  d.variants = {"raw"};
  if (vp) d.variants.push_back("prompted");
  for (const auto& s : samples) {
    d.frames.push_back(s.record);
    const Vector raw = enc.encode_image(
        resize_bilinear(s.input, enc.input_height(), enc.input_width()));
    for (Eigen::Index i = 0; i < raw.size(); ++i)
      d.values.push_back(static_cast<float>(raw(i)));
    if (vp) {
      const Vector p = enc.encode_image(apply_input_transform(s.input, *vp).pixels);
      for (Eigen::Index i = 0; i < p.size(); ++i)
        d.values.push_back(static_cast<float>(p(i)));
    }
  }
  return d;
}

void write_features(const std::filesystem::path& path, const FeatureDump& d) {
  nlohmann::ordered_json header;
  header["dims"] = d.dims;
  header["count"] = d.frames.size();
  header["variants"] = d.variants;
  header["dtype"] = "float32-le";
  auto& frames = header["frames"] = nlohmann::ordered_json::array();
  for (const auto& r : d.frames)
    frames.push_back({{"image_path", r.image_path},
                      {"label", r.label},
                      {"video_id", r.video_id},
                      {"split", split_name(r.split)},
                      {"dataset", r.dataset}});
  const std::string text = header.dump();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write features " + path.string());
  const auto len = static_cast<std::uint32_t>(text.size());
  for (int i = 0; i < 4; ++i) out.put(static_cast<char>((len >> (8 * i)) & 0xFF));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (float v : d.values) {
    const auto bits = std::bit_cast<std::uint32_t>(v);
    for (int i = 0; i < 4; ++i) out.put(static_cast<char>((bits >> (8 * i)) & 0xFF));
  }
  if (!out) throw IoError("failed writing features " + path.string());
}

FeatureDump read_features(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open features " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  auto u32 = [&](std::size_t at) {
    if (at + 4 > bytes.size()) throw InputError("features: truncated file");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t{bytes[at + i]} << (8 * i);
    return v;
  };
  const std::uint32_t len = u32(0);
  if (4 + std::size_t{len} > bytes.size())
    throw InputError("features: truncated header");
  const auto header = nlohmann::json::parse(bytes.begin() + 4,
                                            bytes.begin() + 4 + len);
  FeatureDump d;
  d.dims = header.at("dims").get<int>();
  d.variants = header.at("variants").get<std::vector<std::string>>();
  for (const auto& f : header.at("frames")) {
    SampleRecord r;
    r.image_path = f.at("image_path").get<std::string>();
    r.label = f.at("label").get<int>();
    r.video_id = f.at("video_id").get<std::string>();
    r.split = parse_split(f.at("split").get<std::string>());
    r.dataset = f.at("dataset").get<std::string>();
    d.frames.push_back(std::move(r));
  }
  const std::size_t expected = d.frames.size() * d.variants.size() *
                               static_cast<std::size_t>(d.dims);
  std::size_t at = 4 + len;
  if (bytes.size() - at != expected * 4)
    throw InputError("features: payload size does not match header");
  d.values.reserve(expected);
  for (std::size_t i = 0; i < expected; ++i, at += 4)
    d.values.push_back(std::bit_cast<float>(u32(at)));
  return d;
}

namespace {

std::string fixed(double v, int digits = 4) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

}  // namespace

std::string format_reports(std::span<const EvalReport> reports) {
  std::ostringstream os;
  os << std::left << std::setw(16) << "dataset" << std::right << std::setw(11)
     << "frame_auc" << std::setw(11) << "video_auc" << std::setw(10) << "frames"
     << std::setw(9) << "videos" << "  templates\n";
  for (const auto& r : reports)
    os << std::left << std::setw(16) << r.dataset << std::right << std::setw(11)
       << fixed(r.frame_auc) << std::setw(11) << fixed(r.video_auc)
       << std::setw(10) << r.n_frames << std::setw(9) << r.n_videos << "  "
       << r.template_config << '\n';
  return os.str();
}

std::string format_border_sweep(std::span<const BorderSweepRow> rows) {
  std::ostringstream os;
  os << std::setw(5) << "p" << std::setw(10) << "#Para" << std::setw(9)
     << "#Para(M)" << "  " << std::left << std::setw(16) << "dataset"
     << std::right << std::setw(11) << "frame_auc" << std::setw(11)
     << "video_auc" << '\n';
  for (const auto& row : rows)
    for (const auto& r : row.reports)
      os << std::setw(5) << row.border << std::setw(10) << row.param_count
         << std::setw(9) << fixed(row.param_count / 1e6, 3) << "  " << std::left
         << std::setw(16) << r.dataset << std::right << std::setw(11)
         << fixed(r.frame_auc) << std::setw(11) << fixed(r.video_auc)
         << (row.is_default ? "  (default)" : "") << '\n';
  return os.str();
}

std::string format_template_sweep(std::span<const TemplateSweepRow> rows) {
  std::ostringstream os;
  os << std::left << std::setw(8) << "config" << std::setw(16) << "dataset"
     << std::right << std::setw(11) << "frame_auc" << std::setw(11)
     << "video_auc" << '\n';
  for (const auto& row : rows)
    for (const auto& r : row.reports)
      os << std::left << std::setw(8) << row.config << std::setw(16) << r.dataset
         << std::right << std::setw(11) << fixed(r.frame_auc) << std::setw(11)
         << fixed(r.video_auc) << '\n';
  return os.str();
}

std::string format_similarity(std::span<const SimilarityRow> rows) {
  std::ostringstream os;
  os << std::left << std::setw(16) << "dataset" << std::setw(10) << "template"
     << std::right << std::setw(12) << "mean_cos" << std::setw(9) << "images"
     << '\n';
  for (const auto& r : rows)
    os << std::left << std::setw(16) << r.dataset << std::setw(10)
       << r.template_name << std::right << std::setw(12)
       << fixed(r.mean_cosine, 6) << std::setw(9) << r.n_images << '\n';
  return os.str();
}

}  // namespace repdfd
