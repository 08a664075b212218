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

#include "cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "repdfd/checkpoint.hpp"
#include "repdfd/data.hpp"
#include "repdfd/encoders.hpp"
#include "repdfd/error.hpp"
#include "repdfd/eval.hpp"
#include "repdfd/trainer.hpp"

namespace repdfd::cli {
namespace fs = std::filesystem;

namespace {

const std::map<std::string, std::string, std::less<>>& defaults() {
  static const std::map<std::string, std::string, std::less<>> d = {
      {"backend", "toy"},
      {"seed", "0"},
      {"p", "34"},
      {"lr", "1.0"},
      {"weight_decay", "0"},
      {"batch_size", "32"},
      {"epochs", "10"},
      {"optimizer", "adamw-like"},
      {"templates", "T0T3"},
      {"enlarge_factor", "1.3"},
      {"output_size", "224"},
      {"split", "test"},
      {"split_fractions", ""},
      {"sweep_p", "12,23,34,45,56,67,78"},
      {"sweep_templates", "T0T1,T2T1,T2T3,T0T3,RAND"},
      {"toy.seed", "7"},
      {"toy.embed_dim", "32"},
      {"toy.face_dim", "16"},
      {"toy.token_dim", "24"},
      {"toy.hidden_layers", "1"},
      {"toy.hidden_width", "128"},
      {"toy.input_size", "32"},
      {"toy.temperature", "0.01"},
      {"synthetic.seed", "7"},
      {"synthetic.size", "32"},
      {"synthetic.train_videos", "20"},
      {"synthetic.train_frames", "20"},
      {"synthetic.test_videos", "20"},
      {"synthetic.test_frames", "10"},
      {"synthetic.texture_amplitude", "0.25"},
      {"synthetic.identity_contrast", "0.03"},
      {"synthetic.identity_signal", "0"},
      {"synthetic.frame_noise", "0.02"},
      {"synthetic.dataset", "toy"},
  };
  return d;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <typename T>
T as(const Settings& s, std::string_view key) {
  const std::string& text = s.get(key);
  std::istringstream is(text);
  T v{};
  is >> v;
  if (is.fail() || !is.eof())
    throw ConfigError("setting " + std::string(key) + ": cannot parse '" +
                      text + "'");
  return v;
}

}  // namespace

Settings::Settings() : values_(defaults()) {
  if (const char* env = std::getenv("REPDFD_BACKEND"); env && *env)
    values_["backend"] = env;
}

bool Settings::is_known(std::string_view key) const {
  if (defaults().count(key)) return true;
  // Keys for plugin backends: "<registered name>.<option>".
  const auto dot = key.find('.');
  return dot != std::string_view::npos &&
         BackendRegistry::global().contains(key.substr(0, dot));
}

void Settings::set(const std::string& key, const std::string& value) {
  if (!is_known(key)) throw ConfigError("unknown setting '" + key + "'");
  values_[key] = value;
}

std::vector<std::string> Settings::load_file(const std::string& path) {
  std::vector<std::string> keys;
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(line_no) +
                        ": expected key = value");
    try {
      const std::string key = trim(line.substr(0, eq));
      set(key, trim(line.substr(eq + 1)));
      keys.push_back(key);
    } catch (const ConfigError& e) {
      throw ConfigError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return keys;
}

const std::string& Settings::get(std::string_view key) const {
  auto it = values_.find(key);
  if (it == values_.end())
    throw ConfigError("missing setting '" + std::string(key) + "'");
  return it->second;
}

namespace {

struct Invocation {
  std::string command;
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::string> seed, backend, p, templates, epochs, lr,
      batch_size, split;
  std::string out, checkpoint, manifest;
  bool synthetic = false;
  // Keys set by a config file, --set or a flag (as opposed to defaults).
  std::set<std::string> explicit_keys;
};

Settings resolve_settings(Invocation& inv) {
  Settings s;
  auto note = [&](const std::string& k, const std::string& v) {
    s.set(k, v);
    inv.explicit_keys.insert(k);
  };
  if (!inv.config_path.empty())
    for (const auto& k : s.load_file(inv.config_path)) inv.explicit_keys.insert(k);
  for (const auto& kv : inv.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw ConfigError("--set expects key=value, got '" + kv + "'");
    note(trim(kv.substr(0, eq)), trim(kv.substr(eq + 1)));
  }
  const std::pair<const char*, std::optional<std::string>*> flags[] = {
      {"seed", &inv.seed},       {"backend", &inv.backend},
      {"p", &inv.p},             {"templates", &inv.templates},
      {"epochs", &inv.epochs},   {"lr", &inv.lr},
      {"batch_size", &inv.batch_size}, {"split", &inv.split}};
  for (const auto& [key, value] : flags)
    if (*value) note(key, **value);
  return s;
}

std::unique_ptr<FrozenEncoders> make_backend(const Settings& s) {
  const std::string name = s.get("backend");
  BackendOptions options;
  const std::string prefix = name + ".";
  for (const auto& [k, v] : s.values())
    if (k.rfind(prefix, 0) == 0) options[k.substr(prefix.size())] = v;
  return BackendRegistry::global().create(name, options);
}

TrainConfig train_config(const Settings& s) {
  TrainConfig cfg;
  cfg.border_width = as<int>(s, "p");
  cfg.learning_rate = as<double>(s, "lr");
  cfg.weight_decay = as<double>(s, "weight_decay");
  cfg.batch_size = as<int>(s, "batch_size");
  cfg.epochs = as<int>(s, "epochs");
  cfg.seed = as<std::uint64_t>(s, "seed");
  cfg.optimizer = parse_optimizer(s.get("optimizer"));
  cfg.template_config = TemplateConfig::parse(s.get("templates")).id();
  cfg.validate();
  return cfg;
}

CropSpec crop_spec(const Settings& s) {
  CropSpec c;
  c.enlarge_factor = as<double>(s, "enlarge_factor");
  const std::string size = s.get("output_size");
  const auto x = size.find('x');
  try {
    c.output_height = std::stoi(size.substr(0, x));
    c.output_width = x == std::string::npos ? c.output_height
                                            : std::stoi(size.substr(x + 1));
  } catch (const std::exception&) {
    throw ConfigError("output_size: cannot parse '" + size + "'");
  }
  c.validate();
  return c;
}

void require(const std::string& value, const char* flag,
             const std::string& command) {
  if (value.empty())
    throw ConfigError(command + " requires " + std::string(flag));
}

struct Dataset {
  std::vector<SampleRecord> records;
  fs::path base_dir;
};

Dataset read_dataset(const std::string& manifest) {
  Dataset d;
  d.records = load_manifest(manifest);
  d.base_dir = fs::path(manifest).parent_path();
  return d;
}

std::vector<Sample> samples_for(const Dataset& d, const std::string& split,
                                const FrozenEncoders& enc, const Settings& s) {
  std::vector<SampleRecord> chosen;
  if (split == "all") {
    chosen = d.records;
  } else {
    chosen = filter_split(d.records, parse_split(split));
  }
  return load_samples(chosen, d.base_dir, enc.normalization(), crop_spec(s));
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
}

void write_run_manifest(const fs::path& path, const Invocation& inv,
                        const Settings& s, const FrozenEncoders* enc,
                        const nlohmann::ordered_json& extra) {
  nlohmann::ordered_json j;
  j["command"] = inv.command;
  j["settings"] = s.values();
  j["seed"] = s.get("seed");
  if (!inv.manifest.empty()) j["manifest"] = inv.manifest;
  if (!inv.checkpoint.empty()) j["checkpoint"] = inv.checkpoint;
  if (enc) {
    j["backend"] = enc->backend_name();
    j["backend_digest"] = enc->weights_digest();
  }
  for (const auto& [k, v] : extra.items()) j[k] = v;
  write_text(path, j.dump(2) + "\n");
}

void check_checkpoint_matches(const Checkpoint& ckpt, const Invocation& inv,
                              const Settings& s) {
  if (inv.explicit_keys.count("p") && as<int>(s, "p") != ckpt.prompt.border())
    throw ConfigError("checkpoint has p=" +
                      std::to_string(ckpt.prompt.border()) +
                      " but configuration sets p=" + s.get("p"));
  if (inv.explicit_keys.count("templates") &&
      TemplateConfig::parse(s.get("templates")) != ckpt.templates)
    throw ConfigError("checkpoint uses templates " +
                      std::string(ckpt.templates.name()) +
                      " but configuration sets " + s.get("templates"));
}

int cmd_prepare(const Invocation& inv, const Settings& s, std::ostream& out) {
  require(inv.out, "--out", "prepare");
  const fs::path dir(inv.out);
  nlohmann::ordered_json extra;
  if (inv.synthetic) {
    SyntheticSpec spec;
    spec.seed = as<std::uint64_t>(s, "synthetic.seed");
    spec.height = spec.width = as<int>(s, "synthetic.size");
    spec.train_videos = as<int>(s, "synthetic.train_videos");
    spec.train_frames_per_video = as<int>(s, "synthetic.train_frames");
    spec.test_videos = as<int>(s, "synthetic.test_videos");
    spec.test_frames_per_video = as<int>(s, "synthetic.test_frames");
    spec.texture_amplitude = as<double>(s, "synthetic.texture_amplitude");
    spec.identity_contrast = as<double>(s, "synthetic.identity_contrast");
    spec.identity_signal = as<double>(s, "synthetic.identity_signal");
    spec.frame_noise = as<double>(s, "synthetic.frame_noise");
    spec.dataset = s.get("synthetic.dataset");
    const auto data = generate_synthetic(spec);
    const fs::path manifest = write_synthetic(data, dir);
    out << "wrote " << data.records.size() << " frames, manifest "
        << manifest.string() << "\n";
    extra["frames"] = data.records.size();
  } else {
    require(inv.manifest, "--manifest", "prepare");
    const Dataset d = read_dataset(inv.manifest);
    const CropSpec crop = crop_spec(s);
    fs::create_directories(dir / "frames");
    std::vector<SampleRecord> prepared;
    for (std::size_t i = 0; i < d.records.size(); ++i) {
      SampleRecord r = d.records[i];
      fs::path src(r.image_path);
      if (src.is_relative()) src = d.base_dir / src;
      Image pixels = load_image(src);
      if (r.bbox) pixels = crop_face(pixels, *r.bbox, crop);
      std::ostringstream name;
      name << "frames/" << std::setw(6) << std::setfill('0') << i << "_"
           << src.stem().string() << ".png";
      save_image(dir / name.str(), pixels);
      r.image_path = name.str();
      r.bbox.reset();
      prepared.push_back(std::move(r));
    }
    if (const auto fr = split_list(s.get("split_fractions")); !fr.empty()) {
      if (fr.size() != 3)
        throw ConfigError("split_fractions expects train,val,test");
      SplitFractions f{std::stod(fr[0]), std::stod(fr[1]), std::stod(fr[2])};
      prepared = split_by_video(prepared, f, as<std::uint64_t>(s, "seed"));
    }
    write_manifest(dir / "manifest.jsonl", prepared);
    out << "prepared " << prepared.size() << " frames into "
        << (dir / "manifest.jsonl").string() << "\n";
    extra["frames"] = prepared.size();
  }
  write_run_manifest(dir / "run.json", inv, s, nullptr, extra);
  return kExitOk;
}

int cmd_train(const Invocation& inv, const Settings& s, std::ostream& out) {
  require(inv.manifest, "--manifest", "train");
  require(inv.out, "--out", "train");
  const TrainConfig cfg = train_config(s);
  const auto enc = make_backend(s);
  const Dataset d = read_dataset(inv.manifest);
  const auto train_set = samples_for(d, "train", *enc, s);
  const auto val_set = samples_for(d, "val", *enc, s);
  if (train_set.empty()) throw ConfigError("manifest has no train split rows");

  const std::string digest_before = enc->weights_digest();
  const TrainResult result =
      train(train_set, val_set, cfg, *enc, TrainOutputs{fs::path(inv.out)});
  if (enc->weights_digest() != digest_before)
    throw ContractError("encoder weights changed during training");

  for (const auto& e : result.epochs) {
    out << "epoch " << e.epoch << " loss " << e.mean_loss;
    if (e.val_auc) out << " val_auc " << *e.val_auc;
    out << "\n";
  }
  const std::string hash = checkpoint_hash(result.checkpoint);
  out << "checkpoint " << (fs::path(inv.out) / "final.rpdf").string()
      << " sha256 " << hash << "\n";

  nlohmann::ordered_json extra;
  extra["checkpoint_hash"] = hash;
  extra["projection_digest"] = result.checkpoint.projection.digest();
  extra["param_count"] = result.checkpoint.prompt.param_count();
  write_run_manifest(fs::path(inv.out) / "run.json", inv, s, enc.get(), extra);
  return kExitOk;
}

int cmd_eval(const Invocation& inv, const Settings& s, std::ostream& out) {
  require(inv.manifest, "--manifest", "eval");
  require(inv.checkpoint, "--checkpoint", "eval");
  require(inv.out, "--out", "eval");
  const Checkpoint ckpt = load_checkpoint(inv.checkpoint);
  check_checkpoint_matches(ckpt, inv, s);
  const auto enc = make_backend(s);
  const Dataset d = read_dataset(inv.manifest);
  const auto samples = samples_for(d, s.get("split"), *enc, s);
  const auto reports = evaluate(samples, ckpt, *enc, inv.checkpoint);

  const std::string table = format_reports(reports);
  out << table;
  fs::create_directories(inv.out);
  nlohmann::json j = nlohmann::json::array();
  for (const auto& r : reports) j.push_back(to_json(r));
  write_text(fs::path(inv.out) / "eval.json", j.dump(2) + "\n");
  write_text(fs::path(inv.out) / "eval.txt", table);
  nlohmann::ordered_json extra;
  extra["checkpoint_hash"] = checkpoint_hash(ckpt);
  write_run_manifest(fs::path(inv.out) / "run.json", inv, s, enc.get(), extra);
  return kExitOk;
}

std::pair<std::vector<Sample>, std::vector<Sample>> train_and_eval_sets(
    const Invocation& inv, const Settings& s, const FrozenEncoders& enc) {
  require(inv.manifest, "--manifest", inv.command);
  const Dataset d = read_dataset(inv.manifest);
  auto train_set = samples_for(d, "train", enc, s);
  auto eval_set = samples_for(d, s.get("split"), enc, s);
  if (train_set.empty()) throw ConfigError("manifest has no train split rows");
  if (eval_set.empty()) throw ConfigError("manifest has no evaluation rows");
  return {std::move(train_set), std::move(eval_set)};
}

int cmd_sweep_p(const Invocation& inv, const Settings& s, std::ostream& out) {
  require(inv.out, "--out", "sweep-p");
  std::vector<int> borders;
  const std::string list = inv.p ? *inv.p : s.get("sweep_p");
  for (const auto& item : split_list(list)) {
    try {
      borders.push_back(std::stoi(item));
    } catch (const std::exception&) {
      throw ConfigError("sweep-p: bad border width '" + item + "'");
    }
  }
  if (borders.empty()) throw ConfigError("sweep-p: no border widths given");
  Settings base = s;
  base.set("p", std::to_string(borders.front()));
  const TrainConfig cfg = train_config(base);
  const auto enc = make_backend(s);
  const auto [train_set, eval_set] = train_and_eval_sets(inv, s, *enc);
  const auto rows = sweep_border_width(train_set, eval_set, borders, cfg, *enc);

  const std::string table = format_border_sweep(rows);
  out << table;
  fs::create_directories(inv.out);
  nlohmann::json j = nlohmann::json::array();
  for (const auto& row : rows) {
    nlohmann::json reports = nlohmann::json::array();
    for (const auto& r : row.reports) reports.push_back(to_json(r));
    j.push_back({{"p", row.border},
                 {"param_count", row.param_count},
                 {"default", row.is_default},
                 {"reports", reports}});
  }
  write_text(fs::path(inv.out) / "sweep_p.json", j.dump(2) + "\n");
  write_text(fs::path(inv.out) / "sweep_p.txt", table);
  write_run_manifest(fs::path(inv.out) / "run.json", inv, s, enc.get(), {});
  return kExitOk;
}

int cmd_sweep_templates(const Invocation& inv, const Settings& s,
                        std::ostream& out) {
  require(inv.out, "--out", "sweep-templates");
  std::vector<TemplateConfigId> ids;
  const std::string list = inv.templates ? *inv.templates : s.get("sweep_templates");
  for (const auto& item : split_list(list))
    ids.push_back(TemplateConfig::parse(item).id());
  if (ids.empty()) throw ConfigError("sweep-templates: no configs given");
  Settings base = s;
  base.set("templates", std::string(TemplateConfig(ids.front()).name()));
  const TrainConfig cfg = train_config(base);
  const auto enc = make_backend(s);
  const auto [train_set, eval_set] = train_and_eval_sets(inv, s, *enc);
  const auto rows = sweep_templates(train_set, eval_set, ids, cfg, *enc);

  const std::string table = format_template_sweep(rows);
  out << table;
  fs::create_directories(inv.out);
  nlohmann::json j = nlohmann::json::array();
  for (const auto& row : rows) {
    nlohmann::json reports = nlohmann::json::array();
    for (const auto& r : row.reports) reports.push_back(to_json(r));
    j.push_back({{"config", row.config}, {"reports", reports}});
  }
  write_text(fs::path(inv.out) / "sweep_templates.json", j.dump(2) + "\n");
  write_text(fs::path(inv.out) / "sweep_templates.txt", table);
  write_run_manifest(fs::path(inv.out) / "run.json", inv, s, enc.get(), {});
  return kExitOk;
}

int cmd_analyze_sim(const Invocation& inv, const Settings& s,
                    std::ostream& out) {
  require(inv.manifest, "--manifest", "analyze-sim");
  require(inv.out, "--out", "analyze-sim");
  const auto enc = make_backend(s);
  VisualPrompt vp;
  FaceProjection proj = FaceProjection::identity(1);
  nlohmann::ordered_json extra;
  if (!inv.checkpoint.empty()) {
    const Checkpoint ckpt = load_checkpoint(inv.checkpoint);
    check_checkpoint_matches(ckpt, inv, s);
    vp = ckpt.prompt;
    proj = ckpt.projection;
    extra["checkpoint_hash"] = checkpoint_hash(ckpt);
  } else {
    const TrainConfig cfg = train_config(s);
    vp = init_prompt(enc->input_height(), enc->input_width(), cfg.border_width);
    proj = projection_for(*enc, cfg);
  }
  const Dataset d = read_dataset(inv.manifest);
  const auto samples = samples_for(d, s.get("split"), *enc, s);
  const auto rows = similarity_analysis(samples, vp, *enc, proj);

  const std::string table = format_similarity(rows);
  out << table;
  fs::create_directories(inv.out);
  nlohmann::json j = nlohmann::json::array();
  for (const auto& r : rows)
    j.push_back({{"dataset", r.dataset},
                 {"template", r.template_name},
                 {"mean_cosine", r.mean_cosine},
                 {"n_images", r.n_images}});
  write_text(fs::path(inv.out) / "similarity.json", j.dump(2) + "\n");
  write_text(fs::path(inv.out) / "similarity.txt", table);
  write_run_manifest(fs::path(inv.out) / "run.json", inv, s, enc.get(), extra);
  return kExitOk;
}

int cmd_dump_features(const Invocation& inv, const Settings& s,
                      std::ostream& out) {
  require(inv.manifest, "--manifest", "dump-features");
  require(inv.out, "--out", "dump-features");
  const auto enc = make_backend(s);
  std::optional<VisualPrompt> vp;
  nlohmann::ordered_json extra;
  if (!inv.checkpoint.empty()) {
    const Checkpoint ckpt = load_checkpoint(inv.checkpoint);
    check_checkpoint_matches(ckpt, inv, s);
    vp = ckpt.prompt;
    extra["checkpoint_hash"] = checkpoint_hash(ckpt);
  }
  const Dataset d = read_dataset(inv.manifest);
  const auto samples = samples_for(d, s.get("split"), *enc, s);
  const FeatureDump dump = compute_features(samples, vp, *enc);
  const fs::path path(inv.out);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  write_features(path, dump);
  out << "wrote " << dump.frames.size() << " frames x " << dump.variants.size()
      << " variants x " << dump.dims << " dims to " << path.string() << "\n";
  write_run_manifest(path.string() + ".run.json", inv, s, enc.get(), extra);
  return kExitOk;
}

bool is_usage_category(ErrorCategory c) {
  return c == ErrorCategory::kConfiguration || c == ErrorCategory::kGeometry;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{
      "repdfd: border visual prompts and identity-conditioned text prompts "
      "for deepfake detection with frozen vision-language encoders"};
  app.name("repdfd");
  app.require_subcommand(1);
  Invocation inv;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", inv.config_path, "Flat key = value config file");
    sub->add_option("--set", inv.overrides, "Override a config key (key=value)");
    sub->add_option("--seed", inv.seed, "Random seed");
    sub->add_option("--backend", inv.backend,
                    "Encoder backend registry key (default toy, or $REPDFD_BACKEND)");
    sub->add_option("--p", inv.p, "Border width (sweep-p: comma list)");
    sub->add_option("--templates", inv.templates,
                    "Template config T0T1|T2T1|T2T3|T0T3|RAND "
                    "(sweep-templates: comma list)");
    sub->add_option("--epochs", inv.epochs, "Training epochs");
    sub->add_option("--lr", inv.lr, "Learning rate");
    sub->add_option("--batch-size", inv.batch_size, "Batch size");
    sub->add_option("--split", inv.split, "Split to evaluate: train|val|test|all");
    sub->add_option("--out", inv.out, "Output directory (dump-features: file)");
    sub->add_option("--checkpoint", inv.checkpoint, "Prompt checkpoint (.rpdf)");
    sub->add_option("--manifest", inv.manifest, "JSON-lines sample manifest");
  };

  struct Command {
    const char* name;
    const char* help;
    int (*fn)(const Invocation&, const Settings&, std::ostream&);
  };
  const Command commands[] = {
      {"prepare", "Crop faces into a new manifest, or --synthetic toy data",
       cmd_prepare},
      {"train", "Optimize the border prompt on the train split", cmd_train},
      {"eval", "Frame- and video-level AUC of a checkpoint", cmd_eval},
      {"sweep-p", "Train and evaluate over border widths", cmd_sweep_p},
      {"sweep-templates", "Train and evaluate over template configs",
       cmd_sweep_templates},
      {"analyze-sim", "Mean cosine between image features and each template",
       cmd_analyze_sim},
      {"dump-features", "Write raw and prompted image features",
       cmd_dump_features},
  };
  for (const auto& c : commands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    add_common(sub);
    if (std::string_view(c.name) == "prepare")
      sub->add_flag("--synthetic", inv.synthetic,
                    "Generate the bundled synthetic dataset");
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  for (const auto& c : commands) {
    if (!app.got_subcommand(c.name)) continue;
    inv.command = c.name;
    try {
      const Settings settings = resolve_settings(inv);
      return c.fn(inv, settings, out);
    } catch (const Error& e) {
      err << "error[" << category_name(e.category()) << "]: " << e.what()
          << "\n";
      return is_usage_category(e.category()) ? kExitUsage : kExitRuntime;
    } catch (const std::exception& e) {
      err << "error[runtime]: " << e.what() << "\n";
      return kExitRuntime;
    }
  }
  return kExitUsage;
}

}  // namespace repdfd::cli
