// SPDX-License-Identifier: Apache-2.0
#include "unifault/experiment.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include <spdlog/fmt/fmt.h>
#include <spdlog/spdlog.h>

#include "unifault/checkpoint.hpp"
#include "unifault/digest.hpp"
#include "unifault/errors.hpp"
#include "unifault/rng.hpp"

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace unifault {

ExperimentConfig::ExperimentConfig() {
  // Desk-scale defaults. Inputs centred on zero keep pooled embeddings of
  // different windows apart at initialization; with [0, 1] inputs the shared
  // offset dominates every token and the contrastive objective starts (and
  // stays) collapsed. The learning rate follows the batch size linearly from
  // 1e-3 at 512.
  harmonize.normalize_low = -1.0;
  harmonize.normalize_high = 1.0;
  optimizer.learning_rate = 1e-3 * static_cast<double>(pretrain.batch_size) / 512.0;
}

void ExperimentConfig::validate() const {
  if (threads < 1) throw ConfigError("threads must be >= 1");
  harmonize.validate();
  for (const auto* r : {&pretrain_split, &target_split}) {
    const double sum = (*r)[0] + (*r)[1] + (*r)[2];
    if ((*r)[0] < 0 || (*r)[1] < 0 || (*r)[2] < 0 || std::abs(sum - 1.0) > 1e-9)
      throw ConfigError("split ratios must be non-negative and sum to 1");
  }
  fusion.validate();
  augment.validate();
  encoder.validate();
  if (encoder.input_length != harmonize.target_length)
    throw ConfigError(fmt::format("encoder.input_length ({}) must equal harmonize.target_length ({})",
                                  encoder.input_length, harmonize.target_length));
  contrastive.validate();
  optimizer.validate();
  schedule.validate();
  pretrain.validate();
  few_shot.validate();
  for (auto k : kshots)
    if (k < 1) throw ConfigError("kshots entries must be >= 1");
  if (repeats < 1) throw ConfigError("few_shot.repeats must be >= 1");
  finetune.validate();
}

namespace {

// Reads known keys of one JSON object and rejects the rest.
class Section {
 public:
  Section(const nlohmann::json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) throw ConfigError("config section '" + name_ + "' must be an object");
  }
  ~Section() noexcept(false) {
    if (std::uncaught_exceptions() > 0) return;
    for (const auto& [key, value] : j_.items())
      if (!seen_.count(key)) throw ConfigError("unknown config key '" + name_ + "." + key + "'");
  }

  template <typename T>
  void get(const std::string& key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("config key '" + name_ + "." + key + "': " + e.what());
    }
  }

  void get_path(const std::string& key, fs::path& out) {
    std::string s = out.string();
    get(key, s);
    out = s;
  }

  void get_range(const std::string& key, double& lo, double& hi) {
    std::array<double, 2> r{lo, hi};
    get(key, r);
    lo = r[0];
    hi = r[1];
  }

  const nlohmann::json* child(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

 private:
  const nlohmann::json& j_;
  std::string name_;
  std::set<std::string> seen_;
};

}  // namespace

ExperimentConfig experiment_from_json(const nlohmann::json& j, ExperimentConfig c) {
  Section top(j, "config");
  top.get("seed", c.seed);
  top.get("threads", c.threads);
  if (const auto* s = top.child("paths")) {
    Section p(*s, "paths");
    p.get_path("benchmark_dir", c.benchmark_dir);
    p.get_path("output_dir", c.output_dir);
  }
  if (const auto* s = top.child("synth")) {
    Section p(*s, "synth");
    p.get("num_domains", c.synth_domains);
    p.get("num_classes", c.synth_classes);
  }
  if (const auto* s = top.child("harmonize")) {
    Section p(*s, "harmonize");
    p.get("window_duration_s", c.harmonize.window_duration_s);
    p.get("target_length", c.harmonize.target_length);
    p.get_range("normalize_range", c.harmonize.normalize_low, c.harmonize.normalize_high);
    p.get("epsilon_degenerate", c.harmonize.epsilon_degenerate);
    p.get("prefilter", c.harmonize.prefilter);
    p.get("pretrain_split", c.pretrain_split);
    p.get("target_split", c.target_split);
  }
  if (const auto* s = top.child("fusion")) {
    Section p(*s, "fusion");
    p.get("enabled", c.fusion_enabled);
    p.get_range("lambda_range", c.fusion.lambda_low, c.fusion.lambda_high);
    p.get("window_T", c.fusion.window_T);
    p.get("fused_fraction", c.fusion.fused_fraction);
  }
  if (const auto* s = top.child("augment")) {
    Section p(*s, "augment");
    p.get_range("shift_range", c.augment.shift_low, c.augment.shift_high);
    p.get("scale_mean", c.augment.scale_mean);
    p.get("scale_std", c.augment.scale_std);
    p.get("jitter_std", c.augment.jitter_std);
  }
  if (const auto* s = top.child("encoder")) {
    Section p(*s, "encoder");
    std::string variant = c.encoder.variant;
    p.get("variant", variant);
    if (variant != c.encoder.variant) c.encoder = EncoderConfig::preset(variant);
    p.get("input_length", c.encoder.input_length);
    p.get("patch_size", c.encoder.patch_size);
    p.get("model_dim", c.encoder.model_dim);
    p.get("num_layers", c.encoder.num_layers);
    p.get("num_heads", c.encoder.num_heads);
    p.get("ffn_ratio", c.encoder.ffn_ratio);
  }
  if (const auto* s = top.child("contrastive")) {
    Section p(*s, "contrastive");
    p.get("temperature", c.contrastive.temperature);
    p.get("include_self_term", c.contrastive.include_self_term);
  }
  if (const auto* s = top.child("optimizer")) {
    Section p(*s, "optimizer");
    p.get("beta1", c.optimizer.beta1);
    p.get("beta2", c.optimizer.beta2);
    p.get("learning_rate", c.optimizer.learning_rate);
    p.get("weight_decay", c.optimizer.weight_decay);
    p.get("epsilon", c.optimizer.epsilon);
  }
  if (const auto* s = top.child("schedule")) {
    Section p(*s, "schedule");
    p.get("first_cycle", c.schedule.first_cycle);
    p.get("cycle_mult", c.schedule.cycle_mult);
    p.get("min_lr_fraction", c.schedule.min_lr_fraction);
  }
  if (const auto* s = top.child("pretrain")) {
    Section p(*s, "pretrain");
    p.get("batch_size", c.pretrain.batch_size);
    p.get("epochs", c.pretrain.epochs);
  }
  if (const auto* s = top.child("few_shot")) {
    Section p(*s, "few_shot");
    std::string mode = to_string(c.few_shot.mode);
    p.get("mode", mode);
    c.few_shot.mode = few_shot_mode_from_string(mode);
    p.get("value", c.few_shot.value);
    p.get("kshots", c.kshots);
    p.get("repeats", c.repeats);
  }
  if (const auto* s = top.child("finetune")) {
    Section p(*s, "finetune");
    std::string mode = to_string(c.finetune.mode);
    p.get("mode", mode);
    c.finetune.mode = finetune_mode_from_string(mode);
    p.get("batch_size", c.finetune.batch_size);
    p.get("epochs", c.finetune.epochs);
    p.get("learning_rate", c.finetune.optimizer.learning_rate);
    p.get("weight_decay", c.finetune.optimizer.weight_decay);
    p.get("backbone_lr_factor", c.finetune.backbone_lr_factor);
  }
  return c;
}

ojson experiment_to_json(const ExperimentConfig& c) {
  ojson j;
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  j["paths"] = {{"benchmark_dir", c.benchmark_dir.generic_string()}, {"output_dir", c.output_dir.generic_string()}};
  j["synth"] = {{"num_domains", c.synth_domains}, {"num_classes", c.synth_classes}};
  j["harmonize"] = {{"window_duration_s", c.harmonize.window_duration_s},
                    {"target_length", c.harmonize.target_length},
                    {"normalize_range", {c.harmonize.normalize_low, c.harmonize.normalize_high}},
                    {"epsilon_degenerate", c.harmonize.epsilon_degenerate},
                    {"prefilter", c.harmonize.prefilter},
                    {"pretrain_split", c.pretrain_split},
                    {"target_split", c.target_split}};
  j["fusion"] = {{"enabled", c.fusion_enabled},
                 {"lambda_range", {c.fusion.lambda_low, c.fusion.lambda_high}},
                 {"window_T", c.fusion.window_T},
                 {"fused_fraction", c.fusion.fused_fraction}};
  j["augment"] = {{"shift_range", {c.augment.shift_low, c.augment.shift_high}},
                  {"scale_mean", c.augment.scale_mean},
                  {"scale_std", c.augment.scale_std},
                  {"jitter_std", c.augment.jitter_std}};
  j["encoder"] = {{"variant", c.encoder.variant},       {"input_length", c.encoder.input_length},
                  {"patch_size", c.encoder.patch_size}, {"model_dim", c.encoder.model_dim},
                  {"num_layers", c.encoder.num_layers}, {"num_heads", c.encoder.num_heads},
                  {"ffn_ratio", c.encoder.ffn_ratio}};
  j["contrastive"] = {{"temperature", c.contrastive.temperature},
                      {"include_self_term", c.contrastive.include_self_term}};
  j["optimizer"] = {{"beta1", c.optimizer.beta1},
                    {"beta2", c.optimizer.beta2},
                    {"learning_rate", c.optimizer.learning_rate},
                    {"weight_decay", c.optimizer.weight_decay},
                    {"epsilon", c.optimizer.epsilon}};
  j["schedule"] = {{"first_cycle", c.schedule.first_cycle},
                   {"cycle_mult", c.schedule.cycle_mult},
                   {"min_lr_fraction", c.schedule.min_lr_fraction}};
  j["pretrain"] = {{"batch_size", c.pretrain.batch_size}, {"epochs", c.pretrain.epochs}};
  j["few_shot"] = {{"mode", to_string(c.few_shot.mode)},
                   {"value", c.few_shot.value},
                   {"kshots", c.kshots},
                   {"repeats", c.repeats}};
  j["finetune"] = {{"mode", to_string(c.finetune.mode)},
                   {"batch_size", c.finetune.batch_size},
                   {"epochs", c.finetune.epochs},
                   {"learning_rate", c.finetune.optimizer.learning_rate},
                   {"weight_decay", c.finetune.optimizer.weight_decay},
                   {"backbone_lr_factor", c.finetune.backbone_lr_factor}};
  return j;
}

ExperimentConfig load_experiment(const fs::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  } catch (const IoError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return experiment_from_json(j);
}

FusionConfig fusion_settings(const ExperimentConfig& cfg) {
  FusionConfig f = cfg.fusion;
  f.seed = derive_seed(cfg.seed, 0xF0);
  return f;
}

PretrainSettings pretrain_settings(const ExperimentConfig& cfg) {
  PretrainSettings s;
  s.augment = cfg.augment;
  s.augment.seed = derive_seed(cfg.seed, 0xA0);
  s.contrastive = cfg.contrastive;
  s.optimizer = cfg.optimizer;
  s.schedule = cfg.schedule;
  s.run = cfg.pretrain;
  s.run.seed = cfg.seed;
  s.run.fusion = cfg.fusion_enabled;
  return s;
}

FinetuneConfig finetune_settings(const ExperimentConfig& cfg, std::uint64_t run_seed) {
  FinetuneConfig f = cfg.finetune;
  f.schedule = cfg.schedule;
  f.seed = run_seed;
  f.threads = cfg.threads;
  return f;
}

std::vector<std::uint64_t> repeat_seeds(const ExperimentConfig& cfg) {
  std::vector<std::uint64_t> out;
  for (std::size_t i = 0; i < cfg.repeats; ++i) out.push_back(cfg.seed + i);
  return out;
}

namespace {

std::string short_digest(const ojson& j) { return sha256_hex(std::string_view(j.dump())).substr(0, 16); }

ojson corpus_key(const ExperimentConfig& cfg) {
  const auto full = experiment_to_json(cfg);
  ojson k;
  k["seed"] = cfg.seed;
  k["benchmark"] = digest_directory(cfg.benchmark_dir);
  k["harmonize"] = full["harmonize"];
  k["fusion"] = full["fusion"];
  return k;
}

ojson pretrain_key(const ExperimentConfig& cfg) {
  const auto full = experiment_to_json(cfg);
  ojson k;
  k["corpus"] = corpus_dir(cfg).filename().string();
  for (const char* s : {"augment", "encoder", "contrastive", "optimizer", "schedule", "pretrain"}) k[s] = full[s];
  return k;
}

void persist_config(const fs::path& dir, const ExperimentConfig& cfg) {
  write_text_file(dir / "config.json", experiment_to_json(cfg).dump(2) + "\n");
}

void reset_dir(const fs::path& dir) {
  std::error_code ec;
  fs::remove_all(dir, ec);
  fs::create_directories(dir);
}

std::vector<CorpusEntry> entries_of(const HarmonizedDataset& ds) {
  std::vector<CorpusEntry> out;
  for (std::size_t s = 0; s < 3; ++s)
    for (const auto& w : ds.splits[s].windows) out.push_back({w, static_cast<Split>(s)});
  return out;
}

}  // namespace

fs::path corpus_dir(const ExperimentConfig& cfg) { return cfg.output_dir / ("corpus-" + short_digest(corpus_key(cfg))); }

fs::path pretrain_dir(const ExperimentConfig& cfg) {
  return cfg.output_dir / ("pretrain-" + short_digest(pretrain_key(cfg)));
}

fs::path finetune_dir(const ExperimentConfig& cfg, const fs::path& checkpoint) {
  const auto full = experiment_to_json(cfg);
  ojson k;
  k["checkpoint"] = digest_file(checkpoint);
  k["corpus"] = corpus_dir(cfg).filename().string();
  k["seed"] = cfg.seed;
  k["schedule"] = full["schedule"];
  k["few_shot"] = full["few_shot"];
  k["finetune"] = full["finetune"];
  return cfg.output_dir / ("finetune-" + short_digest(k));
}

BenchmarkLayout run_synth(const ExperimentConfig& cfg) {
  const auto spec = default_benchmark(cfg.seed, cfg.synth_domains, cfg.synth_classes);
  reset_dir(cfg.benchmark_dir);
  auto layout = generate_benchmark(spec, cfg.benchmark_dir);
  // Only what shaped the data, so the directory digest ignores unrelated settings.
  const auto full = experiment_to_json(cfg);
  ojson j;
  j["seed"] = full.at("seed");
  j["synth"] = full.at("synth");
  write_text_file(cfg.benchmark_dir / "config.json", j.dump(2) + "\n");
  return layout;
}

PreprocessSummary run_preprocess(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto layout = read_benchmark_layout(cfg.benchmark_dir);
  PreprocessSummary out;
  out.dir = corpus_dir(cfg);
  reset_dir(out.dir);

  NormalizerStats all_stats;
  std::vector<CorpusEntry> pretrain_entries;
  std::vector<std::pair<std::string, std::vector<Window>>> train_by_dataset;
  ojson target_desc;
  for (const auto& manifest_path : layout.manifests) {
    const auto manifest = read_manifest(manifest_path);
    const bool is_target = manifest.dataset_id == layout.target_domain;
    const auto& ratios = is_target ? cfg.target_split : cfg.pretrain_split;
    const auto split = split_dataset(manifest, ratios, cfg.seed);
    const auto ds = harmonize_dataset(manifest, manifest_path.parent_path(), cfg.harmonize, split);
    for (const auto& [key, ext] : ds.stats.groups) all_stats.groups[key] = ext;
    auto entries = entries_of(ds);
    if (is_target) {
      write_corpus(out.dir / "target", entries, cfg.harmonize);
      out.target_windows = entries.size();
      target_desc["dataset_id"] = ds.dataset_id;
      target_desc["label_names"] = ds.label_names;
    } else {
      out.raw_windows += entries.size();
      out.raw_train_windows += ds.of(Split::train).windows.size();
      train_by_dataset.emplace_back(ds.dataset_id, ds.of(Split::train).windows);
      for (auto& e : entries) pretrain_entries.push_back(std::move(e));
    }
  }
  if (layout.target_domain.empty()) throw DataError("benchmark has no target domain");

  if (cfg.fusion_enabled) {
    auto fused = generate_fused_corpus(train_by_dataset, fusion_settings(cfg));
    out.fused_windows = fused.size();
    for (auto& w : fused) pretrain_entries.push_back({std::move(w), Split::train});
  }
  write_corpus(out.dir / "pretrain", pretrain_entries, cfg.harmonize);
  write_text_file(out.dir / "stats.json", all_stats.to_json());
  write_text_file(out.dir / "target.json", target_desc.dump(2) + "\n");
  out.stats_groups = all_stats.groups.size();

  ojson summary;
  summary["raw_windows"] = out.raw_windows;
  summary["raw_train_windows"] = out.raw_train_windows;
  summary["fused_windows"] = out.fused_windows;
  summary["target_windows"] = out.target_windows;
  summary["stats_groups"] = out.stats_groups;
  summary["pretrain_domains"] = layout.pretrain_domains;
  summary["target_domain"] = layout.target_domain;
  write_text_file(out.dir / "summary.json", summary.dump(2) + "\n");
  persist_config(out.dir, cfg);
  return out;
}

std::vector<Window> load_pretrain_windows(const fs::path& corpus) {
  std::vector<Window> out;
  for (auto& e : read_corpus(corpus / "pretrain"))
    if (e.split == Split::train) out.push_back(std::move(e.window));
  return out;
}

TargetData load_target(const fs::path& corpus) {
  TargetData t;
  try {
    const auto j = nlohmann::json::parse(read_text_file(corpus / "target.json"));
    t.dataset_id = j.at("dataset_id").get<std::string>();
    t.label_names = j.at("label_names").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("target.json: ") + e.what());
  }
  std::array<std::vector<Window>, 3> by_split;
  for (auto& e : read_corpus(corpus / "target")) by_split[static_cast<std::size_t>(e.split)].push_back(std::move(e.window));
  for (std::size_t s = 0; s < 3; ++s) t.splits[s] = group_multichannel(by_split[s]);
  return t;
}

PretrainSummary run_pretrain(const ExperimentConfig& cfg, bool verbose) {
  cfg.validate();
  const auto corpus = corpus_dir(cfg);
  if (!fs::exists(corpus / "pretrain" / "index.json"))
    throw DataError("no preprocessed corpus at " + corpus.string() + "; run preprocess first");
  const auto windows = load_pretrain_windows(corpus);

  PretrainSummary out;
  out.dir = pretrain_dir(cfg);
  out.corpus_size = windows.size();
  reset_dir(out.dir);
  persist_config(out.dir, cfg);

  std::ofstream log(out.dir / "log.jsonl", std::ios::binary);
  if (!log) throw IoError("cannot open " + (out.dir / "log.jsonl").string());
  PretrainHooks hooks;
  hooks.on_step = [&](const StepRecord& r) {
    log << to_jsonl(r) << '\n';
    if (verbose && r.step % 10 == 0)
      spdlog::info("step {} epoch {} loss {:.4f} lr {:.3g} ({:.0f} ms)", r.step, r.epoch, r.loss, r.lr, r.wall_ms);
  };
  hooks.on_epoch = [&](const EpochRecord& r, const Parameters<float>& p) {
    log << to_jsonl(r) << '\n';
    log.flush();
    save_checkpoint(p, cfg.encoder, out.dir / fmt::format("epoch_{:02}.ufck", r.epoch));
    if (verbose) spdlog::info("epoch {} mean loss {:.4f} ({:.1f} s)", r.epoch, r.mean_loss, r.wall_ms / 1000.0);
  };
  auto result =
      pretrain(windows, init_parameters<float>(cfg.encoder, cfg.seed), cfg.encoder, pretrain_settings(cfg), hooks);
  out.checkpoint = out.dir / "checkpoint.ufck";
  save_checkpoint(result.params, cfg.encoder, out.checkpoint);
  out.epochs = result.epochs;
  out.steps = result.steps.size();
  return out;
}

namespace {

struct SweepPoint {
  std::string key;
  FewShotSpec spec;
};

std::vector<SweepPoint> sweep_points(const ExperimentConfig& cfg) {
  std::vector<SweepPoint> out;
  if (cfg.kshots.empty()) {
    out.push_back({fmt::format("{}={}", to_string(cfg.few_shot.mode), cfg.few_shot.value), cfg.few_shot});
  } else {
    for (auto k : cfg.kshots) {
      FewShotSpec s;
      s.mode = FewShotMode::per_class_k;
      s.value = static_cast<double>(k);
      out.push_back({fmt::format("K={}", k), s});
    }
  }
  return out;
}

fs::path resolve_checkpoint(const ExperimentConfig& cfg, const std::optional<fs::path>& checkpoint) {
  if (checkpoint) return *checkpoint;
  return pretrain_dir(cfg) / "checkpoint.ufck";
}

std::string run_dir_name(const std::string& key, std::uint64_t seed) {
  std::string k = key;
  std::replace(k.begin(), k.end(), '=', '_');
  return fmt::format("{}/seed_{}", k, seed);
}

void write_aggregate(const fs::path& dir, const std::vector<MetricGroup>& groups, const std::string& dataset,
                     const std::string& mode) {
  write_text_file(dir / "aggregate.json", aggregate_json(groups, dataset, mode) + "\n");
  write_text_file(dir / "aggregate.txt", aggregate_table(groups));
}

}  // namespace

FinetuneSummary run_finetune_eval(const ExperimentConfig& cfg, const std::optional<fs::path>& checkpoint) {
  cfg.validate();
  const auto ckpt = resolve_checkpoint(cfg, checkpoint);
  auto [backbone, enc] = load_checkpoint(ckpt, cfg.encoder);
  const auto target = load_target(corpus_dir(cfg));
  const std::size_t num_classes = target.label_names.size();
  const auto& pool = target.splits[static_cast<std::size_t>(Split::train)];
  const auto& val = target.splits[static_cast<std::size_t>(Split::validation)];
  const auto& test = target.splits[static_cast<std::size_t>(Split::test)];

  FinetuneSummary out;
  out.dir = finetune_dir(cfg, ckpt);
  reset_dir(out.dir);
  persist_config(out.dir, cfg);
  const std::string mode = to_string(cfg.finetune.mode);

  for (const auto& point : sweep_points(cfg)) {
    MetricGroup group{point.key, {}};
    for (auto seed : repeat_seeds(cfg)) {
      FewShotSpec spec = point.spec;
      spec.seed = derive_seed(seed, 0xF5);
      const auto subset = sample_few_shot(pool, spec, num_classes);
      const auto fcfg = finetune_settings(cfg, seed);
      const auto result = finetune(backbone, enc, subset, num_classes, fcfg, val);
      const auto& model = result.backbone ? *result.backbone : backbone;
      auto metrics = evaluate(model, enc, result.head, test, cfg.threads);
      metrics.seed = seed;

      const auto run_dir = out.dir / run_dir_name(point.key, seed);
      write_text_file(run_dir / "metrics.json", metrics_to_json(metrics, target.dataset_id, mode) + "\n");
      write_file_bytes(run_dir / "adapter.ufck", encode_checkpoint(adapter_checkpoint(result.head)));
      if (result.backbone) save_checkpoint(*result.backbone, enc, run_dir / "backbone.ufck");
      ojson info;
      info["subset_size"] = subset.size();
      info["initial_loss"] = result.initial_loss;
      info["selected_epoch"] = result.selected_epoch;
      info["subset_ids"] = ojson::array();
      for (const auto& s : subset) info["subset_ids"].push_back(sample_id(s));
      write_text_file(run_dir / "run.json", info.dump(2) + "\n");
      group.runs.push_back(std::move(metrics));
    }
    out.groups.push_back(std::move(group));
  }
  write_aggregate(out.dir, out.groups, target.dataset_id, mode);
  return out;
}

FinetuneSummary run_evaluate(const ExperimentConfig& cfg, const std::optional<fs::path>& checkpoint) {
  cfg.validate();
  const auto ckpt = resolve_checkpoint(cfg, checkpoint);
  auto [backbone, enc] = load_checkpoint(ckpt, cfg.encoder);
  const auto target = load_target(corpus_dir(cfg));
  const auto& test = target.splits[static_cast<std::size_t>(Split::test)];

  FinetuneSummary out;
  out.dir = finetune_dir(cfg, ckpt);
  if (!fs::exists(out.dir)) throw DataError("no fine-tune results at " + out.dir.string() + "; run finetune first");
  for (const auto& point : sweep_points(cfg)) {
    MetricGroup group{point.key, {}};
    for (auto seed : repeat_seeds(cfg)) {
      const auto run_dir = out.dir / run_dir_name(point.key, seed);
      const auto head = adapter_from_checkpoint(decode_checkpoint(read_file_bytes(run_dir / "adapter.ufck")));
      const bool own_backbone = fs::exists(run_dir / "backbone.ufck");
      const auto model = own_backbone ? load_checkpoint(run_dir / "backbone.ufck", enc).first : backbone;
      auto metrics = evaluate(model, enc, head, test, cfg.threads);
      metrics.seed = seed;
      group.runs.push_back(std::move(metrics));
    }
    out.groups.push_back(std::move(group));
  }
  return out;
}

}  // namespace unifault
