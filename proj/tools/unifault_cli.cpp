// SPDX-License-Identifier: Apache-2.0
//
// unifault: synth -> preprocess -> pretrain -> finetune -> evaluate.
#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <spdlog/fmt/fmt.h>
#include <spdlog/spdlog.h>

#include "unifault/checkpoint.hpp"
#include "unifault/digest.hpp"
#include "unifault/errors.hpp"
#include "unifault/experiment.hpp"

namespace fs = std::filesystem;
using namespace unifault;

namespace {

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::config: return 2;
    case ErrorKind::data: return 3;
    case ErrorKind::numeric: return 4;
  }
  return 1;
}

struct Overrides {
  std::optional<std::string> config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  std::optional<std::string> benchmark_dir;
  std::optional<std::string> output_dir;
  bool no_fusion = false;
  std::optional<std::string> variant;
  std::optional<std::size_t> epochs;
  std::optional<std::size_t> batch_size;
  std::optional<double> temperature;
  bool exclude_self_term = false;
  std::optional<std::string> finetune_mode;
  std::vector<std::size_t> kshots;
  std::optional<std::size_t> finetune_epochs;
};

std::uint64_t parse_seed(const std::string& text, const char* source) {
  try {
    std::size_t used = 0;
    const auto v = std::stoull(text, &used, 0);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(fmt::format("{}: '{}' is not an unsigned integer seed", source, text));
  }
}

// Flags win over the file; the environment seed applies only when neither sets one.
ExperimentConfig effective_config(const Overrides& o) {
  ExperimentConfig cfg;
  bool file_sets_seed = false;
  if (o.config_path) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(read_text_file(*o.config_path));
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("config " + *o.config_path + ": " + e.what());
    } catch (const IoError& e) {
      throw ConfigError(std::string("config: ") + e.what());
    }
    file_sets_seed = j.is_object() && j.contains("seed");
    cfg = experiment_from_json(j);
  }
  if (o.seed) {
    cfg.seed = *o.seed;
  } else if (!file_sets_seed) {
    if (const char* env = std::getenv("UNIFAULT_SEED"); env && *env) cfg.seed = parse_seed(env, "UNIFAULT_SEED");
  }
  if (o.threads) cfg.threads = *o.threads;
  if (o.benchmark_dir) cfg.benchmark_dir = *o.benchmark_dir;
  if (o.output_dir) cfg.output_dir = *o.output_dir;
  if (o.no_fusion) cfg.fusion_enabled = false;
  if (o.variant) {
    cfg.encoder = EncoderConfig::preset(*o.variant);
    cfg.encoder.input_length = cfg.harmonize.target_length;
  }
  if (o.epochs) cfg.pretrain.epochs = *o.epochs;
  if (o.batch_size) cfg.pretrain.batch_size = *o.batch_size;
  if (o.temperature) cfg.contrastive.temperature = *o.temperature;
  if (o.exclude_self_term) cfg.contrastive.include_self_term = false;
  if (o.finetune_mode) cfg.finetune.mode = finetune_mode_from_string(*o.finetune_mode);
  if (!o.kshots.empty()) cfg.kshots = o.kshots;
  if (o.finetune_epochs) cfg.finetune.epochs = *o.finetune_epochs;
  cfg.validate();
  return cfg;
}

void print_groups(const FinetuneSummary& s) {
  std::vector<MetricGroup> groups = s.groups;
  std::cout << aggregate_table(groups);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"unifault: vibration fault-diagnosis pretraining and few-shot evaluation"};
  app.require_subcommand(1);
  app.fallthrough();
  Overrides o;

  app.add_option_function<std::string>("--config", [&](const std::string& v) { o.config_path = v; },
                                       "JSON experiment configuration");
  app.add_option_function<std::uint64_t>("--seed", [&](std::uint64_t v) { o.seed = v; },
                                         "global seed (falls back to UNIFAULT_SEED, then 0)");
  app.add_option_function<std::size_t>("--threads", [&](std::size_t v) { o.threads = v; }, "worker thread cap");
  app.add_option_function<std::string>("--benchmark-dir", [&](const std::string& v) { o.benchmark_dir = v; },
                                       "benchmark root holding benchmark.json");
  app.add_option_function<std::string>("--output-dir", [&](const std::string& v) { o.output_dir = v; },
                                       "root for stage directories");
  app.add_flag("--no-fusion", o.no_fusion, "disable cross-domain temporal fusion");
  app.add_option_function<std::string>("--variant", [&](const std::string& v) { o.variant = v; }, "lite or base")
      ->check(CLI::IsMember({"lite", "base"}));
  app.add_option_function<std::size_t>("--epochs", [&](std::size_t v) { o.epochs = v; }, "pretraining epochs");
  app.add_option_function<std::size_t>("--batch-size", [&](std::size_t v) { o.batch_size = v; },
                                       "pretraining batch size");
  app.add_option_function<double>("--temperature", [&](double v) { o.temperature = v; }, "contrastive temperature");
  app.add_flag("--exclude-self-term", o.exclude_self_term, "drop the k = i same-view term from the denominator");
  app.add_option_function<std::string>("--mode", [&](const std::string& v) { o.finetune_mode = v; },
                                       "fine-tune mode: head_only or full")
      ->check(CLI::IsMember({"head_only", "full"}));
  app.add_option("--kshot", o.kshots, "comma-separated K values for a per-class K-shot sweep")->delimiter(',');
  app.add_option_function<std::size_t>("--finetune-epochs", [&](std::size_t v) { o.finetune_epochs = v; },
                                       "fine-tune epochs");
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "progress logging");

  auto* synth = app.add_subcommand("synth", "generate the synthetic multi-domain benchmark");
  std::optional<std::string> synth_out;
  synth->add_option_function<std::string>("--out", [&](const std::string& v) { synth_out = v; },
                                          "output directory (defaults to the benchmark dir)");

  auto* preprocess = app.add_subcommand("preprocess", "harmonize domains and generate fused samples");
  auto* pretrain_cmd = app.add_subcommand("pretrain", "contrastive pretraining");

  std::optional<std::string> checkpoint;
  auto* finetune_cmd = app.add_subcommand("finetune", "few-shot fine-tuning and test evaluation over 3 seeds");
  finetune_cmd->add_option_function<std::string>("--checkpoint", [&](const std::string& v) { checkpoint = v; },
                                                  "backbone checkpoint (defaults to the pretrain output)");
  auto* evaluate_cmd = app.add_subcommand("evaluate", "re-evaluate saved adapters on the target test split");
  evaluate_cmd->add_option_function<std::string>("--checkpoint", [&](const std::string& v) { checkpoint = v; },
                                                  "backbone checkpoint");

  auto* export_cmd = app.add_subcommand("export-embeddings", "write pooled target embeddings as CSV");
  std::string export_out;
  std::string export_split = "test";
  export_cmd->add_option("--out", export_out, "CSV path")->required();
  export_cmd->add_option("--split", export_split, "train, validation, test or all")
      ->check(CLI::IsMember({"train", "validation", "test", "all"}));
  export_cmd->add_option_function<std::string>("--checkpoint", [&](const std::string& v) { checkpoint = v; },
                                               "backbone checkpoint");

  auto* params_cmd = app.add_subcommand("params", "print the parameter count of a variant");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  spdlog::set_level(verbose ? spdlog::level::info : spdlog::level::warn);

  try {
    auto cfg = effective_config(o);

    if (params_cmd->parsed()) {
      const auto& enc = cfg.encoder;
      std::cout << fmt::format("{}: {} parameters (d={}, N={}, heads={}, patch={}, tokens={})\n", enc.variant,
                               parameter_count(enc), enc.model_dim, enc.num_layers, enc.num_heads, enc.patch_size,
                               enc.tokens());
      return 0;
    }

    if (synth->parsed()) {
      if (synth_out) cfg.benchmark_dir = *synth_out;
      const auto layout = run_synth(cfg);
      std::cout << fmt::format("benchmark written to {}\n", cfg.benchmark_dir.string());
      for (const auto& m : layout.manifests) std::cout << "  manifest " << m.string() << "\n";
      std::cout << fmt::format("  target domain {}\n  digest {}\n", layout.target_domain,
                               digest_directory(cfg.benchmark_dir));
      return 0;
    }
    if (preprocess->parsed()) {
      const auto s = run_preprocess(cfg);
      std::cout << fmt::format(
          "corpus {}\n  raw windows {} ({} train), fused {}, target {}, normalizer groups {}\n", s.dir.string(),
          s.raw_windows, s.raw_train_windows, s.fused_windows, s.target_windows, s.stats_groups);
      return 0;
    }
    if (pretrain_cmd->parsed()) {
      const auto s = run_pretrain(cfg, verbose);
      std::cout << fmt::format("checkpoint {}\n  {} windows, {} steps\n", s.checkpoint.string(), s.corpus_size,
                               s.steps);
      for (const auto& e : s.epochs) std::cout << fmt::format("  epoch {} mean loss {:.6f}\n", e.epoch, e.mean_loss);
      std::cout << "  digest " << digest_file(s.checkpoint) << "\n";
      return 0;
    }
    const std::optional<fs::path> ckpt = checkpoint ? std::optional<fs::path>(*checkpoint) : std::nullopt;
    if (finetune_cmd->parsed()) {
      const auto s = run_finetune_eval(cfg, ckpt);
      std::cout << "results " << s.dir.string() << "\n";
      print_groups(s);
      return 0;
    }
    if (evaluate_cmd->parsed()) {
      print_groups(run_evaluate(cfg, ckpt));
      return 0;
    }
    if (export_cmd->parsed()) {
      const auto path = ckpt.value_or(pretrain_dir(cfg) / "checkpoint.ufck");
      const auto [backbone, enc] = load_checkpoint(path, cfg.encoder);
      const auto target = load_target(corpus_dir(cfg));
      std::vector<MultichannelWindow> rows;
      for (std::size_t s = 0; s < 3; ++s)
        if (export_split == "all" || export_split == to_string(static_cast<Split>(s)))
          rows.insert(rows.end(), target.splits[s].begin(), target.splits[s].end());
      export_embeddings(export_out, rows, backbone, enc, cfg.threads);
      std::cout << fmt::format("{} rows written to {}\n", rows.size(), export_out);
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
