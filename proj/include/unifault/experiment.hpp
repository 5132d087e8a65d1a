// SPDX-License-Identifier: Apache-2.0
//
// Experiment configuration and the pipeline stages driven by the CLI:
// synth -> preprocess -> pretrain -> finetune/evaluate. Each stage writes to
// a directory under the output dir whose name carries a digest of the
// configuration it depends on, and persists the effective configuration.
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "unifault/augment.hpp"
#include "unifault/contrastive.hpp"
#include "unifault/encoder.hpp"
#include "unifault/finetune.hpp"
#include "unifault/fusion.hpp"
#include "unifault/harmonize.hpp"
#include "unifault/optim.hpp"
#include "unifault/pretrain.hpp"
#include "unifault/synth.hpp"

namespace unifault {

struct ExperimentConfig {
  ExperimentConfig();

  std::uint64_t seed = 0;
  std::size_t threads = 1;

  std::filesystem::path benchmark_dir = "unifault-data/benchmark";
  std::filesystem::path output_dir = "unifault-data/runs";

  std::size_t synth_domains = 3;
  std::size_t synth_classes = 4;

  HarmonizeConfig harmonize;
  std::array<double, 3> pretrain_split{0.8, 0.1, 0.1};
  std::array<double, 3> target_split{0.5, 0.1, 0.4};

  bool fusion_enabled = true;
  FusionConfig fusion;
  AugmentConfig augment;
  EncoderConfig encoder = EncoderConfig::lite();
  ContrastiveConfig contrastive;
  OptimizerConfig optimizer;
  ScheduleConfig schedule;
  PretrainRunConfig pretrain;

  FewShotSpec few_shot;
  std::vector<std::size_t> kshots;  // empty: a single run with few_shot as given
  std::size_t repeats = 3;
  FinetuneConfig finetune;

  void validate() const;
};

/// Fields present in j override `base`; unknown keys are configuration errors.
ExperimentConfig experiment_from_json(const nlohmann::json& j, ExperimentConfig base = {});
nlohmann::ordered_json experiment_to_json(const ExperimentConfig& cfg);
ExperimentConfig load_experiment(const std::filesystem::path& path);

/// Module configs with seeds derived from the global seed.
FusionConfig fusion_settings(const ExperimentConfig& cfg);
PretrainSettings pretrain_settings(const ExperimentConfig& cfg);
FinetuneConfig finetune_settings(const ExperimentConfig& cfg, std::uint64_t run_seed);
std::vector<std::uint64_t> repeat_seeds(const ExperimentConfig& cfg);

std::filesystem::path corpus_dir(const ExperimentConfig& cfg);
std::filesystem::path pretrain_dir(const ExperimentConfig& cfg);
std::filesystem::path finetune_dir(const ExperimentConfig& cfg, const std::filesystem::path& checkpoint);

BenchmarkLayout run_synth(const ExperimentConfig& cfg);

struct PreprocessSummary {
  std::filesystem::path dir;
  std::size_t raw_windows = 0;  // all splits, pretraining domains
  std::size_t raw_train_windows = 0;
  std::size_t fused_windows = 0;
  std::size_t target_windows = 0;
  std::size_t stats_groups = 0;
};
PreprocessSummary run_preprocess(const ExperimentConfig& cfg);

/// Training windows (raw train split plus fused) of a preprocessed corpus.
std::vector<Window> load_pretrain_windows(const std::filesystem::path& corpus);

struct TargetData {
  std::string dataset_id;
  std::vector<std::string> label_names;
  std::array<std::vector<MultichannelWindow>, 3> splits;
};
TargetData load_target(const std::filesystem::path& corpus);

struct PretrainSummary {
  std::filesystem::path dir;
  std::filesystem::path checkpoint;
  std::vector<EpochRecord> epochs;
  std::size_t steps = 0;
  std::size_t corpus_size = 0;
};
PretrainSummary run_pretrain(const ExperimentConfig& cfg, bool verbose = false);

struct FinetuneSummary {
  std::filesystem::path dir;
  std::vector<MetricGroup> groups;  // keyed "K=<k>" or by few-shot spec
};
/// Runs few-shot sampling, fine-tuning and test evaluation for every seed
/// and every K in cfg.kshots; checkpoint defaults to the pretrain stage output.
FinetuneSummary run_finetune_eval(const ExperimentConfig& cfg,
                                  const std::optional<std::filesystem::path>& checkpoint = std::nullopt);

/// Re-evaluates the adapters saved by run_finetune_eval.
FinetuneSummary run_evaluate(const ExperimentConfig& cfg,
                             const std::optional<std::filesystem::path>& checkpoint = std::nullopt);

}  // namespace unifault
