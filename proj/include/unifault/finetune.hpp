// SPDX-License-Identifier: Apache-2.0
//
// Few-shot sampling, linear adapter training with cross-entropy, metrics and
// embedding export.
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "unifault/checkpoint.hpp"
#include "unifault/encoder.hpp"
#include "unifault/optim.hpp"

namespace unifault {

enum class FewShotMode { per_class_k, total_count, fraction };
std::string to_string(FewShotMode mode);
FewShotMode few_shot_mode_from_string(const std::string& s);

struct FewShotSpec {
  FewShotMode mode = FewShotMode::per_class_k;
  double value = 10;  // K, m or p
  std::uint64_t seed = 0;

  void validate() const;
};

/// Indices into `labels` (ascending). Pass the training pool only.
std::vector<std::size_t> sample_few_shot(std::span<const int> labels, const FewShotSpec& spec,
                                         std::size_t num_classes);

std::vector<MultichannelWindow> sample_few_shot(std::span<const MultichannelWindow> train_pool,
                                                const FewShotSpec& spec, std::size_t num_classes);

/// Id of a multichannel sample: the channel-0 window id without its channel tag.
std::string sample_id(const MultichannelWindow& mw);

/// Labels of a labeled set; throws DataError on a missing or out-of-range label.
std::vector<int> labels_of(std::span<const MultichannelWindow> samples, std::size_t num_classes);

struct AdapterHead {
  Matrix<float> weight;  // width x classes
  RowVector<float> bias;

  static AdapterHead init(std::size_t width, std::size_t num_classes, std::uint64_t seed);
  std::size_t width() const { return static_cast<std::size_t>(weight.rows()); }
  std::size_t num_classes() const { return static_cast<std::size_t>(weight.cols()); }
  Matrix<float> logits(const Matrix<float>& features) const;
};

CheckpointFile adapter_checkpoint(const AdapterHead& head);
AdapterHead adapter_from_checkpoint(const CheckpointFile& file);

enum class FinetuneMode { head_only, full };
std::string to_string(FinetuneMode mode);
FinetuneMode finetune_mode_from_string(const std::string& s);

struct FinetuneConfig {
  FinetuneMode mode = FinetuneMode::head_only;
  std::size_t batch_size = 64;
  std::size_t epochs = 200;
  OptimizerConfig optimizer;
  ScheduleConfig schedule;
  double backbone_lr_factor = 0.1;  // full mode only
  std::uint64_t seed = 0;
  std::size_t threads = 1;

  void validate() const;
};

struct FinetuneEpoch {
  std::size_t epoch = 0;
  double loss = 0.0;  // mean over batches
  double train_accuracy = 0.0;
  std::optional<double> validation_accuracy;
};

struct FinetuneResult {
  AdapterHead head;
  std::optional<Parameters<float>> backbone;  // full mode only
  std::vector<FinetuneEpoch> log;
  double initial_loss = 0.0;
  std::size_t selected_epoch = 0;
};

/// Mean softmax cross-entropy of logits against labels.
double cross_entropy(const Matrix<float>& logits, std::span<const int> labels);

/// Trains an adapter on fixed features. The best-validation epoch is kept
/// when validation features are given, otherwise the last one.
FinetuneResult finetune_features(const Matrix<float>& features, std::span<const int> labels, std::size_t num_classes,
                                 const FinetuneConfig& cfg, const Matrix<float>* val_features = nullptr,
                                 std::span<const int> val_labels = {});

FinetuneResult finetune(const Parameters<float>& backbone, const EncoderConfig& enc,
                        std::span<const MultichannelWindow> subset, std::size_t num_classes, const FinetuneConfig& cfg,
                        std::span<const MultichannelWindow> validation = {});

struct Metrics {
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  double micro_f1 = 0.0;
  std::vector<double> per_class_f1;
  std::vector<std::vector<std::size_t>> confusion;  // [true][predicted]
  std::uint64_t seed = 0;
  std::size_t n_eval = 0;
};

Metrics compute_metrics(std::span<const int> truth, std::span<const int> predicted, std::size_t num_classes);

/// Arg-max class per row; ties go to the lower index.
std::vector<int> predict(const AdapterHead& head, const Matrix<float>& features);

Metrics evaluate(const Parameters<float>& backbone, const EncoderConfig& enc, const AdapterHead& head,
                 std::span<const MultichannelWindow> test, std::size_t threads = 1);

std::string metrics_to_json(const Metrics& m, const std::string& dataset, const std::string& mode);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population
};
MeanStd mean_std(std::span<const double> values);

/// "mean ± std" with values scaled by `scale`, e.g. 0.955 -> "95.50 ± 1.60".
std::string format_mean_std(const MeanStd& ms, double scale = 100.0, int precision = 2);

struct MetricGroup {
  std::string key;
  std::vector<Metrics> runs;
};
std::string aggregate_table(std::span<const MetricGroup> groups);
std::string aggregate_json(std::span<const MetricGroup> groups, const std::string& dataset, const std::string& mode);

/// Header "window_id,label,e0,...", one row per sample, 9 significant digits.
std::string embeddings_csv(std::span<const std::string> ids, std::span<const std::optional<int>> labels,
                           const Matrix<float>& embeddings);

void export_embeddings(const std::filesystem::path& path, std::span<const MultichannelWindow> corpus,
                       const Parameters<float>& backbone, const EncoderConfig& enc, std::size_t threads = 1);

}  // namespace unifault
