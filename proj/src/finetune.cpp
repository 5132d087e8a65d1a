// SPDX-License-Identifier: Apache-2.0
#include "unifault/finetune.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include <spdlog/fmt/fmt.h>
#include <spdlog/spdlog.h>

#include "unifault/errors.hpp"
#include "unifault/rng.hpp"

namespace unifault {

std::string to_string(FewShotMode mode) {
  switch (mode) {
    case FewShotMode::per_class_k: return "per_class_k";
    case FewShotMode::total_count: return "total_count";
    case FewShotMode::fraction: return "fraction";
  }
  return "?";
}

FewShotMode few_shot_mode_from_string(const std::string& s) {
  if (s == "per_class_k") return FewShotMode::per_class_k;
  if (s == "total_count") return FewShotMode::total_count;
  if (s == "fraction") return FewShotMode::fraction;
  throw ConfigError("unknown few-shot mode '" + s + "'");
}

void FewShotSpec::validate() const {
  if (!(value > 0.0)) throw ConfigError("few_shot.value must be > 0");
  if (mode == FewShotMode::fraction && value > 1.0) throw ConfigError("few_shot.value must be <= 1 in fraction mode");
  if (mode != FewShotMode::fraction && value != std::floor(value))
    throw ConfigError("few_shot.value must be an integer count");
}

std::vector<std::size_t> sample_few_shot(std::span<const int> labels, const FewShotSpec& spec,
                                         std::size_t num_classes) {
  spec.validate();
  std::vector<std::size_t> picked;
  const std::size_t n = labels.size();
  if (spec.mode == FewShotMode::per_class_k) {
    const auto k = static_cast<std::size_t>(spec.value);
    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t c = 0; c < num_classes; ++c) by_class[static_cast<int>(c)];
    for (std::size_t i = 0; i < n; ++i) by_class[labels[i]].push_back(i);
    for (auto& [label, idx] : by_class) {
      if (idx.size() < k)
        spdlog::warn("few-shot: class {} has {} samples, fewer than K = {}", label, idx.size(), k);
      Rng rng(derive_seed(spec.seed, 0xF5C1A55, static_cast<std::uint64_t>(label)));
      rng.shuffle(std::span<std::size_t>(idx));
      picked.insert(picked.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(std::min(k, idx.size())));
    }
  } else {
    std::size_t m = 0;
    if (spec.mode == FewShotMode::total_count) {
      m = static_cast<std::size_t>(spec.value);
      if (m > n) spdlog::warn("few-shot: requested {} samples from a pool of {}", m, n);
    } else {
      m = static_cast<std::size_t>(std::ceil(spec.value * static_cast<double>(n) - 1e-9));
    }
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    Rng rng(derive_seed(spec.seed, 0xF5C1A55));
    rng.shuffle(std::span<std::size_t>(idx));
    picked.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(std::min(m, n)));
  }
  std::sort(picked.begin(), picked.end());
  return picked;
}

std::vector<int> labels_of(std::span<const MultichannelWindow> samples, std::size_t num_classes) {
  std::vector<int> out;
  out.reserve(samples.size());
  for (const auto& s : samples) {
    const auto l = s.label();
    if (!l) throw DataError("sample " + sample_id(s) + " has no label");
    if (*l < 0 || static_cast<std::size_t>(*l) >= num_classes)
      throw DataError("sample " + sample_id(s) + " has label " + std::to_string(*l) + " outside the label map");
    out.push_back(*l);
  }
  return out;
}

std::vector<MultichannelWindow> sample_few_shot(std::span<const MultichannelWindow> train_pool,
                                                const FewShotSpec& spec, std::size_t num_classes) {
  const auto labels = labels_of(train_pool, num_classes);
  std::vector<MultichannelWindow> out;
  for (auto i : sample_few_shot(labels, spec, num_classes)) out.push_back(train_pool[i]);
  return out;
}

std::string sample_id(const MultichannelWindow& mw) {
  if (mw.per_channel.empty()) return {};
  std::string id = mw.per_channel.front().id;
  const auto c = id.find("#c");
  if (c == std::string::npos) return id;
  const auto next = id.find('#', c + 2);
  return id.substr(0, c) + (next == std::string::npos ? std::string{} : id.substr(next));
}

AdapterHead AdapterHead::init(std::size_t width, std::size_t num_classes, std::uint64_t seed) {
  AdapterHead h;
  h.weight.resize(static_cast<Eigen::Index>(width), static_cast<Eigen::Index>(num_classes));
  Rng rng(derive_seed(seed, 0xADA9));
  for (Eigen::Index i = 0; i < h.weight.size(); ++i) h.weight.data()[i] = static_cast<float>(rng.normal(0.0, 0.02));
  h.bias = RowVector<float>::Zero(static_cast<Eigen::Index>(num_classes));
  return h;
}

Matrix<float> AdapterHead::logits(const Matrix<float>& features) const {
  if (static_cast<std::size_t>(features.cols()) != width())
    throw ShapeError("adapter: feature width " + std::to_string(features.cols()) + " != " + std::to_string(width()));
  Matrix<float> out = features * weight;
  out.rowwise() += bias;
  return out;
}

CheckpointFile adapter_checkpoint(const AdapterHead& head) {
  nlohmann::ordered_json j;
  j["kind"] = "adapter";
  j["width"] = head.width();
  j["num_classes"] = head.num_classes();
  CheckpointFile f;
  f.config_json = j.dump();
  f.tensors.push_back({"adapter.weight", {head.width(), head.num_classes()},
                       std::vector<float>(head.weight.data(), head.weight.data() + head.weight.size())});
  f.tensors.push_back(
      {"adapter.bias", {head.num_classes()}, std::vector<float>(head.bias.data(), head.bias.data() + head.bias.size())});
  return f;
}

AdapterHead adapter_from_checkpoint(const CheckpointFile& file) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(file.config_json);
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointFormatError(std::string("adapter config block: ") + e.what());
  }
  if (j.value("kind", "") != "adapter") throw CheckpointFormatError("checkpoint does not hold an adapter head");
  const auto width = j.at("width").get<std::size_t>();
  const auto classes = j.at("num_classes").get<std::size_t>();
  if (file.tensors.size() != 2 || file.tensors[0].values.size() != width * classes ||
      file.tensors[1].values.size() != classes)
    throw CheckpointFormatError("adapter tensors do not match the declared shape");
  AdapterHead h;
  h.weight = Eigen::Map<const Matrix<float>>(file.tensors[0].values.data(), static_cast<Eigen::Index>(width),
                                             static_cast<Eigen::Index>(classes));
  h.bias = Eigen::Map<const RowVector<float>>(file.tensors[1].values.data(), static_cast<Eigen::Index>(classes));
  return h;
}

std::string to_string(FinetuneMode mode) { return mode == FinetuneMode::head_only ? "head_only" : "full"; }

FinetuneMode finetune_mode_from_string(const std::string& s) {
  if (s == "head_only") return FinetuneMode::head_only;
  if (s == "full") return FinetuneMode::full;
  throw ConfigError("unknown fine-tune mode '" + s + "'");
}

void FinetuneConfig::validate() const {
  if (batch_size < 1) throw ConfigError("finetune.batch_size must be >= 1");
  if (epochs < 1) throw ConfigError("finetune.epochs must be >= 1");
  if (!(backbone_lr_factor > 0.0)) throw ConfigError("finetune.backbone_lr_factor must be > 0");
  optimizer.validate();
  schedule.validate();
}

namespace {

// Softmax probabilities minus one-hot, divided by n: d(mean CE)/d(logits).
double cross_entropy_grad(const Matrix<float>& logits, std::span<const int> labels, Matrix<float>* grad) {
  const Eigen::Index n = logits.rows();
  double total = 0.0;
  if (grad) grad->resize(n, logits.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    const double m = static_cast<double>(logits.row(i).maxCoeff());
    double denom = 0.0;
    for (Eigen::Index c = 0; c < logits.cols(); ++c) denom += std::exp(static_cast<double>(logits(i, c)) - m);
    const int y = labels[static_cast<std::size_t>(i)];
    total += m + std::log(denom) - static_cast<double>(logits(i, y));
    if (grad) {
      for (Eigen::Index c = 0; c < logits.cols(); ++c) {
        const double p = std::exp(static_cast<double>(logits(i, c)) - m) / denom;
        (*grad)(i, c) = static_cast<float>((p - (c == y ? 1.0 : 0.0)) / static_cast<double>(n));
      }
    }
  }
  return total / static_cast<double>(n);
}

double accuracy_of(const AdapterHead& head, const Matrix<float>& features, std::span<const int> labels) {
  const auto pred = predict(head, features);
  std::size_t hit = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hit += pred[i] == labels[i];
  return pred.empty() ? 0.0 : static_cast<double>(hit) / static_cast<double>(pred.size());
}

std::vector<TensorRef<float>> head_refs(AdapterHead& h) {
  return {{"adapter.weight", h.weight.data(), {h.width(), h.num_classes()}},
          {"adapter.bias", h.bias.data(), {h.num_classes()}}};
}

std::vector<TensorRef<const float>> head_refs(const AdapterHead& h) {
  return {{"adapter.weight", h.weight.data(), {h.width(), h.num_classes()}},
          {"adapter.bias", h.bias.data(), {h.num_classes()}}};
}

void check_task(std::span<const int> labels, std::size_t num_classes) {
  if (labels.empty()) throw DegenerateTaskError("fine-tune subset is empty");
  std::set<int> distinct;
  for (int l : labels) {
    if (l < 0 || static_cast<std::size_t>(l) >= num_classes)
      throw DataError("label " + std::to_string(l) + " outside the label map");
    distinct.insert(l);
  }
  if (distinct.size() < 2) throw DegenerateTaskError("fine-tune subset holds a single class");
}

Matrix<float> gather_rows(const Matrix<float>& m, std::span<const std::size_t> rows) {
  Matrix<float> out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = m.row(static_cast<Eigen::Index>(rows[r]));
  return out;
}

std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, std::size_t epoch) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed(seed, 0xF1E7, epoch));
  rng.shuffle(std::span<std::size_t>(order));
  return order;
}

CosineRestartSchedule make_schedule(const FinetuneConfig& cfg, std::size_t steps_per_epoch, double base_lr) {
  const std::size_t first = cfg.schedule.first_cycle == 0 ? steps_per_epoch : cfg.schedule.first_cycle;
  return CosineRestartSchedule(base_lr, first, cfg.schedule.cycle_mult, cfg.schedule.min_lr_fraction);
}

}  // namespace

double cross_entropy(const Matrix<float>& logits, std::span<const int> labels) {
  if (static_cast<std::size_t>(logits.rows()) != labels.size()) throw ShapeError("cross_entropy: row/label mismatch");
  return cross_entropy_grad(logits, labels, nullptr);
}

FinetuneResult finetune_features(const Matrix<float>& features, std::span<const int> labels, std::size_t num_classes,
                                 const FinetuneConfig& cfg, const Matrix<float>* val_features,
                                 std::span<const int> val_labels) {
  cfg.validate();
  check_task(labels, num_classes);
  if (static_cast<std::size_t>(features.rows()) != labels.size())
    throw ShapeError("finetune: feature rows and labels differ");
  const bool has_val = val_features != nullptr && val_features->rows() > 0;
  if (has_val && static_cast<std::size_t>(val_features->rows()) != val_labels.size())
    throw ShapeError("finetune: validation feature rows and labels differ");

  const std::size_t n = labels.size();
  const std::size_t steps_per_epoch = (n + cfg.batch_size - 1) / cfg.batch_size;
  const auto schedule = make_schedule(cfg, steps_per_epoch, cfg.optimizer.learning_rate);

  FinetuneResult result;
  AdapterHead head = AdapterHead::init(static_cast<std::size_t>(features.cols()), num_classes, cfg.seed);
  result.initial_loss = cross_entropy(head.logits(features), labels);
  AdamW<float> opt(cfg.optimizer);
  AdapterHead grad = head;
  const auto refs = head_refs(head);
  const auto grefs = head_refs(std::as_const(grad));

  double best_val = -1.0;
  std::size_t step = 0;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto order = epoch_order(n, cfg.seed, epoch);
    double loss_sum = 0.0;
    for (std::size_t b = 0; b < n; b += cfg.batch_size) {
      const std::span<const std::size_t> rows(order.data() + b, std::min(cfg.batch_size, n - b));
      const Matrix<float> x = gather_rows(features, rows);
      std::vector<int> y(rows.size());
      for (std::size_t r = 0; r < rows.size(); ++r) y[r] = labels[rows[r]];
      Matrix<float> dlogits;
      loss_sum += cross_entropy_grad(head.logits(x), y, &dlogits);
      grad.weight.noalias() = x.transpose() * dlogits;
      grad.bias = dlogits.colwise().sum();
      opt.step(refs, grefs, schedule.lr_at(step++));
    }
    FinetuneEpoch rec;
    rec.epoch = epoch;
    rec.loss = loss_sum / static_cast<double>(steps_per_epoch);
    rec.train_accuracy = accuracy_of(head, features, labels);
    if (has_val) {
      rec.validation_accuracy = accuracy_of(head, *val_features, val_labels);
      if (*rec.validation_accuracy > best_val) {
        best_val = *rec.validation_accuracy;
        result.head = head;
        result.selected_epoch = epoch;
      }
    }
    result.log.push_back(rec);
  }
  if (!has_val) {
    result.head = head;
    result.selected_epoch = cfg.epochs;
  }
  if (!result.head.weight.allFinite()) throw NumericError("finetune: adapter diverged");
  return result;
}

FinetuneResult finetune(const Parameters<float>& backbone, const EncoderConfig& enc,
                        std::span<const MultichannelWindow> subset, std::size_t num_classes, const FinetuneConfig& cfg,
                        std::span<const MultichannelWindow> validation) {
  cfg.validate();
  const auto labels = labels_of(subset, num_classes);
  check_task(labels, num_classes);
  const auto val_labels = labels_of(validation, num_classes);

  if (cfg.mode == FinetuneMode::head_only) {
    const Matrix<float> features = encode(subset, backbone, enc, cfg.threads).pooled;
    if (validation.empty()) return finetune_features(features, labels, num_classes, cfg);
    const Matrix<float> val_features = encode(validation, backbone, enc, cfg.threads).pooled;
    return finetune_features(features, labels, num_classes, cfg, &val_features, val_labels);
  }

  // Full mode: backbone and adapter are updated together; the backbone uses
  // a scaled-down learning rate. The projection head is not part of this
  // objective and is left untouched.
  const std::size_t n = subset.size();
  const std::size_t C = subset.front().channels();
  const auto d = static_cast<Eigen::Index>(enc.model_dim);
  const std::size_t steps_per_epoch = (n + cfg.batch_size - 1) / cfg.batch_size;
  const auto head_schedule = make_schedule(cfg, steps_per_epoch, cfg.optimizer.learning_rate);
  const auto body_schedule = make_schedule(cfg, steps_per_epoch, cfg.optimizer.learning_rate * cfg.backbone_lr_factor);

  FinetuneResult result;
  Parameters<float> params = backbone;
  Parameters<float> pgrad = Parameters<float>::zeros(enc);
  std::vector<TensorRef<float>> prefs;
  std::vector<TensorRef<const float>> pgrefs;
  {
    auto all = params.tensors();
    auto gall = std::as_const(pgrad).tensors();
    for (std::size_t i = 0; i < all.size(); ++i) {
      if (all[i].name.starts_with("head.")) continue;
      prefs.push_back(all[i]);
      pgrefs.push_back(gall[i]);
    }
  }
  AdapterHead head = AdapterHead::init(C * enc.model_dim, num_classes, cfg.seed);
  AdapterHead hgrad = head;
  const auto hrefs = head_refs(head);
  const auto hgrefs = head_refs(std::as_const(hgrad));
  AdamW<float> head_opt(cfg.optimizer), body_opt(cfg.optimizer);

  {
    const Matrix<float> f0 = encode(subset, params, enc, cfg.threads).pooled;
    result.initial_loss = cross_entropy(head.logits(f0), labels);
  }

  double best_val = -1.0;
  std::size_t step = 0;
  ForwardCache<float> cache;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto order = epoch_order(n, cfg.seed, epoch);
    double loss_sum = 0.0;
    for (std::size_t b = 0; b < n; b += cfg.batch_size) {
      const std::size_t rows = std::min(cfg.batch_size, n - b);
      std::vector<Window> flat;
      std::vector<int> y(rows);
      flat.reserve(rows * C);
      for (std::size_t r = 0; r < rows; ++r) {
        const auto& mw = subset[order[b + r]];
        if (mw.channels() != C) throw ShapeError("finetune: samples mix channel counts");
        for (const auto& w : mw.per_channel) flat.push_back(w);
        y[r] = labels[order[b + r]];
      }
      const Matrix<float> x = stack_inputs(flat, enc);
      const Matrix<float> pooled = encoder_forward(params, enc, x, &cache);
      const Matrix<float> features =
          Eigen::Map<const Matrix<float>>(pooled.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(C) * d);
      Matrix<float> dlogits;
      loss_sum += cross_entropy_grad(head.logits(features), y, &dlogits);
      hgrad.weight.noalias() = features.transpose() * dlogits;
      hgrad.bias = dlogits.colwise().sum();
      const Matrix<float> dfeatures = dlogits * head.weight.transpose();
      const Matrix<float> dpooled =
          Eigen::Map<const Matrix<float>>(dfeatures.data(), static_cast<Eigen::Index>(rows * C), d);
      for (auto& t : pgrad.tensors())
        for (auto& v : t.values()) v = 0.0f;
      encoder_backward(params, enc, cache, dpooled, pgrad);
      head_opt.step(hrefs, hgrefs, head_schedule.lr_at(step));
      body_opt.step(prefs, pgrefs, body_schedule.lr_at(step));
      ++step;
    }
    FinetuneEpoch rec;
    rec.epoch = epoch;
    rec.loss = loss_sum / static_cast<double>(steps_per_epoch);
    rec.train_accuracy = accuracy_of(head, encode(subset, params, enc, cfg.threads).pooled, labels);
    if (!validation.empty()) {
      rec.validation_accuracy = accuracy_of(head, encode(validation, params, enc, cfg.threads).pooled, val_labels);
      if (*rec.validation_accuracy > best_val) {
        best_val = *rec.validation_accuracy;
        result.head = head;
        result.backbone = params;
        result.selected_epoch = epoch;
      }
    }
    result.log.push_back(rec);
  }
  if (validation.empty()) {
    result.head = head;
    result.backbone = std::move(params);
    result.selected_epoch = cfg.epochs;
  }
  if (!result.backbone->all_finite()) throw NumericError("finetune: backbone diverged");
  return result;
}

Metrics compute_metrics(std::span<const int> truth, std::span<const int> predicted, std::size_t num_classes) {
  if (truth.empty()) throw EvaluationError("evaluation set is empty");
  if (truth.size() != predicted.size()) throw ShapeError("metrics: truth and prediction counts differ");
  Metrics m;
  m.n_eval = truth.size();
  m.confusion.assign(num_classes, std::vector<std::size_t>(num_classes, 0));
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const int t = truth[i], p = predicted[i];
    if (t < 0 || p < 0 || static_cast<std::size_t>(t) >= num_classes || static_cast<std::size_t>(p) >= num_classes)
      throw DataError("metrics: class index outside [0, " + std::to_string(num_classes) + ")");
    ++m.confusion[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)];
  }
  std::size_t trace = 0, fp_total = 0, fn_total = 0;
  m.per_class_f1.resize(num_classes);
  for (std::size_t c = 0; c < num_classes; ++c) {
    const std::size_t tp = m.confusion[c][c];
    std::size_t row = 0, col = 0;
    for (std::size_t k = 0; k < num_classes; ++k) {
      row += m.confusion[c][k];
      col += m.confusion[k][c];
    }
    const std::size_t fn = row - tp, fp = col - tp;
    trace += tp;
    fp_total += fp;
    fn_total += fn;
    const std::size_t denom = 2 * tp + fp + fn;
    m.per_class_f1[c] = denom == 0 ? 0.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
  }
  m.accuracy = static_cast<double>(trace) / static_cast<double>(m.n_eval);
  double sum = 0.0;
  for (double f : m.per_class_f1) sum += f;
  m.macro_f1 = num_classes == 0 ? 0.0 : sum / static_cast<double>(num_classes);
  const std::size_t micro_denom = 2 * trace + fp_total + fn_total;
  m.micro_f1 = micro_denom == 0 ? 0.0 : 2.0 * static_cast<double>(trace) / static_cast<double>(micro_denom);
  return m;
}

std::vector<int> predict(const AdapterHead& head, const Matrix<float>& features) {
  const Matrix<float> logits = head.logits(features);
  std::vector<int> out(static_cast<std::size_t>(logits.rows()));
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < logits.cols(); ++c)
      if (logits(i, c) > logits(i, best)) best = c;
    out[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return out;
}

Metrics evaluate(const Parameters<float>& backbone, const EncoderConfig& enc, const AdapterHead& head,
                 std::span<const MultichannelWindow> test, std::size_t threads) {
  if (test.empty()) throw EvaluationError("evaluation set is empty");
  const auto truth = labels_of(test, head.num_classes());
  const auto pred = predict(head, encode(test, backbone, enc, threads).pooled);
  return compute_metrics(truth, pred, head.num_classes());
}

std::string metrics_to_json(const Metrics& m, const std::string& dataset, const std::string& mode) {
  nlohmann::ordered_json j;
  j["dataset"] = dataset;
  j["seed"] = m.seed;
  j["mode"] = mode;
  j["n_eval"] = m.n_eval;
  j["accuracy"] = m.accuracy;
  j["macro_f1"] = m.macro_f1;
  j["micro_f1"] = m.micro_f1;
  j["per_class_f1"] = m.per_class_f1;
  j["confusion"] = m.confusion;
  return j.dump(2);
}

MeanStd mean_std(std::span<const double> values) {
  MeanStd out;
  if (values.empty()) return out;
  const auto n = static_cast<double>(values.size());
  for (double v : values) out.mean += v;
  out.mean /= n;
  double ss = 0.0;
  for (double v : values) ss += (v - out.mean) * (v - out.mean);
  out.std = std::sqrt(ss / n);
  return out;
}

std::string format_mean_std(const MeanStd& ms, double scale, int precision) {
  return fmt::format("{:.{}f} ± {:.{}f}", ms.mean * scale, precision, ms.std * scale, precision);
}

namespace {

std::pair<MeanStd, MeanStd> summarize(const MetricGroup& g) {
  std::vector<double> acc, f1;
  for (const auto& m : g.runs) {
    acc.push_back(m.accuracy);
    f1.push_back(m.macro_f1);
  }
  return {mean_std(acc), mean_std(f1)};
}

}  // namespace

std::string aggregate_table(std::span<const MetricGroup> groups) {
  std::string out = fmt::format("{:<12} {:>5} {:>16} {:>16}\n", "group", "runs", "ACC (%)", "macro-F1 (%)");
  for (const auto& g : groups) {
    const auto [acc, f1] = summarize(g);
    out += fmt::format("{:<12} {:>5} {:>16} {:>16}\n", g.key, g.runs.size(), format_mean_std(acc),
                       format_mean_std(f1));
  }
  return out;
}

std::string aggregate_json(std::span<const MetricGroup> groups, const std::string& dataset, const std::string& mode) {
  nlohmann::ordered_json j;
  j["dataset"] = dataset;
  j["mode"] = mode;
  j["groups"] = nlohmann::ordered_json::array();
  for (const auto& g : groups) {
    const auto [acc, f1] = summarize(g);
    nlohmann::ordered_json e;
    e["key"] = g.key;
    std::vector<std::uint64_t> seeds;
    for (const auto& m : g.runs) seeds.push_back(m.seed);
    e["seeds"] = seeds;
    e["accuracy_mean"] = acc.mean;
    e["accuracy_std"] = acc.std;
    e["macro_f1_mean"] = f1.mean;
    e["macro_f1_std"] = f1.std;
    e["accuracy"] = format_mean_std(acc);
    e["macro_f1"] = format_mean_std(f1);
    j["groups"].push_back(e);
  }
  return j.dump(2);
}

std::string embeddings_csv(std::span<const std::string> ids, std::span<const std::optional<int>> labels,
                           const Matrix<float>& embeddings) {
  if (ids.size() != labels.size() || ids.size() != static_cast<std::size_t>(embeddings.rows()))
    throw ShapeError("embeddings_csv: ids, labels and rows differ in count");
  std::string out = "window_id,label";
  for (Eigen::Index c = 0; c < embeddings.cols(); ++c) out += fmt::format(",e{}", c);
  out += '\n';
  for (std::size_t i = 0; i < ids.size(); ++i) {
    out += ids[i];
    out += ',';
    if (labels[i]) out += std::to_string(*labels[i]);
    for (Eigen::Index c = 0; c < embeddings.cols(); ++c)
      out += fmt::format(",{:.9g}", embeddings(static_cast<Eigen::Index>(i), c));
    out += '\n';
  }
  return out;
}

void export_embeddings(const std::filesystem::path& path, std::span<const MultichannelWindow> corpus,
                       const Parameters<float>& backbone, const EncoderConfig& enc, std::size_t threads) {
  std::vector<std::string> ids;
  std::vector<std::optional<int>> labels;
  for (const auto& mw : corpus) {
    ids.push_back(sample_id(mw));
    labels.push_back(mw.label());
  }
  const auto emb = encode(corpus, backbone, enc, threads);
  write_text_file(path, embeddings_csv(ids, labels, emb.pooled));
}

}  // namespace unifault
