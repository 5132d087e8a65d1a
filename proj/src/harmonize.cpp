// SPDX-License-Identifier: Apache-2.0
#include "unifault/harmonize.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include <json.hpp>

#include "unifault/errors.hpp"
#include "unifault/rng.hpp"

namespace unifault {

namespace fs = std::filesystem;
using nlohmann::json;

void HarmonizeConfig::validate() const {
  if (!(window_duration_s > 0.0)) throw ConfigError("harmonize.window_duration_s must be > 0");
  if (target_length < 2) throw ConfigError("harmonize.target_length must be >= 2");
  if (!(normalize_low < normalize_high)) throw ConfigError("harmonize.normalize_range requires low < high");
  if (!(epsilon_degenerate > 0.0)) throw ConfigError("harmonize.epsilon_degenerate must be > 0");
}

const ChannelExtrema& NormalizerStats::at(const std::string& dataset_id, std::uint32_t channel) const {
  auto it = groups.find({dataset_id, channel});
  if (it == groups.end())
    throw MissingStatsError("no normalizer statistics for dataset '" + dataset_id + "' channel " +
                            std::to_string(channel));
  return it->second;
}

std::string NormalizerStats::to_json() const {
  json j;
  j["fitted_on"] = to_string(fitted_on);
  j["groups"] = json::array();
  for (const auto& [key, ext] : groups) {
    j["groups"].push_back({{"dataset_id", key.first}, {"channel", key.second}, {"min", ext.min}, {"max", ext.max}});
  }
  return j.dump(2) + "\n";
}

NormalizerStats NormalizerStats::from_json(const std::string& text) {
  NormalizerStats s;
  try {
    const json j = json::parse(text);
    s.fitted_on = split_from_string(j.at("fitted_on").get<std::string>());
    for (const auto& g : j.at("groups")) {
      s.groups[{g.at("dataset_id").get<std::string>(), g.at("channel").get<std::uint32_t>()}] =
          ChannelExtrema{g.at("min").get<double>(), g.at("max").get<double>()};
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("normalizer stats: ") + e.what());
  }
  return s;
}

namespace {

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

SplitAssignment split_dataset(const DatasetManifest& manifest, const std::array<double, 3>& ratios,
                              std::uint64_t seed) {
  for (double r : ratios) {
    if (!(r >= 0.0)) throw ConfigError("split ratios must be non-negative");
  }
  const double sum = ratios[0] + ratios[1] + ratios[2];
  if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("split ratios must sum to 1 (got " + std::to_string(sum) + ")");

  const std::size_t n = manifest.recordings.size();
  std::array<std::size_t, 3> counts{};
  std::array<double, 3> remainders{};
  std::size_t assigned = 0;
  for (std::size_t s = 0; s < 3; ++s) {
    const double exact = ratios[s] * static_cast<double>(n);
    counts[s] = static_cast<std::size_t>(std::floor(exact));
    remainders[s] = exact - static_cast<double>(counts[s]);
    assigned += counts[s];
  }
  // Largest remainder; ties resolve toward the earlier split.
  std::array<std::size_t, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainders[a] > remainders[b]; });
  for (std::size_t k = 0; assigned < n; ++k, ++assigned) ++counts[order[k % 3]];

  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(derive_seed(seed, fnv1a(manifest.dataset_id)));
  rng.shuffle(std::span<std::size_t>(perm));

  SplitAssignment out;
  out.seed = seed;
  out.ratios = ratios;
  std::size_t pos = 0;
  for (std::size_t s = 0; s < 3; ++s) {
    for (std::size_t k = 0; k < counts[s]; ++k, ++pos) {
      out.assignment[manifest.recording_id(perm[pos])] = static_cast<Split>(s);
    }
  }
  return out;
}

std::size_t segment_length(double sample_rate_hz, double window_duration_s) {
  // The epsilon absorbs representation error in products such as 25600 * 0.1.
  return static_cast<std::size_t>(std::floor(sample_rate_hz * window_duration_s + 1e-9));
}

std::vector<RawSegment> segment_windows(const RawRecording& rec, const HarmonizeConfig& cfg) {
  check_recording(rec);
  const std::size_t seg = segment_length(rec.sample_rate_hz, cfg.window_duration_s);
  if (seg < 2)
    throw ConfigError("window of " + std::to_string(cfg.window_duration_s) + " s at " +
                      std::to_string(rec.sample_rate_hz) + " Hz spans fewer than 2 samples");
  const std::size_t count = rec.length / seg;
  std::vector<RawSegment> out;
  out.reserve(count * rec.channels);
  for (std::uint32_t c = 0; c < rec.channels; ++c) {
    const auto ch = rec.channel(c);
    for (std::size_t k = 0; k < count; ++k) {
      RawSegment s{c, k, {}};
      s.values.assign(ch.begin() + static_cast<std::ptrdiff_t>(k * seg),
                      ch.begin() + static_cast<std::ptrdiff_t>((k + 1) * seg));
      out.push_back(std::move(s));
    }
  }
  return out;
}

namespace {

std::vector<double> boxcar(std::span<const double> x, std::size_t width) {
  const std::ptrdiff_t half = static_cast<std::ptrdiff_t>(width / 2);
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  std::vector<double> out(x.size());
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto lo = std::max<std::ptrdiff_t>(0, i - half);
    const auto hi = std::min<std::ptrdiff_t>(n - 1, i + half);
    double acc = 0.0;
    for (auto j = lo; j <= hi; ++j) acc += x[static_cast<std::size_t>(j)];
    out[static_cast<std::size_t>(i)] = acc / static_cast<double>(hi - lo + 1);
  }
  return out;
}

}  // namespace

std::vector<double> standardize_length(std::span<const double> segment, std::size_t target_length,
                                       bool prefilter) {
  const std::size_t n = segment.size();
  if (n < 2) throw InvalidInputError("standardize_length: segment needs at least 2 samples");
  if (target_length < 2) throw InvalidInputError("standardize_length: target_length must be >= 2");

  std::vector<double> filtered;
  if (prefilter && n > 2 * target_length) {
    std::size_t width = n / target_length;
    if (width % 2 == 0) ++width;
    filtered = boxcar(segment, width);
    segment = filtered;
  }

  std::vector<double> out(target_length);
  const double step = static_cast<double>(n - 1) / static_cast<double>(target_length - 1);
  for (std::size_t k = 0; k < target_length; ++k) {
    const double pos = static_cast<double>(k) * step;
    auto i0 = static_cast<std::size_t>(std::floor(pos));
    if (i0 >= n - 1) {
      out[k] = segment[n - 1];
      continue;
    }
    const double frac = pos - static_cast<double>(i0);
    out[k] = frac == 0.0 ? segment[i0] : segment[i0] + frac * (segment[i0 + 1] - segment[i0]);
  }
  out.front() = segment.front();
  out.back() = segment.back();
  return out;
}

std::vector<Window> unify_channels(const MultichannelWindow& mw) {
  check_multichannel(mw);
  return mw.per_channel;
}

NormalizerStats fit_normalizer(std::span<const Window> train_windows) {
  NormalizerStats stats;
  for (const auto& w : train_windows) {
    if (w.values.empty()) continue;
    const auto [lo, hi] = std::minmax_element(w.values.begin(), w.values.end());
    const NormalizerKey key{w.dataset_id, w.source_channel};
    auto [it, inserted] = stats.groups.try_emplace(key, ChannelExtrema{*lo, *hi});
    if (!inserted) {
      it->second.min = std::min<double>(it->second.min, *lo);
      it->second.max = std::max<double>(it->second.max, *hi);
    }
  }
  return stats;
}

Window apply_normalizer(const Window& w, const NormalizerStats& stats, const HarmonizeConfig& cfg) {
  const auto& ext = stats.at(w.dataset_id, w.source_channel);
  Window out = w;
  const double span = ext.max - ext.min;
  const double range = cfg.normalize_high - cfg.normalize_low;
  for (auto& v : out.values) {
    v = span < cfg.epsilon_degenerate
            ? static_cast<float>(cfg.normalize_low)
            : static_cast<float>(cfg.normalize_low + (static_cast<double>(v) - ext.min) / span * range);
  }
  return out;
}

std::vector<MultichannelWindow> group_multichannel(std::span<const Window> windows) {
  std::map<std::pair<std::string, std::uint64_t>, std::size_t> slot;
  std::vector<MultichannelWindow> groups;
  for (const auto& w : windows) {
    auto [it, inserted] = slot.try_emplace({w.source_recording, w.segment_index}, groups.size());
    if (inserted) groups.emplace_back();
    groups[it->second].per_channel.push_back(w);
  }
  for (auto& g : groups) {
    std::stable_sort(g.per_channel.begin(), g.per_channel.end(),
                     [](const Window& a, const Window& b) { return a.source_channel < b.source_channel; });
    check_multichannel(g);
  }
  return groups;
}

HarmonizedDataset harmonize_dataset(const DatasetManifest& manifest, const fs::path& root,
                                    const HarmonizeConfig& cfg, const SplitAssignment& split, bool keep_groups) {
  cfg.validate();
  HarmonizedDataset out;
  out.dataset_id = manifest.dataset_id;
  out.label_names = manifest.label_names;

  for (std::size_t i = 0; i < manifest.recordings.size(); ++i) {
    const auto rec = load_recording(manifest, i, root);
    const Split s = split.of(rec.recording_id);
    const auto segments = segment_windows(rec, cfg);
    // Segments arrive channel-major; regroup per segment index before unifying.
    const std::size_t per_channel = segments.size() / rec.channels;
    for (std::size_t k = 0; k < per_channel; ++k) {
      MultichannelWindow mw;
      for (std::uint32_t c = 0; c < rec.channels; ++c) {
        const auto& seg = segments[c * per_channel + k];
        const auto std_values = standardize_length(seg.values, cfg.target_length, cfg.prefilter);
        Window w;
        w.id = rec.recording_id + "#c" + std::to_string(c) + "#s" + std::to_string(seg.index);
        w.values.assign(std_values.begin(), std_values.end());
        w.source_recording = rec.recording_id;
        w.source_channel = c;
        w.segment_index = seg.index;
        w.label = rec.label;
        w.dataset_id = rec.dataset_id;
        mw.per_channel.push_back(std::move(w));
      }
      for (auto& w : unify_channels(mw)) out.of(s).windows.push_back(std::move(w));
    }
  }

  out.stats = fit_normalizer(out.of(Split::train).windows);
  for (auto& part : out.splits) {
    for (auto& w : part.windows) w = apply_normalizer(w, out.stats, cfg);
    if (keep_groups) part.groups = group_multichannel(part.windows);
  }
  return out;
}

void write_corpus(const fs::path& dir, std::span<const CorpusEntry> entries, const HarmonizeConfig& cfg) {
  fs::create_directories(dir / "windows");
  const double rate = static_cast<double>(cfg.target_length) / cfg.window_duration_s;
  json index;
  index["target_length"] = cfg.target_length;
  index["sample_rate_hz"] = rate;
  index["windows"] = json::array();
  char name[32];
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    check_window(e.window, cfg.target_length);
    std::snprintf(name, sizeof(name), "w%07zu.ufb", i);
    const std::string rel = std::string("windows/") + name;
    write_signal(dir / rel, SignalFile{1, e.window.values.size(), rate, e.window.values});
    index["windows"].push_back({{"id", e.window.id},
                                {"file", rel},
                                {"dataset_id", e.window.dataset_id},
                                {"source_recording", e.window.source_recording},
                                {"source_channel", e.window.source_channel},
                                {"segment_index", e.window.segment_index},
                                {"label", e.window.label ? json(*e.window.label) : json(nullptr)},
                                {"split", to_string(e.split)},
                                {"provenance", to_string(e.window.provenance)}});
  }
  write_text_file(dir / "index.json", index.dump(1) + "\n");
}

std::vector<CorpusEntry> read_corpus(const fs::path& dir) {
  json index;
  try {
    index = json::parse(read_text_file(dir / "index.json"));
  } catch (const json::exception& e) {
    throw DataError("corpus index " + (dir / "index.json").string() + ": " + e.what());
  }
  std::vector<CorpusEntry> out;
  try {
    for (const auto& r : index.at("windows")) {
      CorpusEntry e;
      const auto sig = read_signal(dir / r.at("file").get<std::string>());
      if (sig.channels != 1) throw DataError("corpus window file must be univariate");
      e.window.values = sig.samples;
      e.window.id = r.at("id").get<std::string>();
      e.window.dataset_id = r.at("dataset_id").get<std::string>();
      e.window.source_recording = r.at("source_recording").get<std::string>();
      e.window.source_channel = r.at("source_channel").get<std::uint32_t>();
      e.window.segment_index = r.at("segment_index").get<std::uint64_t>();
      if (!r.at("label").is_null()) e.window.label = r.at("label").get<int>();
      e.window.provenance = provenance_from_string(r.at("provenance").get<std::string>());
      e.split = split_from_string(r.at("split").get<std::string>());
      out.push_back(std::move(e));
    }
  } catch (const json::exception& e) {
    throw DataError("corpus index: " + std::string(e.what()));
  }
  return out;
}

}  // namespace unifault
