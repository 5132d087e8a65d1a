// SPDX-License-Identifier: Apache-2.0
#include "unifault/synth.hpp"

#include <cmath>
#include <numbers>

#include <json.hpp>
#include <spdlog/fmt/fmt.h>

#include "unifault/errors.hpp"

namespace unifault {

void SynthDomainSpec::validate() const {
  if (domain_id.empty()) throw ConfigError("synth: domain_id is empty");
  if (!(sample_rate_hz > 0.0)) throw ConfigError("synth: sample_rate_hz must be > 0");
  if (channels < 1) throw ConfigError("synth: channels must be >= 1");
  if (classes.empty()) throw ConfigError("synth: at least one class is required");
  if (!(recording_duration_s > 0.0)) throw ConfigError("synth: recording_duration_s must be > 0");
  if (num_recordings_per_class < 1) throw ConfigError("synth: num_recordings_per_class must be >= 1");
  if (!(noise_std >= 0.0)) throw ConfigError("synth: noise_std must be >= 0");
  if (!(timing_jitter >= 0.0 && timing_jitter < 1.0)) throw ConfigError("synth: timing_jitter must be in [0, 1)");
  if (!channel_gains.empty() && channel_gains.size() != channels)
    throw ConfigError("synth: channel_gains must list one gain per channel");
  for (const auto& c : classes) {
    if (!(c.impulse_rate_hz >= 0.0 && c.impulse_amplitude >= 0.0 && c.amplitude_jitter >= 0.0))
      throw ConfigError("synth: class " + c.class_name + " has a negative rate, amplitude or jitter");
    const bool used = c.impulse_rate_hz > 0.0 && c.impulse_amplitude > 0.0;
    if (used) {
      if (!(c.resonance_decay > 0.0)) throw ConfigError("synth: class " + c.class_name + " needs resonance_decay > 0");
      if (!(c.resonance_hz > 0.0 && c.resonance_hz < sample_rate_hz / 2.0))
        throw ConfigError(fmt::format("synth: class {} resonance {} Hz is not below Nyquist ({} Hz) in domain {}",
                                      c.class_name, c.resonance_hz, sample_rate_hz / 2.0, domain_id));
    }
  }
}

double SynthDomainSpec::channel_gain(std::uint32_t c) const {
  return channel_gains.empty() ? 1.0 / (1.0 + 0.35 * static_cast<double>(c)) : channel_gains.at(c);
}

RawRecording generate_recording(const SynthDomainSpec& spec, std::size_t class_idx, Rng& rng) {
  spec.validate();
  if (class_idx >= spec.classes.size()) throw ConfigError("synth: class index out of range");
  const auto& cls = spec.classes[class_idx];
  const double fs = spec.sample_rate_hz;
  const auto n = static_cast<std::size_t>(std::floor(fs * spec.recording_duration_s + 1e-9));

  std::vector<double> clean(n, 0.0);
  if (cls.impulse_rate_hz > 0.0 && cls.impulse_amplitude > 0.0) {
    const double period = 1.0 / cls.impulse_rate_hz;
    const double duration = static_cast<double>(n) / fs;
    // Response tail beyond exp(-18) is below float resolution relative to the peak.
    const double tail = 18.0 / cls.resonance_decay;
    const double w = 2.0 * std::numbers::pi * cls.resonance_hz;
    double t_k = rng.uniform() * period;
    while (t_k < duration) {
      const double a_k = cls.impulse_amplitude * (1.0 + rng.normal(0.0, cls.amplitude_jitter));
      const auto first = static_cast<std::size_t>(std::ceil(t_k * fs));
      const auto last = std::min(n, static_cast<std::size_t>(std::ceil((t_k + tail) * fs)));
      for (std::size_t i = first; i < last; ++i) {
        const double dt = static_cast<double>(i) / fs - t_k;
        clean[i] += a_k * std::exp(-cls.resonance_decay * dt) * std::sin(w * dt);
      }
      t_k += period * (1.0 + rng.uniform(-spec.timing_jitter, spec.timing_jitter));
    }
  }

  RawRecording rec;
  rec.channels = spec.channels;
  rec.length = n;
  rec.sample_rate_hz = fs;
  rec.recording_id = spec.domain_id + "/" + cls.class_name;
  rec.label = static_cast<int>(class_idx);
  rec.dataset_id = spec.domain_id;
  rec.samples.resize(static_cast<std::size_t>(spec.channels) * n);
  for (std::uint32_t c = 0; c < spec.channels; ++c) {
    const double g = spec.channel_gain(c);
    float* out = rec.samples.data() + static_cast<std::size_t>(c) * n;
    for (std::size_t i = 0; i < n; ++i) {
      const double noise = spec.noise_std > 0.0 ? rng.normal(0.0, spec.noise_std) : 0.0;
      out[i] = static_cast<float>(g * clean[i] + noise);
    }
  }
  return rec;
}

RawRecording generate_recording(const SynthDomainSpec& spec, std::size_t class_idx, std::size_t recording_index) {
  Rng rng(derive_seed(spec.seed, 0x5EC0, class_idx, recording_index));
  auto rec = generate_recording(spec, class_idx, rng);
  rec.recording_id = fmt::format("{}/rec/{}_{:03}.ufb", spec.domain_id, spec.classes[class_idx].class_name, recording_index);
  return rec;
}

namespace {

struct DomainTemplate {
  double rate;
  std::uint32_t channels;
  double amplitude;  // multiplies every class amplitude
  double resonance;  // multiplies every class resonance
  double speed;      // multiplies every impulse rate
  double noise;
  double duration;
  std::size_t recordings;
};

constexpr DomainTemplate kPretrainTemplates[] = {
    {8192.0, 1, 1.0, 1.0, 1.0, 0.10, 2.0, 25},
    {12800.0, 2, 1.7, 1.15, 1.08, 0.18, 2.0, 25},
    {16000.0, 2, 1.3, 1.05, 0.97, 0.14, 2.0, 25},
    {25600.0, 1, 0.8, 1.1, 1.04, 0.09, 2.0, 25},
};
constexpr DomainTemplate kTargetTemplate{20480.0, 3, 0.6, 0.9, 0.95, 0.07, 1.0, 15};

const FaultClassSpec kClasses[] = {
    {"healthy", 0.0, 0.0, 1000.0, 500.0, 0.0},
    {"outer_race", 97.0, 1.0, 2000.0, 700.0, 0.15},
    {"inner_race", 157.0, 0.9, 2900.0, 900.0, 0.15},
    {"ball", 63.0, 0.7, 1300.0, 450.0, 0.2},
};

SynthDomainSpec from_template(const DomainTemplate& t, std::string id, std::size_t num_classes, std::uint64_t seed) {
  SynthDomainSpec s;
  s.domain_id = std::move(id);
  s.sample_rate_hz = t.rate;
  s.channels = t.channels;
  s.recording_duration_s = t.duration;
  s.num_recordings_per_class = t.recordings;
  s.noise_std = t.noise;
  s.seed = seed;
  for (std::size_t c = 0; c < num_classes; ++c) {
    FaultClassSpec k = kClasses[c];
    k.impulse_rate_hz *= t.speed;
    k.impulse_amplitude *= t.amplitude;
    k.resonance_hz *= t.resonance;
    s.classes.push_back(k);
  }
  return s;
}

}  // namespace

BenchmarkSpec default_benchmark(std::uint64_t seed, std::size_t num_domains, std::size_t num_classes) {
  if (num_domains < 2 || num_domains > 5) throw ConfigError("synth: num_domains must be in [2, 5]");
  if (num_classes < 2 || num_classes > 4) throw ConfigError("synth: num_classes must be in [2, 4]");
  BenchmarkSpec b;
  b.seed = seed;
  for (std::size_t i = 0; i + 1 < num_domains; ++i) {
    b.domains.push_back(from_template(kPretrainTemplates[i], fmt::format("synth_{}", static_cast<char>('a' + i)),
                                      num_classes, derive_seed(seed, 0xD0, i)));
  }
  b.domains.push_back(from_template(kTargetTemplate, fmt::format("synth_{}", static_cast<char>('a' + num_domains - 1)),
                                    num_classes, derive_seed(seed, 0xD0, num_domains - 1)));
  b.target = num_domains - 1;
  return b;
}

BenchmarkLayout generate_benchmark(const BenchmarkSpec& spec, const std::filesystem::path& out_dir) {
  if (spec.domains.empty() || spec.target >= spec.domains.size()) throw ConfigError("synth: bad benchmark layout");
  for (const auto& d : spec.domains) d.validate();

  BenchmarkLayout layout;
  nlohmann::ordered_json desc;
  desc["seed"] = spec.seed;
  desc["domains"] = nlohmann::ordered_json::array();
  for (std::size_t di = 0; di < spec.domains.size(); ++di) {
    const auto& d = spec.domains[di];
    const auto dir = out_dir / d.domain_id;
    DatasetManifest m;
    m.dataset_id = d.domain_id;
    m.notes = fmt::format("synthetic domain, {} Hz, {} channel(s)", d.sample_rate_hz, d.channels);
    for (const auto& c : d.classes) m.label_names.push_back(c.class_name);
    for (std::size_t c = 0; c < d.classes.size(); ++c) {
      for (std::size_t r = 0; r < d.num_recordings_per_class; ++r) {
        const std::string rel = fmt::format("rec/{}_{:03}.ufb", d.classes[c].class_name, r);
        write_recording(dir / rel, generate_recording(d, c, r));
        m.recordings.push_back({rel, static_cast<int>(c), std::nullopt});
      }
    }
    write_manifest(dir / "manifest.json", m);
    layout.manifests.push_back(dir / "manifest.json");
    const bool target = di == spec.target;
    if (target) {
      layout.target_domain = d.domain_id;
    } else {
      layout.pretrain_domains.push_back(d.domain_id);
    }

    nlohmann::ordered_json e;
    e["domain_id"] = d.domain_id;
    e["role"] = target ? "target" : "pretrain";
    e["manifest"] = d.domain_id + "/manifest.json";
    e["sample_rate_hz"] = d.sample_rate_hz;
    e["channels"] = d.channels;
    e["recordings_per_class"] = d.num_recordings_per_class;
    e["recording_duration_s"] = d.recording_duration_s;
    e["noise_std"] = d.noise_std;
    desc["domains"].push_back(e);
  }
  write_text_file(out_dir / "benchmark.json", desc.dump(2) + "\n");
  return layout;
}

BenchmarkLayout read_benchmark_layout(const std::filesystem::path& out_dir) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(out_dir / "benchmark.json"));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("benchmark.json: ") + e.what());
  }
  BenchmarkLayout layout;
  for (const auto& e : j.at("domains")) {
    const auto id = e.at("domain_id").get<std::string>();
    layout.manifests.push_back(out_dir / e.at("manifest").get<std::string>());
    if (e.at("role").get<std::string>() == "target") {
      layout.target_domain = id;
    } else {
      layout.pretrain_domains.push_back(id);
    }
  }
  return layout;
}

}  // namespace unifault
