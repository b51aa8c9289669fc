#include <cmath>
#include <numbers>
#include <random>

#include "hftp/error.hpp"
#include "hftp/ingest.hpp"
#include "hftp/json_util.hpp"

namespace hftp {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

void validate(const SynthSpec& s) {
  if (!(s.rate_hz > 0.0)) throw ValidationError("synth: rate_hz must be positive");
  if (!(s.noise_sigma >= 0.0)) throw ValidationError("synth: noise_sigma must be >= 0");
  for (const auto& p : s.planted) {
    if (!(p.freq_hz >= 0.0) || p.freq_hz > s.rate_hz / 2.0) {
      throw ValidationError("synth: planted frequency " + std::to_string(p.freq_hz) + " Hz is above Nyquist");
    }
    if (s.kind == SynthKind::activation) {
      if (p.layer >= s.n_layers || p.first + p.count > s.n_neurons) {
        throw ValidationError("synth: planted neuron range out of bounds");
      }
    } else if (p.first + p.count > s.n_channels) {
      throw ValidationError("synth: planted channel range out of bounds");
    }
  }
}

std::vector<ChannelMeta> default_channels(std::size_t n) {
  const auto& entries = default_roi_map().entries();
  std::vector<std::pair<std::string, std::string>> labels(entries.begin(), entries.end());
  std::vector<ChannelMeta> out;
  out.reserve(n);
  for (std::size_t c = 0; c < n; ++c) {
    const auto& [aal, roi] = labels[(c / 2) % labels.size()];
    out.push_back({c, c % 2 == 0 ? Hemisphere::L : Hemisphere::R, aal, roi});
  }
  return out;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  return splitmix64(splitmix64(splitmix64(seed) ^ a) ^ (b * 0xD1B54A32D192ED03ull));
}

ActivationTensor synth_activation(const SynthSpec& spec) {
  if (spec.kind != SynthKind::activation) throw ValidationError("synth: spec is not an activation spec");
  validate(spec);
  const std::size_t T = spec.n_timepoints;
  std::vector<double> work(spec.n_layers * spec.n_neurons * T, 0.0);
  for (std::size_t l = 0; l < spec.n_layers; ++l) {
    for (std::size_t n = 0; n < spec.n_neurons; ++n) {
      if (spec.noise_sigma == 0.0) continue;
      std::mt19937_64 rng(derive_seed(spec.seed, l, n));
      std::normal_distribution<double> noise(0.0, spec.noise_sigma);
      double* row = work.data() + (l * spec.n_neurons + n) * T;
      for (std::size_t t = 0; t < T; ++t) row[t] = noise(rng);
    }
  }
  for (const auto& p : spec.planted) {
    for (std::size_t n = p.first; n < p.first + p.count; ++n) {
      double* row = work.data() + (p.layer * spec.n_neurons + n) * T;
      for (std::size_t t = 0; t < T; ++t) {
        double time = static_cast<double>(t) / spec.rate_hz;
        row[t] += p.amplitude * std::cos(2.0 * std::numbers::pi * p.freq_hz * time + p.phase);
      }
    }
  }
  std::vector<float> values(work.begin(), work.end());
  return ActivationTensor(spec.n_layers, spec.n_neurons, T, spec.rate_hz, std::move(values), spec.corpus_tag,
                          spec.condition, {{"synth", to_json(spec)}});
}

TrialRecording synth_recording(const SynthSpec& spec) {
  if (spec.kind != SynthKind::recording) throw ValidationError("synth: spec is not a recording spec");
  validate(spec);
  auto channels = spec.channels.empty() ? default_channels(spec.n_channels) : spec.channels;
  if (channels.size() != spec.n_channels) throw ValidationError("synth: channel metadata count mismatch");
  const std::size_t S = spec.n_samples;
  std::vector<double> work(spec.n_channels * spec.n_trials * S, 0.0);
  for (std::size_t c = 0; c < spec.n_channels; ++c) {
    for (std::size_t tr = 0; tr < spec.n_trials; ++tr) {
      if (spec.noise_sigma == 0.0) continue;
      std::mt19937_64 rng(derive_seed(spec.seed, c, tr));
      std::normal_distribution<double> noise(0.0, spec.noise_sigma);
      double* row = work.data() + (c * spec.n_trials + tr) * S;
      for (std::size_t s = 0; s < S; ++s) row[s] = noise(rng);
    }
  }
  const std::uint64_t phase_seed = derive_seed(spec.seed, 0x5048415345ull);
  for (std::size_t pi = 0; pi < spec.planted.size(); ++pi) {
    const auto& p = spec.planted[pi];
    for (std::size_t c = p.first; c < p.first + p.count; ++c) {
      for (std::size_t tr = 0; tr < spec.n_trials; ++tr) {
        double phase = p.phase;
        if (!p.phase_locked) {
          std::mt19937_64 rng(derive_seed(phase_seed, pi * spec.n_channels + c, tr));
          phase = std::uniform_real_distribution<double>(0.0, 2.0 * std::numbers::pi)(rng);
        }
        double* row = work.data() + (c * spec.n_trials + tr) * S;
        for (std::size_t s = 0; s < S; ++s) {
          double time = static_cast<double>(s) / spec.rate_hz;
          row[s] += p.amplitude * std::cos(2.0 * std::numbers::pi * p.freq_hz * time + phase);
        }
      }
    }
  }
  std::vector<float> values(work.begin(), work.end());
  return TrialRecording(spec.n_channels, spec.n_trials, S, spec.rate_hz, std::move(values), std::move(channels),
                        spec.condition, {{"synth", to_json(spec)}});
}

SynthSpec synth_spec_from_json(const nlohmann::json& j) {
  require_known_keys(j,
                     {"kind", "n_layers", "n_neurons", "n_timepoints", "n_channels", "n_trials", "n_samples", "rate_hz",
                      "noise_sigma", "seed", "corpus_tag", "condition", "planted", "channels", "output"},
                     "synth spec");
  SynthSpec s;
  auto kind = json_get_or<std::string>(j, "kind", "activation");
  if (kind == "activation") {
    s.kind = SynthKind::activation;
  } else if (kind == "recording") {
    s.kind = SynthKind::recording;
  } else {
    throw ConfigError("synth kind must be 'activation' or 'recording'");
  }
  s.n_layers = json_get_or<std::size_t>(j, "n_layers", s.n_layers);
  s.n_neurons = json_get_or<std::size_t>(j, "n_neurons", s.n_neurons);
  s.n_timepoints = json_get_or<std::size_t>(j, "n_timepoints", s.n_timepoints);
  s.n_channels = json_get_or<std::size_t>(j, "n_channels", s.n_channels);
  s.n_trials = json_get_or<std::size_t>(j, "n_trials", s.n_trials);
  s.n_samples = json_get_or<std::size_t>(j, "n_samples", s.n_samples);
  s.rate_hz = json_get_or<double>(j, "rate_hz", s.rate_hz);
  s.noise_sigma = json_get_or<double>(j, "noise_sigma", s.noise_sigma);
  s.seed = json_get_or<std::uint64_t>(j, "seed", s.seed);
  s.corpus_tag = json_get_or<std::string>(j, "corpus_tag", s.corpus_tag);
  if (j.contains("condition")) {
    require_known_keys(j["condition"], {"stimulus_class", "split"}, "synth condition");
    s.condition = condition_from_json(j["condition"]);
  }
  for (const auto& pj : j.value("planted", nlohmann::json::array())) {
    require_known_keys(pj, {"layer", "first", "count", "freq_hz", "amplitude", "phase", "phase_locked"},
                       "planted component");
    PlantedComponent p;
    p.layer = json_get_or<std::size_t>(pj, "layer", 0);
    p.first = json_get_or<std::size_t>(pj, "first", 0);
    p.count = json_get_or<std::size_t>(pj, "count", 1);
    p.freq_hz = json_get_or<double>(pj, "freq_hz", 1.0);
    p.amplitude = json_get_or<double>(pj, "amplitude", 1.0);
    p.phase = json_get_or<double>(pj, "phase", 0.0);
    p.phase_locked = json_get_or<bool>(pj, "phase_locked", true);
    s.planted.push_back(p);
  }
  if (j.contains("channels")) {
    std::size_t id = 0;
    for (const auto& cj : j["channels"]) {
      require_known_keys(cj, {"hemisphere", "aal_label"}, "synth channel");
      auto aal = cj.at("aal_label").get<std::string>();
      s.channels.push_back({id++, parse_hemisphere(cj.at("hemisphere").get<std::string>()), aal,
                            default_roi_map().resolve(aal)});
    }
  }
  return s;
}

nlohmann::json to_json(const SynthSpec& s) {
  nlohmann::json j;
  j["kind"] = s.kind == SynthKind::activation ? "activation" : "recording";
  if (s.kind == SynthKind::activation) {
    j["n_layers"] = s.n_layers;
    j["n_neurons"] = s.n_neurons;
    j["n_timepoints"] = s.n_timepoints;
  } else {
    j["n_channels"] = s.n_channels;
    j["n_trials"] = s.n_trials;
    j["n_samples"] = s.n_samples;
  }
  j["rate_hz"] = s.rate_hz;
  j["noise_sigma"] = s.noise_sigma;
  j["seed"] = s.seed;
  j["corpus_tag"] = s.corpus_tag;
  j["condition"] = to_json(s.condition);
  j["planted"] = nlohmann::json::array();
  for (const auto& p : s.planted) {
    nlohmann::json pj = {{"first", p.first},         {"count", p.count}, {"freq_hz", p.freq_hz},
                         {"amplitude", p.amplitude}, {"phase", p.phase}, {"phase_locked", p.phase_locked}};
    if (s.kind == SynthKind::activation) pj["layer"] = p.layer;
    j["planted"].push_back(pj);
  }
  if (!s.channels.empty()) {
    j["channels"] = nlohmann::json::array();
    for (const auto& c : s.channels) {
      j["channels"].push_back({{"hemisphere", std::string(to_string(c.hemisphere))}, {"aal_label", c.aal_label}});
    }
  }
  return j;
}

}  // namespace hftp
