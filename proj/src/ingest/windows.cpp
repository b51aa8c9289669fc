#include <cmath>

#include "hftp/error.hpp"
#include "hftp/ingest.hpp"

namespace hftp {

std::size_t samples_per_unit(double rate_hz) {
  double ratio = rate_hz / kUnitRateHz;
  double rounded = std::round(ratio);
  if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9) {
    throw ValidationError("rate " + std::to_string(rate_hz) + " Hz is not a whole multiple of the 4 Hz unit rate");
  }
  return static_cast<std::size_t>(rounded);
}

ActivationTensor slice_last(const ActivationTensor& t, std::size_t n_units) {
  std::size_t len = n_units * samples_per_unit(t.rate_hz());
  if (len > t.n_timepoints()) {
    throw BoundsError("window of " + std::to_string(n_units) + " units exceeds " + std::to_string(t.n_timepoints()) +
                      " timepoints");
  }
  if (len < 2) throw BoundsError("window must keep at least 2 timepoints");
  std::vector<float> out;
  out.reserve(t.n_units() * len);
  for (std::size_t l = 0; l < t.n_layers(); ++l) {
    for (std::size_t n = 0; n < t.n_neurons(); ++n) {
      auto s = t.series({l, n});
      out.insert(out.end(), s.end() - static_cast<std::ptrdiff_t>(len), s.end());
    }
  }
  return ActivationTensor(t.n_layers(), t.n_neurons(), len, t.rate_hz(), std::move(out), t.corpus_tag(),
                          t.condition(), t.attributes());
}

TrialRecording slice_last(const TrialRecording& r, std::size_t n_units) {
  std::size_t len = n_units * samples_per_unit(r.rate_hz());
  if (len > r.n_samples()) {
    throw BoundsError("window of " + std::to_string(n_units) + " units exceeds " + std::to_string(r.n_samples()) +
                      " samples");
  }
  if (len < 2) throw BoundsError("window must keep at least 2 samples");
  std::vector<float> out;
  out.reserve(r.n_channels() * r.n_trials() * len);
  for (std::size_t c = 0; c < r.n_channels(); ++c) {
    for (std::size_t tr = 0; tr < r.n_trials(); ++tr) {
      auto s = r.trial(c, tr);
      out.insert(out.end(), s.end() - static_cast<std::ptrdiff_t>(len), s.end());
    }
  }
  return TrialRecording(r.n_channels(), r.n_trials(), len, r.rate_hz(), std::move(out), r.channels(), r.condition(),
                        r.attributes());
}

std::vector<ActivationTensor> split_trials(const ActivationTensor& t, std::size_t trial_length) {
  if (trial_length < 2 || t.n_timepoints() % trial_length != 0) {
    throw BoundsError("tensor of " + std::to_string(t.n_timepoints()) + " timepoints is not a whole number of " +
                      std::to_string(trial_length) + "-unit trials");
  }
  std::size_t n_trials = t.n_timepoints() / trial_length;
  std::vector<ActivationTensor> trials;
  trials.reserve(n_trials);
  for (std::size_t k = 0; k < n_trials; ++k) {
    std::vector<float> out;
    out.reserve(t.n_units() * trial_length);
    for (std::size_t l = 0; l < t.n_layers(); ++l) {
      for (std::size_t n = 0; n < t.n_neurons(); ++n) {
        auto s = t.series({l, n}).subspan(k * trial_length, trial_length);
        out.insert(out.end(), s.begin(), s.end());
      }
    }
    trials.emplace_back(t.n_layers(), t.n_neurons(), trial_length, t.rate_hz(), std::move(out), t.corpus_tag(),
                        t.condition(), t.attributes());
  }
  return trials;
}

ActivationTensor concat_time(std::span<const ActivationTensor> parts, ConditionLabel condition) {
  if (parts.empty()) throw BoundsError("concat_time: nothing to concatenate");
  const auto& first = parts.front();
  std::size_t total = 0;
  for (const auto& p : parts) {
    if (p.n_layers() != first.n_layers() || p.n_neurons() != first.n_neurons() || p.rate_hz() != first.rate_hz()) {
      throw ValidationError("concat_time: tensors differ in shape or rate");
    }
    total += p.n_timepoints();
  }
  std::vector<float> out;
  out.reserve(first.n_units() * total);
  for (std::size_t l = 0; l < first.n_layers(); ++l) {
    for (std::size_t n = 0; n < first.n_neurons(); ++n) {
      for (const auto& p : parts) {
        auto s = p.series({l, n});
        out.insert(out.end(), s.begin(), s.end());
      }
    }
  }
  return ActivationTensor(first.n_layers(), first.n_neurons(), total, first.rate_hz(), std::move(out),
                          first.corpus_tag(), condition, first.attributes());
}

SplitPolicy parse_split_policy(std::string_view s) {
  if (s == "contiguous") return SplitPolicy::contiguous;
  if (s == "interleaved") return SplitPolicy::interleaved;
  throw ConfigError("split policy must be 'contiguous' or 'interleaved', got '" + std::string(s) + "'");
}

std::string_view to_string(SplitPolicy p) { return p == SplitPolicy::contiguous ? "contiguous" : "interleaved"; }

std::array<std::vector<std::size_t>, 2> split_halves(std::size_t n_trials, SplitPolicy policy) {
  if (n_trials < 4) throw BoundsError("need at least 4 trials to form two halves of >= 2 trials");
  std::array<std::vector<std::size_t>, 2> halves;
  for (std::size_t t = 0; t < n_trials; ++t) {
    bool first = policy == SplitPolicy::contiguous ? t < n_trials / 2 : t % 2 == 0;
    halves[first ? 0 : 1].push_back(t);
  }
  return halves;
}

}  // namespace hftp
