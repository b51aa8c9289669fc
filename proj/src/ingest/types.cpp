#include "hftp/ingest.hpp"

#include <algorithm>
#include <cmath>

#include "hftp/error.hpp"

namespace hftp {

std::string_view to_string(StimulusClass c) {
  switch (c) {
    case StimulusClass::sentence: return "sentence";
    case StimulusClass::phrase: return "phrase";
    case StimulusClass::random: return "random";
  }
  return "?";
}

std::string_view to_string(Split s) { return s == Split::A ? "A" : "B"; }
std::string_view to_string(Hemisphere h) { return h == Hemisphere::L ? "L" : "R"; }

StimulusClass parse_stimulus_class(std::string_view s) {
  if (s == "sentence") return StimulusClass::sentence;
  if (s == "phrase") return StimulusClass::phrase;
  if (s == "random") return StimulusClass::random;
  throw ValidationError("unknown stimulus class '" + std::string(s) + "'");
}

Split parse_split(std::string_view s) {
  if (s == "A") return Split::A;
  if (s == "B") return Split::B;
  throw ValidationError("unknown condition split '" + std::string(s) + "'");
}

Hemisphere parse_hemisphere(std::string_view s) {
  if (s == "L") return Hemisphere::L;
  if (s == "R") return Hemisphere::R;
  throw ValidationError("hemisphere must be L or R, got '" + std::string(s) + "'");
}

std::string ConditionLabel::name() const {
  std::string out(to_string(stimulus_class));
  if (split) {
    out += '_';
    out += to_string(*split);
  }
  return out;
}

const std::array<ConditionLabel, 6>& all_conditions() {
  static const std::array<ConditionLabel, 6> kAll = {
      ConditionLabel{StimulusClass::sentence, Split::A}, ConditionLabel{StimulusClass::sentence, Split::B},
      ConditionLabel{StimulusClass::phrase, Split::A},   ConditionLabel{StimulusClass::phrase, Split::B},
      ConditionLabel{StimulusClass::random, Split::A},   ConditionLabel{StimulusClass::random, Split::B},
  };
  return kAll;
}

std::size_t condition_index(const ConditionLabel& c) {
  if (!c.split) throw ValidationError("condition '" + c.name() + "' has no split");
  return static_cast<std::size_t>(c.stimulus_class) * 2 + static_cast<std::size_t>(*c.split);
}

const std::array<std::string_view, 12>& roi_names() {
  static constexpr std::array<std::string_view, 12> kNames = {
      "A1",  "STG",           "MTG",          "ITG", "Insula",      "TPJ",
      "Temporal_Pole", "Sensorimotor", "IFG", "MFG", "Hippocampus", "Amygdala",
  };
  return kNames;
}

bool is_roi_name(std::string_view name) {
  const auto& names = roi_names();
  return std::find(names.begin(), names.end(), name) != names.end();
}

namespace {

void check_finite(std::span<const float> v, const char* what) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) {
      throw ValidationError(std::string(what) + ": non-finite value at flat index " + std::to_string(i));
    }
  }
}

}  // namespace

ActivationTensor::ActivationTensor(std::size_t n_layers, std::size_t n_neurons, std::size_t n_timepoints,
                                   double rate_hz, std::vector<float> values, std::string corpus_tag,
                                   ConditionLabel condition, nlohmann::json attributes)
    : n_layers_(n_layers),
      n_neurons_(n_neurons),
      n_timepoints_(n_timepoints),
      rate_hz_(rate_hz),
      values_(std::move(values)),
      corpus_tag_(std::move(corpus_tag)),
      condition_(condition),
      attributes_(std::move(attributes)) {
  if (n_layers_ == 0 || n_neurons_ == 0) throw ValidationError("activation tensor must have at least one unit");
  if (n_timepoints_ < 2) throw ValidationError("activation tensor needs at least 2 timepoints");
  if (!(rate_hz_ > 0.0) || !std::isfinite(rate_hz_)) throw ValidationError("rate_hz must be positive");
  if (values_.size() != n_layers_ * n_neurons_ * n_timepoints_) {
    throw ValidationError("activation payload size does not match dimensions");
  }
  if (!attributes_.is_object()) throw ValidationError("attributes must be a JSON object");
  check_finite(values_, "activation tensor");
}

std::span<const float> ActivationTensor::series(UnitId u) const {
  if (u.layer >= n_layers_ || u.neuron >= n_neurons_) {
    throw BoundsError("unit (" + std::to_string(u.layer) + ", " + std::to_string(u.neuron) + ") out of range");
  }
  return std::span<const float>(values_).subspan((u.layer * n_neurons_ + u.neuron) * n_timepoints_, n_timepoints_);
}

std::vector<double> ActivationTensor::series_f64(UnitId u) const {
  auto s = series(u);
  return {s.begin(), s.end()};
}

float ActivationTensor::at(std::size_t layer, std::size_t neuron, std::size_t t) const {
  if (t >= n_timepoints_) throw BoundsError("timepoint out of range");
  return series({layer, neuron})[t];
}

TrialRecording::TrialRecording(std::size_t n_channels, std::size_t n_trials, std::size_t n_samples,
                               double rate_hz, std::vector<float> values, std::vector<ChannelMeta> channels,
                               ConditionLabel condition, nlohmann::json attributes)
    : n_channels_(n_channels),
      n_trials_(n_trials),
      n_samples_(n_samples),
      rate_hz_(rate_hz),
      values_(std::move(values)),
      channels_(std::move(channels)),
      condition_(condition),
      attributes_(std::move(attributes)) {
  if (n_channels_ == 0 || n_trials_ == 0) throw ValidationError("recording must have channels and trials");
  if (n_samples_ < 2) throw ValidationError("recording needs at least 2 samples per trial");
  if (!(rate_hz_ > 0.0) || !std::isfinite(rate_hz_)) throw ValidationError("rate_hz must be positive");
  if (values_.size() != n_channels_ * n_trials_ * n_samples_) {
    throw ValidationError("recording payload size does not match dimensions");
  }
  if (channels_.size() != n_channels_) {
    throw ValidationError("recording needs exactly one channel metadata entry per channel");
  }
  for (std::size_t c = 0; c < channels_.size(); ++c) {
    if (channels_[c].channel_id != c) {
      throw ValidationError("channel metadata out of order at position " + std::to_string(c));
    }
    if (!is_roi_name(channels_[c].roi)) {
      throw ValidationError("channel " + std::to_string(c) + " has unknown ROI '" + channels_[c].roi + "'");
    }
  }
  if (!attributes_.is_object()) throw ValidationError("attributes must be a JSON object");
  check_finite(values_, "trial recording");
}

std::span<const float> TrialRecording::trial(std::size_t channel, std::size_t trial) const {
  if (channel >= n_channels_ || trial >= n_trials_) throw BoundsError("channel/trial out of range");
  return std::span<const float>(values_).subspan((channel * n_trials_ + trial) * n_samples_, n_samples_);
}

TrialRecording TrialRecording::select_trials(std::span<const std::size_t> trials,
                                             std::optional<ConditionLabel> relabel) const {
  if (trials.empty()) throw BoundsError("select_trials: empty trial list");
  std::vector<float> out;
  out.reserve(n_channels_ * trials.size() * n_samples_);
  for (std::size_t c = 0; c < n_channels_; ++c) {
    for (std::size_t t : trials) {
      auto s = trial(c, t);
      out.insert(out.end(), s.begin(), s.end());
    }
  }
  return TrialRecording(n_channels_, trials.size(), n_samples_, rate_hz_, std::move(out), channels_,
                        relabel.value_or(condition_), attributes_);
}

}  // namespace hftp
