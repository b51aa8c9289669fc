#pragma once

// Data model and interchange formats for model activations and trial-structured
// electrode recordings.
//
// HFTP-ACT v1 / HFTP-TRI v1 layout (all integers little-endian):
//
//   magic[8]            "HFTPACT1" or "HFTPTRI1"
//   u32 x3              (layers, neurons, timepoints) or (channels, trials, samples)
//   f64                 rate_hz
//   u32                 metadata JSON byte length
//   u8[len]             UTF-8 metadata JSON
//   f32[...]            payload, row-major in the dimension order above

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace hftp {

/// Linguistic units (syllables or words) are presented at this rate.
inline constexpr double kUnitRateHz = 4.0;

struct UnitId {
  std::size_t layer = 0;
  std::size_t neuron = 0;
  auto operator<=>(const UnitId&) const = default;
};

enum class StimulusClass { sentence, phrase, random };
enum class Split { A, B };
enum class Hemisphere { L, R };

std::string_view to_string(StimulusClass c);
std::string_view to_string(Split s);
std::string_view to_string(Hemisphere h);
StimulusClass parse_stimulus_class(std::string_view s);
Split parse_split(std::string_view s);
Hemisphere parse_hemisphere(std::string_view s);

/// Experimental condition. A file holding a whole stimulus class (both
/// 20-trial halves) leaves `split` unset; the six analysis conditions always
/// carry one.
struct ConditionLabel {
  StimulusClass stimulus_class = StimulusClass::sentence;
  std::optional<Split> split;

  auto operator<=>(const ConditionLabel&) const = default;
  std::string name() const;
};

/// The six fully specified analysis conditions, in canonical order
/// (sentence A, sentence B, phrase A, phrase B, random A, random B).
const std::array<ConditionLabel, 6>& all_conditions();
std::size_t condition_index(const ConditionLabel& c);

/// The twelve region-of-interest names channels are grouped into.
const std::array<std::string_view, 12>& roi_names();
bool is_roi_name(std::string_view name);

struct ChannelMeta {
  std::size_t channel_id = 0;
  Hemisphere hemisphere = Hemisphere::L;
  std::string aal_label;
  std::string roi;

  bool operator==(const ChannelMeta&) const = default;
};

/// Layers x neurons x timepoints of activations sampled at a virtual rate.
/// Values are kept in single precision so the on-disk format round-trips
/// bit-exactly. Immutable once constructed.
class ActivationTensor {
 public:
  ActivationTensor(std::size_t n_layers, std::size_t n_neurons, std::size_t n_timepoints,
                   double rate_hz, std::vector<float> values, std::string corpus_tag = {},
                   ConditionLabel condition = {}, nlohmann::json attributes = nlohmann::json::object());

  std::size_t n_layers() const { return n_layers_; }
  std::size_t n_neurons() const { return n_neurons_; }
  std::size_t n_timepoints() const { return n_timepoints_; }
  std::size_t n_units() const { return n_layers_ * n_neurons_; }
  double rate_hz() const { return rate_hz_; }
  const std::string& corpus_tag() const { return corpus_tag_; }
  const ConditionLabel& condition() const { return condition_; }
  const nlohmann::json& attributes() const { return attributes_; }
  std::span<const float> values() const { return values_; }

  std::span<const float> series(UnitId u) const;
  std::vector<double> series_f64(UnitId u) const;
  float at(std::size_t layer, std::size_t neuron, std::size_t t) const;

  bool operator==(const ActivationTensor&) const = default;

 private:
  std::size_t n_layers_;
  std::size_t n_neurons_;
  std::size_t n_timepoints_;
  double rate_hz_;
  std::vector<float> values_;
  std::string corpus_tag_;
  ConditionLabel condition_;
  nlohmann::json attributes_;
};

/// Channels x trials x samples of recorded voltages. Immutable once constructed.
class TrialRecording {
 public:
  TrialRecording(std::size_t n_channels, std::size_t n_trials, std::size_t n_samples,
                 double rate_hz, std::vector<float> values, std::vector<ChannelMeta> channels,
                 ConditionLabel condition = {}, nlohmann::json attributes = nlohmann::json::object());

  std::size_t n_channels() const { return n_channels_; }
  std::size_t n_trials() const { return n_trials_; }
  std::size_t n_samples() const { return n_samples_; }
  double rate_hz() const { return rate_hz_; }
  const std::vector<ChannelMeta>& channels() const { return channels_; }
  const ConditionLabel& condition() const { return condition_; }
  const nlohmann::json& attributes() const { return attributes_; }
  std::span<const float> values() const { return values_; }

  std::span<const float> trial(std::size_t channel, std::size_t trial) const;

  /// New recording holding only the listed trials, in the listed order.
  TrialRecording select_trials(std::span<const std::size_t> trials,
                               std::optional<ConditionLabel> relabel = std::nullopt) const;

  bool operator==(const TrialRecording&) const = default;

 private:
  std::size_t n_channels_;
  std::size_t n_trials_;
  std::size_t n_samples_;
  double rate_hz_;
  std::vector<float> values_;
  std::vector<ChannelMeta> channels_;
  ConditionLabel condition_;
  nlohmann::json attributes_;
};

// --- interchange -----------------------------------------------------------

ActivationTensor read_activation_file(const std::filesystem::path& path);
void write_activation_file(const ActivationTensor& t, const std::filesystem::path& path);
std::vector<std::uint8_t> encode_activation(const ActivationTensor& t);
ActivationTensor decode_activation(std::span<const std::uint8_t> bytes);

TrialRecording read_trial_recording(const std::filesystem::path& path);
void write_trial_recording(const TrialRecording& r, const std::filesystem::path& path);
std::vector<std::uint8_t> encode_recording(const TrialRecording& r);
TrialRecording decode_recording(std::span<const std::uint8_t> bytes);

nlohmann::json to_json(const ConditionLabel& c);
ConditionLabel condition_from_json(const nlohmann::json& j);

// --- anatomy ---------------------------------------------------------------

/// AAL label -> ROI name. Must cover all twelve ROIs.
class RoiMap {
 public:
  explicit RoiMap(std::map<std::string, std::string> entries);

  const std::map<std::string, std::string>& entries() const { return entries_; }

  /// Resolves an AAL label, accepting an optional "_L"/"_R" hemisphere
  /// suffix. Throws ValidationError for unknown labels.
  const std::string& resolve(std::string_view aal_label) const;

 private:
  std::map<std::string, std::string> entries_;
};

RoiMap load_roi_map(const std::filesystem::path& path);
RoiMap parse_roi_map(std::string_view json_text);
/// The 24-label AAL grouping shipped with the toolkit.
const RoiMap& default_roi_map();

// --- windows and splits ----------------------------------------------------

/// Samples per linguistic unit at the given rate (rate / 4 Hz). Throws when the
/// rate is not an integer multiple of the unit rate.
std::size_t samples_per_unit(double rate_hz);

/// Keep only the trailing `n_units` linguistic units of every series.
ActivationTensor slice_last(const ActivationTensor& t, std::size_t n_units);
TrialRecording slice_last(const TrialRecording& r, std::size_t n_units);

/// Cut a trial-concatenated tensor into per-trial tensors of `trial_length`
/// timepoints.
std::vector<ActivationTensor> split_trials(const ActivationTensor& t, std::size_t trial_length);

/// Concatenate tensors of identical shape along time.
ActivationTensor concat_time(std::span<const ActivationTensor> parts, ConditionLabel condition);

enum class SplitPolicy { contiguous, interleaved };
SplitPolicy parse_split_policy(std::string_view s);
std::string_view to_string(SplitPolicy p);

/// Trial indices of halves A and B.
std::array<std::vector<std::size_t>, 2> split_halves(std::size_t n_trials, SplitPolicy policy);

// --- synthetic oracle data -------------------------------------------------

struct PlantedComponent {
  std::size_t layer = 0;  // ignored for recordings
  std::size_t first = 0;  // first neuron (or channel)
  std::size_t count = 1;
  double freq_hz = 1.0;
  double amplitude = 1.0;
  double phase = 0.0;
  bool phase_locked = true;  // recordings: false draws a fresh phase per trial
};

enum class SynthKind { activation, recording };

struct SynthSpec {
  SynthKind kind = SynthKind::activation;
  std::size_t n_layers = 1;
  std::size_t n_neurons = 1;
  std::size_t n_timepoints = 2;
  std::size_t n_channels = 1;
  std::size_t n_trials = 2;
  std::size_t n_samples = 2;
  double rate_hz = kUnitRateHz;
  double noise_sigma = 1.0;
  std::uint64_t seed = 0;
  std::string corpus_tag = "synthetic";
  ConditionLabel condition;
  std::vector<PlantedComponent> planted;
  std::vector<ChannelMeta> channels;  // empty -> round-robin over the default map
};

SynthSpec synth_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SynthSpec& s);

ActivationTensor synth_activation(const SynthSpec& spec);
TrialRecording synth_recording(const SynthSpec& spec);

/// Deterministic per-stream seed derived from a global seed and two indices.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

}  // namespace hftp
