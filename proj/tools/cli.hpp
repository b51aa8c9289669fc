#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hftp/alignment.hpp"
#include "hftp/encoding.hpp"
#include "hftp/probe_model.hpp"

namespace hftp::cli {

enum ExitCode : int { kOk = 0, kConfigError = 2, kInputError = 3, kDegenerate = 4 };

/// Everything a command needs, after config file, HFTP_SEED and flags have
/// been merged (flags win).
struct RunConfig {
  std::filesystem::path base_dir;  // relative paths resolve here
  std::filesystem::path out;
  std::uint64_t seed = 0;
  std::size_t n_perm = 1000;
  double alpha = 0.05;
  std::size_t k = 100;
  std::vector<double> frequencies{1.0, 2.0};
  SplitPolicy split_policy = SplitPolicy::contiguous;
  std::size_t workers = 1;
  bool svg = false;
  AmpMode amp_mode = AmpMode::real;
  ZPopulation z_population = ZPopulation::all;
  ZScope z_scope = ZScope::pooled;
  SpectrumAveraging spectrum_averaging = SpectrumAveraging::magnitude_then_mean;
  std::size_t trial_units = kTrialUnits;
  std::size_t window_units = kWindowUnits;
  std::size_t n_partitions = 10;
  std::size_t n_splits = 5;
  double test_frac = 0.3;
  StimulusClass corpus = StimulusClass::sentence;
  std::string model_name = "model";
  std::string anova_group = "all";

  std::optional<std::filesystem::path> roi_map;
  std::optional<std::filesystem::path> experimental;
  std::optional<std::filesystem::path> control;
  std::optional<std::filesystem::path> recording;
  std::vector<std::filesystem::path> model_inputs;
  std::vector<std::filesystem::path> brain_inputs;
  std::optional<std::filesystem::path> neuron_classes;
  std::optional<std::filesystem::path> channel_classes;
  std::optional<std::filesystem::path> bilingual_classes;
  std::vector<std::pair<std::string, std::filesystem::path>> reports;
  nlohmann::json synth = nlohmann::json::array();

  /// Analysis settings echoed into artifacts (no output location).
  nlohmann::json echo() const;
};

struct Overrides {
  std::optional<std::filesystem::path> out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> n_perm;
  std::optional<std::size_t> workers;
  bool svg = false;
};

/// Parses a config object. Unknown keys raise ConfigError.
RunConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir);
RunConfig load_config(const std::optional<std::filesystem::path>& path, const Overrides& flags,
                      const char* env_seed);

int cmd_synth(const RunConfig& c);
int cmd_probe_model(const RunConfig& c);
int cmd_probe_brain(const RunConfig& c);
int cmd_align(const RunConfig& c);
int cmd_encode(const RunConfig& c);
int cmd_report(const RunConfig& c);

/// Full command-line entry point; returns the process exit code.
int run(int argc, const char* const* argv);
int run(const std::vector<std::string>& args);

// Shared artifact helpers.
std::string fmt(double v);
void write_text(const std::filesystem::path& p, const std::string& s);
std::string read_text(const std::filesystem::path& p);
std::string dump(const nlohmann::json& j);

/// Reads the per-unit CSV written by probe-model.
NeuronClassification read_unit_classes(const std::filesystem::path& p);
/// Reads the per-channel CSV written by probe-brain.
std::map<std::size_t, UnitClass> read_channel_classes(const std::filesystem::path& p);

}  // namespace hftp::cli
