#pragma once

// Detection and classification of frequency-tagged units in model activations.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hftp/ingest.hpp"
#include "hftp/spectral.hpp"
#include "hftp/stats.hpp"

namespace hftp {

inline constexpr double kSentenceHz = 1.0;
inline constexpr double kPhraseHz = 2.0;

/// Structural class of a neuron or channel.
enum class UnitClass { none, sentence, phrase, both };
std::string_view to_string(UnitClass c);
UnitClass parse_unit_class(std::string_view s);
UnitClass combine_class(bool at_sentence_rate, bool at_phrase_rate);

struct PermutationOptions {
  std::size_t n_perm = 1000;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  AmpMode mode = AmpMode::real;
};

/// Validates n_perm >= 100 and 0 < alpha < 1; throws ConfigError.
void validate(const PermutationOptions& o);

struct PermutationResult {
  UnitId unit;
  double freq_hz = 0.0;
  double observed = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::size_t n_perm = 0;
  bool significant = false;
};

/// Permutation CI of amp_stat at one or more frequencies. The same
/// permutations are shared by every frequency. `stream_seed` seeds the
/// permutation stream directly; pipelines derive it per unit.
std::vector<PermutationResult> permutation_ci(std::span<const double> series, double rate_hz,
                                              std::span<const double> freqs, const PermutationOptions& opts,
                                              std::uint64_t stream_seed);
PermutationResult permutation_ci(std::span<const double> series, double rate_hz, double f,
                                 const PermutationOptions& opts, std::uint64_t stream_seed);

/// Permutation results for every unit of a tensor, indexed [freq][unit]
/// with units in (layer, neuron) order. Unit streams are seeded with
/// derive_seed(opts.seed, layer, neuron).
std::vector<std::vector<PermutationResult>> scan_tensor(const ActivationTensor& t, std::span<const double> freqs,
                                                        const PermutationOptions& opts, std::size_t workers = 1);

/// Units significant at f, in (layer, neuron) order.
std::vector<UnitId> significant_neurons(const ActivationTensor& t, double f, const PermutationOptions& opts,
                                        std::size_t workers = 1);
std::vector<UnitId> significant_units(std::span<const PermutationResult> results);

/// Population over which amplitudes are standardized and over which the
/// deviation threshold is estimated.
enum class ZPopulation { all, significant };
enum class ZScope { pooled, per_layer };
ZPopulation parse_z_population(std::string_view s);
ZScope parse_z_scope(std::string_view s);
std::string_view to_string(ZPopulation p);
std::string_view to_string(ZScope s);

struct ZOptions {
  ZPopulation population = ZPopulation::all;
  ZScope scope = ZScope::pooled;
  AmpMode mode = AmpMode::real;
};

struct ZEntry {
  UnitId unit;
  double z_exp = 0.0;
  double z_ctrl = 0.0;
  double z_dev = 0.0;
};

struct ZScoreTable {
  double freq_hz = 0.0;
  ZOptions options;
  std::vector<ZEntry> entries;  // members of S_f only, (layer, neuron) order
  std::vector<double> mu;       // one value pooled, one per layer otherwise
  std::vector<double> sigma;

  double threshold(std::size_t layer) const;
  bool passes(const ZEntry& e) const;
};

/// z-score deviation of the amplitude at f between an experimental tensor and
/// its control. Throws DegenerateError when |s| < 3 or a population has zero
/// variance.
ZScoreTable zscore_deviation(const ActivationTensor& exp, const ActivationTensor& ctrl, std::span<const UnitId> s,
                             double f, const ZOptions& opts = {});

struct NeuronClassification {
  std::size_t n_layers = 0;
  std::size_t n_neurons = 0;
  std::vector<UnitClass> classes;  // (layer, neuron) order

  UnitClass at(UnitId u) const { return classes[u.layer * n_neurons + u.neuron]; }
  std::vector<UnitId> members(UnitClass c, std::optional<std::size_t> layer = std::nullopt) const;
};

/// sentence: passes at 1 Hz only; phrase: 2 Hz only; both: both.
NeuronClassification classify_neurons(const ZScoreTable& z1, const ZScoreTable& z2, std::size_t n_layers,
                                      std::size_t n_neurons);

struct LayerRow {
  std::size_t layer = 0;
  std::size_t width = 0;
  std::size_t n_sentence = 0;  // exclusive
  std::size_t n_phrase = 0;    // exclusive
  std::size_t n_both = 0;

  std::size_t n_syntactic() const { return n_sentence + n_phrase + n_both; }
};

struct LayerDistribution {
  std::vector<LayerRow> rows;
  std::size_t total_syntactic() const;
};

LayerDistribution layer_distribution(const NeuronClassification& c);

/// Pearson r between per-layer sentence and phrase counts. Counts are
/// inclusive (a "both" unit counts for each) unless `inclusive` is false.
stats::Correlation covariance_trend(const LayerDistribution& d, bool inclusive = true);

struct BilingualRow {
  std::size_t layer = 0;
  std::size_t first_only = 0;
  std::size_t second_only = 0;
  std::size_t shared = 0;
};

/// Per-layer overlap of syntactic (class != none) units between two
/// classifications of the same model.
std::vector<BilingualRow> bilingual_sets(const NeuronClassification& first, const NeuronClassification& second);

}  // namespace hftp
