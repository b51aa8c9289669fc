#pragma once

// Condition-by-condition dissimilarity structure and model-brain alignment
// metrics.

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "hftp/ingest.hpp"
#include "hftp/probe_brain.hpp"
#include "hftp/probe_model.hpp"
#include "hftp/spectral.hpp"
#include "hftp/stats.hpp"

namespace hftp {

inline constexpr std::size_t kConditions = 6;
inline constexpr std::size_t kTrialUnits = 36;
inline constexpr std::size_t kWindowUnits = 32;

/// Per-condition activations, each holding n_trials consecutive windows of
/// `window` timepoints.
struct ModelConditions {
  std::array<std::optional<ActivationTensor>, kConditions> cond;
  std::size_t window = kWindowUnits;

  const ActivationTensor& at(std::size_t c) const;
  std::size_t n_trials(std::size_t c) const { return at(c).n_timepoints() / window; }
};

struct BrainConditions {
  std::array<std::optional<TrialRecording>, kConditions> cond;

  const TrialRecording& at(std::size_t c) const;
};

struct DesignOptions {
  std::size_t trial_units = kTrialUnits;
  std::size_t window_units = kWindowUnits;
  SplitPolicy policy = SplitPolicy::contiguous;
};

/// Assembles the six conditions. Inputs whose label carries a split are used
/// as that condition; inputs without one are cut into trials and halved.
/// Every trial keeps only its trailing window. Throws IncompleteDesignError
/// when a condition is missing or duplicated.
ModelConditions model_conditions(std::span<const ActivationTensor> inputs, const DesignOptions& opts = {});
BrainConditions brain_conditions(std::span<const TrialRecording> inputs, const DesignOptions& opts = {});

/// Feature vectors over bins in (0, 2] Hz, one per condition.
struct ConditionFeatures {
  std::vector<double> freqs;
  std::array<std::vector<double>, kConditions> values;
};

ConditionFeatures condition_features(const ModelConditions& m, UnitId unit,
                                     SpectrumAveraging how = SpectrumAveraging::magnitude_then_mean);
/// ITPC per condition; `channel` indexes the recording's channel list.
ConditionFeatures condition_features(const BrainConditions& b, std::size_t channel);

struct Srdm {
  std::array<std::array<double, kConditions>, kConditions> d{};
};

/// d = 1 - cosine similarity. Throws DegenerateError on a zero-norm vector.
Srdm srdm(const ConditionFeatures& f);

/// Entrywise mean similarity (1 - d) over the inputs, reconverted to
/// dissimilarity.
Srdm layer_srdm(std::span<const Srdm> members);

/// The 15 upper-triangle entries, row-major.
std::array<double, 15> upper_triangle(const Srdm& s);

/// Spearman rho over the upper triangles; degenerate ranks give rho = 0.
stats::RankCorrelation rsa_spearman(const Srdm& a, const Srdm& b);

// --- ranking and aggregation ----------------------------------------------

struct ChannelScore {
  std::size_t channel_id = 0;
  double score = 0.0;
};

/// Sorted by score descending, ties by channel id ascending, cut to k.
/// `clipped` is set when fewer than k channels were available.
std::vector<ChannelScore> top_k_channels(std::vector<ChannelScore> scores, std::size_t k, bool* clipped = nullptr);

struct LayerSelection {
  std::size_t layer = 0;
  std::vector<ChannelScore> top;

  double mean_score() const;
};

/// Mean over layers of the mean top-k score.
double model_brain_similarity(std::span<const LayerSelection> selections);

/// Per layer, mean score over top-k channels in `roi`; layers without such
/// channels are skipped. nullopt when no layer contributes.
std::optional<double> model_region_similarity(std::span<const LayerSelection> selections,
                                              std::span<const ChannelMeta> channels, const std::string& roi);

/// (share of `roi` in the selection) / (share of `roi` among `universe`).
/// Throws UndefinedTestError when the ROI has no channels in the universe.
double contribution_ratio(const LayerSelection& selection, std::span<const ChannelMeta> universe,
                          const std::string& roi);

/// 2x2 table (selected, not selected) x (significant, not significant) over
/// the universe, then chi_square_2x2.
std::array<std::array<double, 2>, 2> overlap_table(const LayerSelection& selection,
                                                   std::span<const ChannelMeta> universe,
                                                   const std::map<std::size_t, UnitClass>& channel_class);
stats::ChiSquare overlap_chi_square(const LayerSelection& selection, std::span<const ChannelMeta> universe,
                                    const std::map<std::size_t, UnitClass>& channel_class);

/// Scores indexed [layer row][channel column].
struct ScoreMatrix {
  std::vector<std::size_t> layers;
  std::vector<ChannelMeta> channels;
  std::vector<std::vector<double>> score;
};

struct LayerSummary {
  LayerSelection selection;
  std::map<std::string, double> contribution;  // ROIs present in the universe
  std::optional<stats::ChiSquare> chi_square;
  std::string chi_square_note;
};

/// Aggregates for one channel group (a hemisphere, or all channels).
struct GroupSummary {
  std::string group;
  std::size_t n_channels = 0;
  std::size_t k = 0;
  bool clipped = false;
  std::vector<LayerSummary> layers;
  std::optional<double> s_mb;
  std::map<std::string, std::optional<double>> s_mbr;  // all twelve ROIs

  std::vector<LayerSelection> selections() const;
};

/// Ranking, top-k selection and all summary metrics restricted to channels
/// in `group` ("L", "R" or "all"). `channel_class` may be empty, in which
/// case no chi-square is computed.
GroupSummary summarize_group(const ScoreMatrix& m, const std::string& group, std::size_t k,
                             const std::map<std::size_t, UnitClass>& channel_class);

/// Arithmetic mean of S(m,b) and S(m,b_r) across summaries of the same
/// group; cells absent from every summary stay empty.
struct MeanSummary {
  std::optional<double> s_mb;
  std::map<std::string, std::optional<double>> s_mbr;
};
MeanSummary mean_of(std::span<const GroupSummary> summaries);

inline const std::array<std::string, 3>& channel_groups() {
  static const std::array<std::string, 3> g{"L", "R", "all"};
  return g;
}

// --- RSA pipeline -----------------------------------------------------------

struct AlignOptions {
  std::size_t k = 100;
  SpectrumAveraging averaging = SpectrumAveraging::magnitude_then_mean;
  std::size_t workers = 1;
};

/// Neuron pools used to build layer SRDMs.
enum class NeuronPool { sentence, phrase, both, pooled };
std::string_view to_string(NeuronPool p);
const std::array<NeuronPool, 4>& neuron_pools();
bool pool_contains(NeuronPool p, UnitClass c);

struct PoolReport {
  NeuronPool pool = NeuronPool::pooled;
  std::vector<std::size_t> skipped_layers;  // no member neurons
  std::map<std::size_t, std::size_t> layer_size;
  ScoreMatrix rho;
  std::vector<GroupSummary> groups;
};

struct AlignmentReport {
  std::size_t k = 0;
  std::vector<std::size_t> excluded_channels;  // degenerate ITPC features
  std::vector<UnitId> degenerate_neurons;
  std::vector<PoolReport> pools;
  std::map<std::string, MeanSummary> class_mean;  // over sentence/phrase/both, per group
};

AlignmentReport align(const ModelConditions& model, const BrainConditions& brain, const NeuronClassification& neurons,
                      const std::map<std::size_t, UnitClass>& channel_class, const AlignOptions& opts = {});

nlohmann::json to_json(const MeanSummary& m);
nlohmann::json to_json(const GroupSummary& g);
nlohmann::json to_json(const AlignmentReport& r);

/// A model's name and its per-group summary.
using ModelColumn = std::pair<std::string, std::map<std::string, MeanSummary>>;

/// Rows are the twelve ROIs followed by S(m,b); columns are each model's L
/// and R groups. Empty cells are written as '/'.
std::string table_csv(std::span<const ModelColumn> models);

/// Per-layer mean top-k score, the ANOVA input for model comparisons.
std::vector<double> layer_means(std::span<const LayerSelection> selections);

}  // namespace hftp
