#pragma once

// Ridge encoding of channel phase-coherence profiles from layer spectra.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "hftp/alignment.hpp"
#include "hftp/ingest.hpp"
#include "hftp/probe_model.hpp"

namespace hftp {

using Row2 = std::array<double, 2>;

/// Rows are (block, frequency) pairs in block-major order; columns are the
/// real and imaginary parts of the layer-average coefficient.
struct EncodingDesign {
  std::vector<double> freqs;  // K model bins
  std::size_t n_blocks = 0;
  std::vector<Row2> X;        // n_blocks * K rows
};

struct Band {
  double low = 0.5;
  double high = 2.0;
};

/// Averages the member series over neurons and trials within each block
/// (a tensor of whole windows of `window` timepoints), takes the DFT of the
/// average and keeps the bins inside `band`. nullopt when `members` is empty.
std::optional<EncodingDesign> build_model_features(std::span<const ActivationTensor> blocks, std::size_t window,
                                                   std::span<const UnitId> members, Band band = {});

struct TargetVector {
  std::vector<double> y;
  double max_distance_hz = 0.0;
  bool alignment_warning = false;  // a match lay beyond half the model bin spacing
};

/// Index of the grid point nearest to f (ties go to the lower frequency).
std::size_t nearest_index(std::span<const double> grid, double f);

/// ITPC amplitude of one channel per block at the grid point nearest each
/// model frequency, concatenated in block order.
TargetVector build_brain_targets(std::span<const TrialRecording> blocks, std::size_t channel,
                                 std::span<const double> model_freqs);

struct Standardizer {
  Row2 mean{};
  Row2 sd{1.0, 1.0};  // a constant column keeps sd = 1

  Row2 apply(const Row2& x) const;
};

Standardizer fit_standardizer(std::span<const Row2> X);

struct RidgeFit {
  Row2 beta{};
  double intercept = 0.0;
  double alpha = 1.0;

  double predict(const Row2& x) const { return intercept + beta[0] * x[0] + beta[1] * x[1]; }
};

/// Closed-form ridge on a two-column design. X and y are centred internally;
/// the intercept is unpenalized.
RidgeFit ridge_fit(std::span<const Row2> X, std::span<const double> y, double alpha);

/// 13 points log-spaced over [1e-3, 1e3].
std::vector<double> default_alpha_grid();

/// Alpha minimizing mean squared error over `folds` contiguous folds of the
/// given rows. Each inner fold is standardized on its own training rows.
/// Ties go to the smaller alpha.
double ridge_cv_alpha(std::span<const Row2> X, std::span<const double> y, std::span<const double> grid,
                      std::size_t folds = 5);

struct SplitResult {
  Standardizer standardizer;
  double alpha = 0.0;
  RidgeFit fit;
  double rho = 0.0;
  bool degenerate = false;
};

/// Standardize on train, choose alpha on train, fit on train, score Spearman
/// on test.
SplitResult evaluate_split(std::span<const Row2> X, std::span<const double> y, std::span<const std::size_t> train,
                           std::span<const std::size_t> test, std::span<const double> grid);

/// Random train/test partition with ceil(test_frac * n) test rows.
std::array<std::vector<std::size_t>, 2> random_split(std::size_t n, double test_frac, std::uint64_t seed);

struct PredictiveOptions {
  std::size_t n_splits = 5;
  double test_frac = 0.3;
  std::vector<double> grid = default_alpha_grid();
};

struct PredictiveScore {
  double p_score = 0.0;
  std::vector<double> split_scores;
  std::vector<double> alphas;
  std::size_t n_degenerate = 0;
};

/// Split s uses random_split(n, test_frac, derive_seed(seed, s)).
PredictiveScore predictive_score(std::span<const Row2> X, std::span<const double> y, std::uint64_t seed,
                                 const PredictiveOptions& opts = {});

// --- pipeline ---------------------------------------------------------------

struct EncodeOptions {
  std::size_t k = 100;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  StimulusClass corpus = StimulusClass::sentence;
  PredictiveOptions predictive;
  Band band;
};

struct EncodingPool {
  NeuronPool pool = NeuronPool::pooled;
  std::vector<std::size_t> skipped_layers;
  ScoreMatrix scores;
  std::vector<GroupSummary> groups;
  std::size_t n_degenerate_splits = 0;
};

struct EncodingReport {
  StimulusClass corpus = StimulusClass::sentence;
  std::size_t k = 0;
  std::size_t n_alignment_warnings = 0;
  std::vector<EncodingPool> pools;
  std::map<std::string, MeanSummary> class_mean;
};

/// Neuron pools scored for a corpus: sentence, phrase and both for the
/// sentence corpus, phrase for the phrase corpus, every classified neuron
/// otherwise.
std::vector<NeuronPool> encoding_pools(StimulusClass corpus);

/// Same top-k / layer-mean / region machinery as the RSA pipeline.
std::vector<GroupSummary> aggregate_predictive(const ScoreMatrix& scores, std::size_t k,
                                               const std::map<std::size_t, UnitClass>& channel_class);

/// Blocks are the A and B halves of `opts.corpus`. Pair (layer, channel)
/// uses seed derive_seed(opts.seed, layer, channel_id).
EncodingReport encode(const ModelConditions& model, const BrainConditions& brain, const NeuronClassification& neurons,
                      const std::map<std::size_t, UnitClass>& channel_class, const EncodeOptions& opts);

nlohmann::json to_json(const EncodingReport& r);

}  // namespace hftp
