#pragma once

// Phase-coherence spectra and channel classification for trial recordings.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hftp/ingest.hpp"
#include "hftp/probe_model.hpp"
#include "hftp/spectral.hpp"
#include "hftp/stats.hpp"

namespace hftp {

/// A trial's coefficient is treated as phase-less at a bin when its magnitude
/// is at most this fraction of the trial's summed absolute amplitude.
inline constexpr double kPhaseFloor = 1e-10;

struct ItpcSpectrum {
  std::size_t channel_id = 0;
  std::vector<double> freqs;
  std::vector<double> itpc;           // |complex_mean|
  std::vector<cplx> complex_mean;     // mean unit phasor over included trials
  std::vector<std::size_t> n_included;
  bool quality_flag = false;          // some trial was excluded at some bin
};

/// ITPC over all trials of one channel (index into r.channels()).
ItpcSpectrum itpc(const TrialRecording& r, std::size_t channel);

/// Permutation CI of the ITPC at each frequency, permuting samples within
/// every trial. PermutationResult::unit.neuron holds the channel id.
std::vector<PermutationResult> channel_permutation_ci(const TrialRecording& r, std::size_t channel,
                                                      std::span<const double> freqs, const PermutationOptions& opts,
                                                      std::uint64_t stream_seed);
PermutationResult channel_permutation_ci(const TrialRecording& r, std::size_t channel, double f,
                                         const PermutationOptions& opts, std::uint64_t stream_seed);

struct ChannelClassification {
  std::vector<ChannelMeta> channels;
  std::vector<UnitClass> classes;
  std::vector<PermutationResult> sentence_rate;  // 1 Hz
  std::vector<PermutationResult> phrase_rate;    // 2 Hz

  std::size_t n_significant() const;
};

/// Channel streams are seeded with derive_seed(opts.seed, channel_id).
ChannelClassification classify_channels(const TrialRecording& r, const PermutationOptions& opts,
                                        std::size_t workers = 1);

struct RoiRow {
  std::string roi;
  Hemisphere hemisphere = Hemisphere::L;
  std::size_t n_channels = 0;
  std::size_t n_sentence = 0;  // exclusive
  std::size_t n_phrase = 0;    // exclusive
  std::size_t n_both = 0;
};

/// One row per (ROI, hemisphere) in ROI-name then L/R order.
struct RoiDistribution {
  std::vector<RoiRow> rows;
  std::size_t total_significant() const;
};

RoiDistribution roi_distribution(const ChannelClassification& c, const RoiMap& m);

/// Pearson r across ROIs between sentence and phrase channel counts in one
/// hemisphere (inclusive counts unless `inclusive` is false).
stats::Correlation roi_correlation(const RoiDistribution& d, Hemisphere h, bool inclusive = true);

}  // namespace hftp
