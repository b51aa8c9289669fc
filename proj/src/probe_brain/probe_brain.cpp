#include "hftp/probe_brain.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

#include "hftp/error.hpp"
#include "hftp/parallel.hpp"
#include "hftp/permute.hpp"

namespace hftp {

namespace {

double abs_sum(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += std::abs(v);
  return s;
}

struct PhasorSum {
  cplx sum{};
  std::size_t n = 0;

  void add(cplx c, double floor) {
    const double m = std::abs(c);
    if (m <= floor) return;
    sum += c / m;
    ++n;
  }
  double resultant() const { return n == 0 ? 0.0 : std::abs(sum) / static_cast<double>(n); }
};

void require_trials(const TrialRecording& r, std::size_t channel) {
  if (r.n_trials() < 2) throw ValidationError("ITPC needs at least 2 trials, recording has " + std::to_string(r.n_trials()));
  if (channel >= r.n_channels()) throw BoundsError("channel index out of range");
}

}  // namespace

ItpcSpectrum itpc(const TrialRecording& r, std::size_t channel) {
  require_trials(r, channel);
  ItpcSpectrum out;
  out.channel_id = r.channels()[channel].channel_id;
  const std::size_t n = r.n_samples();
  const std::size_t K = n / 2 + 1;
  std::vector<PhasorSum> acc(K);
  std::vector<double> x(n);
  for (std::size_t t = 0; t < r.n_trials(); ++t) {
    auto tr = r.trial(channel, t);
    std::copy(tr.begin(), tr.end(), x.begin());
    const double floor = kPhaseFloor * abs_sum(x);
    auto X = dft_full(x);
    for (std::size_t k = 0; k < K; ++k) acc[k].add(X[k], floor);
  }
  out.freqs.resize(K);
  out.itpc.resize(K);
  out.complex_mean.resize(K);
  out.n_included.resize(K);
  for (std::size_t k = 0; k < K; ++k) {
    out.freqs[k] = static_cast<double>(k) * r.rate_hz() / static_cast<double>(n);
    out.n_included[k] = acc[k].n;
    out.complex_mean[k] = acc[k].n == 0 ? cplx{} : acc[k].sum / static_cast<double>(acc[k].n);
    out.itpc[k] = std::min(1.0, std::abs(out.complex_mean[k]));
    if (acc[k].n < r.n_trials()) out.quality_flag = true;
  }
  return out;
}

std::vector<PermutationResult> channel_permutation_ci(const TrialRecording& r, std::size_t channel,
                                                      std::span<const double> freqs, const PermutationOptions& opts,
                                                      std::uint64_t stream_seed) {
  validate(opts);
  require_trials(r, channel);
  const std::size_t n = r.n_samples();
  std::vector<BinProjector> proj;
  for (double f : freqs) proj.emplace_back(n, resolve_bin(n, r.rate_hz(), f, 1e-6));

  const std::size_t T = r.n_trials();
  std::vector<std::vector<double>> trials(T, std::vector<double>(n));
  std::vector<double> floors(T);
  for (std::size_t t = 0; t < T; ++t) {
    auto tr = r.trial(channel, t);
    std::copy(tr.begin(), tr.end(), trials[t].begin());
    floors[t] = kPhaseFloor * abs_sum(trials[t]);
  }
  auto coherence = [&](std::size_t i) {
    PhasorSum acc;
    for (std::size_t t = 0; t < T; ++t) acc.add(proj[i].project(trials[t]), floors[t]);
    return acc.resultant();
  };

  std::vector<PermutationResult> out(freqs.size());
  for (std::size_t i = 0; i < freqs.size(); ++i) {
    out[i].unit = {0, r.channels()[channel].channel_id};
    out[i].freq_hz = freqs[i];
    out[i].n_perm = opts.n_perm;
    out[i].observed = coherence(i);
  }
  std::vector<std::vector<double>> null(freqs.size(), std::vector<double>(opts.n_perm));
  std::mt19937_64 rng(stream_seed);
  for (std::size_t p = 0; p < opts.n_perm; ++p) {
    for (auto& tr : trials) shuffle_in_place(std::span<double>(tr), rng);
    for (std::size_t i = 0; i < freqs.size(); ++i) null[i][p] = coherence(i);
  }
  for (std::size_t i = 0; i < freqs.size(); ++i) {
    std::sort(null[i].begin(), null[i].end());
    out[i].ci_low = stats::quantile_sorted(null[i], opts.alpha / 2.0);
    out[i].ci_high = stats::quantile_sorted(null[i], 1.0 - opts.alpha / 2.0);
    out[i].significant = out[i].observed < out[i].ci_low || out[i].observed > out[i].ci_high;
  }
  return out;
}

PermutationResult channel_permutation_ci(const TrialRecording& r, std::size_t channel, double f,
                                         const PermutationOptions& opts, std::uint64_t stream_seed) {
  return channel_permutation_ci(r, channel, std::span<const double>(&f, 1), opts, stream_seed).front();
}

std::size_t ChannelClassification::n_significant() const {
  return static_cast<std::size_t>(
      std::count_if(classes.begin(), classes.end(), [](UnitClass c) { return c != UnitClass::none; }));
}

ChannelClassification classify_channels(const TrialRecording& r, const PermutationOptions& opts, std::size_t workers) {
  validate(opts);
  const std::array<double, 2> freqs{kSentenceHz, kPhraseHz};
  for (double f : freqs) resolve_bin(r.n_samples(), r.rate_hz(), f, 1e-6);
  if (r.n_trials() < 2) throw ValidationError("ITPC needs at least 2 trials");
  const std::size_t C = r.n_channels();
  ChannelClassification c;
  c.channels = r.channels();
  c.classes.resize(C);
  c.sentence_rate.resize(C);
  c.phrase_rate.resize(C);
  parallel_for(C, workers, [&](std::size_t ch) {
    auto res = channel_permutation_ci(r, ch, freqs, opts, derive_seed(opts.seed, r.channels()[ch].channel_id));
    c.sentence_rate[ch] = res[0];
    c.phrase_rate[ch] = res[1];
    c.classes[ch] = combine_class(res[0].significant, res[1].significant);
  });
  return c;
}

std::size_t RoiDistribution::total_significant() const {
  std::size_t n = 0;
  for (const auto& r : rows) n += r.n_sentence + r.n_phrase + r.n_both;
  return n;
}

RoiDistribution roi_distribution(const ChannelClassification& c, const RoiMap& m) {
  RoiDistribution d;
  for (auto roi : roi_names()) {
    for (auto h : {Hemisphere::L, Hemisphere::R}) d.rows.push_back({std::string(roi), h, 0, 0, 0, 0});
  }
  auto row_of = [&](const std::string& roi, Hemisphere h) -> RoiRow& {
    for (auto& r : d.rows) {
      if (r.roi == roi && r.hemisphere == h) return r;
    }
    throw ValidationError("unknown ROI '" + roi + "'");
  };
  for (std::size_t i = 0; i < c.channels.size(); ++i) {
    auto& row = row_of(m.resolve(c.channels[i].aal_label), c.channels[i].hemisphere);
    ++row.n_channels;
    switch (c.classes[i]) {
      case UnitClass::sentence: ++row.n_sentence; break;
      case UnitClass::phrase: ++row.n_phrase; break;
      case UnitClass::both: ++row.n_both; break;
      case UnitClass::none: break;
    }
  }
  return d;
}

stats::Correlation roi_correlation(const RoiDistribution& d, Hemisphere h, bool inclusive) {
  std::vector<double> s, p;
  for (const auto& r : d.rows) {
    if (r.hemisphere != h) continue;
    const double extra = inclusive ? static_cast<double>(r.n_both) : 0.0;
    s.push_back(static_cast<double>(r.n_sentence) + extra);
    p.push_back(static_cast<double>(r.n_phrase) + extra);
  }
  return stats::pearson(s, p);
}

}  // namespace hftp
