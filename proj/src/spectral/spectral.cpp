#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>

#include "hftp/error.hpp"
#include "hftp/spectral.hpp"
#include "hftp/stats.hpp"

namespace hftp {

namespace {

Spectrum half_spectrum(std::vector<cplx> full, std::size_t n, double rate_hz) {
  Spectrum s;
  s.n_input = n;
  s.rate_hz = rate_hz;
  const std::size_t half = n / 2;
  s.freqs.resize(half + 1);
  s.coeffs.assign(full.begin(), full.begin() + static_cast<std::ptrdiff_t>(half + 1));
  for (std::size_t k = 0; k <= half; ++k) s.freqs[k] = static_cast<double>(k) * rate_hz / static_cast<double>(n);
  return s;
}

void append_num(std::string& out, double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, ptr);
}

}  // namespace

std::size_t resolve_bin(std::size_t n, double rate_hz, double f, double tol) {
  const double res = rate_hz / static_cast<double>(n);
  const double k = std::round(f / res);
  if (k < 0.0 || k > static_cast<double>(n / 2) || std::abs(k * res - f) > tol) {
    throw FrequencyGridError("no bin within " + std::to_string(tol) + " Hz of " + std::to_string(f) + " Hz (" +
                             std::to_string(n) + " samples at " + std::to_string(rate_hz) + " Hz)");
  }
  return static_cast<std::size_t>(k);
}

std::size_t Spectrum::bin_of(double f, double tol) const { return resolve_bin(n_input, rate_hz, f, tol); }

Spectrum dft(std::span<const double> series, double rate_hz) {
  if (series.size() < 2) throw ValidationError("dft needs at least 2 samples");
  if (!(rate_hz > 0.0)) throw ValidationError("dft: rate must be positive");
  for (double v : series) {
    if (!std::isfinite(v)) throw ValidationError("dft: non-finite sample");
  }
  return half_spectrum(dft_full(series), series.size(), rate_hz);
}

Spectrum dft(std::span<const float> series, double rate_hz) {
  std::vector<double> d(series.begin(), series.end());
  return dft(d, rate_hz);
}

AmpMode parse_amp_mode(const std::string& s) {
  if (s == "real") return AmpMode::real;
  if (s == "magnitude") return AmpMode::magnitude;
  throw ConfigError("amplitude mode must be 'real' or 'magnitude', got '" + s + "'");
}

double amp_value(cplx c, AmpMode mode) { return mode == AmpMode::real ? c.real() : std::abs(c); }

double amp_stat(const Spectrum& s, double f, AmpMode mode) { return amp_value(s.coeffs[s.bin_of(f)], mode); }

BinProjector::BinProjector(std::size_t n, std::size_t bin) : bin_(bin), cos_(n), sin_(n) {
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = (bin * i) % n;
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(r) / static_cast<double>(n);
    cos_[i] = std::cos(angle);
    sin_[i] = std::sin(angle);
  }
}

cplx BinProjector::project(std::span<const double> x) const {
  double re = 0.0, im = 0.0;
  for (std::size_t i = 0; i < cos_.size(); ++i) {
    re += x[i] * cos_[i];
    im -= x[i] * sin_[i];
  }
  return {re, im};
}

std::vector<std::size_t> neighbor_bins(const Spectrum& s, std::size_t target_bin, double half_width) {
  std::vector<std::size_t> out;
  const double f0 = s.freqs[target_bin];
  for (std::size_t k = 0; k < s.freqs.size(); ++k) {
    const double d = std::abs(s.freqs[k] - f0);
    if (k != target_bin && d <= half_width + 1e-9) out.push_back(k);
  }
  return out;
}

PeakTestResult peak_test(std::span<const Spectrum> replicates, double target_hz, AmpMode mode) {
  if (replicates.size() < 3) throw ValidationError("peak_test needs at least 3 replicates");
  const auto& ref = replicates.front();
  for (const auto& r : replicates) {
    if (r.n_input != ref.n_input || r.rate_hz != ref.rate_hz) {
      throw FrequencyGridError("peak_test: replicates have different frequency grids");
    }
  }
  PeakTestResult out;
  out.target_hz = target_hz;
  const std::size_t bin = ref.bin_of(target_hz, 1e-6);
  out.neighbor_bins = neighbor_bins(ref, bin);
  if (out.neighbor_bins.empty()) {
    throw FrequencyGridError("peak_test: grid too coarse, no bins within +-0.5 Hz of target");
  }
  std::vector<double> diffs;
  diffs.reserve(replicates.size());
  for (const auto& r : replicates) {
    double nb = 0.0;
    for (auto k : out.neighbor_bins) nb += amp_value(r.coeffs[k], mode);
    nb /= static_cast<double>(out.neighbor_bins.size());
    diffs.push_back(amp_value(r.coeffs[bin], mode) - nb);
  }
  auto t = stats::one_sample_t_greater(diffs);
  out.statistic = t.t;
  out.p_value = t.p;
  out.mean_difference = stats::mean(diffs);
  return out;
}

std::vector<bool> fdr_correct(std::span<const double> pvals, double q) {
  const std::size_t m = pvals.size();
  std::vector<bool> mask(m, false);
  if (m == 0) return mask;
  for (double p : pvals) {
    if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("fdr_correct: p-values must lie in [0, 1]");
  }
  std::vector<std::size_t> order(m);
  for (std::size_t i = 0; i < m; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return pvals[a] < pvals[b]; });
  // Step-up: largest rank r with p_(r) <= r*q/m; reject ranks 1..r.
  std::size_t cutoff = 0;
  for (std::size_t r = m; r >= 1; --r) {
    if (pvals[order[r - 1]] <= static_cast<double>(r) * q / static_cast<double>(m)) {
      cutoff = r;
      break;
    }
  }
  for (std::size_t r = 0; r < cutoff; ++r) mask[order[r]] = true;
  return mask;
}

std::vector<double> normalize01(std::span<const double> curve) {
  if (curve.empty()) return {};
  auto [lo, hi] = std::minmax_element(curve.begin(), curve.end());
  const double span = *hi - *lo;
  std::vector<double> out(curve.size(), 0.0);
  if (span == 0.0) return out;
  for (std::size_t i = 0; i < curve.size(); ++i) out[i] = (curve[i] - *lo) / span;
  return out;
}

std::vector<Spectrum> partition_spectra(std::span<const double> series, double rate_hz, std::size_t n_parts) {
  if (n_parts == 0) throw ValidationError("partition_spectra: need at least one partition");
  const std::size_t len = series.size() / n_parts;
  if (len < 2) throw ValidationError("partition_spectra: partitions shorter than 2 samples");
  std::vector<Spectrum> out;
  out.reserve(n_parts);
  for (std::size_t p = 0; p < n_parts; ++p) out.push_back(dft(series.subspan(p * len, len), rate_hz));
  return out;
}

SpectrumAveraging parse_spectrum_averaging(const std::string& s) {
  if (s == "magnitude_then_mean") return SpectrumAveraging::magnitude_then_mean;
  if (s == "mean_then_magnitude") return SpectrumAveraging::mean_then_magnitude;
  throw ConfigError("spectrum averaging must be 'magnitude_then_mean' or 'mean_then_magnitude'");
}

std::string to_string(SpectrumAveraging a) {
  return a == SpectrumAveraging::magnitude_then_mean ? "magnitude_then_mean" : "mean_then_magnitude";
}

MeanSpectrum mean_amplitude(std::span<const Spectrum> replicates, SpectrumAveraging how) {
  if (replicates.empty()) throw ValidationError("mean_amplitude: no replicates");
  const auto& ref = replicates.front();
  for (const auto& r : replicates) {
    if (r.n_input != ref.n_input || r.rate_hz != ref.rate_hz) {
      throw FrequencyGridError("mean_amplitude: replicates have different frequency grids");
    }
  }
  MeanSpectrum out;
  out.freqs = ref.freqs;
  const std::size_t K = ref.freqs.size();
  out.mean.assign(K, 0.0);
  out.sem.assign(K, 0.0);
  const double R = static_cast<double>(replicates.size());
  std::vector<double> col(replicates.size());
  for (std::size_t k = 0; k < K; ++k) {
    if (how == SpectrumAveraging::magnitude_then_mean) {
      for (std::size_t r = 0; r < replicates.size(); ++r) col[r] = std::abs(replicates[r].coeffs[k]);
      out.mean[k] = stats::mean(col);
      if (replicates.size() > 1) out.sem[k] = stats::stddev(col, 1) / std::sqrt(R);
    } else {
      cplx acc{};
      for (const auto& r : replicates) acc += r.coeffs[k];
      out.mean[k] = std::abs(acc / R);
    }
  }
  return out;
}

std::string spectrum_csv(const Spectrum& s) {
  std::string out = "freq_hz,re,im,magnitude\n";
  for (std::size_t k = 0; k < s.freqs.size(); ++k) {
    append_num(out, s.freqs[k]);
    out += ',';
    append_num(out, s.coeffs[k].real());
    out += ',';
    append_num(out, s.coeffs[k].imag());
    out += ',';
    append_num(out, std::abs(s.coeffs[k]));
    out += '\n';
  }
  return out;
}

}  // namespace hftp
