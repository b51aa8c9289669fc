#pragma once

// Frequency-domain primitives.
//
// Convention: unnormalized forward DFT,
//   X[k] = sum_n x[n] * exp(-2*pi*i*k*n/N),
// so a zero-phase cosine of amplitude a at a bin frequency yields Re X[k] = a*N/2
// and a constant c yields X[0] = c*N.

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace hftp {

using cplx = std::complex<double>;

/// Non-negative-frequency half of a real series' DFT.
struct Spectrum {
  std::vector<double> freqs;  // k * rate / n_input, k = 0..floor(n/2)
  std::vector<cplx> coeffs;
  std::size_t n_input = 0;
  double rate_hz = 0.0;

  double resolution() const { return rate_hz / static_cast<double>(n_input); }
  /// Bin whose centre lies within `tol` Hz of `f`; FrequencyGridError otherwise.
  std::size_t bin_of(double f, double tol = 1e-9) const;
};

/// Full complex DFT of arbitrary length: radix-2 for powers of two,
/// Bluestein's chirp-z otherwise.
std::vector<cplx> fft(std::span<const cplx> x);
/// Full N-point spectrum of a real series (all bins 0..N-1).
std::vector<cplx> dft_full(std::span<const double> x);

Spectrum dft(std::span<const double> series, double rate_hz);
Spectrum dft(std::span<const float> series, double rate_hz);

/// Bin index of frequency `f` on an n-point grid at `rate_hz`, if one lies
/// within `tol` Hz and at or below Nyquist.
std::size_t resolve_bin(std::size_t n, double rate_hz, double f, double tol);

enum class AmpMode { real, magnitude };
AmpMode parse_amp_mode(const std::string& s);

/// real: Re X(f); magnitude: |X(f)|. `f` must be a bin centre (tolerance 1e-9).
double amp_stat(const Spectrum& s, double f, AmpMode mode = AmpMode::real);
double amp_value(cplx c, AmpMode mode);

/// Single-bin DFT with precomputed twiddles. Every evaluation sums in the same
/// order, so identical inputs give bit-identical outputs regardless of how
/// they were produced (used by the permutation tests).
class BinProjector {
 public:
  BinProjector(std::size_t n, std::size_t bin);
  cplx project(std::span<const double> x) const;
  std::size_t size() const { return cos_.size(); }
  std::size_t bin() const { return bin_; }

 private:
  std::size_t bin_;
  std::vector<double> cos_;
  std::vector<double> sin_;
};

struct PeakTestResult {
  double target_hz = 0.0;
  double statistic = 0.0;  // one-sample t over replicate differences
  double p_value = 1.0;    // one-sided, H1: target > neighbours
  std::vector<std::size_t> neighbor_bins;
  double mean_difference = 0.0;
};

/// Neighbour bins with 0 < |f - target| <= half_width.
std::vector<std::size_t> neighbor_bins(const Spectrum& s, std::size_t target_bin, double half_width = 0.5);

/// Is the amplitude at `target` larger than the mean amplitude of neighbouring
/// bins within +-0.5 Hz, consistently across replicates?
PeakTestResult peak_test(std::span<const Spectrum> replicates, double target_hz, AmpMode mode = AmpMode::magnitude);

/// Benjamini-Hochberg step-up at level q.
std::vector<bool> fdr_correct(std::span<const double> pvals, double q = 0.05);

/// (x - min) / (max - min); a constant curve maps to all zeros.
std::vector<double> normalize01(std::span<const double> curve);

/// Spectra of `n_parts` contiguous equal-length partitions of a series
/// (trailing remainder dropped).
std::vector<Spectrum> partition_spectra(std::span<const double> series, double rate_hz, std::size_t n_parts);

enum class SpectrumAveraging { magnitude_then_mean, mean_then_magnitude };
SpectrumAveraging parse_spectrum_averaging(const std::string& s);
std::string to_string(SpectrumAveraging a);

/// Mean amplitude spectrum across replicates, plus standard error of the mean
/// per bin (zero when averaging the complex mean, or with one replicate).
struct MeanSpectrum {
  std::vector<double> freqs;
  std::vector<double> mean;
  std::vector<double> sem;
};
MeanSpectrum mean_amplitude(std::span<const Spectrum> replicates,
                            SpectrumAveraging how = SpectrumAveraging::magnitude_then_mean);

/// CSV with header freq_hz,re,im,magnitude.
std::string spectrum_csv(const Spectrum& s);

}  // namespace hftp
