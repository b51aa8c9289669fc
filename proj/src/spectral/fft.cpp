#include <bit>
#include <cmath>
#include <numbers>

#include "hftp/spectral.hpp"

namespace hftp {

namespace {

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// exp(sign * 2*pi*i * num / den), computed from a reduced angle.
cplx twiddle(std::size_t num, std::size_t den, double sign) {
  num %= den;
  double angle = sign * 2.0 * std::numbers::pi * static_cast<double>(num) / static_cast<double>(den);
  return {std::cos(angle), std::sin(angle)};
}

// In-place iterative radix-2 transform; `sign` = -1 forward, +1 inverse
// (unscaled).
void radix2(std::vector<cplx>& a, double sign) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  std::vector<cplx> w(n / 2);
  for (std::size_t k = 0; k < n / 2; ++k) w[k] = twiddle(k, n, sign);
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    const std::size_t stride = n / len;
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t k = 0; k < half; ++k) {
        cplx u = a[i + k];
        cplx v = a[i + k + half] * w[k * stride];
        a[i + k] = u + v;
        a[i + k + half] = u - v;
      }
    }
  }
}

// Bluestein: X[k] = conj(c[k]) * sum_n (x[n] conj(c[n])) c[k-n], c[m] = exp(i*pi*m^2/N).
std::vector<cplx> bluestein(std::span<const cplx> x) {
  const std::size_t n = x.size();
  const std::size_t m = std::bit_ceil(2 * n - 1);
  std::vector<cplx> chirp(n);
  // pi*k^2/N == 2*pi*(k^2 mod 2N)/(2N); k^2 mod 2N is advanced incrementally
  // via (k+1)^2 = k^2 + 2k + 1 so it never overflows.
  std::size_t k2 = 0;
  for (std::size_t k = 0; k < n; ++k) {
    chirp[k] = twiddle(k2, 2 * n, 1.0);
    k2 = (k2 + (2 * k + 1) % (2 * n)) % (2 * n);
  }
  std::vector<cplx> a(m, cplx{}), b(m, cplx{});
  for (std::size_t k = 0; k < n; ++k) a[k] = x[k] * std::conj(chirp[k]);
  b[0] = chirp[0];
  for (std::size_t k = 1; k < n; ++k) b[k] = b[m - k] = chirp[k];
  radix2(a, -1.0);
  radix2(b, -1.0);
  for (std::size_t k = 0; k < m; ++k) a[k] *= b[k];
  radix2(a, 1.0);
  std::vector<cplx> out(n);
  const double scale = 1.0 / static_cast<double>(m);
  for (std::size_t k = 0; k < n; ++k) out[k] = a[k] * scale * std::conj(chirp[k]);
  return out;
}

}  // namespace

std::vector<cplx> fft(std::span<const cplx> x) {
  if (x.size() <= 1) return {x.begin(), x.end()};
  if (is_pow2(x.size())) {
    std::vector<cplx> a(x.begin(), x.end());
    radix2(a, -1.0);
    return a;
  }
  return bluestein(x);
}

std::vector<cplx> dft_full(std::span<const double> x) {
  std::vector<cplx> c(x.begin(), x.end());
  return fft(c);
}

}  // namespace hftp
