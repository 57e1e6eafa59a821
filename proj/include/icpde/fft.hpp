#pragma once

// Radix-2 complex FFT. Grid sizes are restricted to powers of two, which
// keeps the transform self-contained; sizes here are tiny (nx <= 4096).

#include <complex>
#include <stdexcept>
#include <vector>
#include <numbers>

namespace icpde {

inline bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

namespace detail {

inline void fft_in_place(std::vector<std::complex<double>>& a, bool inverse) {
  const std::size_t n = a.size();
  if (!is_power_of_two(n)) throw std::invalid_argument("fft: size must be a power of two");

  // Bit-reversal permutation.
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }

  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = (inverse ? 2.0 : -2.0) * std::numbers::pi / static_cast<double>(len);
    const std::complex<double> wl(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> u = a[i + k];
        const std::complex<double> v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wl;
      }
    }
  }

  if (inverse) {
    const double inv_n = 1.0 / static_cast<double>(n);
    for (auto& z : a) z *= inv_n;
  }
}

}  // namespace detail

// Forward transform of a real signal; returns the full complex spectrum
// (length n, unnormalized).
inline std::vector<std::complex<double>> fft_real(const std::vector<double>& u) {
  std::vector<std::complex<double>> a(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) a[i] = u[i];
  detail::fft_in_place(a, false);
  return a;
}

inline void fft(std::vector<std::complex<double>>& a) { detail::fft_in_place(a, false); }
inline void ifft(std::vector<std::complex<double>>& a) { detail::fft_in_place(a, true); }

// Inverse transform, discarding the imaginary part (input spectra of real
// fields are conjugate-symmetric up to round-off).
inline std::vector<double> ifft_real(std::vector<std::complex<double>> spectrum) {
  detail::fft_in_place(spectrum, true);
  std::vector<double> u(spectrum.size());
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = spectrum[i].real();
  return u;
}

// Signed wavenumber for spectrum bin i on an n-point grid of period 2*pi:
// bins [0, n/2] map to k = 0..n/2, bins above to negative frequencies.
inline int fft_wavenumber(std::size_t i, std::size_t n) {
  return i <= n / 2 ? static_cast<int>(i) : static_cast<int>(i) - static_cast<int>(n);
}

}  // namespace icpde
