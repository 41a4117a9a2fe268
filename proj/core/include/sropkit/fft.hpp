#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace sropkit {

using Complex = std::complex<double>;

// Mixed-radix decimation-in-time DFT for any length. Prime factors above 5
// fall back to a direct O(p^2) butterfly, which is fine for the small primes
// that feature-map sizes factor into (7, 11, 13).
//
// X[k] = sum_j x[j] exp(-2 pi i j k / n), no scaling.
class Fft {
 public:
  explicit Fft(std::size_t n);

  std::size_t size() const noexcept { return n_; }
  const std::vector<std::size_t>& factors() const noexcept { return factors_; }

  // out must not alias in.
  void forward(std::span<const Complex> in, std::span<Complex> out) const;

 private:
  void transform(const Complex* in, std::size_t in_stride, Complex* out,
                 std::size_t n, std::size_t factor_index,
                 std::size_t twiddle_stride) const;

  std::size_t n_;
  std::vector<std::size_t> factors_;
  std::vector<Complex> twiddles_;  // exp(-2 pi i j / n_), j < n_
};

// Per-thread plan cache; the returned reference stays valid for the
// lifetime of the calling thread.
const Fft& fft_plan(std::size_t n);

// Full complex DFT of a real sequence.
std::vector<Complex> dft_real(std::span<const double> signal);

// 2-D DFT of a row-major rows x cols real grid (row transforms, then columns).
std::vector<Complex> dft2_real(std::span<const double> grid, std::size_t rows,
                               std::size_t cols);

}  // namespace sropkit
