#include "sropkit/fft.hpp"

#include <cmath>
#include <memory>
#include <numbers>
#include <unordered_map>

#include "sropkit/error.hpp"

namespace sropkit {

namespace {

std::vector<std::size_t> factorize(std::size_t n) {
  std::vector<std::size_t> out;
  for (std::size_t p : {4u, 2u, 3u, 5u}) {
    while (n % p == 0) {
      out.push_back(p);
      n /= p;
    }
  }
  for (std::size_t p = 7; p * p <= n; p += 2) {
    while (n % p == 0) {
      out.push_back(p);
      n /= p;
    }
  }
  if (n > 1) out.push_back(n);
  return out;
}

// Plain complex product; std::complex's operator* adds inf/nan recovery
// that we never need and that the compiler cannot inline.
inline Complex mul(const Complex& a, const Complex& b) {
  return {a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real()};
}

}  // namespace

Fft::Fft(std::size_t n) : n_(n) {
  if (n == 0) throw InvalidInput("fft: length must be positive");
  factors_ = factorize(n);
  twiddles_.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    // Reduce the angle before calling sin/cos so every table entry is
    // accurate to a couple of ulps regardless of n.
    const double angle = -2.0 * std::numbers::pi * static_cast<double>(j) /
                         static_cast<double>(n);
    twiddles_[j] = Complex(std::cos(angle), std::sin(angle));
  }
}

void Fft::forward(std::span<const Complex> in, std::span<Complex> out) const {
  if (in.size() != n_ || out.size() != n_) {
    throw InvalidInput("fft: buffer length does not match plan");
  }
  transform(in.data(), 1, out.data(), n_, 0, 1);
}

void Fft::transform(const Complex* in, std::size_t in_stride, Complex* out,
                    std::size_t n, std::size_t factor_index,
                    std::size_t twiddle_stride) const {
  if (n == 1) {
    out[0] = in[0];
    return;
  }
  const std::size_t p = factors_[factor_index];
  const std::size_t m = n / p;
  for (std::size_t q = 0; q < p; ++q) {
    transform(in + q * in_stride, in_stride * p, out + q * m, m,
              factor_index + 1, twiddle_stride * p);
  }

  const Complex* tw = twiddles_.data();
  const std::size_t wrap = n_;

  if (p == 2) {
    for (std::size_t k = 0; k < m; ++k) {
      const Complex a = out[k];
      const Complex b = mul(out[k + m], tw[twiddle_stride * k]);
      out[k] = a + b;
      out[k + m] = a - b;
    }
    return;
  }

  if (p == 4) {
    for (std::size_t k = 0; k < m; ++k) {
      const Complex a0 = out[k];
      const Complex a1 = mul(out[k + m], tw[twiddle_stride * k]);
      const Complex a2 = mul(out[k + 2 * m], tw[2 * twiddle_stride * k]);
      const Complex a3 = mul(out[k + 3 * m], tw[3 * twiddle_stride * k]);
      const Complex s02 = a0 + a2;
      const Complex d02 = a0 - a2;
      const Complex s13 = a1 + a3;
      // -i * (a1 - a3)
      const Complex d13(a1.imag() - a3.imag(), a3.real() - a1.real());
      out[k] = s02 + s13;
      out[k + m] = d02 + d13;
      out[k + 2 * m] = s02 - s13;
      out[k + 3 * m] = d02 - d13;
    }
    return;
  }

  thread_local std::vector<Complex> scratch;
  scratch.resize(p);
  // w_p^{r} lives at table index r * (n_ / p) = r * twiddle_stride * m.
  const std::size_t root_step = twiddle_stride * m;
  thread_local std::vector<Complex> roots;
  roots.resize(p);
  for (std::size_t r = 0; r < p; ++r) roots[r] = tw[root_step * r];
  for (std::size_t k = 0; k < m; ++k) {
    scratch[0] = out[k];
    for (std::size_t q = 1; q < p; ++q) {
      scratch[q] = mul(out[q * m + k], tw[(twiddle_stride * q * k) % wrap]);
    }
    for (std::size_t s = 0; s < p; ++s) {
      Complex acc = scratch[0];
      std::size_t r = 0;
      for (std::size_t q = 1; q < p; ++q) {
        r += s;
        if (r >= p) r -= p;
        acc += mul(scratch[q], roots[r]);
      }
      out[k + s * m] = acc;
    }
  }
}

const Fft& fft_plan(std::size_t n) {
  thread_local std::unordered_map<std::size_t, std::unique_ptr<Fft>> cache;
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<Fft>(n);
  return *slot;
}

std::vector<Complex> dft_real(std::span<const double> signal) {
  const std::size_t n = signal.size();
  std::vector<Complex> in(signal.begin(), signal.end());
  std::vector<Complex> out(n);
  fft_plan(n).forward(in, out);
  return out;
}

std::vector<Complex> dft2_real(std::span<const double> grid, std::size_t rows,
                               std::size_t cols) {
  if (grid.size() != rows * cols) {
    throw InvalidInput("dft2: grid size does not match dimensions");
  }
  std::vector<Complex> result(rows * cols);
  std::vector<Complex> in(std::max(rows, cols));
  std::vector<Complex> out(std::max(rows, cols));

  // Rows, two at a time: x + i*y, then split by Hermitian symmetry.
  const Fft& row_plan = fft_plan(cols);
  for (std::size_t r = 0; r < rows; r += 2) {
    const double* x = grid.data() + r * cols;
    Complex* fx = result.data() + r * cols;
    if (r + 1 == rows) {
      for (std::size_t c = 0; c < cols; ++c) in[c] = x[c];
      row_plan.forward(std::span(in.data(), cols), std::span(fx, cols));
      break;
    }
    const double* y = x + cols;
    for (std::size_t c = 0; c < cols; ++c) in[c] = Complex(x[c], y[c]);
    row_plan.forward(std::span(in.data(), cols), std::span(out.data(), cols));
    Complex* fy = fx + cols;
    for (std::size_t k = 0; k < cols; ++k) {
      const Complex a = out[k];
      const Complex b = std::conj(out[k == 0 ? 0 : cols - k]);
      fx[k] = 0.5 * (a + b);
      const Complex d = 0.5 * (a - b);
      fy[k] = Complex(d.imag(), -d.real());
    }
  }

  // Columns up to cols/2; the rest follow from F(r, c) = conj(F(-r, -c)).
  const Fft& col_plan = fft_plan(rows);
  const std::size_t half = cols / 2;
  for (std::size_t c = 0; c <= half; ++c) {
    for (std::size_t r = 0; r < rows; ++r) in[r] = result[r * cols + c];
    col_plan.forward(std::span(in.data(), rows), std::span(out.data(), rows));
    for (std::size_t r = 0; r < rows; ++r) result[r * cols + c] = out[r];
  }
  for (std::size_t c = half + 1; c < cols; ++c) {
    for (std::size_t r = 0; r < rows; ++r) {
      result[r * cols + c] = std::conj(result[((rows - r) % rows) * cols + (cols - c)]);
    }
  }
  return result;
}

}  // namespace sropkit
