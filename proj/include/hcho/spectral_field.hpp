#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "hcho/errors.hpp"
#include "hcho/grid.hpp"

namespace hcho {

// Real samples on the grid points x_j = L*j/n, row-major in (j1, j2, j3).
struct PhysicalField {
  Grid grid;
  std::vector<double> values;

  explicit PhysicalField(Grid g) : grid(std::move(g)), values(grid.size(), 0.0) {}
  PhysicalField(Grid g, std::vector<double> v) : grid(std::move(g)), values(std::move(v)) {
    if (values.size() != grid.size()) {
      throw ConfigError("physical field: " + std::to_string(values.size()) + " samples for a grid of " +
                        std::to_string(grid.size()));
    }
  }

  template <class Fn>
  static PhysicalField sample(const Grid& g, Fn&& fn) {
    PhysicalField out(g);
    const int n = g.n();
    std::size_t idx = 0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int l = 0; l < n; ++l) out.values[idx++] = fn(g.coordinate(i), g.coordinate(j), g.coordinate(l));
    return out;
  }

  double max_abs() const {
    double m = 0.0;
    for (double x : values) m = std::max(m, std::abs(x));
    return m;
  }
};

struct ComplexPhysicalField {
  Grid grid;
  std::vector<Complex> values;
};

// Fourier coefficients of a field on the periodic box, one complex value per
// mode in FFT order. Convention: c(m) = n^-3 sum_j field(x_j) exp(-i k.x_j), so
// field(x) = sum_m c(m) exp(i k.x). A real field has c(-m) = conj(c(m)).
// "Mean zero" means c(0) == 0 exactly.
class SpectralField {
 public:
  explicit SpectralField(Grid g) : grid_(std::move(g)), coeffs_(grid_.size(), Complex{}) {}
  SpectralField(Grid g, std::vector<Complex> c) : grid_(std::move(g)), coeffs_(std::move(c)) {
    if (coeffs_.size() != grid_.size()) throw ConfigError("spectral field: coefficient count does not match grid");
  }

  const Grid& grid() const { return grid_; }
  std::size_t size() const { return coeffs_.size(); }
  std::span<const Complex> coefficients() const { return coeffs_; }
  std::span<Complex> coefficients() { return coeffs_; }
  Complex& operator[](std::size_t idx) { return coeffs_[idx]; }
  const Complex& operator[](std::size_t idx) const { return coeffs_[idx]; }
  Complex& at(int m1, int m2, int m3) { return coeffs_[grid_.index(m1, m2, m3)]; }
  const Complex& at(int m1, int m2, int m3) const { return coeffs_[grid_.index(m1, m2, m3)]; }

  bool mean_zero() const { return coeffs_[0] == Complex{}; }
  Complex mean() const { return coeffs_[0]; }
  // Zeroes the m = 0 coefficient and returns what was removed.
  Complex remove_mean() {
    const Complex m = coeffs_[0];
    coeffs_[0] = Complex{};
    return m;
  }

  bool is_zero() const {
    return std::all_of(coeffs_.begin(), coeffs_.end(), [](const Complex& c) { return c == Complex{}; });
  }

  SpectralField& operator+=(const SpectralField& o) {
    require_same_grid(grid_, o.grid_, "spectral field +=");
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += o.coeffs_[i];
    return *this;
  }
  SpectralField& operator-=(const SpectralField& o) {
    require_same_grid(grid_, o.grid_, "spectral field -=");
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= o.coeffs_[i];
    return *this;
  }
  SpectralField& operator*=(Complex s) {
    for (auto& c : coeffs_) c *= s;
    return *this;
  }
  SpectralField& operator*=(double s) {
    for (auto& c : coeffs_) c *= s;
    return *this;
  }
  // this += s * o
  SpectralField& add_scaled(const SpectralField& o, double s) {
    require_same_grid(grid_, o.grid_, "spectral field axpy");
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += s * o.coeffs_[i];
    return *this;
  }

  friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
  friend SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
  friend SpectralField operator*(double s, SpectralField a) { return a *= s; }
  friend SpectralField operator*(Complex s, SpectralField a) { return a *= s; }
  friend bool operator==(const SpectralField& a, const SpectralField& b) {
    return a.grid_ == b.grid_ && a.coeffs_ == b.coeffs_;
  }

 private:
  Grid grid_;
  std::vector<Complex> coeffs_;
};

// (u, du/dt) at time t; an element of the energy space.
struct StateVector {
  SpectralField u;
  SpectralField v;
  double time = 0.0;

  explicit StateVector(const Grid& g, double t = 0.0) : u(g), v(g), time(t) {}
  StateVector(SpectralField u_, SpectralField v_, double t = 0.0)
      : u(std::move(u_)), v(std::move(v_)), time(t) {
    require_same_grid(u.grid(), v.grid(), "state vector");
  }

  const Grid& grid() const { return u.grid(); }
  bool mean_zero() const { return u.mean_zero() && v.mean_zero(); }

  StateVector& operator-=(const StateVector& o) {
    u -= o.u;
    v -= o.v;
    return *this;
  }
  StateVector& operator*=(double s) {
    u *= s;
    v *= s;
    return *this;
  }
  friend StateVector operator-(StateVector a, const StateVector& b) { return a -= b; }
  friend bool operator==(const StateVector& a, const StateVector& b) {
    return a.u == b.u && a.v == b.v && a.time == b.time;
  }
};

namespace detail {

inline std::vector<Complex> to_half_spectrum(const Grid& g, std::span<const Complex> full) {
  const int n = g.n(), h = n / 2 + 1;
  std::vector<Complex> half(g.half_size());
  for (std::size_t row = 0; row < std::size_t(n) * n; ++row) {
    std::copy_n(full.begin() + row * n, h, half.begin() + row * h);
  }
  return half;
}

// Rebuilds all n^3 coefficients of a real field from the r2c half spectrum.
inline void from_half_spectrum(const Grid& g, std::span<const Complex> half, std::span<Complex> full, double scale) {
  const int n = g.n(), h = n / 2 + 1;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const std::size_t row = std::size_t(i) * n + j;
      const std::size_t mrow = std::size_t((n - i) % n) * n + (n - j) % n;
      for (int l = 0; l < h; ++l) full[row * n + l] = scale * half[row * h + l];
      for (int l = h; l < n; ++l) full[row * n + l] = scale * std::conj(half[mrow * h + (n - l)]);
    }
  }
}

// c2r without the symmetry check; the antisymmetric part is discarded.
inline std::vector<double> real_inverse_unchecked(const SpectralField& f) {
  const Grid& g = f.grid();
  auto half = to_half_spectrum(g, f.coefficients());
  std::vector<double> out(g.size());
  g.plans().real_backward(half.data(), out.data());
  return out;
}

inline SpectralField real_forward(const Grid& g, std::span<const double> values) {
  std::vector<Complex> half(g.half_size());
  g.plans().real_forward(values.data(), half.data());
  SpectralField out(g);
  from_half_spectrum(g, half, out.coefficients(), 1.0 / double(g.size()));
  return out;
}

// k^(2s) for the common integer orders without calling pow.
inline double k_power(double k2, double s) {
  if (s == 0.0) return 1.0;
  if (s == 1.0) return k2;
  if (s == -1.0) return 1.0 / k2;
  if (s == 2.0) return k2 * k2;
  if (s == -2.0) return 1.0 / (k2 * k2);
  if (s == 3.0) return k2 * k2 * k2;
  return std::pow(k2, s);
}

}  // namespace detail

// Largest |c(-m) - conj(c(m))| relative to the largest |c(m)|; zero for a
// field that is real in physical space.
inline double hermitian_defect(const SpectralField& f) {
  const auto c = f.coefficients();
  const Grid& g = f.grid();
  double scale = 0.0, defect = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    scale = std::max(scale, std::abs(c[i]));
    defect = std::max(defect, std::abs(c[g.mirror(i)] - std::conj(c[i])));
  }
  return scale > 0.0 ? defect / scale : 0.0;
}

inline constexpr double kHermitianTolerance = 1e-10;

inline SpectralField forward_transform(const PhysicalField& field) {
  if (field.values.size() != field.grid.size()) throw ConfigError("forward_transform: dimension mismatch");
  return detail::real_forward(field.grid, field.values);
}

inline SpectralField forward_transform(const ComplexPhysicalField& field) {
  const Grid& g = field.grid;
  if (field.values.size() != g.size()) throw ConfigError("forward_transform: dimension mismatch");
  SpectralField out(g);
  g.plans().forward(field.values.data(), out.coefficients().data());
  out *= 1.0 / double(g.size());
  return out;
}

// Real samples of a Hermitian field. An imaginary residue below 1e-10 of the
// coefficient scale is discarded; anything larger is a data-integrity error.
inline PhysicalField inverse_transform(const SpectralField& field) {
  const double defect = hermitian_defect(field);
  if (defect > kHermitianTolerance) {
    throw DataIntegrityError("inverse_transform: Hermitian symmetry broken (relative defect " +
                             std::to_string(defect) + ")");
  }
  return PhysicalField(field.grid(), detail::real_inverse_unchecked(field));
}

inline ComplexPhysicalField inverse_transform_complex(const SpectralField& field) {
  const Grid& g = field.grid();
  ComplexPhysicalField out{g, std::vector<Complex>(g.size())};
  g.plans().backward(field.coefficients().data(), out.values.data());
  return out;
}

// Homogeneous Sobolev norm (sum_{m != 0} |k|^{2s} |c(m)|^2 L^3)^{1/2}. The zero
// mode never contributes; for s < 0 the field must have zero mean.
inline double sobolev_norm_squared(const SpectralField& field, double s) {
  if (s < 0.0 && !field.mean_zero()) {
    throw DomainError("sobolev_norm: negative order requires a mean-zero field");
  }
  const Grid& g = field.grid();
  const auto c = field.coefficients();
  const auto msq = g.msq_table();
  const double dk2 = g.dk() * g.dk();
  double sum = 0.0;
  for (std::size_t i = 1; i < c.size(); ++i) {
    sum += detail::k_power(dk2 * msq[i], s) * std::norm(c[i]);
  }
  return sum * g.volume();
}

inline double sobolev_norm(const SpectralField& field, double s) { return std::sqrt(sobolev_norm_squared(field, s)); }

// Real L^2 inner product Re (f, g) = L^3 sum_m Re(conj(f_m) g_m).
inline double inner_product(const SpectralField& f, const SpectralField& h) {
  require_same_grid(f.grid(), h.grid(), "inner_product");
  const auto a = f.coefficients();
  const auto b = h.coefficients();
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
  return sum * f.grid().volume();
}

inline double l2_norm(const SpectralField& f) { return std::sqrt(std::max(0.0, inner_product(f, f))); }

// ||xi||_E^2 = ||v||^2_{H^-1} + ||u||^2_{H^1} + alpha ||u||^2_{H^-1}
inline double energy_norm_squared(const StateVector& state, double alpha) {
  if (!state.mean_zero()) throw DomainError("energy_norm: state must be mean-zero");
  const Grid& g = state.grid();
  const auto u = state.u.coefficients();
  const auto v = state.v.coefficients();
  const auto msq = g.msq_table();
  const double dk2 = g.dk() * g.dk();
  double sum = 0.0;
  for (std::size_t i = 1; i < u.size(); ++i) {
    const double k2 = dk2 * msq[i];
    sum += std::norm(v[i]) / k2 + (k2 + alpha / k2) * std::norm(u[i]);
  }
  return sum * g.volume();
}

inline double energy_norm(const StateVector& state, double alpha) {
  return std::sqrt(energy_norm_squared(state, alpha));
}

// Fourier multiplier by the indicator of the band 1/N <= |k| <= N. The band
// edges are matched with a relative slack of 1e-12 so that modes sitting
// exactly on an edge are kept.
inline SpectralField project_PN(const SpectralField& field, double N) {
  if (!(N > 1.0)) throw ParameterError("project_PN: band parameter N must exceed 1");
  const Grid& g = field.grid();
  const double lo = (1.0 - 1e-12) / (N * N), hi = (1.0 + 1e-12) * N * N;
  SpectralField out(g);
  const auto in = field.coefficients();
  auto o = out.coefficients();
  for (std::size_t i = 1; i < in.size(); ++i) {
    const double k2 = g.k2(i);
    if (k2 >= lo && k2 <= hi) o[i] = in[i];
  }
  return out;
}

inline SpectralField apply_laplacian(const SpectralField& field) {
  SpectralField out = field;
  const Grid& g = field.grid();
  auto o = out.coefficients();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] *= -g.k2(i);
  return out;
}

// Symbol -1/|k|^2 on m != 0; requires zero mean.
inline SpectralField apply_inverse_laplacian(const SpectralField& field) {
  if (!field.mean_zero()) throw DomainError("apply_inverse_laplacian: field must be mean-zero");
  SpectralField out = field;
  const Grid& g = field.grid();
  auto o = out.coefficients();
  for (std::size_t i = 1; i < o.size(); ++i) o[i] /= -g.k2(i);
  return out;
}

// Trigonometric interpolation onto a finer grid of the same box. Coefficients
// on a Nyquist plane are split evenly between +n/2 and -n/2 so a real field
// stays real and its values at the coarse points are unchanged.
inline SpectralField zero_pad(const SpectralField& field, int new_n) {
  const Grid& g = field.grid();
  const int n = g.n();
  if (new_n < n || new_n % 2 != 0) throw ParameterError("zero_pad: target size must be even and >= current size");
  if (new_n == n) return field;
  const Grid fine(g.length(), new_n);
  SpectralField out(fine);
  const auto c = field.coefficients();
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (c[i] == Complex{}) continue;
    const auto m = g.mode(i);
    int nyq_mask = 0, count = 0;
    for (int d = 0; d < 3; ++d) {
      if (m[d] == -n / 2) {
        nyq_mask |= 1 << d;
        ++count;
      }
    }
    const double w = 1.0 / double(1 << count);
    for (int s = 0; s < 8; ++s) {
      if ((s & ~nyq_mask) != 0) continue;
      std::array<int, 3> mm = m;
      for (int d = 0; d < 3; ++d)
        if (s & (1 << d)) mm[d] = n / 2;
      out.at(mm[0], mm[1], mm[2]) += w * c[i];
    }
  }
  return out;
}

// Grid maximum of |field(x)|. This approximates the true supremum from below;
// refine = true evaluates on the 2x zero-padded grid instead.
inline double sup_norm(const SpectralField& field, bool refine = false) {
  if (refine) return sup_norm(zero_pad(field, 2 * field.grid().n()), false);
  if (field.is_zero()) return 0.0;
  if (hermitian_defect(field) <= kHermitianTolerance) {
    const auto values = detail::real_inverse_unchecked(field);
    double m = 0.0;
    for (double x : values) m = std::max(m, std::abs(x));
    return m;
  }
  const auto values = inverse_transform_complex(field).values;
  double m = 0.0;
  for (const auto& x : values) m = std::max(m, std::abs(x));
  return m;
}

// Single real Fourier mode a*cos(k.x) (coefficients a/2 at +-m).
inline SpectralField cosine_mode(const Grid& g, int m1, int m2, int m3, double amplitude) {
  SpectralField f(g);
  f.at(m1, m2, m3) += 0.5 * amplitude;
  f.at(-m1, -m2, -m3) += 0.5 * amplitude;
  return f;
}

}  // namespace hcho
