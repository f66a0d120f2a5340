#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <fftw3.h>

#include "hcho/errors.hpp"

namespace hcho {

using Complex = std::complex<double>;

namespace detail {

// FFTW plans for one cube size. Planned once with FFTW_ESTIMATE so that the
// chosen algorithm (and hence every rounding) is identical from run to run;
// executed through the new-array interface, which is thread-safe.
class FftPlans {
 public:
  explicit FftPlans(int n) : n_(n) {
    const std::size_t full = std::size_t(n) * n * n;
    std::vector<Complex> a(full), b(full);
    std::vector<double> r(full);
    auto* ca = reinterpret_cast<fftw_complex*>(a.data());
    auto* cb = reinterpret_cast<fftw_complex*>(b.data());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    std::lock_guard lock(planner_mutex());
    c2c_forward_ = fftw_plan_dft_3d(n, n, n, ca, cb, FFTW_FORWARD, flags);
    c2c_backward_ = fftw_plan_dft_3d(n, n, n, ca, cb, FFTW_BACKWARD, flags);
    r2c_ = fftw_plan_dft_r2c_3d(n, n, n, r.data(), ca, flags);
    c2r_ = fftw_plan_dft_c2r_3d(n, n, n, ca, r.data(), flags);
    if (!c2c_forward_ || !c2c_backward_ || !r2c_ || !c2r_) {
      throw ConfigError("FFTW planning failed for n = " + std::to_string(n));
    }
  }

  FftPlans(const FftPlans&) = delete;
  FftPlans& operator=(const FftPlans&) = delete;

  ~FftPlans() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(c2c_forward_);
    fftw_destroy_plan(c2c_backward_);
    fftw_destroy_plan(r2c_);
    fftw_destroy_plan(c2r_);
  }

  int n() const { return n_; }

  // Unnormalized transforms; in and out must not alias.
  void forward(const Complex* in, Complex* out) const {
    fftw_execute_dft(c2c_forward_, as_fftw(in), reinterpret_cast<fftw_complex*>(out));
  }
  void backward(const Complex* in, Complex* out) const {
    fftw_execute_dft(c2c_backward_, as_fftw(in), reinterpret_cast<fftw_complex*>(out));
  }
  void real_forward(const double* in, Complex* half_out) const {
    fftw_execute_dft_r2c(r2c_, const_cast<double*>(in), reinterpret_cast<fftw_complex*>(half_out));
  }
  // Destroys half_in.
  void real_backward(Complex* half_in, double* out) const {
    fftw_execute_dft_c2r(c2r_, reinterpret_cast<fftw_complex*>(half_in), out);
  }

  static std::shared_ptr<const FftPlans> for_size(int n) {
    static std::mutex cache_mutex;
    static auto* cache = new std::map<int, std::shared_ptr<const FftPlans>>();
    std::lock_guard lock(cache_mutex);
    auto it = cache->find(n);
    if (it != cache->end()) return it->second;
    auto plans = std::make_shared<const FftPlans>(n);
    cache->emplace(n, plans);
    return plans;
  }

 private:
  static std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
  }
  static fftw_complex* as_fftw(const Complex* p) {
    return reinterpret_cast<fftw_complex*>(const_cast<Complex*>(p));
  }

  int n_;
  fftw_plan c2c_forward_ = nullptr;
  fftw_plan c2c_backward_ = nullptr;
  fftw_plan r2c_ = nullptr;
  fftw_plan c2r_ = nullptr;
};

struct GridTables {
  double length = 0.0;
  int n = 0;
  double dk = 0.0;
  std::vector<int> msq;               // m1^2 + m2^2 + m3^2
  std::vector<std::uint32_t> mirror;  // index of -m
  std::vector<std::uint8_t> dealias;  // 1 iff every |m_i| <= n/3
  int max_msq = 0;
  std::shared_ptr<const FftPlans> plans;
};

}  // namespace detail

// Uniform periodic grid on [0, L)^3 with n points per axis. Mode indices use
// the FFT ordering: integer m_i in [-n/2, n/2), wavenumber k = (2*pi/L) m.
// Cheap to copy; the tables and FFT plans are shared and immutable.
class Grid {
 public:
  Grid(double length, int n) {
    if (!(length > 0.0) || !std::isfinite(length)) {
      throw ConfigError("grid: box length must be positive and finite");
    }
    if (n < 8 || n % 2 != 0) {
      throw ConfigError("grid: points per axis must be even and >= 8, got " + std::to_string(n));
    }
    if (n > 1024) throw ConfigError("grid: points per axis above 1024 not supported");
    auto t = std::make_shared<detail::GridTables>();
    t->length = length;
    t->n = n;
    t->dk = 2.0 * std::numbers::pi / length;
    const std::size_t total = std::size_t(n) * n * n;
    t->msq.resize(total);
    t->mirror.resize(total);
    t->dealias.resize(total);
    const int third = n / 3;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        for (int l = 0; l < n; ++l) {
          const std::size_t idx = (std::size_t(i) * n + j) * n + l;
          const int a = signed_mode(i, n), b = signed_mode(j, n), c = signed_mode(l, n);
          t->msq[idx] = a * a + b * b + c * c;
          t->mirror[idx] = std::uint32_t(((std::size_t((n - i) % n) * n + (n - j) % n) * n) + (n - l) % n);
          t->dealias[idx] = (std::abs(a) <= third && std::abs(b) <= third && std::abs(c) <= third) ? 1 : 0;
          if (t->msq[idx] > t->max_msq) t->max_msq = t->msq[idx];
        }
      }
    }
    t->plans = detail::FftPlans::for_size(n);
    tables_ = std::move(t);
  }

  double length() const { return tables_->length; }
  int n() const { return tables_->n; }
  std::size_t size() const { return tables_->msq.size(); }
  std::size_t half_size() const { return std::size_t(n()) * n() * (n() / 2 + 1); }
  double dk() const { return tables_->dk; }
  double volume() const { return length() * length() * length(); }
  double cell_volume() const { return volume() / double(size()); }

  static int signed_mode(int i, int n) { return i < n / 2 ? i : i - n; }

  std::size_t index(int m1, int m2, int m3) const {
    const int nn = n();
    auto wrap = [nn](int m) { return std::size_t(((m % nn) + nn) % nn); };
    return (wrap(m1) * nn + wrap(m2)) * nn + wrap(m3);
  }

  std::array<int, 3> mode(std::size_t idx) const {
    const int nn = n();
    const int l = int(idx % nn);
    const int j = int((idx / nn) % nn);
    const int i = int(idx / (std::size_t(nn) * nn));
    return {signed_mode(i, nn), signed_mode(j, nn), signed_mode(l, nn)};
  }

  int msq(std::size_t idx) const { return tables_->msq[idx]; }
  double k2(std::size_t idx) const { return tables_->dk * tables_->dk * tables_->msq[idx]; }
  int max_msq() const { return tables_->max_msq; }
  double k2_of_msq(int msq) const { return tables_->dk * tables_->dk * msq; }
  std::size_t mirror(std::size_t idx) const { return tables_->mirror[idx]; }
  bool dealiased(std::size_t idx) const { return tables_->dealias[idx] != 0; }

  std::span<const int> msq_table() const { return tables_->msq; }
  std::span<const std::uint32_t> mirror_table() const { return tables_->mirror; }
  std::span<const std::uint8_t> dealias_mask() const { return tables_->dealias; }

  double coordinate(int j) const { return length() * double(j) / double(n()); }

  const detail::FftPlans& plans() const { return *tables_->plans; }

  friend bool operator==(const Grid& a, const Grid& b) {
    return a.tables_ == b.tables_ || (a.n() == b.n() && a.length() == b.length());
  }

 private:
  std::shared_ptr<const detail::GridTables> tables_;
};

inline void require_same_grid(const Grid& a, const Grid& b, const char* what) {
  if (!(a == b)) throw ConfigError(std::string(what) + ": grid mismatch");
}

}  // namespace hcho
