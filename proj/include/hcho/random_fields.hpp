#pragma once

// Seeded band-limited Gaussian data. Coefficients are filled in storage order
// from one mt19937_64 stream; the Boost distributions are used because their
// output does not depend on the standard library in use.

#include <cmath>
#include <cstdint>

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>

#include "hcho/errors.hpp"
#include "hcho/spectral_field.hpp"

namespace hcho {

struct RandomFieldSpec {
  double envelope = 3.0;  // amplitude ~ |m|^{-envelope}
  double band = 0.0;      // keep 0 < |m| <= band (integer units); 0 means n/4
};

namespace detail {

inline void fill_random(SpectralField& f, boost::random::mt19937_64& rng, const RandomFieldSpec& spec) {
  const Grid& g = f.grid();
  const double band = spec.band > 0.0 ? spec.band : double(g.n()) / 4.0;
  const double band_sq = band * band * (1.0 + 1e-12);
  boost::random::normal_distribution<double> normal(0.0, 1.0);
  auto c = f.coefficients();
  for (std::size_t i = 1; i < c.size(); ++i) {
    const std::size_t j = g.mirror(i);
    if (j < i) continue;
    const double msq = g.msq(i);
    if (msq > band_sq) continue;
    const double amp = std::pow(msq, -0.5 * spec.envelope);
    const double re = normal(rng), im = normal(rng);
    if (j == i) {
      c[i] = Complex(amp * re, 0.0);
    } else {
      c[i] = amp * Complex(re, im);
      c[j] = std::conj(c[i]);
    }
  }
}

}  // namespace detail

inline SpectralField random_field(const Grid& g, std::uint64_t seed, const RandomFieldSpec& spec = {}) {
  boost::random::mt19937_64 rng(seed);
  SpectralField f(g);
  detail::fill_random(f, rng, spec);
  return f;
}

// Random (u, u_t) rescaled to the given energy norm.
inline StateVector random_state(const Grid& g, std::uint64_t seed, double alpha, double target_norm,
                                const RandomFieldSpec& spec = {}) {
  if (!(target_norm >= 0.0)) throw ParameterError("random_state: target norm must be nonnegative");
  boost::random::mt19937_64 rng(seed);
  StateVector s(g);
  detail::fill_random(s.u, rng, spec);
  detail::fill_random(s.v, rng, spec);
  const double norm = energy_norm(s, alpha);
  if (norm > 0.0) {
    s.u *= target_norm / norm;
    s.v *= target_norm / norm;
  }
  return s;
}

}  // namespace hcho
