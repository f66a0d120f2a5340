#pragma once

// Picard iteration for the mild form on [0, tau]:
//   u^{(0)}   = linear flow of xi0 with forcing -g
//   u^{(j+1)} = linear flow of xi0 with forcing f(u^{(j)}) - g
// Iterates live on the uniform node grid t_i = i h (h <= config.dt). Between
// nodes u^{(j)} is the cubic Hermite interpolant of (u, u_t), so the forcing
// can be sampled anywhere. Distances use
//   Y(w) = max_i ||w(t_i)||_E + ( trapezoid int_0^tau sup|w|^4 )^{1/4}.

#include <cmath>
#include <limits>
#include <vector>

#include "hcho/errors.hpp"
#include "hcho/integrator.hpp"
#include "hcho/linear_propagators.hpp"

namespace hcho {

struct DuhamelResult {
  std::vector<double> times;                      // node times
  std::vector<std::vector<StateVector>> iterates;  // iterates[j][i] = u^{(j)} at t_i
  std::vector<double> differences;                // Y(u^{(j+1)} - u^{(j)})
  std::vector<double> ratios;                     // differences[j] / differences[j-1]; 0/0 -> 0
  bool diverged = false;                          // some later ratio exceeded 1
};

namespace detail {

inline SpectralField hermite_u(const StateVector& a, const StateVector& b, double h, double theta) {
  const double t2 = theta * theta, t3 = t2 * theta;
  const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + theta;
  const double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
  SpectralField out = h00 * a.u;
  out.add_scaled(a.v, h10 * h);
  out.add_scaled(b.u, h01);
  out.add_scaled(b.v, h11 * h);
  return out;
}

inline double y_distance(const std::vector<StateVector>& a, const std::vector<StateVector>& b, double alpha,
                         double h) {
  double emax = 0.0, acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const StateVector d = a[i] - b[i];
    emax = std::max(emax, energy_norm(d, alpha));
    const double s = sup_norm(d.u);
    acc += ((i == 0 || i + 1 == a.size()) ? 0.5 : 1.0) * s * s * s * s;
  }
  return emax + std::pow(acc * h, 0.25);
}

}  // namespace detail

inline DuhamelResult duhamel_iterate(const StateVector& xi0, double tau, int iterations, const SolverConfig& config,
                                     const NonlinearitySpec& spec) {
  if (iterations < 2) throw ParameterError("duhamel_iterate: need at least 2 iterations");
  if (!(tau > 0.0)) throw ParameterError("duhamel_iterate: tau must be positive");
  config.validate();
  if (!xi0.mean_zero()) throw DomainError("duhamel_iterate: state must be mean-zero");
  require_same_grid(xi0.grid(), config.g.grid(), "duhamel_iterate");
  const long segments = std::max(1L, long(std::ceil(tau / config.dt - 1e-9)));
  const double h = tau / double(segments);
  const double t0 = xi0.time;
  const SpectralField minus_g = -1.0 * config.g;

  DuhamelResult res;
  for (long i = 0; i <= segments; ++i) res.times.push_back(t0 + double(i) * h);

  auto march = [&](const std::vector<StateVector>* prev) {
    std::vector<StateVector> nodes{xi0};
    nodes.reserve(segments + 1);
    for (long i = 0; i < segments; ++i) {
      ForcingSampler H;
      H.step = 0.5 * h;
      if (prev) {
        const StateVector& a = (*prev)[i];
        const StateVector& b = (*prev)[i + 1];
        const double ti = res.times[i];
        H.sample = [&a, &b, &spec, &config, h, ti](double t) {
          SpectralField u = detail::hermite_u(a, b, h, (t - ti) / h);
          SpectralField f = f_apply(u, spec, config.padding);
          f -= config.g;
          return f;
        };
      } else {
        H.sample = [&minus_g](double) { return minus_g; };
      }
      StateVector next = lin_cho_evolve(nodes.back(), h, config.alpha, H);
      next.time = res.times[i + 1];
      nodes.push_back(std::move(next));
    }
    return nodes;
  };

  res.iterates.push_back(march(nullptr));
  for (int j = 0; j < iterations; ++j) {
    res.iterates.push_back(march(&res.iterates.back()));
    const auto& a = res.iterates[res.iterates.size() - 1];
    const auto& b = res.iterates[res.iterates.size() - 2];
    res.differences.push_back(detail::y_distance(a, b, config.alpha, h));
  }
  for (std::size_t j = 1; j < res.differences.size(); ++j) {
    const double num = res.differences[j], den = res.differences[j - 1];
    double r = 0.0;
    if (den > 0.0) r = num / den;
    else if (num > 0.0) r = std::numeric_limits<double>::infinity();
    res.ratios.push_back(r);
  }
  // Persistent growth: the last two ratios both above one.
  const std::size_t nr = res.ratios.size();
  res.diverged = nr >= 2 ? (res.ratios[nr - 1] > 1.0 && res.ratios[nr - 2] > 1.0) : (nr == 1 && res.ratios[0] > 1.0);
  return res;
}

}  // namespace hcho
