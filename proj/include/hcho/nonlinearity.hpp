#pragma once

// The odd nonlinearity
//   f(u) = c1 u + c3 u^3 + c5 u^5 + c_sub |u|^{4-kappa} u
// and the structural constants (L, K, C, kappa) of the conditions
//   f(u) u >= 0,   F(u) <= L f(u) u + K u^2,   |f''(u)| <= C (1 + |u|^{3-kappa}).
// The c_sub term is the sub-quintic one, of degree 5 - kappa.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <spdlog/spdlog.h>

#include "hcho/errors.hpp"
#include "hcho/spectral_field.hpp"

namespace hcho {

enum class NonlinearityKind { zero, cubic, polynomial };

inline const char* to_string(NonlinearityKind k) {
  switch (k) {
    case NonlinearityKind::zero: return "zero";
    case NonlinearityKind::cubic: return "cubic";
    case NonlinearityKind::polynomial: return "polynomial";
  }
  return "?";
}

struct NonlinearitySpec {
  NonlinearityKind kind = NonlinearityKind::cubic;
  double c1 = 0.0, c3 = 1.0, c5 = 0.0, c_sub = 0.0;
  double kappa = 2.0;
  double L = 0.25, K = 0.0, C = 6.0;

  static NonlinearitySpec zero() {
    NonlinearitySpec s;
    s.kind = NonlinearityKind::zero;
    s.c3 = 0.0;
    s.L = 0.25;
    s.C = 0.0;
    return s;
  }
  static NonlinearitySpec cubic(double c3 = 1.0) { return polynomial(0.0, c3, 0.0, 0.0, 2.0, NonlinearityKind::cubic); }

  // Structural constants derived for nonnegative coefficients; override the
  // fields afterwards to test other choices.
  static NonlinearitySpec polynomial(double c1, double c3, double c5, double c_sub, double kappa,
                                     NonlinearityKind kind = NonlinearityKind::polynomial) {
    if (!(kappa > 0.0 && kappa <= 3.0)) throw ParameterError("nonlinearity: kappa must lie in (0, 3]");
    NonlinearitySpec s;
    s.kind = kind;
    s.c1 = c1;
    s.c3 = c3;
    s.c5 = c5;
    s.c_sub = c_sub;
    s.kappa = kappa;
    s.L = std::max(0.25, 1.0 / (6.0 - kappa));
    s.K = std::max(c1 * (0.5 - s.L), 0.0);
    s.C = 6.0 * std::abs(c3) + std::abs(c_sub) * (5.0 - kappa) * (4.0 - kappa);
    return s;
  }

  bool is_zero() const { return kind == NonlinearityKind::zero || (c1 == 0 && c3 == 0 && c5 == 0 && c_sub == 0); }
  double sub_power() const { return 4.0 - kappa; }

  double f(double u) const {
    const double u2 = u * u;
    double r = u * (c1 + u2 * (c3 + c5 * u2));
    if (c_sub != 0.0) r += c_sub * std::pow(std::abs(u), sub_power()) * u;
    return r;
  }
  // F(u) = int_0^u f, exact antiderivative.
  double F(double u) const {
    const double u2 = u * u;
    double r = u2 * (0.5 * c1 + u2 * (0.25 * c3 + c5 * u2 / 6.0));
    if (c_sub != 0.0) r += c_sub * std::pow(std::abs(u), 6.0 - kappa) / (6.0 - kappa);
    return r;
  }
  double fp(double u) const {
    const double u2 = u * u;
    double r = c1 + u2 * (3.0 * c3 + 5.0 * c5 * u2);
    if (c_sub != 0.0) r += c_sub * (5.0 - kappa) * std::pow(std::abs(u), sub_power());
    return r;
  }
  double fpp(double u) const {
    double r = u * (6.0 * c3 + 20.0 * c5 * u * u);
    if (c_sub != 0.0) {
      const double sgn = u > 0 ? 1.0 : (u < 0 ? -1.0 : 0.0);
      r += c_sub * (5.0 - kappa) * (4.0 - kappa) * std::pow(std::abs(u), 3.0 - kappa) * sgn;
    }
    return r;
  }
  // max |f'(s)| over |s| <= a, bounded by the sum of term magnitudes.
  double fp_bound(double a) const {
    const double a2 = a * a;
    double r = std::abs(c1) + a2 * (3.0 * std::abs(c3) + 5.0 * std::abs(c5) * a2);
    if (c_sub != 0.0) r += std::abs(c_sub) * (5.0 - kappa) * std::pow(a, sub_power());
    return r;
  }
};

struct ConditionResult {
  bool passed = true;
  double worst_u = 0.0;      // +inf when the failure is asymptotic
  double worst_margin = 0.0; // most negative slack found (>= 0 when passed)
  std::string note;
};

struct StructuralReport {
  ConditionResult sign;       // f(u) u >= 0
  ConditionResult potential;  // F <= L f u + K u^2
  ConditionResult growth;     // |f''| <= C (1 + |u|^{3-kappa})
  bool all_passed() const { return sign.passed && potential.passed && growth.passed; }
};

namespace detail {

struct PowerTerm {
  double power;  // f-term ~ coef |u|^{power-1} u
  double coef;
};

inline std::vector<PowerTerm> nonzero_terms(const NonlinearitySpec& s) {
  std::vector<PowerTerm> t;
  if (s.c1 != 0.0) t.push_back({1.0, s.c1});
  if (s.c3 != 0.0) t.push_back({3.0, s.c3});
  if (s.c5 != 0.0) t.push_back({5.0, s.c5});
  if (s.c_sub != 0.0) t.push_back({5.0 - s.kappa, s.c_sub});
  return t;
}

// Dominant term for |u| -> infinity, summing coefficients of equal power.
inline std::optional<PowerTerm> leading_term(const NonlinearitySpec& s) {
  auto t = nonzero_terms(s);
  if (t.empty()) return std::nullopt;
  double p = 0.0;
  for (const auto& x : t) p = std::max(p, x.power);
  double c = 0.0;
  for (const auto& x : t)
    if (x.power == p) c += x.coef;
  return PowerTerm{p, c};
}

inline void record(ConditionResult& r, double u, double margin, double scale) {
  const double tol = 1e-12 * std::max(scale, 1e-300);
  if (margin < -tol && margin < r.worst_margin) {
    r.passed = false;
    r.worst_margin = margin;
    r.worst_u = u;
  }
}

}  // namespace detail

// Checks the three conditions on a uniform sample of [-umax, umax] and then
// asymptotically from the leading terms, since a finite grid cannot see
// the behaviour as |u| -> infinity.
inline StructuralReport verify_structural_conditions(const NonlinearitySpec& s, double umax, int samples) {
  if (samples < 1000) throw ParameterError("verify_structural_conditions: need at least 1000 samples");
  if (!(umax > 0.0)) throw ParameterError("verify_structural_conditions: umax must be positive");
  StructuralReport rep;
  for (int i = 0; i < samples; ++i) {
    const double u = -umax + 2.0 * umax * double(i) / double(samples - 1);
    const double fu = s.f(u) * u;
    const double a = std::abs(u);
    const double mag = a * a * (std::abs(s.c1) + a * a * (std::abs(s.c3) + std::abs(s.c5) * a * a)) +
                       std::abs(s.c_sub) * std::pow(a, 6.0 - s.kappa);
    detail::record(rep.sign, u, fu, mag);
    detail::record(rep.potential, u, s.L * fu + s.K * u * u - s.F(u), mag);
    const double bound = s.C * (1.0 + std::pow(a, 3.0 - s.kappa));
    detail::record(rep.growth, u, bound - std::abs(s.fpp(u)), std::max(bound, std::abs(s.fpp(u))));
  }

  const double inf = std::numeric_limits<double>::infinity();
  if (const auto lead = detail::leading_term(s)) {
    // a concrete witness from the sample beats an asymptotic one
    if (lead->coef < 0.0 && rep.sign.passed) {
      rep.sign = {false, inf, -inf, "leading coefficient negative"};
    }
    // F lead = c/(p+1) |u|^{p+1}; the right side has L c |u|^{p+1}, plus K u^2 when p = 1.
    const double p = lead->power, c = lead->coef;
    const double slack = p > 1.0 ? (s.L - 1.0 / (p + 1.0)) * c : (s.L - 0.5) * c + s.K;
    if (slack < -1e-15 * std::abs(c) && rep.potential.passed) rep.potential = {false, inf, -inf, "potential outgrows L f(u) u + K u^2"};
    // f'' grows like |u|^{p-2}; admissible degree is 3 - kappa.
    double growth_lead = 0.0, growth_pow = -1.0;
    for (const auto& t : detail::nonzero_terms(s)) {
      if (t.power < 2.0) continue;  // linear term: f'' = 0
      const double gp = t.power - 2.0;
      const double gc = std::abs(t.coef * t.power * (t.power - 1.0));
      if (gp > growth_pow + 1e-15) {
        growth_pow = gp;
        growth_lead = gc;
      } else if (std::abs(gp - growth_pow) <= 1e-15) {
        growth_lead += gc;
      }
    }
    const double admissible = 3.0 - s.kappa;
    if (rep.growth.passed &&
        (growth_pow > admissible + 1e-15 || (std::abs(growth_pow - admissible) <= 1e-15 && growth_lead > s.C))) {
      rep.growth = {false, inf, -inf, "f'' grows faster than C (1 + |u|^{3-kappa})"};
    }
  }
  return rep;
}

// Result of evaluating f on the grid of a spectral field.
struct NonlinearEvaluation {
  SpectralField f;            // dealiased, mean removed
  double removed_mean = 0.0;  // mean of f(u) that was dropped
  double u_sup = 0.0;         // max |u| over the evaluation grid
  double potential = 0.0;     // (F(u), 1) on the evaluation grid
};

// Smallest even M >= padding * n.
inline int padded_size(int n, double padding) {
  if (!(padding >= 1.0)) throw ParameterError("padding factor must be >= 1");
  int m = int(std::ceil(padding * n - 1e-9));
  if (m % 2) ++m;
  return std::max(m, n);
}

namespace detail {

// Keeps the coefficients of `fine` that exist on the coarse grid.
inline SpectralField truncate_to(const SpectralField& fine, const Grid& coarse) {
  if (fine.grid().n() == coarse.n()) return fine;
  SpectralField out(coarse);
  auto o = out.coefficients();
  for (std::size_t i = 0; i < o.size(); ++i) {
    const auto m = coarse.mode(i);
    o[i] = fine.at(m[0], m[1], m[2]);
  }
  return out;
}

}  // namespace detail

// Pointwise f(u) with 2/3-rule dealiasing (optionally on a padded grid), the
// mean removed. Throws BlowUpError on non-finite values.
inline NonlinearEvaluation f_evaluate(const SpectralField& u, const NonlinearitySpec& spec, double padding = 1.0,
                                      bool want_potential = true) {
  const Grid& g = u.grid();
  const int M = padded_size(g.n(), padding);
  const SpectralField work = M == g.n() ? u : zero_pad(u, M);
  const Grid& eg = work.grid();
  auto values = detail::real_inverse_unchecked(work);
  NonlinearEvaluation out{SpectralField(g)};
  double sup = 0.0, pot = 0.0;
  bool finite = true;
  for (double& x : values) {
    sup = std::max(sup, std::abs(x));
    if (!std::isfinite(x)) finite = false;
    if (want_potential) pot += spec.F(x);
    x = spec.f(x);
    if (!std::isfinite(x)) finite = false;
  }
  out.u_sup = finite ? sup : std::numeric_limits<double>::infinity();
  out.potential = pot * eg.cell_volume();
  if (!finite) throw BlowUpError("f_apply: non-finite value in f(u)");
  if (spec.is_zero()) return out;
  SpectralField fu = detail::real_forward(eg, values);
  SpectralField f = detail::truncate_to(fu, g);
  auto c = f.coefficients();
  const auto mask = g.dealias_mask();
  for (std::size_t i = 0; i < c.size(); ++i)
    if (!mask[i]) c[i] = Complex{};
  out.removed_mean = f.remove_mean().real();
  if (out.removed_mean != 0.0) spdlog::trace("f_apply: removed mean {:.17g}", out.removed_mean);
  out.f = std::move(f);
  return out;
}

inline SpectralField f_apply(const SpectralField& u, const NonlinearitySpec& spec, double padding = 1.0) {
  return f_evaluate(u, spec, padding, false).f;
}

// (F(u), 1) by quadrature of the exact antiderivative on the (padded) grid.
inline double potential_energy(const SpectralField& u, const NonlinearitySpec& spec, double padding = 1.0) {
  if (spec.is_zero()) return 0.0;
  return f_evaluate(u, spec, padding, true).potential;
}

}  // namespace hcho
