// Phase structure of the model: critical curves lambda_c(p), crossing points
// between dispersal and no-dispersal critical curves, dominance verdicts
// (which strategy has the smaller extinction probability), and region
// classification for the d=3 schemes, plus grid sweeps backing CSV export.

#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "catlab/analytic.hpp"
#include "catlab/model.hpp"

namespace catlab {

enum class Dominance { BothDie, DispersionBetter, NonDispersionBetter, Tie };

inline const char* to_string(Dominance d) {
  switch (d) {
    case Dominance::BothDie: return "both-die";
    case Dominance::DispersionBetter: return "dispersion-better";
    case Dominance::NonDispersionBetter: return "non-dispersion-better";
    case Dominance::Tie: return "tie";
  }
  return "?";
}

enum class RegionCase {
  BothExtinct,
  DispersionOnlySurvives,
  NonDispersionOnlySurvives,
  BothSurviveDispersionBetter,
  BothSurviveTie,
  BothSurviveNonDispersionBetter,
};

inline const char* to_string(RegionCase c) {
  switch (c) {
    case RegionCase::BothExtinct: return "both-extinct";
    case RegionCase::DispersionOnlySurvives: return "disp-only-survives";
    case RegionCase::NonDispersionOnlySurvives: return "none-only-survives";
    case RegionCase::BothSurviveDispersionBetter: return "both-survive-disp-better";
    case RegionCase::BothSurviveTie: return "both-survive-tie";
    case RegionCase::BothSurviveNonDispersionBetter: return "both-survive-none-better";
  }
  return "?";
}

// Mathematical reading of each region case, s standing for the scheme.
inline const char* describe(RegionCase c) {
  switch (c) {
    case RegionCase::BothExtinct: return "psi_A = psi_s = 1";
    case RegionCase::DispersionOnlySurvives: return "psi_s < psi_A = 1";
    case RegionCase::NonDispersionOnlySurvives: return "psi_A < psi_s = 1";
    case RegionCase::BothSurviveDispersionBetter: return "psi_s < psi_A < 1";
    case RegionCase::BothSurviveTie: return "psi_s = psi_A < 1";
    case RegionCase::BothSurviveNonDispersionBetter: return "psi_A < psi_s < 1";
  }
  return "?";
}

inline constexpr double comparison_band = 1e-12;

// Survival threshold in p for fixed lambda: the scheme survives iff
// p > threshold.  Solved from each survival condition; the uniform cases
// rearrange to a ratio because the condition is linear in p.
inline double survival_threshold_p(const DispersionScheme& scheme, double lambda) {
  const double l = lambda;
  if (!(std::isfinite(l) && l > 0.0))
    throw std::domain_error("survival_threshold_p: lambda must be > 0");
  switch (scheme.kind) {
    case SchemeKind::None:
      return 1.0 / (l + 1.0);
    case SchemeKind::Optimal:
      if (scheme.d == 2) return 1.0 / (l + 1.0);
      if (scheme.d == 3) return (l + 1.0) / (2.0 * l * l + 2.0 * l + 1.0);
      break;
    case SchemeKind::Independent:
      if (scheme.d == 2) return (l + 2.0) / (l * l + 2.0 * l + 2.0);
      if (scheme.d == 3) return (l + 3.0) / (2.0 * l * l + 3.0 * l + 3.0);
      break;
    case SchemeKind::Uniform: {
      const double L = std::log(l + 1.0);
      if (scheme.d == 2)
        return l * l / (l * l * l + 4.0 * l * l + 2.0 * l - 2.0 * (l + 1.0) * (l + 1.0) * L);
      if (scheme.d == 3) {
        const double B = l + 2.0 - (2.0 * (l + 1.0) / l) * L;
        return l * l / (3.0 * (l + 1.0) * (l + 1.0) * B - l * l * l);
      }
      break;
    }
  }
  throw unsupported_closed_form("survival_threshold_p: scheme/d not covered");
}

namespace detail {

// Bisection for a predicate that flips false -> true exactly once on
// [lo, hi]; the single-flip structure is probed on a coarse scan first.
inline double bisect_condition(const std::function<bool(double)>& cond, double lo,
                               double hi, double tol, bool scan_monotone) {
  if (cond(lo)) throw std::logic_error("bisect_condition: already true at left end");
  if (!cond(hi)) throw std::logic_error("bisect_condition: still false at right end");
  if (scan_monotone) {
    bool seen_true = false;
    for (int i = 0; i <= 64; ++i) {
      const bool v = cond(lo + (hi - lo) * (static_cast<double>(i) / 64.0));
      if (seen_true && !v)
        throw std::logic_error("bisect_condition: condition is not monotone on the bracket");
      seen_true = seen_true || v;
    }
  }
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (cond(mid) ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

// Smallest lambda at which the scheme survives for the given p.
// Polynomial conditions are solved exactly; the uniform (transcendental)
// conditions go through guarded bisection at 1e-9 tolerance.
inline double critical_lambda(const DispersionScheme& scheme, double p) {
  if (!(std::isfinite(p) && p > 0.0 && p < 1.0))
    throw std::domain_error("critical_lambda: p must lie in (0,1)");
  switch (scheme.kind) {
    case SchemeKind::None:
      return (1.0 - p) / p;
    case SchemeKind::Optimal:
      if (scheme.d == 2) return (1.0 - p) / p;
      if (scheme.d == 3) {
        // 2p l^2 + (2p-1) l + (p-1) = 0, positive root.
        const double disc = 1.0 + 4.0 * p - 4.0 * p * p;
        return ((1.0 - 2.0 * p) + std::sqrt(disc)) / (4.0 * p);
      }
      break;
    case SchemeKind::Independent:
      if (scheme.d == 2) {
        // p l^2 + (2p-1) l + (2p-2) = 0.
        const double disc = 1.0 + 4.0 * p - 4.0 * p * p;
        return ((1.0 - 2.0 * p) + std::sqrt(disc)) / (2.0 * p);
      }
      if (scheme.d == 3) {
        // 2p l^2 + (3p-1) l + (3p-3) = 0.
        const double disc = 1.0 + 18.0 * p - 15.0 * p * p;
        return ((1.0 - 3.0 * p) + std::sqrt(disc)) / (4.0 * p);
      }
      break;
    case SchemeKind::Uniform: {
      if (scheme.d != 2 && scheme.d != 3) break;
      double lo = 1e-6, hi = 1000.0;
      const auto cond = [&](double l) {
        return survival_condition(scheme, ModelParams(l, p));
      };
      while (cond(lo) && lo > 1e-12) lo *= 0.125;
      while (!cond(hi)) {
        hi *= 8.0;
        if (hi > 1e9)
          throw std::logic_error("critical_lambda: no survival up to lambda = 1e9");
      }
      return detail::bisect_condition(cond, lo, hi, 1e-9, /*scan_monotone=*/true);
    }
  }
  throw unsupported_closed_form("critical_lambda: scheme/d not covered");
}

// The p at which the scheme's critical curve meets the no-dispersion curve
// lambda_c(p) = (1-p)/p: substitute that lambda into the scheme's survival
// margin and root-find.  Only the d=3 schemes cross.
inline double crossing_p(const DispersionScheme& scheme) {
  if (scheme.d != 3 ||
      (scheme.kind != SchemeKind::Independent && scheme.kind != SchemeKind::Uniform))
    throw std::invalid_argument("crossing_p: independent/uniform with d=3 only");
  // Margin > 0 means the scheme survives on the no-dispersion critical curve
  // (its own critical curve lies below).  Positive near p=0, negative near 1.
  const auto margin = [&](double p) {
    const double l = (1.0 - p) / p;
    if (scheme.kind == SchemeKind::Independent)
      return p * (2.0 * l * l + 3.0 * l + 3.0) - (l + 3.0);
    const double L = std::log(l + 1.0);
    const double B = l + 2.0 - (2.0 * (l + 1.0) / l) * L;
    return 3.0 * p * (l + 1.0) * (l + 1.0) * B / (l * l * (l * p + 1.0)) - 1.0;
  };
  const auto below = [&](double p) { return margin(p) <= 0.0; };
  // Right end stops at 0.9: both crossings sit far below, and near p = 1
  // (lambda -> 0) the uniform margin is lost to cancellation in B.
  return detail::bisect_condition(below, 1e-6, 0.9, 1e-10,
                                  /*scan_monotone=*/false);
}

// Both-survive tie locus for independent d=3: psi equality at
// p = 2(lambda+1)/(3 lambda + 5).
inline double tie_p_independent(double lambda) {
  return 2.0 * (lambda + 1.0) / (3.0 * lambda + 5.0);
}

namespace detail {

// Both-survive comparison margin for uniform d=3: positive iff the
// dispersal extinction probability is the smaller one.  Derived from the
// log-form coefficients; A carries the no-dispersion psi through the PGF.
inline double uniform_margin(const ModelParams& mp) {
  const double l = mp.lambda, p = mp.p;
  const LogFormCoefficients lf = uniform_log_form_coefficients(3, mp);
  const double L = std::log(l + 1.0);
  const double A = (1.0 + p * (l - 1.0)) / (l * p);
  return (A * lf.k3 + lf.k2 - l * p / (l * p + 1.0)) - (A * lf.m3 + lf.m2) * L;
}

}  // namespace detail

// Both-survive tie locus for uniform d=3 at fixed lambda (root of the
// comparison margin in p); exists only above the split lambda.
inline double tie_p_uniform(double lambda) {
  const double t_none = 1.0 / (1.0 + lambda);
  const auto below = [&](double p) {
    return detail::uniform_margin(ModelParams(lambda, p)) <= 0.0;
  };
  return detail::bisect_condition(below, t_none + 1e-9, 1.0 - 1e-9, 1e-13,
                                  /*scan_monotone=*/false);
}

// Lambda at which the uniform d=3 critical curve crosses the no-dispersion
// one (the tie-structure transition).
inline double uniform_split_lambda() {
  const double p = crossing_p(DispersionScheme::uniform(3));
  return (1.0 - p) / p;
}

// Direct comparison of two extinction probabilities (both already clamped).
inline Dominance dominance_from_psi(double psi_none, double psi_scheme) {
  const bool none_dies = psi_none >= 1.0;
  const bool scheme_dies = psi_scheme >= 1.0;
  if (none_dies && scheme_dies) return Dominance::BothDie;
  if (std::fabs(psi_none - psi_scheme) <= comparison_band) return Dominance::Tie;
  return psi_scheme < psi_none ? Dominance::DispersionBetter
                               : Dominance::NonDispersionBetter;
}

namespace detail {

inline Dominance dominance_d3(const DispersionScheme& scheme, const ModelParams& mp) {
  const double t_s = survival_threshold_p(scheme, mp.lambda);
  const double t_n = survival_threshold_p(DispersionScheme::none(), mp.lambda);
  const bool s_scheme = mp.p - t_s > comparison_band;
  const bool s_none = mp.p - t_n > comparison_band;
  if (!s_scheme && !s_none) return Dominance::BothDie;
  if (s_scheme && !s_none) return Dominance::DispersionBetter;
  if (!s_scheme && s_none) return Dominance::NonDispersionBetter;
  if (scheme.kind == SchemeKind::Independent) {
    const double delta = mp.p - tie_p_independent(mp.lambda);
    if (std::fabs(delta) <= comparison_band) return Dominance::Tie;
    return delta < 0.0 ? Dominance::DispersionBetter : Dominance::NonDispersionBetter;
  }
  const double margin = uniform_margin(mp);
  if (std::fabs(margin) <= comparison_band) return Dominance::Tie;
  return margin > 0.0 ? Dominance::DispersionBetter : Dominance::NonDispersionBetter;
}

}  // namespace detail

inline Dominance dominance_independent(const ModelParams& mp) {
  return detail::dominance_d3(DispersionScheme::independent(3), mp);
}

inline Dominance dominance_uniform(const ModelParams& mp) {
  return detail::dominance_d3(DispersionScheme::uniform(3), mp);
}

// Interval classification of (lambda, p) for a d=3 scheme against the
// no-dispersion model.  Interval boundaries are right-closed (a survival
// threshold itself still means extinction).
inline RegionCase classify_region(const DispersionScheme& scheme, const ModelParams& mp) {
  if (scheme.d != 3 ||
      (scheme.kind != SchemeKind::Independent && scheme.kind != SchemeKind::Uniform))
    throw std::invalid_argument("classify_region: independent/uniform with d=3 only");
  const double t_s = survival_threshold_p(scheme, mp.lambda);
  const double t_n = survival_threshold_p(DispersionScheme::none(), mp.lambda);
  const double p = mp.p;

  if (std::fabs(t_s - t_n) <= comparison_band) {
    // Knife-edge lambda: the two thresholds coincide.
    if (p - t_s <= comparison_band) return RegionCase::BothExtinct;
    return RegionCase::BothSurviveNonDispersionBetter;
  }
  if (t_s < t_n) {
    // Dispersal lowers the survival threshold.
    if (p - t_s <= comparison_band) return RegionCase::BothExtinct;
    if (p - t_n <= comparison_band) return RegionCase::DispersionOnlySurvives;
    double delta;
    if (scheme.kind == SchemeKind::Independent) {
      delta = p - tie_p_independent(mp.lambda);
    } else {
      delta = -detail::uniform_margin(mp);  // positive when dispersal is worse
    }
    if (std::fabs(delta) <= comparison_band) return RegionCase::BothSurviveTie;
    return delta < 0.0 ? RegionCase::BothSurviveDispersionBetter
                       : RegionCase::BothSurviveNonDispersionBetter;
  }
  // Dispersal raises the survival threshold.
  if (p - t_n <= comparison_band) return RegionCase::BothExtinct;
  if (p - t_s <= comparison_band) return RegionCase::NonDispersionOnlySurvives;
  return RegionCase::BothSurviveNonDispersionBetter;
}

struct PhaseRow {
  double lambda = 0.0;
  double p = 0.0;
  double psi_A = 1.0;
  double psi_o = 1.0;
  double psi_i = 1.0;
  double psi_u = 1.0;
  Dominance dom_indep = Dominance::BothDie;
  Dominance dom_unif = Dominance::BothDie;
  std::optional<RegionCase> region_indep;
  std::optional<RegionCase> region_unif;
};

struct GridSpec {
  double lo = 0.0;
  double hi = 0.0;
  double step = 0.0;
};

namespace detail {

inline std::vector<double> grid_values(const GridSpec& g) {
  if (!(g.step > 0.0)) throw std::domain_error("grid step must be > 0");
  std::vector<double> out;
  if (g.hi < g.lo) return out;
  const int n = static_cast<int>(std::floor((g.hi - g.lo) / g.step + 1e-9)) + 1;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out.push_back(g.lo + g.step * i);
  return out;
}

}  // namespace detail

inline PhaseRow phase_row(const ModelParams& mp, int d) {
  PhaseRow row;
  row.lambda = mp.lambda;
  row.p = mp.p;
  row.psi_A = psi_no_dispersion(mp).psi;
  row.psi_o = psi_optimal(d, mp).psi;
  row.psi_i = psi_independent(d, mp).psi;
  row.psi_u = psi_uniform(d, mp).psi;
  if (d == 3) {
    row.dom_indep = dominance_independent(mp);
    row.dom_unif = dominance_uniform(mp);
    row.region_indep = classify_region(DispersionScheme::independent(3), mp);
    row.region_unif = classify_region(DispersionScheme::uniform(3), mp);
  } else {
    row.dom_indep = dominance_from_psi(row.psi_A, row.psi_i);
    row.dom_unif = dominance_from_psi(row.psi_A, row.psi_u);
  }
  return row;
}

// Row-major sweep, lambda outer; d in {2,3}.
inline std::vector<PhaseRow> phase_grid(const GridSpec& lambdas, const GridSpec& ps,
                                        int d) {
  if (d != 2 && d != 3)
    throw unsupported_closed_form("phase_grid: d in {2,3} only");
  const std::vector<double> lv = detail::grid_values(lambdas);
  const std::vector<double> pv = detail::grid_values(ps);
  for (double l : lv)
    if (!(l > 0.0)) throw std::domain_error("phase_grid: lambda values must be > 0");
  for (double p : pv)
    if (!(p > 0.0 && p < 1.0))
      throw std::domain_error("phase_grid: p values must lie in (0,1)");
  std::vector<PhaseRow> rows;
  rows.reserve(lv.size() * pv.size());
  for (double l : lv)
    for (double p : pv) rows.push_back(phase_row(ModelParams(l, p), d));
  return rows;
}

}  // namespace catlab
