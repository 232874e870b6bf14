// Core types for population models under geometric catastrophes.
//
// A colony grows by unit births (rate lambda) and is hit by catastrophes
// (rate 1).  A catastrophe kills individuals one by one, each killed with
// probability q = 1-p, and stops at the first survivor.  The survivors of a
// catastrophe either stay put or are dispersed over d new colonies according
// to a dispersion scheme.

#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace catlab {

struct ModelParams {
  double lambda;  // birth rate, > 0 (catastrophe rate normalized to 1)
  double p;       // per-individual survival probability, in (0,1)

  ModelParams(double lambda_, double p_) : lambda(lambda_), p(p_) {
    if (!(std::isfinite(lambda) && lambda > 0.0))
      throw std::invalid_argument("ModelParams: lambda must be finite and > 0");
    if (!(std::isfinite(p) && p > 0.0 && p < 1.0))
      throw std::invalid_argument("ModelParams: p must lie strictly in (0,1)");
  }

  double q() const noexcept { return 1.0 - p; }
};

enum class SchemeKind { None, Optimal, Independent, Uniform };

inline const char* to_string(SchemeKind k) {
  switch (k) {
    case SchemeKind::None: return "none";
    case SchemeKind::Optimal: return "optimal";
    case SchemeKind::Independent: return "independent";
    case SchemeKind::Uniform: return "uniform";
  }
  return "?";
}

// A dispersion scheme: how the survivors of a catastrophe are spread over
// d target colonies.  d = 1 is reserved for the no-dispersion model.
struct DispersionScheme {
  SchemeKind kind = SchemeKind::None;
  int d = 1;

  static DispersionScheme none() { return {SchemeKind::None, 1}; }
  static DispersionScheme optimal(int d) { return checked(SchemeKind::Optimal, d); }
  static DispersionScheme independent(int d) { return checked(SchemeKind::Independent, d); }
  static DispersionScheme uniform(int d) { return checked(SchemeKind::Uniform, d); }

  bool disperses() const { return kind != SchemeKind::None; }

  // Closed-form offspring pmfs and extinction probabilities cover d in {2,3}
  // (and the no-dispersion model); larger d needs the numeric route.
  bool closed_form_covered() const {
    return kind == SchemeKind::None || d == 2 || d == 3;
  }

 private:
  static DispersionScheme checked(SchemeKind k, int d) {
    if (d < 2)
      throw std::invalid_argument("DispersionScheme: dispersal needs d >= 2");
    return {k, d};
  }
};

inline bool operator==(const DispersionScheme& a, const DispersionScheme& b) {
  return a.kind == b.kind && a.d == b.d;
}

// Thrown when a closed-form expression is requested outside its covered
// domain (d not in {2,3}); callers can fall back to the numeric route.
class unsupported_closed_form : public std::domain_error {
 public:
  explicit unsupported_closed_form(const std::string& what)
      : std::domain_error(what) {}
};

// Law of the survivor count N of a single catastrophe in a stationary-grown
// colony:  P(N=0) = beta,  P(N=n) = alpha c^n for n >= 1, where
//   beta  = (1-p) / (lambda p + 1)
//   alpha = (lambda+1) p / (lambda (lambda p + 1))
//   c     = lambda / (lambda+1)
struct SurvivorLaw {
  double beta;
  double alpha;
  double c;
};

inline SurvivorLaw survivor_law(const ModelParams& mp) {
  const double l = mp.lambda;
  SurvivorLaw law;
  law.beta = (1.0 - mp.p) / (l * mp.p + 1.0);
  law.alpha = (l + 1.0) * mp.p / (l * (l * mp.p + 1.0));
  law.c = l / (l + 1.0);
  return law;
}

enum class PsiMethod { ClosedForm, NumericRoot, MonteCarlo };

inline const char* to_string(PsiMethod m) {
  switch (m) {
    case PsiMethod::ClosedForm: return "closed";
    case PsiMethod::NumericRoot: return "numeric";
    case PsiMethod::MonteCarlo: return "mc";
  }
  return "?";
}

// Values within this band of 1 are reported as certain extinction; keeps
// the survives flag stable against roundoff right at criticality.
inline constexpr double unity_band = 1e-12;

struct ExtinctionResult {
  double psi = 1.0;
  bool survives = false;    // psi < 1 after clamping
  PsiMethod method = PsiMethod::ClosedForm;
  double diagnostic = 0.0;  // root residual |g(psi)-psi|, or MC std. error
  bool degenerate = false;  // offspring law concentrated at one child
};

inline ExtinctionResult make_extinction_result(double raw, PsiMethod method,
                                               double diagnostic = 0.0,
                                               bool degenerate = false) {
  ExtinctionResult r;
  if (!std::isfinite(raw))
    throw std::domain_error("extinction probability must be finite");
  double psi = raw;
  if (psi < 0.0) {
    if (psi < -unity_band)
      throw std::domain_error("extinction probability below 0");
    psi = 0.0;
  }
  if (psi > 1.0 - unity_band) {
    if (psi > 1.0 + unity_band)
      throw std::domain_error("extinction probability above 1");
    psi = 1.0;
  }
  r.psi = psi;
  r.survives = psi < 1.0;
  r.method = method;
  r.diagnostic = diagnostic;
  r.degenerate = degenerate;
  return r;
}

}  // namespace catlab
