// Distributions attached to the catastrophe model: the geometric catastrophe
// kernel, the survivor law of a single colony, occupancy laws for dispersed
// survivors, and the offspring-colony pmfs (closed forms for d in {2,3} plus
// a series oracle valid for any d >= 2).

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "catlab/model.hpp"

namespace catlab {

// P(i individuals reduced to j survivors) when a catastrophe strikes:
// the killing sweeps individuals one at a time (death prob q = 1-p) and
// stops at the first survivor, so
//   mu(i,0) = q^i,   mu(i,j) = p q^(i-j)  for 1 <= j <= i.
inline double geometric_catastrophe_pmf(int size, int survivors,
                                        const ModelParams& mp) {
  if (size < 1)
    throw std::domain_error("geometric_catastrophe_pmf: size must be >= 1");
  if (survivors < 0 || survivors > size)
    throw std::domain_error("geometric_catastrophe_pmf: survivors outside 0..size");
  const double q = mp.q();
  if (survivors == 0) return std::pow(q, size);
  return mp.p * std::pow(q, size - survivors);
}

// Survivor count N of a catastrophe hitting a colony grown from one founder:
// P(N=0) = beta, P(N=n) = alpha c^n (n >= 1).
inline double survivor_pmf(const ModelParams& mp, long long n) {
  if (n < 0) throw std::domain_error("survivor_pmf: n must be >= 0");
  const SurvivorLaw law = survivor_law(mp);
  if (n == 0) return law.beta;
  return law.alpha * std::pow(law.c, static_cast<double>(n));
}

// E[s^N] = (s c (alpha - beta) + beta) / (1 - s c) for s in [0,1].
inline double survivor_pgf(const ModelParams& mp, double s) {
  if (!(s >= 0.0 && s <= 1.0))
    throw std::domain_error("survivor_pgf: s outside [0,1]");
  const SurvivorLaw law = survivor_law(mp);
  return (s * law.c * (law.alpha - law.beta) + law.beta) / (1.0 - s * law.c);
}

namespace detail {

inline std::uint64_t binomial_u64(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  unsigned __int128 r = 1;
  for (int i = 1; i <= k; ++i) {
    r = r * static_cast<unsigned>(n - k + i) / static_cast<unsigned>(i);
  }
  return static_cast<std::uint64_t>(r);
}

inline double binomial_d(long long n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i)
    r *= static_cast<double>(n - k + i) / static_cast<double>(i);
  return r;
}

inline unsigned __int128 ipow128(unsigned base, int exp) {
  unsigned __int128 r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

}  // namespace detail

// Number of surjections from r labeled items onto y labeled slots,
// sum_i (-1)^i C(y,i) (y-i)^r.  Exact; throws std::overflow_error when the
// result (or an intermediate term) cannot be represented in 64 bits.
inline std::uint64_t surjection_count(int r, int y) {
  if (r < 0 || y < 0) throw std::domain_error("surjection_count: negative argument");
  if (y == 0) return r == 0 ? 1u : 0u;
  if (y > r) return 0;
  // Largest term is bounded by 2^y * y^r; keep it well inside 128 bits.
  const double bits = r * std::log2(static_cast<double>(y)) + y;
  if (bits > 120.0) throw std::overflow_error("surjection_count: result too large");
  __int128 acc = 0;
  for (int i = 0; i <= y; ++i) {
    const __int128 term =
        static_cast<__int128>(detail::binomial_u64(y, i)) *
        static_cast<__int128>(detail::ipow128(static_cast<unsigned>(y - i), r));
    acc += (i % 2 == 0) ? term : -term;
  }
  if (acc < 0 || acc > static_cast<__int128>(UINT64_MAX))
    throw std::overflow_error("surjection_count: result exceeds 64 bits");
  return static_cast<std::uint64_t>(acc);
}

// P(Y = y | N = r) when each of r survivors picks one of d colonies
// independently and uniformly; Y counts the occupied colonies.
// Inclusion-exclusion: C(d,y) sum_i (-1)^i C(y,i) ((y-i)/d)^r.
inline double occupancy_pmf_independent(int d, long long r, int y) {
  if (d < 2) throw std::domain_error("occupancy_pmf_independent: d must be >= 2");
  if (r < 0) throw std::domain_error("occupancy_pmf_independent: r must be >= 0");
  if (y < 0 || y > d) return 0.0;
  if (r == 0) return y == 0 ? 1.0 : 0.0;
  if (y == 0 || y > r) return 0.0;
  double sum = 0.0;
  for (int i = 0; i <= y; ++i) {
    const double t = detail::binomial_d(y, i) *
                     std::pow(static_cast<double>(y - i) / d,
                              static_cast<double>(r));
    sum += (i % 2 == 0) ? t : -t;
  }
  return std::max(0.0, detail::binomial_d(d, y) * sum);
}

// P(Y = y | N = r) when the survivor vector is uniform over all compositions
// of r into d ordered nonnegative parts; Y counts nonzero parts.
//   P(Y=y|N=r) = C(r-1, y-1) C(d, y) / C(d+r-1, r).
inline double occupancy_pmf_uniform(int d, long long r, int y) {
  if (d < 2) throw std::domain_error("occupancy_pmf_uniform: d must be >= 2");
  if (r < 0) throw std::domain_error("occupancy_pmf_uniform: r must be >= 0");
  if (y < 0 || y > d) return 0.0;
  if (r == 0) return y == 0 ? 1.0 : 0.0;
  if (y == 0 || y > r) return 0.0;
  // Ratio form keeps everything O(1) for large r.
  double v = detail::binomial_d(d, y);
  for (int i = 1; i <= y - 1; ++i)
    v *= static_cast<double>(r - y + i) / static_cast<double>(i);
  for (int j = 1; j <= d - 1; ++j)
    v *= static_cast<double>(j) / static_cast<double>(r + j);
  return v;
}

// Colonies created under optimal dispersion: survivors fill sites left to
// right, so exactly min(r, d) sites are hit.
inline long long occupancy_optimal(int d, long long r) {
  if (d < 2) throw std::domain_error("occupancy_optimal: d must be >= 2");
  if (r < 0) throw std::domain_error("occupancy_optimal: r must be >= 0");
  return std::min<long long>(r, d);
}

inline double occupancy_pmf(const DispersionScheme& scheme, long long r, int y) {
  switch (scheme.kind) {
    case SchemeKind::None:
      throw std::invalid_argument("occupancy_pmf: no-dispersion model has no occupancy law");
    case SchemeKind::Optimal: {
      if (r < 0) throw std::domain_error("occupancy_pmf: r must be >= 0");
      const long long want = std::min<long long>(r, scheme.d);
      return y == want ? 1.0 : 0.0;
    }
    case SchemeKind::Independent:
      return occupancy_pmf_independent(scheme.d, r, y);
    case SchemeKind::Uniform:
      return occupancy_pmf_uniform(scheme.d, r, y);
  }
  throw std::logic_error("occupancy_pmf: bad scheme");
}

// Offspring-colony law of one colony: number of colonies founded by the
// survivors of its catastrophe, entries p[0..d].
struct OffspringPmf {
  std::vector<double> p;
  DispersionScheme scheme;
  bool truncated = false;  // true when assembled from a truncated series

  int max_children() const { return static_cast<int>(p.size()) - 1; }
  double operator[](int y) const {
    return (y >= 0 && y < static_cast<int>(p.size())) ? p[y] : 0.0;
  }
};

inline OffspringPmf make_offspring_pmf(std::vector<double> probs,
                                       const DispersionScheme& scheme,
                                       bool truncated = false) {
  double sum = 0.0;
  for (double& v : probs) {
    if (!(v >= -1e-12 && v <= 1.0 + 1e-12))
      throw std::domain_error("OffspringPmf: entry outside [0,1]");
    v = std::clamp(v, 0.0, 1.0);
    sum += v;
  }
  if (std::fabs(sum - 1.0) > 1e-10)
    throw std::domain_error("OffspringPmf: entries do not sum to 1");
  OffspringPmf pmf;
  pmf.p = std::move(probs);
  pmf.scheme = scheme;
  pmf.truncated = truncated;
  return pmf;
}

// Closed-form offspring pmfs, d in {2,3}.  All expressions are in terms of
// the survivor law (beta, alpha, c) and L = ln(lambda+1).
inline OffspringPmf offspring_pmf(const DispersionScheme& scheme,
                                  const ModelParams& mp) {
  if (!scheme.disperses())
    throw std::invalid_argument("offspring_pmf: no-dispersion model is not a colony branching process");
  if (scheme.d != 2 && scheme.d != 3)
    throw unsupported_closed_form("offspring_pmf: closed form covers d in {2,3} only");
  const SurvivorLaw law = survivor_law(mp);
  const double beta = law.beta, alpha = law.alpha, c = law.c;
  const double l = mp.lambda, p = mp.p;
  std::vector<double> v;
  switch (scheme.kind) {
    case SchemeKind::Optimal: {
      if (scheme.d == 2) {
        const double p1 = alpha * c;
        v = {beta, p1, 1.0 - beta - p1};
      } else {
        const double p1 = alpha * c, p2 = alpha * c * c;
        v = {beta, p1, p2, 1.0 - beta - p1 - p2};
      }
      break;
    }
    case SchemeKind::Independent: {
      if (scheme.d == 2) {
        const double p1 = 2.0 * alpha * c / (2.0 - c);
        const double p2 = alpha * c * c / ((1.0 - c) * (2.0 - c));
        v = {beta, p1, p2};
      } else {
        const double p1 = 3.0 * alpha * c / (3.0 - c);
        const double p2 = 6.0 * alpha * c * c / ((3.0 - 2.0 * c) * (3.0 - c));
        const double c3 = c * c * c;
        const double p3 = alpha * (c3 / (1.0 - c) - 8.0 * c3 / (3.0 * (3.0 - 2.0 * c)) +
                                   c3 / (3.0 * (3.0 - c)));
        v = {beta, p1, p2, p3};
      }
      break;
    }
    case SchemeKind::Uniform: {
      const double L = std::log(l + 1.0);
      if (scheme.d == 2) {
        const double p1 = -2.0 * alpha + (2.0 * alpha / c) * L;
        const double p2 = alpha * (l + 2.0) - (2.0 * alpha / c) * L;
        v = {beta, p1, p2};
      } else {
        const double common = p * (l + 1.0) / (l * l * (l * p + 1.0));
        const double m1 = 6.0 * p * (l + 1.0) * (l + 1.0) / (l * l * l * (l * p + 1.0));
        const double p1 = 3.0 * common * (l + 2.0) - m1 * L;
        const double p2 = -3.0 * common * (5.0 * l + 6.0) + m1 * (l + 3.0) * L;
        const double p3 = common * (l * l + 12.0 * l + 12.0) - m1 * (l + 2.0) * L;
        v = {beta, p1, p2, p3};
      }
      break;
    }
    default:
      throw std::logic_error("offspring_pmf: bad scheme");
  }
  return make_offspring_pmf(std::move(v), scheme);
}

// Series oracle: P(Y=y) = beta 1{y=0} + sum_r alpha c^r P(Y=y | N=r),
// truncated once the survivor-law tail alpha c^(r+1)/(1-c) drops below
// tol/10; the remaining tail mass is attached to y = d (for large r the
// occupancy is d with overwhelming probability).  Valid for any d >= 2.
inline OffspringPmf offspring_pmf_series_oracle(const DispersionScheme& scheme,
                                                const ModelParams& mp,
                                                double tol = 1e-10) {
  if (!scheme.disperses())
    throw std::invalid_argument("offspring_pmf_series_oracle: dispersal schemes only");
  if (!(tol > 0.0) || tol > 1e-2)
    throw std::domain_error("offspring_pmf_series_oracle: tol outside (0, 1e-2]");
  const SurvivorLaw law = survivor_law(mp);
  std::vector<double> v(static_cast<std::size_t>(scheme.d) + 1, 0.0);
  v[0] = law.beta;
  double weight = law.alpha * law.c;  // P(N=r) for the running r
  double used = law.beta;
  long long r = 1;
  const double cutoff = tol / 10.0;
  while (weight / (1.0 - law.c) >= cutoff) {
    for (int y = 1; y <= scheme.d; ++y)
      v[static_cast<std::size_t>(y)] += weight * occupancy_pmf(scheme, r, y);
    used += weight;
    weight *= law.c;
    ++r;
    if (r > 100000000)
      throw std::runtime_error("offspring_pmf_series_oracle: series did not converge");
  }
  v[static_cast<std::size_t>(scheme.d)] += 1.0 - used;
  return make_offspring_pmf(std::move(v), scheme, /*truncated=*/true);
}

}  // namespace catlab
