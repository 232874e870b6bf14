#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "catlab/distributions.hpp"
#include "catlab/model.hpp"

using namespace catlab;

namespace {

const double grid_lambda[] = {0.25, 0.5, 1.0, 2.0, 4.0, 8.0};

// Brute-force occupancy law for independent placement: walk all d^r
// assignments of r balls to d slots.
double brute_occupancy_independent(int d, int r, int y) {
  std::vector<int> slot(static_cast<std::size_t>(r), 0);
  long long total = 0, hits = 0;
  for (;;) {
    ++total;
    std::vector<char> used(static_cast<std::size_t>(d), 0);
    int distinct = 0;
    for (int i = 0; i < r; ++i)
      if (!used[static_cast<std::size_t>(slot[static_cast<std::size_t>(i)])]) {
        used[static_cast<std::size_t>(slot[static_cast<std::size_t>(i)])] = 1;
        ++distinct;
      }
    if (distinct == y) ++hits;
    int i = 0;
    while (i < r && ++slot[static_cast<std::size_t>(i)] == d) {
      slot[static_cast<std::size_t>(i)] = 0;
      ++i;
    }
    if (i == r) break;
  }
  return static_cast<double>(hits) / static_cast<double>(total);
}

// Brute-force occupancy law for the uniform composition: every weak
// composition of r into d parts has the same probability.
double brute_occupancy_uniform(int d, int r, int y) {
  long long total = 0, hits = 0;
  if (d == 2) {
    for (int a = 0; a <= r; ++a) {
      ++total;
      const int nz = (a > 0 ? 1 : 0) + (r - a > 0 ? 1 : 0);
      if (nz == y) ++hits;
    }
  } else {
    for (int a = 0; a <= r; ++a)
      for (int b = 0; a + b <= r; ++b) {
        ++total;
        const int cpart = r - a - b;
        const int nz = (a > 0 ? 1 : 0) + (b > 0 ? 1 : 0) + (cpart > 0 ? 1 : 0);
        if (nz == y) ++hits;
      }
  }
  return static_cast<double>(hits) / static_cast<double>(total);
}

// Survivor pmf assembled from first principles: colony size at catastrophe
// is 1 + Geometric(c), then the catastrophe kernel acts.
double brute_survivor_pmf(const ModelParams& mp, int n) {
  const double c = mp.lambda / (mp.lambda + 1.0);
  double acc = 0.0, wk = 1.0 - c;  // P(size = k), starting at k = 1
  for (int k = 1; k <= 4000; ++k) {
    if (k >= std::max(n, 1)) acc += wk * geometric_catastrophe_pmf(k, n, mp);
    wk *= c;
  }
  return acc;
}

}  // namespace

TEST_CASE("catastrophe kernel rows sum to one", "[distributions]") {
  for (double lambda : grid_lambda)
    for (double p : {0.05, 0.35, 0.65, 0.95}) {
      const ModelParams mp(lambda, p);
      for (int size : {1, 2, 5, 17, 40}) {
        double sum = 0.0;
        for (int j = 0; j <= size; ++j)
          sum += geometric_catastrophe_pmf(size, j, mp);
        REQUIRE(sum == Catch::Approx(1.0).epsilon(1e-12));
      }
    }
  const ModelParams mp(1.0, 0.3);
  REQUIRE(geometric_catastrophe_pmf(3, 0, mp) == Catch::Approx(std::pow(0.7, 3)));
  REQUIRE(geometric_catastrophe_pmf(3, 2, mp) == Catch::Approx(0.3 * 0.7));
  REQUIRE(geometric_catastrophe_pmf(3, 3, mp) == Catch::Approx(0.3));
  REQUIRE_THROWS_AS(geometric_catastrophe_pmf(0, 0, mp), std::domain_error);
  REQUIRE_THROWS_AS(geometric_catastrophe_pmf(3, 4, mp), std::domain_error);
  REQUIRE_THROWS_AS(geometric_catastrophe_pmf(3, -1, mp), std::domain_error);
}

TEST_CASE("survivor pmf matches the first-principles series", "[distributions]") {
  for (double lambda : {0.5, 1.0, 2.0, 4.0})
    for (double p : {0.2, 0.5, 0.8}) {
      const ModelParams mp(lambda, p);
      for (int n = 0; n <= 12; ++n)
        REQUIRE(survivor_pmf(mp, n) ==
                Catch::Approx(brute_survivor_pmf(mp, n)).margin(1e-12));
      // total mass
      double mass = survivor_pmf(mp, 0);
      const SurvivorLaw law = survivor_law(mp);
      mass += law.alpha * law.c / (1.0 - law.c);
      REQUIRE(mass == Catch::Approx(1.0).epsilon(1e-12));
    }
  REQUIRE_THROWS_AS(survivor_pmf(ModelParams(1.0, 0.5), -1), std::domain_error);
}

TEST_CASE("survivor pgf agrees with the series and hits 1 at s=1",
          "[distributions]") {
  for (double lambda : {0.5, 2.0, 8.0})
    for (double p : {0.1, 0.5, 0.9}) {
      const ModelParams mp(lambda, p);
      REQUIRE(survivor_pgf(mp, 1.0) == Catch::Approx(1.0).epsilon(1e-12));
      REQUIRE(survivor_pgf(mp, 0.0) ==
              Catch::Approx(survivor_pmf(mp, 0)).epsilon(1e-12));
      for (double s : {0.1, 0.5, 0.9}) {
        double direct = 0.0;
        for (int n = 0; n <= 700; ++n)
          direct += survivor_pmf(mp, n) * std::pow(s, n);
        REQUIRE(survivor_pgf(mp, s) == Catch::Approx(direct).margin(1e-12));
      }
    }
  REQUIRE_THROWS_AS(survivor_pgf(ModelParams(1.0, 0.5), -0.1), std::domain_error);
  REQUIRE_THROWS_AS(survivor_pgf(ModelParams(1.0, 0.5), 1.1), std::domain_error);
}

TEST_CASE("surjection counts", "[distributions]") {
  REQUIRE(surjection_count(0, 0) == 1u);
  REQUIRE(surjection_count(1, 0) == 0u);
  REQUIRE(surjection_count(1, 1) == 1u);
  REQUIRE(surjection_count(2, 1) == 1u);
  REQUIRE(surjection_count(2, 2) == 2u);
  REQUIRE(surjection_count(3, 2) == 6u);
  REQUIRE(surjection_count(4, 2) == 14u);
  REQUIRE(surjection_count(4, 3) == 36u);
  REQUIRE(surjection_count(6, 3) == 540u);
  REQUIRE(surjection_count(10, 10) == 3628800u);  // 10!
  REQUIRE(surjection_count(5, 6) == 0u);
  REQUIRE(surjection_count(20, 3) == 3483638676ull);
  REQUIRE(surjection_count(60, 2) == (1ull << 60) - 2);
  REQUIRE_THROWS_AS(surjection_count(200, 3), std::overflow_error);
  REQUIRE_THROWS_AS(surjection_count(25, 25), std::overflow_error);
  REQUIRE_THROWS_AS(surjection_count(-1, 2), std::domain_error);
}

TEST_CASE("independent occupancy law", "[distributions]") {
  // small cases against exhaustive enumeration
  for (int d : {2, 3})
    for (int r = 1; r <= 8; ++r)
      for (int y = 0; y <= d; ++y)
        REQUIRE(occupancy_pmf_independent(d, r, y) ==
                Catch::Approx(brute_occupancy_independent(d, r, y)).margin(1e-12));
  // surjection identity P(Y=y) = T(r,y) C(d,y) / d^r
  for (int d : {2, 3})
    for (int r = 1; r <= 20; ++r)
      for (int y = 1; y <= d; ++y) {
        double choose = 1.0;
        for (int i = 1; i <= y; ++i)
          choose *= static_cast<double>(d - y + i) / i;
        const double expect = static_cast<double>(surjection_count(r, y)) *
                              choose / std::pow(static_cast<double>(d), r);
        REQUIRE(occupancy_pmf_independent(d, r, y) ==
                Catch::Approx(expect).margin(1e-12));
      }
  // exact spot values
  REQUIRE(occupancy_pmf_independent(3, 2, 1) == Catch::Approx(1.0 / 3.0));
  REQUIRE(occupancy_pmf_independent(3, 2, 2) == Catch::Approx(2.0 / 3.0));
  REQUIRE(occupancy_pmf_independent(2, 2, 1) == Catch::Approx(0.5));
  // normalization at large r, and the mass concentrates on y = d
  for (int d : {2, 3, 6}) {
    double sum = 0.0;
    for (int y = 0; y <= d; ++y) sum += occupancy_pmf_independent(d, 1000000, y);
    REQUIRE(sum == Catch::Approx(1.0).epsilon(1e-9));
    REQUIRE(occupancy_pmf_independent(d, 1000000, d) ==
            Catch::Approx(1.0).epsilon(1e-9));
  }
  REQUIRE(occupancy_pmf_independent(2, 0, 0) == 1.0);
  REQUIRE(occupancy_pmf_independent(2, 3, 3) == 0.0);
  REQUIRE_THROWS_AS(occupancy_pmf_independent(1, 2, 1), std::domain_error);
}

TEST_CASE("uniform occupancy law", "[distributions]") {
  for (int d : {2, 3})
    for (int r = 1; r <= 10; ++r)
      for (int y = 0; y <= d; ++y)
        REQUIRE(occupancy_pmf_uniform(d, r, y) ==
                Catch::Approx(brute_occupancy_uniform(d, r, y)).margin(1e-12));
  REQUIRE(occupancy_pmf_uniform(3, 2, 1) == Catch::Approx(0.5));
  REQUIRE(occupancy_pmf_uniform(3, 2, 2) == Catch::Approx(0.5));
  REQUIRE(occupancy_pmf_uniform(2, 2, 1) == Catch::Approx(2.0 / 3.0));
  for (int d : {2, 3, 6}) {
    double sum = 0.0;
    for (int y = 0; y <= d; ++y) sum += occupancy_pmf_uniform(d, 1000000, y);
    REQUIRE(sum == Catch::Approx(1.0).epsilon(1e-9));
  }
  REQUIRE_THROWS_AS(occupancy_pmf_uniform(2, -1, 0), std::domain_error);
}

TEST_CASE("optimal occupancy", "[distributions]") {
  REQUIRE(occupancy_optimal(2, 0) == 0);
  REQUIRE(occupancy_optimal(2, 1) == 1);
  REQUIRE(occupancy_optimal(2, 7) == 2);
  REQUIRE(occupancy_optimal(3, 2) == 2);
  REQUIRE(occupancy_optimal(3, 100) == 3);
  REQUIRE_THROWS_AS(occupancy_optimal(1, 2), std::domain_error);
  REQUIRE_THROWS_AS(occupancy_optimal(3, -1), std::domain_error);

  const auto opt = DispersionScheme::optimal(3);
  REQUIRE(occupancy_pmf(opt, 2, 2) == 1.0);
  REQUIRE(occupancy_pmf(opt, 2, 1) == 0.0);
  REQUIRE(occupancy_pmf(opt, 5, 3) == 1.0);
  REQUIRE_THROWS_AS(occupancy_pmf(DispersionScheme::none(), 2, 1),
                    std::invalid_argument);
}

TEST_CASE("closed-form offspring pmfs at hand-computed points",
          "[distributions]") {
  // optimal d=2, lambda=1, p=1/2: survivor law (1/3, 2/3, 1/2) gives
  // the uniform triple (1/3, 1/3, 1/3)
  {
    const auto pmf = offspring_pmf(DispersionScheme::optimal(2), ModelParams(1.0, 0.5));
    REQUIRE(pmf.p.size() == 3);
    for (int y = 0; y <= 2; ++y)
      REQUIRE(pmf[y] == Catch::Approx(1.0 / 3.0).epsilon(1e-14));
    // mean 1: this point sits exactly on the critical curve
    REQUIRE(pmf[1] + 2.0 * pmf[2] == Catch::Approx(1.0).epsilon(1e-14));
  }
  // independent d=3, lambda=1, p=1/2: (1/3, 2/5, 1/5, 1/15)
  {
    const auto pmf =
        offspring_pmf(DispersionScheme::independent(3), ModelParams(1.0, 0.5));
    REQUIRE(pmf[0] == Catch::Approx(1.0 / 3.0).epsilon(1e-14));
    REQUIRE(pmf[1] == Catch::Approx(2.0 / 5.0).epsilon(1e-14));
    REQUIRE(pmf[2] == Catch::Approx(1.0 / 5.0).epsilon(1e-14));
    REQUIRE(pmf[3] == Catch::Approx(1.0 / 15.0).epsilon(1e-13));
  }
  // uniform d=2, lambda=1, p=1/2: p1 = (8 ln 2)/3 - 4/3, p2 = 2 - (8 ln 2)/3
  {
    const auto pmf = offspring_pmf(DispersionScheme::uniform(2), ModelParams(1.0, 0.5));
    const double t = 8.0 * std::log(2.0) / 3.0;
    REQUIRE(pmf[0] == Catch::Approx(1.0 / 3.0).epsilon(1e-14));
    REQUIRE(pmf[1] == Catch::Approx(t - 4.0 / 3.0).epsilon(1e-12));
    REQUIRE(pmf[2] == Catch::Approx(2.0 - t).epsilon(1e-12));
  }
  // uniform d=3, lambda=8, p=0.8: beta = 1/37
  {
    const auto pmf = offspring_pmf(DispersionScheme::uniform(3), ModelParams(8.0, 0.8));
    REQUIRE(pmf[0] == Catch::Approx(1.0 / 37.0).epsilon(1e-14));
  }
}

TEST_CASE("closed-form offspring pmfs normalize and match the series oracle",
          "[distributions]") {
  for (double lambda : grid_lambda)
    for (double p : {0.1, 0.3, 0.5, 0.7, 0.9}) {
      const ModelParams mp(lambda, p);
      for (int d : {2, 3})
        for (auto scheme : {DispersionScheme::optimal(d),
                            DispersionScheme::independent(d),
                            DispersionScheme::uniform(d)}) {
          const auto pmf = offspring_pmf(scheme, mp);
          REQUIRE(static_cast<int>(pmf.p.size()) == d + 1);
          REQUIRE_FALSE(pmf.truncated);
          double sum = 0.0;
          for (double v : pmf.p) {
            REQUIRE(v >= 0.0);
            REQUIRE(v <= 1.0);
            sum += v;
          }
          REQUIRE(sum == Catch::Approx(1.0).epsilon(1e-12));

          const auto oracle = offspring_pmf_series_oracle(scheme, mp, 1e-11);
          REQUIRE(oracle.truncated);
          for (int y = 0; y <= d; ++y)
            REQUIRE(pmf[y] == Catch::Approx(oracle[y]).margin(1e-9));
        }
    }
}

TEST_CASE("series oracle works beyond the closed-form range",
          "[distributions]") {
  const ModelParams mp(3.0, 0.4);
  const auto pmf = offspring_pmf_series_oracle(DispersionScheme::independent(5), mp);
  REQUIRE(pmf.p.size() == 6);
  double sum = 0.0;
  for (double v : pmf.p) sum += v;
  REQUIRE(sum == Catch::Approx(1.0).epsilon(1e-12));
  REQUIRE(pmf[0] == Catch::Approx(survivor_pmf(mp, 0)).epsilon(1e-12));

  REQUIRE_THROWS_AS(
      offspring_pmf_series_oracle(DispersionScheme::none(), mp),
      std::invalid_argument);
  REQUIRE_THROWS_AS(
      offspring_pmf_series_oracle(DispersionScheme::uniform(2), mp, 0.5),
      std::domain_error);
  REQUIRE_THROWS_AS(
      offspring_pmf_series_oracle(DispersionScheme::uniform(2), mp, 0.0),
      std::domain_error);
}

TEST_CASE("offspring pmf guards", "[distributions]") {
  REQUIRE_THROWS_AS(
      offspring_pmf(DispersionScheme::none(), ModelParams(1.0, 0.5)),
      std::invalid_argument);
  REQUIRE_THROWS_AS(
      offspring_pmf(DispersionScheme::uniform(4), ModelParams(1.0, 0.5)),
      unsupported_closed_form);

  REQUIRE_THROWS_AS(
      make_offspring_pmf({0.5, 0.6}, DispersionScheme::optimal(2)),
      std::domain_error);
  REQUIRE_THROWS_AS(
      make_offspring_pmf({-0.2, 1.2}, DispersionScheme::optimal(2)),
      std::domain_error);
  const auto ok = make_offspring_pmf({0.25, 0.25, 0.5}, DispersionScheme::optimal(2));
  REQUIRE(ok.max_children() == 2);
  REQUIRE(ok[-1] == 0.0);
  REQUIRE(ok[5] == 0.0);
}
