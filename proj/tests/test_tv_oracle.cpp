#include <doctest.h>

#include <cmath>
#include <random>

#include "mslab/tv_oracle.hpp"

using namespace mslab;

namespace {

double choose(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

double bin(int n, int c, double p) { return choose(n, c) * std::pow(p, c) * std::pow(1.0 - p, n - c); }

// Plain-loop enumeration of (P_1(E) - P_0(E), sum_{Q > P} (Q - P)) for k = 2.
std::pair<double, double> enumerate_k2(int n, double d) {
  const double thr = 2.0 * std::pow(1.0 + d, -n);
  const double kap = std::log((1.0 - d) / (1.0 + d));
  double gap = 0.0, tv = 0.0;
  for (int a = 0; a <= n; ++a) {
    for (int b = 0; b <= n; ++b) {
      const double p0 = bin(n, a, 0.5) * bin(n, b, 0.5);
      const double p1 = bin(n, a, 0.5 * (1 - d)) * bin(n, b, 0.5);
      const double p2 = bin(n, a, 0.5) * bin(n, b, 0.5 * (1 - d));
      const double lr = std::exp(kap * a) + std::exp(kap * b);
      if (lr > thr * (1 + 1e-12)) gap += p1 - p0;
      const double q = 0.5 * (p1 + p2);
      if (q > p0 * (1 + 1e-12)) tv += q - p0;
    }
  }
  return {gap, tv};
}

}  // namespace

TEST_CASE("parameter validation and kappa") {
  LrEventSpec s{2, 3, 0.25};
  CHECK(s.kappa() == doctest::Approx(std::log(0.75 / 1.25)));
  CHECK(s.kappa() < 0.0);
  CHECK_THROWS(LrEventSpec{2, 3, 0.5}.validate());
  CHECK_THROWS(LrEventSpec{0, 3, 0.1}.validate());
}

TEST_CASE("count pmf") {
  CHECK(count_pmf({1, 1, 0.5}, 1, {1}) == doctest::Approx(0.25));
  CHECK(count_pmf({2, 3, 0.0}, 1, {1, 2}) == doctest::Approx(bin(3, 1, 0.5) * bin(3, 2, 0.5)));
  CHECK(count_pmf({2, 3, 0.3}, 2, {1, 2}) == doctest::Approx(bin(3, 1, 0.5) * bin(3, 2, 0.35)));
  CHECK_THROWS(count_pmf({2, 3, 0.3}, 3, {1, 2}));
  CHECK_THROWS(count_pmf({2, 3, 0.3}, 1, {1, 4}));

  for (int k = 1; k <= 3; ++k) {
    for (int n = 0; n <= 6; ++n) {
      for (double d : {0.0, 0.05, 0.25, 0.45}) {
        const LrEventSpec s{k, n, d};
        for (int i = 0; i <= k; ++i) {
          double total = 0.0;
          CountVector c(static_cast<std::size_t>(k), 0);
          for (;;) {
            total += count_pmf(s, i, c);
            int h = 0;
            while (h < k && c[h] == n) c[h++] = 0;
            if (h == k) break;
            ++c[h];
          }
          REQUIRE(std::abs(total - 1.0) <= 1e-12);
        }
      }
    }
  }
}

TEST_CASE("hand enumeration at k = 2, N = 1, Delta = 0.25") {
  // only n = (0, 0) has Q > P: Q = 0.3125 against P = 0.25; (0, 1) and
  // (1, 0) are exact ties
  const LrEventSpec s{2, 1, 0.25};
  CHECK(exact_tv(s) == doctest::Approx(0.0625).epsilon(1e-14));
  CHECK(lr_event_gap_exact(s) == doctest::Approx(0.0625).epsilon(1e-14));
}

TEST_CASE("k = 2, N = 2 against a plain enumeration") {
  const auto [gap, tv] = enumerate_k2(2, 0.25);
  CHECK(lr_event_gap_exact({2, 2, 0.25}) == doctest::Approx(gap).epsilon(1e-13));
  CHECK(exact_tv({2, 2, 0.25}) == doctest::Approx(tv).epsilon(1e-13));
  for (int n = 1; n <= 6; ++n) {
    const auto [g, t] = enumerate_k2(n, 0.1);
    CHECK(lr_event_gap_exact({2, n, 0.1}) == doctest::Approx(g).epsilon(1e-12));
    CHECK(exact_tv({2, n, 0.1}) == doctest::Approx(t).epsilon(1e-12));
  }
}

TEST_CASE("zero gap gives zero") {
  CHECK(std::abs(exact_tv({3, 4, 0.0})) <= 1e-15);
  CHECK(std::abs(lr_event_gap_exact({3, 4, 0.0})) <= 1e-15);
  Rng rng(1);
  const auto mc = lr_event_gap_mc({3, 4, 0.0}, 100000, rng);
  CHECK(std::abs(mc.estimate) <= 3.0 * mc.standard_error + 1e-12);
}

TEST_CASE("tv is in [0, 1] and non-decreasing in Delta") {
  double prev = 0.0;
  for (double d : {0.05, 0.1, 0.15, 0.2, 0.25}) {
    const double tv = exact_tv({3, 4, d});
    CHECK(tv >= 0.0);
    CHECK(tv <= 1.0);
    CHECK(tv >= prev - 1e-15);
    prev = tv;
  }
}

TEST_CASE("chain of bounds on the feasibility grid") {
  for (int k : {2, 3}) {
    for (int n = 1; n <= 6; ++n) {
      for (double d : {0.05, 0.1, 0.25}) {
        const LrEventSpec s{k, n, d};
        const double tv = exact_tv(s);
        const double gap = lr_event_gap_exact(s);
        CHECK(0.5 * tv <= gap + 1e-12);
        CHECK(tv <= gap + 1e-12);
      }
    }
  }
}

TEST_CASE("enumeration budget") {
  CHECK_THROWS_AS(exact_tv({8, 10, 0.1}), EnumerationBudgetError);
  CHECK_THROWS_AS(lr_event_gap_exact({8, 10, 0.1}), EnumerationBudgetError);
}

TEST_CASE("mgf closed forms") {
  const LrEventSpec s{4, 5, 0.25};
  CHECK(mgf_closed_form(s, 0, 1, 1) == doctest::Approx(std::pow(1.25, -5)));
  CHECK(mgf_closed_form(s, 1, 1, 1) == doctest::Approx(std::pow((1 + 0.0625) / 1.25, 5)));
  for (int m = 1; m <= 3; ++m) {
    CHECK(mgf_closed_form({4, 5, 0.0}, 1, 1, m) == doctest::Approx(1.0));
    CHECK(mgf_closed_form({4, 5, 0.0}, 0, 1, m) == doctest::Approx(1.0));
  }
  CHECK_THROWS(mgf_closed_form(s, 0, 1, 4));

  const double var = mgf_closed_form(s, 0, 1, 2) - std::pow(mgf_closed_form(s, 0, 1, 1), 2);
  CHECK(std::abs(var - null_variance_closed_form(s)) <= 1e-12);
  for (int n = 1; n <= 20; ++n) {
    for (double d : {0.05, 0.25, 0.45}) {
      const LrEventSpec t{2, n, d};
      const double v = mgf_closed_form(t, 0, 1, 2) - std::pow(mgf_closed_form(t, 0, 1, 1), 2);
      CHECK(std::abs(v - null_variance_closed_form(t)) <= 1e-12);
    }
  }
}

TEST_CASE("mgf closed forms match sampling") {
  const LrEventSpec s{4, 6, 0.3};
  std::mt19937_64 eng(99);
  const int draws = 1000000;
  for (bool same : {false, true}) {
    std::binomial_distribution<int> d(s.n, same ? 0.5 * (1 - s.delta) : 0.5);
    std::vector<double> sum(4, 0.0), sq(4, 0.0);
    for (int t = 0; t < draws; ++t) {
      const int c = d(eng);
      for (int m = 1; m <= 3; ++m) {
        const double v = std::exp(m * s.kappa() * c);
        sum[m] += v;
        sq[m] += v * v;
      }
    }
    for (int m = 1; m <= 3; ++m) {
      const double mean = sum[m] / draws;
      const double se = std::sqrt((sq[m] / draws - mean * mean) / draws);
      const double closed = mgf_closed_form(s, same ? 1 : 0, 1, m);
      CHECK(std::abs(mean - closed) <= 4.0 * se);
    }
  }
}

TEST_CASE("Monte Carlo gap agrees with enumeration") {
  Rng rng(7);
  for (const LrEventSpec& s : {LrEventSpec{2, 2, 0.25}, LrEventSpec{3, 5, 0.1}}) {
    const auto mc = lr_event_gap_mc(s, 1000000, rng);
    CHECK(std::abs(mc.estimate - lr_event_gap_exact(s)) <= 3.0 * mc.standard_error);
  }
  CHECK_THROWS(lr_event_gap_mc({2, 2, 0.25}, 10, rng));
}

TEST_CASE("analytic bound and feasibility") {
  const LrEventSpec s{30000, 8, 0.25};
  CHECK(analytic_bound(s) == doctest::Approx(0.779).epsilon(1e-3));
  CHECK(max_feasible_n(30000, 0.25) == 8);
  CHECK(analytic_bound({2, 1, 0.1}) == 1.0);
  CHECK_THROWS(analytic_bound({1, 1, 0.1}));
}

TEST_CASE("gap shrinks with k at fixed Delta^2 N") {
  Rng rng(8);
  McEstimate prev{1.0, 0.0};
  for (int k : {1 << 12, 1 << 14, 1 << 16}) {
    const auto mc = lr_event_gap_mc({k, 8, 0.25}, 10000, rng);
    CHECK(mc.estimate <= prev.estimate + 3.0 * std::hypot(mc.standard_error, prev.standard_error));
    prev = mc;
  }
}
