#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "mslab/rng.hpp"

namespace mslab {

// Parameters of the null-vs-mixture comparison: P_{E_0} against
// Q = (1/k) sum_i P_{E_i}, where under E_i the count n_i ~ Bin(N, (1-Delta)/2)
// and every other count is Bin(N, 1/2).
struct LrEventSpec {
  int k = 2;
  int n = 1;  // N, samples per coordinate
  double delta = 0.1;

  // ln((1 - Delta) / (1 + Delta))
  double kappa() const;
  void validate() const;
};

using CountVector = std::vector<int>;

inline constexpr double kEnumerationBudget = 1e7;

class EnumerationBudgetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Probability of the count vector under E_i (i = 0 is the null).
double count_pmf(const LrEventSpec& spec, int env_index, const CountVector& counts);

// (1/2) TV(P_{E_0}, Q) by enumeration of all (N+1)^k count vectors.
double exact_tv(const LrEventSpec& spec);

// P_{E_1}(E) - P_{E_0}(E) for E = {sum_h exp(kappa n_h) > k (1+Delta)^-N}.
double lr_event_gap_exact(const LrEventSpec& spec);

struct McEstimate {
  double estimate = 0.0;
  double standard_error = 0.0;
};

// Monte Carlo version. Counts are drawn as a multinomial histogram over
// {0..N} (sequential binomials), so the cost per trial is O(N), not O(k).
McEstimate lr_event_gap_mc(const LrEventSpec& spec, std::int64_t trials, Rng& rng);

// E_{E_j}[exp(m kappa n_i)] for m in {1, 2, 3}.
double mgf_closed_form(const LrEventSpec& spec, int env_j, int coordinate_i, int power_m);

// ((1 + Delta^2)^N - 1) / (1 + Delta)^{2N}
double null_variance_closed_form(const LrEventSpec& spec);

// min{1, 8 e^{3 D^2 N}/sqrt(k) + 8 e^{5 D^2 N}/sqrt(k-1) + e^{D^2 N}/sqrt(k-1)}
double analytic_bound(const LrEventSpec& spec);

// Largest N allowed at (k, Delta): floor(ln(k - 1) / (20 Delta^2)).
int max_feasible_n(int k, double delta);

}  // namespace mslab
