#include "mslab/tv_oracle.hpp"

#include <cmath>
#include <random>
#include <string>

namespace mslab {

namespace {

// Neumaier's variant of compensated summation.
class KahanSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      c_ += (sum_ - t) + x;
    } else {
      c_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + c_; }

 private:
  double sum_ = 0.0;
  double c_ = 0.0;
};

std::vector<double> binomial_pmf(int n, double p) {
  std::vector<double> out(static_cast<std::size_t>(n + 1));
  for (int j = 0; j <= n; ++j) {
    const double log_choose = std::lgamma(n + 1.0) - std::lgamma(j + 1.0) - std::lgamma(n - j + 1.0);
    double v = log_choose;
    v += j == 0 ? 0.0 : j * std::log(p);
    v += j == n ? 0.0 : (n - j) * std::log1p(-p);
    out[static_cast<std::size_t>(j)] = (p == 0.0) ? (j == 0 ? 1.0 : 0.0) : std::exp(v);
  }
  return out;
}

void check_budget(const LrEventSpec& spec) {
  const double size = std::pow(spec.n + 1.0, spec.k);
  if (size > kEnumerationBudget) {
    throw EnumerationBudgetError("count space of size " + std::to_string(size) +
                                 " exceeds the enumeration budget; use lr_event_gap_mc instead");
  }
}

// Visits every count vector in lexicographic order.
template <class F>
void for_each_count(const LrEventSpec& spec, F&& visit) {
  CountVector n(static_cast<std::size_t>(spec.k), 0);
  for (;;) {
    visit(n);
    int h = 0;
    while (h < spec.k && n[static_cast<std::size_t>(h)] == spec.n) n[static_cast<std::size_t>(h++)] = 0;
    if (h == spec.k) return;
    ++n[static_cast<std::size_t>(h)];
  }
}

// Relative slack for deciding the strict inequality defining E; exact ties
// (e.g. k = 2, N = 1, n = (0, 1)) must land outside E regardless of rounding.
constexpr double kTieTolerance = 1e-12;

bool in_event(double lr_sum, double threshold) { return lr_sum > threshold * (1.0 + kTieTolerance); }

}  // namespace

double LrEventSpec::kappa() const { return std::log((1.0 - delta) / (1.0 + delta)); }

void LrEventSpec::validate() const {
  if (k < 1) throw std::invalid_argument("LrEventSpec: need k >= 1");
  if (n < 0) throw std::invalid_argument("LrEventSpec: need N >= 0");
  if (!(delta >= 0.0 && delta < 0.5)) throw std::invalid_argument("LrEventSpec: Delta must lie in [0, 1/2)");
}

double count_pmf(const LrEventSpec& spec, int env_index, const CountVector& counts) {
  if (static_cast<int>(counts.size()) != spec.k) throw std::invalid_argument("count_pmf: count vector has wrong length");
  if (env_index < 0 || env_index > spec.k) throw std::invalid_argument("count_pmf: env index out of range");
  const auto fair = binomial_pmf(spec.n, 0.5);
  const auto biased = binomial_pmf(spec.n, 0.5 * (1.0 - spec.delta));
  double p = 1.0;
  for (int h = 0; h < spec.k; ++h) {
    const int c = counts[static_cast<std::size_t>(h)];
    if (c < 0 || c > spec.n) throw std::invalid_argument("count_pmf: count outside [0, N]");
    p *= (h + 1 == env_index ? biased : fair)[static_cast<std::size_t>(c)];
  }
  return p;
}

double exact_tv(const LrEventSpec& spec) {
  spec.validate();
  check_budget(spec);
  const auto fair = binomial_pmf(spec.n, 0.5);
  // P_{E_i}(n) = P_0(n) * r(n_i) with r(c) = (1-D)^c (1+D)^(N-c)
  std::vector<double> r(static_cast<std::size_t>(spec.n + 1));
  for (int c = 0; c <= spec.n; ++c) {
    r[static_cast<std::size_t>(c)] = std::pow(1.0 - spec.delta, c) * std::pow(1.0 + spec.delta, spec.n - c);
  }
  KahanSum total;
  for_each_count(spec, [&](const CountVector& n) {
    double p0 = 1.0;
    double mix = 0.0;
    for (int c : n) {
      p0 *= fair[static_cast<std::size_t>(c)];
      mix += r[static_cast<std::size_t>(c)];
    }
    const double q = p0 * mix / spec.k;
    if (q > p0) total.add(q - p0);
  });
  return total.value();
}

double lr_event_gap_exact(const LrEventSpec& spec) {
  spec.validate();
  check_budget(spec);
  const double kappa = spec.kappa();
  const double threshold = spec.k * std::pow(1.0 + spec.delta, -spec.n);
  const auto fair = binomial_pmf(spec.n, 0.5);
  const auto biased = binomial_pmf(spec.n, 0.5 * (1.0 - spec.delta));
  KahanSum gap;
  for_each_count(spec, [&](const CountVector& n) {
    double lr = 0.0;
    for (int c : n) lr += std::exp(kappa * c);
    if (!in_event(lr, threshold)) return;
    double rest = 1.0;
    for (std::size_t h = 1; h < n.size(); ++h) rest *= fair[static_cast<std::size_t>(n[h])];
    const double p1 = biased[static_cast<std::size_t>(n[0])] * rest;
    const double p0 = fair[static_cast<std::size_t>(n[0])] * rest;
    gap.add(p1 - p0);
  });
  return gap.value();
}

McEstimate lr_event_gap_mc(const LrEventSpec& spec, std::int64_t trials, Rng& rng) {
  spec.validate();
  if (trials < 1000) throw std::invalid_argument("lr_event_gap_mc: need at least 1000 trials");
  const double kappa = spec.kappa();
  const double threshold = spec.k * std::pow(1.0 + spec.delta, -spec.n);
  const auto fair = binomial_pmf(spec.n, 0.5);
  std::vector<double> term(static_cast<std::size_t>(spec.n + 1));
  for (int c = 0; c <= spec.n; ++c) term[static_cast<std::size_t>(c)] = std::exp(kappa * c);

  // sum over `coords` i.i.d. Bin(N, 1/2) counts of exp(kappa n), via a
  // multinomial histogram drawn with conditional binomials
  auto fair_block = [&](int coords) {
    double s = 0.0;
    std::int64_t left = coords;
    double mass_left = 1.0;
    for (int c = 0; c <= spec.n && left > 0; ++c) {
      const double pc = fair[static_cast<std::size_t>(c)];
      std::int64_t cnt;
      if (c == spec.n || pc >= mass_left) {
        cnt = left;
      } else {
        std::binomial_distribution<std::int64_t> d(left, std::min(1.0, pc / mass_left));
        cnt = d(rng);
      }
      s += static_cast<double>(cnt) * term[static_cast<std::size_t>(c)];
      left -= cnt;
      mass_left -= pc;
    }
    return s;
  };

  std::binomial_distribution<int> biased_coord(spec.n, 0.5 * (1.0 - spec.delta));
  std::int64_t hits0 = 0;
  std::int64_t hits1 = 0;
  for (std::int64_t t = 0; t < trials; ++t) {
    if (in_event(fair_block(spec.k), threshold)) ++hits0;
  }
  for (std::int64_t t = 0; t < trials; ++t) {
    const double first = term[static_cast<std::size_t>(biased_coord(rng))];
    if (in_event(first + fair_block(spec.k - 1), threshold)) ++hits1;
  }
  const double n = static_cast<double>(trials);
  const double p0 = hits0 / n;
  const double p1 = hits1 / n;
  return {p1 - p0, std::sqrt(p0 * (1.0 - p0) / n + p1 * (1.0 - p1) / n)};
}

double mgf_closed_form(const LrEventSpec& spec, int env_j, int coordinate_i, int power_m) {
  if (power_m < 1 || power_m > 3) throw std::invalid_argument("mgf_closed_form: m must be 1, 2 or 3");
  const double d = spec.delta;
  const double denom = std::pow(2.0 * std::pow(1.0 + d, power_m), spec.n);
  const int e = env_j == coordinate_i ? power_m + 1 : power_m;
  return std::pow(std::pow(1.0 + d, e) + std::pow(1.0 - d, e), spec.n) / denom;
}

double null_variance_closed_form(const LrEventSpec& spec) {
  const double d = spec.delta;
  return (std::pow(1.0 + d * d, spec.n) - 1.0) / std::pow(1.0 + d, 2.0 * spec.n);
}

double analytic_bound(const LrEventSpec& spec) {
  if (spec.k < 2) throw std::invalid_argument("analytic_bound: need k >= 2");
  const double s = spec.delta * spec.delta * spec.n;
  const double k = spec.k;
  const double v = 8.0 * std::exp(3.0 * s) / std::sqrt(k) + 8.0 * std::exp(5.0 * s) / std::sqrt(k - 1.0) +
                   std::exp(s) / std::sqrt(k - 1.0);
  return std::min(1.0, v);
}

int max_feasible_n(int k, double delta) {
  if (k < 3) return 0;
  return static_cast<int>(std::floor(std::log(k - 1.0) / (20.0 * delta * delta)));
}

}  // namespace mslab
