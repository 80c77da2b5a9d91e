#include "mslab/ftrl.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mslab {

namespace {

void validate(std::span<const double> G, double eta) {
  if (G.empty()) throw std::invalid_argument("FTRL: empty loss vector");
  if (!(eta > 0.0) || !std::isfinite(eta)) throw std::invalid_argument("FTRL: eta must be positive and finite");
  for (double g : G) {
    if (!std::isfinite(g)) throw std::invalid_argument("FTRL: non-finite loss entry");
  }
}

struct Root {
  double lambda;  // relative to the shifted vector g = G - min G
  int iterations;
  double residual;
};

// Solves sum_i (eta (g_i + lam))^-2 = 1 for lam > 0 where min_i g_i = 0.
// The left side is convex and decreasing in lam; it is >= 1 at lam = 1/eta
// (the minimal coordinate alone contributes 1) and <= 1 at sqrt(M)/eta.
Root shifted_root(std::span<const double> g, double eta) {
  const double m = static_cast<double>(g.size());
  auto eval = [&](double lam, double* deriv) {
    double f = -1.0;
    double d = 0.0;
    for (double gi : g) {
      const double inv = 1.0 / (eta * (gi + lam));
      f += inv * inv;
      d -= 2.0 * inv * inv / (gi + lam);
    }
    if (deriv) *deriv = d;
    return f;
  };

  double lo = 1.0 / eta;
  double hi = std::sqrt(m) / eta;
  double lam = lo;
  double d = 0.0;
  double f = eval(lam, &d);
  for (int it = 1; it <= kFtrlMaxIterations; ++it) {
    if (std::abs(f) <= kFtrlTolerance) return {lam, it - 1, std::abs(f)};
    if (f > 0.0) lo = lam; else hi = lam;
    double next = lam - f / d;
    if (!(next > lo && next < hi) || !std::isfinite(next)) next = 0.5 * (lo + hi);
    if (next == lam) {
      // no representable progress left; accept if within a few ulps of 1
      if (std::abs(f) <= 1e-14 * m) return {lam, it, std::abs(f)};
      next = 0.5 * (lo + hi);
      if (next == lam) break;
    }
    lam = next;
    f = eval(lam, &d);
  }
  if (std::abs(f) <= kFtrlTolerance) return {lam, kFtrlMaxIterations, std::abs(f)};
  throw FtrlError("FTRL dual root did not converge (residual " + std::to_string(std::abs(f)) + ")",
                  std::abs(f), kFtrlMaxIterations);
}

}  // namespace

FtrlSolution solve_tsallis_ftrl_detailed(std::span<const double> G, double eta) {
  validate(G, eta);
  if (G.size() == 1) {
    return {SimplexWeights::point_mass(1, 0), 1.0 / eta - G[0], 0, 0.0};
  }
  const double gmin = *std::min_element(G.begin(), G.end());
  std::vector<double> g(G.begin(), G.end());
  for (double& v : g) v -= gmin;
  const Root root = shifted_root(g, eta);
  std::vector<double> q(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double inv = 1.0 / (eta * (g[i] + root.lambda));
    q[i] = inv * inv;
  }
  return {SimplexWeights::normalize(std::move(q)), root.lambda - gmin, root.iterations, root.residual};
}

double ftrl_dual_root(std::span<const double> G, double eta) {
  return solve_tsallis_ftrl_detailed(G, eta).lambda;
}

SimplexWeights solve_tsallis_ftrl(const FtrlProblem& problem) {
  return solve_tsallis_ftrl_detailed(problem.shifted_losses, problem.eta).q;
}

double tsallis_objective(std::span<const double> q, std::span<const double> G, double eta) {
  double v = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) v += q[i] * G[i] - 2.0 * std::sqrt(q[i]) / eta;
  return v;
}

}  // namespace mslab
