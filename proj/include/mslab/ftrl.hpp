#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "mslab/core.hpp"

namespace mslab {

// argmin over the simplex of <q, G> - (2/eta) * sum_i sqrt(q_i).
struct FtrlProblem {
  std::vector<double> shifted_losses;  // G = L - B
  double eta = 1.0;
};

class FtrlError : public std::runtime_error {
 public:
  FtrlError(const std::string& what, double residual, int iterations)
      : std::runtime_error(what), residual_(residual), iterations_(iterations) {}
  double residual() const { return residual_; }
  int iterations() const { return iterations_; }

 private:
  double residual_;
  int iterations_;
};

struct FtrlSolution {
  SimplexWeights q;
  double lambda = 0.0;  // multiplier in the coordinates of the original G
  int iterations = 0;
  double residual = 0.0;  // |sum_i (eta (G_i + lambda))^-2 - 1| before renormalizing
};

inline constexpr int kFtrlMaxIterations = 200;
inline constexpr double kFtrlTolerance = 1e-12;

// The unique lambda > max_i(-G_i) with sum_i (eta (G_i + lambda))^-2 = 1.
double ftrl_dual_root(std::span<const double> G, double eta);

SimplexWeights solve_tsallis_ftrl(const FtrlProblem& problem);
FtrlSolution solve_tsallis_ftrl_detailed(std::span<const double> G, double eta);

// Objective <q, G> - (2/eta) sum sqrt(q_i); used by tests and diagnostics.
double tsallis_objective(std::span<const double> q, std::span<const double> G, double eta);

}  // namespace mslab
