#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sparsesphere/design.hpp"
#include "sparsesphere/sphere_kernel.hpp"

namespace sparsesphere {

enum class SolveMethod { kCholesky, kLeastSquares };

/// Optimal weights for one point set.
struct WeightSolution {
  Eigen::VectorXd weights;
  /// Squared worst-case error of the returned weights, clamped to [0, 1].
  double e2 = 1.0;
  /// 1 - sum(w); equals e2 at the exact optimum.
  double e2_from_sum = 1.0;
  /// max |K w - 1|.
  double residual = 0.0;
  SolveMethod method = SolveMethod::kCholesky;
  bool clamped = false;
};

/// Least-squares cutoff relative to the largest singular value.
inline constexpr double kLeastSquaresCutoff = 1e-12;
/// Primary solves whose residual exceeds this fall back to least squares.
inline constexpr double kResidualFallback = 1e-6;

/// Solves K w = 1 with K_{hi} = 1 + gamma A_r(x_h . x_i).
///
/// K = 1 1^T + gamma G with G the series Gram matrix, which is positive
/// definite for distinct points. With u = G^{-1} 1 and s = 1^T u the
/// solution is w = u / (gamma + s) and the squared error 1 - sum(w) equals
/// gamma / (gamma + s), which is evaluated directly to avoid cancellation.
/// A failed Cholesky factorization of G, or a residual above
/// kResidualFallback, switches to a minimum-norm least-squares solve of K.
WeightSolution optimal_weights(std::span<const SpherePoint> points, const KernelParams& params);

/// Squared worst-case error of arbitrary weights,
///   1 - 2 sum(w) + w^T K w = (1 - sum w)^2 + gamma w^T G w.
double worst_case_e2(const Eigen::VectorXd& weights, const Eigen::MatrixXd& series_gram,
                     double gamma);

/// Squared worst-case error of the equal-weight rule, gamma/m^2 sum A_r(x_h.x_i).
double qmc_error(std::span<const SpherePoint> points, const KernelParams& params);

enum LevelFlag : unsigned {
  kLevelOk = 0,
  kLevelLeastSquares = 1u << 0,
  kLevelClamped = 1u << 1,
  kLevelDegenerate = 1u << 2,  // e2 did not decrease
  kLevelTerminal = 1u << 3,    // delta2 clamped to 0; nothing profiled beyond
};

std::string flag_text(unsigned flags);

/// Per-level optimal rules q_j on S_j and the orthogonal increments
/// delta_j = q_j - q_{j-1} (delta_0 = q_0), whose squared norms telescope:
/// sum_{i<=j} delta2[i] + e2[j] = 1.
struct LadderProfile {
  double r = 3.0;
  double gamma = 1.0;
  std::vector<Eigen::VectorXd> weights;
  std::vector<double> e2;
  std::vector<double> delta2;
  std::vector<std::size_t> n;
  std::vector<std::size_t> nu;
  std::vector<unsigned> flags;
  std::vector<double> residuals;

  int levels() const noexcept { return static_cast<int>(e2.size()); }
  /// Levels with a positive increment, i.e. before the first terminal level.
  int usable_levels() const noexcept;
};

/// Series Gram matrix of a whole ladder plus its Cholesky factor. Every
/// S_j is a leading block of the ladder point list, so the leading
/// n_j x n_j block of the factor is the factor for level j, and neither
/// depends on gamma.
class LadderSolver {
 public:
  LadderSolver(DesignLadder ladder, KernelParams params);

  const DesignLadder& ladder() const noexcept { return ladder_; }
  const KernelParams& params() const noexcept { return params_; }
  const Eigen::MatrixXd& gram() const noexcept { return gram_; }

  WeightSolution solve_level(int level, double gamma) const;

  /// Profiles every level at the given weight, stopping after a terminal level.
  LadderProfile profile(double gamma) const;

 private:
  DesignLadder ladder_;
  KernelParams params_;
  Eigen::MatrixXd gram_;
  Eigen::LLT<Eigen::MatrixXd> full_factor_;
  bool full_factor_ok_ = false;
};

LadderProfile profile_ladder(const DesignLadder& ladder, const KernelParams& params);

/// Re-solves every level with kernel 1 + gamma A_r; no scaling shortcut.
LadderProfile delta_norm_scaling(const LadderProfile& base, const DesignLadder& ladder,
                                 double gamma);

struct CalibrationResult {
  double C = 0.0;
  double D = 0.0;
  double rho = 0.0;
  /// ratio[j] = ||delta_j|| / (sqrt(gamma) D^j) for j >= 1; ratio[0] unused (0).
  std::vector<double> per_level_ratios;
  /// (j + 1) D^{j rho} <= 1 for every profiled level j >= 1.
  bool growth_criterion_ok = true;
  std::vector<int> growth_violations;
};

/// D = 2^{-r/2}, rho = 2/r, C = max_{j>=1} ||delta_j|| / (sqrt(gamma) D^j).
CalibrationResult calibrate(const LadderProfile& profile, double r);

/// ||delta_j|| <= sqrt(gamma) C D^j for all usable levels j >= 1.
bool decay_criterion_holds(const LadderProfile& profile, double C, double D);

/// CSV with header j,n_j,nu_j,e2,delta2,flag (17 significant digits).
void write_profile_csv(std::ostream& out, const LadderProfile& profile);

}  // namespace sparsesphere
