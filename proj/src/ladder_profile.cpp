#include "sparsesphere/ladder_profile.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "sparsesphere/errors.hpp"

namespace sparsesphere {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kSingularPivot = 1e-14;

double residual_inf(const VectorXd& w, const Eigen::Ref<const MatrixXd>& gram, double gamma) {
  const VectorXd kw = (gamma * (gram * w)).array() + w.sum();
  return (kw.array() - 1.0).abs().maxCoeff();
}

void clamp_e2(WeightSolution& sol) {
  if (!(sol.e2 >= 0.0 && sol.e2 <= 1.0)) {
    sol.clamped = true;
    sol.e2 = std::isnan(sol.e2) ? 1.0 : std::clamp(sol.e2, 0.0, 1.0);
  }
}

WeightSolution least_squares(const Eigen::Ref<const MatrixXd>& gram, double gamma) {
  const Index n = gram.rows();
  MatrixXd k = (gamma * gram).array() + 1.0;
  Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod;
  cod.setThreshold(kLeastSquaresCutoff);
  cod.compute(k);
  WeightSolution sol;
  sol.method = SolveMethod::kLeastSquares;
  sol.weights = cod.solve(VectorXd::Ones(n));
  sol.e2_from_sum = 1.0 - sol.weights.sum();
  MatrixXd g = gram;
  sol.e2 = worst_case_e2(sol.weights, g, gamma);
  sol.residual = residual_inf(sol.weights, gram, gamma);
  clamp_e2(sol);
  return sol;
}

// Solve using a lower Cholesky factor L of the series Gram block.
WeightSolution solve_with_factor(const Eigen::Ref<const MatrixXd>& gram,
                                 const Eigen::Ref<const MatrixXd>& factor, double gamma) {
  const Index n = gram.rows();
  // A pivot this small means the block is numerically singular.
  const auto diag = factor.diagonal().array().square();
  if (!(diag.minCoeff() > kSingularPivot * diag.maxCoeff())) return least_squares(gram, gamma);
  VectorXd u = VectorXd::Ones(n);
  factor.triangularView<Eigen::Lower>().solveInPlace(u);
  factor.triangularView<Eigen::Lower>().adjoint().solveInPlace(u);
  const double s = u.sum();

  WeightSolution sol;
  sol.method = SolveMethod::kCholesky;
  sol.weights = u / (gamma + s);
  sol.e2 = gamma / (gamma + s);
  sol.e2_from_sum = 1.0 - sol.weights.sum();
  sol.residual = residual_inf(sol.weights, gram, gamma);
  if (!std::isfinite(s) || !(s > 0.0) || !(sol.residual <= kResidualFallback)) {
    return least_squares(gram, gamma);
  }
  clamp_e2(sol);
  return sol;
}

WeightSolution solve_block(const Eigen::Ref<const MatrixXd>& gram, double gamma) {
  Eigen::LLT<MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success) return least_squares(gram, gamma);
  return solve_with_factor(gram, llt.matrixLLT(), gamma);
}

void append_level(LadderProfile& profile, WeightSolution sol, std::size_t n, std::size_t nu) {
  unsigned flags = kLevelOk;
  if (sol.method == SolveMethod::kLeastSquares) flags |= kLevelLeastSquares;
  if (sol.clamped) flags |= kLevelClamped;
  double delta2 = 0.0;
  if (profile.e2.empty()) {
    delta2 = 1.0 - sol.e2;
  } else {
    delta2 = profile.e2.back() - sol.e2;
  }
  if (!(delta2 > 0.0)) {
    flags |= kLevelDegenerate | kLevelTerminal;
    delta2 = 0.0;
  }
  profile.weights.push_back(std::move(sol.weights));
  profile.e2.push_back(sol.e2);
  profile.delta2.push_back(delta2);
  profile.n.push_back(n);
  profile.nu.push_back(nu);
  profile.flags.push_back(flags);
  profile.residuals.push_back(sol.residual);
}

}  // namespace

std::string flag_text(unsigned flags) {
  if (flags == kLevelOk) return "ok";
  std::string out;
  auto add = [&](unsigned bit, const char* name) {
    if (flags & bit) {
      if (!out.empty()) out += '|';
      out += name;
    }
  };
  add(kLevelLeastSquares, "lsq");
  add(kLevelClamped, "clamped");
  add(kLevelDegenerate, "degenerate");
  add(kLevelTerminal, "terminal");
  return out;
}

int LadderProfile::usable_levels() const noexcept {
  for (std::size_t j = 0; j < flags.size(); ++j) {
    if (flags[j] & kLevelTerminal) return static_cast<int>(j);
  }
  return levels();
}

double worst_case_e2(const VectorXd& weights, const MatrixXd& series_gram, double gamma) {
  if (weights.size() != series_gram.rows()) throw ContractError("worst_case_e2: size mismatch");
  const double defect = 1.0 - weights.sum();
  return defect * defect + gamma * weights.dot(series_gram * weights);
}

WeightSolution optimal_weights(std::span<const SpherePoint> points, const KernelParams& params) {
  if (points.empty()) throw ContractError("optimal_weights: empty point set");
  const MatrixXd gram = series_gram(points, params);
  return solve_block(gram, params.gamma());
}

double qmc_error(std::span<const SpherePoint> points, const KernelParams& params) {
  if (points.empty()) throw ContractError("qmc_error: empty point set");
  const MatrixXd gram = series_gram(points, params);
  const double m = static_cast<double>(points.size());
  return params.gamma() * gram.sum() / (m * m);
}

LadderSolver::LadderSolver(DesignLadder ladder, KernelParams params)
    : ladder_(std::move(ladder)), params_(std::move(params)) {
  gram_ = series_gram(ladder_.points(), params_);
  full_factor_.compute(gram_);
  full_factor_ok_ = full_factor_.info() == Eigen::Success;
}

WeightSolution LadderSolver::solve_level(int level, double gamma) const {
  const auto n = static_cast<Index>(ladder_.n().at(static_cast<std::size_t>(level)));
  const auto block = gram_.topLeftCorner(n, n);
  if (full_factor_ok_) {
    return solve_with_factor(block, full_factor_.matrixLLT().topLeftCorner(n, n), gamma);
  }
  return solve_block(block, gamma);
}

LadderProfile LadderSolver::profile(double gamma) const {
  // Validates gamma.
  (void)params_.with_gamma(gamma);
  LadderProfile profile;
  profile.r = params_.r();
  profile.gamma = gamma;
  for (int j = 0; j < ladder_.levels(); ++j) {
    append_level(profile, solve_level(j, gamma), ladder_.n()[static_cast<std::size_t>(j)],
                 ladder_.nu()[static_cast<std::size_t>(j)]);
    if (profile.flags.back() & kLevelTerminal) break;
  }
  return profile;
}

LadderProfile profile_ladder(const DesignLadder& ladder, const KernelParams& params) {
  return LadderSolver(ladder, params).profile(params.gamma());
}

LadderProfile delta_norm_scaling(const LadderProfile& base, const DesignLadder& ladder,
                                 double gamma) {
  return profile_ladder(ladder, KernelParams(base.r, gamma));
}

CalibrationResult calibrate(const LadderProfile& profile, double r) {
  if (profile.usable_levels() < 2) {
    throw ContractError("calibrate: profile needs at least two usable levels");
  }
  CalibrationResult cal;
  cal.D = std::pow(2.0, -r / 2.0);
  cal.rho = 2.0 / r;
  cal.per_level_ratios.assign(static_cast<std::size_t>(profile.usable_levels()), 0.0);
  const double sqrt_gamma = std::sqrt(profile.gamma);
  for (int j = 1; j < profile.usable_levels(); ++j) {
    const double ratio = std::sqrt(profile.delta2[static_cast<std::size_t>(j)]) /
                         (sqrt_gamma * std::pow(cal.D, j));
    cal.per_level_ratios[static_cast<std::size_t>(j)] = ratio;
    cal.C = std::max(cal.C, ratio);
  }
  for (int j = 1; j < profile.levels(); ++j) {
    // (j+1) D^{j rho} reaches exactly 1 at j = 1 for rho = 2/r.
    if ((j + 1) * std::pow(cal.D, j * cal.rho) > 1.0 + 1e-12) {
      cal.growth_criterion_ok = false;
      cal.growth_violations.push_back(j);
    }
  }
  return cal;
}

bool decay_criterion_holds(const LadderProfile& profile, double C, double D) {
  const double sqrt_gamma = std::sqrt(profile.gamma);
  for (int j = 1; j < profile.usable_levels(); ++j) {
    const double norm = std::sqrt(profile.delta2[static_cast<std::size_t>(j)]);
    if (norm > sqrt_gamma * C * std::pow(D, j) * (1.0 + 1e-12)) return false;
  }
  return true;
}

void write_profile_csv(std::ostream& out, const LadderProfile& profile) {
  out << "j,n_j,nu_j,e2,delta2,flag\n";
  char buf[160];
  for (int j = 0; j < profile.levels(); ++j) {
    const auto i = static_cast<std::size_t>(j);
    std::snprintf(buf, sizeof buf, "%d,%zu,%zu,%.17g,%.17g,", j, profile.n[i], profile.nu[i],
                  profile.e2[i], profile.delta2[i]);
    out << buf << flag_text(profile.flags[i]) << '\n';
  }
}

}  // namespace sparsesphere
