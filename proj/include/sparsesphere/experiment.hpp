#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sparsesphere/da_solver.hpp"
#include "sparsesphere/design.hpp"
#include "sparsesphere/ladder_profile.hpp"
#include "sparsesphere/sphere_kernel.hpp"
#include "sparsesphere/ww_solver.hpp"

namespace sparsesphere {

/// "builtin" for the embedded catalogue, otherwise a manifest path.
/// max_level < 0 keeps every level.
DesignLadder load_ladder(const std::string& source, int max_level = -1);

/// A ladder with its factored Gram matrix and the gamma = 1 calibration.
class Experiment {
 public:
  Experiment(DesignLadder ladder, double r);

  const LadderSolver& solver() const noexcept { return solver_; }
  const DesignLadder& ladder() const noexcept { return solver_.ladder(); }
  const LadderProfile& unit_profile() const noexcept { return unit_profile_; }
  const CalibrationResult& calibration() const noexcept { return calibration_; }
  double r() const noexcept { return solver_.params().r(); }

  std::vector<LadderProfile> profiles(const SpaceParams& space) const;
  SeparableItems items(const SpaceParams& space) const;
  WwParams ww_params(const SpaceParams& space, double eta = 0.5) const;

 private:
  LadderSolver solver_;
  LadderProfile unit_profile_;
  CalibrationResult calibration_;
};

/// Smallest cumulative cost among steps with error <= err.
std::optional<std::uint64_t> cost_for_error(const DaTrace& trace, double err);
/// Error of the last step with cumulative cost <= n.
std::optional<double> error_at_cost(const DaTrace& trace, std::uint64_t n);

/// Least-squares slope of log y against log x.
double log_log_slope(std::span<const double> x, std::span<const double> y);
/// log_log_slope of Error against Cost over the last `count` steps.
double tail_slope(const DaTrace& trace, std::size_t count);

/// Writes through a temporary file in the same directory and renames it.
void write_file_atomic(const std::string& path, const std::function<void(std::ostream&)>& body);

/// Compact number rendering for file names, e.g. 0.5 -> "0.5", 3 -> "3".
std::string name_number(double v);

}  // namespace sparsesphere
