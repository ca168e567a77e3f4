#include "sparsesphere/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "sparsesphere/errors.hpp"

namespace sparsesphere {

DesignLadder load_ladder(const std::string& source, int max_level) {
  if (source == "builtin") {
    return builtin_ladder(max_level < 0 ? builtin_catalogue_depth() : max_level);
  }
  DesignLadder full = load_manifest(source);
  if (max_level < 0 || max_level >= full.levels()) return full;
  std::vector<SphericalDesign> designs(full.designs().begin(),
                                       full.designs().begin() + max_level + 1);
  return build_ladder(std::move(designs));
}

namespace {

LadderProfile unit_profile_of(const LadderSolver& solver) { return solver.profile(1.0); }

}  // namespace

Experiment::Experiment(DesignLadder ladder, double r)
    : solver_(std::move(ladder), KernelParams(r, 1.0)),
      unit_profile_(unit_profile_of(solver_)),
      calibration_(calibrate(unit_profile_, r)) {}

std::vector<LadderProfile> Experiment::profiles(const SpaceParams& space) const {
  return profiles_for_space(solver_, space);
}

SeparableItems Experiment::items(const SpaceParams& space) const {
  const auto p = profiles(space);
  return SeparableItems::from_profiles(p);
}

WwParams Experiment::ww_params(const SpaceParams& space, double eta) const {
  return WwParams::from_calibration(calibration_, space.gammas(), eta);
}

std::optional<std::uint64_t> cost_for_error(const DaTrace& trace, double err) {
  for (const auto& s : trace.steps)
    if (s.error <= err) return s.cost_cum;
  return std::nullopt;
}

std::optional<double> error_at_cost(const DaTrace& trace, std::uint64_t n) {
  std::optional<double> out;
  for (const auto& s : trace.steps) {
    if (s.cost_cum > n) break;
    out = s.error;
  }
  return out;
}

double log_log_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw ContractError("log_log_slope: need at least two paired samples");
  }
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

double tail_slope(const DaTrace& trace, std::size_t count) {
  const std::size_t n = trace.steps.size();
  if (count > n) count = n;
  std::vector<double> x, y;
  for (std::size_t i = n - count; i < n; ++i) {
    x.push_back(static_cast<double>(trace.steps[i].cost_cum));
    y.push_back(trace.steps[i].error);
  }
  return log_log_slope(x, y);
}

void write_file_atomic(const std::string& path, const std::function<void(std::ostream&)>& body) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw LoadError("cannot open " + tmp.string() + " for writing");
    body(out);
    out.flush();
    if (!out) throw LoadError("write to " + tmp.string() + " failed");
  }
  fs::rename(tmp, target);
}

std::string name_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

}  // namespace sparsesphere
