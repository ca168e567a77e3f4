#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "sparsesphere/sphere_kernel.hpp"

namespace sparsesphere {

/// An equal-weight point set on S^2 with its declared polynomial strength.
struct SphericalDesign {
  std::vector<SpherePoint> points;
  int strength = 0;
  std::string label;   // "L", "E", a polyhedron name, ...
  std::string source;  // file path or "builtin"

  std::size_t cardinality() const noexcept { return points.size(); }
};

/// Parses the design text format: one "x y z" row per point, '#' comments,
/// LF or CRLF line endings. Rejects points off the unit sphere and
/// duplicate points; LoadError messages name the offending line.
SphericalDesign parse_design(std::istream& in, int declared_strength,
                             const std::string& source = "<stream>");

SphericalDesign load_design(const std::filesystem::path& path, int declared_strength);

/// Canonical text form (17 significant digits). Reloading is bit-exact.
void write_design(std::ostream& out, const SphericalDesign& design);
void save_design(const std::filesystem::path& path, const SphericalDesign& design);

struct StrengthReport {
  /// residuals[l-1] = (1/m^2) sum_{h,i} P_l(x_h . x_i), l = 1..strength.
  std::vector<double> residuals;
  double max_residual = 0.0;
  double tolerance = 0.0;
  bool passed = true;
};

inline constexpr double kDefaultStrengthTolerance = 1e-9;

/// Checks the declared strength via the addition theorem: the design
/// integrates all degree-l harmonics exactly iff the l-th residual is zero.
StrengthReport verify_strength(const SphericalDesign& design,
                               double tol = kDefaultStrengthTolerance);

/// Nested point sets S_0 c S_1 c ... built from a sequence of designs
/// sharing the north pole. S_j is the first n_j entries of points().
class DesignLadder {
 public:
  int levels() const noexcept { return static_cast<int>(n_.size()); }
  int max_level() const noexcept { return levels() - 1; }

  const std::vector<SphericalDesign>& designs() const noexcept { return designs_; }
  std::span<const SpherePoint> points() const noexcept { return points_; }
  std::span<const SpherePoint> cumulative_points(int level) const;

  /// n_j = |S_j|.
  const std::vector<std::size_t>& n() const noexcept { return n_; }
  /// nu_j = n_j - n_{j-1}, nu_0 = n_0.
  const std::vector<std::size_t>& nu() const noexcept { return nu_; }

  /// Notes raised while building, e.g. designs rotated onto the pole.
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }

 private:
  friend DesignLadder build_ladder(std::vector<SphericalDesign> designs);

  std::vector<SphericalDesign> designs_;
  std::vector<SpherePoint> points_;
  std::vector<std::size_t> n_;
  std::vector<std::size_t> nu_;
  std::vector<std::string> warnings_;
};

/// Cumulative unions of the designs. The pole appears once; a design without
/// the pole is rotated so its first point lands there (recorded as a
/// warning). Any other point shared between designs raises LadderError.
DesignLadder build_ladder(std::vector<SphericalDesign> designs);

/// Deepest level available from builtin_ladder().
int builtin_catalogue_depth();

/// Ladder from the embedded catalogue, levels 0..max_level. Level 0 is the
/// pole, level 1 the antipodal pair, higher levels approximate designs with
/// roughly 2^j points. Throws CapacityError past the catalogue depth.
DesignLadder builtin_ladder(int max_level);

/// Named built-in designs: "pole", "antipodal", "tetrahedron", "octahedron",
/// "icosahedron", and "level02".."level11" for the catalogue entries.
SphericalDesign builtin_design(const std::string& name);
std::vector<std::string> builtin_design_names();

/// Ladder manifest: one "<path-or-builtin:name> <strength>" per line, '#'
/// comments. Relative paths resolve against the manifest's directory.
DesignLadder load_manifest(const std::filesystem::path& manifest);

/// Rotation taking `from` onto the north pole, applied to every point; the
/// image of `from` is set to exactly (0,0,1).
std::vector<SpherePoint> rotate_to_pole(std::span<const SpherePoint> points, std::size_t from);

}  // namespace sparsesphere
