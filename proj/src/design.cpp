#include "sparsesphere/design.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "builtin_catalogue.hpp"
#include "sparsesphere/errors.hpp"

namespace sparsesphere {

namespace {

// Chord length below which two points are treated as the same point. For
// small separations chord and angle agree to O(angle^3).
constexpr double kDuplicateChord = 1e-10;

double chord(const SpherePoint& a, const SpherePoint& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  const double dz = a.z - b.z;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

bool is_pole(const SpherePoint& p) {
  return std::abs(p.x) <= kUnitNormTolerance && std::abs(p.y) <= kUnitNormTolerance &&
         std::abs(p.z - 1.0) <= kUnitNormTolerance;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    const std::size_t start = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t') ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

bool parse_double(std::string_view token, double& value) {
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  const auto* end = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(token.data(), end, value);
  return ec == std::errc() && ptr == end && std::isfinite(value);
}

// Finds points closer than kDuplicateChord using a sweep over z.
class PointIndex {
 public:
  // Returns the id of a stored point within kDuplicateChord of p, or -1.
  long find(const SpherePoint& p) const {
    for (auto it = by_z_.lower_bound(p.z - kDuplicateChord);
         it != by_z_.end() && it->first <= p.z + kDuplicateChord; ++it) {
      if (chord(points_[it->second], p) <= kDuplicateChord) {
        return static_cast<long>(ids_[it->second]);
      }
    }
    return -1;
  }

  void add(const SpherePoint& p, std::size_t id) {
    by_z_.emplace(p.z, points_.size());
    points_.push_back(p);
    ids_.push_back(id);
  }

 private:
  std::multimap<double, std::size_t> by_z_;
  std::vector<SpherePoint> points_;
  std::vector<std::size_t> ids_;
};

SphericalDesign from_coordinates(std::span<const double> xyz, int strength, std::string label) {
  SphericalDesign design;
  design.strength = strength;
  design.label = std::move(label);
  design.source = "builtin";
  for (std::size_t i = 0; i + 2 < xyz.size(); i += 3) {
    design.points.push_back(SpherePoint{xyz[i], xyz[i + 1], xyz[i + 2]});
  }
  return design;
}

SphericalDesign tetrahedron() {
  SphericalDesign d;
  d.points.push_back(kNorthPole);
  const double z = -1.0 / 3.0;
  const double rho = std::sqrt(8.0) / 3.0;
  for (int k = 0; k < 3; ++k) {
    const double phi = 2.0 * M_PI * k / 3.0;
    d.points.push_back(SpherePoint{rho * std::cos(phi), rho * std::sin(phi), z});
  }
  d.strength = 2;
  d.label = "tetrahedron";
  d.source = "builtin";
  return d;
}

SphericalDesign octahedron() {
  SphericalDesign d;
  d.points = {kNorthPole,          SpherePoint{1, 0, 0},  SpherePoint{0, 1, 0},
              SpherePoint{-1, 0, 0}, SpherePoint{0, -1, 0}, SpherePoint{0, 0, -1}};
  d.strength = 3;
  d.label = "octahedron";
  d.source = "builtin";
  return d;
}

SphericalDesign icosahedron() {
  // Vertex-up orientation: the poles plus two pentagonal rings at z = +-1/sqrt(5).
  SphericalDesign d;
  d.points.push_back(kNorthPole);
  const double z = 1.0 / std::sqrt(5.0);
  const double rho = 2.0 / std::sqrt(5.0);
  for (int k = 0; k < 5; ++k) {
    const double phi = 2.0 * M_PI * k / 5.0;
    d.points.push_back(SpherePoint{rho * std::cos(phi), rho * std::sin(phi), z});
  }
  for (int k = 0; k < 5; ++k) {
    const double phi = 2.0 * M_PI * (k + 0.5) / 5.0;
    d.points.push_back(SpherePoint{rho * std::cos(phi), rho * std::sin(phi), -z});
  }
  d.points.push_back(SpherePoint{0, 0, -1});
  d.strength = 5;
  d.label = "icosahedron";
  d.source = "builtin";
  return d;
}

}  // namespace

SphericalDesign parse_design(std::istream& in, int declared_strength, const std::string& source) {
  if (declared_strength < 0) throw ContractError("declared strength must be >= 0");
  SphericalDesign design;
  design.strength = declared_strength;
  design.source = source;
  std::vector<std::size_t> line_of_point;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto tokens = split_ws(body);
    double xyz[3];
    if (tokens.size() != 3 || !parse_double(tokens[0], xyz[0]) ||
        !parse_double(tokens[1], xyz[1]) || !parse_double(tokens[2], xyz[2])) {
      throw LoadError(source + ":" + std::to_string(line_no) +
                      ": expected three decimal coordinates \"x y z\"");
    }
    const double n2 = xyz[0] * xyz[0] + xyz[1] * xyz[1] + xyz[2] * xyz[2];
    if (!(std::abs(n2 - 1.0) <= kUnitNormTolerance)) {
      throw LoadError(source + ":" + std::to_string(line_no) + ": point not on unit sphere");
    }
    design.points.push_back(SpherePoint{xyz[0], xyz[1], xyz[2]});
    line_of_point.push_back(line_no);
  }
  if (design.points.empty()) throw LoadError(source + ": design contains no points");

  PointIndex index;
  for (std::size_t i = 0; i < design.points.size(); ++i) {
    const long dup = index.find(design.points[i]);
    if (dup >= 0) {
      throw LoadError(source + ":" + std::to_string(line_of_point[i]) + ": duplicate point (same as line " +
                      std::to_string(line_of_point[static_cast<std::size_t>(dup)]) + ")");
    }
    index.add(design.points[i], i);
  }
  return design;
}

SphericalDesign load_design(const std::filesystem::path& path, int declared_strength) {
  std::ifstream in(path);
  if (!in) throw LoadError(path.string() + ": cannot open design file");
  return parse_design(in, declared_strength, path.string());
}

void write_design(std::ostream& out, const SphericalDesign& design) {
  out << "# spherical design: m=" << design.cardinality() << " strength=" << design.strength;
  if (!design.label.empty()) out << " label=" << design.label;
  out << '\n';
  char buf[96];
  for (const auto& p : design.points) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g\n", p.x, p.y, p.z);
    out << buf;
  }
}

void save_design(const std::filesystem::path& path, const SphericalDesign& design) {
  std::ofstream out(path);
  if (!out) throw LoadError(path.string() + ": cannot open for writing");
  write_design(out, design);
}

StrengthReport verify_strength(const SphericalDesign& design, double tol) {
  StrengthReport report;
  report.tolerance = tol;
  const int t = design.strength;
  if (t <= 0) return report;

  const auto& pts = design.points;
  const std::size_t m = pts.size();
  std::vector<double> sums(static_cast<std::size_t>(t), 0.0);
  std::vector<double> p(static_cast<std::size_t>(t) + 1);
  for (std::size_t h = 0; h < m; ++h) {
    for (std::size_t i = h + 1; i < m; ++i) {
      const double z = detail::clamped_dot(pts[h], pts[i]);
      double p_prev = 1.0;
      double p_cur = z;
      sums[0] += z;
      for (int l = 1; l < t; ++l) {
        const double next = ((2.0 * l + 1.0) * z * p_cur - l * p_prev) / (l + 1.0);
        p_prev = p_cur;
        p_cur = next;
        sums[static_cast<std::size_t>(l)] += next;
      }
    }
  }
  const double m2 = static_cast<double>(m) * static_cast<double>(m);
  report.residuals.resize(static_cast<std::size_t>(t));
  for (int l = 0; l < t; ++l) {
    // Off-diagonal pairs counted twice; each diagonal term is P_l(1) = 1.
    const double r = (2.0 * sums[static_cast<std::size_t>(l)] + static_cast<double>(m)) / m2;
    report.residuals[static_cast<std::size_t>(l)] = r;
  }
  report.max_residual = *std::max_element(report.residuals.begin(), report.residuals.end());
  report.passed = report.max_residual <= tol;
  return report;
}

std::vector<SpherePoint> rotate_to_pole(std::span<const SpherePoint> points, std::size_t from) {
  if (from >= points.size()) throw ContractError("rotate_to_pole: index out of range");
  const SpherePoint a = points[from];
  std::vector<SpherePoint> out(points.begin(), points.end());
  // Axis k = a x e_z, sin(theta) = |k|, cos(theta) = a.z.
  const double kx = a.y;
  const double ky = -a.x;
  const double s = std::sqrt(kx * kx + ky * ky);
  const double c = a.z;
  if (s < 1e-15) {
    if (c < 0.0) {
      for (auto& p : out) p = SpherePoint{p.x, -p.y, -p.z};
    }
  } else {
    const double ux = kx / s;
    const double uy = ky / s;
    for (auto& p : out) {
      // Rodrigues with unit axis (ux, uy, 0).
      const double kv = ux * p.x + uy * p.y;
      const double cx = uy * p.z;
      const double cy = -ux * p.z;
      const double cz = ux * p.y - uy * p.x;
      p = SpherePoint{p.x * c + cx * s + ux * kv * (1.0 - c),
                      p.y * c + cy * s + uy * kv * (1.0 - c), p.z * c + cz * s};
    }
  }
  out[from] = kNorthPole;
  return out;
}

std::span<const SpherePoint> DesignLadder::cumulative_points(int level) const {
  if (level < 0 || level >= levels()) {
    throw ContractError("ladder level " + std::to_string(level) + " out of range");
  }
  return std::span<const SpherePoint>(points_.data(), n_[static_cast<std::size_t>(level)]);
}

DesignLadder build_ladder(std::vector<SphericalDesign> designs) {
  if (designs.empty()) throw LadderError("ladder needs at least one design");
  DesignLadder ladder;
  PointIndex index;
  ladder.points_.push_back(kNorthPole);
  index.add(kNorthPole, 0);

  for (std::size_t j = 0; j < designs.size(); ++j) {
    auto& design = designs[j];
    if (design.points.empty()) throw LadderError("design " + std::to_string(j) + " is empty");
    auto pole = std::find_if(design.points.begin(), design.points.end(), is_pole);
    if (pole == design.points.end()) {
      design.points = rotate_to_pole(design.points, 0);
      ladder.warnings_.push_back("level " + std::to_string(j) + " (" + design.source +
                                 "): no point at the north pole; rotated first point onto it");
      pole = design.points.begin();
    }
    const auto pole_pos = static_cast<std::size_t>(pole - design.points.begin());
    const std::size_t before = ladder.points_.size();
    for (std::size_t i = 0; i < design.points.size(); ++i) {
      if (i == pole_pos) continue;
      const auto& p = design.points[i];
      const long dup = index.find(p);
      if (dup >= 0) {
        throw LadderError("level " + std::to_string(j) + " (" + design.source + "): point " +
                          std::to_string(i) + " duplicates ladder point " + std::to_string(dup));
      }
      index.add(p, ladder.points_.size());
      ladder.points_.push_back(p);
    }
    const std::size_t added = ladder.points_.size() - before;
    const std::size_t nu = (j == 0) ? ladder.points_.size() : added;
    if (nu == 0) {
      throw LadderError("level " + std::to_string(j) + " (" + design.source +
                        ") adds no new points");
    }
    ladder.n_.push_back(ladder.points_.size());
    ladder.nu_.push_back(nu);
  }
  ladder.designs_ = std::move(designs);
  return ladder;
}

int builtin_catalogue_depth() { return 1 + static_cast<int>(detail::catalogue_entries().size()); }

std::vector<std::string> builtin_design_names() {
  std::vector<std::string> names{"pole", "antipodal", "tetrahedron", "octahedron", "icosahedron"};
  for (const auto& e : detail::catalogue_entries()) names.emplace_back(e.name);
  return names;
}

SphericalDesign builtin_design(const std::string& name) {
  if (name == "pole") {
    return SphericalDesign{{kNorthPole}, 0, "L", "builtin"};
  }
  if (name == "antipodal") {
    return SphericalDesign{{kNorthPole, SpherePoint{0, 0, -1}}, 1, "L", "builtin"};
  }
  if (name == "tetrahedron") return tetrahedron();
  if (name == "octahedron") return octahedron();
  if (name == "icosahedron") return icosahedron();
  for (const auto& e : detail::catalogue_entries()) {
    if (name == e.name) return from_coordinates(e.coordinates, e.strength, e.label);
  }
  throw LoadError("unknown built-in design \"" + name + "\"");
}

DesignLadder builtin_ladder(int max_level) {
  const int depth = builtin_catalogue_depth();
  if (max_level < 0 || max_level > depth) {
    throw CapacityError("built-in catalogue provides levels 0.." + std::to_string(depth) +
                        ", requested " + std::to_string(max_level));
  }
  std::vector<SphericalDesign> designs;
  designs.push_back(builtin_design("pole"));
  if (max_level >= 1) designs.push_back(builtin_design("antipodal"));
  const auto entries = detail::catalogue_entries();
  for (int j = 2; j <= max_level; ++j) {
    const auto& e = entries[static_cast<std::size_t>(j - 2)];
    designs.push_back(from_coordinates(e.coordinates, e.strength, e.label));
  }
  return build_ladder(std::move(designs));
}

DesignLadder load_manifest(const std::filesystem::path& manifest) {
  std::ifstream in(manifest);
  if (!in) throw LoadError(manifest.string() + ": cannot open manifest");
  const auto base = manifest.parent_path();
  std::vector<SphericalDesign> designs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto tokens = split_ws(body);
    int strength = -1;
    if (tokens.size() != 2 ||
        std::from_chars(tokens[1].data(), tokens[1].data() + tokens[1].size(), strength).ec !=
            std::errc() ||
        strength < 0) {
      throw LoadError(manifest.string() + ":" + std::to_string(line_no) +
                      ": expected \"<path-or-builtin:name> <strength>\"");
    }
    const std::string token(tokens[0]);
    constexpr std::string_view kBuiltin = "builtin:";
    if (token.starts_with(kBuiltin)) {
      auto design = builtin_design(token.substr(kBuiltin.size()));
      design.strength = strength;
      designs.push_back(std::move(design));
    } else {
      std::filesystem::path path(token);
      if (path.is_relative()) path = base / path;
      designs.push_back(load_design(path, strength));
    }
  }
  if (designs.empty()) throw LoadError(manifest.string() + ": manifest lists no designs");
  return build_ladder(std::move(designs));
}

}  // namespace sparsesphere
