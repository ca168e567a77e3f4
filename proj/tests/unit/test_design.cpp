#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "oracles.hpp"
#include "sparsesphere/design.hpp"
#include "sparsesphere/errors.hpp"

using namespace sparsesphere;

namespace {

SphericalDesign parse(const std::string& text, int t) {
  std::istringstream in(text);
  return parse_design(in, t, "mem");
}

std::string load_error(const std::string& text) {
  try {
    parse(text, 0);
  } catch (const LoadError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("parse single point and antipodal pair") {
  const auto one = parse("0 0 1\n", 0);
  CHECK(one.cardinality() == 1);
  CHECK(one.strength == 0);
  const auto two = parse("# pair\n0 0 1\r\n0 0 -1\r\n", 1);
  CHECK(two.cardinality() == 2);
  CHECK(verify_strength(two).passed);
}

TEST_CASE("load errors name the line") {
  CHECK(load_error("0 0 1\n0 0 2\n").find("mem:2") != std::string::npos);
  CHECK(load_error("0 0 2\n").find("point not on unit sphere") != std::string::npos);
  CHECK(load_error("0 0 1\n1 0 0\n0 0 1\n").find("duplicate point") != std::string::npos);
  CHECK(load_error("0 0\n").find("mem:1") != std::string::npos);
  CHECK(load_error("0 0 x\n") != "");
  CHECK(load_error("# only a comment\n") != "");
  CHECK_THROWS_AS(load_design("/nonexistent/design.txt", 1), LoadError);
}

TEST_CASE("verify_strength residuals") {
  const auto pole = builtin_design("pole");
  auto as_t1 = pole;
  as_t1.strength = 1;
  const auto rep = verify_strength(as_t1);
  CHECK_FALSE(rep.passed);
  CHECK(rep.residuals.at(0) == doctest::Approx(1.0));

  const auto oct = builtin_design("octahedron");
  CHECK(oct.cardinality() == 6);
  const auto r = verify_strength(oct);
  REQUIRE(r.residuals.size() == 3);
  for (double v : r.residuals) CHECK(std::abs(v) <= 1e-13);

  // Degree 4 is not integrated by the octahedron.
  auto oct4 = oct;
  oct4.strength = 4;
  CHECK_FALSE(verify_strength(oct4).passed);
}

TEST_CASE("every built-in design passes its declared strength") {
  for (const auto& name : builtin_design_names()) {
    const auto d = builtin_design(name);
    const auto rep = verify_strength(d, 1e-9);
    CHECK_MESSAGE(rep.passed, name);
    for (double v : rep.residuals) CHECK(v >= -1e-13);
    for (const auto& p : d.points) {
      CHECK(std::abs(p.x * p.x + p.y * p.y + p.z * p.z - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("built-in ladder") {
  const auto l0 = builtin_ladder(0);
  CHECK(l0.levels() == 1);
  CHECK(l0.nu().at(0) == 1);
  CHECK(l0.points()[0] == kNorthPole);

  const auto l1 = builtin_ladder(1);
  REQUIRE(l1.points().size() == 2);
  CHECK(l1.points()[1] == SpherePoint{0, 0, -1});
  CHECK(l1.nu().at(1) == 1);

  const auto l3 = builtin_ladder(3);
  CHECK(l3.n().at(3) >= 8);
  CHECK(l3.n().at(3) <= 32);

  const int depth = builtin_catalogue_depth();
  CHECK_THROWS_AS(builtin_ladder(depth + 1), CapacityError);

  const auto full = builtin_ladder(depth);
  std::size_t sum = 0;
  for (int j = 0; j < full.levels(); ++j) {
    sum += full.nu()[j];
    const std::size_t m = full.designs()[j].cardinality();
    if (j >= 1) {
      CHECK(full.n()[j] > full.n()[j - 1]);
      // 2^j <= m_j <= 2^j + 1 and n_j = 1 + sum (m_i - 1).
      CHECK(m >= (std::size_t{1} << j));
      CHECK(m <= (std::size_t{1} << j) + 1);
      CHECK(full.n()[j] == full.n()[j - 1] + m - 1);
    }
    const auto s = full.cumulative_points(j);
    CHECK(s.size() == full.n()[j]);
    CHECK(std::count(s.begin(), s.end(), kNorthPole) == 1);
  }
  CHECK(sum == full.n().back());
}

TEST_CASE("build_ladder rotates designs without the pole and rejects duplicates") {
  std::mt19937_64 rng(9);
  SphericalDesign tilted;
  tilted.points = builtin_design("octahedron").points;
  // Rotate the octahedron away from the pole.
  const double c = std::cos(0.3), s = std::sin(0.3);
  for (auto& p : tilted.points) p = {c * p.x + s * p.z, p.y, -s * p.x + c * p.z};
  tilted.strength = 3;
  tilted.label = "tilted";
  tilted.source = "test";
  const auto lad = build_ladder({builtin_design("pole"), tilted});
  CHECK(lad.warnings().size() == 1);
  CHECK(lad.n().at(1) == 6);
  CHECK(verify_strength(lad.designs()[1]).passed);

  CHECK_THROWS_AS(build_ladder({builtin_design("pole"), builtin_design("antipodal"),
                                builtin_design("octahedron")}),
                  LadderError);
  const auto single = build_ladder({builtin_design("tetrahedron")});
  CHECK(single.levels() == 1);
  CHECK(single.nu().at(0) == 4);
}

TEST_CASE("rotate_to_pole preserves inner products") {
  std::mt19937_64 rng(13);
  std::vector<SpherePoint> pts;
  for (int i = 0; i < 10; ++i) pts.push_back(oracle::random_point(rng));
  pts.push_back({0, 0, -1});
  for (std::size_t from : {std::size_t{0}, std::size_t{10}}) {
    const auto rot = rotate_to_pole(pts, from);
    CHECK(rot[from] == kNorthPole);
    for (std::size_t a = 0; a < pts.size(); ++a)
      for (std::size_t b = 0; b < pts.size(); ++b)
        CHECK(std::abs(rot[a].dot(rot[b]) - pts[a].dot(pts[b])) <= 1e-14);
  }
}

TEST_CASE("saved designs round-trip bit-exactly") {
  const auto dir = std::filesystem::temp_directory_path() / "sparsesphere_design_test";
  std::filesystem::create_directories(dir);
  for (const auto& name : {"icosahedron", "level05"}) {
    const auto d = builtin_design(name);
    const auto path = dir / (std::string(name) + ".txt");
    save_design(path, d);
    const auto back = load_design(path, d.strength);
    REQUIRE(back.cardinality() == d.cardinality());
    for (std::size_t i = 0; i < d.cardinality(); ++i) CHECK(back.points[i] == d.points[i]);
  }
}

TEST_CASE("manifest resolves relative paths and builtin names") {
  const auto dir = std::filesystem::temp_directory_path() / "sparsesphere_manifest_test";
  std::filesystem::create_directories(dir);
  save_design(dir / "oct.txt", builtin_design("level03"));
  {
    std::ofstream m(dir / "ladder.txt");
    m << "# test ladder\nbuiltin:pole 0\nbuiltin:antipodal 1\noct.txt 3\n";
  }
  const auto lad = load_manifest(dir / "ladder.txt");
  CHECK(lad.levels() == 3);
  CHECK(lad.n().at(2) == 2 + 7);
  {
    std::ofstream m(dir / "bad.txt");
    m << "builtin:pole 0\nmissing.txt 1\n";
  }
  CHECK_THROWS_AS(load_manifest(dir / "bad.txt"), LoadError);
}
