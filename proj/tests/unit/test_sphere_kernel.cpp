#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "sparsesphere/errors.hpp"
#include "sparsesphere/sphere_kernel.hpp"

using namespace sparsesphere;

TEST_CASE("A_3(1) matches a long direct summation") {
  const KernelParams p(3.0, 1.0);
  const double direct = static_cast<double>(oracle::a_r_sum(1.0L, 3.0, 100000));
  CHECK(std::abs(a_r(1.0, p) - direct) <= 1e-13);
  CHECK(std::abs(a_r(1.0, p) - 0.404113806319176) <= 1e-12);
}

TEST_CASE("A_r at other arguments matches direct summation") {
  for (double r : {2.5, 3.0, 4.5}) {
    const KernelParams p(r, 1.0);
    for (double z : {-1.0, -0.7, -0.2, 0.0, 0.3, 0.9, 0.999}) {
      const double direct = static_cast<double>(oracle::a_r_sum(z, r, 100000));
      CHECK(std::abs(a_r(z, p) - direct) <= 2e-14 + p.truncation_tol());
    }
  }
}

TEST_CASE("truncation level for r=3") {
  const KernelParams p(3.0, 1.0);
  const int L = p.truncation_level();
  CHECK(L == 2659);
  CHECK(p.tail_bound(L) <= 1e-14);
  CHECK(p.tail_bound(L - 1) > 1e-14);
}

TEST_CASE("doubling the truncation changes A_r by at most the tolerance") {
  const KernelParams p(3.0, 1.0);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const int L = p.truncation_level();
  for (int i = 0; i < 1000; ++i) {
    const double z = u(rng);
    const long double longer = oracle::a_r_sum(z, 3.0, 2 * L);
    CHECK(std::abs(static_cast<long double>(a_r(z, p)) - longer) <= p.truncation_tol());
  }
}

TEST_CASE("|A_r(z)| <= A_r(1)") {
  const KernelParams p(2.5, 1.0);
  const double top = a_r(1.0, p);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 1000; ++i) CHECK(std::abs(a_r(u(rng), p)) <= top);
}

TEST_CASE("A_r integrates to zero over [-1, 1]") {
  // The truncated series is a polynomial of degree L, integrated exactly by
  // Gauss-Legendre with more than L/2 nodes; every P_l with l >= 1 has zero mean.
  const KernelParams p(3.0, 1.0);
  std::vector<double> x, w;
  oracle::gauss_legendre(p.truncation_level() / 2 + 10, x, w);
  std::vector<double> ax(x.size());
  a_r_batch(x, ax, p);
  long double integral = 0;
  for (std::size_t i = 0; i < x.size(); ++i) integral += w[i] * ax[i];
  CHECK(std::abs(static_cast<double>(integral)) <= 1e-12);
}

TEST_CASE("Legendre recurrence matches closed forms") {
  for (int i = 0; i <= 200; ++i) {
    const double z = -1.0 + i / 100.0;
    const auto seq = legendre_sequence(z, 5);
    REQUIRE(seq.size() == 6);
    for (int l = 0; l <= 5; ++l) CHECK(std::abs(seq[l] - oracle::legendre_closed(l, z)) <= 1e-13);
  }
}

TEST_CASE("domain and contract errors") {
  CHECK_THROWS_AS(legendre_sequence(1.1, 3), DomainError);
  CHECK_NOTHROW(legendre_sequence(1.0 + 5e-15, 3));
  CHECK_THROWS_AS(KernelParams(1.5, 1.0), ContractError);
  CHECK_THROWS_AS(KernelParams(3.0, 0.0), ContractError);
  CHECK_THROWS_AS(KernelParams(3.0, 1.5), ContractError);
  CHECK_THROWS_AS(KernelParams(3.0, 1.0, 0.0), ContractError);
  CHECK_THROWS_AS(SpherePoint::checked(0, 0, 2), DomainError);
  const auto s = SpaceParams::geometric(3.0, 0.5, 2);
  std::vector<SpherePoint> a(2), b(3);
  CHECK_THROWS_AS(kernel_d(a, b, s), ContractError);
}

TEST_CASE("kernel_1 and kernel_d") {
  const KernelParams p(3.0, 0.5);
  const double A = a_r(1.0, p);
  CHECK(kernel_1(kNorthPole, kNorthPole, p) == doctest::Approx(1.0 + 0.5 * A).epsilon(1e-15));

  std::mt19937_64 rng(3);
  const auto s1 = SpaceParams(3.0, {0.5});
  const SpherePoint x = oracle::random_point(rng), y = oracle::random_point(rng);
  CHECK(kernel_d(std::span(&x, 1), std::span(&y, 1), s1) == kernel_1(x, y, s1.kernel(0)));

  const auto s3 = SpaceParams::geometric(3.0, 0.5, 3);
  for (int t = 0; t < 20; ++t) {
    std::vector<SpherePoint> u, v;
    double product = 1.0;
    for (int k = 0; k < 3; ++k) {
      u.push_back(oracle::random_point(rng));
      v.push_back(oracle::random_point(rng));
      product *= kernel_1(u[k], v[k], s3.kernel(k));
    }
    CHECK(std::abs(kernel_d(u, v, s3) - product) <= 4e-16 * product);
  }
  std::vector<SpherePoint> same = {kNorthPole, kNorthPole};
  CHECK(kernel_d(same, same, SpaceParams::geometric(3.0, 0.5, 2)) >= 1.0);
  CHECK(s3.gamma(2) == doctest::Approx(0.125));
}

TEST_CASE("series Gram matrices are positive semi-definite") {
  std::mt19937_64 rng(5);
  const KernelParams p(3.0, 1.0);
  for (int n : {1, 7, 50}) {
    std::vector<SpherePoint> pts;
    for (int i = 0; i < n; ++i) pts.push_back(oracle::random_point(rng));
    const Eigen::MatrixXd g = series_gram(pts, p);
    CHECK((g - g.transpose()).cwiseAbs().maxCoeff() == 0.0);
    const Eigen::MatrixXd k = (g.array() + 1.0).matrix();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k);
    CHECK(es.eigenvalues().minCoeff() >= -1e-9 * k.trace());
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        CHECK(std::abs(g(i, j) - a_r(detail::clamped_dot(pts[i], pts[j]), p)) <= 1e-15);
      }
    }
  }
}
