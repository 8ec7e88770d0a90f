#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <sstream>

#include "qkp/kernels.hpp"

using namespace qkp;

namespace {

PointSet random_points(std::size_t n, std::size_t d, std::uint64_t seed, double lo = -1, double hi = 1) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  PointSet pts(n, Point(d));
  for (auto& p : pts)
    for (auto& v : p) v = u(rng);
  return pts;
}

double min_eigenvalue(const DenseMatrix& m) {
  Eigen::MatrixXd e(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) e(i, j) = m(i, j);
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(e).eigenvalues().minCoeff();
}

}  // namespace

TEST_CASE("gaussian kernel") {
  const Point x{0.3, -1.2, 4.0};
  CHECK(gaussian_kernel(x, x, 2.0) == 1.0);
  CHECK(gaussian_kernel(Point{0.0}, Point{std::sqrt(std::log(2.0))}, 1.0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(gaussian_kernel(Point{0, 0}, Point{1, 1}, 0.5) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
  CHECK_THROWS_AS(gaussian_kernel(Point{0, 0}, Point{1}, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(gaussian_kernel(Point{0}, Point{1}, 0.0), std::invalid_argument);
}

TEST_CASE("normalized inner product kernel") {
  CHECK(normalized_inner_product_kernel(Point{3, 4}, Point{3, 4}) == doctest::Approx(1.0));
  CHECK(normalized_inner_product_kernel(Point{1, 0}, Point{0, 2}) == 0.0);
  CHECK(normalized_inner_product_kernel(Point{1, 0}, Point{1, 1}) == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(normalized_inner_product_kernel(Point{1, 0}, Point{-1, 0.1}) == 0.0);
  CHECK_THROWS_AS(normalized_inner_product_kernel(Point{0, 0}, Point{1, 1}), std::invalid_argument);
}

TEST_CASE("distance matrix") {
  SUBCASE("single point") {
    const auto d = build_distance_matrix({{1.0, 2.0}});
    CHECK(d.size() == 1);
    CHECK(d.entries(0, 0) == 0.0);
  }
  SUBCASE("collinear points") {
    const auto d = build_distance_matrix({{0.0}, {1.0}, {2.0}});
    CHECK(d.entries == DenseMatrix::from_rows({{0, 1, 2}, {1, 0, 1}, {2, 1, 0}}));
  }
  SUBCASE("metric properties") {
    const auto pts = random_points(5, 3, 17);
    const auto d = build_distance_matrix(pts);
    for (std::size_t i = 0; i < 5; ++i) {
      CHECK(d.entries(i, i) == 0.0);
      for (std::size_t j = 0; j < 5; ++j) {
        CHECK(d.entries(i, j) == d.entries(j, i));
        CHECK(d.entries(i, j) >= 0.0);
        for (std::size_t k = 0; k < 5; ++k) CHECK(d.entries(i, k) <= d.entries(i, j) + d.entries(j, k) + 1e-12);
      }
    }
  }
  SUBCASE("mixed dimensions") { CHECK_THROWS_AS(build_distance_matrix({{0.0}, {1.0, 2.0}}), std::invalid_argument); }
}

TEST_CASE("kernel matrix builder") {
  const auto g = make_gaussian_kernel(1.0);
  SUBCASE("one point vs itself") {
    const PointSet pts{{0.2, 0.4}};
    const auto k = build_kernel_matrix(pts, g);
    CHECK(k.entries == DenseMatrix::from_rows({{1.0}}));
    CHECK(k.symmetric);
  }
  SUBCASE("gaussian and cosine matrices are symmetric PSD with values in [0,1]") {
    const auto pts = random_points(12, 5, 3);
    for (const auto& kern : {g, make_cosine_kernel()}) {
      const auto k = build_kernel_matrix(pts, pts, kern);
      CHECK(k.symmetric);
      for (std::size_t i = 0; i < 12; ++i)
        for (std::size_t j = 0; j < 12; ++j) {
          CHECK(k.entries(i, j) == k.entries(j, i));
          CHECK(k.entries(i, j) >= 0.0);
          CHECK(k.entries(i, j) <= 1.0);
        }
    }
    CHECK(min_eigenvalue(build_kernel_matrix(pts, g).entries) >= -1e-9);
    // cosine on non-negative data: the plain Gram matrix of unit vectors
    const auto pos = random_points(12, 5, 4, 0.0, 1.0);
    CHECK(min_eigenvalue(build_kernel_matrix(pos, make_cosine_kernel()).entries) >= -1e-9);
  }
  SUBCASE("rectangular shape") {
    const auto a = random_points(2, 3, 1);
    const auto b = random_points(3, 3, 2);
    const auto k = build_kernel_matrix(a, b, g);
    CHECK(k.rows() == 2);
    CHECK(k.cols() == 3);
    CHECK_FALSE(k.symmetric);
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t j = 0; j < 3; ++j) CHECK(k.entries(i, j) == gaussian_kernel(a[i], b[j], 1.0));
  }
  SUBCASE("a copy of the same list is not flagged symmetric") {
    const auto a = random_points(3, 2, 5);
    const auto b = a;
    CHECK_FALSE(build_kernel_matrix(a, b, g).symmetric);
  }
  SUBCASE("errors carry the entry position") {
    const PointSet a{{1.0, 0.0}, {0.0, 0.0}};
    CHECK_THROWS_WITH(build_kernel_matrix(a, a, make_cosine_kernel()), doctest::Contains("kernel evaluation failed at ("));
  }
}

TEST_CASE("CSV output") {
  std::ostringstream out;
  write_csv(out, DenseMatrix::from_rows({{1.0, 0.5}, {0.1, 0.0}}));
  CHECK(out.str() == "1,0.5\n0.1,0\n");
}
