#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "qkp/clustering.hpp"
#include "qkp/kernels.hpp"

using namespace qkp;

namespace {

ClusteringSpec spec_with(std::size_t k, double alpha, double beta, double gamma, double lambda = 1.0) {
  ClusteringSpec s;
  s.k = k;
  s.alpha = alpha;
  s.beta = beta;
  s.gamma = gamma;
  s.lambda = lambda;
  return s;
}

SolverConfig exhaustive() {
  SolverConfig c;
  c.kind = SolverKind::exhaustive;
  c.shots = 1;
  return c;
}

// two tight groups of 4 around (0,0) and (5,5), one outlier at (10,-5)
PointSet two_clusters_and_outlier() {
  PointSet pts;
  for (const double c : {0.0, 5.0}) {
    pts.push_back({c, c});
    pts.push_back({c + 0.1, c});
    pts.push_back({c, c + 0.1});
    pts.push_back({c + 0.1, c + 0.1});
  }
  pts.push_back({10.0, -5.0});
  return pts;
}

std::vector<std::size_t> argmin_selection(const QuboProblem& p) {
  return decode_selection(solve_exhaustive(p).best);
}

}  // namespace

TEST_CASE("k-medoids builder") {
  SUBCASE("single point") {
    const auto p = build_kmedoids_qubo(build_distance_matrix({{0.3}}), spec_with(1, 0.7, 0.4, 2.0));
    CHECK(p.quadratic()(0, 0) == 2.0);
    CHECK(p.linear()[0] == -4.0);
    CHECK(p.offset() == 2.0);
    CHECK(argmin_selection(p) == std::vector<std::size_t>{0});
  }
  SUBCASE("collinear points select the endpoints") {
    // gamma = 12.5 clears n * max row sum = 12; at gamma = 1 all three points win (E = -1/3 vs 0)
    const auto d = build_distance_matrix({{0.0}, {1.0}, {2.0}});
    CHECK(argmin_selection(build_kmedoids_qubo(d, spec_with(2, 0.5, 1.0 / 3, 12.5))) == std::vector<std::size_t>{0, 2});
    CHECK(argmin_selection(build_kmedoids_qubo(d, spec_with(2, 0.5, 1.0 / 3, 1.0))) == std::vector<std::size_t>{0, 1, 2});
  }
  SUBCASE("pure cardinality penalty") {
    std::mt19937_64 rng(1);
    PointSet pts(4, Point(2));
    std::uniform_real_distribution<double> u(0, 1);
    for (auto& p : pts) p = {u(rng), u(rng)};
    const auto p = build_kmedoids_qubo(build_distance_matrix(pts), spec_with(2, 0, 0, 1));
    const auto ref = oracle::enumerate(p);
    CHECK(ref.min_energy == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(ref.argmins.size() == 6);
    for (auto s : ref.argmins) CHECK(oracle::popcount(s) == 2);
  }
  SUBCASE("entrywise form and linearity in D") {
    const PointSet pts{{0, 0}, {1, 0}, {0, 2}, {3, 1}};
    const auto d = build_distance_matrix(pts);
    auto scaled = d;
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < 4; ++j) scaled.entries(i, j) *= 2.5;
    const auto s = spec_with(2, 0.3, 0.2, 0.9);
    const auto p = build_kmedoids_qubo(scaled, s);
    for (std::size_t i = 0; i < 4; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < 4; ++j) {
        CHECK(p.quadratic()(i, j) == doctest::Approx(0.9 - 2.5 * 0.3 * d.entries(i, j)));
        row += d.entries(i, j);
      }
      CHECK(p.linear()[i] == doctest::Approx(0.2 * 2.5 * row - 2 * 0.9 * 2));
    }
    CHECK(p.offset() == doctest::Approx(0.9 * 4));
  }
  SUBCASE("k larger than n") {
    CHECK_THROWS_AS(build_kmedoids_qubo(build_distance_matrix({{0.0}, {1.0}}), spec_with(3, 1, 1, 1)),
                    std::invalid_argument);
  }
}

TEST_CASE("KDC builder") {
  const auto gauss = make_gaussian_kernel(1.0);
  SUBCASE("single point is selected") {
    const auto k = build_kernel_matrix(PointSet{{0.5}}, gauss);
    const auto p = build_kdc_qubo(k, spec_with(1, 0, 0, 0, 1.0));
    CHECK(evaluate_energy(p, Bits{1}) < evaluate_energy(p, Bits{0}));
  }
  SUBCASE("entrywise form") {
    const PointSet pts{{0.0}, {0.5}, {2.0}};
    const auto k = build_kernel_matrix(pts, gauss);
    const auto p = build_kdc_qubo(k, spec_with(2, 0, 0, 0, 0.3));
    for (std::size_t i = 0; i < 3; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < 3; ++j) {
        CHECK(p.quadratic()(i, j) == doctest::Approx(k.entries(i, j) / 4 + 0.3));
        row += k.entries(i, j);
      }
      CHECK(p.linear()[i] == doctest::Approx(-2 * (row / 6 + 0.3 * 2)));
    }
    CHECK(p.offset() == doctest::Approx(0.3 * 4));
  }
  SUBCASE("large lambda enforces the cardinality") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0, 1);
    PointSet pts(5, Point(2));
    for (auto& pt : pts) pt = {u(rng), u(rng)};
    const auto k = build_kernel_matrix(pts, gauss);
    const auto p = build_kdc_qubo(k, spec_with(2, 0, 0, 0, 10.0));
    for (auto s : oracle::enumerate(p).argmins) CHECK(oracle::popcount(s) == 2);
  }
  SUBCASE("dense groups win over the outlier") {
    const auto pts = two_clusters_and_outlier();
    const auto p = build_kdc_qubo(build_kernel_matrix(pts, gauss), ClusteringSpec::with_defaults(2, pts.size()));
    for (auto s : oracle::enumerate(p).argmins) {
      const auto sel = decode_selection(BitstringSample{index_to_bits(s, pts.size()), 0.0, 0, "x"});
      REQUIRE(sel.size() == 2);
      CHECK(sel[0] < 4);
      CHECK(sel[1] >= 4);
      CHECK(sel[1] < 8);
    }
  }
  SUBCASE("non-symmetric kernel matrix is rejected") {
    KernelMatrix k{DenseMatrix::from_rows({{1, 0.2}, {0.3, 1}}), false};
    CHECK_THROWS_AS(build_kdc_qubo(k, spec_with(1, 0, 0, 0)), std::invalid_argument);
  }
}

TEST_CASE("decode_selection") {
  auto sample = [](Bits b) { return BitstringSample{std::move(b), 0.0, 0, "x"}; };
  CHECK(decode_selection(sample({0, 0, 0})).empty());
  CHECK(decode_selection(sample({1, 0, 1})) == std::vector<std::size_t>{0, 2});
  CHECK(decode_selection(sample({1, 1, 1, 1})) == std::vector<std::size_t>{0, 1, 2, 3});
}

TEST_CASE("extract_keypoints") {
  const auto gauss = make_gaussian_kernel(1.0);
  SUBCASE("collinear") {
    const PointSet pts{{0.0}, {1.0}, {2.0}};
    const auto r = extract_keypoints(pts, ClusteringMethod::kmedoids, gauss, spec_with(2, 0.5, 1.0 / 3, 12.5), exhaustive());
    CHECK(r.indices == std::vector<std::size_t>{0, 2});
    CHECK_FALSE(r.repaired);
    // with the weak penalty the repair drops the middle point
    const auto weak = extract_keypoints(pts, ClusteringMethod::kmedoids, gauss, spec_with(2, 0.5, 1.0 / 3, 1.0), exhaustive());
    CHECK(weak.indices == std::vector<std::size_t>{0, 2});
    CHECK(weak.repaired);
  }
  SUBCASE("k equal to n with a dominant penalty") {
    const PointSet pts{{0.0}, {0.4}, {1.3}, {2.0}};
    auto r = extract_keypoints(pts, ClusteringMethod::kmedoids, gauss, spec_with(4, 0.25, 0.25, 50), exhaustive());
    CHECK(r.indices == std::vector<std::size_t>{0, 1, 2, 3});
    r = extract_keypoints(pts, ClusteringMethod::kdc, gauss, spec_with(4, 0, 0, 0, 50), exhaustive());
    CHECK(r.indices == std::vector<std::size_t>{0, 1, 2, 3});
  }
  SUBCASE("two-cluster fixture with KDC, and k-medoids disagrees") {
    const auto pts = two_clusters_and_outlier();
    const auto spec = ClusteringSpec::with_defaults(2, pts.size());
    const auto kdc = extract_keypoints(pts, ClusteringMethod::kdc, gauss, spec, exhaustive());
    REQUIRE(kdc.indices.size() == 2);
    CHECK(kdc.indices[0] < 4);
    CHECK(kdc.indices[1] >= 4);
    CHECK(kdc.indices[1] < 8);
    const auto km = extract_keypoints(pts, ClusteringMethod::kmedoids, gauss, spec, exhaustive());
    CHECK(km.indices != kdc.indices);
  }
  SUBCASE("repair restores the cardinality and flags it") {
    // gamma = 0 lets the solver ignore k; the repair must fix it
    const PointSet pts{{0.0}, {1.0}, {2.0}, {3.0}, {4.0}};
    const auto r = extract_keypoints(pts, ClusteringMethod::kmedoids, gauss, spec_with(2, 0.0, 1.0, 0.0), exhaustive());
    CHECK(r.indices.size() == 2);
    CHECK(r.repaired);
    const auto p = build_clustering_qubo(pts, ClusteringMethod::kmedoids, gauss, spec_with(2, 0.0, 1.0, 0.0));
    CHECK(r.sample.energy == evaluate_energy(p, r.sample.bits));
  }
}

TEST_CASE("repair_selection is greedy and deterministic") {
  QuboProblem p(DenseMatrix(4, 4), {0.5, -1.0, 0.25, -0.5});
  Bits bits{1, 1, 1, 1};
  CHECK(repair_selection(p, bits, 2));
  CHECK(bits == Bits{0, 1, 0, 1});
  bits = Bits{0, 0, 0, 0};
  CHECK(repair_selection(p, bits, 1));
  CHECK(bits == Bits{0, 1, 0, 0});
  CHECK_FALSE(repair_selection(p, bits, 1));
  QuboProblem flat(DenseMatrix(3, 3), {0, 0, 0});
  bits = Bits{0, 0, 0};
  repair_selection(flat, bits, 1);
  CHECK(bits == Bits{1, 0, 0});
}

TEST_CASE("cardinality holds for penalties above the row-sum bound") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0, 1);
  for (std::size_t n = 3; n <= 12; ++n) {
    PointSet pts(n, Point(2));
    for (auto& pt : pts) pt = {u(rng), u(rng)};
    const auto d = build_distance_matrix(pts);
    const std::size_t k = 1 + n / 3;
    double max_row = 0.0, total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < n; ++j) row += d.entries(i, j);
      max_row = std::max(max_row, row);
      total += row;
    }
    auto s = ClusteringSpec::with_defaults(k, n);
    s.gamma = std::max(n * max_row, (s.alpha + s.beta) * total) * 1.01;
    for (auto idx : oracle::enumerate(build_kmedoids_qubo(d, s)).argmins) CHECK(oracle::popcount(idx) == int(k));

    const auto km = build_kernel_matrix(pts, make_gaussian_kernel(1.0));
    double kmax_row = 0.0, ktotal = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < n; ++j) row += km.entries(i, j);
      kmax_row = std::max(kmax_row, row);
      ktotal += row;
    }
    s.lambda = std::max(n * kmax_row, ktotal / double(k * k) + 2 * ktotal / double(k * n)) * 1.01;
    for (auto idx : oracle::enumerate(build_kdc_qubo(km, s)).argmins) CHECK(oracle::popcount(idx) == int(k));
  }
}

TEST_CASE("default multipliers") {
  const auto s = ClusteringSpec::with_defaults(4, 10);
  CHECK(s.alpha == 0.25);
  CHECK(s.beta == 0.1);
  CHECK(s.gamma == 0.25);
  CHECK(s.lambda == 1.0 / 16);
  CHECK(clustering_method_from_string("kdc") == ClusteringMethod::kdc);
  CHECK(to_string(ClusteringMethod::kmedoids) == "kmedoids");
}
