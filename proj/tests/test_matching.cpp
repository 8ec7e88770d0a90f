#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "qkp/kernels.hpp"
#include "qkp/matching.hpp"

using namespace qkp;

namespace {

MatchingSpec spec_with(std::size_t k_max, double alpha, double beta = 1.0, double gamma = 1.0) {
  MatchingSpec s;
  s.k_max = k_max;
  s.alpha = alpha;
  s.beta = beta;
  s.gamma = gamma;
  return s;
}

SolverConfig exhaustive() {
  SolverConfig c;
  c.kind = SolverKind::exhaustive;
  c.shots = 1;
  return c;
}

BitstringSample sample_of(Bits b) { return {std::move(b), 0.0, 0, "x"}; }

// v block plus slack registers holding k_max minus the per-row count
Bits with_slack(const Bits& v, std::size_t n, std::size_t m, const MatchingSpec& spec) {
  const std::size_t l = spec.slack_bits();
  Bits z(spec.dim(n, m), 0);
  for (std::size_t i = 0; i < n * m; ++i) z[i] = v[i];
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t count = 0;
    for (std::size_t j = 0; j < m; ++j) count += v[i * m + j];
    const std::size_t s = spec.k_max - count;
    for (std::size_t a = 0; a < l; ++a) z[slack_variable(i, a, n, m, l)] = (s >> a) & 1U;
  }
  return z;
}

}  // namespace

TEST_CASE("dimension law") {
  CHECK(spec_with(1, 0.5).dim(1, 1) == 2);
  for (std::size_t k = 1; k <= 9; ++k) {
    const auto s = spec_with(k, 0.5);
    CHECK(s.slack_bits() == std::size_t(std::ceil(std::log2(double(k) + 1))));
    for (std::size_t n = 1; n <= 4; ++n)
      for (std::size_t m = 1; m <= 4; ++m) {
        CHECK(s.dim(n, m) == n * (m + s.slack_bits()));
        KernelMatrix km{DenseMatrix(n, m, 0.5), false};
        CHECK(build_matching_qubo(km, s).dim() == s.dim(n, m));
      }
  }
}

TEST_CASE("slack encoding covers every count") {
  for (std::size_t k = 1; k <= 7; ++k) {
    const std::size_t l = spec_with(k, 0.5).slack_bits();
    for (std::size_t c = 0; c <= k; ++c) {
      bool found = false;
      for (std::size_t s = 0; s < (std::size_t{1} << l); ++s) found = found || c + s == k;
      CHECK(found);
    }
  }
}

TEST_CASE("matching QUBO examples") {
  SUBCASE("identity-like 2x2") {
    KernelMatrix km{DenseMatrix::from_rows({{0.9, 0.1}, {0.1, 0.9}}), false};
    const auto spec = spec_with(1, 0.5);
    const auto p = build_matching_qubo(km, spec);
    const auto best = solve_exhaustive(p).best;
    const auto d = decode_matching(best, 2, 2, spec, &km);
    REQUIRE(d.matches.size() == 2);
    CHECK(d.matches.pairs[0] == Match{0, 0, 0.9});
    CHECK(d.matches.pairs[1] == Match{1, 1, 0.9});
    CHECK(d.report.feasible());
  }
  SUBCASE("alpha zero gives no matches") {
    for (std::size_t n = 1; n <= 2; ++n)
      for (std::size_t m = 1; m <= 2; ++m) {
        KernelMatrix km{DenseMatrix(n, m, 0.5), false};
        const auto spec = spec_with(1, 0.0);
        const auto d = decode_matching(solve_exhaustive(build_matching_qubo(km, spec)).best, n, m, spec);
        CHECK(d.matches.size() == 0);
      }
  }
  SUBCASE("kernel outside the unit interval") {
    KernelMatrix km{DenseMatrix::from_rows({{1.2}}), false};
    CHECK_THROWS_WITH_AS(build_matching_qubo(km, spec_with(1, 0.5)), doctest::Contains("<= 1"), std::invalid_argument);
    km.entries(0, 0) = -0.1;
    CHECK_THROWS_AS(build_matching_qubo(km, spec_with(1, 0.5)), std::invalid_argument);
  }
  SUBCASE("alpha outside the unit interval") { CHECK_THROWS_AS(spec_with(1, 1.5).validate(), std::invalid_argument); }
}

TEST_CASE("decode_matching") {
  const auto spec = spec_with(1, 0.5);
  SUBCASE("all zeros") {
    const auto d = decode_matching(sample_of(Bits(spec.dim(2, 2), 0)), 2, 2, spec);
    CHECK(d.matches.size() == 0);
    CHECK(d.report.targets_unique());
    CHECK(d.report.within_capacity());
    CHECK_FALSE(d.report.slack_consistent());
    CHECK(d.report.slack_mismatches == std::vector<std::size_t>{0, 1});
  }
  SUBCASE("all zeros with slack registers at k_max is feasible") {
    Bits z(spec.dim(2, 2), 0);
    z[slack_variable(0, 0, 2, 2, 1)] = 1;
    z[slack_variable(1, 0, 2, 2, 1)] = 1;
    CHECK(decode_matching(sample_of(z), 2, 2, spec).report.feasible());
  }
  SUBCASE("two sources claim one target") {
    Bits z(spec.dim(2, 2), 0);
    z[match_variable(0, 0, 2)] = 1;
    z[match_variable(1, 0, 2)] = 1;
    const auto d = decode_matching(sample_of(z), 2, 2, spec);
    CHECK(d.report.duplicate_targets == std::vector<std::size_t>{0});
    CHECK_FALSE(d.report.feasible());
  }
  SUBCASE("overfull source") {
    Bits z(spec.dim(1, 2), 0);
    z[0] = z[1] = 1;
    const auto d = decode_matching(sample_of(z), 1, 2, spec);
    CHECK(d.report.overfull_sources == std::vector<std::size_t>{0});
  }
  SUBCASE("length mismatch") { CHECK_THROWS_AS(decode_matching(sample_of(Bits(3, 0)), 2, 2, spec), std::invalid_argument); }
  SUBCASE("JSON") {
    MatchSet ms{{Match{0, 1, 0.5}}};
    nlohmann::json j = ms;
    CHECK(j.dump() == R"([{"i":0,"j":1,"kernel":0.5}])");
  }
}

TEST_CASE("penalty exactness") {
  // beta/gamma contribution = E(alpha, beta, gamma) - E(alpha, 0, 0)
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0, 1);
  for (std::size_t k = 1; k <= 2; ++k)
    for (std::size_t n = 1; n <= 3; ++n)
      for (std::size_t m = 1; m <= 3; ++m) {
        KernelMatrix km{DenseMatrix(n, m), false};
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < m; ++j) km.entries(i, j) = u(rng);
        const auto full = spec_with(k, 0.3, 1.7, 2.3);
        const auto bare = spec_with(k, 0.3, 0.0, 0.0);
        const auto pf = build_matching_qubo(km, full);
        const auto pb = build_matching_qubo(km, bare);
        for (std::uint64_t s = 0; s < (std::uint64_t{1} << (n * m)); ++s) {
          const Bits v = index_to_bits(s, n * m);
          bool duplicate = false, overfull = false;
          for (std::size_t j = 0; j < m; ++j) {
            std::size_t c = 0;
            for (std::size_t i = 0; i < n; ++i) c += v[i * m + j];
            duplicate = duplicate || c > 1;
          }
          for (std::size_t i = 0; i < n; ++i) {
            std::size_t c = 0;
            for (std::size_t j = 0; j < m; ++j) c += v[i * m + j];
            overfull = overfull || c > k;
          }
          if (overfull) continue;
          const Bits z = with_slack(v, n, m, full);
          const double penalty = evaluate_energy(pf, z) - evaluate_energy(pb, z);
          if (!duplicate)
            CHECK(std::abs(penalty) < 1e-12);
          else
            CHECK(penalty >= 1.7 - 1e-12);
        }
      }
}

TEST_CASE("large penalties make every optimum feasible") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0, 1);
  for (std::size_t k = 1; k <= 2; ++k)
    for (std::size_t n = 1; n <= 3; ++n)
      for (std::size_t m = 1; m <= 3; ++m) {
        KernelMatrix km{DenseMatrix(n, m), false};
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < m; ++j) km.entries(i, j) = u(rng);
        const double big = double(n * m);
        const auto spec = spec_with(k, 0.6, big, big);
        const auto p = build_matching_qubo(km, spec);
        if (p.dim() > 20) continue;  // covered by the acceptance suite
        for (auto s : oracle::enumerate(p).argmins)
          CHECK(decode_matching(sample_of(index_to_bits(s, p.dim())), n, m, spec).report.feasible());
      }
}

TEST_CASE("match_keypoints") {
  const auto cos = make_cosine_kernel();
  SUBCASE("identical descriptor lists give the identity matching") {
    for (std::size_t n = 1; n <= 3; ++n) {
      PointSet d;
      for (std::size_t i = 0; i < n; ++i) {
        Point p(3, 0.0);
        p[i] = 1.0;
        d.push_back(p);
      }
      const auto r = match_keypoints(d, d, cos, spec_with(1, 0.2), exhaustive());
      REQUIRE(r.decoded.matches.size() == n);
      for (std::size_t i = 0; i < n; ++i) {
        CHECK(r.decoded.matches.pairs[i].i == i);
        CHECK(r.decoded.matches.pairs[i].j == i);
        CHECK(r.decoded.matches.pairs[i].kernel == doctest::Approx(1.0));
      }
    }
  }
  SUBCASE("single perfect pair") {
    const auto r = match_keypoints({{1.0, 0.0}}, {{1.0, 0.0}}, cos, spec_with(1, 0.5), exhaustive());
    CHECK(r.decoded.matches.size() == 1);
  }
  SUBCASE("solver reaches the assignment optimum") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0, 1);
    DenseMatrix K(3, 3);
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) K(i, j) = u(rng);
    const auto spec = spec_with(1, 0.6);
    const auto p = build_matching_qubo(KernelMatrix{K, false}, spec);
    const double opt = solve_exhaustive(p).best.energy;
    CHECK(opt == doctest::Approx(oracle::best_matching_cost(K, 0.6)).epsilon(1e-12));
  }
  SUBCASE("empty input") { CHECK_THROWS_AS(match_keypoints({}, {{1.0}}, cos, spec_with(1, 0.5), exhaustive()), std::invalid_argument); }
}
