#include <algorithm>
#include <numeric>

#include <doctest.h>

#include "oracles/qp_oracle.hpp"
#include "support.hpp"
#include "tpmsvm/error.hpp"

using namespace tpmsvm;

namespace {

void check_feasible(const QpProblem& p, const QpSolution& s) {
  CHECK(std::abs(s.lambda.sum() - p.nu) <= 1e-9 * p.nu);
  CHECK(s.lambda.minCoeff() >= -1e-12);
  CHECK(s.lambda.maxCoeff() <= p.ub + 1e-12);
}

}  // namespace

TEST_CASE("qp examples") {
  QpProblem p{Matrix::Identity(2, 2), Vector::Zero(2), 1.0, 1.0};
  const QpSolution s = solve_box_simplex_qp(p);
  CHECK(s.status == QpStatus::Optimal);
  CHECK(s.lambda[0] == doctest::Approx(0.5));
  CHECK(s.lambda[1] == doctest::Approx(0.5));

  p.ub = 0.5;
  const QpSolution t = solve_box_simplex_qp(p);
  CHECK(t.lambda[0] == doctest::Approx(0.5));
  CHECK(t.lambda[1] == doctest::Approx(0.5));

  p.ub = 0.4;
  CHECK_THROWS_AS(solve_box_simplex_qp(p), Error);
  p.ub = 1.0;
  p.q[0] = NAN;
  CHECK_THROWS_AS(solve_box_simplex_qp(p), Error);
}

TEST_CASE("qp matches the exhaustive oracle") {
  SplitMix64 rng(21);
  for (int t = 0; t < 60; ++t) {
    const QpProblem p = testing::random_box_simplex(rng, 6);
    const QpSolution s = solve_box_simplex_qp(p, {1e-12, 0});
    const auto o = oracle::solve_exhaustive(p);
    REQUIRE(o.feasible);
    CHECK(s.status == QpStatus::Optimal);
    CHECK(s.objective == doctest::Approx(o.objective).epsilon(1e-8).scale(1.0));
    check_feasible(p, s);
    CHECK(s.kkt_residual <= 1e-12 * 10);
  }
}

TEST_CASE("qp solutions stay feasible and permute with the data") {
  SplitMix64 rng(22);
  for (int t = 0; t < 40; ++t) {
    const int m = 2 + static_cast<int>(rng.below(30));
    const QpProblem p = testing::random_box_simplex(rng, m);
    const QpSolution s = solve_box_simplex_qp(p);
    check_feasible(p, s);
    CHECK(qp_kkt_residual(p, s.lambda) <= 1e-8);

    std::vector<int> perm(static_cast<std::size_t>(m));
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(std::span<int>(perm));
    QpProblem pp = p;
    pp.Q = p.Q(perm, perm);
    pp.q = p.q(perm);
    const QpSolution sp = solve_box_simplex_qp(pp, {1e-12, 0});
    const QpSolution s12 = solve_box_simplex_qp(p, {1e-12, 0});
    CHECK(sp.objective == doctest::Approx(s12.objective).epsilon(1e-10));
    // lambda is unique when Q is positive definite
    for (int i = 0; i < m; ++i) CHECK(sp.lambda[i] == doctest::Approx(s12.lambda[perm[i]]).epsilon(1e-5).scale(p.ub));
  }
}

TEST_CASE("qp repairs an indefinite quadratic term") {
  QpProblem p;
  p.Q = Matrix::Identity(3, 3);
  p.Q(2, 2) = -1.0;
  p.q = Vector::Zero(3);
  p.nu = 1.0;
  p.ub = 1.0;
  const QpSolution s = solve_box_simplex_qp(p);
  CHECK(s.jitter > 0.0);
  CHECK_FALSE(s.warnings.empty());
  check_feasible(p, s);
}

TEST_CASE("interior index set") {
  QpSolution s;
  s.lambda = Vector::Constant(2, 0.5);
  CHECK(interior_index_set(s, 1.0, 1e-6) == std::vector<int>{0, 1});
  CHECK(interior_index_set(s, 0.5, 1e-6).empty());
  s.lambda = Vector(3);
  s.lambda << 0.0, 0.3, 0.7;
  CHECK(interior_index_set(s, 0.7, 1e-6) == std::vector<int>{1});
}
