#include <doctest.h>

#include <cmath>

#include "stateid/errors.hpp"
#include "stateid/sdp.hpp"

using namespace stateid;
using namespace stateid::sdp;
using linmat::Rng;

namespace {

ComplexMatrix scalar(double v) { return ComplexMatrix::Constant(1, 1, v); }
ComplexMatrix eye(Eigen::Index d) { return ComplexMatrix::Identity(d, d); }

// maximize Tr[E] subject to 0 <= E <= I, with the upper bound written as
// E + W = I over a basis.
SdpProblem box_problem(Eigen::Index d) {
  SdpProblem p;
  p.sense = Sense::Maximize;
  p.block_dims = {d, d};
  p.objective = {eye(d), ComplexMatrix()};
  for (const auto& b : hermitian_basis(d)) p.constraints.push_back({{b, b}, Relation::Equal, b.trace().real()});
  return p;
}

// Random instance with strictly feasible primal and dual: maximize <C, X>
// over {X >= 0, Tr[A_i X] = Tr[A_i X0]} with X0 > 0 and C = sum y0_i A_i - S0.
SdpProblem random_problem(Rng& rng, Eigen::Index d, int m) {
  SdpProblem p;
  p.sense = Sense::Maximize;
  p.block_dims = {d};
  const ComplexMatrix x0 = linmat::random_psd(d, rng).matrix() + eye(d);
  const ComplexMatrix s0 = linmat::random_psd(d, rng).matrix() + eye(d);
  std::normal_distribution<double> g;
  ComplexMatrix c = -s0;
  for (int i = 0; i < m; ++i) {
    const ComplexMatrix a = linmat::random_hermitian(d, rng).matrix();
    c += g(rng) * a;
    p.constraints.push_back({{a}, Relation::Equal, (a * x0).trace().real()});
  }
  // Keep the feasible set bounded.
  p.constraints.push_back({{eye(d)}, Relation::LessEqual, x0.trace().real() + 1.0});
  p.objective = {c};
  return p;
}

}  // namespace

TEST_CASE("hermitian basis is orthonormal") {
  const auto basis = hermitian_basis(3);
  REQUIRE(basis.size() == 9);
  for (std::size_t i = 0; i < basis.size(); ++i)
    for (std::size_t j = 0; j < basis.size(); ++j)
      CHECK(std::abs((basis[i] * basis[j]).trace().real() - (i == j ? 1.0 : 0.0)) <= 1e-15);
}

TEST_CASE("trivial 1x1 minimization") {
  SdpProblem p;
  p.sense = Sense::Minimize;
  p.block_dims = {1};
  p.objective = {scalar(1.0)};
  p.constraints = {{{scalar(1.0)}, Relation::GreaterEqual, 1.0}};
  const auto sol = solve(p);
  REQUIRE(sol.status == Status::Optimal);
  CHECK(sol.primal_value == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(sol.dual_value == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(sol.dual_multipliers[0] == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("box problem value is the dimension") {
  for (Eigen::Index d : {1, 2, 3, 5}) {
    const auto p = box_problem(d);
    const auto sol = solve(p);
    REQUIRE(sol.status == Status::Optimal);
    CHECK(sol.primal_value == doctest::Approx(static_cast<double>(d)).epsilon(1e-7));
    CHECK(sol.gap <= 1e-7);
    CHECK(sol.max_residual <= 1e-8);
    const auto rep = check_primal_feasibility(p, sol.primal_blocks);
    CHECK(rep.max_violation <= 1e-8);
    CHECK(rep.min_block_eigenvalue >= -1e-8);
  }
}

TEST_CASE("check_primal_feasibility") {
  const auto p = box_problem(2);
  CHECK(check_primal_feasibility(p, {0.5 * eye(2), 0.5 * eye(2)}).max_violation <= 1e-12);
  // E = 2I against E <= I: the completing W = -I has eigenvalue -1.
  const auto bad = check_primal_feasibility(p, {2.0 * eye(2), -1.0 * eye(2)});
  CHECK(bad.min_block_eigenvalue == doctest::Approx(-1.0));

  SdpProblem q;
  q.block_dims = {2};
  q.objective = {eye(2)};
  q.constraints = {{{eye(2) * 0.5}, Relation::LessEqual, 1.0}};
  CHECK(check_primal_feasibility(q, {2.0 * eye(2)}).max_violation == doctest::Approx(1.0));
  CHECK_THROWS_AS(check_primal_feasibility(q, {eye(3)}), InputError);
}

TEST_CASE("check_dual_feasibility flags sign errors") {
  SdpProblem p;
  p.sense = Sense::Maximize;
  p.block_dims = {1};
  p.objective = {scalar(1.0)};
  p.constraints = {{{scalar(1.0)}, Relation::LessEqual, 2.0}};
  const auto ok = check_dual_feasibility(p, {1.5});
  CHECK(ok.sign_violations.empty());
  CHECK(ok.min_slack_eigenvalue == doctest::Approx(0.5));
  CHECK(ok.bound == doctest::Approx(3.0));
  const auto bad = check_dual_feasibility(p, {-1.0});
  CHECK(bad.sign_violations.size() == 1);
  CHECK_FALSE(bad.feasible(1e-9));
}

TEST_CASE("random instances: solution re-evaluates as feasible, weak duality") {
  Rng rng(101);
  for (int t = 0; t < 15; ++t) {
    const auto p = random_problem(rng, 2 + t % 4, 1 + t % 5);
    const auto sol = solve(p);
    REQUIRE(sol.status == Status::Optimal);
    const auto prep = check_primal_feasibility(p, sol.primal_blocks);
    CHECK(prep.max_violation <= 1e-8 * (1.0 + std::abs(sol.primal_value)) * 10);
    CHECK(prep.min_block_eigenvalue >= -1e-8);
    const auto drep = check_dual_feasibility(p, sol.dual_multipliers);
    CHECK(drep.sign_violations.empty());
    CHECK(drep.min_slack_eigenvalue >= -1e-8 * 10);
    CHECK(sol.dual_value >= sol.primal_value - 1e-6);
    CHECK(drep.bound == doctest::Approx(sol.dual_value).epsilon(1e-9));
  }
}

TEST_CASE("scaling the objective scales the value") {
  Rng rng(102);
  auto p = random_problem(rng, 3, 3);
  const auto base = solve(p);
  REQUIRE(base.status == Status::Optimal);
  for (double c : {0.01, 3.0, 250.0}) {
    auto q = p;
    for (auto& m : q.objective) m *= c;
    const auto sol = solve(q);
    CHECK(sol.status == base.status);
    CHECK(sol.primal_value == doctest::Approx(c * base.primal_value).epsilon(1e-8));
  }
}

TEST_CASE("solve is deterministic") {
  Rng rng(103);
  const auto p = random_problem(rng, 3, 4);
  const auto a = solve(p);
  const auto b = solve(p);
  CHECK(a.primal_value == b.primal_value);
  CHECK(a.dual_multipliers == b.dual_multipliers);
  CHECK(a.iterations == b.iterations);
  for (std::size_t k = 0; k < a.primal_blocks.size(); ++k) CHECK(a.primal_blocks[k] == b.primal_blocks[k]);
}

TEST_CASE("infeasible and unbounded inputs") {
  SdpProblem infeasible;
  infeasible.sense = Sense::Minimize;
  infeasible.block_dims = {2};
  infeasible.objective = {eye(2)};
  infeasible.constraints = {{{eye(2)}, Relation::LessEqual, -1.0}};
  CHECK(solve(infeasible).status == Status::Infeasible);

  SdpProblem unbounded;
  unbounded.sense = Sense::Maximize;
  unbounded.block_dims = {2};
  unbounded.objective = {eye(2)};
  unbounded.constraints = {{{eye(2)}, Relation::GreaterEqual, 1.0}};
  CHECK(solve(unbounded).status == Status::Unbounded);
}

TEST_CASE("iteration cap") {
  auto p = box_problem(3);
  SolverOptions o;
  o.max_iterations = 2;
  CHECK(solve(p, o).status == Status::MaxIter);
}

TEST_CASE("malformed problems are rejected") {
  SdpProblem p;
  CHECK_THROWS_AS(solve(p), InputError);
  p.block_dims = {2};
  p.objective = {eye(3)};
  CHECK_THROWS_AS(solve(p), InputError);
  p.objective = {eye(2)};
  ComplexMatrix nonherm = ComplexMatrix::Zero(2, 2);
  nonherm(0, 1) = 1.0;
  p.constraints = {{{nonherm}, Relation::Equal, 0.0}};
  CHECK_THROWS_AS(solve(p), InputError);
}
