#include "stateid/classical.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "stateid/errors.hpp"
#include "stateid/sdp.hpp"

namespace stateid::classical {

namespace {

constexpr double kSumTolerance = 1e-12;

void check_distribution(const RealVector& v, const char* name) {
  if (v.size() == 0) throw InputError(std::string("classical: empty distribution ") + name);
  for (double x : v)
    if (!std::isfinite(x) || x < 0.0) throw InputError(std::string("classical: negative entry in ") + name);
  if (std::abs(v.sum() - 1.0) > kSumTolerance)
    throw InputError(std::string("classical: ") + name + " does not sum to 1");
}

void check_eps(double eps) {
  if (!(eps >= 0.0 && eps < 0.5)) throw InputError("classical: eps must lie in [0, 1/2)");
}

// Per outcome: answered mass, mass of the best guess, and that guess.
struct Outcome {
  Eigen::Index index;
  double mass;
  double correct;
  int guess;
};

std::vector<Outcome> outcomes(const std::vector<RealVector>& dists) {
  const Eigen::Index n = dists.front().size();
  std::vector<Outcome> out;
  for (Eigen::Index i = 0; i < n; ++i) {
    Outcome o{i, 0.0, -1.0, 0};
    for (std::size_t h = 0; h < dists.size(); ++h) {
      o.mass += dists[h](i);
      if (dists[h](i) > o.correct) {
        o.correct = dists[h](i);
        o.guess = static_cast<int>(h);
      }
    }
    out.push_back(o);
  }
  return out;
}

// Posterior order: decreasing correct/mass, stable by index; massless
// outcomes are dropped.
std::vector<Outcome> sorted_outcomes(const std::vector<RealVector>& dists) {
  auto all = outcomes(dists);
  std::vector<Outcome> out;
  for (const auto& o : all)
    if (o.mass > 0.0) out.push_back(o);
  // a/b > c/d  <=>  a d > c b for positive b, d
  std::stable_sort(out.begin(), out.end(),
                   [](const Outcome& l, const Outcome& r) { return l.correct * r.mass > r.correct * l.mass; });
  return out;
}

ClassicalResult greedy(const std::vector<RealVector>& dists, double eps) {
  const Eigen::Index n = dists.front().size();
  const double k = static_cast<double>(dists.size());
  ClassicalResult r{0.0, {std::vector<int>(n, 0), std::vector<double>(n, 0.0)}};
  for (const auto& o : outcomes(dists)) r.measurement.guess[o.index] = o.guess;

  // Budget: sum of eps * mass - wrong over answered outcomes must stay >= 0.
  double budget = 0.0;
  for (const auto& o : sorted_outcomes(dists)) {
    const double wrong = o.mass - o.correct;
    if (eps == 0.0 && wrong > 0.0) break;
    const double cost = wrong - eps * o.mass;
    double t = 1.0;
    if (cost > 0.0) t = std::min(1.0, budget / cost);
    if (t <= 0.0) break;
    r.measurement.answer[o.index] = t;
    r.value += t * o.mass / k;
    budget -= t * cost;
    if (t < 1.0) break;
  }
  return r;
}

void check_dists(const std::vector<RealVector>& dists) {
  if (dists.size() < 2) throw InputError("classical: need at least two hypotheses");
  for (const auto& d : dists) {
    check_distribution(d, "hypothesis");
    if (d.size() != dists.front().size()) throw InputError("classical: outcome count mismatch");
  }
}

}  // namespace

ClassicalPair::ClassicalPair(RealVector p_, RealVector q_, double eps_)
    : p(std::move(p_)), q(std::move(q_)), eps(eps_) {
  check_distribution(p, "p");
  check_distribution(q, "q");
  if (p.size() != q.size()) throw InputError("classical: p and q differ in length");
  check_eps(eps);
}

ClassicalResult optimal_classical(const ClassicalPair& c) { return greedy({c.p, c.q}, c.eps); }

ClassicalResult optimal_classical_multi(const std::vector<RealVector>& dists, double eps) {
  check_dists(dists);
  check_eps(eps);
  return greedy(dists, eps);
}

ClassicalResult optimal_classical_joint(const ClassicalPair& a, const ClassicalPair& b, double eps) {
  const Eigen::Index nb = b.size();
  auto product = [&](const RealVector& x, const RealVector& y) {
    RealVector v(x.size() * nb);
    for (Eigen::Index i = 0; i < x.size(); ++i) v.segment(i * nb, nb) = x(i) * y;
    return v;
  };
  return optimal_classical_multi({product(a.p, b.p), product(a.p, b.q), product(a.q, b.p), product(a.q, b.q)},
                                 eps);
}

double lp_oracle(const ClassicalPair& c, const Tolerances& tol) {
  const Eigen::Index n = c.size();
  // Error coefficient of guessing p (index 0) or q (index 1) on outcome i:
  // wrong mass minus eps times answered mass.
  auto coeff = [&](Eigen::Index i, int g) { return (g == 0 ? c.q(i) : c.p(i)) - c.eps * (c.p(i) + c.q(i)); };
  // Without a negative coefficient the error row has no interior: every
  // variable with a positive coefficient is 0 and the row itself is implied.
  bool interior = false;
  for (Eigen::Index i = 0; i < n; ++i) interior = interior || coeff(i, 0) < 0.0 || coeff(i, 1) < 0.0;

  sdp::SdpProblem prob;
  prob.sense = sdp::Sense::Maximize;
  auto one = [](double v) { return linmat::ComplexMatrix::Constant(1, 1, v); };
  std::vector<std::array<int, 3>> block(n, {-1, -1, -1});  // e0, e1, abstain
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int g = 0; g < 3; ++g) {
      if (g < 2 && !interior && coeff(i, g) > 0.0) continue;
      block[i][g] = static_cast<int>(prob.block_dims.size());
      prob.block_dims.push_back(1);
      prob.objective.push_back(one(g < 2 ? 0.5 * (c.p(i) + c.q(i)) : 0.0));
    }
  }
  const std::size_t nblocks = prob.block_dims.size();
  if (interior) {
    sdp::Constraint err{std::vector<linmat::ComplexMatrix>(nblocks), sdp::Relation::LessEqual, 0.0};
    for (Eigen::Index i = 0; i < n; ++i)
      for (int g = 0; g < 2; ++g) err.coeffs[block[i][g]] = one(coeff(i, g));
    prob.constraints.push_back(std::move(err));
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    sdp::Constraint sum{std::vector<linmat::ComplexMatrix>(nblocks), sdp::Relation::Equal, 1.0};
    for (int g = 0; g < 3; ++g)
      if (block[i][g] >= 0) sum.coeffs[block[i][g]] = one(1.0);
    prob.constraints.push_back(std::move(sum));
  }

  auto opts = sdp::SolverOptions::from(tol);
  opts.gap_tolerance = std::min(opts.gap_tolerance, 1e-12);
  opts.feasibility_tolerance = std::min(opts.feasibility_tolerance, 1e-12);
  const auto sol = sdp::solve(prob, opts);
  if (sol.status != sdp::Status::Optimal) throw SolverError("lp_oracle", sdp::to_string(sol.status));
  return sol.primal_value;
}

double answer_mass_classical(const ClassicalPair& c, const ClassicalMeasurement& m) {
  if (m.answer.size() != static_cast<std::size_t>(c.size()) || m.guess.size() != m.answer.size())
    throw InputError("classical: measurement size mismatch");
  double mass = 0.0;
  for (Eigen::Index i = 0; i < c.size(); ++i) mass += 0.5 * m.answer[i] * (c.p(i) + c.q(i));
  return mass;
}

double conditional_error_classical(const ClassicalPair& c, const ClassicalMeasurement& m) {
  return conditional_error_multi({c.p, c.q}, m);
}

double conditional_error_multi(const std::vector<RealVector>& dists, const ClassicalMeasurement& m) {
  check_dists(dists);
  const Eigen::Index n = dists.front().size();
  if (m.answer.size() != static_cast<std::size_t>(n) || m.guess.size() != m.answer.size())
    throw InputError("classical: measurement size mismatch");
  double mass = 0.0, wrong = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const int g = m.guess[i];
    if (g < 0 || g >= static_cast<int>(dists.size())) throw InputError("classical: guess out of range");
    const double t = m.answer[i];
    if (!(t >= 0.0 && t <= 1.0)) throw InputError("classical: answer fraction outside [0, 1]");
    for (std::size_t h = 0; h < dists.size(); ++h) {
      mass += t * dists[h](i);
      if (static_cast<int>(h) != g) wrong += t * dists[h](i);
    }
  }
  return mass > 0.0 ? wrong / mass : 0.0;
}

// ---------------------------------------------------------------------------

namespace {

// Concave curve f(x) = largest correct mass at answered mass x, through the
// greedy's cumulative points (x_k, f_k).
struct Curve {
  std::vector<Outcome> order;
  std::vector<double> x{0.0}, f{0.0};

  explicit Curve(const ClassicalPair& c) : order(sorted_outcomes({c.p, c.q})) {
    for (const auto& o : order) {
      x.push_back(x.back() + o.mass);
      f.push_back(f.back() + o.correct);
    }
  }

  // Largest y with f(y) >= rho * y (f(y)/y is non-increasing).
  double largest_ratio_point(double rho) const {
    for (std::size_t k = 1; k < x.size(); ++k) {
      if (f[k] >= rho * x[k]) continue;
      const double slope = (f[k] - f[k - 1]) / (x[k] - x[k - 1]);
      return std::clamp((f[k - 1] - slope * x[k - 1]) / (rho - slope), x[k - 1], x[k]);
    }
    return x.back();
  }

  // Answer fractions realizing answered mass y in posterior order.
  ClassicalMeasurement measurement(Eigen::Index n, double y) const {
    ClassicalMeasurement m{std::vector<int>(n, 0), std::vector<double>(n, 0.0)};
    for (const auto& o : order) {
      m.guess[o.index] = o.guess;
      const double t = std::clamp(y / o.mass, 0.0, 1.0);
      m.answer[o.index] = t;
      y -= t * o.mass;
    }
    return m;
  }
};

}  // namespace

ProductStrategy best_product_classical(const ClassicalPair& a, const ClassicalPair& b, double eps, int grid) {
  check_eps(eps);
  if (grid < 2) throw InputError("best_product_classical: grid needs at least 2 points");
  const Curve ca(a), cb(b);
  ProductStrategy best;
  double best_x = 0.0, best_y = 0.0;
  for (std::size_t k = 1; k < ca.x.size(); ++k) {
    for (int g = 0; g < grid; ++g) {
      const double w = static_cast<double>(g) / (grid - 1);
      const double x = (1.0 - w) * ca.x[k - 1] + w * ca.x[k];
      const double fx = (1.0 - w) * ca.f[k - 1] + w * ca.f[k];
      if (x <= 0.0) continue;
      const double y = cb.largest_ratio_point((1.0 - eps) * x / fx);
      if (x * y / 4.0 > best.value) {
        best.value = x * y / 4.0;
        best_x = x;
        best_y = y;
      }
    }
  }
  best.first = ca.measurement(a.size(), best_x);
  best.second = cb.measurement(b.size(), best_y);
  return best;
}

}  // namespace stateid::classical
