#pragma once

// Diagonal (classical) state identification. One sample i is drawn from p
// or q with equal prior; the predictor guesses which one, or abstains.
// Answering on outcome i costs min(p_i, q_i) wrong mass per p_i + q_i
// answered mass, so the optimum answers outcomes in order of increasing
// ratio min/(p+q) until the error budget is spent, the last one fractionally.

#include <vector>

#include "stateid/linmat.hpp"
#include "stateid/tolerances.hpp"

namespace stateid::classical {

using linmat::RealVector;

struct ClassicalPair {
  /// Throws InputError unless p, q are probability vectors of one length
  /// (sums within 1e-12) and 0 <= eps < 1/2.
  ClassicalPair(RealVector p, RealVector q, double eps);
  RealVector p, q;
  double eps;
  Eigen::Index size() const { return p.size(); }
};

/// guess[i] names the hypothesis reported on outcome i (for pairs: 0 = p,
/// 1 = q); answer[i] in [0, 1] is the probability of reporting at all.
struct ClassicalMeasurement {
  std::vector<int> guess;
  std::vector<double> answer;
};

struct ClassicalResult {
  double value;
  ClassicalMeasurement measurement;
};

ClassicalResult optimal_classical(const ClassicalPair& c);

/// Same greedy for k equiprobable hypotheses given as columns over common
/// outcomes; guess[i] is the most likely hypothesis (lowest index on ties).
ClassicalResult optimal_classical_multi(const std::vector<RealVector>& dists, double eps);

/// Joint optimum for the pair (a, b) of registers: hypotheses a_x (x) b_y in
/// the order 00, 01, 10, 11, outcome (i, j) at index i * b.size() + j.
ClassicalResult optimal_classical_joint(const ClassicalPair& a, const ClassicalPair& b, double eps);

/// The same value from an LP over diagonal operators, solved by the SDP
/// solver with 1x1 blocks. Throws SolverError if the solve fails.
double lp_oracle(const ClassicalPair& c, const Tolerances& tol = default_tolerances());

double conditional_error_classical(const ClassicalPair& c, const ClassicalMeasurement& m);
double answer_mass_classical(const ClassicalPair& c, const ClassicalMeasurement& m);

/// Pr[wrong | answer] for k equiprobable hypotheses.
double conditional_error_multi(const std::vector<RealVector>& dists, const ClassicalMeasurement& m);

struct ProductStrategy {
  double value = 0.0;
  ClassicalMeasurement first, second;
};

/// Best answer probability of product strategies (one ClassicalMeasurement
/// per register, answering XY only when both answer) with joint conditional
/// error <= eps. The value is x y / 4 for answered masses x, y of the two
/// registers, and the error condition reads (1 - eps) x y <= f_a(x) f_b(y)
/// where f is a register's largest correct mass at a given answered mass: the
/// greedy's concave piecewise-linear curve. So each register answers in
/// posterior order; x is scanned on `grid` points per linear piece of f_a and
/// the largest feasible y is solved in closed form.
ProductStrategy best_product_classical(const ClassicalPair& a, const ClassicalPair& b, double eps,
                                       int grid = 20001);

}  // namespace stateid::classical
