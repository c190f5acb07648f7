#pragma once

// Small dense semidefinite programs over complex Hermitian blocks.
//
//   maximize / minimize   sum_b Tr[C_b X_b]
//   subject to            sum_b Tr[A_ib X_b]  {<=, =, >=}  rhs_i
//                         X_b >= 0 (PSD) for every block b
//
// Inequalities receive a nonnegative 1x1 slack block internally, so the
// interior-point core only sees equality constraints. Multipliers are reported
// in the sign convention of the user's sense: for a maximization, a <=
// constraint has a nonnegative multiplier and the dual is
//   minimize rhs^T y  s.t.  sum_i y_i A_ib - C_b >= 0;
// for a minimization, a >= constraint has a nonnegative multiplier and the
// dual is maximize rhs^T y s.t. C_b - sum_i y_i A_ib >= 0.

#include <string>
#include <vector>

#include "stateid/linmat.hpp"
#include "stateid/tolerances.hpp"

namespace stateid::sdp {

using linmat::ComplexMatrix;

enum class Sense { Maximize, Minimize };
enum class Relation { LessEqual, Equal, GreaterEqual };
enum class Status { Optimal, Infeasible, Unbounded, MaxIter, NumericalFailure };

std::string to_string(Status s);
std::string to_string(Relation r);
std::string to_string(Sense s);

struct Constraint {
  /// One coefficient matrix per block; an empty (0x0) matrix means zero.
  std::vector<ComplexMatrix> coeffs;
  Relation relation = Relation::Equal;
  double rhs = 0.0;
};

struct SdpProblem {
  Sense sense = Sense::Maximize;
  std::vector<Eigen::Index> block_dims;
  /// One objective matrix per block; empty means zero.
  std::vector<ComplexMatrix> objective;
  std::vector<Constraint> constraints;

  /// Throws InputError unless every matrix is Hermitian and matches its block.
  void validate(const Tolerances& tol = default_tolerances()) const;
};

struct SolverOptions {
  /// Relative gap |p - d| / (s + |p| + |d|), s = max |objective entry|.
  double gap_tolerance = 1e-7;
  double feasibility_tolerance = 1e-8;  // relative residuals
  int max_iterations = 500;
  double infeasibility_tolerance = 1e-8;
  double step_fraction = 0.95;

  static SolverOptions from(const Tolerances& tol);
};

struct SdpSolution {
  Status status = Status::NumericalFailure;
  std::vector<ComplexMatrix> primal_blocks;  // user blocks only
  std::vector<ComplexMatrix> dual_slacks;    // dual slack matrix per user block
  std::vector<double> dual_multipliers;      // one per user constraint
  double primal_value = 0.0;
  double dual_value = 0.0;
  double gap = 0.0;            // as in SolverOptions::gap_tolerance
  double max_residual = 0.0;   // max of relative primal and dual residuals
  int iterations = 0;
};

SdpSolution solve(const SdpProblem& p, const SolverOptions& opts = {});

struct PrimalReport {
  double max_violation = 0.0;      // worst relation violation (0 when satisfied)
  double min_block_eigenvalue = 0.0;
  std::vector<double> violations;  // per constraint
};

/// Evaluates a candidate point without solving. Throws InputError on a
/// block-count or block-dimension mismatch.
PrimalReport check_primal_feasibility(const SdpProblem& p,
                                      const std::vector<ComplexMatrix>& candidate);

struct DualReport {
  std::vector<double> slack_min_eigenvalues;  // per block
  double min_slack_eigenvalue = 0.0;
  std::vector<std::size_t> sign_violations;   // constraint indices
  double bound = 0.0;                         // rhs^T y: bounds the primal optimum
  bool feasible(double tol) const {
    return sign_violations.empty() && min_slack_eigenvalue >= -tol;
  }
};

/// Dual slack per block and sign consistency of the multipliers. Sign
/// problems are reported, never thrown.
DualReport check_dual_feasibility(const SdpProblem& p, const std::vector<double>& multipliers);

/// Dual slack matrices for the given multipliers (convention above).
std::vector<ComplexMatrix> dual_slack(const SdpProblem& p, const std::vector<double>& multipliers);

/// Orthonormal basis of the Hermitian d x d matrices under Re Tr[A B]:
/// E_kk, (E_kl + E_lk)/sqrt2, i(E_kl - E_lk)/sqrt2 for k < l.
std::vector<ComplexMatrix> hermitian_basis(Eigen::Index d);

}  // namespace stateid::sdp
