#pragma once

// Bounded-error state identification.
//
// A measurement {E_o} plus an implicit abstain element I - sum E_o yields an
// (a, eps)-predictor when it answers with probability a and its answer is
// wrong with probability at most eps conditioned on answering. D_eps is the
// largest such a; it is the optimum of an SDP whose dual feasible points are
// upper-bound certificates. This header computes D_eps for one register, two
// registers (both bits) and the parity of two bits, and builds the dual-lift
// certificate for the two-register problem from a one-register certificate.

#include <array>
#include <span>
#include <string>
#include <vector>

#include "stateid/linmat.hpp"
#include "stateid/sdp.hpp"
#include "stateid/tolerances.hpp"

namespace stateid::ident {

using linmat::DensityMatrix;
using linmat::HermitianMatrix;
using linmat::PureState;

struct IdentPair {
  IdentPair(DensityMatrix a0, DensityMatrix a1, double eps);
  DensityMatrix alpha0, alpha1;
  double eps;
};

struct IdentQuad {
  IdentQuad(DensityMatrix a0, DensityMatrix a1, DensityMatrix b0, DensityMatrix b1, double eps);
  DensityMatrix alpha0, alpha1, beta0, beta1;
  double eps;

  /// alpha_x (x) beta_y in the order 00, 01, 10, 11.
  std::vector<DensityMatrix> product_states() const;
};

/// Throws InputError unless 0 <= eps < 1/2.
void check_eps(double eps);

/// Outcome elements with the hypotheses each outcome names as correct. Under
/// a uniform prior over `states`, outcome o is wrong on every hypothesis not
/// in correct[o].
struct PredictorMeasurement {
  std::vector<std::string> names;
  std::vector<HermitianMatrix> elements;
  std::vector<std::vector<int>> correct;

  static PredictorMeasurement single(HermitianMatrix e0, HermitianMatrix e1);
  static PredictorMeasurement quad(HermitianMatrix e00, HermitianMatrix e01, HermitianMatrix e10,
                                   HermitianMatrix e11);
  /// E0 answers "parity 0" = {00, 11}; E1 answers "parity 1" = {01, 10}.
  static PredictorMeasurement parity(HermitianMatrix e0, HermitianMatrix e1);

  Eigen::Index dim() const { return elements.front().dim(); }
  HermitianMatrix abstain() const;
};

/// Probability of any answer, uniform prior over states.
double answer_probability(const PredictorMeasurement& m, std::span<const DensityMatrix> states);
/// Pr[wrong | answer]; 0 when the answer probability is 0.
double conditional_error(const PredictorMeasurement& m, std::span<const DensityMatrix> states);

struct MeasurementReport {
  double min_element_eigenvalue = 0.0;
  double min_abstain_eigenvalue = 0.0;
  double answer_probability = 0.0;
  double conditional_error = 0.0;
};
MeasurementReport check_measurement(const PredictorMeasurement& m,
                                    std::span<const DensityMatrix> states);

struct HelstromResult {
  double success;
  PredictorMeasurement measurement;
  double achieved;  // success of `measurement`, evaluated directly
};
HelstromResult helstrom(const DensityMatrix& alpha0, const DensityMatrix& alpha1);

// ---------------------------------------------------------------------------
// Identification programs

/// States under a uniform prior, outcomes with their correct-hypothesis sets,
/// and the tolerated conditional error.
struct IdentificationProgram {
  std::vector<DensityMatrix> states;
  std::vector<std::string> names;
  std::vector<std::vector<int>> correct;
  double eps;

  static IdentificationProgram single(const IdentPair& p);
  static IdentificationProgram quad(const IdentQuad& q);
  static IdentificationProgram parity(const IdentQuad& q);

  Eigen::Index dim() const { return states.front().dim(); }
  HermitianMatrix average_state() const;
  /// Right-hand side of the dual constraint X >= rhs_o for outcome o:
  /// avg - z * ((1 - eps) avg - sum_{h in correct[o]} pi_h rho_h).
  HermitianMatrix dual_rhs(std::size_t outcome, double z) const;
};

/// Blocks: one per outcome, then the abstain block. Constraint 0 is the
/// conditional-error constraint (<= 0); constraints 1..d^2 fix
/// sum E_o + E_abstain = I along sdp::hermitian_basis(d).
sdp::SdpProblem build_problem(const IdentificationProgram& prog);

/// Dual point (X, z) written as multipliers of build_problem's constraints.
std::vector<double> certificate_multipliers(const IdentificationProgram& prog,
                                            const HermitianMatrix& x, double z);

/// Minimum eigenvalues of X and of X - dual_rhs(o, z) for every outcome.
struct CertificateSlack {
  double x_min_eigenvalue;
  std::vector<double> outcome_min_eigenvalues;
  double min() const;
};
CertificateSlack certificate_slack(const IdentificationProgram& prog, const HermitianMatrix& x,
                                   double z);

struct DualCertificate {
  HermitianMatrix x;
  double z;
  double value;  // Tr[x]
};

struct IdentResult {
  double value;  // answer probability of `measurement`
  PredictorMeasurement measurement;
  DualCertificate certificate;
  double solver_primal;
  double solver_dual;
  sdp::Status status;
  int iterations;
};

/// Largest certified bracket accepted when the solver stops short of Optimal.
inline constexpr double kCertifiedGap = 1e-6;

/// Solves the program and returns a feasible measurement and a feasible dual
/// certificate. Throws SolverError unless the solver reports Optimal or the
/// two returned points bracket the optimum within kCertifiedGap.
IdentResult solve_identification(const IdentificationProgram& prog,
                                 const Tolerances& tol = default_tolerances());

// ---------------------------------------------------------------------------
// The three problems

using DualCertificateSingle = DualCertificate;  // (X_b, z_b)
using DualCertificateQuad = DualCertificate;    // (X, z)

IdentResult d_eps_single(const IdentPair& p, const Tolerances& tol = default_tolerances());
IdentResult d_eps_quad(const IdentQuad& q, const Tolerances& tol = default_tolerances());
IdentResult d_eps_parity(const IdentQuad& q, const Tolerances& tol = default_tolerances());

DualCertificateSingle dual_single(const DensityMatrix& beta0, const DensityMatrix& beta1, double eps,
                                  const Tolerances& tol = default_tolerances());

/// X_1 = 1/2((1 + eps z_b) beta0 + (1 - (1 - eps) z_b) beta1); X_2 swaps betas.
std::array<HermitianMatrix, 2> single_dual_rhs(const DensityMatrix& beta0, const DensityMatrix& beta1,
                                               double eps, double z_b);
/// X'_1..X'_4 of the two-register dual at error eps_quad, for hypotheses
/// 00, 01, 10, 11.
std::array<HermitianMatrix, 4> quad_dual_rhs(const DensityMatrix& alpha0, const DensityMatrix& alpha1,
                                             const DensityMatrix& beta0, const DensityMatrix& beta1,
                                             double eps_quad, double z);

// ---------------------------------------------------------------------------
// Dual lift

/// z(eps, z_b) = 16 (1 - eps)/(1 - eps/2) z_b + 4/(1 - eps).
double lifted_z(double eps, double z_b);

/// sqrt(1 - |<a0|a1>|^2)
double overlap_delta(const PureState& a0, const PureState& a1);

struct LiftResult {
  DualCertificateQuad certificate;
  double delta;
  std::array<double, 4> slack_min_eigenvalues;  // X - X'_i
  double trace_bound;                           // 16 delta^2 Tr[X_b]
};

/// Builds (X, z) for the two-register dual at eps/2 from a feasible
/// one-register certificate (X_b, z_b) at eps: X = sum_i Pos(Y_i) with
/// Y_i = 4 delta^2 alpha^perp (x) X_{1|2}. Throws InputError if the
/// certificate is infeasible for (beta0, beta1, eps).
LiftResult dual_lift(const PureState& alpha0, const PureState& alpha1, const DensityMatrix& beta0,
                     const DensityMatrix& beta1, double eps, const DualCertificateSingle& cert,
                     const Tolerances& tol = default_tolerances());

struct Claim2Report {
  double z;
  double delta;
  double first_matrix_min_eigenvalue;
  double second_matrix_min_eigenvalue;
  double full_min_eigenvalue;  // the inequality with sigma0, sigma1 included
  double first_scalar;         // must be > 0
  double second_scalar;        // must be > 0
  double reduced_linear;       // (17 - 4/(1-eps)^2) + 16 z_b (7/(1-eps/2) - 17 eps)
  bool matrices_hold;
  bool scalars_hold;
  bool all_pass() const { return matrices_hold && scalars_hold; }
};

/// Scalar conditions only; they depend on (eps, z_b, delta).
Claim2Report claim2_scalars(double eps, double z_b, double delta);

Claim2Report verify_claim2(const PureState& rho0, const PureState& rho1, const DensityMatrix& sigma0,
                           const DensityMatrix& sigma1, double eps, double z_b,
                           const Tolerances& tol = default_tolerances());

// ---------------------------------------------------------------------------
// Direct product checks

struct DirectProductReport {
  double a_lower = 0.0;  // pure: (1 - |<a0|a1>|^2)/2; mixed: trace distance
  double b = 0.0;
  double p = 0.0;
  double bound = 0.0;
  bool satisfied = false;
  double margin = 0.0;  // bound - p
  // auditing
  double delta = 0.0;
  double b_dual = 0.0;
  double p_dual = 0.0;
  double lifted_value = 0.0;  // Tr[X] of the lifted certificate (pure case)
  double theorem_bound = 0.0;  // 16 (1 - |<~a0|~a1>|^2) b on purifications
  double fidelity = 0.0;
  double purification_overlap = 0.0;
};

inline constexpr double kDirectProductSlack = 1e-6;

/// Extracts |psi> from a rank-1 density matrix; throws InputError otherwise.
PureState as_pure(const DensityMatrix& rho, double tol = 1e-9);

DirectProductReport check_direct_product_pure(const IdentQuad& q,
                                              const Tolerances& tol = default_tolerances());
DirectProductReport check_corollary_mixed(const IdentQuad& q,
                                          const Tolerances& tol = default_tolerances());

// ---------------------------------------------------------------------------
// Counterexample constructions

/// |0> and sqrt(1 - delta^2)|0> + delta|1>.
std::array<PureState, 2> counterexample_states(double delta);
/// E0 = |v><v|, v ~ delta|00> - |01> - |10>; E1 = 0.
PredictorMeasurement parity_witness(double delta);
/// E00 = |w><w|, w ~ delta|00> - 2/3|01> - 2/3|10>; the rest 0.
PredictorMeasurement quarter_witness(double delta);
IdentQuad counterexample_quad(double delta, double eps);

}  // namespace stateid::ident
