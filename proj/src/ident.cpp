#include "stateid/ident.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "stateid/errors.hpp"

namespace stateid::ident {

using linmat::ComplexMatrix;
using linmat::ComplexVector;

namespace {

void require_same_dim(const DensityMatrix& a, const DensityMatrix& b, const char* what) {
  if (a.dim() != b.dim()) throw InputError(std::string(what) + ": dimension mismatch");
}

void require_states(const PredictorMeasurement& m, std::span<const DensityMatrix> states) {
  if (m.elements.empty()) throw InputError("measurement has no elements");
  if (m.elements.size() != m.correct.size()) throw InputError("measurement: correct sets missing");
  for (const auto& s : states)
    if (s.dim() != m.dim()) throw InputError("measurement and state dimensions differ");
  for (const auto& e : m.elements)
    if (e.dim() != m.dim()) throw InputError("measurement elements differ in dimension");
  for (const auto& c : m.correct)
    for (int h : c)
      if (h < 0 || static_cast<std::size_t>(h) >= states.size())
        throw InputError("measurement names a hypothesis outside the instance");
}

double expectation(const HermitianMatrix& e, const DensityMatrix& rho) {
  return (e.matrix() * rho.matrix()).trace().real();
}

// Guess mass and wrong-guess mass under a uniform prior.
std::pair<double, double> masses(const PredictorMeasurement& m, std::span<const DensityMatrix> states) {
  require_states(m, states);
  const double pi = 1.0 / static_cast<double>(states.size());
  double guess = 0.0, wrong = 0.0;
  for (std::size_t o = 0; o < m.elements.size(); ++o) {
    for (std::size_t h = 0; h < states.size(); ++h) {
      const double pr = pi * expectation(m.elements[o], states[h]);
      guess += pr;
      if (std::find(m.correct[o].begin(), m.correct[o].end(), static_cast<int>(h)) == m.correct[o].end())
        wrong += pr;
    }
  }
  return {guess, wrong};
}

const std::vector<std::vector<int>> kSingleCorrect = {{0}, {1}};
const std::vector<std::vector<int>> kQuadCorrect = {{0}, {1}, {2}, {3}};
const std::vector<std::vector<int>> kParityCorrect = {{0, 3}, {1, 2}};

}  // namespace

void check_eps(double eps) {
  if (!(eps >= 0.0 && eps < 0.5)) throw InputError("eps must lie in [0, 1/2)");
}

IdentPair::IdentPair(DensityMatrix a0, DensityMatrix a1, double e)
    : alpha0(std::move(a0)), alpha1(std::move(a1)), eps(e) {
  require_same_dim(alpha0, alpha1, "IdentPair");
  check_eps(eps);
}

IdentQuad::IdentQuad(DensityMatrix a0, DensityMatrix a1, DensityMatrix b0, DensityMatrix b1, double e)
    : alpha0(std::move(a0)), alpha1(std::move(a1)), beta0(std::move(b0)), beta1(std::move(b1)), eps(e) {
  require_same_dim(alpha0, alpha1, "IdentQuad alphas");
  require_same_dim(beta0, beta1, "IdentQuad betas");
  check_eps(eps);
}

std::vector<DensityMatrix> IdentQuad::product_states() const {
  return {linmat::tensor(alpha0, beta0), linmat::tensor(alpha0, beta1), linmat::tensor(alpha1, beta0),
          linmat::tensor(alpha1, beta1)};
}

// ---------------------------------------------------------------------------

PredictorMeasurement PredictorMeasurement::single(HermitianMatrix e0, HermitianMatrix e1) {
  return {{"E0", "E1"}, {std::move(e0), std::move(e1)}, kSingleCorrect};
}

PredictorMeasurement PredictorMeasurement::quad(HermitianMatrix e00, HermitianMatrix e01,
                                                HermitianMatrix e10, HermitianMatrix e11) {
  return {{"E00", "E01", "E10", "E11"},
          {std::move(e00), std::move(e01), std::move(e10), std::move(e11)},
          kQuadCorrect};
}

PredictorMeasurement PredictorMeasurement::parity(HermitianMatrix e0, HermitianMatrix e1) {
  return {{"E0", "E1"}, {std::move(e0), std::move(e1)}, kParityCorrect};
}

HermitianMatrix PredictorMeasurement::abstain() const {
  HermitianMatrix a = HermitianMatrix::identity(dim());
  for (const auto& e : elements) a = a - e;
  return a;
}

double answer_probability(const PredictorMeasurement& m, std::span<const DensityMatrix> states) {
  return masses(m, states).first;
}

double conditional_error(const PredictorMeasurement& m, std::span<const DensityMatrix> states) {
  const auto [guess, wrong] = masses(m, states);
  if (guess <= 0.0) return 0.0;
  return wrong / guess;
}

MeasurementReport check_measurement(const PredictorMeasurement& m,
                                    std::span<const DensityMatrix> states) {
  MeasurementReport r;
  const auto [guess, wrong] = masses(m, states);
  r.min_element_eigenvalue = INFINITY;
  for (const auto& e : m.elements)
    r.min_element_eigenvalue = std::min(r.min_element_eigenvalue, linmat::min_eigenvalue(e));
  r.min_abstain_eigenvalue = linmat::min_eigenvalue(m.abstain());
  r.answer_probability = guess;
  r.conditional_error = guess <= 0.0 ? 0.0 : wrong / guess;
  return r;
}

HelstromResult helstrom(const DensityMatrix& alpha0, const DensityMatrix& alpha1) {
  require_same_dim(alpha0, alpha1, "helstrom");
  const auto diff = alpha0.hermitian() - alpha1.hermitian();
  const auto ed = linmat::eig_hermitian(diff);
  const Eigen::Index d = diff.dim();
  ComplexMatrix p0 = ComplexMatrix::Zero(d, d);
  for (Eigen::Index k = 0; k < d; ++k)
    if (ed.values(k) > 0.0) p0 += ed.vectors.col(k) * ed.vectors.col(k).adjoint();
  const auto e0 = HermitianMatrix::symmetrized(p0);
  const auto e1 = HermitianMatrix::identity(d) - e0;
  const double achieved = 0.5 * expectation(e0, alpha0) + 0.5 * expectation(e1, alpha1);
  return {0.5 + 0.5 * linmat::trace_norm(diff), PredictorMeasurement::single(e0, e1), achieved};
}

// ---------------------------------------------------------------------------

IdentificationProgram IdentificationProgram::single(const IdentPair& p) {
  return {{p.alpha0, p.alpha1}, {"E0", "E1"}, kSingleCorrect, p.eps};
}

IdentificationProgram IdentificationProgram::quad(const IdentQuad& q) {
  return {q.product_states(), {"E00", "E01", "E10", "E11"}, kQuadCorrect, q.eps};
}

IdentificationProgram IdentificationProgram::parity(const IdentQuad& q) {
  return {q.product_states(), {"E0", "E1"}, kParityCorrect, q.eps};
}

HermitianMatrix IdentificationProgram::average_state() const {
  ComplexMatrix avg = ComplexMatrix::Zero(dim(), dim());
  for (const auto& s : states) avg += s.matrix();
  return HermitianMatrix::symmetrized(avg / static_cast<double>(states.size()));
}

namespace {

// (1 - eps) avg - sum_{h in correct} pi_h rho_h: the error-constraint
// coefficient of one outcome block.
ComplexMatrix error_coefficient(const IdentificationProgram& prog, std::size_t o) {
  const double pi = 1.0 / static_cast<double>(prog.states.size());
  ComplexMatrix k = (1.0 - prog.eps) * prog.average_state().matrix();
  for (int h : prog.correct[o]) k -= pi * prog.states[static_cast<std::size_t>(h)].matrix();
  return k;
}

}  // namespace

HermitianMatrix IdentificationProgram::dual_rhs(std::size_t outcome, double z) const {
  return HermitianMatrix::symmetrized(average_state().matrix() - z * error_coefficient(*this, outcome));
}

sdp::SdpProblem build_problem(const IdentificationProgram& prog) {
  if (prog.states.empty() || prog.correct.empty()) throw InputError("empty identification program");
  check_eps(prog.eps);
  const Eigen::Index d = prog.dim();
  for (const auto& s : prog.states)
    if (s.dim() != d) throw InputError("identification states differ in dimension");
  const std::size_t m = prog.correct.size();

  sdp::SdpProblem p;
  p.sense = sdp::Sense::Maximize;
  p.block_dims.assign(m + 1, d);
  const ComplexMatrix avg = prog.average_state().matrix();
  p.objective.assign(m + 1, ComplexMatrix());
  for (std::size_t o = 0; o < m; ++o) p.objective[o] = avg;

  sdp::Constraint err;
  err.coeffs.assign(m + 1, ComplexMatrix());
  for (std::size_t o = 0; o < m; ++o) err.coeffs[o] = error_coefficient(prog, o);
  err.relation = sdp::Relation::LessEqual;
  err.rhs = 0.0;
  p.constraints.push_back(std::move(err));

  for (const auto& b : sdp::hermitian_basis(d)) {
    sdp::Constraint c;
    c.coeffs.assign(m + 1, b);
    c.relation = sdp::Relation::Equal;
    c.rhs = b.trace().real();
    p.constraints.push_back(std::move(c));
  }
  return p;
}

std::vector<double> certificate_multipliers(const IdentificationProgram& prog,
                                            const HermitianMatrix& x, double z) {
  if (x.dim() != prog.dim()) throw InputError("certificate dimension mismatch");
  std::vector<double> y{z};
  for (const auto& b : sdp::hermitian_basis(prog.dim())) y.push_back((b * x.matrix()).trace().real());
  return y;
}

double CertificateSlack::min() const {
  double m = x_min_eigenvalue;
  for (double v : outcome_min_eigenvalues) m = std::min(m, v);
  return m;
}

CertificateSlack certificate_slack(const IdentificationProgram& prog, const HermitianMatrix& x,
                                   double z) {
  if (x.dim() != prog.dim()) throw InputError("certificate dimension mismatch");
  CertificateSlack s;
  s.x_min_eigenvalue = linmat::min_eigenvalue(x);
  for (std::size_t o = 0; o < prog.correct.size(); ++o)
    s.outcome_min_eigenvalues.push_back(linmat::min_eigenvalue(x - prog.dual_rhs(o, z)));
  return s;
}

namespace {

constexpr double kNegligibleMass = 1e-15;
// Conditional-error excess left alone as rounding (far inside the 1e-8 the
// measurement invariant allows).
constexpr double kErrorSlack = 1e-12;
// Eigenvalues of an error coefficient treated as zero when it is PSD.
constexpr double kFaceTolerance = 1e-12;
// Diagonal shift that makes the reduced problem's dual strictly feasible
// before a finite z is searched for.
constexpr double kFaceShift = 1e-9;

// Moves rank-one pieces of the elements into abstain, worst conditional
// error first, until the wrong-guess mass is at most eps times the guess
// mass. Keeps every element PSD and the sum below the identity.
void enforce_error_bound(const IdentificationProgram& prog, std::vector<HermitianMatrix>& elements) {
  struct Piece {
    std::size_t outcome;
    linmat::ComplexVector v;  // scaled: element piece is v v^dagger
    double guess, excess;     // avg mass; wrong - eps * guess
  };
  const HermitianMatrix avg = prog.average_state();
  std::vector<Piece> pieces;
  double total = 0.0, guess = 0.0;
  for (std::size_t o = 0; o < elements.size(); ++o) {
    const ComplexMatrix k = error_coefficient(prog, o);
    const auto ed = linmat::eig_hermitian(elements[o]);
    for (Eigen::Index j = 0; j < ed.values.size(); ++j) {
      if (ed.values(j) <= 0.0) continue;
      const ComplexVector v = std::sqrt(ed.values(j)) * ed.vectors.col(j);
      const double g = v.dot(avg.matrix() * v).real();
      const double e = v.dot(k * v).real();
      total += e;
      guess += g;
      // excess > 0 forces guess > 0, so the ratio below is defined
      if (e > 0.0) pieces.push_back({o, v, g, e});
    }
  }
  if (total <= kErrorSlack * guess) return;
  // A residual this far below double precision leaves nothing meaningful.
  if (guess <= kNegligibleMass) {
    for (auto& e : elements) e = HermitianMatrix::zero(e.dim());
    return;
  }
  // Largest excess per unit of guess mass goes first.
  std::stable_sort(pieces.begin(), pieces.end(), [](const Piece& a, const Piece& b) {
    return a.excess / a.guess > b.excess / b.guess;
  });
  for (const auto& pc : pieces) {
    if (total <= 0.0) break;
    const double t = std::min(1.0, total / pc.excess);
    elements[pc.outcome] = linmat::pos_part(
        elements[pc.outcome] - HermitianMatrix::projector(pc.v) * t, Tolerances{.psd_clamp = 0.0});
    total -= t * pc.excess;
  }
  // Cancellation can leave a sliver whose recomputed ratio still exceeds eps
  // by more than rounding.
  const PredictorMeasurement trimmed{prog.names, elements, prog.correct};
  if (conditional_error(trimmed, prog.states) > prog.eps + kErrorSlack)
    for (auto& e : elements) e = HermitianMatrix::zero(e.dim());
}

}  // namespace

namespace {

// Orthonormal basis of ker K_o for every outcome when all error coefficients
// are PSD; nullopt otherwise. In that case E_o K_o has zero trace exactly
// when E_o lives on ker K_o, so the feasible set has no interior; restricting
// each block to that face restores strict feasibility.
std::optional<std::vector<ComplexMatrix>> error_faces(const IdentificationProgram& prog) {
  std::vector<ComplexMatrix> faces;
  for (std::size_t o = 0; o < prog.correct.size(); ++o) {
    const auto ed = linmat::eig_hermitian(HermitianMatrix::symmetrized(error_coefficient(prog, o)));
    if (ed.values(ed.values.size() - 1) < -kFaceTolerance) return std::nullopt;
    std::vector<Eigen::Index> ker;
    for (Eigen::Index j = 0; j < ed.values.size(); ++j)
      if (ed.values(j) <= kFaceTolerance) ker.push_back(j);
    ComplexMatrix v(prog.dim(), static_cast<Eigen::Index>(ker.size()));
    for (std::size_t c = 0; c < ker.size(); ++c) v.col(static_cast<Eigen::Index>(c)) = ed.vectors.col(ker[c]);
    faces.push_back(std::move(v));
  }
  return faces;
}

// maximize sum Tr[F_o V_o^dagger avg V_o] s.t. sum V_o F_o V_o^dagger + W = I;
// outcomes with an empty face get no block.
sdp::SdpProblem face_problem(const IdentificationProgram& prog, const std::vector<ComplexMatrix>& faces) {
  const ComplexMatrix avg = prog.average_state().matrix();
  sdp::SdpProblem p;
  p.sense = sdp::Sense::Maximize;
  for (const auto& v : faces) {
    if (v.cols() == 0) continue;
    p.block_dims.push_back(v.cols());
    p.objective.push_back(v.adjoint() * avg * v);
  }
  p.block_dims.push_back(prog.dim());
  p.objective.push_back(ComplexMatrix());
  for (const auto& b : sdp::hermitian_basis(prog.dim())) {
    sdp::Constraint c;
    for (const auto& v : faces)
      if (v.cols() > 0) c.coeffs.push_back(v.adjoint() * b * v);
    c.coeffs.push_back(b);
    c.relation = sdp::Relation::Equal;
    c.rhs = b.trace().real();
    p.constraints.push_back(std::move(c));
  }
  return p;
}

// Smallest z (to bisection accuracy) with X >= dual_rhs(o, z) for all o,
// assuming every error coefficient is PSD so the slack grows with z.
double smallest_feasible_z(const IdentificationProgram& prog, const HermitianMatrix& x) {
  auto ok = [&](double z) { return certificate_slack(prog, x, z).min() >= 0.0; };
  double lo = 0.0, hi = 1.0;
  if (ok(lo)) return lo;
  while (!ok(hi) && hi < 1e12) {
    lo = hi;
    hi *= 2.0;
  }
  for (int k = 0; k < 60; ++k) {
    const double mid = 0.5 * (lo + hi);
    (ok(mid) ? hi : lo) = mid;
  }
  return hi;
}

HermitianMatrix from_basis(const std::vector<double>& y, std::size_t offset, Eigen::Index d) {
  const auto basis = sdp::hermitian_basis(d);
  ComplexMatrix xm = ComplexMatrix::Zero(d, d);
  for (std::size_t k = 0; k < basis.size(); ++k) xm += y[k + offset] * basis[k];
  return HermitianMatrix::symmetrized(xm);
}

}  // namespace

IdentResult solve_identification(const IdentificationProgram& prog, const Tolerances& tol) {
  const auto problem = build_problem(prog);  // validates
  const std::size_t m = prog.correct.size();
  const Eigen::Index d = prog.dim();
  const auto faces = error_faces(prog);
  const auto sol = sdp::solve(faces ? face_problem(prog, *faces) : problem, sdp::SolverOptions::from(tol));
  if (sol.primal_blocks.empty())
    throw SolverError("identification SDP: " + sdp::to_string(sol.status), sdp::to_string(sol.status));

  // Primal: clip rounding-level negative eigenvalues, rescale if the elements
  // overshoot the identity (the error ratio is scale-free), then trim the
  // error constraint's residual.
  std::vector<HermitianMatrix> elements;
  for (std::size_t o = 0, blk = 0; o < m; ++o) {
    ComplexMatrix e = ComplexMatrix::Zero(d, d);
    if (!faces) e = sol.primal_blocks[o];
    else if ((*faces)[o].cols() > 0) e = (*faces)[o] * sol.primal_blocks[blk++] * (*faces)[o].adjoint();
    elements.push_back(linmat::pos_part(HermitianMatrix::symmetrized(e), tol));
  }
  HermitianMatrix total = HermitianMatrix::zero(d);
  for (const auto& e : elements) total = total + e;
  const double top = linmat::max_eigenvalue(total);
  if (top > 1.0)
    for (auto& e : elements) e = e * (1.0 / top);
  enforce_error_bound(prog, elements);
  PredictorMeasurement meas{prog.names, std::move(elements), prog.correct};

  // Dual: nonnegative z, then lift X by the worst slack so every dual
  // constraint holds. On a face the reduced dual carries no z; shift X into
  // the interior and search for one.
  HermitianMatrix x = HermitianMatrix::zero(d);
  double z = 0.0;
  if (!faces) {
    z = std::max(0.0, sol.dual_multipliers[0]);
    x = from_basis(sol.dual_multipliers, 1, d);
  } else {
    x = from_basis(sol.dual_multipliers, 0, d) + HermitianMatrix::identity(d) * kFaceShift;
    z = smallest_feasible_z(prog, x);
  }
  const double worst = certificate_slack(prog, x, z).min();
  if (worst < 0.0) x = x + HermitianMatrix::identity(d) * (-worst);

  IdentResult r{answer_probability(meas, prog.states),
                std::move(meas),
                {x, z, x.trace()},
                sol.primal_value,
                sol.dual_value,
                sol.status,
                sol.iterations};
  // Both points are feasible, so the optimum lies between their values; a
  // solver that stopped early is still acceptable when that bracket is tight.
  if (sol.status != sdp::Status::Optimal && r.certificate.value - r.value > kCertifiedGap)
    throw SolverError("identification SDP: " + sdp::to_string(sol.status) + ", certified bracket [" +
                          std::to_string(r.value) + ", " + std::to_string(r.certificate.value) + "]",
                      sdp::to_string(sol.status));
  return r;
}

IdentResult d_eps_single(const IdentPair& p, const Tolerances& tol) {
  return solve_identification(IdentificationProgram::single(p), tol);
}

IdentResult d_eps_quad(const IdentQuad& q, const Tolerances& tol) {
  return solve_identification(IdentificationProgram::quad(q), tol);
}

IdentResult d_eps_parity(const IdentQuad& q, const Tolerances& tol) {
  return solve_identification(IdentificationProgram::parity(q), tol);
}

DualCertificateSingle dual_single(const DensityMatrix& beta0, const DensityMatrix& beta1, double eps,
                                  const Tolerances& tol) {
  return d_eps_single(IdentPair(beta0, beta1, eps), tol).certificate;
}

std::array<HermitianMatrix, 2> single_dual_rhs(const DensityMatrix& beta0, const DensityMatrix& beta1,
                                               double eps, double z_b) {
  const double right = 1.0 + eps * z_b;
  const double wrong = 1.0 - (1.0 - eps) * z_b;
  return {HermitianMatrix::symmetrized(0.5 * (right * beta0.matrix() + wrong * beta1.matrix())),
          HermitianMatrix::symmetrized(0.5 * (right * beta1.matrix() + wrong * beta0.matrix()))};
}

std::array<HermitianMatrix, 4> quad_dual_rhs(const DensityMatrix& alpha0, const DensityMatrix& alpha1,
                                             const DensityMatrix& beta0, const DensityMatrix& beta1,
                                             double eps_quad, double z) {
  const double right = 1.0 + eps_quad * z;
  const double wrong = 1.0 - (1.0 - eps_quad) * z;
  const ComplexMatrix& a0 = alpha0.matrix();
  const ComplexMatrix& a1 = alpha1.matrix();
  const ComplexMatrix asum = a0 + a1;
  auto term = [&](const ComplexMatrix& hit, const ComplexMatrix& miss, const ComplexMatrix& b_hit,
                  const ComplexMatrix& b_miss) {
    return HermitianMatrix::symmetrized(
        0.25 * (linmat::tensor(right * hit + wrong * miss, b_hit) + wrong * linmat::tensor(asum, b_miss)));
  };
  const auto& b0 = beta0.matrix();
  const auto& b1 = beta1.matrix();
  return {term(a0, a1, b0, b1), term(a0, a1, b1, b0), term(a1, a0, b0, b1), term(a1, a0, b1, b0)};
}

// ---------------------------------------------------------------------------

double lifted_z(double eps, double z_b) {
  return 16.0 * (1.0 - eps) / (1.0 - eps / 2.0) * z_b + 4.0 / (1.0 - eps);
}

namespace {

// Residuals below this are rounding noise: the states are parallel.
constexpr double kParallel = 1e-14;

ComplexVector residual(const PureState& v, const PureState& ref) {
  return v.amplitudes() - linmat::inner(ref, v) * ref.amplitudes();
}

// Unit vector along the part of `v` orthogonal to `ref`; zero when v is
// parallel to ref.
ComplexVector perp_component(const PureState& v, const PureState& ref) {
  const ComplexVector w = residual(v, ref);
  const double n = w.norm();
  if (n <= kParallel) return ComplexVector::Zero(w.size());
  return w / n;
}

}  // namespace

// The residual norm is accurate near 0, where sqrt(1 - |<a0|a1>|^2) is not.
double overlap_delta(const PureState& a0, const PureState& a1) {
  if (a0.dim() != a1.dim()) throw InputError("overlap_delta: dimension mismatch");
  const double n = residual(a1, a0).norm();
  return n <= kParallel ? 0.0 : std::min(1.0, n);
}

LiftResult dual_lift(const PureState& alpha0, const PureState& alpha1, const DensityMatrix& beta0,
                     const DensityMatrix& beta1, double eps, const DualCertificateSingle& cert,
                     const Tolerances& tol) {
  check_eps(eps);
  if (alpha0.dim() != alpha1.dim()) throw InputError("dual_lift: alpha dimension mismatch");
  require_same_dim(beta0, beta1, "dual_lift betas");
  if (cert.z < 0.0) throw InputError("dual_lift: z_b must be nonnegative");
  const auto single = IdentificationProgram::single(IdentPair(beta0, beta1, eps));
  if (certificate_slack(single, cert.x, cert.z).min() < -tol.certificate_slack)
    throw InputError("dual_lift: certificate is infeasible for the given betas");

  const double delta = overlap_delta(alpha0, alpha1);
  const double d2 = delta * delta;
  const double z = lifted_z(eps, cert.z);
  const Eigen::Index dim = alpha0.dim() * beta0.dim();

  HermitianMatrix x = HermitianMatrix::zero(dim);
  if (delta > 0.0) {
    const auto perp1 = HermitianMatrix::projector(perp_component(alpha0, alpha1));
    const auto perp0 = HermitianMatrix::projector(perp_component(alpha1, alpha0));
    const auto xs = single_dual_rhs(beta0, beta1, eps, cert.z);
    const HermitianMatrix ys[4] = {linmat::tensor(perp1, xs[0]) * (4.0 * d2),
                                   linmat::tensor(perp1, xs[1]) * (4.0 * d2),
                                   linmat::tensor(perp0, xs[0]) * (4.0 * d2),
                                   linmat::tensor(perp0, xs[1]) * (4.0 * d2)};
    for (const auto& y : ys) x = x + linmat::pos_part(y, tol);
  }

  const auto rhs = quad_dual_rhs(DensityMatrix::from_pure(alpha0), DensityMatrix::from_pure(alpha1),
                                 beta0, beta1, eps / 2.0, z);
  LiftResult r{{x, z, x.trace()}, delta, {}, 16.0 * d2 * cert.x.trace()};
  for (int i = 0; i < 4; ++i) r.slack_min_eigenvalues[i] = linmat::min_eigenvalue(x - rhs[i]);
  return r;
}

Claim2Report claim2_scalars(double eps, double z_b, double delta) {
  Claim2Report r{};
  const double z = lifted_z(eps, z_b);
  const double d2 = delta * delta;
  r.z = z;
  r.delta = delta;
  r.first_scalar = (z * (1.0 - eps) - 2.0) * (7.0 + 8.0 * eps * z_b - eps / 2.0 * z) -
                   std::pow(1.0 + eps / 2.0 * z, 2);
  const double u = (1.0 - eps / 2.0) * z - 1.0;
  r.second_scalar = (2.0 - d2) * u * (7.0 - 8.0 * (1.0 - eps) * z_b + (1.0 - eps / 2.0) * z) -
                    (1.0 - d2) * u * u;
  r.reduced_linear = (17.0 - 4.0 / ((1.0 - eps) * (1.0 - eps))) +
                     16.0 * z_b * (7.0 / (1.0 - eps / 2.0) - 17.0 * eps);
  r.scalars_hold = r.first_scalar > 0.0 && r.second_scalar > 0.0;
  r.matrices_hold = true;
  return r;
}

Claim2Report verify_claim2(const PureState& rho0, const PureState& rho1, const DensityMatrix& sigma0,
                           const DensityMatrix& sigma1, double eps, double z_b, const Tolerances& tol) {
  check_eps(eps);
  if (z_b < 0.0) throw InputError("verify_claim2: z_b must be nonnegative");
  if (rho0.dim() != rho1.dim()) throw InputError("verify_claim2: rho dimension mismatch");
  require_same_dim(sigma0, sigma1, "verify_claim2 sigmas");

  const double delta = overlap_delta(rho0, rho1);
  Claim2Report r = claim2_scalars(eps, z_b, delta);
  const double z = r.z;
  const double ep = eps / 2.0;

  // Coordinates in the orthonormal basis (rho1, rho1^perp) of the span; the
  // phase of rho0 is irrelevant for the projectors.
  const ComplexVector perp = perp_component(rho0, rho1);
  ComplexVector c0(2);
  c0(0) = linmat::inner(rho1, rho0);
  c0(1) = perp.size() ? perp.dot(rho0.amplitudes()) : linmat::Complex(0.0);
  const ComplexMatrix p0 = c0 * c0.adjoint();
  ComplexMatrix p1 = ComplexMatrix::Zero(2, 2);
  p1(0, 0) = 1.0;
  ComplexMatrix pp = ComplexMatrix::Zero(2, 2);
  pp(1, 1) = 1.0;

  const double d2 = delta * delta;
  const double wrong = 1.0 - (1.0 - ep) * z;
  const ComplexMatrix first =
      4.0 * d2 * pp * 0.5 * (1.0 + eps * z_b) - 0.25 * ((1.0 + ep * z) * p0 + wrong * p1);
  const ComplexMatrix second =
      4.0 * d2 * pp * 0.5 * (1.0 - (1.0 - eps) * z_b) - 0.25 * wrong * (p0 + p1);
  r.first_matrix_min_eigenvalue = linmat::min_eigenvalue(HermitianMatrix::symmetrized(first));
  r.second_matrix_min_eigenvalue = linmat::min_eigenvalue(HermitianMatrix::symmetrized(second));
  const ComplexMatrix full =
      linmat::tensor(first, sigma0.matrix()) + linmat::tensor(second, sigma1.matrix());
  r.full_min_eigenvalue = linmat::min_eigenvalue(HermitianMatrix::symmetrized(full));
  const double floor = -tol.certificate_slack;
  r.matrices_hold = r.first_matrix_min_eigenvalue >= floor && r.second_matrix_min_eigenvalue >= floor &&
                    r.full_min_eigenvalue >= floor;
  return r;
}

// ---------------------------------------------------------------------------

PureState as_pure(const DensityMatrix& rho, double tol) {
  const auto ed = linmat::eig_hermitian(rho.hermitian());
  if (ed.values(0) < 1.0 - tol) throw InputError("state is not pure");
  return PureState::normalized(ed.vectors.col(0));
}

DirectProductReport check_direct_product_pure(const IdentQuad& q, const Tolerances& tol) {
  const PureState a0 = as_pure(q.alpha0);
  const PureState a1 = as_pure(q.alpha1);
  const double d2 = std::pow(overlap_delta(a0, a1), 2);

  const auto b = d_eps_single(IdentPair(q.beta0, q.beta1, q.eps), tol);
  const auto p = d_eps_quad(IdentQuad(q.alpha0, q.alpha1, q.beta0, q.beta1, q.eps / 2.0), tol);
  const auto lift = dual_lift(a0, a1, q.beta0, q.beta1, q.eps, b.certificate, tol);

  DirectProductReport r;
  r.a_lower = 0.5 * d2;
  r.b = b.value;
  r.p = p.value;
  r.bound = 16.0 * d2 * b.value;
  r.margin = r.bound - r.p;
  r.satisfied = r.p <= r.bound + kDirectProductSlack;
  r.delta = std::sqrt(d2);
  r.b_dual = b.certificate.value;
  r.p_dual = p.certificate.value;
  r.lifted_value = lift.certificate.value;
  r.theorem_bound = r.bound;
  r.fidelity = std::sqrt(1.0 - d2);
  r.purification_overlap = r.fidelity;
  return r;
}

DirectProductReport check_corollary_mixed(const IdentQuad& q, const Tolerances& tol) {
  const double a = linmat::trace_norm(q.alpha0.hermitian() - q.alpha1.hermitian(), tol);
  const auto b = d_eps_single(IdentPair(q.beta0, q.beta1, q.eps), tol);
  const auto p = d_eps_quad(IdentQuad(q.alpha0, q.alpha1, q.beta0, q.beta1, q.eps / 2.0), tol);
  const auto [pa0, pa1] = linmat::purify_pair(q.alpha0, q.alpha1, tol);
  const double overlap = std::abs(linmat::inner(pa0, pa1));
  const double d2 = std::max(0.0, 1.0 - overlap * overlap);
  const auto lift = dual_lift(pa0, pa1, q.beta0, q.beta1, q.eps, b.certificate, tol);

  DirectProductReport r;
  r.a_lower = a;
  r.b = b.value;
  r.p = p.value;
  r.bound = 32.0 * a * b.value;
  r.margin = r.bound - r.p;
  r.satisfied = r.p <= r.bound + kDirectProductSlack;
  r.delta = std::sqrt(d2);
  r.b_dual = b.certificate.value;
  r.p_dual = p.certificate.value;
  r.lifted_value = lift.certificate.value;
  r.theorem_bound = 16.0 * d2 * b.value;
  r.fidelity = linmat::fidelity(q.alpha0, q.alpha1, tol);
  r.purification_overlap = overlap;
  return r;
}

// ---------------------------------------------------------------------------

std::array<PureState, 2> counterexample_states(double delta) {
  if (!(delta >= 0.0 && delta <= 1.0)) throw InputError("delta must lie in [0, 1]");
  ComplexVector v(2);
  v << std::sqrt(1.0 - delta * delta), delta;
  return {PureState::basis(2, 0), PureState(v)};
}

PredictorMeasurement parity_witness(double delta) {
  ComplexVector v = ComplexVector::Zero(4);
  v << delta, -1.0, -1.0, 0.0;
  return PredictorMeasurement::parity(HermitianMatrix::projector(v / v.norm()), HermitianMatrix::zero(4));
}

PredictorMeasurement quarter_witness(double delta) {
  ComplexVector w = ComplexVector::Zero(4);
  w << delta, -2.0 / 3.0, -2.0 / 3.0, 0.0;
  const auto z = HermitianMatrix::zero(4);
  return PredictorMeasurement::quad(HermitianMatrix::projector(w / w.norm()), z, z, z);
}

IdentQuad counterexample_quad(double delta, double eps) {
  const auto s = counterexample_states(delta);
  const auto r0 = DensityMatrix::from_pure(s[0]);
  const auto r1 = DensityMatrix::from_pure(s[1]);
  return IdentQuad(r0, r1, r0, r1, eps);
}

}  // namespace stateid::ident
