#include "stateid/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

#include "stateid/errors.hpp"

namespace stateid::sdp {

using linmat::Complex;
using linmat::HermitianMatrix;

std::string to_string(Status s) {
  switch (s) {
    case Status::Optimal: return "Optimal";
    case Status::Infeasible: return "Infeasible";
    case Status::Unbounded: return "Unbounded";
    case Status::MaxIter: return "MaxIter";
    case Status::NumericalFailure: return "NumericalFailure";
  }
  return "Unknown";
}

std::string to_string(Relation r) {
  switch (r) {
    case Relation::LessEqual: return "<=";
    case Relation::Equal: return "=";
    case Relation::GreaterEqual: return ">=";
  }
  return "?";
}

std::string to_string(Sense s) { return s == Sense::Maximize ? "maximize" : "minimize"; }

SolverOptions SolverOptions::from(const Tolerances& tol) {
  SolverOptions o;
  o.gap_tolerance = tol.sdp_gap;
  o.feasibility_tolerance = tol.sdp_feasibility;
  o.max_iterations = tol.sdp_max_iterations;
  o.infeasibility_tolerance = tol.sdp_infeasibility_certificate;
  return o;
}

namespace {

bool is_zero_block(const ComplexMatrix& m) { return m.size() == 0; }

// Re Tr[A^dagger B]
double frob(const ComplexMatrix& a, const ComplexMatrix& b) {
  double s = 0.0;
  const Complex* pa = a.data();
  const Complex* pb = b.data();
  for (Eigen::Index k = 0; k < a.size(); ++k)
    s += pa[k].real() * pb[k].real() + pa[k].imag() * pb[k].imag();
  return s;
}

ComplexMatrix symmetrize(const ComplexMatrix& m) { return 0.5 * (m + m.adjoint()); }

using Blocks = std::vector<ComplexMatrix>;

double blocks_inner(const Blocks& a, const Blocks& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += frob(a[k], b[k]);
  return s;
}

double min_eig(const ComplexMatrix& m) {
  if (m.rows() == 1) return m(0, 0).real();
  return linmat::min_eigenvalue(HermitianMatrix::symmetrized(m));
}

struct Term {
  std::size_t row;
  ComplexMatrix a;
};

// Equality-form problem: maximize <C, X> s.t. <A_i, X> = b_i, X >= 0.
struct StandardForm {
  std::vector<Eigen::Index> dims;
  std::size_t user_blocks = 0;
  Blocks c;
  std::vector<std::vector<std::size_t>> row_blocks;   // blocks touched by row i
  std::vector<std::vector<Term>> by_block;            // terms grouped per block
  Eigen::VectorXd b;
  double c_scale = 1.0;
  std::vector<double> row_scale;
  bool negated = false;

  std::size_t rows() const { return static_cast<std::size_t>(b.size()); }

  Eigen::VectorXd apply(const Blocks& x) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(b.size());
    for (std::size_t blk = 0; blk < dims.size(); ++blk)
      for (const Term& t : by_block[blk]) out(static_cast<Eigen::Index>(t.row)) += frob(t.a, x[blk]);
    return out;
  }

  Blocks adjoint(const Eigen::VectorXd& y) const {
    Blocks out;
    out.reserve(dims.size());
    for (std::size_t blk = 0; blk < dims.size(); ++blk) {
      ComplexMatrix m = ComplexMatrix::Zero(dims[blk], dims[blk]);
      for (const Term& t : by_block[blk]) m += y(static_cast<Eigen::Index>(t.row)) * t.a;
      out.push_back(std::move(m));
    }
    return out;
  }
};

StandardForm to_standard_form(const SdpProblem& p) {
  StandardForm f;
  f.user_blocks = p.block_dims.size();
  f.dims = p.block_dims;
  f.negated = p.sense == Sense::Minimize;

  std::size_t slacks = 0;
  for (const auto& con : p.constraints)
    if (con.relation != Relation::Equal) ++slacks;
  const std::size_t nblocks = f.user_blocks + slacks;
  f.by_block.resize(nblocks);

  double cmax = 0.0;
  for (const auto& cb : p.objective) cmax = std::max(cmax, linmat::max_abs(cb));
  f.c_scale = cmax > 0.0 ? cmax : 1.0;
  for (std::size_t blk = 0; blk < f.user_blocks; ++blk) {
    const auto d = p.block_dims[blk];
    ComplexMatrix cb = is_zero_block(p.objective[blk]) ? ComplexMatrix::Zero(d, d)
                                                       : ComplexMatrix(p.objective[blk]);
    if (f.negated) cb = -cb;
    f.c.push_back(cb / f.c_scale);
  }

  const std::size_t m = p.constraints.size();
  f.b.resize(static_cast<Eigen::Index>(m));
  f.row_scale.resize(m);
  f.row_blocks.resize(m);
  std::size_t next_slack = f.user_blocks;
  for (std::size_t i = 0; i < m; ++i) {
    const auto& con = p.constraints[i];
    double amax = 0.0;
    for (const auto& a : con.coeffs) amax = std::max(amax, linmat::max_abs(a));
    const double scale = amax > 0.0 ? amax : 1.0;
    f.row_scale[i] = scale;
    f.b(static_cast<Eigen::Index>(i)) = con.rhs / scale;
    for (std::size_t blk = 0; blk < f.user_blocks; ++blk) {
      if (is_zero_block(con.coeffs[blk]) || linmat::max_abs(con.coeffs[blk]) == 0.0) continue;
      f.by_block[blk].push_back({i, con.coeffs[blk] / scale});
      f.row_blocks[i].push_back(blk);
    }
    if (con.relation != Relation::Equal) {
      const double sign = con.relation == Relation::LessEqual ? 1.0 : -1.0;
      f.dims.push_back(1);
      f.c.push_back(ComplexMatrix::Zero(1, 1));
      f.by_block[next_slack].push_back({i, ComplexMatrix::Constant(1, 1, sign / scale)});
      f.row_blocks[i].push_back(next_slack);
      ++next_slack;
    }
  }
  return f;
}

struct Newton {
  Eigen::VectorXd dy;
  Blocks dx, ds;
};

// Largest step t with M + t dM >= 0, given a Cholesky factor of M.
double max_step(const ComplexMatrix& m, const ComplexMatrix& dm) {
  if (m.rows() == 1) {
    const double d = dm(0, 0).real();
    return d < 0.0 ? -m(0, 0).real() / d : std::numeric_limits<double>::infinity();
  }
  Eigen::LLT<ComplexMatrix> llt(m);
  if (llt.info() != Eigen::Success) return 0.0;
  const ComplexMatrix l = llt.matrixL();
  ComplexMatrix t = l.triangularView<Eigen::Lower>().solve(dm);
  t = l.triangularView<Eigen::Lower>().solve(ComplexMatrix(t.adjoint()));
  const double lmin = min_eig(symmetrize(t));
  return lmin < 0.0 ? -1.0 / lmin : std::numeric_limits<double>::infinity();
}

// Iterations allowed without halving the best merit before stopping.
constexpr int kPatience = 60;

class InteriorPoint {
 public:
  InteriorPoint(const StandardForm& f, const SolverOptions& o) : f_(f), opts_(o) {}

  SdpSolution run();

 private:
  bool factor_dual();
  std::optional<Eigen::MatrixXd> schur() const;
  Newton direction(const Eigen::MatrixXd& m, const Eigen::LDLT<Eigen::MatrixXd>& ldlt, double sigma_mu,
                   const Newton* predictor) const;
  double objective_primal() const { return blocks_inner(f_.c, x_); }
  double objective_dual() const { return f_.b.dot(y_); }
  Blocks dual_residual() const;
  SdpSolution finish(Status st, int iter) const;

  const StandardForm& f_;
  const SolverOptions& opts_;
  Blocks x_, s_, sinv_;
  Eigen::VectorXd y_;
};

bool InteriorPoint::factor_dual() {
  sinv_.clear();
  for (const auto& sb : s_) {
    Eigen::LLT<ComplexMatrix> llt(sb);
    if (llt.info() != Eigen::Success) return false;
    sinv_.push_back(symmetrize(llt.solve(ComplexMatrix::Identity(sb.rows(), sb.cols()))));
  }
  return true;
}

Blocks InteriorPoint::dual_residual() const {
  Blocks r = f_.adjoint(y_);
  for (std::size_t k = 0; k < r.size(); ++k) r[k] -= s_[k] + f_.c[k];
  return r;
}

std::optional<Eigen::MatrixXd> InteriorPoint::schur() const {
  const auto m = static_cast<Eigen::Index>(f_.rows());
  Eigen::MatrixXd schur = Eigen::MatrixXd::Zero(m, m);
  for (std::size_t blk = 0; blk < f_.dims.size(); ++blk) {
    const auto& terms = f_.by_block[blk];
    for (std::size_t ti = 0; ti < terms.size(); ++ti) {
      const ComplexMatrix g = x_[blk] * terms[ti].a * sinv_[blk];
      for (std::size_t tj = ti; tj < terms.size(); ++tj) {
        const double v = frob(terms[tj].a, g);
        const auto i = static_cast<Eigen::Index>(terms[ti].row);
        const auto j = static_cast<Eigen::Index>(terms[tj].row);
        schur(i, j) += v;
        if (i != j) schur(j, i) += v;
      }
    }
  }
  if (!schur.allFinite()) return std::nullopt;
  return schur;
}

Newton InteriorPoint::direction(const Eigen::MatrixXd& m, const Eigen::LDLT<Eigen::MatrixXd>& ldlt,
                                double sigma_mu,
                                const Newton* predictor) const {
  const Blocks rd = dual_residual();
  const Eigen::VectorXd rp = f_.b - f_.apply(x_);
  // Target for the X update before the A^T(dy) term:
  //   W = sigma_mu S^-1 - X - X Rd S^-1 - dXp dSp S^-1
  Blocks w;
  for (std::size_t k = 0; k < x_.size(); ++k) {
    ComplexMatrix wk = sigma_mu * sinv_[k] - x_[k] - x_[k] * rd[k] * sinv_[k];
    if (predictor) wk -= predictor->dx[k] * predictor->ds[k] * sinv_[k];
    w.push_back(std::move(wk));
  }
  Newton n;
  const Eigen::VectorXd rhs = f_.apply(w) - rp;
  if (rhs.size() > 0) {
    // The Schur matrix grows ill-conditioned near the boundary; two steps of
    // iterative refinement keep the primal residual from creeping back up.
    n.dy = ldlt.solve(rhs);
    for (int k = 0; k < 2; ++k) n.dy += ldlt.solve(rhs - m * n.dy);
  }
  n.ds = f_.adjoint(n.dy);
  for (std::size_t k = 0; k < n.ds.size(); ++k) n.ds[k] += rd[k];
  for (std::size_t k = 0; k < x_.size(); ++k)
    n.dx.push_back(symmetrize(w[k] - x_[k] * (n.ds[k] - rd[k]) * sinv_[k]));
  return n;
}

SdpSolution InteriorPoint::finish(Status st, int iter) const {
  SdpSolution sol;
  sol.status = st;
  sol.iterations = iter;
  const double c = f_.c_scale;
  const double sign = f_.negated ? -1.0 : 1.0;
  for (std::size_t blk = 0; blk < f_.user_blocks; ++blk) {
    sol.primal_blocks.push_back(symmetrize(x_[blk]));
    sol.dual_slacks.push_back(symmetrize(c * s_[blk]));
  }
  sol.dual_multipliers.resize(f_.rows());
  for (std::size_t i = 0; i < f_.rows(); ++i)
    sol.dual_multipliers[i] = sign * c * y_(static_cast<Eigen::Index>(i)) / f_.row_scale[i];
  sol.primal_value = sign * c * objective_primal();
  sol.dual_value = sign * c * objective_dual();
  sol.gap = std::abs(sol.primal_value - sol.dual_value) /
            (c + std::abs(sol.primal_value) + std::abs(sol.dual_value));
  const Eigen::VectorXd rp = f_.b - f_.apply(x_);
  const double pres = rp.size() ? rp.cwiseAbs().maxCoeff() / (1.0 + f_.b.cwiseAbs().maxCoeff()) : 0.0;
  double cnorm = 0.0;
  for (const auto& cb : f_.c) cnorm = std::max(cnorm, linmat::max_abs(cb));
  double dres = 0.0;
  for (const auto& r : dual_residual()) dres = std::max(dres, linmat::max_abs(r));
  sol.max_residual = std::max(pres, dres / (1.0 + cnorm));
  return sol;
}

SdpSolution InteriorPoint::run() {
  const std::size_t nb = f_.dims.size();
  double n_total = 0.0;
  for (auto d : f_.dims) n_total += static_cast<double>(d);

  double cnorm = 0.0;
  for (const auto& cb : f_.c) cnorm = std::max(cnorm, cb.norm());
  double anorm_max = 0.0;
  std::vector<double> anorm(f_.rows(), 0.0);
  for (std::size_t blk = 0; blk < nb; ++blk)
    for (const Term& t : f_.by_block[blk]) anorm[t.row] += t.a.squaredNorm();
  double xi = std::max(10.0, std::sqrt(n_total));
  for (std::size_t i = 0; i < f_.rows(); ++i) {
    anorm[i] = std::sqrt(anorm[i]);
    anorm_max = std::max(anorm_max, anorm[i]);
    xi = std::max(xi, std::sqrt(n_total) * (1.0 + std::abs(f_.b(static_cast<Eigen::Index>(i)))) /
                          (1.0 + anorm[i]));
  }
  const double eta = std::max({10.0, std::sqrt(n_total), cnorm, anorm_max});

  for (std::size_t blk = 0; blk < nb; ++blk) {
    x_.push_back(xi * ComplexMatrix::Identity(f_.dims[blk], f_.dims[blk]));
    s_.push_back(eta * ComplexMatrix::Identity(f_.dims[blk], f_.dims[blk]));
  }
  y_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(f_.rows()));

  const double infinity = std::numeric_limits<double>::infinity();
  int stalled = 0;
  // Problems without a strictly feasible primal converge slowly and lose
  // accuracy late; keep the best iterate and give up once it stops improving.
  auto merit = [&](const SdpSolution& s) {
    return std::max(s.gap / opts_.gap_tolerance, s.max_residual / opts_.feasibility_tolerance);
  };
  std::optional<SdpSolution> best;
  int since_best = 0;
  auto give_up = [&](Status st, int iter) {
    SdpSolution out = best ? *best : finish(st, iter);
    out.status = st;
    out.iterations = iter;
    return out;
  };
  for (int iter = 0; iter < opts_.max_iterations; ++iter) {
    const SdpSolution cur = finish(Status::Optimal, iter);
    if (cur.gap <= opts_.gap_tolerance && cur.max_residual <= opts_.feasibility_tolerance)
      return cur;
    if (!best || merit(cur) < 0.5 * merit(*best)) since_best = 0;
    else if (++since_best >= kPatience) return give_up(Status::NumericalFailure, iter);
    if (!best || merit(cur) < merit(*best)) best = cur;

    // Certificates of infeasibility once the iterates diverge.
    const double pobj = objective_primal();
    const double dobj = objective_dual();
    if (dobj < -1e8) {
      const Blocks aty = f_.adjoint(y_ / -dobj);
      double lmin = infinity;
      for (const auto& m : aty) lmin = std::min(lmin, min_eig(m));
      if (lmin >= -opts_.infeasibility_tolerance) return finish(Status::Infeasible, iter);
    }
    if (pobj > 1e8) {
      Blocks xs = x_;
      for (auto& m : xs) m /= pobj;
      if (f_.apply(xs).cwiseAbs().maxCoeff() <= opts_.infeasibility_tolerance)
        return finish(Status::Unbounded, iter);
    }

    if (!factor_dual()) return give_up(Status::NumericalFailure, iter);
    const double mu = blocks_inner(x_, s_) / n_total;
    if (!(mu > 0.0) || !std::isfinite(mu)) return give_up(Status::NumericalFailure, iter);

    Eigen::LDLT<Eigen::MatrixXd> ldlt;
    Eigen::MatrixXd schur_m;
    if (f_.rows() > 0) {
      const auto m = schur();
      if (!m) return give_up(Status::NumericalFailure, iter);
      schur_m = *m;
      ldlt.compute(schur_m);
      if (ldlt.info() != Eigen::Success) return give_up(Status::NumericalFailure, iter);
    }

    auto steps = [&](const Newton& n) {
      double ap = infinity, ad = infinity;
      for (std::size_t blk = 0; blk < nb; ++blk) {
        ap = std::min(ap, max_step(x_[blk], n.dx[blk]));
        ad = std::min(ad, max_step(s_[blk], n.ds[blk]));
      }
      return std::pair{ap, ad};
    };

    const Newton pred = direction(schur_m, ldlt, 0.0, nullptr);
    auto [ap0, ad0] = steps(pred);
    ap0 = std::min(1.0, ap0);
    ad0 = std::min(1.0, ad0);
    double after = 0.0;
    for (std::size_t blk = 0; blk < nb; ++blk)
      after += frob(x_[blk] + ap0 * pred.dx[blk], s_[blk] + ad0 * pred.ds[blk]);
    const double ratio = std::clamp(after / (mu * n_total), 0.0, 1.0);
    const double sigma = ratio * ratio * ratio;

    const Newton corr = direction(schur_m, ldlt, sigma * mu, &pred);
    auto [ap, ad] = steps(corr);
    ap = std::min(1.0, opts_.step_fraction * ap);
    ad = std::min(1.0, opts_.step_fraction * ad);
    if (!std::isfinite(ap) || !std::isfinite(ad)) return give_up(Status::NumericalFailure, iter);

    for (std::size_t blk = 0; blk < nb; ++blk) {
      x_[blk] = symmetrize(x_[blk] + ap * corr.dx[blk]);
      s_[blk] = symmetrize(s_[blk] + ad * corr.ds[blk]);
    }
    y_ += ad * corr.dy;

    stalled = (ap < 1e-9 && ad < 1e-9) ? stalled + 1 : 0;
    if (stalled >= 5) return give_up(Status::NumericalFailure, iter + 1);
  }
  return give_up(Status::MaxIter, opts_.max_iterations);
}

void check_blocks(const SdpProblem& p, const std::vector<ComplexMatrix>& blocks) {
  if (blocks.size() != p.block_dims.size()) throw InputError("block count mismatch");
  for (std::size_t k = 0; k < blocks.size(); ++k)
    if (blocks[k].rows() != p.block_dims[k] || blocks[k].cols() != p.block_dims[k])
      throw InputError("block dimension mismatch");
}

double block_trace(const ComplexMatrix& coeff, const ComplexMatrix& x) {
  return is_zero_block(coeff) ? 0.0 : frob(coeff, x);
}

}  // namespace

void SdpProblem::validate(const Tolerances& tol) const {
  if (block_dims.empty()) throw InputError("SDP needs at least one block");
  for (auto d : block_dims)
    if (d <= 0) throw InputError("block dimensions must be positive");
  if (objective.size() != block_dims.size())
    throw InputError("objective must have one matrix per block");
  auto check = [&](const ComplexMatrix& m, std::size_t blk, const char* what) {
    if (is_zero_block(m)) return;
    if (m.rows() != block_dims[blk] || m.cols() != block_dims[blk]) {
      std::ostringstream os;
      os << what << " matrix for block " << blk << " has wrong dimension";
      throw InputError(os.str());
    }
    HermitianMatrix(m, tol);
  };
  for (std::size_t blk = 0; blk < block_dims.size(); ++blk) check(objective[blk], blk, "objective");
  for (const auto& con : constraints) {
    if (con.coeffs.size() != block_dims.size())
      throw InputError("constraint must have one coefficient matrix per block");
    if (!std::isfinite(con.rhs)) throw InputError("constraint right-hand side is not finite");
    for (std::size_t blk = 0; blk < block_dims.size(); ++blk) check(con.coeffs[blk], blk, "constraint");
  }
}

SdpSolution solve(const SdpProblem& p, const SolverOptions& opts) {
  p.validate();
  const StandardForm f = to_standard_form(p);
  InteriorPoint ip(f, opts);
  return ip.run();
}

PrimalReport check_primal_feasibility(const SdpProblem& p,
                                      const std::vector<ComplexMatrix>& candidate) {
  check_blocks(p, candidate);
  PrimalReport r;
  r.min_block_eigenvalue = std::numeric_limits<double>::infinity();
  for (const auto& x : candidate) r.min_block_eigenvalue = std::min(r.min_block_eigenvalue, min_eig(x));
  for (const auto& con : p.constraints) {
    double lhs = 0.0;
    for (std::size_t blk = 0; blk < candidate.size(); ++blk) lhs += block_trace(con.coeffs[blk], candidate[blk]);
    double v = 0.0;
    switch (con.relation) {
      case Relation::LessEqual: v = std::max(0.0, lhs - con.rhs); break;
      case Relation::GreaterEqual: v = std::max(0.0, con.rhs - lhs); break;
      case Relation::Equal: v = std::abs(lhs - con.rhs); break;
    }
    r.violations.push_back(v);
    r.max_violation = std::max(r.max_violation, v);
  }
  return r;
}

std::vector<ComplexMatrix> dual_slack(const SdpProblem& p, const std::vector<double>& y) {
  if (y.size() != p.constraints.size()) throw InputError("one multiplier per constraint required");
  std::vector<ComplexMatrix> out;
  for (std::size_t blk = 0; blk < p.block_dims.size(); ++blk) {
    const auto d = p.block_dims[blk];
    ComplexMatrix ay = ComplexMatrix::Zero(d, d);
    for (std::size_t i = 0; i < y.size(); ++i)
      if (!is_zero_block(p.constraints[i].coeffs[blk])) ay += y[i] * p.constraints[i].coeffs[blk];
    const ComplexMatrix c = is_zero_block(p.objective[blk]) ? ComplexMatrix::Zero(d, d)
                                                            : ComplexMatrix(p.objective[blk]);
    out.push_back(symmetrize(p.sense == Sense::Maximize ? ComplexMatrix(ay - c) : ComplexMatrix(c - ay)));
  }
  return out;
}

DualReport check_dual_feasibility(const SdpProblem& p, const std::vector<double>& y) {
  DualReport r;
  const auto slacks = dual_slack(p, y);
  r.min_slack_eigenvalue = std::numeric_limits<double>::infinity();
  for (const auto& s : slacks) {
    const double l = min_eig(s);
    r.slack_min_eigenvalues.push_back(l);
    r.min_slack_eigenvalue = std::min(r.min_slack_eigenvalue, l);
  }
  for (std::size_t i = 0; i < y.size(); ++i) {
    const Relation rel = p.constraints[i].relation;
    // Nonnegative multiplier expected on <= for maximize and >= for minimize.
    const bool natural = (p.sense == Sense::Maximize) == (rel == Relation::LessEqual);
    if (rel == Relation::Equal) {
    } else if (natural ? y[i] < 0.0 : y[i] > 0.0) {
      r.sign_violations.push_back(i);
    }
    r.bound += y[i] * p.constraints[i].rhs;
  }
  return r;
}

std::vector<ComplexMatrix> hermitian_basis(Eigen::Index d) {
  std::vector<ComplexMatrix> basis;
  const double r = 1.0 / std::sqrt(2.0);
  for (Eigen::Index k = 0; k < d; ++k) {
    ComplexMatrix m = ComplexMatrix::Zero(d, d);
    m(k, k) = 1.0;
    basis.push_back(std::move(m));
  }
  for (Eigen::Index k = 0; k < d; ++k)
    for (Eigen::Index l = k + 1; l < d; ++l) {
      ComplexMatrix re = ComplexMatrix::Zero(d, d);
      re(k, l) = r;
      re(l, k) = r;
      basis.push_back(std::move(re));
      ComplexMatrix im = ComplexMatrix::Zero(d, d);
      im(k, l) = Complex(0.0, r);
      im(l, k) = Complex(0.0, -r);
      basis.push_back(std::move(im));
    }
  return basis;
}

}  // namespace stateid::sdp
