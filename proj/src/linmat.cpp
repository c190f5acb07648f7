#include "stateid/linmat.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include "stateid/errors.hpp"

namespace stateid::linmat {

namespace {

bool all_finite(const ComplexMatrix& m) {
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    if (!std::isfinite(m.data()[i].real()) || !std::isfinite(m.data()[i].imag())) return false;
  }
  return true;
}

ComplexMatrix hermitian_part(const ComplexMatrix& m) {
  ComplexMatrix h = 0.5 * (m + m.adjoint());
  for (Eigen::Index i = 0; i < h.rows(); ++i) h(i, i) = Complex(h(i, i).real(), 0.0);
  return h;
}

double off_diagonal_norm(const ComplexMatrix& a) {
  double s = 0.0;
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      if (i != j) s += std::norm(a(i, j));
  return std::sqrt(s);
}

// Applies a function to the eigenvalues: V f(L) V^dagger.
template <typename F>
ComplexMatrix spectral_map(const EigenDecomposition& e, F f) {
  ComplexMatrix scaled = e.vectors;
  for (Eigen::Index k = 0; k < scaled.cols(); ++k) scaled.col(k) *= f(e.values(k));
  return scaled * e.vectors.adjoint();
}

}  // namespace

// ---------------------------------------------------------------------------
// HermitianMatrix

HermitianMatrix::HermitianMatrix(const ComplexMatrix& m, const Tolerances& tol) {
  if (m.rows() == 0 || m.rows() != m.cols())
    throw InputError("Hermitian matrix must be square and non-empty");
  if (!all_finite(m)) throw InputError("matrix has non-finite entries");
  const double asym = max_abs(m - m.adjoint());
  if (asym > tol.hermitian) {
    std::ostringstream os;
    os << "matrix is not Hermitian (max |A - A^dagger| = " << asym << ")";
    throw InputError(os.str());
  }
  m_ = hermitian_part(m);
}

HermitianMatrix HermitianMatrix::zero(Eigen::Index dim) {
  return {ComplexMatrix::Zero(dim, dim), Unchecked{}};
}

HermitianMatrix HermitianMatrix::identity(Eigen::Index dim) {
  return {ComplexMatrix::Identity(dim, dim), Unchecked{}};
}

HermitianMatrix HermitianMatrix::diagonal(const RealVector& diag) {
  return {diag.cast<Complex>().asDiagonal().toDenseMatrix(), Unchecked{}};
}

HermitianMatrix HermitianMatrix::projector(const ComplexVector& v) {
  return symmetrized(v * v.adjoint());
}

HermitianMatrix HermitianMatrix::symmetrized(const ComplexMatrix& m) {
  if (m.rows() != m.cols()) throw InputError("symmetrized: matrix must be square");
  return {hermitian_part(m), Unchecked{}};
}

HermitianMatrix HermitianMatrix::operator+(const HermitianMatrix& o) const {
  if (dim() != o.dim()) throw InputError("dimension mismatch in Hermitian sum");
  return {m_ + o.m_, Unchecked{}};
}

HermitianMatrix HermitianMatrix::operator-(const HermitianMatrix& o) const {
  if (dim() != o.dim()) throw InputError("dimension mismatch in Hermitian difference");
  return {m_ - o.m_, Unchecked{}};
}

HermitianMatrix HermitianMatrix::operator*(double s) const { return {m_ * s, Unchecked{}}; }

// ---------------------------------------------------------------------------
// PureState / DensityMatrix

PureState::PureState(const ComplexVector& amplitudes, const Tolerances& tol) : v_(amplitudes) {
  if (v_.size() == 0) throw InputError("pure state must be non-empty");
  if (!all_finite(v_)) throw InputError("pure state has non-finite amplitudes");
  if (std::abs(v_.norm() - 1.0) > tol.pure_norm) throw InputError("pure state is not normalized");
}

PureState PureState::normalized(const ComplexVector& v) {
  const double n = v.norm();
  if (!(n > 0.0)) throw InputError("cannot normalize a zero vector");
  return PureState(v / n);
}

PureState PureState::basis(Eigen::Index dim, Eigen::Index k) {
  if (k < 0 || k >= dim) throw InputError("basis index out of range");
  ComplexVector v = ComplexVector::Zero(dim);
  v(k) = 1.0;
  return PureState(v);
}

DensityMatrix::DensityMatrix(const ComplexMatrix& m, const Tolerances& tol)
    : DensityMatrix(HermitianMatrix(m, tol), tol) {}

DensityMatrix::DensityMatrix(const HermitianMatrix& h, const Tolerances& tol) : h_(h) {
  if (std::abs(h_.trace() - 1.0) > tol.density_trace) {
    std::ostringstream os;
    os << "density matrix trace is " << h_.trace() << ", expected 1";
    throw InputError(os.str());
  }
  const double lmin = min_eigenvalue(h_, tol);
  if (lmin < -tol.density_min_eig) {
    std::ostringstream os;
    os << "density matrix has negative eigenvalue " << lmin;
    throw InputError(os.str());
  }
}

DensityMatrix DensityMatrix::from_pure(const PureState& psi) {
  return DensityMatrix(HermitianMatrix::projector(psi.amplitudes()));
}

DensityMatrix DensityMatrix::diagonal(const RealVector& probabilities) {
  return DensityMatrix(HermitianMatrix::diagonal(probabilities));
}

DensityMatrix DensityMatrix::maximally_mixed(Eigen::Index dim) {
  return DensityMatrix(HermitianMatrix::identity(dim) * (1.0 / static_cast<double>(dim)));
}

ComplexMatrix EigenDecomposition::reconstruct() const {
  return spectral_map(*this, [](double x) { return x; });
}

// ---------------------------------------------------------------------------
// Products and partial trace

ComplexMatrix tensor(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

HermitianMatrix tensor(const HermitianMatrix& a, const HermitianMatrix& b) {
  return HermitianMatrix::symmetrized(tensor(a.matrix(), b.matrix()));
}

DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b) {
  return DensityMatrix(tensor(a.hermitian(), b.hermitian()));
}

PureState tensor(const PureState& a, const PureState& b) {
  return PureState::normalized(tensor(ComplexMatrix(a.amplitudes()), ComplexMatrix(b.amplitudes())));
}

ComplexMatrix partial_trace(const ComplexMatrix& m, Eigen::Index dA, Eigen::Index dB,
                            Subsystem keep) {
  if (dA <= 0 || dB <= 0 || m.rows() != dA * dB || m.cols() != dA * dB)
    throw InputError("partial_trace: matrix is not (dA*dB)-square");
  if (keep == Subsystem::A) {
    ComplexMatrix out = ComplexMatrix::Zero(dA, dA);
    for (Eigen::Index i = 0; i < dA; ++i)
      for (Eigen::Index j = 0; j < dA; ++j)
        for (Eigen::Index k = 0; k < dB; ++k) out(i, j) += m(i * dB + k, j * dB + k);
    return out;
  }
  ComplexMatrix out = ComplexMatrix::Zero(dB, dB);
  for (Eigen::Index k = 0; k < dA; ++k) out += m.block(k * dB, k * dB, dB, dB);
  return out;
}

// ---------------------------------------------------------------------------
// Eigendecomposition

EigenDecomposition eig_hermitian(const HermitianMatrix& input, const Tolerances& tol) {
  const Eigen::Index n = input.dim();
  ComplexMatrix a = input.matrix();
  ComplexMatrix v = ComplexMatrix::Identity(n, n);
  const double scale = a.norm();

  if (scale > 0.0) {
    const double stop = tol.eig_threshold * scale;
    for (int sweep = 0; sweep < tol.eig_max_sweeps; ++sweep) {
      if (off_diagonal_norm(a) <= stop) break;
      for (Eigen::Index p = 0; p < n - 1; ++p) {
        for (Eigen::Index q = p + 1; q < n; ++q) {
          const Complex apq = a(p, q);
          const double mag = std::abs(apq);
          if (mag == 0.0) continue;
          // Phase-rotate column q so the pivot is real, then a real rotation.
          const Complex phase = apq / mag;  // e^{i phi}
          const double app = a(p, p).real();
          const double aqq = a(q, q).real();
          const double theta = (aqq - app) / (2.0 * mag);
          const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
          const double c = 1.0 / std::sqrt(t * t + 1.0);
          const double s = t * c;
          // J = diag(1, conj(phase)) * [[c, s], [-s, c]]
          const Complex jpp = c;
          const Complex jpq = s;
          const Complex jqp = -s * std::conj(phase);
          const Complex jqq = c * std::conj(phase);
          for (Eigen::Index k = 0; k < n; ++k) {
            const Complex akp = a(k, p);
            const Complex akq = a(k, q);
            a(k, p) = akp * jpp + akq * jqp;
            a(k, q) = akp * jpq + akq * jqq;
          }
          for (Eigen::Index k = 0; k < n; ++k) {
            const Complex apk = a(p, k);
            const Complex aqk = a(q, k);
            a(p, k) = std::conj(jpp) * apk + std::conj(jqp) * aqk;
            a(q, k) = std::conj(jpq) * apk + std::conj(jqq) * aqk;
          }
          a(p, q) = 0.0;
          a(q, p) = 0.0;
          a(p, p) = a(p, p).real();
          a(q, q) = a(q, q).real();
          for (Eigen::Index k = 0; k < n; ++k) {
            const Complex vkp = v(k, p);
            const Complex vkq = v(k, q);
            v(k, p) = vkp * jpp + vkq * jqp;
            v(k, q) = vkp * jpq + vkq * jqq;
          }
        }
      }
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index i, Eigen::Index j) { return a(i, i).real() > a(j, j).real(); });
  EigenDecomposition out{RealVector(n), ComplexMatrix(n, n)};
  for (Eigen::Index k = 0; k < n; ++k) {
    out.values(k) = a(order[k], order[k]).real();
    out.vectors.col(k) = v.col(order[k]);
  }
  return out;
}

RealVector eigenvalues(const HermitianMatrix& a, const Tolerances& tol) {
  return eig_hermitian(a, tol).values;
}

double min_eigenvalue(const HermitianMatrix& a, const Tolerances& tol) {
  const RealVector ev = eigenvalues(a, tol);
  return ev(ev.size() - 1);
}

double max_eigenvalue(const HermitianMatrix& a, const Tolerances& tol) {
  return eigenvalues(a, tol)(0);
}

HermitianMatrix pos_part(const HermitianMatrix& a, const Tolerances& tol) {
  const EigenDecomposition e = eig_hermitian(a, tol);
  return HermitianMatrix::symmetrized(
      spectral_map(e, [&](double x) { return x > tol.psd_clamp ? x : 0.0; }));
}

double trace_norm(const HermitianMatrix& a, const Tolerances& tol) {
  return 0.5 * eigenvalues(a, tol).cwiseAbs().sum();
}

HermitianMatrix matrix_sqrt_psd(const HermitianMatrix& a, const Tolerances& tol) {
  const EigenDecomposition e = eig_hermitian(a, tol);
  const double lmin = e.values(e.values.size() - 1);
  if (lmin < -tol.psd_clamp) {
    std::ostringstream os;
    os << "matrix_sqrt_psd: input has eigenvalue " << lmin;
    throw InputError(os.str());
  }
  return HermitianMatrix::symmetrized(
      spectral_map(e, [](double x) { return x > 0.0 ? std::sqrt(x) : 0.0; }));
}

double fidelity(const DensityMatrix& r, const DensityMatrix& s, const Tolerances& tol) {
  if (r.dim() != s.dim()) throw InputError("fidelity: dimension mismatch");
  const HermitianMatrix sr = matrix_sqrt_psd(r.hermitian(), tol);
  const HermitianMatrix inner_prod =
      HermitianMatrix::symmetrized(sr.matrix() * s.matrix() * sr.matrix());
  const double f = matrix_sqrt_psd(pos_part(inner_prod, tol), tol).trace();
  return std::clamp(f, 0.0, 1.0);
}

Complex inner(const PureState& a, const PureState& b) {
  if (a.dim() != b.dim()) throw InputError("inner product: dimension mismatch");
  return a.amplitudes().dot(b.amplitudes());  // conjugates the first argument
}

std::pair<PureState, PureState> purify_pair(const DensityMatrix& r0, const DensityMatrix& r1,
                                            const Tolerances& tol) {
  if (r0.dim() != r1.dim()) throw InputError("purify_pair: dimension mismatch");
  const Eigen::Index d = r0.dim();
  const ComplexMatrix s0 = matrix_sqrt_psd(r0.hermitian(), tol).matrix();
  const ComplexMatrix s1 = matrix_sqrt_psd(r1.hermitian(), tol).matrix();

  // |psi> = sum_k (A|k>) (x) (V|k>) has amplitude matrix A V^T (row: system,
  // column: ancilla). <psi0|psi1> = Tr(s0 s1 V^T) for psi0 = (s0 (x) I)|Omega>.
  // With s0 s1 = W P (polar), V^T = W^dagger gives Tr P = fidelity.
  Eigen::JacobiSVD<ComplexMatrix> svd(s0 * s1, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const ComplexMatrix polar = svd.matrixU() * svd.matrixV().adjoint();
  const ComplexMatrix ancilla_t = polar.adjoint();

  auto flatten = [d](const ComplexMatrix& amp) {
    ComplexVector v(d * d);
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index k = 0; k < d; ++k) v(i * d + k) = amp(i, k);
    return v;
  };
  return {PureState::normalized(flatten(s0)), PureState::normalized(flatten(s1 * ancilla_t))};
}

double max_abs(const ComplexMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

// ---------------------------------------------------------------------------
// Random instances

namespace {
ComplexMatrix ginibre(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  ComplexMatrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) {
      const double re = g(rng);
      const double im = g(rng);
      m(i, j) = Complex(re, im);
    }
  return m;
}
}  // namespace

HermitianMatrix random_hermitian(Eigen::Index dim, Rng& rng) {
  return HermitianMatrix::symmetrized(ginibre(dim, dim, rng));
}

PureState random_pure(Eigen::Index dim, Rng& rng) {
  return PureState::normalized(ginibre(dim, 1, rng).col(0));
}

DensityMatrix random_density(Eigen::Index dim, Rng& rng, Eigen::Index rank) {
  const Eigen::Index r = rank <= 0 ? dim : rank;
  const ComplexMatrix g = ginibre(dim, r, rng);
  ComplexMatrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  return DensityMatrix(HermitianMatrix::symmetrized(rho));
}

HermitianMatrix random_psd(Eigen::Index dim, Rng& rng) {
  const ComplexMatrix g = ginibre(dim, dim, rng);
  return HermitianMatrix::symmetrized(g * g.adjoint());
}

}  // namespace stateid::linmat
