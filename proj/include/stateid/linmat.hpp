#pragma once

// Dense complex Hermitian linear algebra for density matrices and SDP blocks.
//
// Matrices are stored as Eigen dense types; the strong types below validate
// their invariants on construction and are immutable afterwards.

#include <complex>
#include <random>
#include <utility>

#include <Eigen/Dense>

#include "stateid/tolerances.hpp"

namespace stateid::linmat {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

class HermitianMatrix {
 public:
  /// Validates A = A^dagger within tol.hermitian, then stores the exact
  /// Hermitian part (diagonal imaginary parts zeroed).
  explicit HermitianMatrix(const ComplexMatrix& m,
                           const Tolerances& tol = default_tolerances());

  static HermitianMatrix zero(Eigen::Index dim);
  static HermitianMatrix identity(Eigen::Index dim);
  static HermitianMatrix diagonal(const RealVector& diag);
  /// |v><v| (v need not be normalized).
  static HermitianMatrix projector(const ComplexVector& v);
  /// (m + m^dagger)/2 without validation, for matrices that are Hermitian by
  /// construction up to rounding.
  static HermitianMatrix symmetrized(const ComplexMatrix& m);

  const ComplexMatrix& matrix() const noexcept { return m_; }
  Eigen::Index dim() const noexcept { return m_.rows(); }
  double trace() const { return m_.trace().real(); }

  HermitianMatrix operator+(const HermitianMatrix& o) const;
  HermitianMatrix operator-(const HermitianMatrix& o) const;
  HermitianMatrix operator*(double s) const;
  friend HermitianMatrix operator*(double s, const HermitianMatrix& h) { return h * s; }

 private:
  struct Unchecked {};
  HermitianMatrix(ComplexMatrix m, Unchecked) : m_(std::move(m)) {}
  ComplexMatrix m_;
};

class PureState {
 public:
  explicit PureState(const ComplexVector& amplitudes,
                     const Tolerances& tol = default_tolerances());
  /// Normalizes a nonzero vector.
  static PureState normalized(const ComplexVector& v);
  static PureState basis(Eigen::Index dim, Eigen::Index k);

  const ComplexVector& amplitudes() const noexcept { return v_; }
  Eigen::Index dim() const noexcept { return v_.size(); }

 private:
  ComplexVector v_;
};

class DensityMatrix {
 public:
  /// Validates Hermiticity, unit trace and positivity per tol.
  explicit DensityMatrix(const ComplexMatrix& m,
                         const Tolerances& tol = default_tolerances());
  explicit DensityMatrix(const HermitianMatrix& h,
                         const Tolerances& tol = default_tolerances());
  static DensityMatrix from_pure(const PureState& psi);
  static DensityMatrix diagonal(const RealVector& probabilities);
  static DensityMatrix maximally_mixed(Eigen::Index dim);

  const HermitianMatrix& hermitian() const noexcept { return h_; }
  const ComplexMatrix& matrix() const noexcept { return h_.matrix(); }
  Eigen::Index dim() const noexcept { return h_.dim(); }

 private:
  HermitianMatrix h_;
};

struct EigenDecomposition {
  RealVector values;      // non-increasing
  ComplexMatrix vectors;  // columns are orthonormal eigenvectors

  ComplexMatrix reconstruct() const;
};

enum class Subsystem { A, B };

ComplexMatrix tensor(const ComplexMatrix& a, const ComplexMatrix& b);
HermitianMatrix tensor(const HermitianMatrix& a, const HermitianMatrix& b);
DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b);
PureState tensor(const PureState& a, const PureState& b);

/// Traces out one factor of a (dA*dB)-square matrix, keeping `keep`.
ComplexMatrix partial_trace(const ComplexMatrix& m, Eigen::Index dA, Eigen::Index dB,
                            Subsystem keep);

/// Cyclic complex Jacobi. Eigenvalues are returned in non-increasing order.
EigenDecomposition eig_hermitian(const HermitianMatrix& a,
                                 const Tolerances& tol = default_tolerances());
RealVector eigenvalues(const HermitianMatrix& a, const Tolerances& tol = default_tolerances());
double min_eigenvalue(const HermitianMatrix& a, const Tolerances& tol = default_tolerances());
double max_eigenvalue(const HermitianMatrix& a, const Tolerances& tol = default_tolerances());

/// Positive part A^+ of A = A^+ - A^- (orthogonal supports).
HermitianMatrix pos_part(const HermitianMatrix& a, const Tolerances& tol = default_tolerances());

/// Half the sum of |eigenvalues|.
double trace_norm(const HermitianMatrix& a, const Tolerances& tol = default_tolerances());

/// Throws InputError if lambda_min < -tol.psd_clamp.
HermitianMatrix matrix_sqrt_psd(const HermitianMatrix& a,
                                const Tolerances& tol = default_tolerances());

/// F(r, s) = Tr sqrt(sqrt(r) s sqrt(r)); equals |<phi|psi>| on pure inputs.
double fidelity(const DensityMatrix& r, const DensityMatrix& s,
                const Tolerances& tol = default_tolerances());

Complex inner(const PureState& a, const PureState& b);

/// Purifications on C^d (x) C^d (system first, ancilla second) whose overlap
/// magnitude equals fidelity(r0, r1).
std::pair<PureState, PureState> purify_pair(const DensityMatrix& r0, const DensityMatrix& r1,
                                            const Tolerances& tol = default_tolerances());

/// Max-abs entry.
double max_abs(const ComplexMatrix& m);

// Random instance generators (Haar pure states, Ginibre mixed states).
using Rng = std::mt19937_64;
HermitianMatrix random_hermitian(Eigen::Index dim, Rng& rng);
PureState random_pure(Eigen::Index dim, Rng& rng);
/// Ginibre ensemble of the given rank (rank <= 0 means full rank).
DensityMatrix random_density(Eigen::Index dim, Rng& rng, Eigen::Index rank = 0);
HermitianMatrix random_psd(Eigen::Index dim, Rng& rng);

}  // namespace stateid::linmat
