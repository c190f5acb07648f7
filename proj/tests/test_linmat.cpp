#include <doctest.h>

#include <cmath>

#include "stateid/errors.hpp"
#include "stateid/linmat.hpp"

using namespace stateid;
using namespace stateid::linmat;

namespace {

ComplexMatrix mat2(Complex a, Complex b, Complex c, Complex d) {
  ComplexMatrix m(2, 2);
  m << a, b, c, d;
  return m;
}

// Index-formula Kronecker product, independent of linmat::tensor.
ComplexMatrix kron_oracle(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index r = 0; r < out.rows(); ++r)
    for (Eigen::Index c = 0; c < out.cols(); ++c)
      out(r, c) = a(r / b.rows(), c / b.cols()) * b(r % b.rows(), c % b.cols());
  return out;
}

}  // namespace

TEST_CASE("tensor") {
  const ComplexMatrix i2 = ComplexMatrix::Identity(2, 2);
  CHECK(max_abs(tensor(i2, i2) - ComplexMatrix::Identity(4, 4)) == 0.0);

  const ComplexMatrix p0 = mat2(1, 0, 0, 0);
  const ComplexMatrix p1 = mat2(0, 0, 0, 1);
  ComplexMatrix expected = ComplexMatrix::Zero(4, 4);
  expected(1, 1) = 1.0;
  CHECK(max_abs(tensor(p0, p1) - expected) == 0.0);

  Rng rng(11);
  for (int t = 0; t < 20; ++t) {
    const ComplexMatrix a = random_hermitian(2, rng).matrix() + ComplexMatrix::Random(2, 2);
    const ComplexMatrix b = random_hermitian(2, rng).matrix() + ComplexMatrix::Random(2, 2);
    CHECK(std::abs(tensor(a, b).trace() - a.trace() * b.trace()) <= 1e-12);
    CHECK(max_abs(tensor(a, b) - kron_oracle(a, b)) <= 1e-15);
  }
}

TEST_CASE("tensor is bilinear") {
  Rng rng(12);
  const ComplexMatrix a1 = random_hermitian(3, rng).matrix();
  const ComplexMatrix a2 = random_hermitian(3, rng).matrix();
  const ComplexMatrix b = random_hermitian(2, rng).matrix();
  const Complex s(0.3, -1.7);
  CHECK(max_abs(tensor(ComplexMatrix(a1 + s * a2), b) - (tensor(a1, b) + s * tensor(a2, b))) <= 1e-12);
  CHECK(max_abs(tensor(b, ComplexMatrix(a1 + s * a2)) - (tensor(b, a1) + s * tensor(b, a2))) <= 1e-12);
}

TEST_CASE("partial_trace") {
  Rng rng(13);
  const DensityMatrix rho = random_density(2, rng);
  const DensityMatrix sigma = random_density(3, rng);
  const ComplexMatrix prod = tensor(rho.matrix(), sigma.matrix());
  CHECK(max_abs(partial_trace(prod, 2, 3, Subsystem::A) - rho.matrix()) <= 1e-14);
  CHECK(max_abs(partial_trace(prod, 2, 3, Subsystem::B) - sigma.matrix()) <= 1e-14);

  ComplexVector bell = ComplexVector::Zero(4);
  bell(0) = bell(3) = 1.0 / std::sqrt(2.0);
  const ComplexMatrix proj = bell * bell.adjoint();
  CHECK(max_abs(partial_trace(proj, 2, 2, Subsystem::A) - 0.5 * ComplexMatrix::Identity(2, 2)) <= 1e-15);

  for (int t = 0; t < 10; ++t) {
    const ComplexMatrix h = random_hermitian(4, rng).matrix();
    Complex sum = 0.0;  // summation oracle
    for (int i = 0; i < 4; ++i) sum += h(i, i);
    CHECK(std::abs(partial_trace(h, 2, 2, Subsystem::A).trace() - sum) <= 1e-12);
    CHECK(std::abs(partial_trace(h, 2, 2, Subsystem::B).trace() - sum) <= 1e-12);
  }

  CHECK_THROWS_AS(partial_trace(ComplexMatrix::Identity(5, 5), 2, 2, Subsystem::A), InputError);
}

TEST_CASE("eig_hermitian") {
  RealVector d(3);
  d << 3, 1, 2;
  const auto e = eig_hermitian(HermitianMatrix::diagonal(d));
  CHECK(e.values(0) == doctest::Approx(3.0));
  CHECK(e.values(1) == doctest::Approx(2.0));
  CHECK(e.values(2) == doctest::Approx(1.0));

  const auto x = eig_hermitian(HermitianMatrix(mat2(0, 1, 1, 0)));
  CHECK(x.values(0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(x.values(1) == doctest::Approx(-1.0).epsilon(1e-14));

  Rng rng(14);
  for (int t = 0; t < 50; ++t) {
    const HermitianMatrix a = random_hermitian(6, rng);
    const auto dec = eig_hermitian(a);
    CHECK(max_abs(a.matrix() - dec.reconstruct()) <= 1e-10);
    const ComplexMatrix gram = dec.vectors.adjoint() * dec.vectors;
    CHECK(max_abs(gram - ComplexMatrix::Identity(6, 6)) <= 1e-10);
    for (Eigen::Index k = 1; k < 6; ++k) CHECK(dec.values(k - 1) >= dec.values(k));
  }

  CHECK_THROWS_AS(HermitianMatrix(mat2(0, 1, 0, 0)), InputError);
}

TEST_CASE("eig_hermitian with degenerate spectrum and complex phases") {
  Rng rng(15);
  const PureState u = random_pure(4, rng);
  // I + 3|u><u| has a triple-degenerate eigenvalue 1.
  const HermitianMatrix a = HermitianMatrix::identity(4) + 3.0 * HermitianMatrix::projector(u.amplitudes());
  const auto dec = eig_hermitian(a);
  CHECK(dec.values(0) == doctest::Approx(4.0).epsilon(1e-13));
  for (int k = 1; k < 4; ++k) CHECK(dec.values(k) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(max_abs(a.matrix() - dec.reconstruct()) <= 1e-12);
}

TEST_CASE("pos_part") {
  RealVector d(2);
  d << 1, -2;
  RealVector expected(2);
  expected << 1, 0;
  CHECK(max_abs(pos_part(HermitianMatrix::diagonal(d)).matrix() -
                HermitianMatrix::diagonal(expected).matrix()) <= 1e-15);

  Rng rng(16);
  const HermitianMatrix psd = random_psd(3, rng);
  CHECK(max_abs(pos_part(psd).matrix() - psd.matrix()) <= 1e-10);

  for (int t = 0; t < 20; ++t) {
    const HermitianMatrix a = random_hermitian(4, rng);
    const HermitianMatrix p = pos_part(a);
    CHECK(min_eigenvalue(p) >= -1e-10);
    CHECK(min_eigenvalue(p - a) >= -1e-10);
    // A - Pos(A) = -A^-, supports orthogonal.
    CHECK(max_abs(p.matrix() * (a - p).matrix()) <= 1e-10);
  }

  // Pos(A (x) B) = A (x) Pos(B) for A >= 0, against an independent route:
  // eigendecompose B and rebuild its positive part by hand.
  for (int t = 0; t < 20; ++t) {
    const HermitianMatrix a = random_psd(2, rng);
    const HermitianMatrix b = random_hermitian(3, rng);
    const auto eb = eig_hermitian(b);
    ComplexMatrix pos_b = ComplexMatrix::Zero(3, 3);
    for (int k = 0; k < 3; ++k)
      if (eb.values(k) > 0) pos_b += eb.values(k) * eb.vectors.col(k) * eb.vectors.col(k).adjoint();
    CHECK(max_abs(pos_part(tensor(a, b)).matrix() - tensor(a.matrix(), pos_b)) <= 1e-10);
  }
}

TEST_CASE("trace_norm") {
  CHECK(trace_norm(HermitianMatrix::zero(3)) == 0.0);
  CHECK(trace_norm(HermitianMatrix(mat2(1, 0, 0, -1))) == doctest::Approx(1.0));

  // Pure states with real overlap c: eigenvalues of rho0 - rho1 are
  // +-sqrt(1 - c^2), so the halved sum is sqrt(1 - c^2).
  for (double c : {0.0, 0.3, 0.8, 0.999, 1.0}) {
    ComplexVector v0(2), v1(2);
    v0 << 1, 0;
    v1 << c, std::sqrt(1 - c * c);
    const auto diff = HermitianMatrix::projector(v0) - HermitianMatrix::projector(v1);
    CHECK(trace_norm(diff) == doctest::Approx(std::sqrt(1 - c * c)).epsilon(1e-12));
  }

  Rng rng(17);
  for (int t = 0; t < 50; ++t) {
    const auto a = random_hermitian(3, rng);
    const auto b = random_hermitian(3, rng);
    const auto c = random_hermitian(3, rng);
    CHECK(trace_norm(a - c) <= trace_norm(a - b) + trace_norm(b - c) + 1e-9);
    CHECK(trace_norm(a * -2.5) == doctest::Approx(2.5 * trace_norm(a)).epsilon(1e-12));
  }
}

TEST_CASE("Pos: order, tensor and trace properties on random constructions") {
  Rng rng(18);
  for (int t = 0; t < 200; ++t) {
    const Eigen::Index d = 2 + t % 3;
    const HermitianMatrix a = random_hermitian(d, rng);
    const HermitianMatrix b = a + random_psd(d, rng) * 0.5;  // A <= B
    CHECK(min_eigenvalue(pos_part(b) - a) >= -1e-9);
    CHECK(pos_part(a).trace() <= pos_part(b).trace() + 1e-9);
  }
}

TEST_CASE("Pos is not monotone: stored witness") {
  const HermitianMatrix a(mat2(0.0, 2.5, 2.5, 0.0));
  const HermitianMatrix b(mat2(0.25, 1.25, 1.25, 6.25));
  CHECK(min_eigenvalue(b - a) >= -1e-12);                       // A <= B
  CHECK(min_eigenvalue(pos_part(b) - pos_part(a)) < -0.5);      // Pos(A) not <= Pos(B)
}

TEST_CASE("matrix_sqrt_psd") {
  CHECK(max_abs(matrix_sqrt_psd(HermitianMatrix::identity(3)).matrix() - ComplexMatrix::Identity(3, 3)) <= 1e-15);
  RealVector d(2), r(2);
  d << 4, 9;
  r << 2, 3;
  CHECK(max_abs(matrix_sqrt_psd(HermitianMatrix::diagonal(d)).matrix() -
                HermitianMatrix::diagonal(r).matrix()) <= 1e-14);

  Rng rng(19);
  for (int t = 0; t < 20; ++t) {
    const HermitianMatrix p = random_psd(5, rng);
    const HermitianMatrix s = matrix_sqrt_psd(p);
    CHECK(min_eigenvalue(s) >= -1e-12);
    CHECK(max_abs(s.matrix() * s.matrix() - p.matrix()) <= 1e-9);
  }

  RealVector neg(2);
  neg << 1, -1e-3;
  CHECK_THROWS_AS(matrix_sqrt_psd(HermitianMatrix::diagonal(neg)), InputError);
  RealVector tiny(2);
  tiny << 1, -1e-12;
  CHECK_NOTHROW(matrix_sqrt_psd(HermitianMatrix::diagonal(tiny)));
}

TEST_CASE("fidelity") {
  Rng rng(20);
  const DensityMatrix rho = random_density(3, rng);
  CHECK(fidelity(rho, rho) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(fidelity(DensityMatrix::from_pure(PureState::basis(2, 0)),
                 DensityMatrix::from_pure(PureState::basis(2, 1))) == doctest::Approx(0.0));

  for (int t = 0; t < 20; ++t) {
    const PureState a = random_pure(3, rng);
    const PureState b = random_pure(3, rng);
    CHECK(fidelity(DensityMatrix::from_pure(a), DensityMatrix::from_pure(b)) ==
          doctest::Approx(std::abs(inner(a, b))).epsilon(1e-7));
  }
  for (int t = 0; t < 50; ++t) {
    const DensityMatrix r = random_density(3, rng);
    const DensityMatrix s = random_density(3, rng);
    const double f = fidelity(r, s);
    CHECK(f >= 0.0);
    CHECK(f <= 1.0);
    CHECK(f >= 1.0 - trace_norm(r.hermitian() - s.hermitian()) - 1e-9);
  }
}

TEST_CASE("density matrix validation") {
  CHECK_THROWS_AS(DensityMatrix(mat2(0.6, 0, 0, 0.6)), InputError);
  CHECK_THROWS_AS(DensityMatrix(mat2(1.5, 0, 0, -0.5)), InputError);
  CHECK_THROWS_AS(PureState(ComplexVector::Ones(2)), InputError);
  CHECK_NOTHROW(DensityMatrix(mat2(0.5, Complex(0, 0.5), Complex(0, -0.5), 0.5)));
}

TEST_CASE("purify_pair") {
  Rng rng(21);
  const DensityMatrix rho = random_density(2, rng);
  auto [p, q] = purify_pair(rho, rho);
  CHECK(std::abs(inner(p, q)) == doctest::Approx(1.0).epsilon(1e-12));

  // Pure inputs come back as input (x) one common ancilla state.
  const PureState phi = random_pure(3, rng);
  const PureState chi = random_pure(3, rng);
  auto [pp, pq] = purify_pair(DensityMatrix::from_pure(phi), DensityMatrix::from_pure(chi));
  CHECK(std::abs(inner(pp, pq)) == doctest::Approx(std::abs(inner(phi, chi))).epsilon(1e-9));
  const ComplexMatrix anc0 = partial_trace(pp.amplitudes() * pp.amplitudes().adjoint(), 3, 3, Subsystem::B);
  const ComplexMatrix anc1 = partial_trace(pq.amplitudes() * pq.amplitudes().adjoint(), 3, 3, Subsystem::B);
  // sqrt of a rank-1 projector amplifies 1e-16 eigenvalue noise to ~1e-8.
  CHECK(max_abs(anc0 - anc1) <= 1e-7);
  CHECK(std::abs((anc0 * anc0).trace() - 1.0) <= 1e-9);  // ancilla pure

  for (int t = 0; t < 30; ++t) {
    const Eigen::Index d = 2 + t % 3;
    const DensityMatrix r0 = random_density(d, rng);
    const DensityMatrix r1 = random_density(d, rng);
    auto [a, b] = purify_pair(r0, r1);
    REQUIRE(a.dim() == d * d);
    const ComplexMatrix red0 = partial_trace(a.amplitudes() * a.amplitudes().adjoint(), d, d, Subsystem::A);
    const ComplexMatrix red1 = partial_trace(b.amplitudes() * b.amplitudes().adjoint(), d, d, Subsystem::A);
    CHECK(max_abs(red0 - r0.matrix()) <= 1e-9);
    CHECK(max_abs(red1 - r1.matrix()) <= 1e-9);
    CHECK(std::abs(inner(a, b)) == doctest::Approx(fidelity(r0, r1)).epsilon(1e-8));
  }
}
