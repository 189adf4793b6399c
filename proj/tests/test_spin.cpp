#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <complex>

#include "pqs/spin.hpp"
#include "pqs/rng.hpp"
#include "support/oracles.hpp"

using namespace pqs;

namespace {

double herm_error(const Eigen::MatrixXcd& m) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

// max |[A,B] - iC|
double commutator_error(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b,
                        const Eigen::MatrixXcd& c) {
  const std::complex<double> i(0, 1);
  return (a * b - b * a - i * c).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("spin label stores two_j exactly") {
  CHECK(SpinLabel::from_j(0.5).two_j == 1);
  CHECK(SpinLabel::from_j(13.5).two_j == 27);
  CHECK(SpinLabel::from_two_j(3).j() == doctest::Approx(1.5));
  CHECK(SpinLabel::from_two_j(3).dimension() == 4);
  CHECK_THROWS_AS(SpinLabel::from_j(0.3), DomainError);
  CHECK_THROWS_AS(SpinLabel::from_j(-1.0), DomainError);
}

TEST_CASE("defining representation: L_z = diag(1/2, -1/2) in the z-basis") {
  const auto ops = build_operators(SpinLabel::from_j(0.5), Basis::ZEigen);
  CHECK(std::real(ops.lz(0, 0)) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(std::real(ops.lz(1, 1)) == doctest::Approx(-0.5).epsilon(1e-14));
  CHECK(std::abs(ops.lz(0, 1)) < 1e-14);
}

TEST_CASE("spin-1 L_y spectrum is {1, 0, -1} in both bases") {
  for (Basis basis : {Basis::YEigen, Basis::ZEigen}) {
    const auto ops = build_operators(SpinLabel::from_j(1.0), basis);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(ops.ly);
    CHECK(es.eigenvalues()[0] == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(es.eigenvalues()[1] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(es.eigenvalues()[2] == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("Casimir trace for J=2: tr(Lx^2+Ly^2+Lz^2) = 5 J(J+1) = 30") {
  const auto ops = build_operators(SpinLabel::from_j(2.0), Basis::YEigen);
  const Eigen::MatrixXcd casimir = ops.lx * ops.lx + ops.ly2 + ops.lz2;
  CHECK(std::real(casimir.trace()) == doctest::Approx(30.0).epsilon(1e-13));
}

TEST_CASE("operator-set invariants hold to 1e-12 across spins and bases") {
  for (int two_j = 1; two_j <= 16; ++two_j) {
    for (Basis basis : {Basis::YEigen, Basis::ZEigen}) {
      const SpinLabel spin{two_j};
      const auto ops = build_operators(spin, basis);
      CAPTURE(two_j);

      CHECK(herm_error(ops.lx) < 1e-12);
      CHECK(herm_error(ops.ly) < 1e-12);
      CHECK(herm_error(ops.lz) < 1e-12);

      // cyclic commutators
      CHECK(commutator_error(ops.ly, ops.lz, ops.lx) < 1e-12);
      CHECK(commutator_error(ops.lz, ops.lx, ops.ly) < 1e-12);
      CHECK(commutator_error(ops.lx, ops.ly, ops.lz) < 1e-12);

      const double jj = spin.j() * (spin.j() + 1.0);
      const Eigen::MatrixXcd casimir = ops.lx * ops.lx + ops.ly2 + ops.lz2;
      const Eigen::MatrixXcd expect = jj * Eigen::MatrixXcd::Identity(ops.dimension(), ops.dimension());
      CHECK((casimir - expect).cwiseAbs().maxCoeff() < 1e-12 * jj);
    }
  }
}

TEST_CASE("y-eigenbasis: L_y diagonal descending, L_z real tridiagonal, squares real") {
  const SpinLabel spin{9};  // J = 9/2
  const auto ops = build_operators(spin, Basis::YEigen);
  const int d = spin.dimension();
  for (int i = 0; i < d; ++i) {
    CHECK(std::real(ops.ly(i, i)) == doctest::Approx(spin.j() - i).epsilon(1e-14));
    for (int k = 0; k < d; ++k) {
      CHECK(std::abs(std::imag(ops.ly(i, k))) < 1e-14);
      CHECK(std::abs(std::imag(ops.lz(i, k))) < 1e-14);
      CHECK(std::abs(std::imag(ops.ly2(i, k))) < 1e-14);
      CHECK(std::abs(std::imag(ops.lz2(i, k))) < 1e-14);
      if (std::abs(i - k) > 1) CHECK(std::abs(ops.lz(i, k)) < 1e-14);
      if (i != k) CHECK(std::abs(ops.ly(i, k)) < 1e-14);
    }
  }
  // compact form agrees with the dense matrices
  const auto compact = planar_operators(spin);
  for (int i = 0; i + 1 < d; ++i)
    CHECK(compact.c[i] == doctest::Approx(std::real(ops.lz(i, i + 1))).epsilon(1e-14));
}

TEST_CASE("moments of |m_y = J> for J=3: (3, 0, 3/2)") {
  const SpinLabel spin{6};
  const auto ops = build_operators(spin, Basis::YEigen);
  const auto m = moments_of(basis_state(spin, 0), ops);
  CHECK(m.mean_y == doctest::Approx(3.0).epsilon(1e-13));
  CHECK(m.var_y == doctest::Approx(0.0).epsilon(1e-13));
  CHECK(m.var_z == doctest::Approx(1.5).epsilon(1e-13));
}

TEST_CASE("moments of |m_y = 0> for J=1 match the direct 3x3 oracle") {
  // Direct evaluation: L_y|0> = 0 so var_y = <L_y^2> = 0, and by the x<->z
  // symmetry of this state <L_z^2> = (J(J+1) - 0)/2 = 1.
  const SpinLabel spin{2};
  const auto ops = build_operators(spin, Basis::YEigen);
  const Eigen::VectorXcd psi = basis_state(spin, 1).amplitudes;
  const auto oracle = pqs_test::oracle_moments(psi, ops.ly, ops.lz);
  CHECK(oracle.var_y == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(oracle.var_z == doctest::Approx(1.0).epsilon(1e-14));

  const auto m = moments_of(SpinState{psi}, ops);
  CHECK(m.mean_y == doctest::Approx(oracle.mean_y).epsilon(1e-13));
  CHECK(m.var_y == doctest::Approx(oracle.var_y).epsilon(1e-13));
  CHECK(m.var_z == doctest::Approx(oracle.var_z).epsilon(1e-13));
}

TEST_CASE("equal superposition of |m_y = +-1> has <L_y> = 0") {
  const SpinLabel spin{2};
  const auto ops = build_operators(spin, Basis::YEigen);
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(3);
  v[0] = v[2] = 1.0 / std::sqrt(2.0);
  CHECK(moments_of(SpinState{v}, ops).mean_y == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("moments are invariant under a global phase") {
  SplitMix64 rng(7);
  const SpinLabel spin{5};
  const auto ops = build_operators(spin, Basis::YEigen);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::VectorXcd psi = pqs_test::random_state(spin.dimension(), rng);
    const std::complex<double> phase = std::polar(1.0, rng.uniform() * 6.28);
    const auto a = moments_of(SpinState{psi}, ops);
    const auto b = moments_of(SpinState{(phase * psi).eval()}, ops);
    CHECK(a.mean_y == doctest::Approx(b.mean_y).epsilon(1e-12));
    CHECK(a.var_y == doctest::Approx(b.var_y).epsilon(1e-12));
    CHECK(a.var_z == doctest::Approx(b.var_z).epsilon(1e-12));
    CHECK(a.cov_yz == doctest::Approx(b.cov_yz).epsilon(1e-12));
  }
}

TEST_CASE("fast real-path moments agree with the dense complex path") {
  SplitMix64 rng(21);
  const SpinLabel spin{8};
  const auto ops = build_operators(spin, Basis::YEigen);
  const auto compact = planar_operators(spin);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd v(spin.dimension());
    for (int i = 0; i < v.size(); ++i) v[i] = rng.normal();
    v.normalize();
    const auto fast = moments_of(v, compact);
    const auto full = moments_of(SpinState{v.cast<std::complex<double>>()}, ops);
    CHECK(fast.mean_y == doctest::Approx(full.mean_y).epsilon(1e-12));
    CHECK(fast.mean_z == doctest::Approx(full.mean_z).epsilon(1e-12));
    CHECK(fast.var_y == doctest::Approx(full.var_y).epsilon(1e-12));
    CHECK(fast.var_z == doctest::Approx(full.var_z).epsilon(1e-12));
    CHECK(fast.cov_yz == doctest::Approx(full.cov_yz).epsilon(1e-12));
  }
}

TEST_CASE("moments_of rejects dimension mismatch") {
  const auto ops = build_operators(SpinLabel{2}, Basis::YEigen);
  CHECK_THROWS_AS(moments_of(basis_state(SpinLabel{4}, 0), ops), DimensionError);
}

TEST_CASE("rotate_to_polarization_axis: identity, quarter turn, pythagoras") {
  PlanarMoments m;
  m.spin = SpinLabel{2};
  m.mean_n = 1;

  m.mean_y = 3;
  m.mean_z = 0;
  m.var_y = 0.3;
  m.var_z = 0.7;
  auto r = rotate_to_polarization_axis(m);
  CHECK(r.mean_y == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(r.mean_z == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(r.var_y == doctest::Approx(0.3).epsilon(1e-13));

  m.mean_y = 0;
  m.mean_z = 5;
  m.var_y = 0.11;
  m.var_z = 0.42;
  m.cov_yz = 0;
  r = rotate_to_polarization_axis(m);
  CHECK(r.mean_y == doctest::Approx(5.0).epsilon(1e-14));
  CHECK(std::abs(r.mean_z) < 1e-12);
  CHECK(r.var_y == doctest::Approx(0.42).epsilon(1e-13));
  CHECK(r.var_z == doctest::Approx(0.11).epsilon(1e-13));

  m.mean_y = 3;
  m.mean_z = 4;
  r = rotate_to_polarization_axis(m);
  CHECK(r.mean_y == doctest::Approx(5.0).epsilon(1e-14));
  CHECK(std::abs(r.mean_z) < 1e-12);
}

TEST_CASE("rotation preserves the in-plane covariance trace") {
  SplitMix64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    PlanarMoments m;
    m.spin = SpinLabel{2};
    m.mean_y = rng.normal() * 3;
    m.mean_z = rng.normal() * 3;
    if (m.in_plane_polarization() < 1e-6) continue;
    m.var_y = std::abs(rng.normal()) + 0.1;
    m.var_z = std::abs(rng.normal()) + 0.1;
    const double cmax = std::sqrt(m.var_y * m.var_z);
    m.cov_yz = (2.0 * rng.uniform() - 1.0) * 0.9 * cmax;
    const auto r = rotate_to_polarization_axis(m);
    CHECK(r.var_y + r.var_z == doctest::Approx(m.var_y + m.var_z).epsilon(1e-12));
    CHECK(r.in_plane_polarization() ==
          doctest::Approx(m.in_plane_polarization()).epsilon(1e-12));
  }
}

TEST_CASE("rotation with zero polarization is an explicit error") {
  PlanarMoments m;
  m.spin = SpinLabel{2};
  m.mean_y = 0;
  m.mean_z = 0;
  CHECK_THROWS_AS(rotate_to_polarization_axis(m), DomainError);
}
