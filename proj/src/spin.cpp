#include "pqs/spin.hpp"

#include <cmath>

namespace pqs {

namespace {

constexpr std::complex<double> kI{0.0, 1.0};

// Standard matrices in the eigenbasis of the "diagonal" component:
// diag = diag(J..-J), tri = (ladder_+ + ladder_-)/2 real symmetric,
// imag = (ladder_+ - ladder_-)/2i purely imaginary.
struct CanonicalTriple {
  Eigen::MatrixXcd diag, tri, imag;
};

CanonicalTriple canonical_triple(SpinLabel spin) {
  const int d = spin.dimension();
  const double j = spin.j();
  CanonicalTriple out;
  out.diag = Eigen::MatrixXcd::Zero(d, d);
  out.tri = Eigen::MatrixXcd::Zero(d, d);
  out.imag = Eigen::MatrixXcd::Zero(d, d);
  for (int i = 0; i < d; ++i) out.diag(i, i) = j - i;
  for (int i = 0; i + 1 < d; ++i) {
    const double m_hi = j - i;       // row i
    const double m_lo = j - i - 1;   // row i+1
    const double c = 0.5 * std::sqrt(j * (j + 1) - m_hi * m_lo);
    out.tri(i, i + 1) = c;
    out.tri(i + 1, i) = c;
    // ladder_+ raises m: <m_hi| L_+ |m_lo> = 2c, so the i,i+1 entry of
    // (L_+ - L_-)/2i is -i c and its mirror +i c.
    out.imag(i, i + 1) = -kI * c;
    out.imag(i + 1, i) = kI * c;
  }
  return out;
}

}  // namespace

SpinLabel SpinLabel::from_two_j(int two_j) {
  if (two_j < 0) throw DomainError("SpinLabel: two_j must be non-negative");
  return SpinLabel{two_j};
}

SpinLabel SpinLabel::from_j(double j) {
  const double doubled = 2.0 * j;
  const double rounded = std::round(doubled);
  if (j < 0 || std::abs(doubled - rounded) > 1e-9)
    throw DomainError("SpinLabel: j must be a non-negative half-integer");
  return SpinLabel{static_cast<int>(rounded)};
}

SpinOperatorSet build_operators(SpinLabel spin, Basis basis) {
  const CanonicalTriple t = canonical_triple(spin);
  SpinOperatorSet ops;
  ops.spin = spin;
  ops.basis = basis;
  if (basis == Basis::ZEigen) {
    ops.lz = t.diag;
    ops.lx = t.tri;
    ops.ly = t.imag;
  } else {
    // Cyclic relabeling (x,y,z) -> (y,z,x) preserves [L_a, L_b] = i e_abc L_c,
    // so in the y-eigenbasis L_y is diagonal, L_z real tridiagonal, L_x imaginary.
    ops.ly = t.diag;
    ops.lz = t.tri;
    ops.lx = t.imag;
  }
  ops.ly2 = ops.ly * ops.ly;
  ops.lz2 = ops.lz * ops.lz;
  return ops;
}

RealPlanarOperators planar_operators(SpinLabel spin) {
  const int d = spin.dimension();
  const double j = spin.j();
  RealPlanarOperators ops;
  ops.spin = spin;
  ops.m.resize(d);
  ops.c.resize(std::max(0, d - 1));
  for (int i = 0; i < d; ++i) ops.m[i] = j - i;
  for (int i = 0; i + 1 < d; ++i)
    ops.c[i] = 0.5 * std::sqrt(j * (j + 1) - ops.m[i] * ops.m[i + 1]);
  return ops;
}

SpinState SpinState::normalized(Eigen::VectorXcd amplitudes) {
  const double n = amplitudes.norm();
  if (n == 0.0) throw DomainError("SpinState: zero vector");
  amplitudes /= n;
  return SpinState{std::move(amplitudes)};
}

SpinState basis_state(SpinLabel spin, int index) {
  if (index < 0 || index >= spin.dimension())
    throw DimensionError("basis_state: index out of range");
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(spin.dimension());
  v[index] = 1.0;
  return SpinState{std::move(v)};
}

StateMoments moments_of(const SpinState& state, const SpinOperatorSet& ops) {
  if (state.dimension() != ops.dimension())
    throw DimensionError("moments_of: state and operator dimensions differ");
  const double norm_err = std::abs(state.amplitudes.squaredNorm() - 1.0);
  if (norm_err > 1e-12) throw DomainError("moments_of: state is not normalized");

  const Eigen::VectorXcd uy = ops.ly * state.amplitudes;
  const Eigen::VectorXcd uz = ops.lz * state.amplitudes;
  const double mean_y = std::real(state.amplitudes.dot(uy));
  const double mean_z = std::real(state.amplitudes.dot(uz));
  const double ly2 = std::real(uy.dot(uy));
  const double lz2 = std::real(uz.dot(uz));
  const double sym_yz = std::real(uy.dot(uz));  // <{L_y,L_z}>/2 for Hermitian ops

  StateMoments m;
  m.mean_y = mean_y;
  m.mean_z = mean_z;
  m.var_y = std::max(0.0, ly2 - mean_y * mean_y);
  m.var_z = std::max(0.0, lz2 - mean_z * mean_z);
  m.cov_yz = sym_yz - mean_y * mean_z;
  return m;
}

StateMoments moments_of(const Eigen::VectorXd& state, const RealPlanarOperators& ops) {
  const int d = static_cast<int>(state.size());
  if (d != ops.spin.dimension())
    throw DimensionError("moments_of: state and operator dimensions differ");

  double mean_y = 0, ly2 = 0;
  for (int i = 0; i < d; ++i) {
    const double p = state[i] * state[i];
    mean_y += ops.m[i] * p;
    ly2 += ops.m[i] * ops.m[i] * p;
  }
  // w = L_z state
  Eigen::VectorXd w = Eigen::VectorXd::Zero(d);
  for (int i = 0; i + 1 < d; ++i) {
    w[i] += ops.c[i] * state[i + 1];
    w[i + 1] += ops.c[i] * state[i];
  }
  const double mean_z = state.dot(w);
  const double lz2 = w.squaredNorm();
  double sym_yz = 0;
  for (int i = 0; i < d; ++i) sym_yz += ops.m[i] * state[i] * w[i];

  StateMoments m;
  m.mean_y = mean_y;
  m.mean_z = mean_z;
  m.var_y = std::max(0.0, ly2 - mean_y * mean_y);
  m.var_z = std::max(0.0, lz2 - mean_z * mean_z);
  m.cov_yz = sym_yz - mean_y * mean_z;
  return m;
}

double PlanarMoments::in_plane_polarization() const {
  return std::hypot(mean_y, mean_z);
}

PlanarMoments rotate_to_polarization_axis(const PlanarMoments& moments) {
  const double pol = moments.in_plane_polarization();
  if (pol <= 0.0)
    throw DomainError("rotate_to_polarization_axis: zero in-plane polarization");

  const double cos_t = moments.mean_y / pol;
  const double sin_t = moments.mean_z / pol;

  // Components transform with R = [[cos, sin], [-sin, cos]] acting on (y, z);
  // the covariance block is conjugated, which keeps the trace.
  PlanarMoments out = moments;
  out.mean_y = pol;
  out.mean_z = 0.0;
  const double vy = moments.var_y, vz = moments.var_z, c = moments.cov_yz;
  out.var_y = cos_t * cos_t * vy + sin_t * sin_t * vz + 2.0 * cos_t * sin_t * c;
  out.var_z = sin_t * sin_t * vy + cos_t * cos_t * vz - 2.0 * cos_t * sin_t * c;
  out.cov_yz = (vz - vy) * cos_t * sin_t + (cos_t * cos_t - sin_t * sin_t) * c;
  return out;
}

}  // namespace pqs
