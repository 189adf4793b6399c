#pragma once

#include <Eigen/Dense>
#include <complex>
#include <optional>

#include "pqs/errors.hpp"

namespace pqs {

/// Spin quantum number stored as 2J so half-integer spins are exact.
struct SpinLabel {
  int two_j = 0;

  static SpinLabel from_two_j(int two_j);
  /// Accepts only values representable as a half-integer (0, 0.5, 1, ...).
  static SpinLabel from_j(double j);

  int dimension() const { return two_j + 1; }
  double j() const { return 0.5 * two_j; }
  bool is_integer() const { return two_j % 2 == 0; }

  friend bool operator==(SpinLabel a, SpinLabel b) { return a.two_j == b.two_j; }
  friend auto operator<=>(SpinLabel a, SpinLabel b) { return a.two_j <=> b.two_j; }
};

enum class Basis { YEigen, ZEigen };

/// Angular-momentum component matrices for one spin, units of hbar = 1.
///
/// In the y-eigenbasis L_y is diagonal with entries J, J-1, ..., -J and
/// L_z is real symmetric tridiagonal; L_x is then purely imaginary (the
/// commutation relations forbid all three components being real at once).
struct SpinOperatorSet {
  SpinLabel spin;
  Basis basis = Basis::YEigen;
  Eigen::MatrixXcd lx, ly, lz, ly2, lz2;

  int dimension() const { return spin.dimension(); }
};

SpinOperatorSet build_operators(SpinLabel spin, Basis basis);

/// Compact y-eigenbasis form used by the banded solvers: L_y = diag(m),
/// L_z has first off-diagonal couplings c_i = sqrt(J(J+1) - m_i m_{i+1})/2.
struct RealPlanarOperators {
  SpinLabel spin;
  Eigen::VectorXd m;       // L_y eigenvalues, descending J..-J
  Eigen::VectorXd c;       // L_z couplings between i and i+1, size d-1
};

RealPlanarOperators planar_operators(SpinLabel spin);

/// Pure state over one spin. Amplitudes must be unit-norm within 1e-12.
struct SpinState {
  Eigen::VectorXcd amplitudes;

  static SpinState normalized(Eigen::VectorXcd amplitudes);
  int dimension() const { return static_cast<int>(amplitudes.size()); }
};

/// |m> eigenstate of the basis-defining component (index 0 is m = +J).
SpinState basis_state(SpinLabel spin, int index);

/// First and second planar moments of a state.
struct StateMoments {
  double mean_y = 0, mean_z = 0;
  double var_y = 0, var_z = 0;
  double cov_yz = 0;  // symmetrized: <{L_y,L_z}>/2 - <L_y><L_z>

  double var_sum() const { return var_y + var_z; }
};

StateMoments moments_of(const SpinState& state, const SpinOperatorSet& ops);

/// Fast path for real states in the y-eigenbasis.
StateMoments moments_of(const Eigen::VectorXd& state, const RealPlanarOperators& ops);

/// Measured or derived collective planar moments of an ensemble.
/// mean_* in spin units, var_* in spin units squared, mean_n = <N>.
struct PlanarMoments {
  double mean_y = 0, mean_z = 0;
  double var_y = 0, var_z = 0;
  double cov_yz = 0;
  double mean_n = 1;
  SpinLabel spin;
  std::optional<double> sigma_xi;  // 1-sigma uncertainty on xi^2, when known

  double in_plane_polarization() const;
  double var_sum() const { return var_y + var_z; }
};

/// Rotates the in-plane frame so the mean spin points along +y.
/// Transforms the full 2x2 in-plane covariance, so var_y + var_z is preserved.
/// Throws DomainError when the in-plane polarization vanishes.
PlanarMoments rotate_to_polarization_axis(const PlanarMoments& moments);

}  // namespace pqs
