#pragma once

#include <array>
#include <vector>

#include "daql/hermitian_operator.hpp"

namespace daql {

/// Van der Waals coefficient of the 70S Rydberg state, 862690 x 2pi MHz um^6,
/// stored in rad/us um^6.
inline constexpr double kDefaultC6 = 862690.0 * kTwoPi;

using Position = std::array<double, 2>;  // um

/// Site-independent Rydberg drive. Scalars only: per-site arrays are not
/// representable. The laser phase is fixed to zero.
struct RydbergParams {
  int n = 1;
  double omega = kTwoPi * 4.0;  // rad/us
  double delta = 0.0;           // rad/us
  std::vector<Position> positions;
  double c6 = kDefaultC6;

  void validate() const;
};

enum class Boundary { Open, Periodic };

struct ChainGeometry {
  int n = 1;
  double spacing = 1.0;  // um
  Boundary boundary = Boundary::Open;

  /// Collinear sites j * spacing along x, j = 0..n-1.
  std::vector<Position> positions() const;
};

struct XXZParams {
  int n = 8;
  double j3 = 1.0;     // spin exchange
  double j6 = 1.0;     // Ising
  double alpha = 0.0;  // (d1/d2)^3, in [0, 1]

  void validate() const;
};

/// Distance at which C6 / R^6 equals the Rabi frequency.
double blockade_radius(double omega, double c6 = kDefaultC6);

/// Chain whose spacing is blockade_radius(omega) / rb_over_a.
ChainGeometry rydberg_chain(int n, double rb_over_a, double omega, double c6 = kDefaultC6);

/// Shorthand for rydberg_chain(...).positions().
std::vector<Position> chain_positions(int n, double rb_over_a, double omega, double c6 = kDefaultC6);

/// Rydberg chain parameters from the dimensionless pair (Delta/Omega, Rb/a).
RydbergParams rydberg_params(int n, double delta_over_omega, double rb_over_a, double omega = kTwoPi * 4.0);

double van_der_waals(const Position& a, const Position& b, double c6);

/// H = sum_j (Omega/2) X_j - Delta sum_j n_j + sum_{j<k} C6/|r_j - r_k|^6 n_j n_k,
/// with n_j = |1><1| on site j (|1> = |r>). All pairs interact.
HermitianOperator build_rydberg(const RydbergParams& params);

/// Periodic NN + NNN XXZ chain:
/// J3 sum_r [(XX+YY)_{r,r+1} + alpha (XX+YY)_{r,r+2}] + J6 sum_r [ZZ_{r,r+1} + alpha^2 ZZ_{r,r+2}].
/// Requires n >= 5 so NNN bonds never coincide with NN bonds.
HermitianOperator build_xxz(const XXZParams& params);

}  // namespace daql
