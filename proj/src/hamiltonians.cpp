#include "daql/hamiltonians.hpp"

#include <bit>
#include <cmath>
#include <string>

#include "daql/errors.hpp"

namespace daql {
namespace {

using Triplet = Eigen::Triplet<cplx, std::ptrdiff_t>;

HermitianOperator from_triplets(std::ptrdiff_t dim, const std::vector<Triplet>& triplets) {
  SparseCMatrix m(dim, dim);
  m.setFromTriplets(triplets.begin(), triplets.end());
  return HermitianOperator::from_sparse(std::move(m));
}

}  // namespace

void RydbergParams::validate() const {
  if (n < 1) throw ValidationError("Rydberg chain needs n >= 1");
  if (n > 20) throw ValidationError("Rydberg chain limited to n <= 20");
  if (!(omega > 0.0)) throw ValidationError("Rabi frequency must be > 0");
  if (!(c6 > 0.0)) throw ValidationError("C6 must be > 0");
  if (static_cast<int>(positions.size()) != n) {
    throw ValidationError("expected " + std::to_string(n) + " positions, got " + std::to_string(positions.size()));
  }
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < j; ++k) {
      if (positions[j] == positions[k]) {
        throw ValidationError("atoms " + std::to_string(k) + " and " + std::to_string(j) + " coincide");
      }
    }
  }
}

void XXZParams::validate() const {
  if (n < 5) throw ValidationError("XXZ chain needs n >= 5 so NNN bonds are distinct from NN bonds");
  if (n > 20) throw ValidationError("XXZ chain limited to n <= 20");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ValidationError("alpha must lie in [0, 1]");
}

std::vector<Position> ChainGeometry::positions() const {
  std::vector<Position> out(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) out[j] = {j * spacing, 0.0};
  return out;
}

double blockade_radius(double omega, double c6) {
  if (!(omega > 0.0)) throw ValidationError("blockade_radius: Rabi frequency must be > 0");
  if (!(c6 > 0.0)) throw ValidationError("blockade_radius: C6 must be > 0");
  return std::pow(c6 / omega, 1.0 / 6.0);
}

ChainGeometry rydberg_chain(int n, double rb_over_a, double omega, double c6) {
  if (!(rb_over_a > 0.0)) throw ValidationError("Rb/a must be > 0");
  if (n < 1) throw ValidationError("chain needs n >= 1");
  return {n, blockade_radius(omega, c6) / rb_over_a, Boundary::Open};
}

std::vector<Position> chain_positions(int n, double rb_over_a, double omega, double c6) {
  return rydberg_chain(n, rb_over_a, omega, c6).positions();
}

RydbergParams rydberg_params(int n, double delta_over_omega, double rb_over_a, double omega) {
  RydbergParams p;
  p.n = n;
  p.omega = omega;
  p.delta = delta_over_omega * omega;
  p.positions = chain_positions(n, rb_over_a, omega, p.c6);
  return p;
}

double van_der_waals(const Position& a, const Position& b, double c6) {
  const double dx = a[0] - b[0];
  const double dy = a[1] - b[1];
  const double r2 = dx * dx + dy * dy;
  return c6 / (r2 * r2 * r2);
}

HermitianOperator build_rydberg(const RydbergParams& p) {
  p.validate();
  const int n = p.n;
  const std::ptrdiff_t dim = std::ptrdiff_t{1} << n;
  std::vector<std::vector<double>> v(n, std::vector<double>(n, 0.0));
  for (int j = 0; j < n; ++j)
    for (int k = j + 1; k < n; ++k) v[j][k] = van_der_waals(p.positions[j], p.positions[k], p.c6);

  std::vector<Triplet> triplets;
  triplets.reserve(static_cast<std::size_t>(dim) * (n + 1));
  for (std::ptrdiff_t i = 0; i < dim; ++i) {
    double diag = 0.0;
    for (int j = 0; j < n; ++j) {
      if (!((i >> qubit_bit(n, j)) & 1)) continue;
      diag -= p.delta;
      for (int k = j + 1; k < n; ++k)
        if ((i >> qubit_bit(n, k)) & 1) diag += v[j][k];
    }
    triplets.emplace_back(i, i, diag);
    for (int j = 0; j < n; ++j) triplets.emplace_back(i, i ^ (std::ptrdiff_t{1} << qubit_bit(n, j)), 0.5 * p.omega);
  }
  return from_triplets(dim, triplets);
}

HermitianOperator build_xxz(const XXZParams& p) {
  p.validate();
  const int n = p.n;
  const std::ptrdiff_t dim = std::ptrdiff_t{1} << n;
  std::vector<Triplet> triplets;
  triplets.reserve(static_cast<std::size_t>(dim) * (2 * n + 1));
  const auto bit = [n](std::ptrdiff_t i, int site) { return (i >> qubit_bit(n, site % n)) & 1; };
  for (std::ptrdiff_t i = 0; i < dim; ++i) {
    double diag = 0.0;
    for (int r = 0; r < n; ++r) {
      for (int range = 1; range <= 2; ++range) {
        const double exchange = p.j3 * (range == 1 ? 1.0 : p.alpha);
        const double ising = p.j6 * (range == 1 ? 1.0 : p.alpha * p.alpha);
        const bool aligned = bit(i, r) == bit(i, r + range);
        diag += aligned ? ising : -ising;
        // (XX + YY) maps |01> <-> |10> with amplitude 2.
        if (!aligned && exchange != 0.0) {
          const std::ptrdiff_t flipped =
              i ^ (std::ptrdiff_t{1} << qubit_bit(n, r)) ^ (std::ptrdiff_t{1} << qubit_bit(n, (r + range) % n));
          triplets.emplace_back(flipped, i, 2.0 * exchange);
        }
      }
    }
    triplets.emplace_back(i, i, diag);
  }
  return from_triplets(dim, triplets);
}

}  // namespace daql
