#include <cstdint>

#include "daql/kernels.hpp"
#include "chunking.hpp"

namespace daql::kernels::serial {

void apply_1q(std::span<cplx> amps, int n, int q, const Mat2& g) {
  const std::size_t stride = std::size_t{1} << qubit_bit(n, q);
  const std::size_t half = amps.size() / 2;
  for (std::size_t k = 0; k < half; ++k) {
    const std::size_t i0 = insert_zero_bit(k, stride);
    const std::size_t i1 = i0 | stride;
    const cplx a0 = amps[i0];
    const cplx a1 = amps[i1];
    amps[i0] = g[0] * a0 + g[1] * a1;
    amps[i1] = g[2] * a0 + g[3] * a1;
  }
}

void apply_2q(std::span<cplx> amps, int n, int q0, int q1, const Mat4& g) {
  const std::size_t s0 = std::size_t{1} << qubit_bit(n, q0);
  const std::size_t s1 = std::size_t{1} << qubit_bit(n, q1);
  const std::size_t lo = s0 < s1 ? s0 : s1;
  const std::size_t hi = s0 < s1 ? s1 : s0;
  const std::size_t quarter = amps.size() / 4;
  for (std::size_t k = 0; k < quarter; ++k) {
    const std::size_t base = insert_zero_bit(insert_zero_bit(k, lo), hi);
    const std::size_t idx[4] = {base, base | s1, base | s0, base | s0 | s1};
    cplx in[4];
    for (int r = 0; r < 4; ++r) in[r] = amps[idx[r]];
    for (int r = 0; r < 4; ++r) {
      amps[idx[r]] = g[4 * r] * in[0] + g[4 * r + 1] * in[1] + g[4 * r + 2] * in[2] +
                     g[4 * r + 3] * in[3];
    }
  }
}

void scale_diagonal(std::span<cplx> amps, std::span<const double> diag) {
  for (std::size_t i = 0; i < amps.size(); ++i) amps[i] *= diag[i];
}

void csr_matvec(const CsrView& a, std::span<const cplx> x, std::span<cplx> y) {
  for (std::ptrdiff_t r = 0; r < a.rows; ++r) {
    cplx acc{};
    for (std::ptrdiff_t p = a.outer[r]; p < a.outer[r + 1]; ++p) acc += a.values[p] * x[a.inner[p]];
    y[r] = acc;
  }
}

cplx inner(std::span<const cplx> a, std::span<const cplx> b) {
  std::array<cplx, kReductionChunks> partial{};
  for (std::size_t c = 0; c < kReductionChunks; ++c) {
    const auto [begin, end] = chunk_range(a.size(), c);
    for (std::size_t i = begin; i < end; ++i) partial[c] += std::conj(a[i]) * b[i];
  }
  return sum_chunks(partial);
}

double diagonal_expectation(std::span<const cplx> amps, std::span<const double> diag) {
  std::array<double, kReductionChunks> partial{};
  for (std::size_t c = 0; c < kReductionChunks; ++c) {
    const auto [begin, end] = chunk_range(amps.size(), c);
    for (std::size_t i = begin; i < end; ++i) partial[c] += std::norm(amps[i]) * diag[i];
  }
  return sum_chunks(partial);
}

cplx local_inner(std::span<const cplx> bra, std::span<const cplx> ket, int n, int q,
                 const Mat2& m) {
  const std::size_t stride = std::size_t{1} << qubit_bit(n, q);
  const std::size_t half = ket.size() / 2;
  std::array<cplx, kReductionChunks> partial{};
  for (std::size_t c = 0; c < kReductionChunks; ++c) {
    const auto [begin, end] = chunk_range(half, c);
    for (std::size_t k = begin; k < end; ++k) {
      const std::size_t i0 = insert_zero_bit(k, stride);
      const std::size_t i1 = i0 | stride;
      partial[c] += std::conj(bra[i0]) * (m[0] * ket[i0] + m[1] * ket[i1]) +
                    std::conj(bra[i1]) * (m[2] * ket[i0] + m[3] * ket[i1]);
    }
  }
  return sum_chunks(partial);
}

}  // namespace daql::kernels::serial
