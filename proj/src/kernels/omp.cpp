#include <cstdint>

#include "daql/kernels.hpp"
#include "chunking.hpp"

namespace daql::kernels::omp {
namespace {

using index_t = std::ptrdiff_t;
constexpr std::size_t kParallelThreshold = 1 << 12;

}  // namespace

void apply_1q(std::span<cplx> amps, int n, int q, const Mat2& g) {
  const std::size_t stride = std::size_t{1} << qubit_bit(n, q);
  const index_t half = static_cast<index_t>(amps.size() / 2);
  cplx* a = amps.data();
#pragma omp parallel for schedule(static) if (amps.size() >= kParallelThreshold)
  for (index_t k = 0; k < half; ++k) {
    const std::size_t i0 = insert_zero_bit(static_cast<std::size_t>(k), stride);
    const std::size_t i1 = i0 | stride;
    const cplx a0 = a[i0];
    const cplx a1 = a[i1];
    a[i0] = g[0] * a0 + g[1] * a1;
    a[i1] = g[2] * a0 + g[3] * a1;
  }
}

void apply_2q(std::span<cplx> amps, int n, int q0, int q1, const Mat4& g) {
  const std::size_t s0 = std::size_t{1} << qubit_bit(n, q0);
  const std::size_t s1 = std::size_t{1} << qubit_bit(n, q1);
  const std::size_t lo = s0 < s1 ? s0 : s1;
  const std::size_t hi = s0 < s1 ? s1 : s0;
  const index_t quarter = static_cast<index_t>(amps.size() / 4);
  cplx* a = amps.data();
#pragma omp parallel for schedule(static) if (amps.size() >= kParallelThreshold)
  for (index_t k = 0; k < quarter; ++k) {
    const std::size_t base = insert_zero_bit(insert_zero_bit(static_cast<std::size_t>(k), lo), hi);
    const std::size_t idx[4] = {base, base | s1, base | s0, base | s0 | s1};
    cplx in[4];
    for (int r = 0; r < 4; ++r) in[r] = a[idx[r]];
    for (int r = 0; r < 4; ++r) {
      a[idx[r]] = g[4 * r] * in[0] + g[4 * r + 1] * in[1] + g[4 * r + 2] * in[2] +
                  g[4 * r + 3] * in[3];
    }
  }
}

void scale_diagonal(std::span<cplx> amps, std::span<const double> diag) {
  const index_t size = static_cast<index_t>(amps.size());
#pragma omp parallel for schedule(static) if (amps.size() >= kParallelThreshold)
  for (index_t i = 0; i < size; ++i) amps[i] *= diag[i];
}

void csr_matvec(const CsrView& a, std::span<const cplx> x, std::span<cplx> y) {
#pragma omp parallel for schedule(static) if (static_cast<std::size_t>(a.rows) >= kParallelThreshold)
  for (index_t r = 0; r < a.rows; ++r) {
    cplx acc{};
    for (index_t p = a.outer[r]; p < a.outer[r + 1]; ++p) acc += a.values[p] * x[a.inner[p]];
    y[r] = acc;
  }
}

cplx inner(std::span<const cplx> a, std::span<const cplx> b) {
  std::array<cplx, kReductionChunks> partial{};
  const index_t chunks = static_cast<index_t>(kReductionChunks);
#pragma omp parallel for schedule(static) if (a.size() >= kParallelThreshold)
  for (index_t c = 0; c < chunks; ++c) {
    const auto [begin, end] = chunk_range(a.size(), static_cast<std::size_t>(c));
    cplx acc{};
    for (std::size_t i = begin; i < end; ++i) acc += std::conj(a[i]) * b[i];
    partial[c] = acc;
  }
  return sum_chunks(partial);
}

double diagonal_expectation(std::span<const cplx> amps, std::span<const double> diag) {
  std::array<double, kReductionChunks> partial{};
  const index_t chunks = static_cast<index_t>(kReductionChunks);
#pragma omp parallel for schedule(static) if (amps.size() >= kParallelThreshold)
  for (index_t c = 0; c < chunks; ++c) {
    const auto [begin, end] = chunk_range(amps.size(), static_cast<std::size_t>(c));
    double acc = 0.0;
    for (std::size_t i = begin; i < end; ++i) acc += std::norm(amps[i]) * diag[i];
    partial[c] = acc;
  }
  return sum_chunks(partial);
}

cplx local_inner(std::span<const cplx> bra, std::span<const cplx> ket, int n, int q,
                 const Mat2& m) {
  const std::size_t stride = std::size_t{1} << qubit_bit(n, q);
  const std::size_t half = ket.size() / 2;
  std::array<cplx, kReductionChunks> partial{};
  const index_t chunks = static_cast<index_t>(kReductionChunks);
#pragma omp parallel for schedule(static) if (ket.size() >= kParallelThreshold)
  for (index_t c = 0; c < chunks; ++c) {
    const auto [begin, end] = chunk_range(half, static_cast<std::size_t>(c));
    cplx acc{};
    for (std::size_t k = begin; k < end; ++k) {
      const std::size_t i0 = insert_zero_bit(k, stride);
      const std::size_t i1 = i0 | stride;
      acc += std::conj(bra[i0]) * (m[0] * ket[i0] + m[1] * ket[i1]) +
             std::conj(bra[i1]) * (m[2] * ket[i0] + m[3] * ket[i1]);
    }
    partial[c] = acc;
  }
  return sum_chunks(partial);
}

}  // namespace daql::kernels::omp
