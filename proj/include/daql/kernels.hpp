#pragma once

// State-vector kernels. `serial` is the reference implementation kept for
// testing; `omp` is the OpenMP version used by the library. Both produce
// bitwise-identical results: reductions are accumulated over a fixed number
// of chunks and combined in chunk order regardless of thread count.

#include <array>
#include <cstddef>
#include <span>

#include "daql/types.hpp"

namespace daql::kernels {

using Mat2 = std::array<cplx, 4>;   // row-major 2x2
using Mat4 = std::array<cplx, 16>;  // row-major 4x4, local index 2*b(q0) + b(q1)

/// Non-owning view of a row-major CSR matrix.
struct CsrView {
  std::ptrdiff_t rows = 0;
  const std::ptrdiff_t* outer = nullptr;
  const std::ptrdiff_t* inner = nullptr;
  const cplx* values = nullptr;
};

inline constexpr std::size_t kReductionChunks = 64;

#define DAQL_KERNEL_DECLS                                                                       \
  void apply_1q(std::span<cplx> amps, int n, int q, const Mat2& g);                            \
  void apply_2q(std::span<cplx> amps, int n, int q0, int q1, const Mat4& g);                   \
  void scale_diagonal(std::span<cplx> amps, std::span<const double> diag);                     \
  void csr_matvec(const CsrView& a, std::span<const cplx> x, std::span<cplx> y);               \
  cplx inner(std::span<const cplx> a, std::span<const cplx> b);                                \
  double diagonal_expectation(std::span<const cplx> amps, std::span<const double> diag);       \
  cplx local_inner(std::span<const cplx> bra, std::span<const cplx> ket, int n, int q,         \
                   const Mat2& m);

namespace serial {
DAQL_KERNEL_DECLS
}  // namespace serial

namespace omp {
DAQL_KERNEL_DECLS
}  // namespace omp

#undef DAQL_KERNEL_DECLS

using omp::apply_1q;
using omp::apply_2q;
using omp::csr_matvec;
using omp::diagonal_expectation;
using omp::inner;
using omp::local_inner;
using omp::scale_diagonal;

}  // namespace daql::kernels
