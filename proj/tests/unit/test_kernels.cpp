#include <gtest/gtest.h>

#include "daql/hamiltonians.hpp"
#include "daql/kernels.hpp"
#include "daql/state.hpp"

using namespace daql;

namespace {

CVector random_vector(int n, std::uint64_t seed) { RngStream rng(seed); return haar_random_state(n, rng).amplitudes(); }

std::span<cplx> span_of(CVector& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }
std::span<const cplx> cspan(const CVector& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

}  // namespace

TEST(Kernels, ParallelMatchesSerialBitwise) {
  const int n = 12;
  RngStream rng(5);
  kernels::Mat2 g1;
  kernels::Mat4 g2;
  for (auto& x : g1) x = cplx(rng.normal(), rng.normal());
  for (auto& x : g2) x = cplx(rng.normal(), rng.normal());
  for (int q = 0; q < n; ++q) {
    CVector a = random_vector(n, 1), b = a;
    kernels::serial::apply_1q(span_of(a), n, q, g1);
    kernels::omp::apply_1q(span_of(b), n, q, g1);
    EXPECT_TRUE(a == b) << q;
    a = random_vector(n, 2);
    b = a;
    const int other = (q + 5) % n;
    kernels::serial::apply_2q(span_of(a), n, q, other, g2);
    kernels::omp::apply_2q(span_of(b), n, q, other, g2);
    EXPECT_TRUE(a == b) << q;
  }
  const CVector x = random_vector(n, 3), y = random_vector(n, 4);
  EXPECT_EQ(kernels::serial::inner(cspan(x), cspan(y)), kernels::omp::inner(cspan(x), cspan(y)));
  const RVector diag = excitation_count_diagonal(n, 0.5);
  const std::span<const double> d{diag.data(), static_cast<std::size_t>(diag.size())};
  EXPECT_EQ(kernels::serial::diagonal_expectation(cspan(x), d), kernels::omp::diagonal_expectation(cspan(x), d));
  EXPECT_EQ(kernels::serial::local_inner(cspan(x), cspan(y), n, 3, g1),
            kernels::omp::local_inner(cspan(x), cspan(y), n, 3, g1));
}

TEST(Kernels, SparseProductMatchesEigen) {
  const auto h = build_xxz({10, 0.6, 1.0, 0.3});
  const CVector x = random_vector(10, 6);
  CVector y(x.size());
  h.apply(cspan(x), span_of(y));
  const CVector ref = h.sparse() * x;
  EXPECT_LT((y - ref).cwiseAbs().maxCoeff(), 1e-12);
}
