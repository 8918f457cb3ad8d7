#pragma once

#include <cstdint>
#include <random>

namespace daql {

/// Deterministic random stream identified by (seed, stream id).
///
/// Every independent unit of work (noise draw, mesh node, restart) gets its
/// own stream through `substream`, so results do not depend on which thread
/// runs which unit or in what order.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id = 0);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_; }

  /// Child stream; a pure function of (seed, stream id, child id).
  RngStream substream(std::uint64_t child) const;

  double uniform();                           // [0, 1)
  double uniform(double lo, double hi);       // [lo, hi)
  double normal(double mean = 0.0, double stddev = 1.0);
  std::uint64_t below(std::uint64_t bound);   // [0, bound)

  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
};

}  // namespace daql
