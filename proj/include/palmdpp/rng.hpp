#pragma once

#include <cstdint>
#include <random>

namespace palmdpp {

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Deterministic per-replica random stream. The engine is seeded from a hash of
/// (seed, streamIndex), so replica i of a batch does not depend on how many
/// other replicas ran or in which order.
class RngStream {
public:
  RngStream(std::uint64_t seed, std::uint64_t streamIndex);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_index() const noexcept { return stream_; }

  double uniform();                    // [0, 1)
  std::uint64_t below(std::uint64_t n);  // uniform integer in [0, n)
  double gamma(double shape);          // Gamma(shape, 1)
  double beta(double a, double b);

  std::mt19937_64& engine() noexcept { return eng_; }

private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 eng_;
};

}  // namespace palmdpp
