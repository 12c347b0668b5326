#include "palmdpp/rng.hpp"

#include <boost/random/beta_distribution.hpp>
#include <boost/random/gamma_distribution.hpp>
#include <boost/random/uniform_01.hpp>
#include <boost/random/uniform_int_distribution.hpp>

namespace palmdpp {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t streamIndex)
    : seed_(seed), stream_(streamIndex), eng_(splitmix64(splitmix64(seed) ^ splitmix64(~streamIndex))) {}

// Boost distributions rather than std ones: their output is specified by the
// library code, not by the standard library vendor.
double RngStream::uniform() { return boost::random::uniform_01<double>()(eng_); }

std::uint64_t RngStream::below(std::uint64_t n) {
  return boost::random::uniform_int_distribution<std::uint64_t>(0, n - 1)(eng_);
}

double RngStream::gamma(double shape) { return boost::random::gamma_distribution<double>(shape, 1.0)(eng_); }

double RngStream::beta(double a, double b) { return boost::random::beta_distribution<double>(a, b)(eng_); }

}  // namespace palmdpp
