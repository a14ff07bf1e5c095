#pragma once

#include <cstdint>
#include <limits>

#include "loxolab/numeric.hpp"

namespace loxolab {

/// Counter-based generator: the i-th output of stream (seed, stream) is a pure
/// function of (seed, stream, i). Outputs are identical on every platform, and
/// the uniform helpers below avoid std distributions for the same reason.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  /// Independent substream keyed by `stream`; does not consume from *this.
  Rng substream(std::uint64_t stream) const;

  std::uint64_t next();
  result_type operator()() { return next(); }
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  /// Uniform on [0, bound), bound > 0; exact (rejection, no modulo bias).
  std::uint64_t below(std::uint64_t bound);
  /// Uniform on [0, bound) for an arbitrary-precision positive bound.
  BigInt below(const BigInt& bound);
  /// Uniform double on [0, 1) with 53 random bits.
  double uniform01();

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t mix64(std::uint64_t x);

}  // namespace loxolab
