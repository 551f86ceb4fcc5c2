#pragma once

#include <array>
#include <cstdint>

namespace bmckde {

//! One block of the Philox4x32-10 counter-based generator: four output
//! words from a 128-bit counter and a 64-bit key.  Pure function, so any
//! (counter, key) pair can be regenerated independently of draw order.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

//! Stateless seed derivation (splitmix64 of seed and index).  Used to give
//! replications and subcommands independent seeds from one base seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

//! Counter-based random stream.  A stream is addressed by (seed, stream_id);
//! draws with the same address reproduce bit-for-bit in any draw order the
//! caller fixes, independent of platform or standard library.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream_id);

  //! Next 32 uniform random bits.
  std::uint32_t next_u32();

  //! Uniform double in [0, 1) with 53 random bits.
  double uniform01();

  //! Uniform double in [low, high).
  double uniform(double low, double high);

  //! Standard exponential variate.
  double exponential();

  //! Gamma(shape, 1) variate for integer shape >= 1 (sum of exponentials).
  double gamma_int(int shape);

  //! Beta(a, b) variate for integer shapes a, b >= 1.
  double beta_int(int a, int b);

 private:
  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 4> counter_;
  std::array<std::uint32_t, 4> block_{};
  int cursor_ = 4;  // exhausted; first draw fills the block
};

}  // namespace bmckde
