#pragma once

#include <cstdint>

namespace sdlab {

// Counter-mixing generator in the SplittableRandom style: each substream is
// keyed by (seed, stream index, domain) through a strong 64-bit finalizer, so
// any chunk of work can draw from its own stream and results never depend on
// how chunks are scheduled across threads.
class SplitStream {
 public:
  SplitStream(std::uint64_t seed, std::uint64_t stream, std::uint64_t domain);

  std::uint64_t next_u64();

  // uniform on the open interval (0,1); safe to feed to the inverse normal CDF
  double next_uniform();

  // standard normal via inverse-CDF transform
  double next_normal();

 private:
  std::uint64_t state_;
};

// Acklam/Wichura-style rational approximation of the standard normal quantile,
// accurate to full double precision; p must lie in (0,1).
double inverse_normal_cdf(double p);

// standard normal CDF
double normal_cdf(double z);

// domain tags keeping module substreams disjoint for a shared seed
namespace rng_domain {
inline constexpr std::uint64_t sampler = 0x73616d706c657231ULL;
inline constexpr std::uint64_t sampler_factor2 = 0x73616d706c657232ULL;
inline constexpr std::uint64_t sde_path = 0x7364655f70617468ULL;
}  // namespace rng_domain

}  // namespace sdlab
