#include "percospec/rng.hpp"

namespace percospec {

std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) noexcept {
  std::uint64_t h = mix64(seed ^ 0x243f6a8885a308d3ULL);
  h = mix64(h ^ (stream * 0x9e3779b97f4a7c15ULL));
  return mix64(h ^ (counter * 0xd1b54a32d192ed03ULL));
}

double counter_uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) noexcept {
  return static_cast<double>(counter_hash(seed, stream, counter) >> 11) * 0x1.0p-53;
}

}  // namespace percospec
