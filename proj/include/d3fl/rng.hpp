#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

// Deterministic, labeled random streams. Every consumer of randomness in the
// pipeline derives its own stream from (seed, label), e.g. "client-3-data" or
// "shuffle-round-17", so adding a consumer never shifts the draws seen by
// another. mt19937_64 is pinned by the standard to a fixed output sequence,
// which makes runs reproducible across platforms.

namespace d3fl::rng {

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a64(std::string_view s);

class RngStream {
  public:
    RngStream(std::uint64_t seed, std::string label);

    std::uint64_t seed() const { return seed_; }
    const std::string& label() const { return label_; }

    std::uint64_t next_u64() { return gen_(); }
    // strictly inside (0,1), from the top 53 bits
    double uniform01();
    // uniform in [0, n), rejection-sampled so every n is unbiased
    std::uint64_t next_below(std::uint64_t n);
    // re-derive an identical stream (clone-by-reseed)
    RngStream clone() const { return RngStream(seed_, label_); }

  private:
    std::uint64_t seed_;
    std::string label_;
    std::mt19937_64 gen_;
};

// Fisher-Yates with next_below, pinned here rather than std::shuffle because
// the standard leaves the latter's draw pattern implementation-defined.
void shuffle_indices(std::vector<std::size_t>& idx, RngStream& stream);

}  // namespace d3fl::rng
