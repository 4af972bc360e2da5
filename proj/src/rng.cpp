#include "d3fl/rng.hpp"

namespace d3fl::rng {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

RngStream::RngStream(std::uint64_t seed, std::string label)
    : seed_(seed),
      label_(std::move(label)),
      gen_(splitmix64(splitmix64(seed) ^ fnv1a64(label_))) {}

double RngStream::uniform01() {
    return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53;
}

std::uint64_t RngStream::next_below(std::uint64_t n) {
    if (n < 2) return 0;
    const std::uint64_t bound = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t x;
    do {
        x = gen_();
    } while (x >= bound);
    return x % n;
}

void shuffle_indices(std::vector<std::size_t>& idx, RngStream& stream) {
    for (std::size_t i = idx.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(stream.next_below(i));
        std::swap(idx[i - 1], idx[j]);
    }
}

}  // namespace d3fl::rng
