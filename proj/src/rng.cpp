#include "iotsentry/rng.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <unordered_set>

namespace iotsentry {

std::uint64_t Rng::uniform_index(std::uint64_t bound) {
    // Rejection sampling on the top of the range keeps the draw unbiased.
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x = next();
    while (x >= limit) x = next();
    return x % bound;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index) {
    return splitmix64(splitmix64(splitmix64(master) ^ stream) ^ index);
}

std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t count, Rng& rng) {
    count = std::min(count, n);
    std::vector<std::size_t> out;
    if (count * 4 >= n) {
        // Partial Fisher-Yates over the full index range.
        std::vector<std::size_t> all(n);
        std::iota(all.begin(), all.end(), std::size_t{0});
        for (std::size_t i = 0; i < count; ++i) {
            const auto j = i + static_cast<std::size_t>(rng.uniform_index(n - i));
            std::swap(all[i], all[j]);
        }
        out.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(count));
    } else {
        // Floyd's algorithm for sparse draws.
        std::unordered_set<std::size_t> chosen;
        chosen.reserve(count * 2);
        for (std::size_t j = n - count; j < n; ++j) {
            const auto t = static_cast<std::size_t>(rng.uniform_index(j + 1));
            if (!chosen.insert(t).second) chosen.insert(j);
        }
        out.assign(chosen.begin(), chosen.end());
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace iotsentry
