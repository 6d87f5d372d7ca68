#include "reviewtypes/rng.hpp"

namespace rvt {

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t root, std::string_view tag, std::uint64_t index) {
    std::uint64_t h = 0xcbf29ce484222325ull; // FNV-1a over the tag
    for (unsigned char c : tag) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return mix64(mix64(root ^ h) ^ index);
}

} // namespace rvt
