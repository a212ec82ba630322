#ifndef MBRW_RNG_HPP
#define MBRW_RNG_HPP

#include <cstdint>
#include <random>

namespace mbrw {

// All stochastic routines draw from std::mt19937_64. Independent streams are
// keyed by (seed, stream index) and mixed through SplitMix64, so replicas can
// run in any order or on any thread and still reproduce bit for bit.

inline std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream)
{
    return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0)
{
    return Rng(stream_seed(seed, stream));
}

} // namespace mbrw

#endif
