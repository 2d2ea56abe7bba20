#ifndef UNIFOLD_RANDOM_HPP
#define UNIFOLD_RANDOM_HPP

#include <cstdint>
#include <initializer_list>
#include <random>

namespace unifold {

using Rng = std::mt19937_64;

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace detail

/// Independent stream for (seed, ids...). Results depend only on the key,
/// never on which worker consumes the stream.
inline Rng make_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> ids) {
  std::uint64_t h = detail::splitmix64(seed);
  for (std::uint64_t id : ids) {
    h = detail::splitmix64(h ^ detail::splitmix64(id + 0x632be59bd9b4e019ULL));
  }
  std::seed_seq seq{static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32),
                    static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  return Rng(seq);
}

}  // namespace unifold

#endif  // UNIFOLD_RANDOM_HPP
