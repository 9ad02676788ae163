#include "qlag/rng.hpp"

namespace qlag {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t state, std::string_view tag) {
  return splitmix64(state ^ splitmix64(fnv1a(tag)));
}

std::uint64_t mix_seed(std::uint64_t state, std::uint64_t value) {
  return splitmix64(state ^ splitmix64(value + 0x632be59bd9b4e019ULL));
}

RandomStream RandomStream::derive(std::uint64_t root, std::string_view purpose,
                                  std::uint64_t index) {
  return derive(root, {purpose}, index);
}

RandomStream RandomStream::derive(std::uint64_t root,
                                  std::initializer_list<std::string_view> tags,
                                  std::uint64_t index) {
  std::uint64_t state = splitmix64(root);
  for (auto tag : tags) state = mix_seed(state, tag);
  state = mix_seed(state, index);
  return RandomStream(state);
}

}  // namespace qlag
