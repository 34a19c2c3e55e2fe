#ifndef FRACPREDICT_RNG_HPP
#define FRACPREDICT_RNG_HPP

#include <cstdint>

namespace fracpredict {

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}
inline std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    std::uint64_t s = a;
    s = splitmix64(s) ^ (b + 0x9e3779b97f4a7c15ULL);
    return splitmix64(s);
}
}  // namespace detail

/// Deterministic per-stream generator. Streams are derived from
/// (seed, stream id) so stream i is identical regardless of worker count
/// or the order streams are consumed in.
class RngStream {
  public:
    RngStream(std::uint64_t seed, std::uint64_t stream) : state_(detail::mix(seed, stream)) {
        // burn-in decorrelates nearby (seed, stream) pairs
        detail::splitmix64(state_);
    }

    std::uint64_t next_u64() { return detail::splitmix64(state_); }

    /// Uniform on (0,1); never returns 0 or 1.
    double next_uniform() {
        const std::uint64_t u = next_u64() >> 11;  // 53 bits
        return (static_cast<double>(u) + 0.5) * (1.0 / 9007199254740992.0);
    }

    /// Standard normal via Box-Muller (portable, fully determined by the stream).
    double next_normal();

  private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Stream ids namespaced by purpose so e.g. training and test streams never collide.
namespace stream_purpose {
inline constexpr std::uint64_t kPaths = 0x70617468ULL;       // path simulation
inline constexpr std::uint64_t kTrain = 0x747261696eULL;     // training batches
inline constexpr std::uint64_t kTest = 0x74657374ULL;        // test set
inline constexpr std::uint64_t kInit = 0x696e6974ULL;        // network init
inline constexpr std::uint64_t kOrthant = 0x6f727468ULL;     // orthant MC proposals
inline constexpr std::uint64_t kSweepCell = 0x63656c6cULL;   // sweep cell seeds
}  // namespace stream_purpose

/// Derive a child seed for a named purpose and index.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t purpose, std::uint64_t index = 0) {
    return detail::mix(detail::mix(seed, purpose), index);
}

}  // namespace fracpredict

#endif
