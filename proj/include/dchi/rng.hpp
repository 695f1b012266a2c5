#ifndef DCHI_RNG_HPP
#define DCHI_RNG_HPP

#include <cstdint>
#include <span>

namespace dchi {

// splitmix64 finalizer; used for seed conditioning and stream-key derivation.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Deterministic combination of a parent stream id and a child key.
constexpr std::uint64_t derive_stream_key(std::uint64_t parent, std::uint64_t child) {
  return mix64(mix64(parent) ^ (child + 0x9e3779b97f4a7c15ULL));
}

// PCG32 (pcg32_random_t, "setseq" variant). 32-bit output, 64-bit state,
// per-stream increment. Output sequence is fixed across platforms.
class Pcg32 {
 public:
  Pcg32() : Pcg32(0x853c49e6748fea9bULL, 0xda3e39cb94b95bdbULL) {}
  Pcg32(std::uint64_t initstate, std::uint64_t initseq) { seed(initstate, initseq); }

  void seed(std::uint64_t initstate, std::uint64_t initseq) {
    state_ = 0u;
    inc_ = (initseq << 1u) | 1u;
    next_u32();
    state_ += initstate;
    next_u32();
  }

  std::uint32_t next_u32() {
    std::uint64_t oldstate = state_;
    state_ = oldstate * 6364136223846793005ULL + inc_;
    std::uint32_t xorshifted =
        static_cast<std::uint32_t>(((oldstate >> 18u) ^ oldstate) >> 27u);
    std::uint32_t rot = static_cast<std::uint32_t>(oldstate >> 59u);
    return (xorshifted >> rot) | (xorshifted << ((-rot) & 31u));
  }

 private:
  std::uint64_t state_;
  std::uint64_t inc_;
};

// A single-owner random stream addressed by (seed, stream_id). Identical
// addresses produce bitwise-identical draw sequences; distinct stream ids give
// statistically independent sequences. Fork per-position or per-task
// substreams with substream() instead of sharing one stream across owners.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t stream_id)
      : engine_(mix64(seed), stream_id), seed_(seed), stream_id_(stream_id) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  RandomStream substream(std::uint64_t key) const {
    return RandomStream(seed_, derive_stream_key(stream_id_, key));
  }

  std::uint32_t next_u32() { return engine_.next_u32(); }

  // Uniform double in [0, 1) with 53 random mantissa bits.
  double uniform() {
    std::uint64_t hi = engine_.next_u32();
    std::uint64_t lo = engine_.next_u32();
    return static_cast<double>(((hi << 32) | lo) >> 11) * 0x1.0p-53;
  }

  // One standard normal draw (Marsaglia polar method; the pair partner is
  // discarded so the consumption pattern stays call-count deterministic).
  double normal();

  // Fills out with iid standard normals, consuming polar pairs fully.
  void fill_normal(std::span<double> out);

  // Gamma(shape, scale) via Marsaglia & Tsang (2000). Requires shape >= 1;
  // O(1) expected draws per sample for any real shape in that range.
  double gamma(double shape, double scale);

 private:
  // Draws a polar pair (z0, z1) of independent standard normals.
  void normal_pair(double& z0, double& z1);

  Pcg32 engine_;
  std::uint64_t seed_;
  std::uint64_t stream_id_;
};

}  // namespace dchi

#endif  // DCHI_RNG_HPP
