#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace qlab {

/// Derives a child seed from a base seed and a stream name. Used to split a
/// master seed into independent named sub-streams (e.g. "mdp-gen",
/// "trajectory", "checks") so that consumers of one stream do not perturb
/// another.
std::uint64_t derive_seed(std::uint64_t base, std::string_view name);

/**
Seeded 64-bit random stream.

Wraps std::mt19937_64 (fully specified by the standard, so sequences are
bit-reproducible across platforms) and exposes the only three draw shapes the
library needs: raw 64-bit words, unbiased bounded integers, and 53-bit
uniforms in [0, 1).
*/
class RngStream {
  public:
    explicit RngStream(std::uint64_t seed) : engine_(seed), seed_(seed) {}

    RngStream(std::uint64_t master_seed, std::string_view name)
        : RngStream(derive_seed(master_seed, name)) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform integer in [0, n), unbiased (rejection sampling). n must be > 0.
    std::uint64_t next_below(std::uint64_t n);

    /// Uniform double in [0, 1) with 53 random bits.
    double next_unit() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Child stream derived from this stream's seed and a name; drawing from
    /// the child does not advance this stream.
    RngStream split(std::string_view name) const {
        return RngStream(derive_seed(seed_, name));
    }

    std::uint64_t seed() const { return seed_; }

  private:
    std::mt19937_64 engine_;
    std::uint64_t seed_;
};

} // namespace qlab
