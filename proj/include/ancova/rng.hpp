// rng.hpp — counter-based random streams (Philox 4x32-10).
//
// Streams are keyed by (seed, unit, tag, attempt): the seed forms the Philox
// key, everything else goes into the counter. Any unit of work (a simulated
// replication, an oracle draw) owns its substreams outright, so results do
// not depend on how work is partitioned across threads.
#pragma once

#include <array>
#include <cstdint>

namespace ancova {

struct Philox4x32 {
    // One 10-round block.
    static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> counter,
                                              std::array<std::uint32_t, 2> key);
};

// Substream roles. Trial generation and the population oracle use disjoint
// tags so their samples never coincide even under the same seed.
enum class StreamTag : std::uint32_t {
    covariates = 0,
    arm = 1,
    noise = 2,
    generic = 7,
    oracle_covariates = 8,
    oracle_arm = 9,
    oracle_noise = 10,
};

class RandomStream {
  public:
    RandomStream(std::uint64_t seed, std::uint64_t unit, StreamTag tag,
                 std::uint32_t attempt = 0);

    // Uniform double in [0, 1); 53-bit resolution, two per Philox block.
    double next_u01();
    // Standard normal via Box-Muller; always consumes exactly two uniforms.
    double next_normal();
    // Uniform integer in [0, bound).
    std::uint64_t next_below(std::uint64_t bound);

  private:
    std::array<std::uint32_t, 2> key_;
    std::uint32_t stream_lo_ = 0;
    std::uint32_t stream_hi_ = 0;
    std::uint64_t block_ = 0;
    double pending_ = 0.0;
    bool has_pending_ = false;
};

}  // namespace ancova
