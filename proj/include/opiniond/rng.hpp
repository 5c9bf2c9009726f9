#pragma once

#include <cstdint>

namespace opiniond {

/// Pcg32 — the minimal PCG-XSH-RR 32-bit generator (64-bit state, 64-bit
/// stream selector). Chosen because the whole transition is plain integer
/// arithmetic, so a (seed, stream) pair produces the same draw sequence on
/// every platform. All randomness in the simulator flows through this type;
/// nothing uses <random> distributions, whose output is implementation
/// defined.
class Pcg32 {
public:
    Pcg32() : Pcg32(0x853c49e6748fea9bULL, 0xda3e39cb94b95bdbULL) {}

    Pcg32(std::uint64_t initstate, std::uint64_t initseq) {
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
        return (xorshifted >> rot) | (xorshifted << ((32u - rot) & 31u));
    }

    std::uint64_t next_u64() {
        std::uint64_t hi = next_u32();
        return (hi << 32) | next_u32();
    }

    /// Uniform double in [0, 1), 53 random mantissa bits.
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// True with probability p. p <= 0 never fires, p >= 1 always fires.
    bool bernoulli(double p) { return uniform01() < p; }

    /// Uniform integer in [0, bound). Unbiased via threshold rejection.
    std::uint32_t uniform_below(std::uint32_t bound) {
        std::uint32_t threshold = (0u - bound) % bound;
        for (;;) {
            std::uint32_t r = next_u32();
            if (r >= threshold) {
                return r % bound;
            }
        }
    }

private:
    std::uint64_t state_;
    std::uint64_t inc_;
};

/// SplitMix64 mixing step, used to decorrelate user seeds before they reach
/// PCG state space.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Stream derivation for multi-run ensembles: run `run_index` under base
/// seed `base_seed` gets its own PCG stream. Streams are independent and
/// order independent, so sweep cells may execute in any order (or in
/// parallel) and still reproduce bit-identical output.
inline Pcg32 make_stream(std::uint64_t base_seed, std::uint64_t run_index) {
    return Pcg32(splitmix64(base_seed ^ splitmix64(run_index)), run_index);
}

}  // namespace opiniond
