#pragma once

#include <array>
#include <cstdint>

namespace transferlab {

// Philox4x32-10 (Salmon et al., SC'11).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key);

// Stateless stream keyed by (seed, stream_id); draw k is a pure function of k.
class CounterStream {
public:
    CounterStream(std::uint64_t seed, std::uint64_t stream_id)
        : seed_(seed), stream_(stream_id) {}

    std::array<std::uint32_t, 4> block(std::uint64_t counter) const;

    // Uniform deviate in [0,1) with 53 random bits.
    double uniform(std::uint64_t counter) const;

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_; }

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
};

}  // namespace transferlab
