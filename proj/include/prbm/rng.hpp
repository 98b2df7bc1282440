#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace prbm {

/// Counter-based generator (Philox4x32-10). The 64-bit seed is the key; the
/// stream id and a running block counter form the 128-bit counter, so a
/// stream is a pure function of (seed, stream_id) and streams never overlap.
class RngStream {
public:
    using result_type = std::uint64_t;

    RngStream(std::uint64_t seed, std::uint64_t stream_id) noexcept
        : seed_(seed), stream_id_(stream_id) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream_id() const noexcept { return stream_id_; }

    result_type operator()() noexcept;

    std::uint32_t next_u32() noexcept;

    /// Uniform on the open interval (0, 1), 53-bit resolution.
    double uniform() noexcept;

    /// Independent child stream, derived from (stream_id, child) by mixing.
    RngStream split(std::uint64_t child) const noexcept;

    /// Raw Philox block for a given counter. Exposed for known-answer tests.
    static std::array<std::uint32_t, 4> philox(std::array<std::uint32_t, 4> counter,
                                                std::array<std::uint32_t, 2> key) noexcept;

private:
    void refill() noexcept;

    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buffer_{};
    int used_ = 4;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

}  // namespace prbm
