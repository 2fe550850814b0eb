#pragma once

#include <array>
#include <cstdint>

namespace spinlab {

// Philox4x32-10 counter-based generator. A (seed, stream) pair selects an
// independent sequence; output is identical on every platform.
class Philox {
public:
    static constexpr const char* kAlgorithm = "philox4x32-10";

    using Block = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Block bijection(Block counter, Key key);

    explicit Philox(std::uint64_t seed, std::uint64_t stream = 0);

    std::uint64_t next_u64();
    // Uniform on [0, 1) with 53 random bits.
    double uniform();
    // Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n);

private:
    Key key_;
    std::uint64_t counter_ = 0;
    std::uint64_t stream_ = 0;
    Block buf_{};
    int used_ = 4;
};

}  // namespace spinlab
