#pragma once

#include <bit>
#include <cstdint>
#include <string>
#include <vector>

namespace spinlab {

using Mask = std::uint64_t;

inline constexpr int kMaxStates = 64;

inline Mask bit(int i) { return Mask{1} << i; }
inline Mask full_mask(int n) { return n >= 64 ? ~Mask{0} : (bit(n) - 1); }
inline bool contains(Mask m, int i) { return (m >> i) & 1U; }
inline bool is_subset(Mask a, Mask b) { return (a & ~b) == 0; }
inline int popcount(Mask m) { return std::popcount(m); }
inline int lowest(Mask m) { return std::countr_zero(m); }

inline std::vector<int> members(Mask m) {
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(popcount(m)));
    while (m) {
        out.push_back(lowest(m));
        m &= m - 1;
    }
    return out;
}

inline Mask mask_of(const std::vector<int>& idx) {
    Mask m = 0;
    for (int i : idx) m |= bit(i);
    return m;
}

// Calls fn(sub) for every subset of m, including 0 and m itself.
template <class Fn>
void for_each_subset(Mask m, Fn&& fn) {
    Mask s = m;
    while (true) {
        fn(s);
        if (s == 0) break;
        s = (s - 1) & m;
    }
}

}  // namespace spinlab
