#pragma once

#include <bit>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace wbb {

inline constexpr unsigned max_peers = 31;

/// Set of peer indices drawn from 1..max_peers.
class PeerSet {
public:
    constexpr PeerSet() = default;
    static constexpr PeerSet from_bits(std::uint32_t bits) { return PeerSet(bits); }
    /// {first, ..., last}; empty when last < first.
    static constexpr PeerSet range(unsigned first, unsigned last)
    {
        PeerSet s;
        for (unsigned j = first; j <= last; ++j)
            s.insert(j);
        return s;
    }

    constexpr void insert(unsigned j)
    {
        check(j);
        bits_ |= 1u << j;
    }
    constexpr void erase(unsigned j)
    {
        check(j);
        bits_ &= ~(1u << j);
    }
    constexpr bool contains(unsigned j) const { return j >= 1 && j <= max_peers && (bits_ >> j) & 1u; }
    constexpr unsigned size() const { return static_cast<unsigned>(std::popcount(bits_)); }
    constexpr bool empty() const { return bits_ == 0; }
    constexpr std::uint32_t bits() const { return bits_; }
    /// Least member, or 0 when empty.
    constexpr unsigned least() const { return bits_ ? static_cast<unsigned>(std::countr_zero(bits_)) : 0; }
    constexpr bool subset_of(PeerSet o) const { return (bits_ & ~o.bits_) == 0; }

    friend constexpr PeerSet operator&(PeerSet a, PeerSet b) { return PeerSet(a.bits_ & b.bits_); }
    friend constexpr PeerSet operator|(PeerSet a, PeerSet b) { return PeerSet(a.bits_ | b.bits_); }
    friend constexpr bool operator==(PeerSet, PeerSet) = default;

    template <class F>
    constexpr void for_each(F&& f) const
    {
        for (std::uint32_t b = bits_; b; b &= b - 1)
            f(static_cast<unsigned>(std::countr_zero(b)));
    }

    std::string text() const
    {
        std::string s = "{";
        for_each([&](unsigned j) {
            if (s.size() > 1)
                s += ",";
            s += std::to_string(j);
        });
        return s + "}";
    }

private:
    constexpr explicit PeerSet(std::uint32_t bits) : bits_(bits & ~1u) {}
    static constexpr void check(unsigned j)
    {
        if (j < 1 || j > max_peers)
            throw std::out_of_range("peer index out of range: " + std::to_string(j));
    }

    std::uint32_t bits_ = 0;
};

/// Least j <= t with j in both A and B, if any. Whenever #A >= t, #B >= t and
/// 3t > 2n, such a j exists.
inline std::optional<unsigned> counting_witness(PeerSet a, PeerSet b, unsigned n, unsigned t)
{
    PeerSet universe = PeerSet::range(1, n);
    if (!a.subset_of(universe) || !b.subset_of(universe))
        throw std::invalid_argument("counting_witness: sets must lie within 1..n");
    PeerSet common = a & b & PeerSet::range(1, t);
    if (common.empty())
        return std::nullopt;
    return common.least();
}

}  // namespace wbb
