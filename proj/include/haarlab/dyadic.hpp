#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace haarlab {

// [index * 2^-level, (index+1) * 2^-level) inside [0,1).
struct DyadicInterval {
  std::uint32_t level = 0;
  std::uint64_t index = 0;

  friend auto operator<=>(const DyadicInterval&, const DyadicInterval&) = default;
  friend bool operator==(const DyadicInterval&, const DyadicInterval&) = default;
};

inline constexpr DyadicInterval root_interval{0, 0};

// I_s^m: the m-th descendant of base at depth s.
struct GridPosition {
  DyadicInterval base;
  std::uint32_t s = 0;
  std::uint64_t m = 0;
};

struct DyadicIntervalHash {
  std::size_t operator()(const DyadicInterval& I) const noexcept {
    std::uint64_t h = I.index * 0x9E3779B97F4A7C15ULL;
    h ^= (static_cast<std::uint64_t>(I.level) + 0x632BE59BD9B4E019ULL) + (h << 6) + (h >> 2);
    return static_cast<std::size_t>(h);
  }
};

// idx >> j, defined for every j (deep levels shift everything out).
inline std::uint64_t shift_down(std::uint64_t idx, std::uint64_t j) { return j >= 64 ? 0 : idx >> j; }

void validate(const DyadicInterval& I);

DyadicInterval parent(const DyadicInterval& I);
std::pair<DyadicInterval, DyadicInterval> children(const DyadicInterval& I);
DyadicInterval left_child(const DyadicInterval& I);
DyadicInterval right_child(const DyadicInterval& I);
DyadicInterval sibling(const DyadicInterval& I);
DyadicInterval ancestor(const DyadicInterval& I, std::uint32_t j);
DyadicInterval position(const GridPosition& pos);

bool is_left_child(const DyadicInterval& I);
// a ⊇ b
bool contains(const DyadicInterval& a, const DyadicInterval& b);
bool disjoint(const DyadicInterval& a, const DyadicInterval& b);
DyadicInterval lca(const DyadicInterval& a, const DyadicInterval& b);
std::uint64_t dyadic_distance(const DyadicInterval& a, const DyadicInterval& b);

// Left-to-right order for intervals that are disjoint or nested (container first).
bool left_order_less(const DyadicInterval& a, const DyadicInterval& b);

// -1: a lies left of I, 1: right of I, 0: they intersect.
int relative_position(const DyadicInterval& a, const DyadicInterval& I);

// Offset of J inside its ancestor at depth s above it, i.e. m with J = I_s^m.
std::uint64_t offset_in_ancestor(const DyadicInterval& J, std::uint32_t s);

std::vector<DyadicInterval> descendants_at(const DyadicInterval& I, std::uint32_t j,
                                           std::uint32_t depth_bound = 4096);

struct Neighbor {
  DyadicInterval interval;
  std::uint32_t distance = 0;
};

struct NeighborList {
  std::vector<Neighbor> items;
  bool clipped = false;
};

// All J with dist(I,J) <= d and level(J) <= max_level, sorted by (level, index).
NeighborList neighbors_within(const DyadicInterval& I, std::uint32_t d,
                              std::uint32_t max_level = 4096);

// Disjoint J with 2 < dist <= N+2, in (level, index) order: the c_j(I).
std::vector<DyadicInterval> cousins(const DyadicInterval& I, std::uint32_t N,
                                    std::uint32_t max_level = 4096);

// "L:IDX", "Ik" (chain node (k,0)) or "Ikb" ((k,1)).
DyadicInterval parse_interval(const std::string& text);
std::string to_string(const DyadicInterval& I);

inline DyadicInterval chain(std::uint32_t k) { return {k, 0}; }
inline DyadicInterval chain_b(std::uint32_t k) { return {k, 1}; }

}  // namespace haarlab
