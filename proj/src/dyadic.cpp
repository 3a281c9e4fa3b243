#include "haarlab/dyadic.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <stdexcept>

namespace haarlab {

void validate(const DyadicInterval& I) {
  if (I.level < 64 && I.index >= (std::uint64_t{1} << I.level))
    throw std::domain_error("dyadic index out of range: " + to_string(I));
}

DyadicInterval parent(const DyadicInterval& I) {
  if (I.level == 0) throw std::domain_error("root has no parent");
  return {I.level - 1, I.index >> 1};
}

DyadicInterval left_child(const DyadicInterval& I) {
  if (I.index >> 63) throw std::domain_error("index overflow below " + to_string(I));
  return {I.level + 1, I.index << 1};
}

DyadicInterval right_child(const DyadicInterval& I) {
  auto c = left_child(I);
  c.index |= 1;
  return c;
}

std::pair<DyadicInterval, DyadicInterval> children(const DyadicInterval& I) {
  return {left_child(I), right_child(I)};
}

DyadicInterval sibling(const DyadicInterval& I) {
  if (I.level == 0) throw std::domain_error("root has no sibling");
  return {I.level, I.index ^ 1};
}

DyadicInterval ancestor(const DyadicInterval& I, std::uint32_t j) {
  if (j > I.level) throw std::domain_error("ancestor above root");
  return {I.level - j, shift_down(I.index, j)};
}

DyadicInterval position(const GridPosition& pos) {
  if (pos.s < 64 && pos.m >= (std::uint64_t{1} << pos.s)) throw std::domain_error("grid offset out of range");
  if (pos.s >= 64 || (pos.s > 0 && std::bit_width(pos.base.index) + pos.s > 64)) {
    if (pos.base.index != 0) throw std::domain_error("index overflow in grid position");
    return {pos.base.level + pos.s, pos.m};
  }
  return {pos.base.level + pos.s, (pos.base.index << pos.s) | pos.m};
}

bool is_left_child(const DyadicInterval& I) { return (I.index & 1) == 0; }

bool contains(const DyadicInterval& a, const DyadicInterval& b) {
  return b.level >= a.level && shift_down(b.index, b.level - a.level) == a.index;
}

bool disjoint(const DyadicInterval& a, const DyadicInterval& b) {
  return !contains(a, b) && !contains(b, a);
}

DyadicInterval lca(const DyadicInterval& a, const DyadicInterval& b) {
  std::uint32_t L = std::min(a.level, b.level);
  std::uint64_t ai = shift_down(a.index, a.level - L);
  std::uint64_t bi = shift_down(b.index, b.level - L);
  auto k = static_cast<std::uint32_t>(std::bit_width(ai ^ bi));
  return {L - k, shift_down(ai, k)};
}

std::uint64_t dyadic_distance(const DyadicInterval& a, const DyadicInterval& b) {
  auto c = lca(a, b);
  return std::uint64_t{a.level} + b.level - 2ULL * c.level;
}

int relative_position(const DyadicInterval& a, const DyadicInterval& I) {
  std::uint32_t L = std::min(a.level, I.level);
  std::uint64_t ai = shift_down(a.index, a.level - L);
  std::uint64_t ii = shift_down(I.index, I.level - L);
  if (ai < ii) return -1;
  if (ai > ii) return 1;
  return 0;
}

bool left_order_less(const DyadicInterval& a, const DyadicInterval& b) {
  int r = relative_position(a, b);
  if (r != 0) return r < 0;
  return a.level < b.level;
}

std::uint64_t offset_in_ancestor(const DyadicInterval& J, std::uint32_t s) {
  if (s >= 64) return J.index;
  return J.index & ((std::uint64_t{1} << s) - 1);
}

std::vector<DyadicInterval> descendants_at(const DyadicInterval& I, std::uint32_t j,
                                           std::uint32_t depth_bound) {
  if (I.level + j > depth_bound || j >= 40) throw std::domain_error("descendants beyond depth bound");
  std::vector<DyadicInterval> out;
  out.reserve(std::size_t{1} << j);
  for (std::uint64_t m = 0; m < (std::uint64_t{1} << j); ++m) out.push_back(position({I, j, m}));
  return out;
}

NeighborList neighbors_within(const DyadicInterval& I, std::uint32_t d, std::uint32_t max_level) {
  NeighborList res;
  for (std::uint32_t s = 0; s <= d; ++s) {
    if (s > I.level) {
      res.clipped = true;
      break;
    }
    DyadicInterval A = ancestor(I, s);
    for (std::uint32_t t = 0; s + t <= d; ++t) {
      if (A.level + t > max_level) {
        res.clipped = true;
        break;
      }
      // J below A with lca(I,J) = A: for s>0 and t>0 J must avoid the child of A holding I.
      if (s == 0 || t == 0) {
        if (s > 0) {
          res.items.push_back({A, s});
        } else {
          for (const auto& J : descendants_at(A, t, max_level)) res.items.push_back({J, t});
        }
        continue;
      }
      DyadicInterval away = sibling(ancestor(I, s - 1));
      for (const auto& J : descendants_at(away, t - 1, max_level)) res.items.push_back({J, s + t});
    }
  }
  std::sort(res.items.begin(), res.items.end(),
            [](const Neighbor& x, const Neighbor& y) { return x.interval < y.interval; });
  return res;
}

std::vector<DyadicInterval> cousins(const DyadicInterval& I, std::uint32_t N, std::uint32_t max_level) {
  std::vector<DyadicInterval> out;
  for (const auto& nb : neighbors_within(I, N + 2, max_level).items)
    if (nb.distance > 2 && disjoint(nb.interval, I)) out.push_back(nb.interval);
  return out;
}

namespace {
std::uint64_t parse_u64(const std::string& s, const std::string& whole) {
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty())
    throw std::invalid_argument("bad interval literal: " + whole);
  return v;
}
}  // namespace

DyadicInterval parse_interval(const std::string& text) {
  DyadicInterval I;
  if (!text.empty() && text[0] == 'I') {
    std::string body = text.substr(1);
    bool b = !body.empty() && body.back() == 'b';
    if (b) body.pop_back();
    I = {static_cast<std::uint32_t>(parse_u64(body, text)), b ? 1u : 0u};
    if (b && I.level == 0) throw std::invalid_argument("I0 has no sibling: " + text);
  } else {
    auto colon = text.find(':');
    if (colon == std::string::npos) throw std::invalid_argument("bad interval literal: " + text);
    I = {static_cast<std::uint32_t>(parse_u64(text.substr(0, colon), text)),
         parse_u64(text.substr(colon + 1), text)};
  }
  validate(I);
  return I;
}

std::string to_string(const DyadicInterval& I) {
  return std::to_string(I.level) + ":" + std::to_string(I.index);
}

}  // namespace haarlab
