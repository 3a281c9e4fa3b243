#pragma once

#include "haarlab/dyadic.hpp"
#include "haarlab/scalar.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace haarlab {

enum class MeasureKind { uniform, lmp, random };

struct MeasureSpec {
  MeasureKind kind = MeasureKind::uniform;
  std::uint32_t depth = 16;
  std::uint64_t seed = 0;
  double theta = 0.25;
  std::vector<std::pair<DyadicInterval, Rational>> explicit_masses;
};

MeasureSpec parse_measure_spec(const std::string& json_text);
std::string to_string(MeasureKind k);

struct BalanceReport {
  double balanced_constant = 1.0;
  DyadicInterval worst_interval;
  std::vector<std::pair<std::uint32_t, double>> doubling_profile;
  std::uint32_t scan_depth = 0;
};

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}
inline constexpr std::int64_t random_split_denominator = 1 << 20;

template <class S>
S pow2_neg(std::uint64_t k) {
  if constexpr (ScalarTraits<S>::exact) {
    boost::multiprecision::mpz_int den = 1;
    den <<= static_cast<unsigned>(k);
    return S(boost::multiprecision::mpz_int(1), den);
  } else {
    return std::ldexp(1.0, -static_cast<int>(std::min<std::uint64_t>(k, 100000)));
  }
}
}  // namespace detail

// Lazily refined measure on the dyadic grid. Copies share the memo.
template <class S>
class MeasureTree {
 public:
  static MeasureTree build_uniform(std::uint32_t depth_bound) {
    if (depth_bound < 1) throw std::invalid_argument("depth_bound must be >= 1");
    return MeasureTree(MeasureKind::uniform, depth_bound, 0, 0.5);
  }

  static MeasureTree build_lmp(std::uint32_t depth_bound) {
    if (depth_bound < 2) throw std::invalid_argument("depth_bound must be >= 2");
    MeasureTree T(MeasureKind::lmp, depth_bound, 0, 0.5);
    // Eagerly materialize the leftmost chain.
    for (std::uint32_t k = 1; k <= depth_bound; ++k) {
      (void)T.mass(chain(k));
      (void)T.mass(chain_b(k));
    }
    return T;
  }

  static MeasureTree build_random_balanced(std::uint32_t depth_bound, std::uint64_t seed, double theta) {
    if (!(theta > 0.0 && theta <= 0.5)) throw std::invalid_argument("theta must lie in (0, 1/2]");
    if (depth_bound < 1) throw std::invalid_argument("depth_bound must be >= 1");
    return MeasureTree(MeasureKind::random, depth_bound, seed, theta);
  }

  static MeasureTree from_spec(const MeasureSpec& spec) {
    MeasureTree T = spec.kind == MeasureKind::uniform ? build_uniform(spec.depth)
                    : spec.kind == MeasureKind::lmp   ? MeasureTree(MeasureKind::lmp, spec.depth, 0, 0.5)
                                                      : build_random_balanced(spec.depth, spec.seed, spec.theta);
    if (!spec.explicit_masses.empty()) T.install_explicit(spec.explicit_masses);
    return T;
  }

  MeasureKind kind() const { return st_->kind; }
  std::uint32_t depth_bound() const { return st_->depth_bound; }
  std::uint64_t seed() const { return st_->seed; }
  double theta() const { return st_->theta; }

  bool is_internal(const DyadicInterval& I) const { return I.level < st_->depth_bound; }

  S mass(const DyadicInterval& I) const {
    if (I.level > st_->depth_bound) throw std::domain_error("depth bound exceeded at " + to_string(I));
    std::lock_guard<std::mutex> lock(st_->mu);
    return mass_locked(I);
  }

  S m_value(const DyadicInterval& I) const {
    if (I.level >= st_->depth_bound) throw std::domain_error("m undefined at depth bound: " + to_string(I));
    S a = mass(left_child(I));
    S b = mass(right_child(I));
    return a * b / (a + b);
  }

  // Left child mass fraction at I.
  S left_fraction(const DyadicInterval& I) const {
    {
      std::lock_guard<std::mutex> lock(st_->mu);
      auto it = st_->memo.find(left_child(I));
      auto ip = st_->memo.find(I);
      if (it != st_->memo.end() && ip != st_->memo.end()) return it->second / ip->second;
    }
    return base_fraction(I);
  }

  // Every split inside I (down to the depth bound) is an equal split.
  bool uniform_below(const DyadicInterval& I) const {
    bool base = false;
    switch (st_->kind) {
      case MeasureKind::uniform: base = true; break;
      case MeasureKind::lmp: base = I.index != 0; break;
      case MeasureKind::random: base = st_->theta == 0.5; break;
    }
    if (!base) return false;
    for (const auto& E : st_->explicit_parents)
      if (contains(I, E)) return false;
    return true;
  }

  BalanceReport balance_report(std::uint32_t depth) const {
    if (depth + 1 > st_->depth_bound) throw std::domain_error("scan depth must be <= depth_bound - 1");
    BalanceReport r;
    r.scan_depth = depth;
    std::map<std::uint32_t, double> prof;
    auto note_ratio = [&](const DyadicInterval& I, double v) {
      if (v > r.balanced_constant) {
        r.balanced_constant = v;
        r.worst_interval = I;
      }
    };
    auto note_doubling = [&](std::uint32_t level, double v) {
      auto& slot = prof[level];
      slot = std::max(slot, v);
    };
    std::vector<DyadicInterval> stack{root_interval};
    while (!stack.empty()) {
      DyadicInterval P = stack.back();
      stack.pop_back();
      if (P.level >= depth) continue;
      double mP = to_double(m_value(P));
      double muP = to_double(mass(P));
      for (const auto& C : {left_child(P), right_child(P)}) {
        double mC = to_double(m_value(C));
        note_ratio(C, std::max(mC / mP, mP / mC));
        note_doubling(C.level, muP / to_double(mass(C)));
        if (uniform_below(C)) {
          if (C.level + 1 <= depth) note_ratio(left_child(C), 2.0);
          for (std::uint32_t l = C.level + 1; l <= depth; ++l) note_doubling(l, 2.0);
        } else {
          stack.push_back(C);
        }
      }
    }
    for (const auto& [l, v] : prof) r.doubling_profile.emplace_back(l, v);
    return r;
  }

 private:
  struct State {
    MeasureKind kind;
    std::uint32_t depth_bound;
    std::uint64_t seed;
    double theta;
    std::int64_t lo = 0;
    mutable std::mutex mu;
    std::unordered_map<DyadicInterval, S, DyadicIntervalHash> memo;
    std::unordered_set<DyadicInterval, DyadicIntervalHash> explicit_nodes;
    std::vector<DyadicInterval> explicit_parents;
  };
  std::shared_ptr<State> st_;

  MeasureTree(MeasureKind kind, std::uint32_t depth_bound, std::uint64_t seed, double theta)
      : st_(std::make_shared<State>()) {
    st_->kind = kind;
    st_->depth_bound = depth_bound;
    st_->seed = seed;
    st_->theta = theta;
    st_->lo = static_cast<std::int64_t>(std::ceil(theta * detail::random_split_denominator));
    st_->memo.emplace(root_interval, S(1));
  }

  S base_fraction(const DyadicInterval& I) const {
    switch (st_->kind) {
      case MeasureKind::uniform: return ScalarTraits<S>::from_ratio(1, 2);
      case MeasureKind::lmp:
        if (I.index == 0 && I.level >= 1) return ScalarTraits<S>::from_ratio(I.level, I.level + 1);
        return ScalarTraits<S>::from_ratio(1, 2);
      case MeasureKind::random: {
        const std::int64_t D = detail::random_split_denominator;
        const std::int64_t lo = st_->lo, hi = D - lo;
        if (hi <= lo) return ScalarTraits<S>::from_ratio(1, 2);
        std::uint64_t h = detail::splitmix64(st_->seed ^ detail::splitmix64(
                                                 (std::uint64_t{I.level} << 40) ^ detail::splitmix64(I.index)));
        std::int64_t u = static_cast<std::int64_t>(h % static_cast<std::uint64_t>(hi - lo + 1));
        return ScalarTraits<S>::from_ratio(lo + u, D);
      }
    }
    return ScalarTraits<S>::from_ratio(1, 2);
  }

  S mass_locked(const DyadicInterval& I) const {
    auto& memo = st_->memo;
    auto hit = memo.find(I);
    if (hit != memo.end()) return hit->second;
    std::vector<DyadicInterval> path{I};
    DyadicInterval A = I;
    while (true) {
      A = parent(A);
      auto it = memo.find(A);
      if (it != memo.end()) {
        if (uniform_below(A)) return it->second * detail::pow2_neg<S>(I.level - A.level);
        break;
      }
      path.push_back(A);
    }
    S m = memo.at(A);
    for (auto p = path.rbegin(); p != path.rend(); ++p) {
      DyadicInterval P = parent(*p);
      S f = base_fraction(P);
      m = is_left_child(*p) ? m * f : m * (S(1) - f);
      memo.emplace(*p, m);
    }
    return m;
  }

  void install_explicit(const std::vector<std::pair<DyadicInterval, Rational>>& masses) {
    std::map<DyadicInterval, Rational> given;
    for (const auto& [I, v] : masses) {
      validate(I);
      if (I.level > st_->depth_bound) throw std::invalid_argument("explicit interval beyond depth: " + to_string(I));
      if (v <= 0) throw std::invalid_argument("explicit mass must be positive at " + to_string(I));
      if (!given.emplace(I, v).second) throw std::invalid_argument("duplicate explicit interval " + to_string(I));
    }
    auto root_it = given.find(root_interval);
    Rational root_mass = root_it == given.end() ? Rational(1) : root_it->second;
    given[root_interval] = root_mass;
    for (const auto& [I, v] : given) {
      if (I.level == 0) continue;
      if (!given.count(parent(I)) || !given.count(sibling(I)))
        throw std::invalid_argument("explicit set must be closed under parent and sibling: " + to_string(I));
      if (is_left_child(I) && given.at(I) + given.at(sibling(I)) != given.at(parent(I)))
        throw std::invalid_argument("explicit masses violate additivity below " + to_string(parent(I)));
    }
    std::lock_guard<std::mutex> lock(st_->mu);
    st_->memo.clear();
    for (const auto& [I, v] : given) {
      if constexpr (ScalarTraits<S>::exact) {
        st_->memo.emplace(I, v);
      } else {
        st_->memo.emplace(I, v.template convert_to<double>());
      }
      st_->explicit_nodes.insert(I);
      if (I.level > 0 && is_left_child(I)) st_->explicit_parents.push_back(parent(I));
    }
  }
};

}  // namespace haarlab
