#pragma once

#include "haarlab/dyadic.hpp"
#include "haarlab/measure.hpp"
#include "haarlab/scalar.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace haarlab {

template <class S>
struct Cell {
  DyadicInterval interval;
  S value;
  friend bool operator==(const Cell&, const Cell&) = default;
};

// Finite combination of dyadic indicators, stored as a canonical partition of the root.
template <class S>
class StepFunction {
 public:
  StepFunction() : cells_{{root_interval, S(0)}} {}

  static StepFunction constant(const S& c) {
    StepFunction f;
    f.cells_[0].value = c;
    return f;
  }

  static StepFunction indicator(const DyadicInterval& I, const S& value = S(1)) {
    validate(I);
    std::vector<Cell<S>> cells;
    DyadicInterval cur = I;
    cells.push_back({I, value});
    while (cur.level > 0) {
      cells.push_back({sibling(cur), S(0)});
      cur = parent(cur);
    }
    return from_cells(std::move(cells));
  }

  // Cells must partition the root.
  static StepFunction from_cells(std::vector<Cell<S>> cells) {
    std::sort(cells.begin(), cells.end(),
              [](const Cell<S>& a, const Cell<S>& b) { return left_order_less(a.interval, b.interval); });
    check_partition(cells, 0, cells.size(), root_interval);
    StepFunction f;
    f.cells_ = canonicalize(std::move(cells));
    return f;
  }

  // Σ v_I 1_I over arbitrary (possibly nested) intervals.
  static StepFunction sum_of_indicators(const std::map<DyadicInterval, S>& terms) {
    std::map<DyadicInterval, S> split;  // nodes whose children must be visited
    for (const auto& [I, v] : terms) {
      validate(I);
      DyadicInterval A = I;
      while (A.level > 0) {
        A = parent(A);
        if (!split.emplace(A, S(0)).second) break;
      }
    }
    std::vector<Cell<S>> out;
    struct Frame {
      DyadicInterval I;
      S acc;
    };
    std::vector<Frame> stack{{root_interval, S(0)}};
    while (!stack.empty()) {
      Frame fr = std::move(stack.back());
      stack.pop_back();
      auto t = terms.find(fr.I);
      if (t != terms.end()) fr.acc += t->second;
      if (split.count(fr.I)) {
        stack.push_back({right_child(fr.I), fr.acc});
        stack.push_back({left_child(fr.I), fr.acc});
      } else {
        out.push_back({fr.I, fr.acc});
      }
    }
    StepFunction f;
    f.cells_ = canonicalize(std::move(out));
    return f;
  }

  const std::vector<Cell<S>>& cells() const { return cells_; }
  std::size_t size() const { return cells_.size(); }

  std::uint32_t max_level() const {
    std::uint32_t L = 0;
    for (const auto& c : cells_) L = std::max(L, c.interval.level);
    return L;
  }

  // Cells meeting I, as [lo, hi) indices.
  std::pair<std::size_t, std::size_t> range(const DyadicInterval& I) const {
    auto lo = std::partition_point(cells_.begin(), cells_.end(),
                                   [&](const Cell<S>& c) { return relative_position(c.interval, I) < 0; });
    auto hi = std::partition_point(lo, cells_.end(),
                                   [&](const Cell<S>& c) { return relative_position(c.interval, I) == 0; });
    return {static_cast<std::size_t>(lo - cells_.begin()), static_cast<std::size_t>(hi - cells_.begin())};
  }

  // Value on I when f is constant there.
  std::optional<S> constant_on(const DyadicInterval& I) const {
    auto [lo, hi] = range(I);
    if (hi - lo == 1 && contains(cells_[lo].interval, I)) return cells_[lo].value;
    return std::nullopt;
  }

  // The cell containing I, if any.
  const Cell<S>* cell_containing(const DyadicInterval& I) const {
    auto [lo, hi] = range(I);
    if (hi - lo == 1 && contains(cells_[lo].interval, I)) return &cells_[lo];
    return nullptr;
  }

  template <class F>
  StepFunction map(F op) const {
    std::vector<Cell<S>> out;
    out.reserve(cells_.size());
    for (const auto& c : cells_) out.push_back({c.interval, op(c.value)});
    StepFunction f;
    f.cells_ = canonicalize(std::move(out));
    return f;
  }

  template <class F>
  static StepFunction combine(const StepFunction& a, const StepFunction& b, F op) {
    std::vector<Cell<S>> out;
    out.reserve(a.cells_.size() + b.cells_.size());
    combine_rec(a.cells_, 0, a.cells_.size(), b.cells_, 0, b.cells_.size(), root_interval, op, out);
    StepFunction f;
    f.cells_ = canonicalize(std::move(out));
    return f;
  }

  StepFunction restricted(const DyadicInterval& I) const {
    return combine(*this, indicator(I), [](const S& x, const S& y) { return S(x * y); });
  }

  StepFunction abs() const {
    return map([](const S& x) { return sabs(x); });
  }

  friend StepFunction operator+(const StepFunction& a, const StepFunction& b) {
    return combine(a, b, [](const S& x, const S& y) { return S(x + y); });
  }
  friend StepFunction operator-(const StepFunction& a, const StepFunction& b) {
    return combine(a, b, [](const S& x, const S& y) { return S(x - y); });
  }
  friend StepFunction operator*(const StepFunction& a, const StepFunction& b) {
    return combine(a, b, [](const S& x, const S& y) { return S(x * y); });
  }
  friend StepFunction operator*(const S& c, const StepFunction& a) {
    return a.map([&](const S& x) { return S(c * x); });
  }
  friend bool operator==(const StepFunction& a, const StepFunction& b) { return a.cells_ == b.cells_; }

  template <class T>
  StepFunction<T> cast() const {
    std::vector<Cell<T>> out;
    out.reserve(cells_.size());
    for (const auto& c : cells_) {
      if constexpr (std::is_same_v<T, double>) {
        out.push_back({c.interval, to_double(c.value)});
      } else {
        out.push_back({c.interval, T(c.value)});
      }
    }
    return StepFunction<T>::from_cells(std::move(out));
  }

 private:
  std::vector<Cell<S>> cells_;

  static bool in_right_half(const DyadicInterval& c, const DyadicInterval& I) {
    return (shift_down(c.index, c.level - I.level - 1) & 1) != 0;
  }

  static std::size_t split_point(const std::vector<Cell<S>>& v, std::size_t lo, std::size_t hi,
                                 const DyadicInterval& I) {
    auto it = std::partition_point(v.begin() + static_cast<std::ptrdiff_t>(lo), v.begin() + static_cast<std::ptrdiff_t>(hi),
                                   [&](const Cell<S>& c) { return !in_right_half(c.interval, I); });
    return static_cast<std::size_t>(it - v.begin());
  }

  static void check_partition(const std::vector<Cell<S>>& v, std::size_t lo, std::size_t hi, const DyadicInterval& I) {
    if (hi == lo) throw std::invalid_argument("cells do not cover " + to_string(I));
    if (hi - lo == 1 && v[lo].interval == I) return;
    for (std::size_t i = lo; i < hi; ++i)
      if (!contains(I, v[i].interval) || v[i].interval == I)
        throw std::invalid_argument("cells overlap or escape near " + to_string(v[i].interval));
    std::size_t mid = split_point(v, lo, hi, I);
    check_partition(v, lo, mid, left_child(I));
    check_partition(v, mid, hi, right_child(I));
  }

  template <class F>
  static void combine_rec(const std::vector<Cell<S>>& a, std::size_t alo, std::size_t ahi,
                          const std::vector<Cell<S>>& b, std::size_t blo, std::size_t bhi, const DyadicInterval& I,
                          F& op, std::vector<Cell<S>>& out) {
    bool ac = ahi - alo == 1, bc = bhi - blo == 1;
    if (ac && bc) {
      out.push_back({I, op(a[alo].value, b[blo].value)});
      return;
    }
    std::size_t amid = ac ? alo : split_point(a, alo, ahi, I);
    std::size_t bmid = bc ? blo : split_point(b, blo, bhi, I);
    combine_rec(a, alo, ac ? ahi : amid, b, blo, bc ? bhi : bmid, left_child(I), op, out);
    combine_rec(a, ac ? alo : amid, ahi, b, bc ? blo : bmid, bhi, right_child(I), op, out);
  }

  // Cells in left-to-right order; merges equal siblings bottom-up.
  static std::vector<Cell<S>> canonicalize(std::vector<Cell<S>> cells) {
    std::vector<Cell<S>> st;
    st.reserve(cells.size());
    for (auto& c : cells) {
      st.push_back(std::move(c));
      while (st.size() >= 2) {
        auto& r = st[st.size() - 1];
        auto& l = st[st.size() - 2];
        if (r.interval.level == 0 || l.interval.level != r.interval.level || !is_left_child(l.interval) ||
            sibling(l.interval) != r.interval || !(l.value == r.value))
          break;
        l.interval = parent(l.interval);
        st.pop_back();
      }
    }
    return st;
  }
};

template <class S>
class Weight {
 public:
  Weight() : w_(StepFunction<S>::constant(S(1))) {}
  explicit Weight(StepFunction<S> w) : w_(std::move(w)) {
    for (const auto& c : w_.cells())
      if (!(c.value > 0)) throw std::invalid_argument("weight must be positive on every cell");
  }
  const StepFunction<S>& function() const { return w_; }
  // w^e cell by cell.
  Weight power(double e) const {
    return Weight(w_.map([&](const S& x) { return S(std::pow(to_double(x), e)); }));
  }

 private:
  StepFunction<S> w_;
};

template <class S>
S integral(const MeasureTree<S>& M, const StepFunction<S>& f, const DyadicInterval& I) {
  auto [lo, hi] = f.range(I);
  const auto& cs = f.cells();
  if (hi - lo == 1 && contains(cs[lo].interval, I)) return cs[lo].value * M.mass(I);
  S acc(0);
  for (std::size_t i = lo; i < hi; ++i) acc += cs[i].value * M.mass(cs[i].interval);
  return acc;
}

template <class S>
S integral(const MeasureTree<S>& M, const StepFunction<S>& f) {
  return integral(M, f, root_interval);
}

template <class S>
S average(const MeasureTree<S>& M, const StepFunction<S>& f, const DyadicInterval& I) {
  return integral(M, f, I) / M.mass(I);
}

template <class S>
S inner(const MeasureTree<S>& M, const StepFunction<S>& f, const StepFunction<S>& g) {
  return integral(M, f * g);
}

inline constexpr double infinity_p = std::numeric_limits<double>::infinity();

template <class S>
double lp_norm(const MeasureTree<S>& M, const StepFunction<S>& f, double p, const Weight<S>* w = nullptr) {
  if (p < 1.0) throw std::invalid_argument("p must be >= 1");
  if (std::isinf(p)) {
    double mx = 0;
    for (const auto& c : f.cells()) mx = std::max(mx, std::fabs(to_double(c.value)));
    return mx;
  }
  auto body = [&](const StepFunction<S>& g, const StepFunction<S>* wt) {
    double acc = 0;
    if (!wt) {
      for (const auto& c : g.cells())
        acc += std::pow(std::fabs(to_double(c.value)), p) * to_double(M.mass(c.interval));
    } else {
      auto prod = StepFunction<S>::combine(g, *wt, [&](const S& x, const S& y) {
        return S(std::pow(std::fabs(to_double(x)), p) * to_double(y));
      });
      for (const auto& c : prod.cells()) acc += to_double(c.value) * to_double(M.mass(c.interval));
    }
    return std::pow(acc, 1.0 / p);
  };
  return body(f, w ? &w->function() : nullptr);
}

// sup over non-root I (level <= depth) of (1/μ(I)) ∫_I |f - ⟨f⟩_Î| dμ.
template <class S>
S bmo_norm(const MeasureTree<S>& M, const StepFunction<S>& f, std::uint32_t depth) {
  S best(0);
  std::vector<DyadicInterval> stack{root_interval};
  const auto& cs = f.cells();
  while (!stack.empty()) {
    DyadicInterval P = stack.back();
    stack.pop_back();
    if (P.level >= depth || f.constant_on(P)) continue;
    S aP = average(M, f, P);
    for (const auto& C : {left_child(P), right_child(P)}) {
      auto [lo, hi] = f.range(C);
      S acc(0);
      if (hi - lo == 1 && contains(cs[lo].interval, C)) {
        acc = sabs(S(cs[lo].value - aP));
      } else {
        for (std::size_t i = lo; i < hi; ++i) acc += sabs(S(cs[i].value - aP)) * M.mass(cs[i].interval);
        acc /= M.mass(C);
        stack.push_back(C);
      }
      if (acc > best) best = acc;
    }
  }
  return best;
}

// JSON function literal: [{"interval": "L:IDX", "value": real}].
StepFunction<double> parse_function(const std::string& json_text);
std::string to_json(const StepFunction<double>& f);

}  // namespace haarlab
