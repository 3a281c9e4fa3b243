#pragma once

#include "haarlab/measure.hpp"
#include "haarlab/stepfn.hpp"

#include <algorithm>
#include <array>
#include <stdexcept>
#include <vector>

namespace haarlab {

template <class S>
struct CZDecomposition {
  DyadicInterval base;
  std::vector<DyadicInterval> selected;
  std::array<StepFunction<S>, 2> good;
  // bad[k][j] is b_{j,k}, paired with selected[k].
  std::vector<std::array<StepFunction<S>, 2>> bad;
  std::array<S, 2> heights{S(0), S(0)};
};

namespace detail {
template <class S>
void check_nonnegative(const StepFunction<S>& f) {
  for (const auto& c : f.cells())
    if (c.value < 0) throw std::domain_error("czd input must be nonnegative");
}
}  // namespace detail

// Maximal J ⊊ I with ⟨f1⟩_J > λ1 or ⟨f2⟩_J > λ2, left to right.
template <class S>
std::vector<DyadicInterval> select_intervals(const MeasureTree<S>& M, const StepFunction<S>& f1,
                                             const StepFunction<S>& f2, const S& l1, const S& l2,
                                             const DyadicInterval& I) {
  std::vector<DyadicInterval> out;
  if (f1.constant_on(I) && f2.constant_on(I)) return out;
  std::vector<DyadicInterval> stack{right_child(I), left_child(I)};
  while (!stack.empty()) {
    DyadicInterval J = stack.back();
    stack.pop_back();
    if (average(M, f1, J) > l1 || average(M, f2, J) > l2) {
      out.push_back(J);
      continue;
    }
    if (f1.constant_on(J) && f2.constant_on(J)) continue;
    if (!M.is_internal(J)) continue;
    stack.push_back(right_child(J));
    stack.push_back(left_child(J));
  }
  return out;
}

template <class S>
CZDecomposition<S> cz_decompose(const MeasureTree<S>& M, const StepFunction<S>& f1, const StepFunction<S>& f2,
                                const S& l1, const S& l2, const DyadicInterval& I) {
  std::array<const StepFunction<S>*, 2> f{&f1, &f2};
  std::array<S, 2> lam{l1, l2};
  for (int j = 0; j < 2; ++j) {
    detail::check_nonnegative(*f[j]);
    if (!(f[j]->restricted(I) == *f[j])) throw std::domain_error("czd input must be supported in the base interval");
    S a = average(M, *f[j], I);
    bool inactive = a == S(0);
    if (lam[j] < 0 || (!inactive && !(lam[j] > a)))
      throw std::domain_error("czd heights must exceed the averages on the base interval");
  }
  CZDecomposition<S> out;
  out.base = I;
  out.heights = lam;
  out.selected = select_intervals(M, f1, f2, l1, l2, I);
  std::map<DyadicInterval, S> outside_mask{{root_interval, S(1)}};
  for (const auto& J : out.selected) outside_mask[J] -= S(1);
  auto outside = StepFunction<S>::sum_of_indicators(outside_mask);
  for (int j = 0; j < 2; ++j) {
    std::map<DyadicInterval, S> parents;
    for (const auto& J : out.selected) parents[parent(J)] += integral(M, *f[j], J) / M.mass(parent(J));
    out.good[j] = (*f[j]) * outside + StepFunction<S>::sum_of_indicators(parents);
  }
  for (const auto& J : out.selected) {
    std::array<StepFunction<S>, 2> b;
    for (int j = 0; j < 2; ++j) {
      S c = integral(M, *f[j], J) / M.mass(parent(J));
      b[j] = f[j]->restricted(J) - StepFunction<S>::indicator(parent(J), c);
    }
    out.bad.push_back(std::move(b));
  }
  return out;
}

// ℬ(J) with heights multiplier·⟨f_j⟩_J.
template <class S>
std::vector<DyadicInterval> stopping_children(const MeasureTree<S>& M, const StepFunction<S>& f1,
                                              const StepFunction<S>& f2, const DyadicInterval& J,
                                              const S& multiplier = S(16)) {
  S a1 = average(M, f1, J), a2 = average(M, f2, J);
  if (a1 == S(0) && a2 == S(0)) return {};
  return select_intervals(M, f1, f2, S(multiplier * a1), S(multiplier * a2), J);
}

// ℬ_0(I), ℬ_1(I), ... until empty (at most max_generations).
template <class S>
std::vector<std::vector<DyadicInterval>> stopping_generations(const MeasureTree<S>& M, const StepFunction<S>& f1,
                                                              const StepFunction<S>& f2, const DyadicInterval& I,
                                                              std::size_t max_generations = 1u << 20,
                                                              const S& multiplier = S(16)) {
  std::vector<std::vector<DyadicInterval>> gens;
  std::vector<DyadicInterval> cur{I};
  while (gens.size() < max_generations) {
    std::vector<DyadicInterval> next;
    for (const auto& J : cur) {
      auto kids = stopping_children(M, f1, f2, J, multiplier);
      next.insert(next.end(), kids.begin(), kids.end());
    }
    if (next.empty()) break;
    gens.push_back(next);
    cur = std::move(next);
  }
  return gens;
}

template <class S>
std::vector<DyadicInterval> stopping_family(const MeasureTree<S>& M, const StepFunction<S>& f1,
                                            const StepFunction<S>& f2, const DyadicInterval& I, std::size_t k,
                                            const S& multiplier = S(16)) {
  auto gens = stopping_generations(M, f1, f2, I, k + 1, multiplier);
  return k < gens.size() ? gens[k] : std::vector<DyadicInterval>{};
}

// ℬ^N(I) = ℬ_0 ∪ ... ∪ ℬ_N.
template <class S>
std::vector<DyadicInterval> stopping_union(const MeasureTree<S>& M, const StepFunction<S>& f1,
                                           const StepFunction<S>& f2, const DyadicInterval& I, std::size_t N,
                                           const S& multiplier = S(16)) {
  std::vector<DyadicInterval> out;
  for (const auto& g : stopping_generations(M, f1, f2, I, N + 1, multiplier)) out.insert(out.end(), g.begin(), g.end());
  std::sort(out.begin(), out.end());
  return out;
}

// 𝒢(I): J ⊆ I not contained in any member of ℬ(I).
class GoodRegion {
 public:
  GoodRegion(DyadicInterval base, std::vector<DyadicInterval> bad) : base_(base), bad_(std::move(bad)) {}
  bool contains_interval(const DyadicInterval& J) const {
    if (!contains(base_, J)) return false;
    for (const auto& K : bad_)
      if (contains(K, J)) return false;
    return true;
  }
  const std::vector<DyadicInterval>& excluded() const { return bad_; }

 private:
  DyadicInterval base_;
  std::vector<DyadicInterval> bad_;
};

template <class S>
GoodRegion good_region(const MeasureTree<S>& M, const StepFunction<S>& f1, const StepFunction<S>& f2,
                       const DyadicInterval& I, const S& multiplier = S(16)) {
  return GoodRegion(I, stopping_children(M, f1, f2, I, multiplier));
}

}  // namespace haarlab
