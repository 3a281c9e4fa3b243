#pragma once

#include "haarlab/measure.hpp"
#include "haarlab/stepfn.hpp"

#include <cmath>
#include <map>

namespace haarlab {

// Coefficients kept as differences d_I = ⟨f⟩_{I-} - ⟨f⟩_{I+}, so ⟨f,h_I⟩ = √m(I)·d_I.
// This keeps analysis and synthesis exact in rational mode.
template <class S>
struct HaarCoefficients {
  S root_mean = S(0);
  std::map<DyadicInterval, S> diffs;

  double coefficient(const MeasureTree<S>& M, const DyadicInterval& I) const {
    auto it = diffs.find(I);
    if (it == diffs.end()) return 0.0;
    return std::sqrt(to_double(M.m_value(I))) * to_double(it->second);
  }

  // ⟨f,h_I⟩² exactly.
  S squared_coefficient(const MeasureTree<S>& M, const DyadicInterval& I) const {
    auto it = diffs.find(I);
    if (it == diffs.end()) return S(0);
    return M.m_value(I) * it->second * it->second;
  }

  // ⟨f,h_I⟩ for every stored I.
  std::map<DyadicInterval, double> coefficients(const MeasureTree<S>& M) const {
    std::map<DyadicInterval, double> out;
    for (const auto& [I, d] : diffs) out.emplace(I, std::sqrt(to_double(M.m_value(I))) * to_double(d));
    return out;
  }
};

template <class S>
HaarCoefficients<S> analyze(const MeasureTree<S>& M, const StepFunction<S>& f) {
  HaarCoefficients<S> c;
  const auto& cs = f.cells();
  // Returns ∫_I f over cells [lo, hi) meeting I.
  auto rec = [&](auto&& self, const DyadicInterval& I, std::size_t lo, std::size_t hi) -> S {
    if (hi - lo == 1 && contains(cs[lo].interval, I)) return cs[lo].value * M.mass(I);
    auto mid = static_cast<std::size_t>(
        std::partition_point(cs.begin() + static_cast<std::ptrdiff_t>(lo), cs.begin() + static_cast<std::ptrdiff_t>(hi),
                             [&](const Cell<S>& x) { return relative_position(x.interval, right_child(I)) < 0; }) -
        cs.begin());
    auto L = left_child(I), R = right_child(I);
    S a = self(self, L, lo, mid);
    S b = self(self, R, mid, hi);
    S d = a / M.mass(L) - b / M.mass(R);
    if (!(d == S(0))) c.diffs.emplace(I, d);
    return a + b;
  };
  S total = rec(rec, root_interval, 0, cs.size());
  c.root_mean = total / M.mass(root_interval);
  return c;
}

template <class S>
StepFunction<S> synthesize(const MeasureTree<S>& M, const HaarCoefficients<S>& c) {
  std::map<DyadicInterval, S> terms;
  terms[root_interval] = c.root_mean;
  for (const auto& [I, d] : c.diffs) {
    S md = M.m_value(I) * d;
    auto L = left_child(I), R = right_child(I);
    terms[L] += md / M.mass(L);
    terms[R] -= md / M.mass(R);
  }
  return StepFunction<S>::sum_of_indicators(terms);
}

// ‖f‖² via Parseval.
template <class S>
S parseval_energy(const MeasureTree<S>& M, const HaarCoefficients<S>& c) {
  S e = c.root_mean * c.root_mean * M.mass(root_interval);
  for (const auto& [I, d] : c.diffs) e += M.m_value(I) * d * d;
  return e;
}

inline StepFunction<double> haar_function(const MeasureTree<double>& M, const DyadicInterval& I) {
  double sm = std::sqrt(M.m_value(I));
  auto L = left_child(I), R = right_child(I);
  return StepFunction<double>::sum_of_indicators({{L, sm / M.mass(L)}, {R, -sm / M.mass(R)}});
}

// ⟨f,h_I⟩ by integrating the product (independent path).
inline double haar_coefficient_direct(const MeasureTree<double>& M, const StepFunction<double>& f,
                                      const DyadicInterval& I) {
  return inner(M, f, haar_function(M, I));
}

}  // namespace haarlab
