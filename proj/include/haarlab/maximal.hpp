#pragma once

#include "haarlab/measure.hpp"
#include "haarlab/shift.hpp"
#include "haarlab/stepfn.hpp"

#include <functional>

namespace haarlab {

// ℳf(x) = sup over dyadic I ∋ x of ⟨|f|⟩_I, exact on f's cells.
template <class S>
StepFunction<S> maximal(const MeasureTree<S>& M, const StepFunction<S>& f) {
  auto g = f.abs();
  std::vector<Cell<S>> out;
  std::vector<std::pair<DyadicInterval, S>> stack{{root_interval, S(0)}};
  while (!stack.empty()) {
    auto [I, run] = stack.back();
    stack.pop_back();
    S a = average(M, g, I);
    if (a > run) run = a;
    if (g.constant_on(I)) {
      out.push_back({I, run});
    } else {
      stack.push_back({right_child(I), run});
      stack.push_back({left_child(I), run});
    }
  }
  return StepFunction<S>::from_cells(std::move(out));
}

// Averages with respect to w dμ.
template <class S>
StepFunction<S> maximal_weighted(const MeasureTree<S>& M, const Weight<S>& w, const StepFunction<S>& f) {
  const auto& wf = w.function();
  auto g = f.abs() * wf;
  std::vector<Cell<S>> out;
  std::vector<std::pair<DyadicInterval, S>> stack{{root_interval, S(0)}};
  while (!stack.empty()) {
    auto [I, run] = stack.back();
    stack.pop_back();
    S a = integral(M, g, I) / integral(M, wf, I);
    if (a > run) run = a;
    if (g.constant_on(I) && wf.constant_on(I)) {
      out.push_back({I, run});
    } else {
      stack.push_back({right_child(I), run});
      stack.push_back({left_child(I), run});
    }
  }
  return StepFunction<S>::from_cells(std::move(out));
}

struct MaximalResult {
  StepFunction<double> value;
  // Some candidate pair was dropped at the depth bound.
  bool clipped = false;
};

// c_1^b(I,J) = √(m(I)m(J))/μ(J), and 1 on the diagonal.
double c1_b(const MeasureTree<double>& M, const DyadicInterval& I, const DyadicInterval& J);

MaximalResult maximal_N(const MeasureTree<double>& M, const StepFunction<double>& f, std::uint32_t N);

using Operator = std::function<StepFunction<double>(const StepFunction<double>&)>;

Operator op_maximal(const MeasureTree<double>& M);
Operator op_maximal_N(const MeasureTree<double>& M, std::uint32_t N);
Operator op_shift(const MeasureTree<double>& M, const HaarShift& T);

// sup_λ λ·μ{|g| > λ} / ‖f‖₁ for g = op(f), exact over the level sets of g.
double weak11_ratio(const MeasureTree<double>& M, const Operator& op, const StepFunction<double>& f);
double weak11_ratio_of(const MeasureTree<double>& M, const StepFunction<double>& g, const StepFunction<double>& f);

}  // namespace haarlab
