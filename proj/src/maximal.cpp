#include "haarlab/maximal.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace haarlab {

double c1_b(const MeasureTree<double>& M, const DyadicInterval& I, const DyadicInterval& J) {
  if (I == J) return 1.0;
  return std::sqrt(M.m_value(I) * M.m_value(J)) / M.mass(J);
}

MaximalResult maximal_N(const MeasureTree<double>& M, const StepFunction<double>& f, std::uint32_t N) {
  const auto g = f.abs();
  const std::uint32_t D = M.depth_bound();
  const std::uint32_t reach = N + 2;
  const double tail_factor = std::max(1.0, std::pow(2.0, 0.5 * N - 1.0));
  MaximalResult res;
  std::unordered_map<DyadicInterval, double, DyadicIntervalHash> avg_cache;
  auto A = [&](const DyadicInterval& I) {
    auto it = avg_cache.find(I);
    if (it != avg_cache.end()) return it->second;
    double v = average(M, g, I);
    avg_cache.emplace(I, v);
    return v;
  };
  auto V = [&](const DyadicInterval& J) {
    double best = A(J);
    if (!M.is_internal(J)) {
      res.clipped = true;
      return best;
    }
    auto nl = neighbors_within(J, reach, D - 1);
    if (J.level + reach > D - 1) res.clipped = true;
    double mJ = M.m_value(J), muJ = M.mass(J);
    for (const auto& nb : nl.items) {
      if (nb.distance == 0) continue;
      best = std::max(best, std::sqrt(M.m_value(nb.interval) * mJ) / muJ * A(nb.interval));
    }
    return best;
  };

  std::vector<Cell<double>> out;
  std::vector<std::pair<DyadicInterval, double>> stack{{root_interval, 0.0}};
  while (!stack.empty()) {
    auto [J, run] = stack.back();
    stack.pop_back();
    run = std::max(run, V(J));
    const Cell<double>* Q = g.cell_containing(J);
    if (Q) {
      double v = Q->value;
      // Below J every neighbor lies in the uniform region J^(N+1) ⊆ Q with average v.
      if (J.level >= Q->interval.level + N + 1 && J.level + 1 < D && M.uniform_below(ancestor(J, N + 1))) {
        out.push_back({J, std::max(run, v * tail_factor)});
        continue;
      }
      if (J.level + 1 >= D) {
        out.push_back({J, std::max(run, v)});
        res.clipped = true;
        continue;
      }
    }
    stack.push_back({right_child(J), run});
    stack.push_back({left_child(J), run});
  }
  res.value = StepFunction<double>::from_cells(std::move(out));
  return res;
}

Operator op_maximal(const MeasureTree<double>& M) {
  return [M](const StepFunction<double>& f) { return maximal(M, f); };
}

Operator op_maximal_N(const MeasureTree<double>& M, std::uint32_t N) {
  return [M, N](const StepFunction<double>& f) { return maximal_N(M, f, N).value; };
}

Operator op_shift(const MeasureTree<double>& M, const HaarShift& T) {
  return [M, T](const StepFunction<double>& f) { return apply(T, M, f); };
}

double weak11_ratio_of(const MeasureTree<double>& M, const StepFunction<double>& g, const StepFunction<double>& f) {
  double n1 = lp_norm(M, f, 1.0);
  if (n1 == 0.0) throw std::invalid_argument("weak11_ratio needs f != 0");
  std::vector<std::pair<double, double>> levels;
  for (const auto& c : g.cells()) levels.emplace_back(std::fabs(c.value), M.mass(c.interval));
  std::sort(levels.begin(), levels.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  double best = 0.0, acc = 0.0;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    acc += levels[i].second;
    if (i + 1 == levels.size() || levels[i + 1].first != levels[i].first)
      best = std::max(best, levels[i].first * acc);
  }
  return best / n1;
}

double weak11_ratio(const MeasureTree<double>& M, const Operator& op, const StepFunction<double>& f) {
  return weak11_ratio_of(M, op(f), f);
}

}  // namespace haarlab
