#pragma once

#include "haarlab/measure.hpp"
#include "haarlab/stepfn.hpp"

#include <random>

namespace haarlab {

// Independent stream for trial `counter` under `seed`.
inline std::mt19937_64 substream(std::uint64_t seed, std::uint64_t counter) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(counter), static_cast<std::uint32_t>(counter >> 32), 0x6861u};
  return std::mt19937_64(seq);
}

struct RandomFunctionOptions {
  DyadicInterval support = root_interval;
  std::uint32_t max_level = 8;
  int splits = 12;
  double lo = -1.0;
  double hi = 1.0;
  // Probability that a cell gets value 0 (sparse data).
  double zero_fraction = 0.0;
};

template <class S>
StepFunction<S> random_step_function(std::mt19937_64& rng, const RandomFunctionOptions& opt) {
  std::vector<DyadicInterval> cells{opt.support};
  for (int k = 0; k < opt.splits; ++k) {
    std::vector<std::size_t> open;
    for (std::size_t i = 0; i < cells.size(); ++i)
      if (cells[i].level < opt.max_level) open.push_back(i);
    if (open.empty()) break;
    std::size_t pick = open[std::uniform_int_distribution<std::size_t>(0, open.size() - 1)(rng)];
    DyadicInterval I = cells[pick];
    cells[pick] = left_child(I);
    cells.push_back(right_child(I));
  }
  std::map<DyadicInterval, S> terms;
  std::uniform_real_distribution<double> U(opt.lo, opt.hi);
  std::uniform_real_distribution<double> Z(0.0, 1.0);
  for (const auto& c : cells) {
    double v = Z(rng) < opt.zero_fraction ? 0.0 : U(rng);
    if constexpr (ScalarTraits<S>::exact) {
      terms[c] = Rational(static_cast<std::int64_t>(std::llround(v * 64)), 64);
    } else {
      terms[c] = v;
    }
  }
  return StepFunction<S>::sum_of_indicators(terms);
}

// Nonnegative random function plus a few tall narrow bumps (height 2^(relative level)),
// so stopping-time selections actually fire.
template <class S>
StepFunction<S> random_spiky_function(std::mt19937_64& rng, const DyadicInterval& support, std::uint32_t max_level,
                                      int spikes) {
  RandomFunctionOptions opt{support, max_level, 24, 0.0, 4.0, 0.4};
  auto f = random_step_function<S>(rng, opt);
  if (max_level < support.level + 2) return f;
  for (int k = 0; k < spikes; ++k) {
    std::uint32_t r = std::uniform_int_distribution<std::uint32_t>(2, std::min(max_level - support.level, 40u))(rng);
    std::uint64_t off = std::uniform_int_distribution<std::uint64_t>(0, (std::uint64_t{1} << r) - 1)(rng);
    DyadicInterval J{support.level + r, (support.index << r) + off};
    f = f + StepFunction<S>::indicator(J, S(static_cast<std::int64_t>(std::uint64_t{1} << r)));
  }
  return f;
}

// Positive weight with log2 values uniform in [-spread, spread].
inline Weight<double> random_weight(std::mt19937_64& rng, std::uint32_t max_level, int splits, double spread) {
  RandomFunctionOptions opt;
  opt.max_level = max_level;
  opt.splits = splits;
  opt.lo = -spread;
  opt.hi = spread;
  auto g = random_step_function<double>(rng, opt);
  return Weight<double>(g.map([](double x) { return std::exp2(x); }));
}

}  // namespace haarlab
