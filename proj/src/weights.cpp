#include "haarlab/weights.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

namespace haarlab {

std::string to_string(WeightKind k) {
  switch (k) {
    case WeightKind::classical: return "classical";
    case WeightKind::balanced: return "balanced";
    case WeightKind::distance_N: return "distance-N";
    case WeightKind::one_sided_01: return "one-sided-01";
  }
  return "?";
}

double c_p_b(const MeasureTree<double>& M, const DyadicInterval& I, const DyadicInterval& J, double p) {
  if (I == J) {
    if (!M.is_internal(I)) throw std::domain_error("c_p^b at the depth bound: " + to_string(I));
    return 1.0;
  }
  double mI = M.m_value(I), mJ = M.m_value(J);
  return std::pow(mI * mJ, p / 2) / (M.mass(J) * std::pow(M.mass(I), p - 1));
}

namespace {

double ess_inf(const StepFunction<double>& f, const DyadicInterval& J) {
  auto [lo, hi] = f.range(J);
  double best = std::numeric_limits<double>::infinity();
  for (auto i = lo; i < hi; ++i) best = std::min(best, f.cells()[i].value);
  return best;
}

class PairScan {
 public:
  PairScan(const MeasureTree<double>& M, const Weight<double>& w, double p)
      : M_(M), w_(w.function()), p_(p), sigma_(p > 1 ? w.power(1 - p / (p - 1)).function() : w.function()) {}

  double avg_w(const DyadicInterval& I) { return cached(aw_, I, [&] { return average(M_, w_, I); }); }
  // ⟨σ⟩_J^{p-1}, or 1/ess inf_J w at p = 1.
  double dual(const DyadicInterval& J) {
    return cached(ds_, J, [&] {
      if (p_ == 1.0) return 1.0 / ess_inf(w_, J);
      return std::pow(average(M_, sigma_, J), p_ - 1);
    });
  }
  double value(const DyadicInterval& I, const DyadicInterval& J) {
    return c_p_b(M_, I, J, p_) * avg_w(I) * dual(J);
  }

 private:
  template <class F>
  double cached(std::unordered_map<DyadicInterval, double, DyadicIntervalHash>& m, const DyadicInterval& I, F f) {
    auto it = m.find(I);
    if (it != m.end()) return it->second;
    double v = f();
    m.emplace(I, v);
    return v;
  }

  const MeasureTree<double>& M_;
  const StepFunction<double>& w_;
  double p_;
  StepFunction<double> sigma_;
  std::unordered_map<DyadicInterval, double, DyadicIntervalHash> aw_, ds_;
};

// Partners J of I (I in the first slot), all at level ≤ limit.
std::vector<DyadicInterval> partners(WeightKind kind, const DyadicInterval& I, std::uint32_t N, std::uint32_t limit) {
  std::vector<DyadicInterval> out{I};
  switch (kind) {
    case WeightKind::classical: break;
    case WeightKind::balanced:
      if (I.level >= 1 && I.level + 1 <= limit) {
        auto B = sibling(I);
        out.push_back(left_child(B));
        out.push_back(right_child(B));
      }
      [[fallthrough]];
    case WeightKind::one_sided_01:
      if (I.level >= 2) out.push_back(sibling(parent(I)));
      break;
    case WeightKind::distance_N:
      out.clear();
      for (const auto& nb : neighbors_within(I, N + 2, limit).items) out.push_back(nb.interval);
      break;
  }
  return out;
}

// Every partner lies inside I^(reach).
std::uint32_t reach(WeightKind kind, std::uint32_t N) {
  switch (kind) {
    case WeightKind::classical: return 0;
    case WeightKind::balanced:
    case WeightKind::one_sided_01: return 2;
    case WeightKind::distance_N: return N + 2;
  }
  return 0;
}

// Inside a node Q where w is constant and μ splits evenly, the pair configuration of any I at
// relative level ≥ reach depends only on the relative levels of the partners, so one
// representative per region at that level stands for all deeper nodes.
WeightCharacteristic scan(const MeasureTree<double>& M, const Weight<double>& w, double p, WeightKind kind,
                          std::uint32_t N, std::uint32_t depth) {
  if (p < 1) throw std::invalid_argument("p must be >= 1");
  const std::uint32_t limit = std::min(depth, M.depth_bound() - 1);
  const std::uint32_t d = reach(kind, N);
  PairScan ps(M, w, kind == WeightKind::one_sided_01 ? 2.0 : p);
  WeightCharacteristic res;
  res.p = kind == WeightKind::one_sided_01 ? 2.0 : p;
  res.kind = kind;
  res.scan_depth = limit;
  auto visit = [&](const DyadicInterval& I) {
    for (const auto& J : partners(kind, I, N, limit)) {
      double v = ps.value(I, J);
      if (v > res.value) {
        res.value = v;
        res.attain_I = I;
        res.attain_J = J;
      }
    }
  };
  std::vector<DyadicInterval> stack{root_interval};
  while (!stack.empty()) {
    DyadicInterval I = stack.back();
    stack.pop_back();
    if (w.function().constant_on(I) && M.uniform_below(I)) {
      for (std::uint32_t r = 0; r <= d && I.level + r <= limit; ++r) {
        if (r < d) {
          for (const auto& K : descendants_at(I, r, limit)) visit(K);
        } else {
          visit({I.level + r, I.index << r});
        }
      }
      continue;
    }
    visit(I);
    if (I.level < limit) {
      stack.push_back(right_child(I));
      stack.push_back(left_child(I));
    } else {
      res.depth_limited = true;
    }
  }
  return res;
}

}  // namespace

double pair_value(const MeasureTree<double>& M, const Weight<double>& w, double p, const DyadicInterval& I,
                  const DyadicInterval& J) {
  return PairScan(M, w, p).value(I, J);
}

WeightCharacteristic char_Ap(const MeasureTree<double>& M, const Weight<double>& w, double p, std::uint32_t depth) {
  return scan(M, w, p, WeightKind::classical, 0, depth);
}

WeightCharacteristic char_Ap_b(const MeasureTree<double>& M, const Weight<double>& w, double p, std::uint32_t depth) {
  return scan(M, w, p, WeightKind::balanced, 0, depth);
}

WeightCharacteristic char_Ap_N(const MeasureTree<double>& M, const Weight<double>& w, double p, std::uint32_t N,
                               std::uint32_t depth) {
  return scan(M, w, p, WeightKind::distance_N, N, depth);
}

WeightCharacteristic char_one_sided_01(const MeasureTree<double>& M, const Weight<double>& w, std::uint32_t depth) {
  return scan(M, w, 2.0, WeightKind::one_sided_01, 0, depth);
}

Weight<double> build_badweight(const MeasureTree<double>& M, std::uint32_t kmax) {
  if (M.kind() != MeasureKind::lmp) throw std::invalid_argument("the bad weight lives on the LMP measure");
  if (kmax < 1 || kmax > 20) throw std::invalid_argument("kmax must lie in [1, 20]");
  const std::uint32_t last = (1u << kmax) + 1;
  if (M.depth_bound() < last) throw std::domain_error("depth bound must be at least 2^kmax + 1");
  std::vector<Cell<double>> cells;
  std::uint32_t next_k = 1;
  for (std::uint32_t n = 1; n <= last; ++n) {
    double v = 1.0;
    if (next_k <= kmax && n == (1u << next_k)) {
      v = std::pow(2.0, -0.5 * next_k);
      ++next_k;
    }
    cells.push_back({chain_b(n), v});
  }
  cells.push_back({chain(last), 1.0});
  return Weight<double>(StepFunction<double>::from_cells(std::move(cells)));
}

std::pair<StepFunction<double>, StepFunction<double>> badweight_probes(const Weight<double>& w, std::uint32_t k) {
  std::uint32_t n = 1u << k;
  auto inv = w.function().map([](double x) { return 1.0 / x; });
  return {inv * StepFunction<double>::indicator(chain_b(n)), StepFunction<double>::indicator(chain_b(n + 1))};
}

std::pair<double, double> duality_check(const MeasureTree<double>& M, const Weight<double>& w, double p,
                                        std::uint32_t depth) {
  if (!(p > 1)) throw std::invalid_argument("duality needs p > 1");
  double q = p / (p - 1);
  double a = char_Ap_b(M, w, p, depth).value;
  double b = char_Ap_b(M, w.power(1 - q), q, depth).value;
  return {a, std::pow(b, p - 1)};
}

double fair_division_check(const MeasureTree<double>& M, const Weight<double>& w, double p, const SparseFamily& S) {
  if (!S.eta || S.witness.empty()) throw std::invalid_argument("fair division needs a witness");
  std::uint32_t deep = 0;
  for (const auto& I : S.members) deep = std::max(deep, I.level);
  double Ap = char_Ap(M, w, p, deep).value;
  double eta_p = std::pow(*S.eta, p);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& [I, cells] : S.witness) {
    double wE = 0;
    for (const auto& c : cells) wE += integral(M, w.function(), c);
    best = std::min(best, wE * Ap / (eta_p * integral(M, w.function(), I)));
  }
  return best;
}

NecessityReport necessity_residuals(const MeasureTree<double>& M, const Weight<double>& w, double p, std::uint32_t N,
                                    std::uint32_t probe_depth) {
  if (!(p > 1)) throw std::invalid_argument("necessity check needs p > 1");
  const std::uint32_t D = M.depth_bound();
  const std::uint32_t limit = std::min(probe_depth, D - 1);
  auto sigma = w.power(1 - p / (p - 1)).function();
  PairScan ps(M, w, p);
  NecessityReport rep;
  for (std::uint32_t l = 0; l <= limit; ++l)
    for (const auto& J : descendants_at(root_interval, l, D)) {
      auto f = sigma * StepFunction<double>::indicator(J);
      double num = std::pow(lp_norm(M, maximal_N(M, f, N).value, p, &w), p);
      double r = num / integral(M, sigma, J);
      rep.max_probe_ratio = std::max(rep.max_probe_ratio, r);
      for (const auto& nb : neighbors_within(J, N + 2, D - 1).items) {
        double res = (r - ps.value(nb.interval, J)) / r;
        ++rep.pairs;
        if (res < rep.min_residual) {
          rep.min_residual = res;
          rep.worst_I = nb.interval;
          rep.worst_J = J;
        }
      }
    }
  return rep;
}

PairLowerBound pair_bound_below(const MeasureTree<double>& M, const Weight<double>& w, const DyadicInterval& J,
                                const DyadicInterval& K) {
  if (!disjoint(J, K) || dyadic_distance(J, K) <= 2) throw std::invalid_argument("need disjoint J, K at distance > 2");
  DyadicInterval L = lca(J, K);
  PairLowerBound out;
  out.s = K.level - L.level - 1;
  out.t = J.level - L.level - 1;
  DyadicInterval PK = parent(K), PJ = parent(J);
  std::uint64_t m = offset_in_ancestor(PK, out.s), n = offset_in_ancestor(PJ, out.t);
  const auto& wf = w.function();
  auto f1 = wf.map([](double x) { return 1.0 / x; }) * StepFunction<double>::indicator(K);
  auto f2 = StepFunction<double>::indicator(J);
  auto g = wf * f2;
  auto c1 = analyze(M, f1), c2 = analyze(M, g);
  const std::uint32_t s = out.s, t = out.t;
  AlphaRule rule = [=, &M](const DyadicInterval& I, std::uint64_t mm, std::uint64_t nn) -> double {
    if (mm != m || nn != n) return 0.0;
    DyadicInterval A{I.level + s, (I.index << s) + m}, B{I.level + t, (I.index << t) + n};
    if (!M.is_internal(A) || !M.is_internal(B)) return 0.0;
    double v = c1.coefficient(M, A) * c2.coefficient(M, B);
    return v > 0 ? 1.0 : v < 0 ? -1.0 : 0.0;
  };
  auto T = make_shift(s, t, rule, "pair");
  double n1 = lp_norm(M, f1, 2.0, &w), n2 = lp_norm(M, f2, 2.0, &w);
  out.ratio = std::fabs(bilinear(T, M, f1, g)) / (n1 * n2);
  out.term = std::fabs(c1.coefficient(M, PK) * c2.coefficient(M, PJ)) / (n1 * n2);
  out.quantity = c_p_b(M, J, K, 2.0) * average(M, wf, J) * average(M, f1, K);
  return out;
}

}  // namespace haarlab
