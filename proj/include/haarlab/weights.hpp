#pragma once

#include "haarlab/maximal.hpp"
#include "haarlab/measure.hpp"
#include "haarlab/shift.hpp"
#include "haarlab/sparse.hpp"
#include "haarlab/stepfn.hpp"

#include <string>

namespace haarlab {

enum class WeightKind { classical, balanced, distance_N, one_sided_01 };
std::string to_string(WeightKind k);

struct WeightCharacteristic {
  double value = 0.0;
  double p = 2.0;
  WeightKind kind = WeightKind::classical;
  std::uint32_t scan_depth = 0;
  // The pair (I, J) where the value is attained.
  DyadicInterval attain_I = root_interval;
  DyadicInterval attain_J = root_interval;
  // Some node at scan_depth still had structure below it.
  bool depth_limited = false;
};

// c_p^b(I,J): 1 on the diagonal, else m(I)^{p/2} m(J)^{p/2} / (μ(J) μ(I)^{p-1}).
double c_p_b(const MeasureTree<double>& M, const DyadicInterval& I, const DyadicInterval& J, double p);

// Sups of c_p^b(I,J)·⟨w⟩_I·⟨w^{1-p'}⟩_J^{p-1} over pairs with both levels ≤ depth (and internal).
// p = 1 uses ⟨w⟩_I / ess inf_J w.
WeightCharacteristic char_Ap(const MeasureTree<double>& M, const Weight<double>& w, double p, std::uint32_t depth);
// Pairs J = I, J ∈ children(sibling(I)), or I ∈ children(sibling(J)).
WeightCharacteristic char_Ap_b(const MeasureTree<double>& M, const Weight<double>& w, double p, std::uint32_t depth);
// Pairs with dist(I,J) ≤ N+2.
WeightCharacteristic char_Ap_N(const MeasureTree<double>& M, const Weight<double>& w, double p, std::uint32_t N,
                               std::uint32_t depth);
// c_2^b(K,J)⟨w⟩_K⟨w^{-1}⟩_J over K ∈ {J} ∪ children(sibling(J)).
WeightCharacteristic char_one_sided_01(const MeasureTree<double>& M, const Weight<double>& w, std::uint32_t depth);

// Pair value c_p^b(I,J)⟨w⟩_I⟨σ⟩_J^{p-1} computed directly.
double pair_value(const MeasureTree<double>& M, const Weight<double>& w, double p, const DyadicInterval& I,
                  const DyadicInterval& J);

// w = 2^{-k/2} on I_{2^k}ᵇ for 1 ≤ k ≤ kmax, 1 elsewhere.
Weight<double> build_badweight(const MeasureTree<double>& M, std::uint32_t kmax);
// f_k = w^{-1} 1_{I_{2^k}ᵇ}, g_k = 1_{I_{2^k+1}ᵇ}.
std::pair<StepFunction<double>, StepFunction<double>> badweight_probes(const Weight<double>& w, std::uint32_t k);

// (char_Ap_b(w, p), char_Ap_b(w^{1-p'}, p')^{p-1}).
std::pair<double, double> duality_check(const MeasureTree<double>& M, const Weight<double>& w, double p,
                                        std::uint32_t depth);

// min over I ∈ S of w(E_I)·[w]_{A_p}/(η^p·w(I)).
double fair_division_check(const MeasureTree<double>& M, const Weight<double>& w, double p, const SparseFamily& S);

struct NecessityReport {
  // min over scanned pairs of (r_J - value(I,J))/r_J, r_J = ‖ℳ^N(σ1_J)‖^p/‖σ1_J‖^p in L^p(w).
  double min_residual = 1.0;
  double max_probe_ratio = 0.0;
  DyadicInterval worst_I = root_interval;
  DyadicInterval worst_J = root_interval;
  std::size_t pairs = 0;
};
NecessityReport necessity_residuals(const MeasureTree<double>& M, const Weight<double>& w, double p, std::uint32_t N,
                                    std::uint32_t probe_depth);

struct PairLowerBound {
  double ratio = 0.0;     // |⟨T f1, w f2⟩| / (‖f1‖‖f2‖) in L²(w)
  double term = 0.0;      // the single I = lca term, same normalization
  double quantity = 0.0;  // c_2^b(J,K)⟨w⟩_J⟨w^{-1}⟩_K
  std::uint32_t s = 0, t = 0;
};
// Sign-aligned shift of complexity (s,t) for disjoint J, K with 2 < dist ≤ N+2, tested on
// f1 = w^{-1}1_K, f2 = 1_J.
PairLowerBound pair_bound_below(const MeasureTree<double>& M, const Weight<double>& w, const DyadicInterval& J,
                                const DyadicInterval& K);

}  // namespace haarlab
