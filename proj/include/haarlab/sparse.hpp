#pragma once

#include "haarlab/czd.hpp"
#include "haarlab/maximal.hpp"
#include "haarlab/measure.hpp"
#include "haarlab/stepfn.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace haarlab {

struct SparseFamily {
  std::vector<DyadicInterval> members;  // sorted, unique
  double packing = 0.0;
  std::optional<double> eta;
  // E_I as dyadic cells, keyed by member.
  std::map<DyadicInterval, std::vector<DyadicInterval>> witness;
};

double packing_constant(const MeasureTree<double>& M, const std::vector<DyadicInterval>& S);

struct WitnessResult {
  double eta = 0.0;
  std::map<DyadicInterval, std::vector<DyadicInterval>> cells;
};
// E_I = I minus the maximal members strictly inside I; nullopt when some E_I is empty.
std::optional<WitnessResult> witness_assignment(const MeasureTree<double>& M, const std::vector<DyadicInterval>& S);

SparseFamily make_family(const MeasureTree<double>& M, std::vector<DyadicInterval> members);

// 𝒮 = {I0} ∪ ⋃_k ℬ_k(I0), I0 = Ĩ0^(root_pad) with Ĩ0 the smallest interval holding both supports.
SparseFamily build_sparse_collection(const MeasureTree<double>& M, const StepFunction<double>& f1,
                                     const StepFunction<double>& f2, std::uint32_t root_pad);
// Smallest dyadic interval containing the supports of f1 and f2.
DyadicInterval support_hull(const StepFunction<double>& f1, const StepFunction<double>& f2);

SparseFamily augment_parents(const MeasureTree<double>& M, const SparseFamily& S);

double form_A(const MeasureTree<double>& M, const std::vector<DyadicInterval>& S, const StepFunction<double>& f1,
              const StepFunction<double>& f2);
double form_C_N(const MeasureTree<double>& M, const std::vector<DyadicInterval>& S, const StepFunction<double>& f1,
                const StepFunction<double>& f2, std::uint32_t N);
// Root reads 𝒟_{≤2}(Î) as 𝒟_{≤2}(root).
double form_C_intro(const MeasureTree<double>& M, const std::vector<DyadicInterval>& S,
                    const StepFunction<double>& f1, const StepFunction<double>& f2);

struct WeakTypeOutcome {
  double functional = 0.0;   // 𝒞_S^N(f1, 1_{G'}) (weighted: 𝒞_S^N(f1, w 1_{G'}))
  double shrink = 0.0;       // μ(G)/μ(G') (weighted: w(G)/w(G'))
  double threshold = 0.0;    // C0
};
// H = {ℳ^N f1 > C0/μ(G)}, G' = G \ H, with C0 = 2·weak11_ratio(ℳ^N, f1) (resp. w dμ).
WeakTypeOutcome weak_type_functional(const MeasureTree<double>& M, const std::vector<DyadicInterval>& S,
                                     const StepFunction<double>& f1, const StepFunction<double>& G_indicator,
                                     std::uint32_t N, const Weight<double>* w = nullptr);

std::string to_json(const SparseFamily& S);
SparseFamily sparse_family_from_json(const MeasureTree<double>& M, const std::string& text);

}  // namespace haarlab
