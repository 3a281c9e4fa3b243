#include "haarlab/sparse.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>
#include <unordered_set>

namespace haarlab {

double packing_constant(const MeasureTree<double>& M, const std::vector<DyadicInterval>& S) {
  std::unordered_map<DyadicInterval, double, DyadicIntervalHash> below;
  std::unordered_set<DyadicInterval, DyadicIntervalHash> seen;
  for (const auto& J : S) {
    if (!seen.insert(J).second) continue;
    double mu = M.mass(J);
    DyadicInterval A = J;
    while (true) {
      below[A] += mu;
      if (A.level == 0) break;
      A = parent(A);
    }
  }
  double best = 0.0;
  for (const auto& [I, total] : below) best = std::max(best, total / M.mass(I));
  return best;
}

namespace {
void complement_cells(const DyadicInterval& I, const std::vector<DyadicInterval>& subs,
                      std::vector<DyadicInterval>& out) {
  bool any = false;
  for (const auto& K : subs) {
    if (K == I) return;
    if (contains(I, K)) any = true;
  }
  if (!any) {
    out.push_back(I);
    return;
  }
  std::vector<DyadicInterval> left, right;
  for (const auto& K : subs) {
    if (!contains(I, K)) continue;
    (contains(left_child(I), K) ? left : right).push_back(K);
  }
  complement_cells(left_child(I), left, out);
  complement_cells(right_child(I), right, out);
}
}  // namespace

std::optional<WitnessResult> witness_assignment(const MeasureTree<double>& M, const std::vector<DyadicInterval>& S) {
  std::unordered_set<DyadicInterval, DyadicIntervalHash> set(S.begin(), S.end());
  std::map<DyadicInterval, std::vector<DyadicInterval>> maximal_below;
  for (const auto& J : set) {
    maximal_below.try_emplace(J);
    DyadicInterval A = J;
    while (A.level > 0) {
      A = parent(A);
      if (set.count(A)) {
        maximal_below[A].push_back(J);
        break;
      }
    }
  }
  WitnessResult res;
  res.eta = 1.0;
  for (const auto& [I, subs] : maximal_below) {
    double lost = 0.0;
    for (const auto& K : subs) lost += M.mass(K);
    double frac = 1.0 - lost / M.mass(I);
    std::vector<DyadicInterval> cells;
    complement_cells(I, subs, cells);
    if (cells.empty() || frac <= 0.0) return std::nullopt;
    res.eta = std::min(res.eta, frac);
    res.cells.emplace(I, std::move(cells));
  }
  return res;
}

SparseFamily make_family(const MeasureTree<double>& M, std::vector<DyadicInterval> members) {
  std::sort(members.begin(), members.end());
  members.erase(std::unique(members.begin(), members.end()), members.end());
  SparseFamily S;
  S.members = std::move(members);
  S.packing = packing_constant(M, S.members);
  if (auto w = witness_assignment(M, S.members)) {
    S.eta = w->eta;
    S.witness = std::move(w->cells);
  }
  return S;
}

DyadicInterval support_hull(const StepFunction<double>& f1, const StepFunction<double>& f2) {
  std::optional<DyadicInterval> hull;
  for (const auto* f : {&f1, &f2})
    for (const auto& c : f->cells())
      if (c.value != 0.0) hull = hull ? lca(*hull, c.interval) : c.interval;
  return hull.value_or(root_interval);
}

SparseFamily build_sparse_collection(const MeasureTree<double>& M, const StepFunction<double>& f1,
                                     const StepFunction<double>& f2, std::uint32_t root_pad) {
  for (const auto* f : {&f1, &f2})
    for (const auto& c : f->cells())
      if (c.value < 0) throw std::domain_error("sparse collection needs nonnegative functions");
  DyadicInterval hull = support_hull(f1, f2);
  if (hull.level < root_pad)
    throw std::domain_error("support too close to the root: embed the data at least " + std::to_string(root_pad) +
                            " levels deep");
  DyadicInterval I0 = ancestor(hull, root_pad);
  std::vector<DyadicInterval> members{I0};
  for (const auto& g : stopping_generations(M, f1, f2, I0)) members.insert(members.end(), g.begin(), g.end());
  return make_family(M, std::move(members));
}

SparseFamily augment_parents(const MeasureTree<double>& M, const SparseFamily& S) {
  std::unordered_set<DyadicInterval, DyadicIntervalHash> set(S.members.begin(), S.members.end());
  std::vector<DyadicInterval> members = S.members;
  for (const auto& J : S.members)
    if (J.level > 0 && is_left_child(J) && set.count(sibling(J))) members.push_back(parent(J));
  return make_family(M, std::move(members));
}

double form_A(const MeasureTree<double>& M, const std::vector<DyadicInterval>& S, const StepFunction<double>& f1,
              const StepFunction<double>& f2) {
  double acc = 0.0;
  for (const auto& I : S) acc += average(M, f1, I) * average(M, f2, I) * M.mass(I);
  return acc;
}

double form_C_N(const MeasureTree<double>& M, const std::vector<DyadicInterval>& S, const StepFunction<double>& f1,
                const StepFunction<double>& f2, std::uint32_t N) {
  if (N == 0) return 0.0;
  for (const auto& J : S)
    if (!M.is_internal(J)) throw std::domain_error("sparse member at the depth bound: " + to_string(J));
  std::unordered_set<DyadicInterval, DyadicIntervalHash> set(S.begin(), S.end());
  double acc = 0.0;
  for (const auto& J : S) {
    double a1 = average(M, f1, J);
    if (a1 == 0.0) continue;
    double mJ = M.m_value(J);
    for (const auto& K : cousins(J, N, M.depth_bound() - 1)) {
      if (!set.count(K)) continue;
      acc += a1 * average(M, f2, K) * std::sqrt(mJ * M.m_value(K));
    }
  }
  return acc;
}

double form_C_intro(const MeasureTree<double>& M, const std::vector<DyadicInterval>& S,
                    const StepFunction<double>& f1, const StepFunction<double>& f2) {
  std::unordered_set<DyadicInterval, DyadicIntervalHash> set(S.begin(), S.end());
  for (const auto& J : S)
    if (!M.is_internal(J)) throw std::domain_error("sparse member at the depth bound: " + to_string(J));
  double acc = 0.0;
  for (const auto& I : S) {
    DyadicInterval P = I.level > 0 ? parent(I) : root_interval;
    double a1 = average(M, f1, I), a2 = average(M, f2, I), m = M.m_value(I);
    for (std::uint32_t d = 0; d <= 2; ++d) {
      if (P.level + d > M.depth_bound()) break;
      for (const auto& J : descendants_at(P, d, M.depth_bound()))
        if (set.count(J)) acc += (a1 * average(M, f2, J) + a2 * average(M, f1, J)) * m;
    }
  }
  return acc;
}

WeakTypeOutcome weak_type_functional(const MeasureTree<double>& M, const std::vector<DyadicInterval>& S,
                                     const StepFunction<double>& f1, const StepFunction<double>& G_indicator,
                                     std::uint32_t N, const Weight<double>* w) {
  auto wf = w ? w->function() : StepFunction<double>::constant(1.0);
  auto mass_of = [&](const StepFunction<double>& h) { return integral(M, h * wf); };
  auto MN = maximal_N(M, f1, N).value;
  // Weak (1,1) ratio of ℳ^N at f1 with respect to w dμ.
  std::vector<std::pair<double, double>> levels;
  for (const auto& c : MN.cells())
    levels.emplace_back(c.value, integral(M, wf, c.interval));
  std::sort(levels.begin(), levels.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  double ratio = 0.0, acc = 0.0;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    acc += levels[i].second;
    if (i + 1 == levels.size() || levels[i + 1].first != levels[i].first) ratio = std::max(ratio, levels[i].first * acc);
  }
  double norm1 = mass_of(f1.abs());
  ratio /= norm1;
  WeakTypeOutcome out;
  out.threshold = 2.0 * ratio * norm1;
  double wG = mass_of(G_indicator);
  double level = out.threshold / wG;
  auto keep = MN.map([&](double v) { return v > level ? 0.0 : 1.0; });
  auto Gp = G_indicator * keep;
  double wGp = mass_of(Gp);
  out.shrink = wGp > 0 ? wG / wGp : std::numeric_limits<double>::infinity();
  out.functional = form_C_N(M, S, f1, Gp * wf, N);
  return out;
}

std::string to_json(const SparseFamily& S) {
  nlohmann::json j;
  j["members"] = nlohmann::json::array();
  for (const auto& I : S.members) j["members"].push_back(to_string(I));
  j["packing"] = S.packing;
  if (S.eta) j["eta"] = *S.eta;
  return j.dump();
}

SparseFamily sparse_family_from_json(const MeasureTree<double>& M, const std::string& text) {
  auto j = nlohmann::json::parse(text);
  std::vector<DyadicInterval> members;
  for (const auto& s : j.at("members")) members.push_back(parse_interval(s.get<std::string>()));
  return make_family(M, std::move(members));
}

}  // namespace haarlab
