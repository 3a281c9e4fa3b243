#include "haarlab/haar.hpp"
#include "haarlab/maximal.hpp"
#include "haarlab/random.hpp"
#include "haarlab/shift.hpp"
#include "haarlab/sparse.hpp"
#include "haarlab/czd.hpp"
#include "haarlab/xlab.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <sstream>

using namespace haarlab;
using SF = StepFunction<double>;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + std::string("failed: ") + what;
    }
  }
  void note(const std::string& s) { detail += (detail.empty() ? "" : "; ") + s; }
};

std::string num(double x) {
  std::ostringstream o;
  o.precision(6);
  o << x;
  return o.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double max_over(const std::vector<double>& v, std::size_t lo, std::size_t hi) {
  double m = 0;
  for (std::size_t i = lo; i < hi && i < v.size(); ++i)
    if (!std::isnan(v[i])) m = std::max(m, v[i]);
  return m;
}

// Max over the second half stays within 2x the max over the first half.
bool held_out(const std::vector<double>& v, double* first = nullptr, double* second = nullptr) {
  std::size_t h = v.size() / 2;
  double a = max_over(v, 0, h), b = max_over(v, h, v.size());
  if (first) *first = a;
  if (second) *second = b;
  return std::isfinite(a) && b <= 2 * a;
}

// Pooled rows sorted by a characteristic: the max over the stronger half of the weights stays within
// 2x the max over the weaker half, so the constant does not grow with the characteristic.
bool split_by_key(const std::vector<double>& v, const std::vector<double>& key, double* weak, double* strong) {
  std::vector<std::size_t> idx(v.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return key[a] < key[b]; });
  std::vector<double> sorted;
  for (auto i : idx) sorted.push_back(v[i]);
  return held_out(sorted, weak, strong);
}

bool within_20(double a, double b) { return std::fabs(a - b) <= 0.2 * std::max(a, b); }

Outcome criterion1() {
  Outcome o;
  double rec = 0, pars = 0;
  auto rng = substream(1001, 0);
  for (int t = 0; t < 200; ++t) {
    std::uint32_t D = 6 + static_cast<std::uint32_t>(t % 5);
    auto M = MeasureTree<double>::build_random_balanced(D, 5000 + static_cast<std::uint64_t>(t), 0.15 + 0.05 * (t % 6));
    RandomFunctionOptions opt{root_interval, D - 1, 30, -2.0, 2.0, 0.2};
    auto f = random_step_function<double>(rng, opt);
    auto c = analyze(M, f);
    for (const auto& cell : (synthesize(M, c) - f).cells()) rec = std::max(rec, std::fabs(cell.value));
    double e = std::pow(lp_norm(M, f, 2.0), 2);
    pars = std::max(pars, std::fabs(parseval_energy(M, c) - e));
  }
  o.require(rec <= 1e-10, "reconstruction " + num(rec));
  o.require(pars <= 1e-10, "Parseval " + num(pars));
  bool exact = true;
  for (int t = 0; t < 40; ++t) {
    auto M = MeasureTree<Rational>::build_random_balanced(6, 7000 + static_cast<std::uint64_t>(t), 0.25);
    RandomFunctionOptions opt{root_interval, 5, 20, -2.0, 2.0, 0.2};
    auto f = random_step_function<Rational>(rng, opt);
    auto c = analyze(M, f);
    exact = exact && (synthesize(M, c) - f).cells().size() == 1 && (synthesize(M, c) - f).cells()[0].value == 0;
    Rational e(0);
    for (const auto& cell : f.cells()) e += cell.value * cell.value * M.mass(cell.interval);
    exact = exact && parseval_energy(M, c) == e;
  }
  o.require(exact, "rational residual not zero");
  o.note("max reconstruction error " + num(rec) + ", max Parseval residual " + num(pars) + ", rational exact");
  return o;
}

Outcome criterion2() {
  Outcome o;
  auto M = MeasureTree<double>::build_lmp(66);
  double err = 0;
  for (std::uint32_t k = 1; k <= 64; ++k) {
    err = std::max(err, std::fabs(M.mass(chain(k)) - 1.0 / (2.0 * k)));
    if (k >= 2) err = std::max(err, std::fabs(M.mass(chain_b(k)) - 1.0 / (2.0 * k * (k - 1))));
  }
  o.require(err <= 1e-14, "mass error " + num(err));
  auto r = M.balance_report(64);
  o.require(r.balanced_constant <= 4.0, "balanced constant " + num(r.balanced_constant));
  double derr = 0;
  for (const auto& [level, ratio] : r.doubling_profile)
    if (level >= 2) derr = std::max(derr, std::fabs(ratio - level) / level);
  o.require(derr <= 1e-12, "doubling ratio off by " + num(derr));
  o.note("mass error " + num(err) + ", balanced constant " + num(r.balanced_constant) + ", doubling rel. error " +
         num(derr));
  return o;
}

Outcome criterion3() {
  Outcome o;
  auto t0 = std::chrono::steady_clock::now();
  auto M = MeasureTree<double>::build_lmp(12);
  double v = std::fabs(bilinear(dyadic_hilbert(), M, SF::indicator(chain_b(2)), SF::indicator(chain_b(3))));
  o.require(std::fabs(v - 0.1127961) <= 1e-6, "j=3 value " + num(v));
  auto r = run_sparse_failure(64);
  double secs = seconds_since(t0);
  o.require(r.summary.at("j2_band") <= 4.0, "lhs*j^2 band " + num(r.summary.at("j2_band")));
  o.require(r.summary.at("slope") >= 0.8, "slope " + num(r.summary.at("slope")));
  o.require(secs <= 5.0, "runtime " + num(secs) + " s");
  o.note("j=3 value " + num(v) + ", band " + num(r.summary.at("j2_band")) + ", slope " + num(r.summary.at("slope")) +
         ", " + num(secs) + " s");
  return o;
}

std::optional<ExperimentReport> bad_weight_report;

Outcome criterion4() {
  Outcome o;
  auto t0 = std::chrono::steady_clock::now();
  bad_weight_report = run_bad_weight(10);
  double secs = seconds_since(t0);
  const auto& r = *bad_weight_report;
  for (const auto& [what, ok] : r.checks)
    if (what.find("probe") == std::string::npos) o.require(ok, what);
  o.require(secs <= 10.0, "runtime " + num(secs) + " s");
  o.note("ratio slope " + num(r.summary.at("slope")) + ", a2 plateau " + num(r.summary.at("a2_plateau")) +
         ", a2b slope " + num(r.summary.at("a2b_slope")) + " (last step " + num(r.summary.at("a2b_tail_slope")) +
         "), " + num(secs) + " s");
  return o;
}

Outcome criterion5() {
  Outcome o;
  std::vector<MeasureSpec> specs{measure_spec_from_token("lmp", 30, 0), measure_spec_from_token("uniform", 14, 0),
                                 measure_spec_from_token("random", 14, 3), measure_spec_from_token("random", 14, 4)};
  double C = 0, rec = 0, intb = 0, bl1 = 0;
  std::size_t rows = 0, selected = 0;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    auto r = run_czd_demo(specs[i], 50, 300 + i, false);
    rows += r.rows.size();
    for (double s : r.column("selected")) selected += static_cast<std::size_t>(s);
    rec = std::max(rec, r.summary.at("max_recon_err"));
    intb = std::max(intb, r.summary.at("max_int_b"));
    bl1 = std::max(bl1, r.summary.at("max_b_l1_ratio"));
    C = std::max({C, r.summary.at("C_l4"), r.summary.at("C_bmo")});
  }
  o.require(rows == 200, "instances " + std::to_string(rows));
  o.require(selected > 0, "no stopping intervals selected");
  o.require(rec <= 1e-12, "reconstruction " + num(rec));
  o.require(intb <= 1e-14, "integral of b " + num(intb));
  o.require(bl1 <= 2 * (1 + 1e-12), "b L1 ratio " + num(bl1));
  o.require(C <= 64, "constant " + num(C));
  o.note(std::to_string(rows) + " instances, " + std::to_string(selected) + " selections, measured C " + num(C));
  return o;
}

Outcome criterion6() {
  Outcome o;
  std::vector<MeasureSpec> specs{measure_spec_from_token("lmp", 40, 0)};
  for (std::uint64_t s = 1; s <= 5; ++s) specs.push_back(measure_spec_from_token("random", 11, s));
  std::vector<std::pair<std::string, std::uint64_t>> ops{{"hilbert", 0}, {"hilbert-adjoint", 0}, {"ll2", 0}};
  for (std::uint64_t s = 0; s < 20; ++s) ops.emplace_back("random:1,1", s);
  ops.emplace_back("maximal:1", 0);
  ops.emplace_back("maximal:2", 0);
  double max_pack = 0;
  int unstable = 0, groups = 0;
  std::string worst;
  for (const auto& spec : specs) {
    // (operator family, N) -> maxima of the two seed batches
    std::map<std::string, std::pair<double, double>> C;
    for (const auto& [tok, ss] : ops)
      for (int batch = 0; batch < 2; ++batch) {
        auto r = run_sparse_domination(spec, tok, 100, 4242 + static_cast<std::uint64_t>(batch), ss);
        max_pack = std::max(max_pack, r.summary.at("max_packing"));
        std::string key = (tok.rfind("maximal", 0) == 0 ? "M" : "T") + std::to_string(int(r.summary.at("N")));
        double& slot = batch == 0 ? C[key].first : C[key].second;
        slot = std::max(slot, r.summary.at("max_ratio"));
      }
    for (const auto& [key, ab] : C) {
      ++groups;
      if (!within_20(ab.first, ab.second)) {
        ++unstable;
        worst += " " + describe(spec) + "/" + key + ":" + num(ab.first) + "vs" + num(ab.second);
      }
    }
  }
  o.require(max_pack <= 2.0, "packing " + num(max_pack));
  o.require(unstable == 0, std::to_string(unstable) + " of " + std::to_string(groups) + " constants unstable:" + worst);
  o.note("max packing " + num(max_pack) + ", " + std::to_string(groups) + " (measure, N) constants");
  return o;
}

Outcome criterion7() {
  Outcome o;
  auto r = run_complexity_separation(64);
  o.require(r.summary.at("slope") >= 0.8, "slope " + num(r.summary.at("slope")));
  o.note("slope " + num(r.summary.at("slope")));
  return o;
}

std::vector<ExperimentReport> weight_reports;

Outcome criterion8() {
  Outcome o;
  auto spec = measure_spec_from_token("lmp", 40, 0);
  for (double p : {2.0, 3.0})
    for (std::uint32_t N : {1u, 2u, 3u}) weight_reports.push_back(run_weight_suite(spec, p, N, 50, 900 + N));
  double C1 = 0, C2 = 0;
  for (const auto& r : weight_reports) {
    for (const auto& [what, ok] : r.checks)
      if (what.find("shrink") == std::string::npos) o.require(ok, r.params.at("p") + "/" + r.params.at("N") + " " + what);
    C1 = std::max(C1, r.summary.at("C1"));
    C2 = std::max(C2, r.summary.at("C2"));
  }
  std::vector<double> c2, key;
  for (const auto& r : weight_reports) {
    auto x = r.column("c2"), k = r.column("a_p_b");
    c2.insert(c2.end(), x.begin(), x.end());
    key.insert(key.end(), k.begin(), k.end());
  }
  double a, b;
  bool ok = split_by_key(c2, key, &a, &b);
  o.require(ok, "sandwich C2 grows with the characteristic " + num(a) + " vs " + num(b));
  o.require(std::isfinite(C1) && std::isfinite(C2), "sandwich constants");
  o.note("C1 " + num(C1) + ", C2 " + num(C2));
  return o;
}

Outcome criterion9() {
  Outcome o;
  std::map<std::string, std::vector<double>> pooled;
  for (const auto& r : weight_reports)
    for (const char* col : {"shift_ratio", "max_ratio", "form_ratio", "weak_ratio", "a_p_b", "a_1_N"}) {
      auto c = r.column(col);
      pooled[col].insert(pooled[col].end(), c.begin(), c.end());
    }
  for (const char* col : {"shift_ratio", "max_ratio", "form_ratio", "weak_ratio"}) {
    double a, b;
    bool ok = split_by_key(pooled[col], pooled[std::string(col) == "weak_ratio" ? "a_1_N" : "a_p_b"], &a, &b);
    o.require(ok, std::string(col) + " grows with the characteristic " + num(a) + " vs " + num(b));
  }
  double sC = 0, fC = 0;
  for (const auto& r : weight_reports) {
    for (const auto& [what, ok] : r.checks)
      if (what.find("shrink") != std::string::npos) o.require(ok, what);
    sC = std::max(sC, r.summary.at("shift_C"));
    fC = std::max(fC, r.summary.at("form_C"));
  }
  if (!bad_weight_report) bad_weight_report = run_bad_weight(10);
  for (const auto& [what, ok] : bad_weight_report->checks)
    if (what.find("probe") != std::string::npos) o.require(ok, what);
  o.note("shift constant " + num(sC) + ", form constant " + num(fC) + ", Hilbert probe max " +
         num(max_over(bad_weight_report->column("hilbert_probe"), 0, 99)) +
         ", multiplier probe max " + num(bad_weight_report->summary.at("multiplier_max")));
  return o;
}

Outcome criterion10() {
  Outcome o;
  std::vector<std::string> names{"M", "M1", "M2", "Hilbert"};
  std::vector<double> at_depth[2];
  for (int d = 0; d < 2; ++d) {
    auto M = MeasureTree<double>::build_lmp(d == 0 ? 24 : 32);
    std::vector<Operator> ops{op_maximal(M), op_maximal_N(M, 1), op_maximal_N(M, 2), op_shift(M, dyadic_hilbert())};
    std::vector<double> best(ops.size(), 0.0);
    auto rng = substream(1010, 0);
    for (int t = 0; t < 200; ++t) {
      SF f = t % 2 ? random_spiky_function<double>(rng, root_interval, 20, 4)
                   : random_step_function<double>(rng, RandomFunctionOptions{root_interval, 20, 24, 0.0, 1.0, 0.3});
      double n1 = integral(M, f);
      if (!(n1 > 0)) continue;
      f = (1.0 / n1) * f;
      for (std::size_t k = 0; k < ops.size(); ++k) best[k] = std::max(best[k], weak11_ratio(M, ops[k], f));
    }
    at_depth[d] = best;
  }
  std::string vals;
  for (std::size_t k = 0; k < names.size(); ++k) {
    o.require(within_20(at_depth[0][k], at_depth[1][k]), names[k] + " depth drift");
    vals += " " + names[k] + "=" + num(at_depth[1][k]);
  }

  auto M = MeasureTree<double>::build_lmp(32);
  auto rng = substream(1011, 0);
  std::vector<double> fun;
  double shrink = 0;
  for (int t = 0; t < 200; ++t) {
    DyadicInterval sup{1, static_cast<std::uint64_t>(t % 2)};
    auto f = random_spiky_function<double>(rng, sup, 14, 8);
    f = (1.0 / integral(M, f)) * f;
    auto members = stopping_union(M, f, f, root_interval, 6, 2.0);
    members.push_back(root_interval);
    auto S = augment_parents(M, make_family(M, members));
    std::map<DyadicInterval, double> cells;
    for (int k = 0; k < 4; ++k) {
      std::uint32_t l = std::uniform_int_distribution<std::uint32_t>(3, 9)(rng);
      cells[{l, (sup.index << (l - 1)) + std::uniform_int_distribution<std::uint64_t>(0, (1ULL << (l - 1)) - 1)(rng)}] = 1;
    }
    auto G = SF::sum_of_indicators(cells).map([](double v) { return v > 0 ? 1.0 : 0.0; });
    auto out = weak_type_functional(M, S.members, f, G, 2);
    fun.push_back(out.functional);
    shrink = std::max(shrink, out.shrink);
  }
  double a, b;
  o.require(shrink <= 2.0 + 1e-12, "G' shrink " + num(shrink));
  bool ok = held_out(fun, &a, &b);
  o.require(ok, "functional " + num(a) + " vs " + num(b));
  o.note("weak ratios" + vals + "; functional C " + num(std::max(a, b)) + ", shrink " + num(shrink));
  return o;
}

}  // namespace

int main() {
  std::vector<std::function<Outcome()>> criteria{criterion1, criterion2, criterion3, criterion4, criterion5,
                                                 criterion6, criterion7, criterion8, criterion9, criterion10};
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    auto t0 = std::chrono::steady_clock::now();
    try {
      o = criteria[i]();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failed += !o.pass;
    std::printf("criterion %zu: %s  %s [%.1f s]\n", i + 1, o.pass ? "PASS" : "FAIL", o.detail.c_str(),
                seconds_since(t0));
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
