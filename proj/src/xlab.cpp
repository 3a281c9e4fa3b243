#include "haarlab/xlab.hpp"

#include "haarlab/czd.hpp"
#include "haarlab/maximal.hpp"
#include "haarlab/random.hpp"
#include "haarlab/shift.hpp"
#include "haarlab/sparse.hpp"
#include "haarlab/weights.hpp"

#include <json.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace haarlab {

namespace {
constexpr double nan_v = std::numeric_limits<double>::quiet_NaN();

std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

double max_of(const std::vector<double>& v) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : v)
    if (!std::isnan(x)) m = std::max(m, x);
  return m;
}

double min_of(const std::vector<double>& v) {
  double m = std::numeric_limits<double>::infinity();
  for (double x : v)
    if (!std::isnan(x)) m = std::min(m, x);
  return m;
}

std::vector<std::uint32_t> ladder(std::uint32_t jmax) {
  std::vector<std::uint32_t> js;
  for (std::uint32_t j = 8; j <= jmax; j *= 2) js.push_back(j);
  if (js.back() != jmax) js.push_back(jmax);
  return js;
}

void finish(ExperimentReport& r) { r.provenance = provenance_hash(r.name, r.params); }
}  // namespace

void ExperimentReport::add_row(std::vector<double> values) {
  if (values.size() != columns.size()) throw std::logic_error("row width does not match columns in " + name);
  rows.push_back(std::move(values));
}

std::vector<double> ExperimentReport::column(const std::string& col) const {
  auto it = std::find(columns.begin(), columns.end(), col);
  if (it == columns.end()) throw std::out_of_range("no column " + col);
  auto k = static_cast<std::size_t>(it - columns.begin());
  std::vector<double> out;
  for (const auto& r : rows) out.push_back(r[k]);
  return out;
}

bool ExperimentReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.second; });
}

std::string provenance_hash(const std::string& name, const std::map<std::string, std::string>& params) {
  nlohmann::json j;
  j["name"] = name;
  j["params"] = params;
  std::string body = j.dump();
  std::string blob = "blob " + std::to_string(body.size()) + '\0' + body;
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(blob.data(), blob.size(), md, &len, EVP_sha1(), nullptr);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

std::string to_json(const ExperimentReport& r) {
  using oj = nlohmann::ordered_json;
  auto num = [](double x) -> oj { return std::isfinite(x) ? oj(x) : oj(nullptr); };
  oj j;
  j["name"] = r.name;
  j["params"] = oj::object();
  for (const auto& [k, v] : r.params) j["params"][k] = v;
  j["columns"] = r.columns;
  j["rows"] = oj::array();
  for (const auto& row : r.rows) {
    oj rec = oj::object();
    for (std::size_t i = 0; i < row.size(); ++i) rec[r.columns[i]] = num(row[i]);
    j["rows"].push_back(rec);
  }
  j["summary"] = oj::object();
  for (const auto& [k, v] : r.summary) j["summary"][k] = num(v);
  j["checks"] = oj::array();
  for (const auto& [what, ok] : r.checks) j["checks"].push_back({{"check", what}, {"pass", ok}});
  j["passed"] = r.passed();
  j["provenance"] = r.provenance;
  return j.dump(2);
}

std::string to_csv(const ExperimentReport& r) {
  std::string out;
  for (std::size_t i = 0; i < r.columns.size(); ++i) out += (i ? "," : "") + r.columns[i];
  out += '\n';
  for (const auto& row : r.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + fmt(row[i]);
    out += '\n';
  }
  return out;
}

double lsq_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("slope needs two or more points");
  double n = static_cast<double>(x.size()), sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  double mx = sx / n, my = sy / n, num = 0, den = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    num += (x[i] - mx) * (y[i] - my);
    den += (x[i] - mx) * (x[i] - mx);
  }
  return num / den;
}

MeasureSpec measure_spec_from_token(const std::string& token, std::uint32_t depth, std::uint64_t seed) {
  MeasureSpec s;
  s.depth = depth;
  s.seed = seed;
  if (token == "lmp") {
    s.kind = MeasureKind::lmp;
  } else if (token == "uniform") {
    s.kind = MeasureKind::uniform;
  } else if (token == "random") {
    s.kind = MeasureKind::random;
  } else {
    std::ifstream in(token);
    if (!in) throw std::invalid_argument("measure must be lmp, uniform, random or a readable JSON file: " + token);
    std::stringstream ss;
    ss << in.rdbuf();
    s = parse_measure_spec(ss.str());
  }
  return s;
}

std::string describe(const MeasureSpec& spec) {
  std::string d = to_string(spec.kind) + ":D=" + std::to_string(spec.depth);
  if (spec.kind == MeasureKind::random) d += ":seed=" + std::to_string(spec.seed) + ":theta=" + fmt(spec.theta);
  if (!spec.explicit_masses.empty()) d += ":explicit=" + std::to_string(spec.explicit_masses.size());
  return d;
}

ExperimentReport run_sparse_failure(std::uint32_t jmax) {
  if (jmax < 8) throw std::invalid_argument("jmax must be >= 8");
  ExperimentReport r;
  r.name = "sparse-failure";
  r.params = {{"jmax", std::to_string(jmax)}};
  r.columns = {"j", "lhs", "ub", "ratio", "lhs_j2"};
  auto M = MeasureTree<double>::build_lmp(jmax + 4);
  auto T = dyadic_hilbert();
  std::vector<double> lj, lr;
  for (auto j : ladder(jmax)) {
    auto f = StepFunction<double>::indicator(chain_b(j - 1));
    auto g = StepFunction<double>::indicator(chain_b(j));
    double lhs = std::fabs(bilinear(T, M, f, g));
    double ub = integral(M, maximal(M, f) * maximal(M, g));
    double jd = j;
    r.add_row({jd, lhs, ub, lhs / ub, lhs * jd * jd});
    lj.push_back(std::log2(jd));
    lr.push_back(std::log2(lhs / ub));
  }
  auto band = r.column("lhs_j2");
  r.summary["slope"] = lsq_slope(lj, lr);
  r.summary["j2_band"] = max_of(band) / min_of(band);
  r.check("ratio slope >= 0.8", r.summary["slope"] >= 0.8);
  finish(r);
  return r;
}

ExperimentReport run_complexity_separation(std::uint32_t jmax) {
  if (jmax < 8) throw std::invalid_argument("jmax must be >= 8");
  ExperimentReport r;
  r.name = "complexity-separation";
  r.params = {{"jmax", std::to_string(jmax)}};
  r.columns = {"j", "lhs", "ub", "ratio", "ub_j3"};
  auto M = MeasureTree<double>::build_lmp(jmax + 8);
  auto T = shift_left_left();
  std::vector<double> lj, lr;
  for (auto j : ladder(jmax)) {
    auto f = StepFunction<double>::indicator(chain_b(j - 1));
    auto g = StepFunction<double>::indicator(chain_b(j + 1));
    double lhs = std::fabs(bilinear(T, M, f, g));
    double ub = integral(M, maximal_N(M, f, 1).value * maximal(M, g));
    double jd = j;
    r.add_row({jd, lhs, ub, lhs / ub, ub * jd * jd * jd});
    lj.push_back(std::log2(jd));
    lr.push_back(std::log2(lhs / ub));
  }
  r.summary["slope"] = lsq_slope(lj, lr);
  r.check("ratio slope >= 0.8", r.summary["slope"] >= 0.8);
  finish(r);
  return r;
}

ExperimentReport run_bad_weight(std::uint32_t kmax) {
  if (kmax < 5 || kmax > 12) throw std::invalid_argument("kmax must lie in [5, 12]");
  ExperimentReport r;
  r.name = "bad-weight";
  r.params = {{"kmax", std::to_string(kmax)}};
  r.columns = {"k", "depth", "a2", "a2b", "ratio", "hilbert_probe", "multiplier_probe", "blowing_pair"};
  auto M = MeasureTree<double>::build_lmp((1u << kmax) + 2);
  auto w = build_badweight(M, kmax);
  auto T = dyadic_hilbert();
  std::vector<HaarShift> mults{haar_multiplier([](const DyadicInterval&) { return 1.0; }),
                               haar_multiplier_pattern({1, -1})};
  std::vector<double> ks, la2b, lblow;
  for (std::uint32_t k = 4; k <= kmax; ++k) {
    std::uint32_t depth = (1u << k) + 1;
    double a2 = char_Ap(M, w, 2, depth).value;
    double a2b = char_Ap_b(M, w, 2, depth).value;
    auto [f, g] = badweight_probes(w, k);
    double ratio = std::fabs(bilinear(T, M, f, w.function() * g)) / (lp_norm(M, f, 2, &w) * lp_norm(M, g, 2, &w));
    std::vector<StepFunction<double>> probes{f, g, f + g};
    double hp = probe_opnorm(T, M, 2, &w, probes);
    double mp = 0;
    for (const auto& P : mults) mp = std::max(mp, probe_opnorm(P, M, 2, &w, probes));
    double blow = pair_value(M, w, 2, chain_b(depth), chain_b(depth - 1));
    r.add_row({double(k), double(depth), a2, a2b, ratio, hp, mp, blow});
    ks.push_back(k);
    la2b.push_back(std::log2(a2b));
    lblow.push_back(std::log2(blow));
  }
  auto ratio = r.column("ratio"), a2 = r.column("a2"), hp = r.column("hilbert_probe"),
       mp = r.column("multiplier_probe");
  bool nondecreasing = true, hp_up = true;
  for (std::size_t i = 1; i < ratio.size(); ++i) {
    nondecreasing = nondecreasing && ratio[i] >= ratio[i - 1];
    hp_up = hp_up && hp[i] > hp[i - 1];
  }
  std::size_t n = ratio.size();
  r.summary["slope"] = std::log2(ratio.back() / ratio.front()) / double(n - 1);
  r.summary["a2_plateau"] = std::fabs(a2[n - 1] - a2[n - 2]) / a2[n - 1];
  r.summary["a2_max"] = max_of(a2);
  r.summary["a2b_slope"] = lsq_slope(ks, la2b);
  r.summary["a2b_tail_slope"] = la2b[n - 1] - la2b[n - 2];
  r.summary["blowing_pair_slope"] = lsq_slope(ks, lblow);
  std::vector<double> first(mp.begin(), mp.begin() + static_cast<std::ptrdiff_t>(n / 2)),
      second(mp.begin() + static_cast<std::ptrdiff_t>(n / 2), mp.end());
  r.summary["multiplier_max"] = max_of(mp);
  r.summary["multiplier_growth"] = max_of(second) / max_of(first);
  r.check("ratio_k nondecreasing", nondecreasing);
  r.check("mean log2 increment of ratio_k >= 0.2", r.summary["slope"] >= 0.2);
  r.check("a2 plateau within 1%", r.summary["a2_plateau"] <= 0.01);
  r.check("a2b log2-slope in [0.4, 0.6]", std::fabs(r.summary["a2b_slope"] - 0.5) <= 0.1);
  r.check("hilbert probe strictly increasing", hp_up);
  r.check("multiplier probe bounded (late max <= 2x early max)", r.summary["multiplier_growth"] <= 2.0);
  finish(r);
  return r;
}

ExperimentReport run_sparse_domination(const MeasureSpec& spec, const std::string& shift_token, int trials,
                                       std::uint64_t seed, std::uint64_t shift_seed) {
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  ExperimentReport r;
  r.name = "sparse-domination";
  r.params = {{"measure", describe(spec)},
              {"shift", shift_token},
              {"trials", std::to_string(trials)},
              {"seed", std::to_string(seed)},
              {"shift_seed", std::to_string(shift_seed)}};
  r.columns = {"trial", "members", "packing", "packing_augmented", "eta", "lhs", "form_A", "form_C", "ratio",
               "form_C_intro", "ratio_intro"};
  auto M = MeasureTree<double>::from_spec(spec);
  const std::uint32_t D = M.depth_bound();
  const bool is_max = shift_token.rfind("maximal:", 0) == 0;
  std::optional<HaarShift> T;
  std::uint32_t N, pad;
  if (is_max) {
    N = static_cast<std::uint32_t>(std::stoul(shift_token.substr(8)));
    pad = N + 1;
  } else {
    T = parse_shift_token(shift_token, shift_seed);
    N = T->s + T->t;
    pad = std::max(T->s, T->t) + 1;
  }
  if (N > 3) throw std::invalid_argument("complexity s+t must be <= 3");
  const std::uint32_t L0 = pad + 1;
  if (L0 + 3 >= D) throw std::invalid_argument("depth bound too small for the requested complexity");
  for (int i = 0; i < trials; ++i) {
    auto rng = substream(seed, static_cast<std::uint64_t>(i));
    DyadicInterval support{L0, std::uniform_int_distribution<std::uint64_t>(0, (1ULL << L0) - 1)(rng)};
    std::uint32_t maxlev = std::min(D - 2, L0 + 10);
    int spikes = i % 2 ? 3 : 0;
    auto f1 = random_spiky_function<double>(rng, support, maxlev, spikes);
    auto f2 = random_spiky_function<double>(rng, support, maxlev, spikes);
    if (support_hull(f1, f2).level < pad) continue;
    auto S0 = build_sparse_collection(M, f1, f2, pad);
    auto S = augment_parents(M, S0);
    double lhs = is_max ? integral(M, maximal_N(M, f1, N).value * f2) : std::fabs(bilinear(*T, M, f1, f2));
    double A = form_A(M, S.members, f1, f2);
    double C = form_C_N(M, S.members, f1, f2, N);
    double CI = form_C_intro(M, S.members, f1, f2);
    r.add_row({double(i), double(S.members.size()), S0.packing, S.packing, S0.eta.value_or(nan_v), lhs, A, C,
               lhs / (A + C), CI, lhs / (A + CI)});
  }
  r.summary["max_ratio"] = max_of(r.column("ratio"));
  r.summary["max_ratio_intro"] = max_of(r.column("ratio_intro"));
  r.summary["max_packing"] = max_of(r.column("packing"));
  r.summary["max_packing_augmented"] = max_of(r.column("packing_augmented"));
  r.summary["min_eta"] = min_of(r.column("eta"));
  r.summary["N"] = N;
  r.check("packing <= 2", r.summary["max_packing"] <= 2.0);
  finish(r);
  return r;
}

namespace {
HaarShift shift_of_complexity(std::uint32_t N, std::uint64_t seed) {
  switch (N) {
    case 0: return haar_multiplier_pattern({1, -1});
    case 1: return dyadic_hilbert();
    case 2: return shift_left_left();
    default: return random_shift(N / 2, N - N / 2, seed);
  }
}
}  // namespace

ExperimentReport run_weight_suite(const MeasureSpec& spec, double p, std::uint32_t N, int trials,
                                  std::uint64_t seed) {
  if (!(p > 1)) throw std::invalid_argument("p must be > 1");
  if (N < 1 || N > 3) throw std::invalid_argument("N must lie in [1, 3]");
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  ExperimentReport r;
  r.name = "weight-suite";
  r.params = {{"measure", describe(spec)},
              {"p", fmt(p)},
              {"N", std::to_string(N)},
              {"trials", std::to_string(trials)},
              {"seed", std::to_string(seed)}};
  r.columns = {"trial",      "a_p",        "a_p_b",       "a_p_N",       "a_p_1",       "a_p_2",
               "a_1_N",      "c1",         "c2",          "dual_res",    "necessity",   "fair",
               "shift_norm", "shift_ratio", "max_norm",   "max_ratio",   "form_ratio",  "weak_ratio",
               "weak_shrink"};
  auto M = MeasureTree<double>::from_spec(spec);
  const std::uint32_t D = M.depth_bound();
  if (D < 8) throw std::invalid_argument("weight suite needs depth >= 8");
  const std::uint32_t depth = std::min(D - 1, 24u);
  const double q = p / (p - 1);
  const double e_main = std::max(1.0, 1.0 / (p - 1));
  const double e_form = ((p - 1) * (p - 1) + 1) / (p * (p - 1));
  auto T = shift_of_complexity(N, seed);
  bool chain_ok = true, unit_ok = true;
  for (int i = 0; i < trials; ++i) {
    auto rng = substream(seed, static_cast<std::uint64_t>(i));
    Weight<double> w = i == 0 ? Weight<double>{} : random_weight(rng, std::min(8u, D - 2), 16, 1.5);
    double a = char_Ap(M, w, p, depth).value;
    double ab = char_Ap_b(M, w, p, depth).value;
    double aN = char_Ap_N(M, w, p, N, depth).value;
    double a1 = char_Ap_N(M, w, p, 1, depth).value;
    double a2 = char_Ap_N(M, w, p, 2, depth).value;
    double a1N = char_Ap_N(M, w, 1, N, depth).value;
    chain_ok = chain_ok && a <= ab && ab <= a1 && a1 <= a2 && ab <= aN;
    if (i == 0 && p == 2) unit_ok = std::fabs(a - 1) < 1e-12 && std::fabs(ab - 1) < 1e-12 && std::fabs(aN - 1) < 1e-12;
    double c1 = ab / aN;
    double c2 = aN / std::pow(ab, std::ldexp(1.0, static_cast<int>(N) - 1));
    auto [x, y] = duality_check(M, w, p, depth);
    double dual = std::fabs(x - y) / x;
    double nec = necessity_residuals(M, w, p, N, 3).min_residual;

    std::uint32_t maxlev = std::min(D - 2, 12u);
    auto fs = random_spiky_function<double>(rng, root_interval, maxlev, 4);
    auto members = stopping_union(M, fs, fs, root_interval, 4, 2.0);
    members.push_back(root_interval);
    auto SF_ = make_family(M, members);
    double fair = SF_.eta ? fair_division_check(M, w, p, SF_) : nan_v;

    double bound = std::pow(a, e_main) + std::pow(a, e_form) * std::pow(aN, 1 / p);
    double sn = empirical_opnorm(T, M, p, &w, 6, seed * 7919 + static_cast<std::uint64_t>(i));
    double mn = 0;
    for (int k = 0; k < 4; ++k) {
      RandomFunctionOptions opt{root_interval, std::min(D - 2, 10u), 20, 0.0, 1.0, 0.3};
      auto f = random_step_function<double>(rng, opt);
      double nf = lp_norm(M, f, p, &w);
      if (nf > 0) mn = std::max(mn, lp_norm(M, maximal_N(M, f, N).value, p, &w) / nf);
    }

    DyadicInterval sup{1, std::uniform_int_distribution<std::uint64_t>(0, 1)(rng)};
    auto g1 = random_spiky_function<double>(rng, sup, maxlev, 3);
    auto g2 = random_spiky_function<double>(rng, sup, maxlev, 3);
    double form_ratio = nan_v;
    if (support_hull(g1, g2).level >= 1) {
      // Stopping family of g1 + g2 at ratio 2: dense enough that cousin pairs occur for every N.
      auto g12 = g1 + g2;
      auto dense = stopping_union(M, g12, g12, root_interval, 6, 2.0);
      dense.push_back(root_interval);
      auto S = augment_parents(M, make_family(M, dense));
      double form = form_C_N(M, S.members, g1, w.function() * g2, N);
      form_ratio = form / (lp_norm(M, g1, p, &w) * lp_norm(M, g2, q, &w) * std::pow(a, e_form) * std::pow(aN, 1 / p));
    }

    auto h = random_spiky_function<double>(rng, sup, maxlev, 8);
    double weak_ratio = nan_v, shrink = nan_v;
    double hw = integral(M, h * w.function());
    // Small G near the data, so that G' still meets the stopping intervals.
    std::map<DyadicInterval, double> cells;
    for (int k = 0; k < 4; ++k) {
      std::uint32_t l = std::uniform_int_distribution<std::uint32_t>(3, std::min(maxlev, 9u))(rng);
      cells[{l, (sup.index << (l - 1)) + std::uniform_int_distribution<std::uint64_t>(0, (1ULL << (l - 1)) - 1)(rng)}] = 1.0;
    }
    auto G = StepFunction<double>::sum_of_indicators(cells).map([](double v) { return v > 0 ? 1.0 : 0.0; });
    if (hw > 0 && support_hull(h, h).level >= 1 && integral(M, G) > 0) {
      h = (1.0 / hw) * h;
      // A denser family than the domination construction, so cousin pairs occur.
      auto dense = stopping_union(M, h, h, root_interval, 6, 2.0);
      dense.push_back(root_interval);
      auto S = augment_parents(M, make_family(M, dense));
      auto out = weak_type_functional(M, S.members, h, G, N, &w);
      weak_ratio = out.functional / (a1N * a1N);
      shrink = out.shrink;
    }
    r.add_row({double(i), a, ab, aN, a1, a2, a1N, c1, c2, dual, nec, fair, sn, sn / bound, mn, mn / bound,
               form_ratio, weak_ratio, shrink});
  }
  r.summary["C1"] = max_of(r.column("c1"));
  r.summary["C2"] = max_of(r.column("c2"));
  r.summary["max_dual_res"] = max_of(r.column("dual_res"));
  r.summary["min_necessity"] = min_of(r.column("necessity"));
  r.summary["min_fair"] = min_of(r.column("fair"));
  r.summary["shift_C"] = max_of(r.column("shift_ratio"));
  r.summary["maximal_C"] = max_of(r.column("max_ratio"));
  r.summary["form_C"] = max_of(r.column("form_ratio"));
  r.summary["weak_C"] = max_of(r.column("weak_ratio"));
  r.summary["max_shrink"] = max_of(r.column("weak_shrink"));
  r.check("inclusion chain a_p <= a_p_b <= a_p_1 <= a_p_2", chain_ok);
  if (p == 2) r.check("unit weight row has characteristics 1", unit_ok);
  r.check("duality residual <= 1e-10", r.summary["max_dual_res"] <= 1e-10);
  r.check("necessity residuals >= -1e-10", r.summary["min_necessity"] >= -1e-10);
  r.check("fair division ratios >= 1 - 1e-10", r.summary["min_fair"] >= 1 - 1e-10);
  r.check("weak-type set shrink <= 2", r.summary["max_shrink"] <= 2 + 1e-12);
  finish(r);
  return r;
}

namespace {
template <class S>
void czd_trial(ExperimentReport& r, const MeasureTree<S>& M, const MeasureTree<double>& Md, std::mt19937_64& rng,
               int i) {
  const std::uint32_t D = M.depth_bound();
  DyadicInterval I = i % 3 == 0 ? root_interval : DyadicInterval{1, static_cast<std::uint64_t>(i % 2)};
  std::uint32_t maxlev = std::min(D - 1, I.level + 12);
  auto f1 = random_spiky_function<S>(rng, I, maxlev, 3);
  auto f2 = random_spiky_function<S>(rng, I, maxlev, 3);
  S l1 = S(16) * average(M, f1, I), l2 = S(16) * average(M, f2, I);
  if (l1 == S(0) || l2 == S(0)) return;
  auto cz = cz_decompose(M, f1, f2, l1, l2, I);
  std::array<const StepFunction<S>*, 2> f{&f1, &f2};
  std::array<S, 2> lam{l1, l2};
  double err = 0, intb = 0, bl1 = 0, l2r = 0, l4r = 0, bmor = 0;
  for (int j = 0; j < 2; ++j) {
    S norm1 = integral(M, *f[j]);
    StepFunction<S> sum = cz.good[j];
    for (std::size_t k = 0; k < cz.selected.size(); ++k) {
      const auto& b = cz.bad[k][j];
      sum = sum + b;
      intb = std::max(intb, to_double(sabs(integral(M, b))) / to_double(norm1));
      S fk = integral(M, *f[j], cz.selected[k]);
      if (fk > S(0)) bl1 = std::max(bl1, to_double(integral(M, b.abs())) / to_double(fk));
    }
    for (const auto& c : (sum - *f[j]).cells()) err = std::max(err, to_double(sabs(c.value)));
    const auto& g = cz.good[j];
    auto g2 = g * g;
    l2r = std::max(l2r, to_double(integral(M, g2) / (lam[j] * norm1)));
    l4r = std::max(l4r, to_double(integral(M, g2 * g2) / (lam[j] * lam[j] * lam[j] * norm1)));
    bmor = std::max(bmor, to_double(bmo_norm(M, g, D) / lam[j]));
  }
  S sel(0);
  for (const auto& J : cz.selected) sel += M.mass(J);
  auto d1 = f1.template cast<double>(), d2 = f2.template cast<double>();
  auto members = stopping_union(Md, d1, d2, I, 64);
  members.push_back(I);
  double fam = packing_constant(Md, members) ;
  r.add_row({double(i), double(cz.selected.size()), err, intb, bl1, l2r, l4r, bmor,
             to_double(sel / M.mass(I)), fam});
}
}  // namespace

ExperimentReport run_czd_demo(const MeasureSpec& spec, int trials, std::uint64_t seed, bool rational) {
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  ExperimentReport r;
  r.name = "czd-demo";
  r.params = {{"measure", describe(spec)},
              {"trials", std::to_string(trials)},
              {"seed", std::to_string(seed)},
              {"mode", rational ? "rational" : "float"}};
  r.columns = {"trial", "selected", "recon_err", "int_b", "b_l1_ratio", "l2_ratio", "l4_ratio", "bmo_ratio",
               "step_packing", "family_packing"};
  auto Md = MeasureTree<double>::from_spec(spec);
  std::optional<MeasureTree<Rational>> Mr;
  if (rational) Mr = MeasureTree<Rational>::from_spec(spec);
  for (int i = 0; i < trials; ++i) {
    auto rng = substream(seed, static_cast<std::uint64_t>(i));
    if (rational)
      czd_trial<Rational>(r, *Mr, Md, rng, i);
    else
      czd_trial<double>(r, Md, Md, rng, i);
  }
  r.summary["max_recon_err"] = max_of(r.column("recon_err"));
  r.summary["max_int_b"] = max_of(r.column("int_b"));
  r.summary["max_b_l1_ratio"] = max_of(r.column("b_l1_ratio"));
  r.summary["C_l2"] = max_of(r.column("l2_ratio"));
  r.summary["C_l4"] = max_of(r.column("l4_ratio"));
  r.summary["C_bmo"] = max_of(r.column("bmo_ratio"));
  r.summary["max_step_packing"] = max_of(r.column("step_packing"));
  r.summary["max_family_packing"] = max_of(r.column("family_packing"));
  r.summary["mean_selected"] = [&] {
    auto s = r.column("selected");
    double acc = 0;
    for (double x : s) acc += x;
    return s.empty() ? 0.0 : acc / double(s.size());
  }();
  if (rational) {
    r.check("exact reconstruction", r.summary["max_recon_err"] == 0.0);
    r.check("bad parts have zero integral", r.summary["max_int_b"] == 0.0);
  } else {
    r.check("reconstruction error <= 1e-12", r.summary["max_recon_err"] <= 1e-12);
    r.check("|int b| <= 1e-14 |f|_1", r.summary["max_int_b"] <= 1e-14);
  }
  r.check("|b_jk|_1 <= 2 int_{I_k} f_j", r.summary["max_b_l1_ratio"] <= 2 * (1 + 1e-12));
  r.check("L4 and BMO constant <= 64", std::max(r.summary["C_l4"], r.summary["C_bmo"]) <= 64);
  r.check("stopping step packing <= 1/8", r.summary["max_step_packing"] <= 0.125 * (1 + 1e-12));
  finish(r);
  return r;
}

}  // namespace haarlab
