#include "haarlab/shift.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>

namespace haarlab {

namespace {
double checked(double a) {
  if (!(std::fabs(a) <= 1.0)) throw std::invalid_argument("shift coefficient exceeds 1 in absolute value");
  return a;
}

double unit_hash(std::uint64_t seed, const DyadicInterval& I, std::uint64_t m, std::uint64_t n) {
  std::uint64_t h = detail::splitmix64(seed);
  h = detail::splitmix64(h ^ I.level);
  h = detail::splitmix64(h ^ I.index);
  h = detail::splitmix64(h ^ (m << 20) ^ n);
  return static_cast<double>(h >> 11) * 0x1.0p-53 * 2.0 - 1.0;
}
}  // namespace

HaarShift make_shift(std::uint32_t s, std::uint32_t t, AlphaRule alpha, std::string name) {
  if (s > 20 || t > 20) throw std::invalid_argument("complexity too large");
  if (!alpha) throw std::invalid_argument("missing coefficient rule");
  return HaarShift{s, t, std::move(alpha), std::nullopt, std::move(name)};
}

HaarShift make_shift(std::uint32_t s, std::uint32_t t, const std::map<AlphaKey, double>& alpha, std::string name) {
  for (const auto& [key, a] : alpha) {
    checked(a);
    const auto& [I, m, n] = key;
    if ((s < 64 && m >= (1ULL << s)) || (t < 64 && n >= (1ULL << t)))
      throw std::invalid_argument("coefficient offset outside the complexity range");
    (void)I;
  }
  auto table = std::make_shared<std::map<AlphaKey, double>>(alpha);
  return make_shift(
      s, t,
      [table](const DyadicInterval& I, std::uint64_t m, std::uint64_t n) {
        auto it = table->find({I, m, n});
        return it == table->end() ? 0.0 : it->second;
      },
      std::move(name));
}

HaarShift dyadic_hilbert() {
  return make_shift(0, 1, [](const DyadicInterval&, std::uint64_t, std::uint64_t n) { return n == 0 ? 1.0 : -1.0; },
                    "hilbert");
}

HaarShift dyadic_hilbert_adjoint() { return adjoint(dyadic_hilbert()); }

HaarShift shift_left_left() {
  return make_shift(0, 2, [](const DyadicInterval&, std::uint64_t, std::uint64_t n) { return n == 0 ? 1.0 : 0.0; },
                    "ll2");
}

HaarShift haar_multiplier(std::function<double(const DyadicInterval&)> alpha_J, std::string name) {
  return make_shift(
      0, 0, [a = std::move(alpha_J)](const DyadicInterval& I, std::uint64_t, std::uint64_t) { return a(I); },
      std::move(name));
}

HaarShift haar_multiplier_pattern(const std::vector<int>& signs) {
  if (signs.empty()) throw std::invalid_argument("empty multiplier pattern");
  for (int v : signs)
    if (v != 1 && v != -1) throw std::invalid_argument("multiplier pattern entries must be +1 or -1");
  std::string name = "multiplier:";
  for (int v : signs) name += v > 0 ? '+' : '-';
  return haar_multiplier([signs](const DyadicInterval& I) { return double(signs[I.level % signs.size()]); }, name);
}

HaarShift random_shift(std::uint32_t s, std::uint32_t t, std::uint64_t seed) {
  return make_shift(
      s, t, [seed](const DyadicInterval& I, std::uint64_t m, std::uint64_t n) { return unit_hash(seed, I, m, n); },
      "random:" + std::to_string(s) + "," + std::to_string(t) + "@" + std::to_string(seed));
}

HaarShift adjoint(const HaarShift& T) {
  HaarShift A = T;
  A.s = T.t;
  A.t = T.s;
  A.alpha = [a = T.alpha](const DyadicInterval& I, std::uint64_t m, std::uint64_t n) { return a(I, n, m); };
  A.name = T.name == "hilbert" ? "hilbert-adjoint" : T.name + "*";
  return A;
}

HaarShift parse_shift_token(const std::string& token, std::uint64_t seed) {
  if (token == "hilbert") return dyadic_hilbert();
  if (token == "hilbert-adjoint") return dyadic_hilbert_adjoint();
  if (token == "ll2") return shift_left_left();
  if (token.rfind("multiplier:", 0) == 0) {
    std::vector<int> signs;
    for (char c : token.substr(11)) {
      if (c == '+') signs.push_back(1);
      else if (c == '-') signs.push_back(-1);
      else throw std::invalid_argument("bad multiplier pattern: " + token);
    }
    return haar_multiplier_pattern(signs);
  }
  if (token.rfind("random:", 0) == 0) {
    auto body = token.substr(7);
    auto comma = body.find(',');
    if (comma == std::string::npos) throw std::invalid_argument("bad random shift token: " + token);
    return random_shift(static_cast<std::uint32_t>(std::stoul(body.substr(0, comma))),
                        static_cast<std::uint32_t>(std::stoul(body.substr(comma + 1))), seed);
  }
  throw std::invalid_argument("unknown shift token: " + token);
}

namespace {
// Calls visit(I, J, K, a) for each contributing triple with J a key of cf.
template <class Visit>
void for_each_term(const HaarShift& T, const std::map<DyadicInterval, double>& cf, Visit&& visit) {
  for (const auto& [J, cJ] : cf) {
    if (J.level < T.s || cJ == 0.0) continue;
    DyadicInterval I = ancestor(J, T.s);
    if (T.depth_cutoff && I.level > *T.depth_cutoff) continue;
    std::uint64_t m = offset_in_ancestor(J, T.s);
    for (std::uint64_t n = 0; n < (1ULL << T.t); ++n) {
      double a = checked(T.alpha(I, m, n));
      if (a == 0.0) continue;
      visit(J, position({I, T.t, n}), a * cJ);
    }
  }
}
}  // namespace

StepFunction<double> apply(const HaarShift& T, const MeasureTree<double>& M, const StepFunction<double>& f) {
  auto cf = analyze(M, f).coefficients(M);
  std::map<DyadicInterval, double> out;
  for_each_term(T, cf, [&](const DyadicInterval&, const DyadicInterval& K, double v) {
    if (!M.is_internal(K)) throw std::domain_error("shift output below depth bound at " + to_string(K));
    out[K] += v;
  });
  HaarCoefficients<double> c;
  for (const auto& [K, v] : out)
    if (v != 0.0) c.diffs.emplace(K, v / std::sqrt(M.m_value(K)));
  return synthesize(M, c);
}

double bilinear(const HaarShift& T, const MeasureTree<double>& M, const StepFunction<double>& f,
                const StepFunction<double>& g) {
  auto cf = analyze(M, f).coefficients(M);
  auto cg = analyze(M, g).coefficients(M);
  double acc = 0.0;
  for_each_term(T, cf, [&](const DyadicInterval&, const DyadicInterval& K, double v) {
    auto it = cg.find(K);
    if (it != cg.end()) acc += v * it->second;
  });
  return acc;
}

double probe_opnorm(const HaarShift& T, const MeasureTree<double>& M, double p, const Weight<double>* w,
                    const std::vector<StepFunction<double>>& probes) {
  double best = 0.0;
  for (const auto& f : probes) {
    double nf = lp_norm(M, f, p, w);
    if (nf == 0.0) continue;
    best = std::max(best, lp_norm(M, apply(T, M, f), p, w) / nf);
  }
  return best;
}

double empirical_opnorm(const HaarShift& T, const MeasureTree<double>& M, double p, const Weight<double>* w,
                        int trials, std::uint64_t seed, const RandomFunctionOptions& opt) {
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  std::vector<StepFunction<double>> probes;
  for (int i = 0; i < trials; ++i) {
    auto rng = substream(seed, static_cast<std::uint64_t>(i));
    probes.push_back(random_step_function<double>(rng, opt));
  }
  return probe_opnorm(T, M, p, w, probes);
}

double empirical_opnorm(const HaarShift& T, const MeasureTree<double>& M, double p, const Weight<double>* w,
                        int trials, std::uint64_t seed) {
  RandomFunctionOptions opt;
  opt.max_level = std::min<std::uint32_t>(8, M.depth_bound() - T.t - 1);
  opt.splits = 20;
  return empirical_opnorm(T, M, p, w, trials, seed, opt);
}

}  // namespace haarlab
