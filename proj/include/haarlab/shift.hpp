#pragma once

#include "haarlab/haar.hpp"
#include "haarlab/random.hpp"

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <tuple>

namespace haarlab {

// α^I_{J,K} with J = I_s^m, K = I_t^n.
using AlphaRule = std::function<double(const DyadicInterval& I, std::uint64_t m, std::uint64_t n)>;
using AlphaKey = std::tuple<DyadicInterval, std::uint64_t, std::uint64_t>;

struct HaarShift {
  std::uint32_t s = 0;
  std::uint32_t t = 0;
  AlphaRule alpha;
  std::optional<std::uint32_t> depth_cutoff;
  std::string name;
};

HaarShift make_shift(std::uint32_t s, std::uint32_t t, AlphaRule alpha, std::string name = "custom");
// Sparse explicit coefficients; zero off the map.
HaarShift make_shift(std::uint32_t s, std::uint32_t t, const std::map<AlphaKey, double>& alpha,
                     std::string name = "explicit");

HaarShift dyadic_hilbert();
HaarShift dyadic_hilbert_adjoint();
HaarShift shift_left_left();
HaarShift haar_multiplier(std::function<double(const DyadicInterval&)> alpha_J, std::string name = "multiplier");
// sign of level(I) mod pattern length.
HaarShift haar_multiplier_pattern(const std::vector<int>& signs);
// Coefficients hashed from (seed, I, m, n), uniform in [-1, 1].
HaarShift random_shift(std::uint32_t s, std::uint32_t t, std::uint64_t seed);
HaarShift adjoint(const HaarShift& T);

// "hilbert", "hilbert-adjoint", "ll2", "multiplier:+-+", "random:S,T".
HaarShift parse_shift_token(const std::string& token, std::uint64_t seed = 0);

StepFunction<double> apply(const HaarShift& T, const MeasureTree<double>& M, const StepFunction<double>& f);
double bilinear(const HaarShift& T, const MeasureTree<double>& M, const StepFunction<double>& f,
                const StepFunction<double>& g);

// max ‖Tf‖/‖f‖ in L^p(w) over seeded random f; a lower bound for the norm.
double empirical_opnorm(const HaarShift& T, const MeasureTree<double>& M, double p, const Weight<double>* w,
                        int trials, std::uint64_t seed);
double empirical_opnorm(const HaarShift& T, const MeasureTree<double>& M, double p, const Weight<double>* w,
                        int trials, std::uint64_t seed, const RandomFunctionOptions& opt);
// Same ratio over given probe functions.
double probe_opnorm(const HaarShift& T, const MeasureTree<double>& M, double p, const Weight<double>* w,
                    const std::vector<StepFunction<double>>& probes);

}  // namespace haarlab
