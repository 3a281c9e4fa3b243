#include <doctest.h>

#include "haarlab/random.hpp"
#include "haarlab/sparse.hpp"

#include <cmath>

using namespace haarlab;
using SF = StepFunction<double>;

namespace {
// Brute force packing over every interval down to the deepest member.
double brute_packing(const MeasureTree<double>& M, const std::vector<DyadicInterval>& S) {
  std::uint32_t deep = 0;
  for (const auto& J : S) deep = std::max(deep, J.level);
  double best = 0;
  for (std::uint32_t l = 0; l <= deep; ++l)
    for (std::uint64_t i = 0; i < (1ULL << l); ++i) {
      DyadicInterval I{l, i};
      double s = 0;
      for (const auto& J : S)
        if (contains(I, J)) s += M.mass(J);
      best = std::max(best, s / M.mass(I));
    }
  return best;
}

std::vector<DyadicInterval> random_family(std::mt19937_64& rng, std::uint32_t max_level, int n) {
  std::vector<DyadicInterval> S;
  for (int k = 0; k < n; ++k) {
    std::uint32_t l = std::uniform_int_distribution<std::uint32_t>(0, max_level)(rng);
    S.push_back({l, std::uniform_int_distribution<std::uint64_t>(0, (1ULL << l) - 1)(rng)});
  }
  std::sort(S.begin(), S.end());
  S.erase(std::unique(S.begin(), S.end()), S.end());
  return S;
}

SF nonneg(std::mt19937_64& rng, const DyadicInterval& I, std::uint32_t max_level) {
  RandomFunctionOptions opt;
  opt.support = I;
  opt.max_level = max_level;
  opt.splits = 14;
  opt.lo = 0;
  opt.hi = 1;
  opt.zero_fraction = 0.3;
  return random_step_function<double>(rng, opt);
}

// Ordered pairs at distance 3..N+2, disjoint, enumerated directly.
double brute_C_N(const MeasureTree<double>& M, const std::vector<DyadicInterval>& S, const SF& f1, const SF& f2,
                 std::uint32_t N) {
  double acc = 0;
  for (const auto& J : S)
    for (const auto& K : S) {
      if (!disjoint(J, K)) continue;
      auto d = dyadic_distance(J, K);
      if (d <= 2 || d > N + 2) continue;
      acc += average(M, f1, J) * average(M, f2, K) * std::sqrt(M.m_value(J) * M.m_value(K));
    }
  return acc;
}
}  // namespace

TEST_CASE("packing constant") {
  auto U = MeasureTree<double>::build_uniform(30);
  CHECK(packing_constant(U, {root_interval}) == 1.0);
  CHECK(packing_constant(U, {}) == 0.0);
  DyadicInterval I{3, 5};
  CHECK(packing_constant(U, {I, left_child(I), left_child(left_child(I))}) == doctest::Approx(1.75));
  auto M = MeasureTree<double>::build_lmp(20);
  auto rng = substream(40, 0);
  for (int t = 0; t < 30; ++t) {
    auto S = random_family(rng, 7, 12);
    auto T = random_family(rng, 7, 12);
    double p = packing_constant(M, S);
    CHECK(p == doctest::Approx(brute_packing(M, S)).epsilon(1e-12));
    CHECK(p >= 1.0);
    std::vector<DyadicInterval> U2 = S;
    U2.insert(U2.end(), T.begin(), T.end());
    std::sort(U2.begin(), U2.end());
    U2.erase(std::unique(U2.begin(), U2.end()), U2.end());
    CHECK(packing_constant(M, U2) <= p + packing_constant(M, T) + 1e-12);
  }
}

TEST_CASE("witness assignment") {
  auto U = MeasureTree<double>::build_uniform(30);
  auto w = witness_assignment(U, {root_interval});
  REQUIRE(w);
  CHECK(w->eta == 1.0);
  DyadicInterval I{2, 1};
  w = witness_assignment(U, {I, left_child(I)});
  REQUIRE(w);
  CHECK(w->eta == 0.5);
  CHECK(w->cells.at(I) == std::vector<DyadicInterval>{right_child(I)});
  CHECK_FALSE(witness_assignment(U, {I, left_child(I), right_child(I)}));

  auto M = MeasureTree<double>::build_lmp(20);
  auto rng = substream(41, 0);
  for (int t = 0; t < 20; ++t) {
    auto S = random_family(rng, 6, 10);
    auto r = witness_assignment(M, S);
    if (!r) continue;
    std::vector<DyadicInterval> all;
    for (const auto& [J, cells] : r->cells) {
      double mu = 0;
      for (const auto& c : cells) {
        CHECK(contains(J, c));
        mu += M.mass(c);
        all.push_back(c);
      }
      CHECK(mu >= r->eta * M.mass(J) * (1 - 1e-12));
    }
    for (std::size_t a = 0; a < all.size(); ++a)
      for (std::size_t b = a + 1; b < all.size(); ++b) CHECK(disjoint(all[a], all[b]));
  }
}

TEST_CASE("sparse collection") {
  auto M = MeasureTree<double>::build_lmp(40);
  auto S0 = build_sparse_collection(M, SF::indicator({3, 1}), SF::indicator({3, 1}), 2);
  CHECK(S0.members == std::vector<DyadicInterval>{{1, 0}});
  CHECK_THROWS_AS(build_sparse_collection(M, SF::constant(1.0), SF::constant(1.0), 1), std::domain_error);
  CHECK_THROWS_AS(build_sparse_collection(M, SF::indicator({1, 0}), SF::indicator({1, 0}), 2), std::domain_error);

  auto f1 = SF::indicator(chain_b(5)), f2 = SF::indicator(chain_b(6));
  auto S = build_sparse_collection(M, f1, f2, 2);
  DyadicInterval I0 = ancestor(support_hull(f1, f2), 2);
  CHECK(S.members.front() == I0);
  for (const auto& J : stopping_children(M, f1, f2, I0))
    CHECK(std::binary_search(S.members.begin(), S.members.end(), J));

  auto rng = substream(42, 0);
  double worst = 0, worst_eta = 1;
  for (int t = 0; t < 100; ++t) {
    DyadicInterval hull{3, static_cast<std::uint64_t>(t % 8)};
    auto g1 = nonneg(rng, hull, 14), g2 = nonneg(rng, hull, 14);
    if (support_hull(g1, g2).level < 2) continue;
    auto F = build_sparse_collection(M, g1, g2, 2);
    worst = std::max(worst, F.packing);
    auto A = augment_parents(M, F);
    CHECK(A.packing <= 3 * F.packing + 1e-12);
    if (A.eta) worst_eta = std::min(worst_eta, *A.eta);
  }
  CHECK(worst <= 2.0);
  MESSAGE("packing " << worst << " eta " << worst_eta);
}

TEST_CASE("augment parents") {
  auto U = MeasureTree<double>::build_uniform(20);
  DyadicInterval I{2, 2};
  auto S = make_family(U, {left_child(I), right_child(I)});
  auto A = augment_parents(U, S);
  CHECK(A.members == std::vector<DyadicInterval>{I, left_child(I), right_child(I)});
  auto T = make_family(U, {{2, 0}, {3, 4}, {1, 1}});
  CHECK(augment_parents(U, T).members == T.members);
}

TEST_CASE("forms") {
  auto U = MeasureTree<double>::build_uniform(20);
  auto M = MeasureTree<double>::build_lmp(20);
  auto rng = substream(43, 0);
  auto f1 = nonneg(rng, root_interval, 6), f2 = nonneg(rng, root_interval, 6);
  CHECK(form_A(M, {root_interval}, f1, f2) == doctest::Approx(average(M, f1, root_interval) * average(M, f2, root_interval)));
  CHECK(form_C_intro(M, {root_interval}, f1, f2) ==
        doctest::Approx(2 * average(M, f1, root_interval) * average(M, f2, root_interval) * M.m_value(root_interval)));
  CHECK(form_C_intro(M, {root_interval, {1, 0}}, f1, SF::constant(0.0)) == 0.0);

  // {I_-, children of I_+}: only the two distance-3 pairs in each order.
  DyadicInterval I{1, 0};
  std::vector<DyadicInterval> S{left_child(I), left_child(right_child(I)), right_child(right_child(I))};
  std::sort(S.begin(), S.end());
  double expect = 0;
  for (const auto& K : {left_child(right_child(I)), right_child(right_child(I))}) {
    double r = std::sqrt(U.m_value(left_child(I)) * U.m_value(K));
    expect += average(U, f1, left_child(I)) * average(U, f2, K) * r + average(U, f1, K) * average(U, f2, left_child(I)) * r;
  }
  CHECK(form_C_N(U, S, f1, f2, 1) == doctest::Approx(expect));

  for (int t = 0; t < 20; ++t) {
    auto S1 = random_family(rng, 7, 10);
    auto S2 = S1;
    auto extra = random_family(rng, 7, 5);
    S2.insert(S2.end(), extra.begin(), extra.end());
    std::sort(S2.begin(), S2.end());
    S2.erase(std::unique(S2.begin(), S2.end()), S2.end());
    auto g1 = nonneg(rng, root_interval, 8), g2 = nonneg(rng, root_interval, 8);
    CHECK(form_C_N(M, S1, g1, g2, 0) == 0.0);
    for (std::uint32_t N : {1u, 2u, 3u}) {
      double c = form_C_N(M, S1, g1, g2, N);
      CHECK(c == doctest::Approx(brute_C_N(M, S1, g1, g2, N)).epsilon(1e-12));
      CHECK(c == doctest::Approx(form_C_N(M, S1, g2, g1, N)).epsilon(1e-12));
      CHECK(c <= form_C_N(M, S2, g1, g2, N) + 1e-15);
    }
    CHECK(form_A(M, S1, g1, g2) <= form_A(M, S2, g1, g2) + 1e-15);
  }
  auto shallow = MeasureTree<double>::build_uniform(3);
  CHECK_THROWS_AS(form_C_N(shallow, {{3, 0}}, f1, f2, 1), std::domain_error);
}

TEST_CASE("weak type functional") {
  auto M = MeasureTree<double>::build_lmp(16);
  auto rng = substream(44, 0);
  for (int t = 0; t < 10; ++t) {
    auto f1 = nonneg(rng, {2, 1}, 10);
    f1 = (1.0 / integral(M, f1)) * f1;
    auto G = nonneg(rng, root_interval, 6).map([](double v) { return v > 0 ? 1.0 : 0.0; });
    if (integral(M, G) == 0) continue;
    auto S = augment_parents(M, build_sparse_collection(M, f1, f1, 1));
    auto out = weak_type_functional(M, S.members, f1, G, 1);
    CHECK(out.shrink <= 2.0 + 1e-12);
    CHECK(out.functional >= 0);
    CHECK(std::isfinite(out.functional));
  }
}

TEST_CASE("json round trip") {
  auto M = MeasureTree<double>::build_lmp(20);
  auto S = make_family(M, {{0, 0}, {1, 0}, {4, 3}});
  auto text = to_json(S);
  auto T = sparse_family_from_json(M, text);
  CHECK(T.members == S.members);
  CHECK(T.packing == S.packing);
  CHECK(T.eta == S.eta);
  CHECK(text.find("\"1:0\"") != std::string::npos);
}
