#include <doctest.h>

#include "haarlab/measure.hpp"

using namespace haarlab;

TEST_CASE("uniform") {
  auto M = MeasureTree<Rational>::build_uniform(8);
  CHECK(M.mass({3, 5}) == Rational(1, 8));
  CHECK(M.m_value({3, 5}) == Rational(1, 32));
  auto r = M.balance_report(7);
  CHECK(r.balanced_constant == doctest::Approx(2.0));
  CHECK_THROWS_AS(M.mass({9, 0}), std::domain_error);
  CHECK_THROWS_AS(M.m_value({8, 0}), std::domain_error);
}

TEST_CASE("lmp closed forms") {
  auto M = MeasureTree<Rational>::build_lmp(40);
  CHECK(M.mass(chain(1)) == Rational(1, 2));
  CHECK(M.mass(chain_b(1)) == Rational(1, 2));
  for (std::uint32_t k = 1; k <= 40; ++k) {
    CHECK(M.mass(chain(k)) == Rational(1, 2 * k));
    if (k >= 2) {
      CHECK(M.mass(chain_b(k)) == Rational(1, 2 * k * (k - 1)));
      CHECK(M.mass(chain(k - 1)) / M.mass(chain_b(k)) == Rational(k));
    }
  }
  CHECK(M.m_value(chain(0)) == Rational(1, 4));
  CHECK(M.m_value(chain(1)) == Rational(1, 8));
  CHECK(M.m_value(chain(2)) == Rational(1, 18));
  CHECK(M.m_value(chain(3)) == Rational(1, 32));
  for (std::uint32_t k = 2; k < 30; ++k) CHECK(M.m_value(chain_b(k)) == M.mass(chain_b(k)) / 4);
  // Equal split inside I_k^b.
  CHECK(M.mass({7, 3}) == M.mass(chain_b(6)) / 2);
  CHECK(M.uniform_below(chain_b(5)));
  CHECK_FALSE(M.uniform_below(chain(5)));
}

TEST_CASE("lmp float masses and balance") {
  auto M = MeasureTree<double>::build_lmp(66);
  for (std::uint32_t k = 2; k <= 64; ++k) {
    CHECK(std::fabs(M.mass(chain(k)) - 1.0 / (2.0 * k)) <= 1e-14);
    CHECK(std::fabs(M.mass(chain_b(k)) - 1.0 / (2.0 * k * (k - 1))) <= 1e-14);
  }
  auto r = M.balance_report(24);
  CHECK(r.balanced_constant <= 4.0);
  CHECK(r.balanced_constant > 3.5);
  for (const auto& [level, ratio] : r.doubling_profile)
    if (level >= 2) CHECK(ratio == doctest::Approx(double(level)).epsilon(1e-12));
  // No point mass at 0.
  CHECK(M.mass(chain(60)) < 0.01);
}

TEST_CASE("random balanced") {
  auto A = MeasureTree<double>::build_random_balanced(12, 7, 0.25);
  auto B = MeasureTree<double>::build_random_balanced(12, 7, 0.25);
  for (std::uint64_t i = 0; i < 64; ++i) CHECK(A.mass({6, i}) == B.mass({6, i}));
  auto C = MeasureTree<double>::build_random_balanced(12, 8, 0.25);
  CHECK(A.mass({6, 3}) != C.mass({6, 3}));
  auto H = MeasureTree<Rational>::build_random_balanced(6, 3, 0.5);
  CHECK(H.mass({5, 9}) == Rational(1, 32));
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto R = MeasureTree<double>::build_random_balanced(12, seed, 0.25);
    CHECK(R.balance_report(10).balanced_constant <= 16.0);
  }
  auto X = MeasureTree<Rational>::build_random_balanced(8, 11, 0.3);
  for (std::uint32_t l = 0; l < 8; ++l)
    for (std::uint64_t i = 0; i < (1ULL << l); ++i) {
      DyadicInterval I{l, i};
      CHECK(X.mass(left_child(I)) + X.mass(right_child(I)) == X.mass(I));
      CHECK(X.mass(I) > 0);
      CHECK(X.m_value(I) <= X.mass(I) / 4);
    }
}

TEST_CASE("explicit spec") {
  auto spec = parse_measure_spec(
      R"({"kind":"uniform","depth":6,"explicit":[{"interval":"1:0","mass":"1/3"},{"interval":"1:1","mass":"2/3"}]})");
  auto M = MeasureTree<Rational>::from_spec(spec);
  CHECK(M.mass({1, 0}) == Rational(1, 3));
  CHECK(M.mass({2, 3}) == Rational(1, 3));
  CHECK_FALSE(M.uniform_below(root_interval));
  CHECK(M.uniform_below({1, 1}));
  auto bad = parse_measure_spec(
      R"({"kind":"uniform","depth":6,"explicit":[{"interval":"1:0","mass":"1/3"},{"interval":"1:1","mass":"1/3"}]})");
  CHECK_THROWS_AS(MeasureTree<Rational>::from_spec(bad), std::invalid_argument);
  auto orphan = parse_measure_spec(R"({"kind":"uniform","depth":6,"explicit":[{"interval":"2:0","mass":"1/3"}]})");
  CHECK_THROWS_AS(MeasureTree<Rational>::from_spec(orphan), std::invalid_argument);
  auto lmp = MeasureTree<double>::from_spec(parse_measure_spec(R"({"kind":"lmp","depth":10})"));
  CHECK(lmp.mass(chain(4)) == doctest::Approx(1.0 / 8));
}
