#include <doctest.h>

#include <cmath>

#include "shrink/error.hpp"
#include "shrink/length.hpp"

using namespace shrink;

TEST_CASE("birkhoff length") {
  const auto ell = LengthFunction::birkhoff({1.0, 2.0});
  CHECK(ell(Word::parse("1212")) == doctest::Approx(6.0));
  CHECK(ell(Word()) == 0.0);
  CHECK(ell.kappa() == 0.0);
  const auto st = length_stats(ell, 5);
  CHECK(st.L_min == 1.0);
  CHECK(st.L_max == 2.0);
  CHECK(st.H == 2.0);
  CHECK(st.kappa_prime == 0.0);
  CHECK_THROWS_AS(LengthFunction::birkhoff({1.0, 0.0}), ValidationError);
}

TEST_CASE("table kappa") {
  std::map<Word, double> t{{Word::parse("1"), 1.0}, {Word::parse("2"), 1.0}, {Word::parse("11"), 2.3}};
  const auto ell = LengthFunction::table(2, t, 2);
  CHECK(ell.kappa() == doctest::Approx(0.3));
  CHECK(ell(Word::parse("11")) == doctest::Approx(2.3));
  CHECK_THROWS_AS(ell(Word::parse("12")), DepthExceeded);
  CHECK_THROWS_AS(ell(Word::parse("111")), DepthExceeded);
}

TEST_CASE("table stats bounds hold on every audited word") {
  std::map<Word, double> t;
  for (int n = 1; n <= 4; ++n) {
    for (const auto& w : enumerate_words(2, n, 100)) {
      double v = 0.0;
      for (Symbol a : w) v += a == 0 ? 1.0 : 1.5;
      t[w] = v + 0.1 * std::sin(static_cast<double>(w.size() * 7 + w[0]));
    }
  }
  const auto ell = LengthFunction::table(2, t, 4);
  const auto st = length_stats(ell, 4);
  for (const auto& [w, v] : t) {
    const double n = static_cast<double>(w.size());
    CHECK(v >= n * st.L_min - st.kappa_prime - 1e-12);
    CHECK(v <= n * st.L_max + st.kappa_prime + 1e-12);
    CHECK(v / n >= st.M_min - 1e-12);
    CHECK(v / n <= st.M_max + 1e-12);
  }
  CHECK(st.H >= 1.5 - 0.2);
}

TEST_CASE("table stats reject non-positive values") {
  std::map<Word, double> t{{Word::parse("1"), 1.0}, {Word::parse("2"), -0.5}};
  const auto ell = LengthFunction::table(2, t, 1);
  CHECK_THROWS_AS(length_stats(ell, 1), ValidationError);
}

TEST_CASE("kappa warning") {
  std::map<Word, double> t{{Word::parse("1"), 0.1}, {Word::parse("2"), 0.1}, {Word::parse("11"), 1.0}};
  const auto st = length_stats(LengthFunction::table(2, t, 2), 2);
  CHECK_FALSE(st.warnings.empty());
}

TEST_CASE("floor snapping") {
  CHECK(floor_length(2.9999999999) == 3);
  CHECK(floor_length(2.99) == 2);
  CHECK(floor_length(0.0) == 0);
  double acc = 0.0;
  for (int k = 0; k < 100; ++k) acc += 0.01;
  CHECK(floor_length(acc) == 1);
}
