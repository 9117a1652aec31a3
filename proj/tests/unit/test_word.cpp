#include <doctest.h>

#include "shrink/error.hpp"
#include "shrink/target.hpp"
#include "shrink/word.hpp"

using namespace shrink;

TEST_CASE("parse and print round trip") {
  const Word w = Word::parse("121");
  CHECK(w.size() == 3);
  CHECK(w[0] == 0);
  CHECK(w[1] == 1);
  CHECK(w.to_string() == "121");
  CHECK(Word::parse("e").empty());
  CHECK(Word().to_string() == "e");
  CHECK(Word::parse("10.2").to_string() == "10.2");
}

TEST_CASE("prefix and shift") {
  const Word w = Word::parse("1221");
  CHECK(w.prefix(2) == Word::parse("12"));
  CHECK(w.suffix_from(1) == Word::parse("221"));
  CHECK(w.prefix(0).empty());
  CHECK_THROWS_AS(w.prefix(5), OutOfRange);
  CHECK((Word::parse("12") + Word::parse("3")) == Word::parse("123"));
}

TEST_CASE("enumeration is lexicographic and complete") {
  const auto ws = enumerate_words(2, 3, 100);
  REQUIRE(ws.size() == 8);
  CHECK(ws.front() == Word::parse("111"));
  CHECK(ws[1] == Word::parse("112"));
  CHECK(ws.back() == Word::parse("222"));
  for (std::size_t k = 1; k < ws.size(); ++k) CHECK(ws[k - 1] < ws[k]);
  CHECK(enumerate_words(3, 0, 10).size() == 1);
  CHECK(enumerate_words_upto(2, 2, 10).size() == 7);
}

TEST_CASE("budget cap") {
  CHECK_THROWS_AS(enumerate_words(2, 30, 1000), BudgetExceeded);
  CHECK(word_count(3, 4, 1000) == 81);
}

TEST_CASE("periodic target") {
  const auto j = TargetSpec::periodic(Word::parse("12"));
  CHECK(j.prefix(5.7) == Word::parse("12121"));
  CHECK(j.prefix(0.3).empty());
  CHECK(j.at(101) == 1);
}

TEST_CASE("bernoulli target is reproducible and finite") {
  const auto a = TargetSpec::bernoulli({0.3, 0.7}, 42, 1000);
  const auto b = TargetSpec::bernoulli({0.3, 0.7}, 42, 1000);
  const auto c = TargetSpec::bernoulli({0.3, 0.7}, 43, 1000);
  CHECK(a.prefix_exact(1000) == b.prefix_exact(1000));
  CHECK(a.prefix_exact(1000) != c.prefix_exact(1000));
  int ones = 0;
  for (std::size_t k = 0; k < 1000; ++k) ones += a.at(k) == 0;
  CHECK(ones > 240);
  CHECK(ones < 360);
  CHECK_THROWS_AS(a.at(1000), PrefixExhausted);
  CHECK_THROWS_AS(a.prefix(1001.5), PrefixExhausted);
  CHECK_THROWS_AS(TargetSpec::bernoulli({0.3, 0.6}, 1, 10), ValidationError);
}
