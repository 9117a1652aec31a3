#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "shrink/quasiadd.hpp"

using namespace shrink;
using oracle::diag2;
using oracle::rot;

namespace {

LinearMapSet rotating() { return LinearMapSet({diag2(0.5, 0.125), rot(M_PI / 2) * diag2(0.5, 0.125)}); }

std::vector<double> grid(double d, int steps) {
  std::vector<double> g;
  for (int k = 0; k <= steps; ++k) g.push_back(d * k / steps);
  return g;
}

}  // namespace

TEST_CASE("diagonal maps need no connector") {
  const LinearMapSet maps({diag2(0.5, 0.25), diag2(0.3, 0.2)});
  const auto r = find_connector(maps, Word::parse("12"), Word::parse("21"), 1.3, 2);
  CHECK(r.k.empty());
  CHECK(std::abs(r.gap) < 1e-12);
  const auto e = find_connector(rotating(), Word(), Word::parse("2"), 1.0, 1);
  CHECK(e.k.empty());
  CHECK(std::abs(e.gap) < 1e-12);
}

TEST_CASE("connector by brute force") {
  const auto maps = rotating();
  const std::vector<Eigen::MatrixXd> ms{maps.map(0), maps.map(1)};
  // i = j = 1, candidates k = e, 1, 2 give the words 11, 111, 121
  const std::vector<std::vector<int>> full{{0, 0}, {0, 0, 0}, {0, 1, 0}};
  const std::vector<Word> ks{Word(), Word::parse("1"), Word::parse("2")};
  const double base = 2 * std::log(oracle::phi(ms[0], 1.0));
  double best = -1e300;
  std::size_t arg = 0;
  for (std::size_t c = 0; c < full.size(); ++c) {
    const double g = std::log(oracle::phi(oracle::product(ms, full[c]), 1.0)) - base;
    if (g > best + 1e-12) {
      best = g;
      arg = c;
    }
  }
  const auto r = find_connector(maps, Word::parse("1"), Word::parse("1"), 1.0, 1);
  CHECK(r.gap == doctest::Approx(best).epsilon(1e-12));
  CHECK(r.k == ks[arg]);
  CHECK(find_connector(maps, Word::parse("1"), Word::parse("1"), 1.0, 1).k == r.k);
}

TEST_CASE("certificate on a diagonal system") {
  const LinearMapSet maps({diag2(0.5, 0.25), diag2(0.5, 0.25)});
  const auto cert = certify(maps, 0, grid(2.0, 8), 3);
  CHECK(cert.passed);
  CHECK(std::abs(cert.Q) < 1e-12);
  CHECK(cert.L == doctest::Approx(3 * std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("certificate on a rotating system") {
  const auto maps = rotating();
  const auto c1 = certify(maps, 1, grid(2.0, 8), 4);
  CHECK(c1.passed);
  CHECK(std::isfinite(c1.Q));
  CHECK(c1.Q <= 0.0);
  CHECK(c1.Q > -50.0);
  CHECK(reverify(c1, maps).empty());
  for (const auto& e : c1.connector_table) CHECK(static_cast<int>(e.k.size()) <= 1);

  const auto c2 = certify(maps, 2, grid(2.0, 8), 4);
  CHECK(c2.Q >= c1.Q - 1e-12);

  const auto c0 = certify(maps, 0, grid(2.0, 8), 4);
  CHECK(c1.Q >= c0.Q - 1e-12);
}

TEST_CASE("certificate json round trip") {
  const auto maps = rotating();
  const auto cert = certify(maps, 1, grid(2.0, 4), 2);
  const auto back = certificate_from_json(to_json(cert));
  CHECK(back.K == cert.K);
  CHECK(back.Q == cert.Q);
  CHECK(back.s_grid == cert.s_grid);
  REQUIRE(back.connector_table.size() == cert.connector_table.size());
  CHECK(back.connector_table[5].k == cert.connector_table[5].k);
  CHECK(reverify(back, maps).empty());
}

TEST_CASE("certificate is independent of the thread count") {
  const auto maps = rotating();
  CertifyOptions one, four;
  four.threads = 4;
  const auto a = certify(maps, 1, grid(2.0, 4), 3, one);
  const auto b = certify(maps, 1, grid(2.0, 4), 3, four);
  CHECK(a.Q == b.Q);
  CHECK(to_json(a).dump() == to_json(b).dump());
}

TEST_CASE("random extra pairs and floor") {
  const auto maps = rotating();
  CertifyOptions opt;
  opt.random_pairs = 20;
  opt.random_length = 10;
  const auto cert = certify(maps, 1, {1.0}, 2, opt);
  CHECK(cert.random_pairs == 20);
  CHECK(reverify(cert, maps).empty());
  opt.floor = 1.0;
  CHECK_FALSE(certify(maps, 1, {1.0}, 2, opt).passed);
}
