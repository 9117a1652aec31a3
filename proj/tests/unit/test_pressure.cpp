#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "shrink/error.hpp"
#include "shrink/logsum.hpp"
#include "shrink/pressure.hpp"

using namespace shrink;
using oracle::diag2;
using oracle::rot;

namespace {

const double kLog2 = std::log(2.0);

struct System {
  LinearMapSet maps;
  TargetSpec target;
  LengthFunction length;
  QuasiCertificate cert;
  PressureProblem problem() const {
    PressureProblem p;
    p.maps = &maps;
    p.target = &target;
    p.length = &length;
    p.cert = &cert;
    return p;
  }
};

std::vector<double> s_grid(double d) {
  std::vector<double> g;
  for (int k = 0; k <= 8; ++k) g.push_back(d * k / 8);
  return g;
}

System similarity(double beta = 1.0) {
  System s{LinearMapSet({oracle::scalar1(0.5), oracle::scalar1(0.5)}), TargetSpec::periodic(Word::parse("1")),
           LengthFunction::birkhoff({beta, beta}), {}};
  s.cert = certify(s.maps, 0, s_grid(1.0), 3);
  return s;
}

System diagonal(double beta = 1.0) {
  System s{LinearMapSet({diag2(0.5, 0.25), diag2(0.5, 0.25)}), TargetSpec::periodic(Word::parse("1")),
           LengthFunction::birkhoff({beta, beta}), {}};
  s.cert = certify(s.maps, 0, s_grid(2.0), 3);
  return s;
}

System rotating() {
  System s{LinearMapSet({diag2(0.45, 0.15), rot(0.9) * diag2(0.45, 0.15)}), TargetSpec::periodic(Word::parse("12")),
           LengthFunction::birkhoff({1.0, 1.0}), {}};
  s.cert = certify(s.maps, 1, s_grid(2.0), 4);
  return s;
}

}  // namespace

TEST_CASE("similarity partial sums in closed form") {
  const auto sys = similarity();
  for (int n = 1; n <= 10; ++n) {
    CHECK(std::abs(partial_sum_full(sys.maps, sys.target, sys.length, 0.5, n)) < 1e-12);
    CHECK(partial_sum_full(sys.maps, sys.target, sys.length, 1.0, n) == doctest::Approx(-n * kLog2).epsilon(1e-12));
    CHECK(partial_sum_full(sys.maps, sys.target, sys.length, 0.0, n) == doctest::Approx(n * kLog2).epsilon(1e-12));
  }
}

TEST_CASE("full sum against brute force") {
  const LinearMapSet maps({diag2(0.5, 0.25), rot(0.7) * diag2(0.4, 0.3), diag2(0.3, 0.2)});
  const std::vector<Eigen::MatrixXd> ms{maps.map(0), maps.map(1), maps.map(2)};
  const auto target = TargetSpec::bernoulli({0.2, 0.5, 0.3}, 9, 100);
  const auto ell = LengthFunction::birkhoff({0.7, 1.3, 1.0});
  for (int n = 1; n <= 5; ++n) {
    for (double s : {0.4, 1.2, 1.9}) {
      double sum = 0.0;
      for (const auto& w : oracle::words(3, n)) {
        double l = 0.0;
        for (int a : w) l += ell.weights()[static_cast<std::size_t>(a)];
        auto full = w;
        for (std::size_t k = 0; k < floor_length(l); ++k) full.push_back(target.at(k));
        sum += oracle::phi(oracle::product(ms, full), s);
      }
      CHECK(partial_sum_full(maps, target, ell, s, n) == doctest::Approx(std::log(sum)).epsilon(1e-11));
    }
  }
}

TEST_CASE("type classes agree with enumeration") {
  const LinearMapSet maps({diag2(0.5, 0.25), diag2(0.3, 0.2), diag2(0.2, 0.45)});
  const auto target = TargetSpec::bernoulli({0.2, 0.5, 0.3}, 3, 200);
  const auto ell = LengthFunction::birkhoff({1.0, 0.5, 1.5});
  SumOptions en, tc;
  en.strategy = SumStrategy::enumerate;
  tc.strategy = SumStrategy::type_classes;
  for (int n : {1, 3, 6, 8}) {
    for (double s : {0.0, 0.7, 1.0, 1.6}) {
      const double a = partial_sum_full(maps, target, ell, s, n, en);
      const double b = partial_sum_full(maps, target, ell, s, n, tc);
      CHECK(a == doctest::Approx(b).epsilon(1e-12));
      CHECK(partial_sum_plain(maps, s, n, en) == doctest::Approx(partial_sum_plain(maps, s, n, tc)).epsilon(1e-12));
    }
  }
  SumOptions rot_tc;
  rot_tc.strategy = SumStrategy::type_classes;
  const LinearMapSet r({diag2(0.5, 0.25), rot(0.3) * diag2(0.5, 0.25)});
  CHECK_THROWS_AS(partial_sum_plain(r, 1.0, 3, rot_tc), ValidationError);
}

TEST_CASE("budget and prefix errors") {
  const auto sys = rotating();
  SumOptions small;
  small.budget = 100;
  CHECK_THROWS_AS(partial_sum_full(sys.maps, sys.target, sys.length, 1.0, 10, small), BudgetExceeded);
  const auto short_target = TargetSpec::bernoulli({0.5, 0.5}, 1, 5);
  CHECK_THROWS_AS(partial_sum_full(sys.maps, short_target, sys.length, 1.0, 8), PrefixExhausted);
}

TEST_CASE("thread count does not change sums") {
  const auto sys = rotating();
  SumOptions one, four;
  four.threads = 4;
  for (int n : {3, 9}) {
    CHECK(partial_sum_full(sys.maps, sys.target, sys.length, 1.1, n, one) ==
          partial_sum_full(sys.maps, sys.target, sys.length, 1.1, n, four));
    CHECK(partial_sum_connector(sys.maps, sys.cert, sys.target, sys.length, 1.1, n, one) ==
          partial_sum_connector(sys.maps, sys.cert, sys.target, sys.length, 1.1, n, four));
  }
  const LinearMapSet d({diag2(0.5, 0.25), diag2(0.3, 0.2)});
  SumOptions tc1, tc4;
  tc1.strategy = tc4.strategy = SumStrategy::type_classes;
  tc4.threads = 4;
  CHECK(partial_sum_plain(d, 1.3, 200, tc1) == partial_sum_plain(d, 1.3, 200, tc4));
}

TEST_CASE("connector sums") {
  const auto d = diagonal();
  for (int n = 1; n <= 6; ++n) {
    CHECK(partial_sum_connector(d.maps, d.cert, d.target, d.length, 1.2, n) ==
          doctest::Approx(partial_sum_full(d.maps, d.target, d.length, 1.2, n)).epsilon(1e-12));
  }
  const auto r = rotating();
  CHECK(partial_sum_connector(r.maps, r.cert, r.target, r.length, 0.0, 6) == doctest::Approx(6 * kLog2));

  // c S_full(n) <= S_conn(n) <= sum_{k<=K} S_full(n+k)
  const auto st = length_stats(r.length, 4);
  const int Emax = static_cast<int>(std::ceil(r.cert.K * st.H + r.length.kappa())) + 1;
  for (int n = 1; n <= 8; ++n) {
    for (double s : {0.5, 1.0, 1.5}) {
      const double conn = partial_sum_connector(r.maps, r.cert, r.target, r.length, s, n);
      const double full = partial_sum_full(r.maps, r.target, r.length, s, n);
      const double logc = r.cert.Q - s * Emax * std::log(r.maps.alpha_minus());
      CHECK(conn >= logc + full - 1e-12);
      double upper = full;
      for (int k = 1; k <= r.cert.K; ++k) upper = log_add(upper, partial_sum_full(r.maps, r.target, r.length, s, n + k));
      CHECK(conn <= upper + 1e-12);
    }
  }
  QuasiCertificate narrow = r.cert;
  narrow.s_grid = {0.5, 1.0};
  CHECK_THROWS_AS(partial_sum_connector(r.maps, narrow, r.target, r.length, 1.5, 3), OutOfRange);
}

TEST_CASE("target connector shape") {
  const auto r = rotating();
  const auto set = ConnectorSet::build(r.maps, 1);
  const Word i = Word::parse("1211");
  const auto tc = target_connector(r.maps, set, r.target, r.length, i, 1.0);
  CHECK(tc.connector.size() <= 1);
  CHECK(tc.target_length == i.size() + tc.connector.size());
}

TEST_CASE("pressure estimates and brackets") {
  const auto d = diagonal();
  const auto p = d.problem();
  const auto e = estimate_pressure(PotentialKind::plain, p, 1.5, {2, 4, 8});
  CHECK(e.value == doctest::Approx(std::log(0.5)).epsilon(1e-12));
  REQUIRE(e.bracket);
  CHECK(*e.bracket->lower == doctest::Approx(std::log(0.5)).epsilon(1e-10));
  CHECK(*e.bracket->upper == doctest::Approx(std::log(0.5)).epsilon(1e-10));

  const auto sim = similarity();
  const auto es = estimate_pressure(PotentialKind::full_target, sim.problem(), 0.5, {4, 8, 12});
  CHECK(std::abs(es.value) < 1e-12);
  REQUIRE(es.bracket);
  CHECK(std::abs(*es.bracket->lower) < 1e-10);
  CHECK(std::abs(*es.bracket->upper) < 1e-10);

  const auto r = rotating();
  const auto e0 = estimate_pressure(PotentialKind::full_target, r.problem(), 0.0, {3, 6});
  CHECK(e0.value == doctest::Approx(kLog2).epsilon(1e-12));
  const auto er = estimate_pressure(PotentialKind::full_target, r.problem(), 1.0, {4, 8, 12});
  REQUIRE(er.bracket);
  CHECK(*er.bracket->lower <= *er.bracket->upper);
  CHECK(er.values.size() == 3);
  CHECK(er.tail_max >= er.value);
}

TEST_CASE("fekete consistency for plain sums") {
  const LinearMapSet maps({diag2(0.5, 0.25), diag2(0.3, 0.2)});
  for (double s : {0.5, 1.3}) {
    double prev = 1e300;
    const double limit = std::log(std::pow(0.5, s > 1 ? 1 : s) * std::pow(0.25, s > 1 ? s - 1 : 0) +
                                  std::pow(0.3, s > 1 ? 1 : s) * std::pow(0.2, s > 1 ? s - 1 : 0));
    for (int n : {1, 2, 4, 8, 16}) {
      const double v = partial_sum_plain(maps, s, n) / n;
      CHECK(v >= limit - 1e-9);
      CHECK(v <= prev + 1e-9);
      prev = v;
    }
  }
}

TEST_CASE("monotone in s") {
  const auto r = rotating();
  for (int n : {4, 8}) {
    double prev = 1e300;
    for (double s = 0.0; s <= 2.0; s += 0.1) {
      const double v = partial_sum_full(r.maps, r.target, r.length, s, n);
      CHECK(v < prev);
      prev = v;
    }
  }
}

TEST_CASE("zero of the pressure") {
  const auto sim = similarity();
  const auto z = find_zero(sim.problem(), 10, 1e-7);
  CHECK(z.s0 == doctest::Approx(0.5).epsilon(1e-6));
  CHECK_FALSE(z.clamped);

  const auto d = diagonal();
  CHECK(find_zero(d.problem(), 10, 1e-7).s0 == doctest::Approx(0.5).epsilon(1e-6));
  // s0 = 1/(1+beta) on the branch s <= 1
  for (double beta : {0.5, 0.1}) {
    const auto db = diagonal(beta);
    CHECK(find_zero(db.problem(), 10, 1e-8).s0 == doctest::Approx(1.0 / (1.0 + beta)).epsilon(1e-6));
  }
  const auto tiny = diagonal(0.01);
  const auto zt = find_zero(tiny.problem(), 1000, 1e-8);
  CHECK(zt.s0 == doctest::Approx(1.0 / 1.01).epsilon(1e-6));

  // same depth, different starting intervals
  ZeroOptions a, b;
  a.bracket = std::make_pair(0.0, 1.0);
  b.bracket = std::make_pair(0.2, 1.7);
  const auto r = rotating();
  const double za = find_zero(r.problem(), 8, 1e-7, a).s0;
  const double zb = find_zero(r.problem(), 8, 1e-7, b).s0;
  CHECK(std::abs(za - zb) < 2e-7);

  ZeroOptions bad;
  bad.bracket = std::make_pair(0.6, 0.9);
  CHECK_THROWS_AS(find_zero(sim.problem(), 10, 1e-6, bad), NonBracketing);

  System three{LinearMapSet({oracle::scalar1(0.5), oracle::scalar1(0.5), oracle::scalar1(0.5)}),
               TargetSpec::periodic(Word::parse("1")), LengthFunction::birkhoff({0.1, 0.1, 0.1}), {}};
  const auto zc = find_zero(three.problem(), 6, 1e-6);
  CHECK(zc.clamped);
  CHECK(zc.s0 == 1.0);
}

TEST_CASE("depth refinement") {
  const auto r = rotating();
  ZeroOptions opt;
  opt.refine = true;
  opt.max_depth = 12;
  const auto z = find_zero(r.problem(), 3, 1e-6, opt);
  CHECK(z.depth_trace.size() >= 2);
  CHECK(z.depth_trace.front().first == 3);
}

TEST_CASE("lyapunov exponent") {
  const LinearMapSet maps({diag2(0.5, 0.25), diag2(0.3, 0.2)});
  const auto z1 = lyapunov_Z(maps, TargetSpec::periodic(Word::parse("1")), 1.5, {1, 2, 3, 10});
  for (const auto& [n, v] : z1.depth_sequence) CHECK(v == doctest::Approx(std::log(0.25)).epsilon(1e-12));
  CHECK(z1.Z == doctest::Approx(-1.386294).epsilon(1e-6));
  CHECK(z1.cesaro_spread < 1e-12);

  const auto z2 = lyapunov_Z(maps, TargetSpec::periodic(Word::parse("12")), 1.5, {100});
  CHECK(z2.Z == doctest::Approx(0.5 * (std::log(0.25) + std::log(0.3 * std::sqrt(0.2)))).epsilon(1e-12));

  const std::vector<double> p{0.4, 0.6};
  const auto bern = TargetSpec::bernoulli(p, 17, 20000);
  const auto zb = lyapunov_Z(maps, bern, 0.8, {20000});
  const double x1 = 0.8 * std::log(0.5), x2 = 0.8 * std::log(0.3);
  const double mean = p[0] * x1 + p[1] * x2;
  const double sd = std::sqrt(p[0] * p[1]) * std::abs(x1 - x2);
  CHECK(std::abs(zb.Z - mean) <= 3 * sd / std::sqrt(20000.0));
  CHECK_THROWS_AS(lyapunov_Z(maps, bern, 0.8, {20001}), PrefixExhausted);
}

TEST_CASE("ell pressure windows") {
  const auto sim = similarity();
  const auto ep = ell_pressure(sim.problem(), 0.5, {6, 9, 12});
  for (const auto& w : ep.windows) {
    CHECK(std::abs(w.log_sum_target - partial_sum_full(sim.maps, sim.target, sim.length, 0.5, w.n)) < 1e-12);
    CHECK(w.words == (1ull << w.n));
  }

  // psi = (1, 2): oracle over all words with 6 <= l < 8 (and <= 8 closed)
  System two{LinearMapSet({oracle::scalar1(0.5), oracle::scalar1(0.5)}), TargetSpec::periodic(Word::parse("1")),
             LengthFunction::birkhoff({1.0, 2.0}), {}};
  two.cert = certify(two.maps, 0, s_grid(1.0), 2);
  for (bool closed : {false, true}) {
    double sum = 0.0;
    std::uint64_t count = 0;
    for (int m = 1; m <= 8; ++m) {
      for (const auto& w : oracle::words(2, m)) {
        double l = 0.0;
        for (int a : w) l += a == 0 ? 1.0 : 2.0;
        if (l < 6 || l > 8 || (!closed && l >= 8)) continue;
        ++count;
        sum += std::pow(0.5, 0.7 * (m + std::floor(l)));
      }
    }
    EllOptions opt;
    opt.closed = closed;
    const auto e = ell_pressure(two.problem(), 0.7, {6}, opt);
    CHECK(e.H == 2.0);
    CHECK(e.windows[0].words == count);
    CHECK(e.windows[0].log_sum_target == doctest::Approx(std::log(sum)).epsilon(1e-12));
    SumOptions tc;
    tc.strategy = SumStrategy::type_classes;
    PressureProblem pt = two.problem();
    pt.options = tc;
    CHECK(ell_pressure(pt, 0.7, {6}, opt).windows[0].log_sum_target == doctest::Approx(std::log(sum)).epsilon(1e-12));
    EllOptions z0 = opt;
    z0.z_star = 0.0;
    const auto c0 = ell_pressure(two.problem(), 0.0, {6}, z0);
    CHECK(c0.windows[0].log_sum_lyapunov == doctest::Approx(std::log(static_cast<double>(count))).epsilon(1e-12));
  }
}

TEST_CASE("zero coincidence") {
  const auto sim = similarity();
  const auto zc = zero_coincidence_check(sim.problem(), 0.5, {6, 12}, 1e-9);
  CHECK(zc.passed);
  CHECK(std::abs(zc.value) < 1e-9);

  const auto d = diagonal();
  const double s0 = find_zero(d.problem(), 12, 1e-9).s0;
  const auto zd = zero_coincidence_check(d.problem(), s0, {12}, 0.05);
  CHECK(std::abs(zd.value) <= 0.05);
  CHECK(ell_pressure(d.problem(), s0 + 0.2, {12}).estimate.value < 0.0);
}

TEST_CASE("covering slopes") {
  const AffineIFS ifs(LinearMapSet({oracle::scalar1(0.5), oracle::scalar1(0.5)}),
                      {Eigen::VectorXd::Constant(1, 0.0), Eigen::VectorXd::Constant(1, 0.5)});
  const auto target = TargetSpec::periodic(Word::parse("1"));
  const auto ell = LengthFunction::birkhoff({1.0, 1.0});
  const auto table = covering_sum_experiment(ifs, target, ell, {0.4, 0.5, 0.6}, {6, 7, 8, 9, 10});
  for (const auto& row : table.rows) {
    if (!row.slope) continue;
    const double expect = std::log(2.0 * std::pow(2.0, -2 * row.s));
    CHECK(*row.slope == doctest::Approx(expect).epsilon(1e-9));
  }
  CHECK(table.classification[0].second == Trend::growing);
  CHECK(table.classification[1].second == Trend::flat);
  CHECK(table.classification[2].second == Trend::decaying);
  CHECK(*table.last_growing == 0.4);
  CHECK(*table.first_decaying == 0.6);
}

TEST_CASE("covering cost is non-increasing in s") {
  const LinearMapSet maps({diag2(0.45, 0.15), rot(0.9) * diag2(0.45, 0.15)});
  Eigen::VectorXd v1 = Eigen::VectorXd::Zero(2), v2(2);
  v2 << 0.55, 0.3;
  const AffineIFS ifs(maps, {v1, v2});
  const auto target = TargetSpec::periodic(Word::parse("12"));
  const auto ell = LengthFunction::birkhoff({1.0, 1.0});
  std::vector<double> ss;
  for (double s = 0.1; s <= 2.0; s += 0.1) ss.push_back(s);
  const auto table = covering_sum_experiment(ifs, target, ell, ss, {2, 5, 8});
  for (int n : {2, 5, 8}) {
    double prev = 1e300;
    for (const auto& row : table.rows) {
      if (row.n != n) continue;
      CHECK(row.log_sum <= prev + 1e-12);
      prev = row.log_sum;
    }
  }
}

TEST_CASE("full pressure splits into plain pressure plus Z") {
  const auto d = diagonal();
  const auto p = d.problem();
  // multiplicative case: log S_full(n) = log S_plain(n) + log phi^s(j|_n)
  for (int n : {4, 10}) {
    for (double s : {0.4, 1.3}) {
      const double full = partial_sum_full(d.maps, d.target, d.length, s, n);
      const double plain = partial_sum_plain(d.maps, s, n);
      const double z = lyapunov_Z(d.maps, d.target, s, {n}).Z;
      CHECK(full == doctest::Approx(plain + n * z).epsilon(1e-12));
    }
  }
  // rotating system: bracketed within the certificate slack
  const auto r = rotating();
  for (double s : {0.6, 1.2}) {
    const int n = 10;
    const double full = partial_sum_full(r.maps, r.target, r.length, s, n) / n;
    const double plain = partial_sum_plain(r.maps, s, n) / n;
    const double z = lyapunov_Z(r.maps, r.target, s, {64}).Z;
    const double slack = (std::abs(r.cert.Q) + std::log(r.cert.K + 1.0) + 2.0 * s * std::log(r.maps.alpha_minus())) / n;
    CHECK(full <= plain + z + slack);
    CHECK(full >= plain + z - slack - 0.05);
  }
}
