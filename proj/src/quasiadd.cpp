#include "shrink/quasiadd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "shrink/error.hpp"
#include "shrink/parallel.hpp"

namespace shrink {

ConnectorSet ConnectorSet::build(const LinearMapSet& maps, int K) {
  if (K < 0 || K > 4) throw OutOfRange("quasiadd: connector length K must be in 0..4");
  ConnectorSet set;
  set.K = K;
  set.words = enumerate_words_upto(maps.size(), K, 1u << 20);
  set.products.reserve(set.words.size());
  for (const auto& w : set.words) set.products.push_back(maps.product(w));
  return set;
}

ConnectorChoice best_connector(const ConnectorSet& set, const CocycleProduct& pi, double log_phi_i,
                               const CocycleProduct& pj, double log_phi_j, double s) {
  ConnectorChoice best{0, -std::numeric_limits<double>::infinity()};
  for (std::size_t c = 0; c < set.size(); ++c) {
    const double gap = (pi * set.products[c] * pj).log_phi(s) - log_phi_i - log_phi_j;
    if (gap > best.gap + 1e-12) best = {c, gap};
  }
  return best;
}

ConnectorResult find_connector(const LinearMapSet& maps, const Word& i, const Word& j, double s, int K) {
  const auto set = ConnectorSet::build(maps, K);
  const auto pi = maps.product(i);
  const auto pj = maps.product(j);
  const auto choice = best_connector(set, pi, pi.log_phi(s), pj, pj.log_phi(s), s);
  return {set.words[choice.index], choice.gap};
}

bool QuasiCertificate::covers(double s) const {
  if (s_grid.empty()) return false;
  const auto [lo, hi] = std::minmax_element(s_grid.begin(), s_grid.end());
  return s >= *lo - 1e-12 && s <= *hi + 1e-12;
}

QuasiCertificate certify(const LinearMapSet& maps, int K, const std::vector<double>& s_grid, int sample_depth,
                         const CertifyOptions& options) {
  if (sample_depth < 1) throw OutOfRange("quasiadd: sample depth must be >= 1");
  if (s_grid.empty()) throw OutOfRange("quasiadd: empty s grid");
  for (double s : s_grid) {
    if (!(s >= 0.0) || s > maps.dim()) throw OutOfRange("quasiadd: s grid outside [0, d]");
  }
  const auto set = ConnectorSet::build(maps, K);

  std::vector<Word> words;
  for (int n = 1; n <= sample_depth; ++n) {
    auto level = enumerate_words(maps.size(), n, options.budget);
    words.insert(words.end(), level.begin(), level.end());
  }
  const std::uint64_t pairs = static_cast<std::uint64_t>(words.size()) * words.size();
  const std::uint64_t work = pairs * s_grid.size() * set.size();
  if (work / set.size() / s_grid.size() != pairs || work > options.budget) {
    throw BudgetExceeded("quasiadd: certification needs " + std::to_string(work) + " evaluations, budget " +
                         std::to_string(options.budget));
  }

  // Optional longer random pairs appended after the exhaustive ones.
  std::vector<std::pair<Word, Word>> extra;
  if (options.random_pairs > 0) {
    std::mt19937_64 rng(options.seed);
    std::uniform_int_distribution<int> sym(0, maps.size() - 1);
    for (int p = 0; p < options.random_pairs; ++p) {
      Word a, b;
      for (int k = 0; k < options.random_length; ++k) a.push_back(static_cast<Symbol>(sym(rng)));
      for (int k = 0; k < options.random_length; ++k) b.push_back(static_cast<Symbol>(sym(rng)));
      extra.emplace_back(std::move(a), std::move(b));
    }
  }

  std::vector<CocycleProduct> prods;
  prods.reserve(words.size());
  for (const auto& w : words) prods.push_back(maps.product(w));

  struct Slot {
    double q = std::numeric_limits<double>::infinity();
    double l = 0.0;
    std::vector<ConnectorEntry> entries;
  };
  const std::size_t rows = words.size() + extra.size();
  std::vector<Slot> slots(rows);
  run_partitions(rows, options.threads, [&](std::size_t r) {
    Slot& slot = slots[r];
    auto audit = [&](const Word& wi, const CocycleProduct& pi, const Word& wj, const CocycleProduct& pj) {
      for (double s : s_grid) {
        const double li = pi.log_phi(s);
        const double lj = pj.log_phi(s);
        const auto choice = best_connector(set, pi, li, pj, lj, s);
        slot.q = std::min(slot.q, choice.gap);
        if (options.store_table) slot.entries.push_back({wi, wj, s, set.words[choice.index], choice.gap});
      }
    };
    if (r < words.size()) {
      for (double s : s_grid) {
        slot.l = std::max(slot.l, std::abs(prods[r].log_phi(s)) / static_cast<double>(words[r].size()));
      }
      for (std::size_t c = 0; c < words.size(); ++c) audit(words[r], prods[r], words[c], prods[c]);
    } else {
      const auto& [a, b] = extra[r - words.size()];
      audit(a, maps.product(a), b, maps.product(b));
    }
  });

  QuasiCertificate cert;
  cert.K = K;
  cert.s_grid = s_grid;
  cert.sample_depth = sample_depth;
  cert.random_pairs = options.random_pairs;
  cert.floor = options.floor;
  cert.Q = std::numeric_limits<double>::infinity();
  for (auto& slot : slots) {
    cert.Q = std::min(cert.Q, slot.q);
    cert.L = std::max(cert.L, slot.l);
    cert.connector_table.insert(cert.connector_table.end(), std::make_move_iterator(slot.entries.begin()),
                                std::make_move_iterator(slot.entries.end()));
  }
  cert.passed = cert.Q >= options.floor;
  return cert;
}

std::vector<ConnectorEntry> reverify(const QuasiCertificate& cert, const LinearMapSet& maps, double tol) {
  std::vector<ConnectorEntry> bad;
  for (const auto& e : cert.connector_table) {
    if (static_cast<int>(e.k.size()) > cert.K) {
      bad.push_back(e);
      continue;
    }
    const double lhs = log_phi_s(maps, e.i + e.k + e.j, e.s);
    const double rhs = cert.Q + log_phi_s(maps, e.i, e.s) + log_phi_s(maps, e.j, e.s);
    if (lhs < rhs - tol) bad.push_back(e);
  }
  return bad;
}

nlohmann::json to_json(const QuasiCertificate& cert) {
  nlohmann::json j;
  j["K"] = cert.K;
  j["Q"] = cert.Q;
  j["L"] = cert.L;
  j["s_grid"] = cert.s_grid;
  j["sample_depth"] = cert.sample_depth;
  j["random_pairs"] = cert.random_pairs;
  j["floor"] = cert.floor;
  j["status"] = cert.passed ? "certified" : "failed";
  auto table = nlohmann::json::array();
  for (const auto& e : cert.connector_table) {
    table.push_back({{"i", e.i.to_string()}, {"j", e.j.to_string()}, {"s", e.s}, {"k", e.k.to_string()},
                     {"gap", e.gap}});
  }
  j["connector_table"] = std::move(table);
  return j;
}

QuasiCertificate certificate_from_json(const nlohmann::json& j) {
  QuasiCertificate cert;
  try {
    cert.K = j.at("K").get<int>();
    cert.Q = j.at("Q").get<double>();
    cert.L = j.at("L").get<double>();
    cert.s_grid = j.at("s_grid").get<std::vector<double>>();
    cert.sample_depth = j.at("sample_depth").get<int>();
    cert.random_pairs = j.value("random_pairs", 0);
    cert.floor = j.value("floor", -50.0);
    cert.passed = j.at("status").get<std::string>() == "certified";
    for (const auto& e : j.at("connector_table")) {
      cert.connector_table.push_back({Word::parse(e.at("i").get<std::string>()),
                                      Word::parse(e.at("j").get<std::string>()), e.at("s").get<double>(),
                                      Word::parse(e.at("k").get<std::string>()), e.at("gap").get<double>()});
    }
  } catch (const nlohmann::json::exception& ex) {
    throw ValidationError(std::string("quasiadd: malformed certificate: ") + ex.what());
  }
  return cert;
}

}  // namespace shrink
