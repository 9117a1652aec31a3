#ifndef SHRINK_QUASIADD_HPP_
#define SHRINK_QUASIADD_HPP_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "shrink/linmaps.hpp"
#include "shrink/word.hpp"

namespace shrink {

/// All candidate connectors of length <= K: the empty word first, then by
/// length, lexicographic within a length.
struct ConnectorSet {
  int K = 0;
  std::vector<Word> words;
  std::vector<CocycleProduct> products;

  static ConnectorSet build(const LinearMapSet& maps, int K);
  std::size_t size() const { return words.size(); }
};

/// Index into a ConnectorSet and the gap it achieves.
struct ConnectorChoice {
  std::size_t index = 0;
  double gap = 0.0;
};

/// argmax over connectors of log phi^s(i k j) - log phi^s(i) - log phi^s(j),
/// ties (within 1e-12) resolved towards the earlier candidate.
ConnectorChoice best_connector(const ConnectorSet& set, const CocycleProduct& pi, double log_phi_i,
                               const CocycleProduct& pj, double log_phi_j, double s);

struct ConnectorResult {
  Word k;
  double gap = 0.0;
};
ConnectorResult find_connector(const LinearMapSet& maps, const Word& i, const Word& j, double s, int K);

struct ConnectorEntry {
  Word i;
  Word j;
  double s = 0.0;
  Word k;
  double gap = 0.0;
};

struct QuasiCertificate {
  int K = 0;
  double Q = 0.0;
  double L = 0.0;
  std::vector<double> s_grid;
  int sample_depth = 0;
  int random_pairs = 0;
  double floor = -50.0;
  bool passed = false;
  std::vector<ConnectorEntry> connector_table;

  /// s lies in the audited range [min s_grid, max s_grid].
  bool covers(double s) const;
};

struct CertifyOptions {
  double floor = -50.0;
  std::uint64_t budget = 1ull << 26;
  int threads = 1;
  int random_pairs = 0;  ///< extra random pairs of length random_length
  int random_length = 8;
  std::uint64_t seed = 1;
  bool store_table = true;
};

QuasiCertificate certify(const LinearMapSet& maps, int K, const std::vector<double>& s_grid, int sample_depth,
                         const CertifyOptions& options = {});

/// Entries whose inequality fails when re-evaluated from scratch.
std::vector<ConnectorEntry> reverify(const QuasiCertificate& cert, const LinearMapSet& maps, double tol = 1e-9);

nlohmann::json to_json(const QuasiCertificate& cert);
QuasiCertificate certificate_from_json(const nlohmann::json& j);

}  // namespace shrink

#endif  // SHRINK_QUASIADD_HPP_
