#include "shrink/modular.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <limits>
#include <map>
#include <string>

#include "shrink/error.hpp"
#include "shrink/logsum.hpp"
#include "shrink/parallel.hpp"
#include "shrink/pressure.hpp"

namespace shrink {

namespace {


void check_args(const LinearMapSet& maps, double s, int R) {
  if (R < 1) throw OutOfRange("modular: block size R must be >= 1");
  if (!(s >= 0.0) || s > maps.dim()) throw OutOfRange("modular: s outside [0, d]");
}

struct BlockTable {
  int R = 0;
  std::vector<Word> words;
  std::vector<CocycleProduct> products;
  std::vector<double> psi;

  BlockTable(const LinearMapSet& maps, int R_, double s, std::uint64_t budget) : R(R_) {
    words = enumerate_words(maps.size(), R, budget);
    products.reserve(words.size());
    psi.reserve(words.size());
    for (const auto& w : words) {
      products.push_back(maps.product(w));
      psi.push_back(products.back().log_phi(s));
    }
  }
};

// Index of the first connector (shortest, then lexicographic) whose junction
// gap between a prefix and block b reaches Q - tol; -1 if none.
int greedy_connector(const ConnectorSet& conn, const CocycleProduct& prefix, double psi_prefix,
                     const CocycleProduct& block, double psi_block, double s, double Q, double tol) {
  for (std::size_t c = 0; c < conn.size(); ++c) {
    const double v = (prefix * conn.products[c] * block).log_phi(s);
    if (v - psi_prefix - psi_block >= Q - tol) return static_cast<int>(c);
  }
  return -1;
}

struct Step {
  std::size_t connector = 0;
  std::size_t block = 0;
};

// Depth-first walk over decompositions starting with a fixed first block.
// leaf(product, psi, flat_length, steps) is called for every node whose flat
// length lies in [lo, hi].
template <typename Leaf>
std::uint64_t walk(const BlockTable& blocks, const ConnectorSet& conn, double s, double Q, double tol,
                   std::size_t first, std::size_t lo, std::size_t hi, std::uint64_t budget, Leaf&& leaf) {
  std::uint64_t nodes = 0;
  std::vector<Step> steps;
  const std::size_t R = static_cast<std::size_t>(blocks.R);
  auto descend = [&](auto&& self, const CocycleProduct& p, double psi, std::size_t len) -> void {
    if (++nodes > budget) throw BudgetExceeded("modular: decomposition walk exceeds budget");
    if (len >= lo) leaf(p, psi, len, steps);
    for (std::size_t c = 0; c < conn.size(); ++c) {
      const std::size_t next = len + conn.words[c].size() + R;
      if (next > hi) break;
      const CocycleProduct pc = p * conn.products[c];
      for (std::size_t b = 0; b < blocks.words.size(); ++b) {
        CocycleProduct q = pc * blocks.products[b];
        const double v = q.log_phi(s);
        if (v < Q + psi + blocks.psi[b] - tol) continue;
        steps.push_back({c, b});
        self(self, q, v, next);
        steps.pop_back();
      }
    }
  };
  if (R <= hi) descend(descend, blocks.products[first], blocks.psi[first], R);
  return nodes;
}

ModularWord assemble(const BlockTable& blocks, const ConnectorSet& conn, std::size_t first,
                     const std::vector<Step>& steps) {
  ModularWord w;
  w.R = blocks.R;
  w.blocks.push_back(blocks.words[first]);
  w.flat = blocks.words[first];
  for (const auto& st : steps) {
    w.connectors.push_back(conn.words[st.connector]);
    w.blocks.push_back(blocks.words[st.block]);
    w.flat.append(conn.words[st.connector]);
    w.flat.append(blocks.words[st.block]);
  }
  return w;
}

Word flat_of(const BlockTable& blocks, const ConnectorSet& conn, std::size_t first, const std::vector<Step>& steps) {
  Word f = blocks.words[first];
  for (const auto& st : steps) {
    f.append(conn.words[st.connector]);
    f.append(blocks.words[st.block]);
  }
  return f;
}

// Runs the walk for every first block and combines per-length sums in
// block order. term(product, psi, len, first, steps) gives the log summand.
template <typename Term>
ModularSums collect_sums(const QuasiCertificate& cert, const LinearMapSet& maps, double s, int n, int R,
                         const ModularOptions& options, Term&& term) {
  check_args(maps, s, R);
  if (n < 1) throw OutOfRange("modular: flat length n must be >= 1");
  const BlockTable blocks(maps, R, s, options.budget);
  const auto conn = ConnectorSet::build(maps, cert.K);
  const std::size_t lo = static_cast<std::size_t>(n);
  const std::size_t width = static_cast<std::size_t>(R + cert.K);
  const std::size_t hi = lo + width - 1;

  struct Slot {
    std::vector<LogSumExp> sums;
    std::vector<std::uint64_t> counts;
    std::uint64_t nodes = 0;
  };
  std::vector<Slot> slots(blocks.words.size());
  run_partitions(blocks.words.size(), options.threads, [&](std::size_t first) {
    Slot& sl = slots[first];
    sl.sums.resize(width);
    sl.counts.assign(width, 0);
    sl.nodes = walk(blocks, conn, s, cert.Q, options.tol, first, lo, hi, options.budget,
                    [&](const CocycleProduct& p, double psi, std::size_t len, const std::vector<Step>& steps) {
                      sl.sums[len - lo].add(term(p, psi, len, first, steps));
                      ++sl.counts[len - lo];
                    });
  });

  ModularSums out;
  out.n = n;
  out.R = R;
  out.K = cert.K;
  out.s = s;
  std::vector<LogSumExp> sums(width);
  out.counts.assign(width, 0);
  for (const auto& sl : slots) {
    out.nodes += sl.nodes;
    for (std::size_t m = 0; m < width; ++m) {
      sums[m].merge(sl.sums[m]);
      out.counts[m] += sl.counts[m];
    }
  }
  if (out.nodes > options.budget) throw BudgetExceeded("modular: decomposition walk exceeds budget");
  LogSumExp total;
  for (const auto& sm : sums) {
    out.log_S.push_back(sm.log_value());
    total.merge(sm);
  }
  out.log_total = total.log_value();
  return out;
}

}  // namespace

ModularWord modular_extend(const QuasiCertificate& cert, const LinearMapSet& maps, double s, const Word& base,
                           const std::vector<Word>& blocks, double tol) {
  if (blocks.empty()) throw OutOfRange("modular: no blocks to extend with");
  const int R = static_cast<int>(blocks.front().size());
  check_args(maps, s, R);
  const auto conn = ConnectorSet::build(maps, cert.K);
  ModularWord w;
  w.base = base;
  w.R = R;
  w.flat = base;
  CocycleProduct p = maps.product(base);
  double psi = p.log_phi(s);
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    const Word& b = blocks[k];
    if (static_cast<int>(b.size()) != R) throw OutOfRange("modular: blocks must share the length R");
    const auto pb = maps.product(b);
    const double psi_b = pb.log_phi(s);
    std::size_t c = 0;
    if (!w.flat.empty()) {
      const int g = greedy_connector(conn, p, psi, pb, psi_b, s, cert.Q, tol);
      if (g < 0)
        throw NoConnector("modular: no connector of length <= " + std::to_string(cert.K) +
                          " reaches the quasi-additivity gap Q=" + std::to_string(cert.Q) + " after " +
                          w.flat.to_string(maps.size()));
      c = static_cast<std::size_t>(g);
    }
    if (k == 0) {
      w.leading = conn.words[c];
    } else {
      w.connectors.push_back(conn.words[c]);
    }
    w.flat.append(conn.words[c]);
    w.flat.append(b);
    w.blocks.push_back(b);
    p = p * conn.products[c] * pb;
    psi = p.log_phi(s);
  }
  return w;
}

bool junctions_hold(const ModularWord& w, const LinearMapSet& maps, double s, double Q, double tol) {
  auto lphi = [&](const Word& u) { return log_phi_s(compose(maps, u), s); };
  Word prefix = w.base;
  for (std::size_t k = 0; k < w.blocks.size(); ++k) {
    const Word& c = k == 0 ? w.leading : w.connectors[k - 1];
    Word next = prefix + c + w.blocks[k];
    if (!prefix.empty() && lphi(next) < Q + lphi(prefix) + lphi(w.blocks[k]) - tol) return false;
    prefix = std::move(next);
  }
  return prefix == w.flat;
}

std::vector<ModularWord> enumerate_modular(const QuasiCertificate& cert, const LinearMapSet& maps, double s, int n,
                                           int R, const ModularOptions& options) {
  check_args(maps, s, R);
  const BlockTable blocks(maps, R, s, options.budget);
  const auto conn = ConnectorSet::build(maps, cert.K);
  std::vector<std::vector<ModularWord>> parts(blocks.words.size());
  const std::size_t len = static_cast<std::size_t>(std::max(n, 0));
  run_partitions(blocks.words.size(), options.threads, [&](std::size_t first) {
    walk(blocks, conn, s, cert.Q, options.tol, first, len, len, options.budget,
         [&](const CocycleProduct&, double, std::size_t, const std::vector<Step>& steps) {
           parts[first].push_back(assemble(blocks, conn, first, steps));
         });
  });
  std::vector<ModularWord> out;
  for (auto& p : parts)
    for (auto& w : p) out.push_back(std::move(w));
  return out;
}

ModularSums modular_pressure_sum(const QuasiCertificate& cert, const LinearMapSet& maps, double s, int n, int R,
                                 const ModularOptions& options) {
  return collect_sums(cert, maps, s, n, R, options,
                      [](const CocycleProduct&, double psi, std::size_t, std::size_t, const std::vector<Step>&) {
                        return psi;
                      });
}

ModularSums modular_pressure_sum_target(const QuasiCertificate& cert, const LinearMapSet& maps,
                                        const TargetSpec& target, const LengthFunction& length, double s, int n,
                                        int R, const ModularOptions& options) {
  check_args(maps, s, R);
  const auto conn = ConnectorSet::build(maps, cert.K);
  const BlockTable blocks(maps, R, s, options.budget);
  const int hi = n + R + 2 * cert.K;
  const TargetPrefixProducts tp(maps, target, floor_length(length.max_value_upto(hi)) + 1);
  return collect_sums(cert, maps, s, n, R, options,
                      [&](const CocycleProduct& p, double psi, std::size_t, std::size_t first,
                          const std::vector<Step>& steps) {
                        const Word flat = flat_of(blocks, conn, first, steps);
                        const auto& pj = tp.at(floor_length(length(flat)));
                        const auto choice = best_connector(conn, p, psi, pj, pj.log_phi(s), s);
                        const Word ic = flat + conn.words[choice.index];
                        const auto& pj2 = tp.at(floor_length(length(ic)));
                        return (p * conn.products[choice.index] * pj2).log_phi(s);
                      });
}

FittedBound fit_envelope(const std::vector<std::pair<std::pair<int, int>, double>>& points) {
  // c_R/R has to cover the n -> infinity limit of every R column. The limit
  // is the larger of the deepest value and its Richardson extrapolation
  // d_inf = (n d_n - m d_m)/(n - m) from the two deepest n. c_n then
  // absorbs the finite-n excess.
  FittedBound f;
  std::map<int, std::map<int, double>> columns;
  for (const auto& [nr, v] : points) columns[nr.second][nr.first] = v;
  for (const auto& [R, col] : columns) {
    auto last = col.rbegin();
    double limit = last->second;
    if (col.size() >= 2) {
      auto prev = std::next(last);
      const double n = last->first, m = prev->first;
      limit = std::max(limit, (n * last->second - m * prev->second) / (n - m));
    }
    f.c_R = std::max(f.c_R, limit * R);
  }
  for (const auto& [nr, v] : points) f.c_n = std::max(f.c_n, nr.first * (v - f.c_R / nr.second));
  return f;
}

ComparisonRow compare_full_modular(const QuasiCertificate& cert, const LinearMapSet& maps, double s, int n, int R,
                                   const ModularOptions& options, const TargetComparisonInput& target) {
  check_args(maps, s, R);
  if (n < 1) throw OutOfRange("modular: comparison needs n >= 1 blocks");
  ComparisonRow row;
  row.n = n;
  row.R = R;
  const BlockTable blocks(maps, R, s, options.budget);
  LogSumExp single;
  for (double v : blocks.psi) single.add(v);
  const double scale = static_cast<double>(R) * n;
  row.full_value = single.log_value() / R;
  const auto mod = modular_pressure_sum(cert, maps, s, R * n, R, options);
  row.modular_value = mod.log_total / scale;
  row.abs_diff = std::abs(row.full_value - row.modular_value);
  SumOptions so;
  so.budget = options.budget;
  so.threads = options.threads;
  row.ordinary_value = partial_sum_plain(maps, s, R * n, so) / scale;
  row.ordinary_diff = std::abs(row.ordinary_value - row.modular_value);
  if (target.target != nullptr && target.length != nullptr) {
    row.target_full = partial_sum_connector(maps, cert, *target.target, *target.length, s, R * n, so) / scale;
    const auto tm = modular_pressure_sum_target(cert, maps, *target.target, *target.length, s, R * n, R, options);
    row.target_modular = tm.log_total / scale;
    row.target_diff = std::abs(*row.target_full - *row.target_modular);
  }
  return row;
}

ComparisonReport compare_grid(const QuasiCertificate& cert, const LinearMapSet& maps, double s,
                              const std::vector<int>& ns, const std::vector<int>& Rs,
                              const std::vector<std::pair<int, int>>& held_out, const ModularOptions& options,
                              const TargetComparisonInput& target) {
  ComparisonReport rep;
  rep.s = s;
  rep.held_out = held_out;
  std::vector<std::pair<int, int>> grid;
  for (int n : ns)
    for (int R : Rs) grid.emplace_back(n, R);
  for (const auto& h : held_out)
    if (std::find(grid.begin(), grid.end(), h) == grid.end()) grid.push_back(h);
  std::sort(grid.begin(), grid.end());
  std::vector<std::pair<std::pair<int, int>, double>> pf, po, pt;
  for (const auto& [n, R] : grid) {
    rep.rows.push_back(compare_full_modular(cert, maps, s, n, R, options, target));
    const auto& row = rep.rows.back();
    if (std::find(held_out.begin(), held_out.end(), std::make_pair(n, R)) != held_out.end()) continue;
    pf.push_back({{n, R}, row.abs_diff});
    po.push_back({{n, R}, row.ordinary_diff});
    if (row.target_diff) pt.push_back({{n, R}, *row.target_diff});
  }
  rep.fit_full = fit_envelope(pf);
  rep.fit_ordinary = fit_envelope(po);
  if (!pt.empty()) rep.fit_target = fit_envelope(pt);
  auto under = [](double v, double bound) { return v <= bound * (1.0 + 1e-9) + 1e-12; };
  rep.bound_holds = true;
  for (const auto& row : rep.rows) {
    bool ok = under(row.abs_diff, rep.fit_full.at(row.n, row.R)) &&
              under(row.ordinary_diff, rep.fit_ordinary.at(row.n, row.R));
    if (ok && row.target_diff && rep.fit_target) ok = under(*row.target_diff, rep.fit_target->at(row.n, row.R));
    if (!ok) {
      rep.bound_holds = false;
      rep.violations.emplace_back(row.n, row.R);
    }
  }
  return rep;
}

std::pair<int, int> ModularCover::z_range() const {
  const int lo = (n + R + K - 1) / (R + K);
  return {lo, 1 + n / R};
}

ModularCover build_cover(const QuasiCertificate& cert, const LinearMapSet& maps, double s, const Word& base, int n,
                         int R, const ModularOptions& options) {
  check_args(maps, s, R);
  if (n < 1) throw OutOfRange("modular: cover length n must be >= 1");
  const BlockTable blocks(maps, R, s, options.budget);
  const auto conn = ConnectorSet::build(maps, cert.K);
  ModularCover cover;
  cover.base = base;
  cover.n = n;
  cover.R = R;
  cover.K = cert.K;
  cover.z_min = std::numeric_limits<int>::max();
  std::vector<std::size_t> chosen_blocks;
  std::vector<std::size_t> chosen_conn;
  std::uint64_t nodes = 0;
  const std::size_t target_len = static_cast<std::size_t>(n);
  auto descend = [&](auto&& self, const CocycleProduct& p, double psi, std::size_t len) -> void {
    for (std::size_t b = 0; b < blocks.words.size(); ++b) {
      if (++nodes > options.budget) throw BudgetExceeded("modular: cover exceeds budget");
      std::size_t c = 0;
      if (len > 0) {
        const int g = greedy_connector(conn, p, psi, blocks.products[b], blocks.psi[b], s, cert.Q, options.tol);
        if (g < 0)
          throw NoConnector("modular: no connector reaches the quasi-additivity gap Q=" + std::to_string(cert.Q) +
                            " while building the cover");
        c = static_cast<std::size_t>(g);
      }
      const CocycleProduct q = p * conn.products[c] * blocks.products[b];
      const std::size_t next = len + conn.words[c].size() + blocks.words[b].size();
      chosen_blocks.push_back(b);
      chosen_conn.push_back(c);
      if (next >= target_len) {
        std::vector<Word> elem;
        ModularWord img;
        img.base = base;
        img.R = R;
        img.flat = base;
        for (std::size_t k = 0; k < chosen_blocks.size(); ++k) {
          elem.push_back(blocks.words[chosen_blocks[k]]);
          const Word& cw = conn.words[chosen_conn[k]];
          if (k == 0)
            img.leading = cw;
          else
            img.connectors.push_back(cw);
          img.blocks.push_back(elem.back());
          img.flat.append(cw);
          img.flat.append(elem.back());
        }
        const int z = static_cast<int>(elem.size());
        cover.z_min = std::min(cover.z_min, z);
        cover.z_max = std::max(cover.z_max, z);
        cover.elements.push_back(std::move(elem));
        cover.images.push_back(std::move(img));
      } else {
        self(self, q, q.log_phi(s), next);
      }
      chosen_blocks.pop_back();
      chosen_conn.pop_back();
    }
  };
  const auto pa = maps.product(base);
  descend(descend, pa, pa.log_phi(s), base.size());
  return cover;
}

}  // namespace shrink
