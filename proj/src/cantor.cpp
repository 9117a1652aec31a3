#include "shrink/cantor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "shrink/error.hpp"
#include "shrink/logsum.hpp"
#include "shrink/parallel.hpp"

namespace shrink {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool consistent(const Word& w, const Word& u, std::size_t from) {
  const std::size_t end = std::min(w.size(), u.size());
  for (std::size_t k = from; k < end; ++k)
    if (w[k] != u[k]) return false;
  return true;
}

}  // namespace

double BigPsi::sum(const std::vector<Word>& seq) const {
  double acc = 0.0;
  for (const auto& b : seq) acc += values[index_of(b)];
  return acc;
}

std::size_t BigPsi::index_of(const Word& b) const {
  if (static_cast<int>(b.size()) != R) throw OutOfRange("cantor: block length differs from R");
  const std::size_t N = blocks.empty() ? 0 : static_cast<std::size_t>(std::round(std::pow(blocks.size(), 1.0 / R)));
  std::size_t idx = 0;
  for (Symbol a : b) idx = idx * N + a;
  if (idx >= blocks.size()) throw OutOfRange("cantor: block outside the alphabet");
  return idx;
}

BigPsi big_psi(const LinearMapSet& maps, const LengthFunction& length, double s0, double Z, int R,
               std::uint64_t budget) {
  if (R < 1) throw OutOfRange("cantor: R must be >= 1");
  if (!(s0 >= 0.0) || s0 > maps.dim()) throw OutOfRange("cantor: s0 outside [0, d]");
  BigPsi p;
  p.s0 = s0;
  p.Z = Z;
  p.R = R;
  p.blocks = enumerate_words(maps.size(), R, budget);
  for (const auto& b : p.blocks) p.values.push_back(maps.product(b).log_phi(s0) + Z * length(b));
  return p;
}

NuR build_nu(const LinearMapSet& maps, const LengthFunction& length, double s0, double Z, int R,
             std::uint64_t budget) {
  NuR nu;
  nu.psi = big_psi(maps, length, s0, Z, R, budget);
  LogSumExp w;
  for (double v : nu.psi.values) w.add(v);
  nu.log_w = w.log_value();
  nu.w = std::exp(nu.log_w);
  for (double v : nu.psi.values) {
    nu.log_probabilities.push_back(v - nu.log_w);
    nu.probabilities.push_back(std::exp(v - nu.log_w));
  }
  return nu;
}

NormalizerCheck normalizer_check(const LinearMapSet& maps, const LengthFunction& length, double s0, double Z,
                                 const std::vector<int>& Rs, std::optional<double> bound) {
  NormalizerCheck c;
  c.bound = bound;
  c.c10 = 1.0;
  for (int R : Rs) {
    const auto nu = build_nu(maps, length, s0, Z, R);
    c.w.emplace_back(R, nu.w);
    c.c10 = std::max({c.c10, nu.w, 1.0 / nu.w});
  }
  if (bound) c.passed = c.c10 <= *bound;
  return c;
}

double log_cover_psi_sum(const QuasiCertificate& cert, const LinearMapSet& maps, const NuR& nu, const Word& base,
                         int n, const ModularOptions& options) {
  const auto cover = build_cover(cert, maps, nu.psi.s0, base, n, nu.psi.R, options);
  LogSumExp acc;
  for (const auto& e : cover.elements) acc.add(nu.psi.sum(e));
  return acc.log_value();
}

// ---------------------------------------------------------------------------

CantorTree::CantorTree(const QuasiCertificate& cert, const LinearMapSet& maps, const TargetSpec& target,
                       const LengthFunction& length, double s0, double Z, int R, const CantorOptions& options)
    : maps_(maps),
      target_(target),
      length_(length),
      conn_(ConnectorSet::build(maps, cert.K)),
      Q_(cert.Q),
      s0_(s0),
      Z_(Z),
      R_(R),
      K_(cert.K),
      options_(options) {
  if (options_.n1 <= 0) options_.n1 = 4 * R;
  if (options_.growth < 2.0) throw OutOfRange("cantor: schedule growth factor must be >= 2");
  if (options_.level_cap < 1) throw OutOfRange("cantor: level_cap must be >= 1");
  if (options_.width_cap < 1) throw OutOfRange("cantor: width_cap must be >= 1");
  nu_ = build_nu(maps, length, s0, Z, R);
  for (const auto& b : nu_.psi.blocks) block_products_.push_back(maps.product(b));
  build_levels();
}

std::size_t CantorTree::schedule(int k) const {
  if (k < 1) throw OutOfRange("cantor: levels start at 1");
  const double e = 0.5 * static_cast<double>(k) * (k - 1);
  const double v = options_.n1 * std::pow(options_.growth, e);
  if (v > 1e15) return static_cast<std::size_t>(1e15);
  return static_cast<std::size_t>(std::llround(v));
}

std::vector<std::string> CantorTree::notes() const {
  std::vector<std::string> out;
  out.push_back("schedule n_i = " + std::to_string(options_.n1) + " * " + std::to_string(options_.growth) +
                "^(i(i-1)/2)");
  if (options_.n1 == 4 * R_) out.push_back("n1 = 4R is a default choice; n1 >> R is not quantified");
  for (const auto& lv : levels_)
    if (lv.sampled)
      out.push_back("level " + std::to_string(lv.k) + " sampled with " + std::to_string(options_.width_cap) +
                    " draws");
  return out;
}

CantorTree::State CantorTree::root() const {
  State st;
  st.product = maps_.identity();
  st.blocks.emplace_back();
  return st;
}

bool CantorTree::level_ready(const State& st) const {
  return st.blocks_in_level >= 1 && st.flat.size() >= schedule(st.level);
}

void CantorTree::append_block(State& st, std::size_t b) const {
  std::size_t c = 0;
  const auto& pb = block_products_[b];
  if (!st.flat.empty()) {
    const double psi_b = pb.log_phi(s0_);
    bool found = false;
    for (std::size_t k = 0; k < conn_.size(); ++k) {
      const double v = (st.product * conn_.products[k] * pb).log_phi(s0_);
      if (v - st.psi - psi_b >= Q_ - options_.tol) {
        c = k;
        found = true;
        break;
      }
    }
    if (!found)
      throw NoConnector("cantor: no connector reaches the quasi-additivity gap Q=" + std::to_string(Q_) +
                        " while extending a word of length " + std::to_string(st.flat.size()));
  }
  st.flat.append(conn_.words[c]);
  st.block_starts.push_back(st.flat.size());
  st.flat.append(nu_.psi.blocks[b]);
  st.product = st.product * conn_.products[c] * pb;
  st.psi = st.product.log_phi(s0_);
  st.log_mass += nu_.log_probabilities[b];
  st.blocks.back().push_back(nu_.psi.blocks[b]);
  ++st.blocks_in_level;
}

void CantorTree::close_level(State& st) const {
  auto target_product = [&](std::size_t m) {
    return maps_.product(target_.prefix_exact(m));
  };
  const auto pj = target_product(floor_length(length_(st.flat)));
  const auto choice = best_connector(conn_, st.product, st.psi, pj, pj.log_phi(s0_), s0_);
  CantorSegment seg;
  seg.level_start = st.level_start;
  seg.modular_end = st.flat.size();
  st.flat.append(conn_.words[choice.index]);
  seg.connector_end = st.flat.size();
  seg.target_length = floor_length(length_(st.flat));
  st.flat.append(target_.prefix_exact(seg.target_length));
  st.product = st.product * conn_.products[choice.index] * target_product(seg.target_length);
  st.psi = st.product.log_phi(s0_);
  st.segments.push_back(seg);
  ++st.level;
  st.blocks_in_level = 0;
  st.level_start = st.flat.size();
  st.blocks.emplace_back();
}

void CantorTree::advance_random(State& st, std::mt19937_64& rng) const {
  if (level_ready(st)) {
    close_level(st);
  } else {
    append_block(st, draw_index(nu_.probabilities, rng));
  }
}

template <typename Leaf>
void CantorTree::for_each_leaf(const Word& u, Leaf&& leaf) const {
  if (u.empty()) {
    leaf(root());
    return;
  }
  auto descend = [&](auto&& self, const State& st) -> void {
    if (level_ready(st)) {
      State next = st;
      close_level(next);
      if (!consistent(next.flat, u, st.flat.size())) return;
      if (next.flat.size() >= u.size())
        leaf(next);
      else
        self(self, next);
      return;
    }
    for (std::size_t b = 0; b < nu_.probabilities.size(); ++b) {
      if (nu_.probabilities[b] <= 0.0) continue;
      State next = st;
      append_block(next, b);
      if (!consistent(next.flat, u, st.flat.size())) continue;
      if (next.flat.size() >= u.size())
        leaf(next);
      else
        self(self, next);
    }
  };
  descend(descend, root());
}

double CantorTree::measure(const Word& u) const {
  LogSumExp acc;
  for_each_leaf(u, [&](const State& st) { acc.add(st.log_mass); });
  return acc.count() == 0 ? 0.0 : std::exp(acc.log_value());
}

double CantorTree::mass(const Word& u) const {
  const double m = measure(u);
  if (!(m > 0.0)) throw NotInTree("cantor: cylinder " + u.to_string(maps_.size()) + " carries no mass");
  return m;
}

std::size_t CantorTree::representation_count(const Word& u) const {
  std::set<std::vector<std::size_t>> patterns;
  for_each_leaf(u, [&](const State& st) { patterns.insert(st.block_starts); });
  return patterns.size();
}

double CantorTree::product_mass(const Word& u) const {
  std::optional<double> first;
  for_each_leaf(u, [&](const State& st) {
    if (!first) first = std::exp(st.log_mass);
  });
  if (!first) throw NotInTree("cantor: cylinder " + u.to_string(maps_.size()) + " carries no mass");
  return *first;
}

Word CantorTree::sample_extension(const Word& prefix, std::size_t depth, std::mt19937_64& rng) const {
  std::vector<State> leaves;
  std::vector<double> logw;
  for_each_leaf(prefix, [&](const State& st) {
    leaves.push_back(st);
    logw.push_back(st.log_mass);
  });
  if (leaves.empty()) throw NotInTree("cantor: cannot condition on " + prefix.to_string(maps_.size()));
  const double top = *std::max_element(logw.begin(), logw.end());
  std::vector<double> w;
  for (double v : logw) w.push_back(std::exp(v - top));
  State st = leaves[draw_index(w, rng)];
  while (st.flat.size() < depth) advance_random(st, rng);
  return st.flat.prefix(std::max(depth, prefix.size()));
}

void CantorTree::build_levels() {
  struct Entry {
    CantorNode node;
    State state;
  };
  std::vector<Entry> current;
  {
    Entry e;
    e.node.mass = 1.0;
    e.state = root();
    current.push_back(std::move(e));
  }
  for (int k = 1; k <= options_.level_cap; ++k) {
    // exhaustive children, aborted once the level grows past width_cap
    std::vector<std::vector<Entry>> parts(current.size());
    bool overflow = false;
    std::size_t total = 0;
    const std::size_t cap = options_.width_cap;
    for (std::size_t p = 0; p < current.size() && !overflow; ++p) {
      const Entry& parent = current[p];
      auto descend = [&](auto&& self, const State& st) -> void {
        if (overflow) return;
        if (level_ready(st)) {
          State next = st;
          close_level(next);
          Entry child;
          child.node.flat = next.flat;
          child.node.mass = parent.node.mass * std::exp(next.log_mass - parent.state.log_mass);
          child.node.blocks = next.blocks;
          child.node.blocks.pop_back();
          child.node.segments = next.segments;
          child.state = std::move(next);
          parts[p].push_back(std::move(child));
          if (++total > cap) overflow = true;
          return;
        }
        for (std::size_t b = 0; b < nu_.probabilities.size() && !overflow; ++b) {
          if (nu_.probabilities[b] <= 0.0) continue;
          State next = st;
          append_block(next, b);
          self(self, next);
        }
      };
      descend(descend, parent.state);
    }
    std::vector<Entry> raw;
    if (!overflow) {
      for (auto& part : parts)
        for (auto& e : part) raw.push_back(std::move(e));
    } else {
      parts.clear();
      std::mt19937_64 rng(options_.seed * 0x9E3779B97F4A7C15ull + static_cast<std::uint64_t>(k));
      std::vector<double> weights;
      for (const auto& e : current) weights.push_back(e.node.mass);
      const double each = 1.0 / static_cast<double>(cap);
      for (std::size_t i = 0; i < cap; ++i) {
        const Entry& parent = current[draw_index(weights, rng)];
        State st = parent.state;
        while (st.level == k) advance_random(st, rng);
        Entry child;
        child.node.flat = st.flat;
        child.node.mass = each;
        child.node.blocks = st.blocks;
        child.node.blocks.pop_back();
        child.node.segments = st.segments;
        child.state = std::move(st);
        raw.push_back(std::move(child));
      }
    }
    // merge repeated words, summing their masses
    std::map<Word, std::size_t> index;
    std::vector<Entry> merged;
    for (auto& e : raw) {
      auto it = index.find(e.node.flat);
      if (it == index.end()) {
        index.emplace(e.node.flat, merged.size());
        merged.push_back(std::move(e));
      } else {
        merged[it->second].node.mass += e.node.mass;
        ++merged[it->second].node.multiplicity;
      }
    }
    std::vector<Entry> sorted;
    sorted.reserve(merged.size());
    for (const auto& [w, i] : index) sorted.push_back(std::move(merged[i]));
    CantorLevel level;
    level.k = k;
    level.n_k = schedule(k);
    level.sampled = overflow;
    for (const auto& e : sorted) {
      level.nodes.push_back(e.node);
      level.mass_sum += e.node.mass;
    }
    levels_.push_back(std::move(level));
    current = std::move(sorted);
  }
}

std::size_t CantorTree::replay_mismatches() const {
  std::size_t bad = 0;
  for (const auto& lv : levels_) {
    for (const auto& node : lv.nodes) {
      std::size_t pos = 0;
      for (const auto& seg : node.segments) {
        if (seg.level_start != pos || seg.modular_end < seg.level_start || seg.connector_end < seg.modular_end ||
            seg.connector_end - seg.modular_end > static_cast<std::size_t>(K_)) {
          ++bad;
          break;
        }
        const Word head = node.flat.prefix(seg.connector_end);
        const std::size_t m = floor_length(length_(head));
        if (m != seg.target_length || seg.connector_end + m > node.flat.size()) {
          ++bad;
          break;
        }
        bool ok = true;
        for (std::size_t i = 0; i < m; ++i)
          if (node.flat[seg.connector_end + i] != target_.at(i)) ok = false;
        if (!ok) {
          ++bad;
          break;
        }
        pos = seg.connector_end + m;
      }
      if (pos != node.flat.size()) ++bad;
    }
  }
  return bad;
}

ConcentrationReport concentration_check(const CantorTree& tree, const LinearMapSet& maps, double s, double t,
                                        const ConcentrationOptions& options) {
  const double top = std::min(tree.s0(), static_cast<double>(maps.dim()));
  if (!(s >= 0.0) || !(s < t) || !(t < top)) throw OutOfRange("cantor: need 0 <= s < t < min(s0, d)");
  if (options.samples < 1 || options.max_depth < 1) throw OutOfRange("cantor: samples and depth must be >= 1");
  ConcentrationReport rep;
  rep.s = s;
  rep.t = t;
  rep.samples = options.samples;
  rep.max_depth = options.max_depth;
  rep.per_depth_max.assign(static_cast<std::size_t>(options.max_depth), -kInf);
  rep.max_log_ratio = -kInf;
  std::mt19937_64 rng(options.seed);
  const std::size_t D = static_cast<std::size_t>(options.max_depth);
  for (int i = 0; i < options.samples; ++i) {
    const Word w = tree.sample(D, rng);
    CocycleProduct p = maps.identity();
    for (std::size_t n = 1; n <= D; ++n) {
      p *= maps.generator(w[n - 1]);
      const Word u = w.prefix(n);
      const double lr = std::log(tree.mass(u)) - p.log_phi(t);
      rep.log_ratios.push_back(lr);
      auto& slot = rep.per_depth_max[n - 1];
      slot = std::max(slot, lr);
      if (lr > rep.max_log_ratio) {
        rep.max_log_ratio = lr;
        rep.worst_prefix = u;
      }
    }
  }
  // least squares line through (n, max ratio), then the lowest intercept
  // keeping every point below it
  double sn = 0, sy = 0, snn = 0, sny = 0;
  const double m = static_cast<double>(D);
  for (std::size_t n = 1; n <= D; ++n) {
    const double y = rep.per_depth_max[n - 1];
    sn += n;
    sy += y;
    snn += static_cast<double>(n) * n;
    sny += n * y;
  }
  rep.slope = D > 1 ? (m * sny - sn * sy) / (m * snn - sn * sn) : 0.0;
  rep.intercept = -kInf;
  for (std::size_t n = 1; n <= D; ++n)
    rep.intercept = std::max(rep.intercept, rep.per_depth_max[n - 1] - rep.slope * static_cast<double>(n));
  for (const auto& lv : tree.levels()) {
    rep.level_mass_sums.push_back(lv.mass_sum);
    rep.mass_error = std::max(rep.mass_error, std::abs(lv.mass_sum - 1.0));
  }
  // a single constant C bounds the ratio unless it grows: growth shows as a
  // positive trend and the deeper half of the prefixes climbing above the
  // shallower half, so either one being absent passes
  double shallow = -kInf, deep = -kInf;
  for (std::size_t n = 1; n <= D; ++n) {
    double& half = 2 * n <= D ? shallow : deep;
    half = std::max(half, rep.per_depth_max[n - 1]);
  }
  rep.tail_excess = D > 1 ? deep - shallow : 0.0;
  rep.passed = std::isfinite(rep.max_log_ratio) && (rep.tail_excess <= 1e-9 || rep.slope <= 0.0) &&
               rep.mass_error <= 1e-10;
  if (!rep.passed) {
    rep.note = "cantor: concentration bound mu[w|n] <= C phi^t(w|n) fails to level off; worst prefix " +
               rep.worst_prefix.to_string(maps.size());
  }
  return rep;
}

MultiplicityReport multiplicity_check(const CantorTree& tree, int n) {
  MultiplicityReport rep;
  rep.n = n;
  rep.bound = std::pow(tree.K() + 1.0, static_cast<double>(n) / tree.R());
  for (const auto& u : enumerate_words(tree.alphabet(), n, 1ull << 20))
    rep.max_count = std::max(rep.max_count, tree.representation_count(u));
  rep.passed = static_cast<double>(rep.max_count) <= rep.bound + 1e-9;
  return rep;
}

}  // namespace shrink
