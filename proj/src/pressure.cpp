#include "shrink/pressure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "shrink/error.hpp"
#include "shrink/logsum.hpp"
#include "shrink/parallel.hpp"

namespace shrink {

namespace {

constexpr int kPartitionDepth = 2;
constexpr double kInf = std::numeric_limits<double>::infinity();

bool type_class_eligible(const LinearMapSet& maps, const LengthFunction* length) {
  return maps.diagonal() && (length == nullptr || length->is_birkhoff());
}

const LinearMapSet& need_maps(const PressureProblem& p) {
  if (p.maps == nullptr) throw ValidationError("pressure: problem has no maps");
  return *p.maps;
}
const TargetSpec& need_target(const PressureProblem& p) {
  if (p.target == nullptr) throw ValidationError("pressure: problem has no target");
  return *p.target;
}
const LengthFunction& need_length(const PressureProblem& p) {
  if (p.length == nullptr) throw ValidationError("pressure: problem has no length function");
  return *p.length;
}

void check_s(const LinearMapSet& maps, double s) {
  if (!(s >= 0.0) || s > maps.dim()) throw OutOfRange("pressure: s outside [0, d]");
}

double enumerate_sum(const LinearMapSet& maps, const LengthFunction* length, int n, const SumOptions& options,
                     const Summand& summand) {
  word_count(maps.size(), n, options.budget);
  const int p = std::min(n, kPartitionDepth);
  const auto prefixes = enumerate_words(maps.size(), p, options.budget);
  std::vector<LogSumExp> slots(prefixes.size());
  run_partitions(prefixes.size(), options.threads, [&](std::size_t k) {
    LogSumExp& acc = slots[k];
    for_each_word_product(maps, static_cast<std::size_t>(n), prefixes[k],
                          [&](const Word& w, const CocycleProduct& prod) {
                            const double ell = length ? (*length)(w) : 0.0;
                            acc.add(summand(prod, ell));
                          });
  });
  LogSumExp total;
  for (const auto& s : slots) total.merge(s);
  return total.log_value();
}

// Calls fn(counts) for every vector of N nonnegative counts summing to n,
// with counts[0] fixed, lexicographic in the remaining entries.
template <typename Fn>
void for_each_composition_tail(std::vector<int>& counts, std::size_t pos, int remaining, Fn&& fn) {
  if (pos + 1 == counts.size()) {
    counts[pos] = remaining;
    fn(static_cast<const std::vector<int>&>(counts));
    return;
  }
  for (int c = 0; c <= remaining; ++c) {
    counts[pos] = c;
    for_each_composition_tail(counts, pos + 1, remaining - c, fn);
  }
}

double type_class_sum(const LinearMapSet& maps, const LengthFunction* length, int n, const SumOptions& options,
                      const Summand& summand) {
  const int N = maps.size();
  const int d = maps.dim();
  std::vector<std::array<double, kMaxDim>> logs(static_cast<std::size_t>(N));
  for (int a = 0; a < N; ++a) logs[static_cast<std::size_t>(a)] = maps.generator(a).log_diagonal();
  const double lg_n = std::lgamma(n + 1.0);

  std::vector<LogSumExp> slots(static_cast<std::size_t>(n) + 1);
  run_partitions(slots.size(), options.threads, [&](std::size_t first) {
    std::vector<int> counts(static_cast<std::size_t>(N), 0);
    counts[0] = static_cast<int>(first);
    auto visit = [&](const std::vector<int>& c) {
      std::array<double, kMaxDim> acc{};
      double lmult = lg_n;
      for (int a = 0; a < N; ++a) {
        const int ca = c[static_cast<std::size_t>(a)];
        lmult -= std::lgamma(ca + 1.0);
        for (int k = 0; k < d; ++k) acc[static_cast<std::size_t>(k)] += ca * logs[static_cast<std::size_t>(a)][static_cast<std::size_t>(k)];
      }
      const auto prod = CocycleProduct::diagonal_from_logs(acc.data(), d);
      const double ell = length ? length->from_counts(c) : 0.0;
      slots[first].add(lmult + summand(prod, ell));
    };
    if (N == 1) {
      if (static_cast<int>(first) == n) visit(counts);
      return;
    }
    for_each_composition_tail(counts, 1, n - static_cast<int>(first), visit);
  });
  LogSumExp total;
  for (const auto& s : slots) total.merge(s);
  return total.log_value();
}

std::size_t target_depth_for(const LengthFunction& length, int n) {
  return floor_length(length.max_value_upto(n)) + 1;
}

double tail_max_of(const std::vector<std::pair<int, double>>& values) {
  double best = -kInf;
  const std::size_t start = values.size() / 2;
  for (std::size_t k = start; k < values.size(); ++k) best = std::max(best, values[k].second);
  return best;
}

LengthStats stats_for(const PressureProblem& p) {
  if (p.stats) return *p.stats;
  return length_stats(need_length(p), 6);
}

}  // namespace

std::string to_string(PotentialKind kind) {
  switch (kind) {
    case PotentialKind::plain:
      return "plain";
    case PotentialKind::full_target:
      return "full_target";
    case PotentialKind::connector_target:
      return "connector_target";
    case PotentialKind::ell_window:
      return "ell_window";
    case PotentialKind::psi_big:
      return "psi_big";
  }
  return "plain";
}

PotentialKind potential_kind_from_string(const std::string& name) {
  if (name == "plain") return PotentialKind::plain;
  if (name == "full_target") return PotentialKind::full_target;
  if (name == "connector_target") return PotentialKind::connector_target;
  if (name == "ell_window") return PotentialKind::ell_window;
  if (name == "psi_big") return PotentialKind::psi_big;
  throw ValidationError("pressure: unknown potential kind '" + name + "'");
}

std::string to_string(Trend t) {
  switch (t) {
    case Trend::decaying:
      return "decaying";
    case Trend::growing:
      return "growing";
    case Trend::flat:
      return "flat";
    case Trend::mixed:
      return "mixed";
  }
  return "mixed";
}

TargetPrefixProducts::TargetPrefixProducts(const LinearMapSet& maps, const TargetSpec& target, std::size_t depth) {
  available_ = std::min(depth, target.available_depth());
  products_.reserve(available_ + 1);
  products_.push_back(maps.identity());
  for (std::size_t m = 1; m <= available_; ++m) products_.push_back(products_.back() * maps.generator(target.at(m - 1)));
  available_ = target.available_depth();
}

const CocycleProduct& TargetPrefixProducts::at(std::size_t m) const {
  if (m >= products_.size()) {
    if (m > available_) {
      throw PrefixExhausted("target: prefix of length " + std::to_string(m) + " requested, only " +
                            std::to_string(available_) + " symbols sampled");
    }
    throw DepthExceeded("target: prefix cache built to depth " + std::to_string(depth()) + ", need " +
                        std::to_string(m));
  }
  return products_[m];
}

double log_level_sum(const LinearMapSet& maps, const LengthFunction* length, int n, const SumOptions& options,
                     const Summand& summand) {
  if (n < 0) throw OutOfRange("pressure: negative depth");
  bool classes = false;
  switch (options.strategy) {
    case SumStrategy::enumerate:
      break;
    case SumStrategy::type_classes:
      if (!type_class_eligible(maps, length)) {
        throw ValidationError("pressure: type-class sums need diagonal maps and a Birkhoff length");
      }
      classes = true;
      break;
    case SumStrategy::automatic:
      try {
        word_count(maps.size(), n, options.budget);
      } catch (const BudgetExceeded&) {
        if (!type_class_eligible(maps, length)) throw;
        classes = true;
      }
      break;
  }
  return classes ? type_class_sum(maps, length, n, options, summand) : enumerate_sum(maps, length, n, options, summand);
}

double partial_sum_plain(const LinearMapSet& maps, double s, int n, const SumOptions& options) {
  check_s(maps, s);
  return log_level_sum(maps, nullptr, n, options, [s](const CocycleProduct& p, double) { return p.log_phi(s); });
}

double partial_sum_full(const LinearMapSet& maps, const TargetSpec& target, const LengthFunction& length, double s,
                        int n, const SumOptions& options) {
  check_s(maps, s);
  const TargetPrefixProducts tp(maps, target, target_depth_for(length, n));
  return log_level_sum(maps, &length, n, options, [&](const CocycleProduct& p, double ell) {
    return (p * tp.at(floor_length(ell))).log_phi(s);
  });
}

TargetConnector target_connector(const LinearMapSet& maps, const ConnectorSet& connectors, const TargetSpec& target,
                                 const LengthFunction& length, const Word& i, double s) {
  const auto pi = maps.product(i);
  const auto pj = maps.product(target.prefix(length(i)));
  const auto choice = best_connector(connectors, pi, pi.log_phi(s), pj, pj.log_phi(s), s);
  TargetConnector tc;
  tc.connector = connectors.words[choice.index];
  tc.gap = choice.gap;
  tc.target_length = floor_length(length(i + tc.connector));
  return tc;
}

double partial_sum_connector(const LinearMapSet& maps, const QuasiCertificate& cert, const TargetSpec& target,
                             const LengthFunction& length, double s, int n, const SumOptions& options) {
  check_s(maps, s);
  if (!cert.covers(s)) throw OutOfRange("pressure: certificate does not cover s");
  const auto connectors = ConnectorSet::build(maps, cert.K);
  const TargetPrefixProducts tp(maps, target, target_depth_for(length, n + cert.K));
  word_count(maps.size(), n, options.budget);
  const int p = std::min(n, kPartitionDepth);
  const auto prefixes = enumerate_words(maps.size(), p, options.budget);
  std::vector<LogSumExp> slots(prefixes.size());
  run_partitions(prefixes.size(), options.threads, [&](std::size_t k) {
    Word ic;
    for_each_word_product(maps, static_cast<std::size_t>(n), prefixes[k], [&](const Word& w, const CocycleProduct& pi) {
      const auto& pj = tp.at(floor_length(length(w)));
      const auto choice = best_connector(connectors, pi, pi.log_phi(s), pj, pj.log_phi(s), s);
      ic = w;
      ic.append(connectors.words[choice.index]);
      const auto& pj2 = tp.at(floor_length(length(ic)));
      slots[k].add((pi * connectors.products[choice.index] * pj2).log_phi(s));
    });
  });
  LogSumExp total;
  for (const auto& sl : slots) total.merge(sl);
  return total.log_value();
}

LyapunovEstimate lyapunov_Z(const LinearMapSet& maps, const TargetSpec& target, double s,
                            const std::vector<int>& n_list) {
  check_s(maps, s);
  if (n_list.empty()) throw OutOfRange("pressure: empty depth list");
  LyapunovEstimate est;
  est.s = s;
  std::vector<int> ns = n_list;
  std::sort(ns.begin(), ns.end());
  if (ns.front() < 1) throw OutOfRange("pressure: Lyapunov depths must be >= 1");
  CocycleProduct p = maps.identity();
  std::size_t next = 0;
  for (int m = 1; m <= ns.back(); ++m) {
    p *= maps.generator(target.at(static_cast<std::size_t>(m - 1)));
    while (next < ns.size() && ns[next] == m) {
      est.depth_sequence.emplace_back(m, p.log_phi(s) / m);
      ++next;
    }
  }
  est.Z = est.depth_sequence.back().second;
  double lo = kInf, hi = -kInf;
  for (std::size_t k = est.depth_sequence.size() / 2; k < est.depth_sequence.size(); ++k) {
    lo = std::min(lo, est.depth_sequence[k].second);
    hi = std::max(hi, est.depth_sequence[k].second);
  }
  est.Z_star = hi;
  est.cesaro_spread = hi - lo;
  return est;
}

namespace {

double lyapunov_for_bracket(const PressureProblem& p, double s, int n_max) {
  const auto& target = need_target(p);
  std::size_t depth = std::max<std::size_t>(64, target_depth_for(need_length(p), n_max));
  depth = std::min(depth, target.available_depth());
  if (depth == 0) throw PrefixExhausted("target: no symbols available");
  return lyapunov_Z(need_maps(p), target, s, {static_cast<int>(depth)}).Z;
}

double kind_log_sum(PotentialKind kind, const PressureProblem& p, double s, int n) {
  switch (kind) {
    case PotentialKind::plain:
      return partial_sum_plain(need_maps(p), s, n, p.options);
    case PotentialKind::full_target:
      return partial_sum_full(need_maps(p), need_target(p), need_length(p), s, n, p.options);
    case PotentialKind::connector_target:
      if (p.cert == nullptr) throw ValidationError("pressure: connector potential needs a certificate");
      return partial_sum_connector(need_maps(p), *p.cert, need_target(p), need_length(p), s, n, p.options);
    case PotentialKind::ell_window:
    case PotentialKind::psi_big:
      break;
  }
  throw OutOfRange("pressure: kind " + to_string(kind) + " has no level sums");
}

Bracket plain_bracket(const PressureProblem& p, double s, const std::vector<std::pair<int, double>>& log_sums) {
  Bracket b;
  b.basis = "fekete_upper";
  double upper = kInf;
  for (const auto& [n, ls] : log_sums) upper = std::min(upper, ls / n);
  b.upper = upper;
  if (p.cert != nullptr && p.cert->covers(s)) {
    const double s1 = partial_sum_plain(need_maps(p), s, 1, p.options);
    const double K = p.cert->K;
    const double shift = p.cert->Q - std::log(K + 1.0) - K * std::max(0.0, s1);
    double lower = -kInf;
    for (const auto& [n, ls] : log_sums) lower = std::max(lower, (ls + shift) / n);
    b.lower = std::min(lower, upper);
    b.basis += "+quasi_additive_lower(empirical Q)";
  }
  return b;
}

// Bracket for sums spliced with the Lyapunov exponent: T_n = sum phi^s(i) e^{Z l(i)}.
Bracket spliced_bracket(const PressureProblem& p, double s, const std::vector<int>& ns) {
  const auto& maps = need_maps(p);
  const auto& length = need_length(p);
  const double Z = lyapunov_for_bracket(p, s, ns.back());
  const LengthStats st = stats_for(p);
  const double kappa = length.kappa();
  const Summand spliced = [s, Z](const CocycleProduct& prod, double ell) { return prod.log_phi(s) + Z * ell; };

  Bracket b;
  b.basis = "lyapunov_splice(Z=" + std::to_string(Z) + ",assumes Z exact):fekete_upper";
  std::vector<std::pair<int, double>> t;
  for (int n : ns) t.emplace_back(n, log_level_sum(maps, &length, n, p.options, spliced));
  double upper = kInf;
  for (const auto& [n, lt] : t) upper = std::min(upper, (lt + std::abs(Z) * kappa) / n);
  b.upper = upper;
  if (p.cert != nullptr && p.cert->covers(s)) {
    const double t1 = log_level_sum(maps, &length, 1, p.options, spliced);
    const double K = p.cert->K;
    const double logC = std::abs(Z) * kappa + std::max(0.0, t1);
    const double shift = p.cert->Q - std::abs(Z) * (K * st.H + 2.0 * kappa) - std::log(K + 1.0) - K * logC;
    double lower = -kInf;
    for (const auto& [n, lt] : t) lower = std::max(lower, (lt + shift) / n);
    b.lower = std::min(lower, upper);
    b.basis += "+quasi_additive_lower(empirical Q)";
  }
  return b;
}

}  // namespace

PressureEstimate estimate_pressure(PotentialKind kind, const PressureProblem& problem, double s,
                                   const std::vector<int>& n_list) {
  if (n_list.empty()) throw OutOfRange("pressure: empty depth list");
  if (!std::is_sorted(n_list.begin(), n_list.end()) || n_list.front() < 1) {
    throw OutOfRange("pressure: depth list must be ascending and positive");
  }
  if (kind == PotentialKind::ell_window) return ell_pressure(problem, s, n_list).estimate;
  if (kind == PotentialKind::psi_big) throw OutOfRange("pressure: psi_big sums are evaluated by the measure module");
  check_s(need_maps(problem), s);

  PressureEstimate est;
  est.kind = kind;
  est.s = s;
  std::vector<std::pair<int, double>> log_sums;
  for (int n : n_list) {
    const double ls = kind_log_sum(kind, problem, s, n);
    log_sums.emplace_back(n, ls);
    est.values.emplace_back(n, ls / n);
  }
  est.depth = n_list.back();
  est.log_sum = log_sums.back().second;
  est.value = est.log_sum / est.depth;
  est.tail_max = tail_max_of(est.values);
  if (kind == PotentialKind::plain) {
    est.bracket = plain_bracket(problem, s, log_sums);
  } else {
    est.bracket = spliced_bracket(problem, s, n_list);
  }
  return est;
}

namespace {

double zero_value(const PressureProblem& p, PotentialKind kind, double s, int n) {
  if (kind == PotentialKind::ell_window) {
    return ell_pressure(p, s, {n}).estimate.value;
  }
  return kind_log_sum(kind, p, s, n) / n;
}

struct Bisection {
  double s0;
  bool clamped;
  int iterations;
  double v_lo;
  double v_hi;
};

Bisection bisect(const PressureProblem& p, PotentialKind kind, int n, double tol_s, double lo, double hi) {
  Bisection b{};
  b.v_lo = zero_value(p, kind, lo, n);
  b.v_hi = zero_value(p, kind, hi, n);
  const double d = need_maps(p).dim();
  if (b.v_hi > 0.0) {
    if (hi >= d) {
      b.s0 = d;
      b.clamped = true;
      return b;
    }
    throw NonBracketing("pressure: no sign change on [" + std::to_string(lo) + ", " + std::to_string(hi) +
                        "] at depth " + std::to_string(n) + ": values " + std::to_string(b.v_lo) + ", " +
                        std::to_string(b.v_hi));
  }
  if (!(b.v_lo > 0.0)) {
    throw NonBracketing("pressure: no sign change on [" + std::to_string(lo) + ", " + std::to_string(hi) +
                        "] at depth " + std::to_string(n) + ": values " + std::to_string(b.v_lo) + ", " +
                        std::to_string(b.v_hi));
  }
  while (hi - lo > tol_s) {
    const double mid = 0.5 * (lo + hi);
    ++b.iterations;
    if (zero_value(p, kind, mid, n) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  b.s0 = 0.5 * (lo + hi);
  return b;
}

}  // namespace

ZeroResult find_zero(const PressureProblem& problem, int n, double tol_s, const ZeroOptions& options) {
  if (!(tol_s > 0.0)) throw OutOfRange("pressure: tolerance must be positive");
  if (n < 1) throw OutOfRange("pressure: depth must be >= 1");
  const auto& maps = need_maps(problem);
  double lo = 0.0, hi = maps.dim();
  if (options.bracket) {
    lo = options.bracket->first;
    hi = options.bracket->second;
    if (!(lo >= 0.0 && hi <= maps.dim() && lo < hi)) throw OutOfRange("pressure: bad starting interval");
  }
  ZeroResult res;
  auto b = bisect(problem, options.kind, n, tol_s, lo, hi);
  res.s0 = b.s0;
  res.clamped = b.clamped;
  res.iterations = b.iterations;
  res.value_low = b.v_lo;
  res.value_high = b.v_hi;
  res.depth = n;
  res.depth_trace.emplace_back(n, b.s0);
  if (options.refine && !b.clamped) {
    const int cap = options.max_depth > 0 ? options.max_depth : 8 * n;
    int depth = n;
    while (2 * depth <= cap) {
      depth *= 2;
      Bisection next{};
      try {
        next = bisect(problem, options.kind, depth, tol_s, lo, hi);
      } catch (const BudgetExceeded&) {
        res.note = "refinement stopped at depth " + std::to_string(depth / 2) + ": budget";
        break;
      }
      res.depth_trace.emplace_back(depth, next.s0);
      const double moved = std::abs(next.s0 - res.s0);
      res.s0 = next.s0;
      res.clamped = next.clamped;
      res.depth = depth;
      res.iterations += next.iterations;
      if (moved < tol_s) break;
    }
  }
  if (res.note.empty()) res.note = "depth-stability stopping rule; no effective convergence rate";
  if (options.kind != PotentialKind::ell_window) {
    std::vector<int> ns{std::max(1, res.depth / 2), res.depth};
    if (ns[0] == ns[1]) ns.pop_back();
    res.at_zero = estimate_pressure(options.kind, problem, res.s0, ns);
  } else {
    res.at_zero = ell_pressure(problem, res.s0, {res.depth}).estimate;
  }
  return res;
}

namespace {

struct WindowAccumulator {
  LogSumExp target;
  LogSumExp lyapunov;
  std::uint64_t words = 0;
};

}  // namespace

EllPressure ell_pressure(const PressureProblem& problem, double s, const std::vector<int>& windows,
                         const EllOptions& options) {
  const auto& maps = need_maps(problem);
  const auto& length = need_length(problem);
  const auto& target = need_target(problem);
  check_s(maps, s);
  if (windows.empty()) throw OutOfRange("pressure: empty window list");
  const LengthStats st = stats_for(problem);
  const double H = st.H;
  const int wmax = *std::max_element(windows.begin(), windows.end());

  EllPressure out;
  out.H = H;
  out.closed = options.closed;
  if (options.z_star) {
    out.z_star = *options.z_star;
  } else {
    const std::size_t depth = std::min<std::size_t>(std::max<std::size_t>(64, static_cast<std::size_t>(wmax + H) + 1),
                                                    target.available_depth());
    out.z_star = lyapunov_Z(maps, target, s, {static_cast<int>(depth / 2), static_cast<int>(depth)}).Z_star;
  }
  const double Zs = out.z_star;
  const TargetPrefixProducts tp(maps, target, floor_length(wmax + H) + 1);

  auto in_window = [&](double ell, int n) {
    if (ell < n - 1e-9) return false;
    return options.closed ? ell <= n + H + 1e-9 : ell < n + H - 1e-9;
  };
  auto beyond = [&](double ell, int n) { return options.closed ? ell > n + H + 1e-9 : ell >= n + H - 1e-9; };

  for (int n : windows) {
    if (n < 1) throw OutOfRange("pressure: windows must be >= 1");
    WindowAccumulator total;
    auto add = [&](WindowAccumulator& acc, const CocycleProduct& p, double ell, double log_mult) {
      acc.target.add(log_mult + (p * tp.at(floor_length(ell))).log_phi(s));
      acc.lyapunov.add(log_mult + p.log_phi(s) + Zs * ell);
    };

    bool classes = false;
    if (type_class_eligible(maps, &length)) {
      const double wmin = *std::min_element(length.weights().begin(), length.weights().end());
      const int max_len = static_cast<int>(std::ceil((n + H) / wmin));
      if (problem.options.strategy == SumStrategy::type_classes) {
        classes = true;
      } else if (problem.options.strategy == SumStrategy::automatic) {
        try {
          word_count_upto(maps.size(), max_len, problem.options.budget);
        } catch (const BudgetExceeded&) {
          classes = true;
        }
      }
      if (classes) {
        const int N = maps.size();
        const int d = maps.dim();
        for (int m = 1; m <= max_len; ++m) {
          const double lg = std::lgamma(m + 1.0);
          std::vector<int> counts(static_cast<std::size_t>(N), 0);
          for (int first = 0; first <= m; ++first) {
            counts[0] = first;
            auto visit = [&](const std::vector<int>& c) {
              const double ell = length.from_counts(c);
              if (!in_window(ell, n)) return;
              std::array<double, kMaxDim> acc{};
              double lmult = lg;
              for (int a = 0; a < N; ++a) {
                const int ca = c[static_cast<std::size_t>(a)];
                lmult -= std::lgamma(ca + 1.0);
                const auto& la = maps.generator(a).log_diagonal();
                for (int k = 0; k < d; ++k) acc[static_cast<std::size_t>(k)] += ca * la[static_cast<std::size_t>(k)];
              }
              add(total, CocycleProduct::diagonal_from_logs(acc.data(), d), ell, lmult);
              total.words += static_cast<std::uint64_t>(std::llround(std::exp(std::min(lmult, 60.0))));
            };
            if (N == 1) {
              if (first == m) visit(counts);
            } else {
              for_each_composition_tail(counts, 1, m - first, visit);
            }
          }
        }
      }
    }
    if (!classes) {
      // Depth-first search from each first symbol; lengths are positive so a
      // branch stops once it passes the window (tables stop at their depth).
      const int N = maps.size();
      std::vector<WindowAccumulator> parts(static_cast<std::size_t>(N));
      std::vector<std::uint64_t> nodes(static_cast<std::size_t>(N), 0);
      const int depth_cap = length.is_birkhoff() ? std::numeric_limits<int>::max() : length.max_depth();
      run_partitions(parts.size(), problem.options.threads, [&](std::size_t first) {
        Word w;
        std::vector<CocycleProduct> stack;
        std::function<void()> dfs = [&]() {
          if (++nodes[first] > problem.options.budget) {
            throw BudgetExceeded("pressure: window enumeration exceeds budget " +
                                 std::to_string(problem.options.budget));
          }
          const double ell = length(w);
          if (in_window(ell, n)) {
            add(parts[first], stack.back(), ell, 0.0);
            ++parts[first].words;
          }
          if (length.is_birkhoff() && beyond(ell, n)) return;
          if (static_cast<int>(w.size()) >= depth_cap) return;
          for (int a = 0; a < N; ++a) {
            w.push_back(static_cast<Symbol>(a));
            stack.push_back(stack.back() * maps.generator(a));
            dfs();
            stack.pop_back();
            w.pop_back();
          }
        };
        w.push_back(static_cast<Symbol>(first));
        stack.push_back(maps.generator(static_cast<int>(first)));
        dfs();
      });
      for (const auto& part : parts) {
        total.target.merge(part.target);
        total.lyapunov.merge(part.lyapunov);
        total.words += part.words;
      }
    }
    EllWindow row;
    row.n = n;
    row.words = total.words;
    row.log_sum_target = total.target.log_value();
    row.log_sum_lyapunov = total.lyapunov.log_value();
    row.value_target = row.log_sum_target / n;
    row.value_lyapunov = row.log_sum_lyapunov / n;
    out.windows.push_back(row);
  }

  auto& est = out.estimate;
  est.kind = PotentialKind::ell_window;
  est.s = s;
  const auto& last = *std::max_element(out.windows.begin(), out.windows.end(),
                                       [](const EllWindow& a, const EllWindow& b) { return a.n < b.n; });
  est.depth = last.n;
  est.log_sum = last.log_sum_target;
  est.value = last.value_target;
  for (const auto& w : out.windows) est.values.emplace_back(w.n, w.value_target);
  est.tail_max = tail_max_of(est.values);
  Bracket b;
  b.basis = "fekete_upper_of_lyapunov_window_variant(Z*=" + std::to_string(Zs) + ")";
  double upper = kInf;
  for (const auto& w : out.windows) upper = std::min(upper, w.value_lyapunov);
  b.upper = upper;
  est.bracket = b;
  return out;
}

ZeroCoincidence zero_coincidence_check(const PressureProblem& problem, double s0, const std::vector<int>& windows,
                                       double tol, const EllOptions& options) {
  ZeroCoincidence z;
  z.s0 = s0;
  z.tol = tol;
  z.ell = ell_pressure(problem, s0, windows, options);
  z.value = z.ell.estimate.value;
  z.bracket_width = z.ell.estimate.bracket ? z.ell.estimate.bracket->width() : 0.0;
  z.passed = std::abs(z.value) <= tol + z.bracket_width;
  return z;
}

CoveringTable covering_sum_experiment(const AffineIFS& ifs, const TargetSpec& target, const LengthFunction& length,
                                      const std::vector<double>& s_list, const std::vector<int>& n_list,
                                      double epsilon, const SumOptions& options) {
  if (s_list.empty() || n_list.empty()) throw OutOfRange("pressure: empty covering grid");
  const auto& maps = ifs.linear();
  const int nmax = *std::max_element(n_list.begin(), n_list.end());
  const TargetPrefixProducts tp(maps, target, target_depth_for(length, nmax));
  CoveringTable table;
  table.epsilon = epsilon;
  for (double s : s_list) {
    std::vector<double> slopes;
    std::optional<std::pair<int, double>> prev;
    for (int n : n_list) {
      CoveringRow row;
      row.s = s;
      row.n = n;
      row.log_sum = log_level_sum(maps, &length, n, options, [&](const CocycleProduct& p, double ell) {
        const auto cc = cylinder_cover_count(ifs, p * tp.at(floor_length(ell)), s);
        return cc.log_count + s * cc.log_side;
      });
      if (prev) {
        row.slope = (row.log_sum - prev->second) / (n - prev->first);
        slopes.push_back(*row.slope);
      }
      prev = std::make_pair(n, row.log_sum);
      table.rows.push_back(row);
    }
    Trend t = Trend::mixed;
    if (!slopes.empty()) {
      const bool all_neg = std::all_of(slopes.begin(), slopes.end(), [&](double x) { return x < -epsilon; });
      const bool all_pos = std::all_of(slopes.begin(), slopes.end(), [&](double x) { return x > epsilon; });
      const bool all_flat = std::all_of(slopes.begin(), slopes.end(), [&](double x) { return std::abs(x) <= epsilon; });
      t = all_neg ? Trend::decaying : all_pos ? Trend::growing : all_flat ? Trend::flat : Trend::mixed;
    }
    table.classification.emplace_back(s, t);
    if (t == Trend::growing && (!table.last_growing || s > *table.last_growing)) table.last_growing = s;
    if (t == Trend::decaying && (!table.first_decaying || s < *table.first_decaying)) table.first_decaying = s;
  }
  return table;
}

}  // namespace shrink
