#include "shrink/frostman.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "shrink/error.hpp"

namespace shrink {

std::size_t draw_index(const std::vector<double>& weights, std::mt19937_64& rng) {
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(total > 0.0)) throw OutOfRange("measure: cannot draw from zero weights");
  const double target = unit_uniform(rng) * total;
  double cum = 0.0;
  std::size_t last = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    cum += weights[i];
    last = i;
    if (target < cum) return i;
  }
  return last;
}

BernoulliMeasure::BernoulliMeasure(std::vector<double> probabilities) : p_(std::move(probabilities)) {
  if (p_.empty()) throw ValidationError("measure: empty probability vector");
  double total = 0.0;
  for (double v : p_) {
    if (!(v >= 0.0)) throw ValidationError("measure: negative probability");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-12) throw ValidationError("measure: probabilities must sum to 1");
}

BernoulliMeasure BernoulliMeasure::uniform(int alphabet) {
  return BernoulliMeasure(std::vector<double>(static_cast<std::size_t>(alphabet), 1.0 / alphabet));
}

double BernoulliMeasure::measure(const Word& u) const {
  double m = 1.0;
  for (Symbol a : u) {
    if (a >= p_.size()) return 0.0;
    m *= p_[a];
  }
  return m;
}

Word BernoulliMeasure::sample_extension(const Word& prefix, std::size_t depth, std::mt19937_64& rng) const {
  Word w = prefix;
  while (w.size() < depth) w.push_back(static_cast<Symbol>(draw_index(p_, rng)));
  return w;
}

FrostmanReport frostman_energy(const AffineIFS& ifs, const WordMeasure& mu, double s,
                               const FrostmanOptions& options) {
  const int d = ifs.linear().dim();
  if (!(s >= 0.0) || s > d) throw OutOfRange("frostman: s outside [0, d]");
  if (options.samples < 1 || options.depth < 2) throw OutOfRange("frostman: need samples >= 1 and depth >= 2");
  FrostmanReport rep;
  rep.s = s;
  rep.samples = options.samples;
  rep.depth = options.depth;
  const auto& sep = ifs.separation();
  rep.separation_certified = sep.status == SeparationStatus::certified_separated;
  if (!rep.separation_certified)
    rep.warnings.push_back("frostman: separation not certified (" + to_string(sep.status) + ")");
  if (s == 0.0) {
    // |x - y|^0 = 1 for every pair
    rep.estimate = rep.truncated = 1.0;
    return rep;
  }
  const std::size_t D = static_cast<std::size_t>(options.depth);
  const std::size_t code_depth = D + 10;
  const int N = mu.alphabet();
  std::mt19937_64 rng(options.seed);
  rep.level_contributions.assign(D, 0.0);
  double tail = 0.0;
  std::uint64_t pairs = 0, close = 0;
  std::vector<double> m(D + 1);
  for (int i = 0; i < options.samples; ++i) {
    const Word x = mu.sample(code_depth, rng);
    const auto px = code_point(ifs, x.prefix(code_depth));
    for (std::size_t k = 0; k <= D; ++k) m[k] = k == 0 ? 1.0 : mu.measure(x.prefix(k));
    for (std::size_t k = 0; k < D; ++k) {
      const double w = m[k] - m[k + 1];
      if (!(w > 1e-300)) continue;
      const Word head = x.prefix(k);
      std::vector<double> branch(static_cast<std::size_t>(N), 0.0);
      for (int a = 0; a < N; ++a) {
        if (a == x[k]) continue;
        Word u = head;
        u.push_back(static_cast<Symbol>(a));
        branch[static_cast<std::size_t>(a)] = mu.measure(u);
      }
      Word u = head;
      u.push_back(static_cast<Symbol>(draw_index(branch, rng)));
      const Word y = mu.sample_extension(u, code_depth, rng);
      const auto py = code_point(ifs, y.prefix(code_depth));
      const double dist = (px.point - py.point).norm();
      ++pairs;
      if (dist <= px.error + py.error) ++close;
      const double safe = std::max(dist, std::numeric_limits<double>::min());
      rep.level_contributions[k] += w * std::pow(safe, -s);
    }
    tail += m[D];
  }
  for (auto& c : rep.level_contributions) c /= options.samples;
  rep.tail_mass = tail / options.samples;
  rep.below_resolution = pairs == 0 ? 0.0 : static_cast<double>(close) / static_cast<double>(pairs);
  rep.truncated = std::accumulate(rep.level_contributions.begin(), rep.level_contributions.end(), 0.0);

  // log-linear fit of the contributions on the upper half of the levels
  double sx = 0, sy = 0, sxx = 0, sxy = 0, cnt = 0;
  for (std::size_t k = D / 2; k < D; ++k) {
    const double c = rep.level_contributions[k];
    if (!(c > 0.0)) continue;
    const double x = static_cast<double>(k), y = std::log(c);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    cnt += 1;
  }
  rep.tail_ratio = cnt >= 2 ? std::exp((cnt * sxy - sx * sy) / (cnt * sxx - sx * sx)) : 0.0;
  rep.diverging = rep.tail_ratio >= 1.0;
  rep.estimate = rep.truncated;
  if (!rep.diverging && rep.tail_ratio > 0.0)
    rep.estimate += rep.level_contributions[D - 1] * rep.tail_ratio / (1.0 - rep.tail_ratio);
  rep.degenerate = rep.tail_mass > 0.1;
  if (rep.degenerate)
    rep.warnings.push_back("frostman: more than 10% of pairs share the code to depth " + std::to_string(D));
  if (rep.diverging) rep.warnings.push_back("frostman: level contributions do not decay, energy diverges");
  return rep;
}

StabilityReport frostman_stability(const AffineIFS& ifs, const WordMeasure& mu, double s,
                                   const FrostmanOptions& options, double tol) {
  StabilityReport r;
  r.base = frostman_energy(ifs, mu, s, options);
  FrostmanOptions twice = options;
  twice.samples = options.samples * 2;
  twice.seed = options.seed ^ 0xD1B54A32D192ED03ull;
  r.doubled = frostman_energy(ifs, mu, s, twice);
  r.relative_change = std::abs(r.doubled.estimate - r.base.estimate) / std::max(std::abs(r.doubled.estimate), 1e-300);
  r.stable = !r.base.diverging && !r.doubled.diverging && r.relative_change <= tol;
  return r;
}

}  // namespace shrink
