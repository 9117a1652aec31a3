#include "shrink/length.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "shrink/error.hpp"

namespace shrink {

LengthFunction LengthFunction::birkhoff(std::vector<double> weights) {
  if (weights.empty()) throw ValidationError("length: empty weight vector");
  for (double w : weights) {
    if (!(w > 0.0) || !std::isfinite(w)) throw ValidationError("length: Birkhoff weights must be positive");
  }
  LengthFunction f;
  f.birkhoff_ = true;
  f.alphabet_ = static_cast<int>(weights.size());
  f.weights_ = std::move(weights);
  return f;
}

LengthFunction LengthFunction::table(int alphabet, std::map<Word, double> entries, int max_depth) {
  LengthFunction f;
  f.birkhoff_ = false;
  f.alphabet_ = alphabet;
  f.max_depth_ = max_depth;
  for (const auto& [w, v] : entries) {
    if (w.empty()) continue;
    if (static_cast<int>(w.size()) > max_depth) throw ValidationError("length: table entry deeper than max_depth");
    if (w.min_alphabet() > alphabet) throw ValidationError("length: table entry uses symbol outside alphabet");
    f.entries_.emplace(w, v);
  }
  double kappa = 0.0;
  for (const auto& [w, v] : f.entries_) {
    if (w.size() < 2) continue;
    Word head = w.prefix(w.size() - 1);
    Word tail = w.suffix_from(w.size() - 1);
    auto ih = f.entries_.find(head);
    auto it = f.entries_.find(tail);
    if (ih == f.entries_.end() || it == f.entries_.end()) continue;
    kappa = std::max(kappa, std::abs(v - ih->second - it->second));
  }
  f.kappa_ = kappa;
  return f;
}

double LengthFunction::operator()(const Word& w) const {
  if (w.empty()) return 0.0;
  if (birkhoff_) {
    std::vector<int> counts(weights_.size(), 0);
    for (Symbol a : w) {
      if (a >= weights_.size()) throw OutOfRange("length: symbol outside alphabet");
      ++counts[a];
    }
    return from_counts(counts);
  }
  if (static_cast<int>(w.size()) > max_depth_) {
    throw DepthExceeded("length: table has no entries beyond depth " + std::to_string(max_depth_));
  }
  auto it = entries_.find(w);
  if (it == entries_.end()) throw DepthExceeded("length: table has no entry for word " + w.to_string(alphabet_));
  return it->second;
}

double LengthFunction::from_counts(const std::vector<int>& counts) const {
  double sum = 0.0;
  for (std::size_t a = 0; a < counts.size(); ++a) sum += counts[a] * weights_[a];
  return sum;
}

double LengthFunction::max_value_upto(int n) const {
  if (birkhoff_) return n * *std::max_element(weights_.begin(), weights_.end());
  double best = 0.0;
  for (const auto& [w, v] : entries_) {
    if (static_cast<int>(w.size()) <= n) best = std::max(best, v);
  }
  return best;
}

std::size_t floor_length(double m) {
  if (!(m > 0.0)) return 0;
  return static_cast<std::size_t>(std::floor(m + 1e-9));
}

namespace {

LengthStats birkhoff_stats(const LengthFunction& ell, int audit_depth) {
  LengthStats st;
  st.audit_depth = audit_depth;
  const auto& w = ell.weights();
  st.L_min = *std::min_element(w.begin(), w.end());
  st.L_max = *std::max_element(w.begin(), w.end());
  st.M_min = st.L_min;
  st.M_max = st.L_max;
  st.H = st.L_max;
  st.kappa = 0.0;
  st.kappa_prime = 0.0;
  return st;
}

}  // namespace

LengthStats length_stats(const LengthFunction& ell, int audit_depth) {
  if (audit_depth < 1) throw OutOfRange("length: audit depth must be >= 1");
  if (ell.is_birkhoff()) return birkhoff_stats(ell, audit_depth);

  const int depth = std::min(audit_depth, ell.max_depth());
  LengthStats st;
  st.audit_depth = depth;
  st.kappa = ell.kappa();
  st.M_min = std::numeric_limits<double>::infinity();
  st.M_max = -std::numeric_limits<double>::infinity();
  st.H = -std::numeric_limits<double>::infinity();

  int deepest = 0;
  for (const auto& [w, v] : ell.entries()) {
    const int n = static_cast<int>(w.size());
    if (n > depth) continue;
    if (!(v > 0.0)) {
      throw ValidationError("length: non-positive value at word " + w.to_string(ell.alphabet()));
    }
    deepest = std::max(deepest, n);
    st.M_min = std::min(st.M_min, v / n);
    st.M_max = std::max(st.M_max, v / n);
    if (n == 1) st.H = std::max(st.H, v);
    if (n >= 2) {
      auto head = ell.entries().find(w.prefix(w.size() - 1));
      if (head != ell.entries().end()) {
        const double inc = v - head->second;
        st.H = std::max(st.H, inc);
        if (inc < 0.0) st.monotone = false;
      }
    }
  }
  if (deepest == 0) throw ValidationError("length: table has no entries to audit");

  st.L_min = std::numeric_limits<double>::infinity();
  st.L_max = -std::numeric_limits<double>::infinity();
  for (const auto& [w, v] : ell.entries()) {
    if (static_cast<int>(w.size()) != deepest) continue;
    st.L_min = std::min(st.L_min, v / deepest);
    st.L_max = std::max(st.L_max, v / deepest);
  }
  double slack = 0.0;
  for (const auto& [w, v] : ell.entries()) {
    const int n = static_cast<int>(w.size());
    if (n > depth) continue;
    slack = std::max({slack, n * st.L_min - v, v - n * st.L_max});
  }
  st.kappa_prime = slack;
  if (3.0 * st.kappa >= st.L_min) {
    st.warnings.push_back("length: 3*kappa >= L_min, constants may be vacuous");
  }
  return st;
}

}  // namespace shrink
