#include "shrink/ifs.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <limits>

#include "shrink/error.hpp"

namespace shrink {

std::string to_string(SeparationStatus s) {
  switch (s) {
    case SeparationStatus::certified_separated:
      return "certified_separated";
    case SeparationStatus::overlapping:
      return "overlapping";
    case SeparationStatus::inconclusive:
      return "inconclusive";
  }
  return "inconclusive";
}

AffineIFS::AffineIFS(LinearMapSet linear, std::vector<Eigen::VectorXd> translations, std::optional<Ball> ball,
                     int separation_depth)
    : linear_(std::move(linear)), translations_(std::move(translations)) {
  if (static_cast<int>(translations_.size()) != linear_.size()) {
    throw ValidationError("ifs: need one translation per map");
  }
  for (const auto& v : translations_) {
    if (v.size() != linear_.dim()) throw ValidationError("ifs: translation dimension mismatch");
  }
  if (ball) {
    ball_ = *ball;
    if (ball_.center.size() != linear_.dim() || !(ball_.radius > 0.0)) {
      throw ValidationError("ifs: bad attractor ball");
    }
    for (int a = 0; a < size(); ++a) {
      const Eigen::VectorXd fc = linear_.map(a) * ball_.center + translations_[static_cast<std::size_t>(a)];
      if ((fc - ball_.center).norm() + linear_.alpha_plus() * ball_.radius > ball_.radius * (1 + 1e-12)) {
        throw ValidationError("ifs: attractor ball is not mapped into itself");
      }
    }
  } else {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(linear_.dim());
    for (int a = 0; a < size(); ++a) c += fixed_point(Word(std::vector<Symbol>{static_cast<Symbol>(a)}));
    c /= size();
    double far = 0.0;
    for (int a = 0; a < size(); ++a) {
      far = std::max(far, (linear_.map(a) * c + translations_[static_cast<std::size_t>(a)] - c).norm());
    }
    ball_.center = c;
    ball_.radius = std::max(far / (1.0 - linear_.alpha_plus()), 1e-300);
  }
  separation_ = separation_check(*this, separation_depth);
}

Eigen::VectorXd AffineIFS::apply(const Word& w, const Eigen::VectorXd& x) const {
  Eigen::VectorXd y = x;
  for (std::size_t k = w.size(); k > 0; --k) {
    const Symbol a = w[k - 1];
    y = linear_.map(a) * y + translations_[a];
  }
  return y;
}

Eigen::VectorXd AffineIFS::fixed_point(const Word& w) const {
  const Eigen::MatrixXd t = compose(linear_, w);
  const Eigen::VectorXd v = apply(w, Eigen::VectorXd::Zero(dim()));
  const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(dim(), dim()) - t;
  return a.partialPivLu().solve(v);
}

CodePoint code_point(const AffineIFS& ifs, const Word& w) {
  CodePoint cp;
  cp.point = ifs.apply(w, Eigen::VectorXd::Zero(ifs.dim()));
  const double norm = spectral_norm(compose(ifs.linear(), w));
  cp.error = norm * (ifs.attractor_ball().center.norm() + ifs.attractor_ball().radius);
  return cp;
}

SeparationReport separation_check(const AffineIFS& ifs, int depth) {
  if (depth < 1) throw OutOfRange("ifs: separation depth must be >= 1");
  const auto words = enumerate_words(ifs.size(), depth, 1u << 16);
  const Ball& ball = ifs.attractor_ball();
  const int d = ifs.dim();
  struct Image {
    Symbol first;
    Eigen::VectorXd center;
    double radius;
    Eigen::VectorXd half_width;
  };
  std::vector<Image> images;
  images.reserve(words.size());
  for (const auto& w : words) {
    const Eigen::MatrixXd t = compose(ifs.linear(), w);
    Image im;
    im.first = w[0];
    im.center = ifs.apply(w, ball.center);
    im.radius = spectral_norm(t) * ball.radius;
    im.half_width.resize(d);
    for (int k = 0; k < d; ++k) im.half_width(k) = t.row(k).norm() * ball.radius;
    images.push_back(std::move(im));
  }
  double min_gap = std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < images.size(); ++p) {
    for (std::size_t q = p + 1; q < images.size(); ++q) {
      if (images[p].first == images[q].first) continue;
      const Eigen::VectorXd diff = images[p].center - images[q].center;
      double gap = diff.norm() - images[p].radius - images[q].radius;
      for (int k = 0; k < d; ++k) {
        gap = std::max(gap, std::abs(diff(k)) - images[p].half_width(k) - images[q].half_width(k));
      }
      min_gap = std::min(min_gap, gap);
    }
  }
  SeparationReport rep;
  rep.check_depth = depth;
  rep.min_gap = images.size() > 1 ? min_gap : 0.0;
  if (rep.min_gap > 1e-10) {
    rep.status = SeparationStatus::certified_separated;
  } else if (rep.min_gap >= -1e-10) {
    rep.status = SeparationStatus::inconclusive;
  } else {
    // Coinciding fixed points under different first symbols prove overlap.
    rep.status = SeparationStatus::inconclusive;
    std::vector<std::pair<Symbol, Eigen::VectorXd>> fixed;
    for (const auto& w : words) fixed.emplace_back(w[0], ifs.fixed_point(w));
    for (std::size_t p = 0; p < fixed.size() && rep.status != SeparationStatus::overlapping; ++p) {
      for (std::size_t q = p + 1; q < fixed.size(); ++q) {
        if (fixed[p].first != fixed[q].first && (fixed[p].second - fixed[q].second).norm() < 1e-12) {
          rep.status = SeparationStatus::overlapping;
          break;
        }
      }
    }
  }
  return rep;
}

CoverCount cylinder_cover_count(const AffineIFS& ifs, const CocycleProduct& product, double s) {
  const int d = ifs.dim();
  if (!(s > 0.0) || s > d) throw OutOfRange("ifs: cover count needs 0 < s <= d");
  const auto lsv = product.log_singular_values();
  const int k = std::min(static_cast<int>(std::floor(s)), d - 1);
  const double log_c = d * std::log(2.0 * ifs.attractor_ball().radius * std::sqrt(static_cast<double>(d)));
  const double log_x = log_c + log_phi(lsv, s) - s * lsv[k];
  CoverCount cc;
  cc.log_side = lsv[k];
  cc.side = std::exp(cc.log_side);
  if (log_x < 40.0) {
    cc.count = std::max(1.0, std::ceil(std::exp(log_x) - 1e-9));
    cc.log_count = std::log(cc.count);
  } else {
    cc.log_count = log_x;
    cc.count = std::exp(log_x);
  }
  return cc;
}

CoverCount cylinder_cover_count(const AffineIFS& ifs, const Word& w, double s) {
  return cylinder_cover_count(ifs, ifs.linear().product(w), s);
}

}  // namespace shrink
