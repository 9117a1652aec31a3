#ifndef SHRINK_IFS_HPP_
#define SHRINK_IFS_HPP_

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "shrink/linmaps.hpp"
#include "shrink/word.hpp"

namespace shrink {

struct Ball {
  Eigen::VectorXd center;
  double radius = 0.0;
};

enum class SeparationStatus { certified_separated, overlapping, inconclusive };
std::string to_string(SeparationStatus s);

struct SeparationReport {
  SeparationStatus status = SeparationStatus::inconclusive;
  double min_gap = 0.0;
  int check_depth = 0;
};

/// Affine IFS f_i(x) = T_i x + v_i.
class AffineIFS {
 public:
  AffineIFS() = default;
  /// Without an explicit ball, one is centred at the mean of the fixed
  /// points with radius max |f_i(c) - c| / (1 - alpha_plus).
  AffineIFS(LinearMapSet linear, std::vector<Eigen::VectorXd> translations, std::optional<Ball> ball = {},
            int separation_depth = 1);

  const LinearMapSet& linear() const { return linear_; }
  const std::vector<Eigen::VectorXd>& translations() const { return translations_; }
  const Ball& attractor_ball() const { return ball_; }
  const SeparationReport& separation() const { return separation_; }
  int dim() const { return linear_.dim(); }
  int size() const { return linear_.size(); }

  /// f_w(x).
  Eigen::VectorXd apply(const Word& w, const Eigen::VectorXd& x) const;
  Eigen::VectorXd fixed_point(const Word& w) const;

 private:
  LinearMapSet linear_;
  std::vector<Eigen::VectorXd> translations_;
  Ball ball_;
  SeparationReport separation_;
};

struct CodePoint {
  Eigen::VectorXd point;
  double error = 0.0;  ///< distance bound to pi of any extension
};

/// f_w(0) together with ||T_w|| (|c| + r).
CodePoint code_point(const AffineIFS& ifs, const Word& w);

/// Gaps between images of the attractor ball under depth-n words with
/// distinct first symbols; each pair uses the larger of the ball gap and
/// the axis-box gap.
SeparationReport separation_check(const AffineIFS& ifs, int depth);

struct CoverCount {
  double count = 0.0;
  double side = 0.0;
  double log_count = 0.0;
  double log_side = 0.0;
};

/// ceil(c phi^s(T) alpha_{floor(s)+1}(T)^{-s}) cubes of side alpha_{floor(s)+1}(T),
/// c = (2 r sqrt(d))^d.
CoverCount cylinder_cover_count(const AffineIFS& ifs, const Word& w, double s);
CoverCount cylinder_cover_count(const AffineIFS& ifs, const CocycleProduct& product, double s);

}  // namespace shrink

#endif  // SHRINK_IFS_HPP_
