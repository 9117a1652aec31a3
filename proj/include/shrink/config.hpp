#ifndef SHRINK_CONFIG_HPP_
#define SHRINK_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "shrink/ifs.hpp"
#include "shrink/length.hpp"
#include "shrink/linmaps.hpp"
#include "shrink/target.hpp"

namespace shrink {

inline constexpr int kSchemaVersion = 1;

struct IfsBlock {
  int d = 1;
  std::vector<Eigen::MatrixXd> matrices;
  std::vector<Eigen::VectorXd> translations;
  int separation_depth = 3;
};

struct TargetBlock {
  std::string mode = "periodic";  ///< periodic | bernoulli
  Word word;                      ///< period, periodic mode
  std::vector<double> probabilities;
  std::optional<std::uint64_t> seed;  ///< bernoulli; default derived from the config seed
  std::size_t prefix_depth = 4096;
};

struct LengthBlock {
  std::string mode = "birkhoff";  ///< birkhoff | table
  std::vector<double> weights;
  std::map<Word, double> table;
  int max_depth = 0;
};

/// Settings for the subcommands. Depth lists count symbols.
struct RunBlock {
  std::vector<int> n_list{6, 7, 8, 9, 10, 11, 12};
  std::vector<double> s_list;  ///< explicit s grid; empty: s_range
  double s_min = 0.0;
  double s_max = 1.0;
  double s_step = 0.1;

  int dimension_depth = 10;
  double zero_tol = 1e-6;

  int K = 0;
  int certify_depth = 4;    ///< sample depth of the certificate
  double certify_step = 0.25;
  int random_pairs = 0;

  std::vector<int> modular_n{2, 3, 4, 5};
  std::vector<int> R_grid{2, 3, 4};
  std::vector<std::pair<int, int>> held_out{{5, 4}};
  std::optional<double> modular_s;  ///< default: s0

  std::vector<int> ell_windows{12};
  double ell_tol = 0.05;
  double ell_offset = 0.2;

  int measure_R = 3;
  int level_cap = 2;
  std::size_t width_cap = 4096;
  int concentration_samples = 200;
  int concentration_depth = 30;
  double t_offset = 0.05;
  int multiplicity_depth = 12;
  std::vector<int> normalizer_R{2, 3, 4};
  std::optional<double> normalizer_bound;
  int frostman_samples = 1000;
  int frostman_depth = 20;
  std::optional<double> frostman_s;  ///< default: t

  double covering_epsilon = 1e-3;
  double tolerance = 1e-9;
  std::uint64_t budget = 1ull << 24;
  int threads = 0;  ///< 0: SHRINK_THREADS or 1
  std::string out = "out";

  std::vector<double> s_grid() const;
};

struct ExperimentConfig {
  int schema_version = kSchemaVersion;
  std::string name;
  std::uint64_t seed = 1;
  IfsBlock ifs;
  TargetBlock target;
  LengthBlock length;
  RunBlock run;
};

/// Parses and validates; throws ValidationError naming the offending field.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);
/// Every field, defaults included, so parse(to_json(c)) reproduces c.
nlohmann::json to_json(const ExperimentConfig& c);
void validate(const ExperimentConfig& c);

/// FNV-1a of the canonical JSON dump, as 16 hex digits.
std::string config_hash(const ExperimentConfig& c);
std::uint64_t fnv1a(const std::string& bytes);
/// Sub-seed for a named sampler, mixed from the config seed.
std::uint64_t sub_seed(std::uint64_t seed, const std::string& label);

LinearMapSet make_maps(const ExperimentConfig& c);
AffineIFS make_ifs(const ExperimentConfig& c);
TargetSpec make_target(const ExperimentConfig& c);
LengthFunction make_length(const ExperimentConfig& c);

}  // namespace shrink

#endif  // SHRINK_CONFIG_HPP_
