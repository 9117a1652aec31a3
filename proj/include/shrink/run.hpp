#ifndef SHRINK_RUN_HPP_
#define SHRINK_RUN_HPP_

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "shrink/config.hpp"

namespace shrink {

inline constexpr const char* kArtifactVersion = "0.1.0";

/// Exit codes of the command line tool.
enum ExitCode : int { kExitOk = 0, kExitCheckFailed = 2, kExitError = 3 };

const std::vector<std::string>& subcommands();

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

struct RunRecord {
  std::string subcommand;
  std::string config_hash;
  std::string version = kArtifactVersion;
  std::string started;
  std::string finished;
  int threads = 1;
  nlohmann::json outputs = nlohmann::json::object();
  std::vector<std::string> warnings;
  std::vector<std::string> failures;  ///< failed checks, each naming its module
  std::optional<std::string> error;   ///< budget or validation error that stopped the run
  CsvTable pressure_curve;            ///< s, n, log_sum, value
  CsvTable covering;                  ///< s, n, log_sum, slope
  CsvTable modular_grid;              ///< n, R, full_value, modular_value, abs_diff, fitted_bound
  CsvTable concentration_histogram;   ///< bin_low, bin_high, count
  int exit_code() const;
  nlohmann::json to_json() const;
};

/// Command line overrides.
struct RunOptions {
  std::optional<int> depth;    ///< dimension depth
  std::optional<int> threads;  ///< beats run.threads and SHRINK_THREADS
  std::optional<std::filesystem::path> out;
};

/// Runs one subcommand. Library errors are caught and stored in the record.
RunRecord run(const std::string& subcommand, const ExperimentConfig& config, const RunOptions& options = {});

/// Writes the four CSV tables into dir; tables without rows get their header only.
void emit_plotdata(const RunRecord& record, const std::filesystem::path& dir);
/// Writes <subcommand>.json and the CSV tables.
void write_outputs(const RunRecord& record, const std::filesystem::path& dir);

std::string format_number(double v);

}  // namespace shrink

#endif  // SHRINK_RUN_HPP_
