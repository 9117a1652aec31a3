// shrink-target: run the shrinking-target experiments on a config file.
#include <CLI11.hpp>

#include <iostream>

#include "shrink/config.hpp"
#include "shrink/error.hpp"
#include "shrink/run.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Shrinking-target dimension experiments for affine IFS"};
  app.require_subcommand(1, 1);
  std::string config_path;
  std::optional<int> depth, threads;
  std::optional<std::string> out;
  for (const auto& name : shrink::subcommands()) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config,-c", config_path, "experiment config (JSON)")->required();
    sub->add_option("--depth", depth, "pressure depth for the zero of the pressure");
    sub->add_option("--threads", threads, "worker threads (default: SHRINK_THREADS or 1)");
    sub->add_option("--out", out, "output directory (default: run.out of the config)");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : shrink::kExitError;
  }
  const std::string name = app.get_subcommands().front()->get_name();

  shrink::ExperimentConfig cfg;
  try {
    cfg = shrink::load_config(config_path);
  } catch (const shrink::Error& e) {
    std::cerr << e.what() << '\n';
    return shrink::kExitError;
  }
  shrink::RunOptions opts;
  opts.depth = depth;
  opts.threads = threads;
  const std::filesystem::path dir = out ? *out : cfg.run.out;

  const auto rec = shrink::run(name, cfg, opts);
  try {
    shrink::write_outputs(rec, dir);
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return shrink::kExitError;
  }
  for (const auto& w : rec.warnings) std::cerr << "warning: " << w << '\n';
  for (const auto& f : rec.failures) std::cerr << "check failed: " << f << '\n';
  if (rec.error) std::cerr << "error: " << *rec.error << '\n';
  std::cout << name << " " << rec.config_hash << " exit " << rec.exit_code() << " -> "
            << (dir / (name + ".json")).string() << '\n';
  return rec.exit_code();
}
