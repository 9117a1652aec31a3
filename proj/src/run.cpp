#include "shrink/run.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <limits>
#include <numeric>

#include "shrink/cantor.hpp"
#include "shrink/error.hpp"
#include "shrink/frostman.hpp"
#include "shrink/modular.hpp"
#include "shrink/parallel.hpp"
#include "shrink/pressure.hpp"
#include "shrink/quasiadd.hpp"

namespace shrink {

using nlohmann::json;

namespace {

std::string now_utc() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json num(double v) { return std::isfinite(v) ? json(v) : json(format_number(v)); }

json opt(const std::optional<double>& v) { return v ? num(*v) : json(nullptr); }

class Runner {
 public:
  Runner(const ExperimentConfig& cfg, int threads, RunRecord& rec)
      : cfg_(cfg),
        rec_(rec),
        maps_(make_maps(cfg)),
        ifs_(make_ifs(cfg)),
        target_(make_target(cfg)),
        length_(make_length(cfg)),
        threads_(threads) {
    for (const auto& w : maps_.warnings()) warn(w);
    sums_.budget = cfg.run.budget;
    sums_.threads = threads;
    problem_.maps = &maps_;
    problem_.target = &target_;
    problem_.length = &length_;
    problem_.options = sums_;
  }

  void dispatch(const std::string& sub) {
    if (sub == "certify") certify_step();
    else if (sub == "pressure") pressure_step();
    else if (sub == "dimension") dimension_step();
    else if (sub == "covering") covering_step();
    else if (sub == "modular-compare") modular_step();
    else if (sub == "measure-check") measure_step();
    else if (sub == "ell-check") ell_step();
    else if (sub == "all") {
      certify_step();
      dimension_step();
      pressure_step();
      covering_step();
      modular_step();
      measure_step();
      ell_step();
    } else {
      throw ValidationError("cli: unknown subcommand " + sub);
    }
  }

 private:
  void warn(const std::string& w) {
    if (std::find(rec_.warnings.begin(), rec_.warnings.end(), w) == rec_.warnings.end()) rec_.warnings.push_back(w);
  }
  void check(bool ok, const std::string& what) {
    if (!ok) rec_.failures.push_back(what);
  }

  std::vector<double> cert_grid() const {
    std::vector<double> g;
    const double step = cfg_.run.certify_step;
    const int d = maps_.dim();
    const long steps = std::lround(std::ceil(d / step - 1e-9));
    for (long k = 0; k <= steps; ++k) g.push_back(std::min(static_cast<double>(d), k * step));
    return g;
  }

  const QuasiCertificate& cert() {
    if (!cert_) {
      CertifyOptions o;
      o.budget = std::max<std::uint64_t>(cfg_.run.budget, 1ull << 20);
      o.threads = threads_;
      o.random_pairs = cfg_.run.random_pairs;
      o.seed = sub_seed(cfg_.seed, "certify");
      cert_ = certify(maps_, cfg_.run.K, cert_grid(), cfg_.run.certify_depth, o);
      if (!cert_->passed) warn("quasiadd: certificate failure, junction gaps fall below the floor");
      problem_.cert = &*cert_;
    }
    return *cert_;
  }

  double s0() {
    if (!zero_) {
      zero_ = find_zero(problem_, depth_, cfg_.run.zero_tol);
      if (zero_->clamped) warn("pressure: s0 clamped to the end of [0, d] (" + zero_->note + ")");
      lyap_ = lyapunov_Z(maps_, target_, zero_->s0, {100, 200, 400});
    }
    return zero_->s0;
  }

  void certify_step() {
    const auto& c = cert();
    const auto bad = reverify(c, maps_, cfg_.run.tolerance);
    json j = to_json(c);
    j.erase("connector_table");
    j["table_entries"] = c.connector_table.size();
    j["reverify_failures"] = bad.size();
    rec_.outputs["certify"] = j;
    check(c.passed, "quasiadd: quasi-additivity certificate (gap above the floor)");
    check(bad.empty(), "quasiadd: certificate replay (" + std::to_string(bad.size()) + " entries fail)");
  }

  void dimension_step() {
    s0();
    const auto& z = *zero_;
    rec_.outputs["dimension"] = {{"s0", z.s0},
                                 {"clamped", z.clamped},
                                 {"depth", z.depth},
                                 {"iterations", z.iterations},
                                 {"value_low", num(z.value_low)},
                                 {"value_high", num(z.value_high)},
                                 {"value_at_zero", num(z.at_zero.value)},
                                 {"note", z.note},
                                 {"Z", lyap_->Z},
                                 {"Z_star", lyap_->Z_star},
                                 {"cesaro_spread", lyap_->cesaro_spread}};
  }

  void pressure_step() {
    json rows = json::array();
    auto& t = rec_.pressure_curve;
    for (double s : cfg_.run.s_grid()) {
      for (int n : cfg_.run.n_list) {
        const double ls = partial_sum_full(maps_, target_, length_, s, n, sums_);
        const double v = ls / n;
        rows.push_back({{"s", s}, {"n", n}, {"log_sum", num(ls)}, {"value", num(v)}});
        t.rows.push_back({format_number(s), std::to_string(n), format_number(ls), format_number(v)});
      }
    }
    std::stable_sort(t.rows.begin(), t.rows.end(), [](const auto& a, const auto& b) {
      const double sa = std::stod(a[0]), sb = std::stod(b[0]);
      if (sa != sb) return sa < sb;
      return std::stoi(a[1]) < std::stoi(b[1]);
    });
    rec_.outputs["pressure"] = {{"potential", "full_target"}, {"rows", rows}};
  }

  void covering_step() {
    const double z = s0();
    // cover counts need s > 0
    std::vector<double> grid;
    for (double s : cfg_.run.s_grid())
      if (s > 0.0) grid.push_back(s);
    const auto table =
        covering_sum_experiment(ifs_, target_, length_, grid, cfg_.run.n_list, cfg_.run.covering_epsilon, sums_);
    auto& t = rec_.covering;
    for (const auto& r : table.rows)
      t.rows.push_back({format_number(r.s), std::to_string(r.n), format_number(r.log_sum),
                        r.slope ? format_number(*r.slope) : std::string()});
    json cls = json::array();
    bool signs = true;
    for (const auto& [s, trend] : table.classification) {
      cls.push_back({{"s", s}, {"trend", to_string(trend)}});
      if (s < z - 0.05 && trend != Trend::growing) signs = false;
      if (s > z + 0.05 && trend != Trend::decaying) signs = false;
    }
    // the slope at s0 itself
    const auto at = covering_sum_experiment(ifs_, target_, length_, {z}, cfg_.run.n_list, cfg_.run.covering_epsilon,
                                            sums_);
    double worst = 0.0;
    for (const auto& r : at.rows)
      if (r.slope) worst = std::max(worst, std::abs(*r.slope));
    rec_.outputs["covering"] = {{"classification", cls},
                                {"last_growing", opt(table.last_growing)},
                                {"first_decaying", opt(table.first_decaying)},
                                {"s0", z},
                                {"max_abs_slope_at_s0", worst}};
    check(signs, "pressure: covering dichotomy (growth below s0 - 0.05, decay above s0 + 0.05)");
    check(worst <= 0.02, "pressure: covering slope at s0 within 0.02");
    if (ifs_.separation().status != SeparationStatus::certified_separated)
      warn("ifs: separation " + to_string(ifs_.separation().status));
  }

  void modular_step() {
    const auto& c = cert();
    const double s = cfg_.run.modular_s ? *cfg_.run.modular_s : s0();
    ModularOptions mo;
    mo.budget = std::max<std::uint64_t>(cfg_.run.budget, 1ull << 20) * 16;
    mo.threads = threads_;
    mo.tol = cfg_.run.tolerance;
    const auto rep = compare_grid(c, maps_, s, cfg_.run.modular_n, cfg_.run.R_grid, cfg_.run.held_out, mo);
    json rows = json::array();
    double max_diff = 0.0;
    for (const auto& r : rep.rows) {
      const double bound = rep.fit_full.at(r.n, r.R);
      rows.push_back({{"n", r.n},
                      {"R", r.R},
                      {"full_value", num(r.full_value)},
                      {"modular_value", num(r.modular_value)},
                      {"abs_diff", num(r.abs_diff)},
                      {"ordinary_value", num(r.ordinary_value)},
                      {"ordinary_diff", num(r.ordinary_diff)},
                      {"fitted_bound", num(bound)}});
      rec_.modular_grid.rows.push_back({std::to_string(r.n), std::to_string(r.R), format_number(r.full_value),
                                        format_number(r.modular_value), format_number(r.abs_diff),
                                        format_number(bound)});
      max_diff = std::max(max_diff, r.abs_diff);
    }
    json held = json::array();
    for (const auto& [n, R] : rep.held_out) held.push_back({n, R});
    json viol = json::array();
    for (const auto& [n, R] : rep.violations) viol.push_back({n, R});
    rec_.outputs["modular_compare"] = {{"s", s},
                                       {"K", c.K},
                                       {"rows", rows},
                                       {"held_out", held},
                                       {"fit_full", {{"c_n", rep.fit_full.c_n}, {"c_R", rep.fit_full.c_R}}},
                                       {"fit_ordinary", {{"c_n", rep.fit_ordinary.c_n}, {"c_R", rep.fit_ordinary.c_R}}},
                                       {"bound_holds", rep.bound_holds},
                                       {"violations", viol},
                                       {"max_abs_diff", max_diff}};
    check(rep.bound_holds, "modular: |full - modular| under the fitted c/n + c'/R, held-out point included");
    if (c.K == 0) check(max_diff < 1e-10, "modular: full and modular values agree when K = 0");
  }

  void measure_step() {
    const auto& c = cert();
    const double z0 = s0();
    const double Z = lyap_->Z;
    const auto& r = cfg_.run;
    json out;
    out["s0"] = z0;
    out["Z"] = Z;

    const auto nu = build_nu(maps_, length_, z0, Z, r.measure_R);
    double total = 0.0, relation = 0.0;
    for (std::size_t b = 0; b < nu.probabilities.size(); ++b) {
      total += nu.probabilities[b];
      relation = std::max(relation, std::abs(nu.log_probabilities[b] - (nu.psi.values[b] - nu.log_w)));
    }
    out["nu"] = {{"R", r.measure_R}, {"w", nu.w}, {"sum_error", std::abs(total - 1.0)}, {"log_relation_error", relation}};
    check(std::abs(total - 1.0) <= 1e-12, "cantor: nu_R sums to 1 within 1e-12");

    const auto norm = normalizer_check(maps_, length_, z0, Z, r.normalizer_R, r.normalizer_bound);
    json ws = json::array();
    for (const auto& [R, w] : norm.w) ws.push_back({{"R", R}, {"w", w}});
    out["normalizer"] = {{"w", ws}, {"c10", norm.c10}, {"bound", opt(norm.bound)}, {"passed", norm.passed}};
    check(norm.passed, "cantor: normalizer w_R within the configured bound");

    CantorOptions co;
    co.level_cap = r.level_cap;
    co.width_cap = r.width_cap;
    co.seed = sub_seed(cfg_.seed, "cantor");
    co.threads = threads_;
    co.tol = r.tolerance;
    const CantorTree tree(c, maps_, target_, length_, z0, Z, r.measure_R, co);
    json levels = json::array();
    double mass_err = 0.0;
    for (const auto& lv : tree.levels()) {
      levels.push_back({{"k", lv.k}, {"n_k", lv.n_k}, {"nodes", lv.nodes.size()}, {"sampled", lv.sampled},
                        {"mass_sum", lv.mass_sum}});
      mass_err = std::max(mass_err, std::abs(lv.mass_sum - 1.0));
    }
    const auto replay = tree.replay_mismatches();
    out["tree"] = {{"R", tree.R()}, {"K", tree.K()}, {"levels", levels}, {"mass_error", mass_err},
                   {"replay_mismatches", replay}, {"notes", tree.notes()}};
    check(mass_err <= 1e-10, "cantor: level mass conservation within 1e-10");
    check(replay == 0, "cantor: target segment replay");

    const double t = z0 - r.t_offset;
    if (t > 0.0) {
      ConcentrationOptions cc;
      cc.samples = r.concentration_samples;
      cc.max_depth = r.concentration_depth;
      cc.seed = sub_seed(cfg_.seed, "concentration");
      const auto rep = concentration_check(tree, maps_, std::max(0.0, t - r.t_offset), t, cc);
      out["concentration"] = {{"t", t},
                              {"samples", rep.samples},
                              {"max_depth", rep.max_depth},
                              {"max_ratio", num(std::exp(rep.max_log_ratio))},
                              {"max_log_ratio", num(rep.max_log_ratio)},
                              {"worst_prefix", rep.worst_prefix.to_string(maps_.size())},
                              {"slope", rep.slope},
                              {"intercept", num(rep.intercept)},
                              {"tail_excess", num(rep.tail_excess)},
                              {"passed", rep.passed},
                              {"note", rep.note}};
      check(rep.passed, "cantor: concentration mu[w|n] <= C phi^t(w|n)" +
                            (rep.note.empty() ? std::string() : " (" + rep.note + ")"));
      histogram(rep.log_ratios);
    } else {
      warn("cantor: s0 - t_offset <= 0, concentration skipped");
    }

    json mult = json::array();
    bool mult_ok = true;
    for (int n = 1; n <= r.multiplicity_depth; ++n) {
      const auto m = multiplicity_check(tree, n);
      mult.push_back({{"n", n}, {"max_count", m.max_count}, {"bound", m.bound}});
      mult_ok = mult_ok && m.passed;
    }
    out["multiplicity"] = mult;
    check(mult_ok, "cantor: overlap multiplicity <= (K+1)^(n/R)");

    const double fs = r.frostman_s ? *r.frostman_s : std::max(0.0, t);
    FrostmanOptions fo;
    fo.samples = r.frostman_samples;
    fo.depth = r.frostman_depth;
    fo.seed = sub_seed(cfg_.seed, "frostman");
    const auto e = frostman_energy(ifs_, tree, fs, fo);
    for (const auto& w : e.warnings) warn(w);
    out["energy"] = {{"s", fs},
                     {"estimate", num(e.estimate)},
                     {"truncated", num(e.truncated)},
                     {"tail_ratio", e.tail_ratio},
                     {"tail_mass", e.tail_mass},
                     {"below_resolution", e.below_resolution},
                     {"diverging", e.diverging},
                     {"degenerate", e.degenerate},
                     {"separation_certified", e.separation_certified}};
    rec_.outputs["measure_check"] = out;
  }

  void histogram(const std::vector<double>& v) {
    constexpr int kBins = 20;
    if (v.empty()) return;
    const auto [lo_it, hi_it] = std::minmax_element(v.begin(), v.end());
    const double lo = *lo_it, hi = *hi_it > *lo_it ? *hi_it : *lo_it + 1.0;
    std::vector<long> count(kBins, 0);
    for (double x : v) {
      int b = static_cast<int>((x - lo) / (hi - lo) * kBins);
      count[static_cast<std::size_t>(std::clamp(b, 0, kBins - 1))]++;
    }
    for (int b = 0; b < kBins; ++b)
      rec_.concentration_histogram.rows.push_back({format_number(lo + (hi - lo) * b / kBins),
                                                   format_number(lo + (hi - lo) * (b + 1) / kBins),
                                                   std::to_string(count[static_cast<std::size_t>(b)])});
  }

  void ell_step() {
    const double z = s0();
    if (cfg_.run.K > 0) cert();
    const auto zc = zero_coincidence_check(problem_, z, cfg_.run.ell_windows, cfg_.run.ell_tol);
    json out = {{"s0", z},          {"value", num(zc.value)},   {"bracket_width", zc.bracket_width},
                {"tol", zc.tol},    {"passed", zc.passed},      {"H", zc.ell.H},
                {"z_star", zc.ell.z_star}};
    check(zc.passed, "pressure: ell pressure vanishes at s0 within tol");
    const double above = z + cfg_.run.ell_offset;
    if (above <= maps_.dim()) {
      const auto e = ell_pressure(problem_, above, cfg_.run.ell_windows);
      out["above"] = {{"s", above}, {"value", num(e.estimate.value)}};
      check(e.estimate.value < 0.0, "pressure: ell pressure negative above s0");
    }
    rec_.outputs["ell_check"] = out;
  }

 public:
  int depth_ = 10;

 private:
  const ExperimentConfig& cfg_;
  RunRecord& rec_;
  LinearMapSet maps_;
  AffineIFS ifs_;
  TargetSpec target_;
  LengthFunction length_;
  int threads_ = 1;
  SumOptions sums_;
  PressureProblem problem_;
  std::optional<QuasiCertificate> cert_;
  std::optional<ZeroResult> zero_;
  std::optional<LyapunovEstimate> lyap_;
};

void write_csv(const CsvTable& t, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cli: cannot write " + path.string());
  auto line = [&out](const std::vector<std::string>& cells) {
    for (std::size_t k = 0; k < cells.size(); ++k) out << (k ? "," : "") << cells[k];
    out << '\n';
  };
  line(t.header);
  for (const auto& r : t.rows) line(r);
}

}  // namespace

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> list{"certify",         "pressure",      "dimension", "covering",
                                             "modular-compare", "measure-check", "ell-check", "all"};
  return list;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

int RunRecord::exit_code() const {
  if (error) return kExitError;
  return failures.empty() ? kExitOk : kExitCheckFailed;
}

json RunRecord::to_json() const {
  return {{"subcommand", subcommand}, {"config_hash", config_hash}, {"version", version},
          {"started", started},       {"finished", finished},       {"threads", threads},
          {"outputs", outputs},       {"warnings", warnings},       {"failures", failures},
          {"error", error ? json(*error) : json(nullptr)},           {"exit_code", exit_code()}};
}

RunRecord run(const std::string& subcommand, const ExperimentConfig& config, const RunOptions& options) {
  RunRecord rec;
  rec.subcommand = subcommand;
  rec.config_hash = config_hash(config);
  rec.started = now_utc();
  rec.pressure_curve.header = {"s", "n", "log_sum", "value"};
  rec.covering.header = {"s", "n", "log_sum", "slope"};
  rec.modular_grid.header = {"n", "R", "full_value", "modular_value", "abs_diff", "fitted_bound"};
  rec.concentration_histogram.header = {"bin_low", "bin_high", "count"};
  rec.threads = options.threads ? *options.threads : config.run.threads > 0 ? config.run.threads : default_threads();
  try {
    if (std::find(subcommands().begin(), subcommands().end(), subcommand) == subcommands().end())
      throw ValidationError("cli: unknown subcommand " + subcommand);
    if (rec.threads < 1) throw ValidationError("cli: threads must be >= 1");
    Runner runner(config, rec.threads, rec);
    runner.depth_ = options.depth ? *options.depth : config.run.dimension_depth;
    if (runner.depth_ < 1) throw ValidationError("cli: depth must be >= 1");
    runner.dispatch(subcommand);
  } catch (const Error& e) {
    rec.error = e.what();
  }
  rec.finished = now_utc();
  return rec;
}

void emit_plotdata(const RunRecord& record, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_csv(record.pressure_curve, dir / "pressure_curve.csv");
  write_csv(record.covering, dir / "covering.csv");
  write_csv(record.modular_grid, dir / "modular_grid.csv");
  write_csv(record.concentration_histogram, dir / "concentration_histogram.csv");
}

void write_outputs(const RunRecord& record, const std::filesystem::path& dir) {
  emit_plotdata(record, dir);
  std::ofstream out(dir / (record.subcommand + ".json"), std::ios::binary);
  if (!out) throw ValidationError("cli: cannot write " + (dir / (record.subcommand + ".json")).string());
  out << record.to_json().dump(2) << '\n';
}

}  // namespace shrink
