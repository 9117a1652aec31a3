#include "shrink/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "shrink/error.hpp"

namespace shrink {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& what) { throw ValidationError("config: " + what); }

void only_keys(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
  if (!j.is_object()) fail(where + " must be an object");
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) fail("unknown field " + where + "." + k);
}

template <typename T>
T get(const json& j, const char* key, const std::string& where, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    fail(where + "." + key + " has the wrong type");
  }
}

template <typename T>
T need(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) fail("missing field " + where + "." + key);
  return get<T>(j, key, where, T{});
}

Word word_from(const json& j, const std::string& where) {
  if (!j.is_string()) fail(where + " must be a word string");
  try {
    return Word::parse(j.get<std::string>());
  } catch (const Error&) {
    fail(where + " is not a word");
  }
}

std::string word_text(const Word& w, int N) { return w.empty() ? std::string("e") : w.to_string(N); }

json vec(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

}  // namespace

std::vector<double> RunBlock::s_grid() const {
  if (!s_list.empty()) return s_list;
  std::vector<double> g;
  const long steps = std::lround((s_max - s_min) / s_step);
  for (long k = 0; k <= steps; ++k) g.push_back(s_min + static_cast<double>(k) * s_step);
  return g;
}

ExperimentConfig parse_config(const json& j) {
  only_keys(j, "config", {"schema_version", "name", "seed", "ifs", "target", "length", "run"});
  ExperimentConfig c;
  c.schema_version = need<int>(j, "schema_version", "config");
  if (c.schema_version != kSchemaVersion)
    fail("schema_version " + std::to_string(c.schema_version) + " is not supported (expected " +
         std::to_string(kSchemaVersion) + ")");
  c.name = get<std::string>(j, "name", "config", "");
  c.seed = get<std::uint64_t>(j, "seed", "config", 1);

  if (!j.contains("ifs")) fail("missing block ifs");
  const json& fi = j.at("ifs");
  only_keys(fi, "ifs", {"d", "matrices", "translations", "separation_depth"});
  c.ifs.d = need<int>(fi, "d", "ifs");
  if (c.ifs.d < 1) fail("ifs.d must be >= 1");
  const int d = c.ifs.d;
  const auto mats = need<std::vector<std::vector<std::vector<double>>>>(fi, "matrices", "ifs");
  for (std::size_t a = 0; a < mats.size(); ++a) {
    const auto& rows = mats[a];
    if (static_cast<int>(rows.size()) != d) fail("ifs.matrices[" + std::to_string(a) + "] needs d rows");
    Eigen::MatrixXd m(d, d);
    for (int r = 0; r < d; ++r) {
      if (static_cast<int>(rows[r].size()) != d) fail("ifs.matrices[" + std::to_string(a) + "] needs d columns");
      for (int col = 0; col < d; ++col) m(r, col) = rows[r][col];
    }
    c.ifs.matrices.push_back(m);
  }
  if (!fi.contains("translations")) {
    c.ifs.translations.assign(mats.size(), Eigen::VectorXd::Zero(d));
  } else {
    const auto tr = need<std::vector<std::vector<double>>>(fi, "translations", "ifs");
    for (std::size_t a = 0; a < tr.size(); ++a) {
      if (static_cast<int>(tr[a].size()) != d) fail("ifs.translations[" + std::to_string(a) + "] needs d entries");
      c.ifs.translations.push_back(Eigen::Map<const Eigen::VectorXd>(tr[a].data(), d));
    }
  }
  c.ifs.separation_depth = get<int>(fi, "separation_depth", "ifs", 3);

  if (!j.contains("target")) fail("missing block target");
  const json& ft = j.at("target");
  only_keys(ft, "target", {"mode", "word", "probabilities", "seed", "prefix_depth"});
  c.target.mode = get<std::string>(ft, "mode", "target", "periodic");
  if (c.target.mode == "periodic") {
    if (!ft.contains("word")) fail("missing field target.word");
    c.target.word = word_from(ft.at("word"), "target.word");
  } else if (c.target.mode == "bernoulli") {
    c.target.probabilities = need<std::vector<double>>(ft, "probabilities", "target");
  } else {
    fail("target.mode must be periodic or bernoulli");
  }
  if (ft.contains("seed")) c.target.seed = get<std::uint64_t>(ft, "seed", "target", 0);
  c.target.prefix_depth = get<std::size_t>(ft, "prefix_depth", "target", 4096);

  if (!j.contains("length")) fail("missing block length");
  const json& fl = j.at("length");
  only_keys(fl, "length", {"mode", "weights", "table", "max_depth"});
  c.length.mode = get<std::string>(fl, "mode", "length", "birkhoff");
  if (c.length.mode == "birkhoff") {
    c.length.weights = need<std::vector<double>>(fl, "weights", "length");
  } else if (c.length.mode == "table") {
    if (!fl.contains("table") || !fl.at("table").is_object()) fail("length.table must be an object");
    for (const auto& [k, v] : fl.at("table").items()) {
      if (!v.is_number()) fail("length.table." + k + " must be a number");
      c.length.table[word_from(json(k), "length.table key")] = v.get<double>();
    }
    c.length.max_depth = need<int>(fl, "max_depth", "length");
  } else {
    fail("length.mode must be birkhoff or table");
  }

  RunBlock& r = c.run;
  if (j.contains("run")) {
    const json& fr = j.at("run");
    only_keys(fr, "run",
              {"n_list", "s_list", "s_min", "s_max", "s_step", "dimension_depth", "zero_tol", "K", "certify_depth",
               "certify_step", "random_pairs", "modular_n", "R_grid", "held_out", "modular_s", "ell_windows", "ell_tol",
               "ell_offset", "measure_R", "level_cap", "width_cap", "concentration_samples", "concentration_depth",
               "t_offset", "multiplicity_depth", "normalizer_R", "normalizer_bound", "frostman_samples",
               "frostman_depth", "frostman_s", "covering_epsilon", "tolerance", "budget", "threads", "out"});
    const std::string w = "run";
    r.n_list = get(fr, "n_list", w, r.n_list);
    r.s_list = get(fr, "s_list", w, r.s_list);
    r.s_min = get(fr, "s_min", w, r.s_min);
    r.s_max = get(fr, "s_max", w, static_cast<double>(d));
    r.s_step = get(fr, "s_step", w, r.s_step);
    r.dimension_depth = get(fr, "dimension_depth", w, r.dimension_depth);
    r.zero_tol = get(fr, "zero_tol", w, r.zero_tol);
    r.K = get(fr, "K", w, r.K);
    r.certify_depth = get(fr, "certify_depth", w, r.certify_depth);
    r.certify_step = get(fr, "certify_step", w, r.certify_step);
    r.random_pairs = get(fr, "random_pairs", w, r.random_pairs);
    r.modular_n = get(fr, "modular_n", w, r.modular_n);
    r.R_grid = get(fr, "R_grid", w, r.R_grid);
    r.held_out = get(fr, "held_out", w, r.held_out);
    if (fr.contains("modular_s")) r.modular_s = get<double>(fr, "modular_s", w, 0.0);
    r.ell_windows = get(fr, "ell_windows", w, r.ell_windows);
    r.ell_tol = get(fr, "ell_tol", w, r.ell_tol);
    r.ell_offset = get(fr, "ell_offset", w, r.ell_offset);
    r.measure_R = get(fr, "measure_R", w, r.measure_R);
    r.level_cap = get(fr, "level_cap", w, r.level_cap);
    r.width_cap = get(fr, "width_cap", w, r.width_cap);
    r.concentration_samples = get(fr, "concentration_samples", w, r.concentration_samples);
    r.concentration_depth = get(fr, "concentration_depth", w, r.concentration_depth);
    r.t_offset = get(fr, "t_offset", w, r.t_offset);
    r.multiplicity_depth = get(fr, "multiplicity_depth", w, r.multiplicity_depth);
    r.normalizer_R = get(fr, "normalizer_R", w, r.normalizer_R);
    if (fr.contains("normalizer_bound")) r.normalizer_bound = get<double>(fr, "normalizer_bound", w, 0.0);
    r.frostman_samples = get(fr, "frostman_samples", w, r.frostman_samples);
    r.frostman_depth = get(fr, "frostman_depth", w, r.frostman_depth);
    if (fr.contains("frostman_s")) r.frostman_s = get<double>(fr, "frostman_s", w, 0.0);
    r.covering_epsilon = get(fr, "covering_epsilon", w, r.covering_epsilon);
    r.tolerance = get(fr, "tolerance", w, r.tolerance);
    r.budget = get(fr, "budget", w, r.budget);
    r.threads = get(fr, "threads", w, r.threads);
    r.out = get(fr, "out", w, r.out);
  } else {
    r.s_max = d;
  }
  validate(c);
  return c;
}

void validate(const ExperimentConfig& c) {
  const int d = c.ifs.d;
  const std::size_t N = c.ifs.matrices.size();
  if (N < 1) fail("ifs.matrices must not be empty");
  if (N > 255) fail("at most 255 maps");
  if (c.ifs.translations.size() != N) fail("ifs.translations must match ifs.matrices in number");
  for (const auto& m : c.ifs.matrices)
    if (m.rows() != d || m.cols() != d) fail("ifs.matrices must be d x d");
  if (c.ifs.separation_depth < 1) fail("ifs.separation_depth must be >= 1");

  if (c.target.mode == "periodic") {
    if (c.target.word.empty()) fail("target.word must not be empty");
    if (c.target.word.min_alphabet() > static_cast<int>(N)) fail("target.word uses symbols beyond the alphabet");
  } else {
    if (c.target.probabilities.size() != N) fail("target.probabilities needs one entry per map");
    if (c.target.prefix_depth < 1) fail("target.prefix_depth must be >= 1");
  }
  if (c.length.mode == "birkhoff") {
    if (c.length.weights.size() != N) fail("length.weights needs one entry per map");
    for (double w : c.length.weights)
      if (!(w > 0.0)) fail("length.weights must be positive");
  } else {
    if (c.length.max_depth < 1) fail("length.max_depth must be >= 1");
    if (c.length.table.empty()) fail("length.table must not be empty");
  }

  const RunBlock& r = c.run;
  auto positive = [](const std::vector<int>& v, const char* what) {
    if (v.empty()) fail(std::string("run.") + what + " must not be empty");
    for (int x : v)
      if (x < 1) fail(std::string("run.") + what + " entries must be >= 1");
  };
  positive(r.n_list, "n_list");
  positive(r.modular_n, "modular_n");
  positive(r.R_grid, "R_grid");
  positive(r.ell_windows, "ell_windows");
  positive(r.normalizer_R, "normalizer_R");
  if (r.s_list.empty() && !(r.s_step > 0.0)) fail("run.s_step must be positive");
  for (double s : r.s_grid())
    if (!(s >= 0.0) || s > d + 1e-12) fail("run s grid must lie in [0, d]");
  if (r.modular_s && (*r.modular_s < 0.0 || *r.modular_s > d)) fail("run.modular_s must lie in [0, d]");
  if (r.frostman_s && (*r.frostman_s < 0.0 || *r.frostman_s > d)) fail("run.frostman_s must lie in [0, d]");
  if (r.dimension_depth < 1) fail("run.dimension_depth must be >= 1");
  if (!(r.zero_tol > 0.0)) fail("run.zero_tol must be positive");
  if (r.K < 0) fail("run.K must be >= 0");
  if (r.certify_depth < 1) fail("run.certify_depth must be >= 1");
  if (!(r.certify_step > 0.0)) fail("run.certify_step must be positive");
  if (r.random_pairs < 0) fail("run.random_pairs must be >= 0");
  for (const auto& [n, R] : r.held_out)
    if (n < 1 || R < 1) fail("run.held_out entries must be >= 1");
  if (!(r.ell_tol > 0.0)) fail("run.ell_tol must be positive");
  if (r.measure_R < 1) fail("run.measure_R must be >= 1");
  if (r.level_cap < 1) fail("run.level_cap must be >= 1");
  if (r.width_cap < 1) fail("run.width_cap must be >= 1");
  if (r.concentration_samples < 1 || r.concentration_depth < 1) fail("run concentration settings must be >= 1");
  if (!(r.t_offset > 0.0)) fail("run.t_offset must be positive");
  if (r.multiplicity_depth < 0) fail("run.multiplicity_depth must be >= 0");
  if (r.normalizer_bound && !(*r.normalizer_bound >= 1.0)) fail("run.normalizer_bound must be >= 1");
  if (r.frostman_samples < 1 || r.frostman_depth < 2) fail("run frostman settings too small");
  if (!(r.covering_epsilon > 0.0)) fail("run.covering_epsilon must be positive");
  if (!(r.tolerance > 0.0)) fail("run.tolerance must be positive");
  if (r.budget < 1) fail("run.budget must be positive");
  if (r.threads < 0) fail("run.threads must be >= 0");
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open " + path.string());
  json j;
  try {
    j = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    fail(path.string() + ": " + e.what());
  }
  return parse_config(j);
}

json to_json(const ExperimentConfig& c) {
  const int N = static_cast<int>(c.ifs.matrices.size());
  json j;
  j["schema_version"] = c.schema_version;
  j["name"] = c.name;
  j["seed"] = c.seed;
  json mats = json::array();
  for (const auto& m : c.ifs.matrices) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) rows.push_back(vec(m.row(r).transpose()));
    mats.push_back(rows);
  }
  json tr = json::array();
  for (const auto& v : c.ifs.translations) tr.push_back(vec(v));
  j["ifs"] = {{"d", c.ifs.d}, {"matrices", mats}, {"translations", tr}, {"separation_depth", c.ifs.separation_depth}};

  json t = {{"mode", c.target.mode}, {"prefix_depth", c.target.prefix_depth}};
  if (c.target.mode == "periodic") t["word"] = word_text(c.target.word, N);
  else t["probabilities"] = c.target.probabilities;
  if (c.target.seed) t["seed"] = *c.target.seed;
  j["target"] = t;

  json l = {{"mode", c.length.mode}};
  if (c.length.mode == "birkhoff") {
    l["weights"] = c.length.weights;
  } else {
    json tab = json::object();
    for (const auto& [w, v] : c.length.table) tab[word_text(w, N)] = v;
    l["table"] = tab;
    l["max_depth"] = c.length.max_depth;
  }
  j["length"] = l;

  const RunBlock& r = c.run;
  json run = {{"n_list", r.n_list},
              {"s_list", r.s_list},
              {"s_min", r.s_min},
              {"s_max", r.s_max},
              {"s_step", r.s_step},
              {"dimension_depth", r.dimension_depth},
              {"zero_tol", r.zero_tol},
              {"K", r.K},
              {"certify_depth", r.certify_depth},
              {"certify_step", r.certify_step},
              {"random_pairs", r.random_pairs},
              {"modular_n", r.modular_n},
              {"R_grid", r.R_grid},
              {"held_out", r.held_out},
              {"ell_windows", r.ell_windows},
              {"ell_tol", r.ell_tol},
              {"ell_offset", r.ell_offset},
              {"measure_R", r.measure_R},
              {"level_cap", r.level_cap},
              {"width_cap", r.width_cap},
              {"concentration_samples", r.concentration_samples},
              {"concentration_depth", r.concentration_depth},
              {"t_offset", r.t_offset},
              {"multiplicity_depth", r.multiplicity_depth},
              {"normalizer_R", r.normalizer_R},
              {"frostman_samples", r.frostman_samples},
              {"frostman_depth", r.frostman_depth},
              {"covering_epsilon", r.covering_epsilon},
              {"tolerance", r.tolerance},
              {"budget", r.budget},
              {"threads", r.threads},
              {"out", r.out}};
  if (r.modular_s) run["modular_s"] = *r.modular_s;
  if (r.normalizer_bound) run["normalizer_bound"] = *r.normalizer_bound;
  if (r.frostman_s) run["frostman_s"] = *r.frostman_s;
  j["run"] = run;
  return j;
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string config_hash(const ExperimentConfig& c) {
  json j = to_json(c);
  // where results go and how many workers compute them does not change them
  j["run"].erase("out");
  j["run"].erase("threads");
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(j.dump())));
  return buf;
}

std::uint64_t sub_seed(std::uint64_t seed, const std::string& label) {
  std::string bytes(8, '\0');
  for (int k = 0; k < 8; ++k) bytes[k] = static_cast<char>((seed >> (8 * k)) & 0xff);
  std::uint64_t z = fnv1a(bytes + ":" + label);
  // splitmix64 finalizer
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

LinearMapSet make_maps(const ExperimentConfig& c) { return LinearMapSet(c.ifs.matrices); }

AffineIFS make_ifs(const ExperimentConfig& c) {
  return AffineIFS(make_maps(c), c.ifs.translations, std::nullopt, c.ifs.separation_depth);
}

TargetSpec make_target(const ExperimentConfig& c) {
  if (c.target.mode == "periodic") return TargetSpec::periodic(c.target.word);
  return TargetSpec::bernoulli(c.target.probabilities, c.target.seed.value_or(sub_seed(c.seed, "target")),
                               c.target.prefix_depth);
}

LengthFunction make_length(const ExperimentConfig& c) {
  if (c.length.mode == "birkhoff") return LengthFunction::birkhoff(c.length.weights);
  return LengthFunction::table(static_cast<int>(c.ifs.matrices.size()), c.length.table, c.length.max_depth);
}

}  // namespace shrink
