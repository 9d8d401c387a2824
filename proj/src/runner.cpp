#include "rmp/runner.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <map>
#include <sstream>
#include <vector>

#include "rmp/deviation.hpp"
#include "rmp/groups.hpp"
#include "rmp/torus.hpp"
#include "rmp/walk.hpp"

namespace rmp::runner {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string fmt_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

void expect_keys(const json& obj, const std::string& path,
                 const std::vector<std::string>& allowed) {
  if (!obj.is_object()) throw ConfigError(path + ": expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const auto& a : allowed)
      if (it.key() == a) ok = true;
    if (!ok) throw ConfigError(path + ": unknown key '" + it.key() + "'");
  }
}

template <typename T>
T require(const json& obj, const std::string& path, const std::string& key) {
  if (!obj.contains(key)) throw ConfigError(path + ": missing required key '" + key + "'");
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(path + "." + key + ": wrong type");
  }
}

template <typename T>
T value_or(const json& obj, const std::string& path, const std::string& key, T def) {
  if (!obj.contains(key)) return def;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(path + "." + key + ": wrong type");
  }
}

struct Config {
  std::string experiment;
  std::optional<std::string> preset;
  std::optional<json> inline_measure;
  std::uint64_t master_seed = 0;
  std::string output_dir = "out";
  int threads = 1;
  json parameters;
  std::string check_key;
  json echo;  // resolved config as written to the manifest
};

const std::vector<std::string> kExperiments = {
    "lyapunov",       "limit-set",   "property-s",           "lambda-split",
    "deviation-i",    "deviation-ii", "deviation-iii",        "large-deviation-suite",
    "holder",         "torus-dichotomy", "invertibility-sweep"};

// per-experiment allowed parameter keys
const std::map<std::string, std::vector<std::string>> kParamKeys = {
    {"lyapunov", {"n", "trials"}},
    {"limit-set", {"r", "n", "trials", "detect_n", "detect_trials"}},
    {"property-s", {"r", "n", "trials", "starts", "steps", "pass_threshold", "detect_n", "detect_trials"}},
    {"lambda-split", {"r", "n", "trials", "detect_n", "detect_trials", "rate_n", "rate_trials"}},
    {"deviation-i", {"omega", "n", "l_values", "trials", "search_starts", "search_steps", "limit_n", "limit_trials", "r", "detect_n", "detect_trials"}},
    {"deviation-ii", {"omega", "schedule", "trials", "r", "detect_n", "detect_trials", "search_starts", "search_steps", "limit_n", "limit_trials"}},
    {"deviation-iii", {"omega", "n", "l_values", "trials", "search_starts", "search_steps", "limit_n", "limit_trials", "r", "detect_n", "detect_trials"}},
    {"large-deviation-suite", {"omega", "n", "schedule", "trials", "r", "detect_n", "detect_trials", "split_n", "split_trials"}},
    {"holder", {"r", "burn_in", "trials", "probes", "rho_grid", "detect_n", "detect_trials"}},
    {"torus-dichotomy", {"x0", "t", "schedule", "N", "trials", "bits", "mode"}},
    {"invertibility-sweep", {"k", "d", "r", "count"}},
};

Config parse_config(const json& j) {
  expect_keys(j, "config",
              {"experiment", "preset", "measure", "master_seed", "output_dir", "threads",
               "parameters", "check_key"});
  Config c;
  c.experiment = require<std::string>(j, "config", "experiment");
  bool known = false;
  for (const auto& e : kExperiments)
    if (e == c.experiment) known = true;
  if (!known) throw ConfigError("config.experiment: unknown experiment '" + c.experiment + "'");

  if (j.contains("preset")) c.preset = require<std::string>(j, "config", "preset");
  if (j.contains("measure")) c.inline_measure = j.at("measure");
  if (c.experiment != "invertibility-sweep") {
    if (!c.preset && !c.inline_measure)
      throw ConfigError("config: need either 'preset' or 'measure'");
    if (c.preset && c.inline_measure)
      throw ConfigError("config: 'preset' and 'measure' are mutually exclusive");
  }
  if (c.preset) {
    bool found = false;
    for (const auto& p : groups::preset_names())
      if (p == *c.preset) found = true;
    if (!found) {
      std::string msg = "config.preset: unknown preset '" + *c.preset + "'; available:";
      for (const auto& p : groups::preset_names()) msg += " " + p;
      throw ConfigError(msg);
    }
  }
  if (c.inline_measure) {
    expect_keys(*c.inline_measure, "config.measure", {"dim", "atoms"});
    const int dim = require<int>(*c.inline_measure, "config.measure", "dim");
    if (dim < 1) throw ConfigError("config.measure.dim: must be positive");
    if (!c.inline_measure->contains("atoms") || !c.inline_measure->at("atoms").is_array() ||
        c.inline_measure->at("atoms").empty())
      throw ConfigError("config.measure.atoms: need a nonempty array");
    for (const auto& a : c.inline_measure->at("atoms")) {
      expect_keys(a, "config.measure.atoms[]", {"matrix", "weight"});
      if (!a.contains("matrix") || !a.contains("weight"))
        throw ConfigError("config.measure.atoms[]: need matrix and weight");
    }
  }
  c.master_seed = require<std::uint64_t>(j, "config", "master_seed");
  c.output_dir = value_or<std::string>(j, "config", "output_dir", "out");
  c.threads = value_or<int>(j, "config", "threads", 1);
  if (c.threads < 1) throw ConfigError("config.threads: must be >= 1");
  c.parameters = j.contains("parameters") ? j.at("parameters") : json::object();
  expect_keys(c.parameters, "config.parameters", kParamKeys.at(c.experiment));
  c.check_key = value_or<std::string>(j, "config", "check_key",
                                      c.experiment + "/" + (c.preset ? *c.preset : "inline"));
  return c;
}

// parameter validation that never executes the experiment
void validate_parameters(const Config& c) {
  const json& p = c.parameters;
  const std::string path = "config.parameters";
  auto positive = [&](const std::string& key, long def) {
    const long v = value_or<long>(p, path, key, def);
    if (v < 1) throw ConfigError(path + "." + key + ": must be >= 1");
    return v;
  };
  if (c.experiment == "lyapunov") {
    positive("n", 200);
    const long trials = positive("trials", 400);
    if (trials < 2) throw ConfigError(path + ".trials: must be >= 2");
  } else if (c.experiment == "torus-dichotomy") {
    const double t = value_or<double>(p, path, "t", 0.5);
    if (!(t > 0.0) || t >= 1.0) throw ConfigError(path + ".t: must be in (0,1)");
    positive("N", 5);
    positive("trials", 20000);
    const std::string x0 = value_or<std::string>(p, path, "x0", "sqrt:2,3");
    const std::string mode = value_or<std::string>(p, path, "mode", "auto");
    if (mode != "auto" && mode != "exact" && mode != "empirical")
      throw ConfigError(path + ".mode: must be auto, exact or empirical");
    if (x0.rfind("sqrt:", 0) != 0) {
      // rational form "p1/q,p2/q,..."; enforce the exact-mode state cap
      const auto slash = x0.find('/');
      if (slash == std::string::npos)
        throw ConfigError(path + ".x0: expected 'sqrt:m1,m2,...' or 'p1/q,p2/q,...'");
      if (mode == "exact") {
        // parse the (shared) denominator after the first '/'
        std::uint64_t q = 0;
        std::size_t i = slash + 1;
        while (i < x0.size() && isdigit(x0[i])) q = q * 10 + (x0[i++] - '0');
        double states = 1.0;
        int dims = 1;
        for (char ch : x0)
          if (ch == ',') ++dims;
        for (int k = 0; k < dims; ++k) states *= static_cast<double>(q);
        if (states > 1e6)
          throw ConfigError(path +
                            ".x0: exact mode state space q^d exceeds 1e6; use empirical mode");
      }
    }
  } else if (c.experiment == "invertibility-sweep") {
    const long k = positive("k", 2);
    const long d = positive("d", 4);
    const long r = positive("r", 2);
    if (d != k * r) throw ConfigError(path + ": requires d = k * r");
    positive("count", 10000);
  } else if (c.experiment == "deviation-i" || c.experiment == "deviation-iii") {
    const double omega = value_or<double>(p, path, "omega", 0.2);
    if (!(omega > 0)) throw ConfigError(path + ".omega: must be positive");
    positive("n", 120);
    const long trials = positive("trials", 5000);
    if (trials < 100) throw ConfigError(path + ".trials: must be >= 100");
  } else if (c.experiment == "deviation-ii" || c.experiment == "large-deviation-suite") {
    const double omega = value_or<double>(p, path, "omega", 0.2);
    if (!(omega > 0)) throw ConfigError(path + ".omega: must be positive");
    const long trials = positive("trials", 1000);
    if (trials < 100) throw ConfigError(path + ".trials: must be >= 100");
  } else if (c.experiment == "holder") {
    const long trials = positive("trials", 2000);
    if (trials < 2000) throw ConfigError(path + ".trials: must be >= 2000");
    positive("burn_in", 200);
  } else {
    positive("n", 200);
    positive("trials", 400);
  }
}

groups::GroupMeasure measure_of(const Config& c) {
  if (c.preset) return groups::preset(*c.preset);
  const json& m = *c.inline_measure;
  const int dim = m.at("dim").get<int>();
  std::vector<linalg::Mat> atoms;
  std::vector<double> weights;
  for (const auto& a : m.at("atoms")) {
    const auto rows = a.at("matrix");
    linalg::Mat g(dim, dim);
    if (static_cast<int>(rows.size()) != dim)
      throw ConfigError("config.measure.atoms[].matrix: wrong row count");
    for (int i = 0; i < dim; ++i) {
      if (static_cast<int>(rows[i].size()) != dim)
        throw ConfigError("config.measure.atoms[].matrix: wrong column count");
      for (int j = 0; j < dim; ++j) g(i, j) = rows[i][j].get<double>();
    }
    atoms.push_back(g);
    weights.push_back(a.at("weight").get<double>());
  }
  try {
    return groups::GroupMeasure(dim, std::move(atoms), std::move(weights), "inline");
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config.measure: ") + e.what());
  }
}

torus::TorusPoint parse_x0(const std::string& spec, int dim, int bits) {
  if (spec.rfind("sqrt:", 0) == 0) {
    std::vector<int> rad;
    std::stringstream ss(spec.substr(5));
    std::string tok;
    while (std::getline(ss, tok, ',')) rad.push_back(std::stoi(tok));
    if (static_cast<int>(rad.size()) != dim)
      throw ConfigError("x0: coordinate count does not match walk dimension");
    return torus::TorusPoint::sqrt_surrogate(rad, bits);
  }
  std::vector<torus::cpp_int> nums;
  torus::cpp_int den = 0;
  std::stringstream ss(spec);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    const auto slash = tok.find('/');
    if (slash == std::string::npos) throw ConfigError("x0: expected entries of the form p/q");
    const torus::cpp_int p(tok.substr(0, slash));
    const torus::cpp_int q(tok.substr(slash + 1));
    if (den == 0)
      den = q;
    else if (den != q)
      throw ConfigError("x0: all coordinates must share one denominator");
    nums.push_back(p);
  }
  if (static_cast<int>(nums.size()) != dim)
    throw ConfigError("x0: coordinate count does not match walk dimension");
  return torus::TorusPoint::exact_rational(std::move(nums), den);
}

struct Artifacts {
  fs::path dir;
  json summary;
  std::map<std::string, std::string> csv_checksums;

  void write_csv(const std::string& name, const std::string& content) {
    std::ofstream f(dir / name, std::ios::binary);
    f << content;
    csv_checksums[name] = fnv1a_hex(content);
  }
};

json profile_to_json(const walk::SpectralProfile& p) {
  json j;
  j["n"] = p.n;
  j["trials"] = p.trials;
  j["lambda"] = std::vector<double>(p.lambda.data(), p.lambda.data() + p.lambda.size());
  j["stderr"] = std::vector<double>(p.stderr_.data(), p.stderr_.data() + p.stderr_.size());
  j["sum_lambda"] = p.sum_lambda();
  j["stderr_total"] = p.stderr_total();
  return j;
}

json decay_to_json(const deviation::DecayReport& r) {
  json j;
  j["fitted_c"] = r.fitted_c;
  j["r_squared"] = r.r_squared;
  j["fit_points"] = r.fit_points;
  j["trials"] = r.trials;
  j["p_hat"] = r.p_hat;
  j["l_values"] = r.l_values;
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

std::string decay_to_csv(const deviation::DecayReport& r) {
  std::string csv = "l_or_n,hits,trials,p_hat,wilson_lo,wilson_hi\n";
  for (std::size_t i = 0; i < r.l_values.size(); ++i) {
    csv += std::to_string(r.l_values[i]) + "," + std::to_string(r.hits[i]) + "," +
           std::to_string(r.trials) + "," + fmt_double(r.p_hat[i]) + "," +
           fmt_double(r.wilson_lo[i]) + "," + fmt_double(r.wilson_hi[i]) + "\n";
  }
  return csv;
}

// shared pre-processing for the walk-side experiments: spectrum, proximal
// rank, limit set and the adversarial transversality search
struct WalkContext {
  walk::SpectralProfile profile;
  int r = 0;
  walk::LimitSetSample limits;
  walk::PropertySReport search;
  linalg::Subspace adversarial_v{linalg::Mat::Identity(2, 1)};
  linalg::Subspace adversarial_w{linalg::Mat::Identity(2, 1)};
};

WalkContext walk_context(const groups::GroupMeasure& mu, const Config& c, bool need_search) {
  const json& p = c.parameters;
  WalkContext ctx;
  const int detect_n = value_or<int>(p, "parameters", "detect_n", 200);
  const int detect_trials = value_or<int>(p, "parameters", "detect_trials", 400);
  ctx.profile = walk::estimate_lyapunov(mu, detect_n, detect_trials,
                                        derive_seed(c.master_seed, 1), c.threads);
  if (p.contains("r")) {
    ctx.r = p.at("r").get<int>();
  } else {
    const auto det = walk::detect_proximal_dimension(ctx.profile);
    if (!det.r) throw std::runtime_error("proximal dimension detection inconclusive: " + det.note);
    ctx.r = *det.r;
  }
  const int limit_n = value_or<int>(p, "parameters", "limit_n", 120);
  const int limit_trials = value_or<int>(p, "parameters", "limit_trials", 500);
  ctx.limits = walk::sample_limit_set(mu, ctx.r, limit_n, limit_trials,
                                      derive_seed(c.master_seed, 2), c.threads);
  if (need_search) {
    walk::PropertySBudget budget;
    budget.starts = value_or<int>(p, "parameters", "search_starts", 64);
    budget.steps = value_or<int>(p, "parameters", "search_steps", 200);
    ctx.search = walk::test_property_s(ctx.limits, budget, derive_seed(c.master_seed, 3), 0.05,
                                       c.threads);
    ctx.adversarial_w = linalg::Subspace(ctx.search.witness_frame);
    // the limit point closest to the witness Schubert variety
    std::size_t arg = 0;
    double best = 2.0;
    for (std::size_t i = 0; i < ctx.limits.points.size(); ++i) {
      const double g = linalg::gap(ctx.limits.points[i], ctx.adversarial_w);
      if (g < best) {
        best = g;
        arg = i;
      }
    }
    ctx.adversarial_v = ctx.limits.points[arg];
  }
  return ctx;
}

void run_experiment(const Config& c, Artifacts& art, std::ostream& log) {
  const json& p = c.parameters;
  const std::string path = "parameters";

  if (c.experiment == "invertibility-sweep") {
    const auto sweep = torus::invertibility_sweep(
        value_or<int>(p, path, "k", 2), value_or<int>(p, path, "d", 4),
        value_or<int>(p, path, "r", 2), value_or<long>(p, path, "count", 10000), c.master_seed);
    art.summary["total"] = sweep.total;
    art.summary["hypothesis_count"] = sweep.hypothesis_count;
    art.summary["singular_among_hypothesis"] = sweep.singular_among_hypothesis;
    art.summary["singular_total"] = sweep.singular_total;
    return;
  }

  const groups::GroupMeasure mu = measure_of(c);

  if (c.experiment == "lyapunov") {
    const auto profile =
        walk::estimate_lyapunov(mu, value_or<int>(p, path, "n", 200),
                                value_or<int>(p, path, "trials", 400), c.master_seed, c.threads);
    art.summary["profile"] = profile_to_json(profile);
    const auto det = walk::detect_proximal_dimension(profile);
    art.summary["detected_r"] = det.r ? json(*det.r) : json();
    art.summary["detection_note"] = det.note;
    std::string csv = "k,lambda,stderr\n";
    for (int k = 0; k < profile.lambda.size(); ++k)
      csv += std::to_string(k + 1) + "," + fmt_double(profile.lambda(k)) + "," +
             fmt_double(profile.stderr_(k)) + "\n";
    art.write_csv("profile.csv", csv);
    return;
  }

  if (c.experiment == "limit-set") {
    WalkContext ctx = walk_context(mu, c, false);
    art.summary["profile"] = profile_to_json(ctx.profile);
    art.summary["limit_set_summary"] = {
        {"r", ctx.limits.r},
        {"points", ctx.limits.points.size()},
        {"horizon", ctx.limits.horizon},
        {"degenerate_excluded", ctx.limits.degenerate_excluded}};
    // structure invariance diagnostics when the preset carries structures
    if (!mu.structures().empty()) {
      double worst = 0.0;
      for (const auto& v : ctx.limits.points) {
        for (const auto& j : mu.structures()) {
          linalg::Mat jm(mu.dim(), mu.dim());
          for (int a = 0; a < mu.dim(); ++a)
            for (int b = 0; b < mu.dim(); ++b) jm(a, b) = static_cast<double>(j(a, b));
          const auto jv = linalg::Subspace::span_of(jm * v.frame());
          worst = std::max(worst, linalg::hausdorff(v, jv));
        }
      }
      art.summary["limit_set_summary"]["max_structure_defect"] = worst;
    }
    return;
  }

  if (c.experiment == "property-s") {
    WalkContext ctx = walk_context(mu, c, true);
    art.summary["profile"] = profile_to_json(ctx.profile);
    art.summary["limit_set_summary"] = {{"r", ctx.limits.r},
                                        {"points", ctx.limits.points.size()},
                                        {"degenerate_excluded", ctx.limits.degenerate_excluded}};
    art.summary["property_S_verdict"] = ctx.search.verdict;
    art.summary["min_max_gap"] = ctx.search.min_max_gap;
    return;
  }

  if (c.experiment == "lambda-split") {
    WalkContext ctx = walk_context(mu, c, false);
    const auto pis =
        walk::estimate_pi_gamma(mu, ctx.r, value_or<int>(p, path, "n", 120),
                                value_or<int>(p, path, "trials", 500),
                                derive_seed(c.master_seed, 4), c.threads);
    const auto split = walk::compute_lambda_split(pis, ctx.r, mu, derive_seed(c.master_seed, 5));
    art.summary["profile"] = profile_to_json(ctx.profile);
    art.summary["lambda_split_dims"] = {{"total", split.dim_total},
                                        {"plus", split.plus_frame.cols()},
                                        {"zero", split.zero_frame.cols()}};
    art.summary["residual"] = split.residual;
    art.summary["inconclusive"] = split.inconclusive;
    art.summary["reducible_suspect"] = split.reducible_suspect;
    if (!split.inconclusive) {
      const auto rates = walk::split_growth_rates(
          mu, split, ctx.r, value_or<int>(p, path, "rate_n", 200),
          value_or<int>(p, path, "rate_trials", 100), derive_seed(c.master_seed, 6), c.threads);
      art.summary["rate_plus"] = rates.rate_plus;
      art.summary["rate_zero"] = rates.rate_zero;
    }
    return;
  }

  if (c.experiment == "deviation-i" || c.experiment == "deviation-iii") {
    WalkContext ctx = walk_context(mu, c, true);
    deviation::DeviationConfig cfg;
    cfg.omega = value_or<double>(p, path, "omega", 0.2);
    cfg.n = value_or<int>(p, path, "n", 120);
    cfg.trials = value_or<int>(p, path, "trials", 5000);
    cfg.l_values = value_or<std::vector<int>>(p, path, "l_values", {20, 30, 40, 50, 60});
    cfg.seed = derive_seed(c.master_seed, 7);
    cfg.threads = c.threads;
    cfg.V = ctx.adversarial_v;
    cfg.W = ctx.adversarial_w;
    const auto rep = (c.experiment == "deviation-i")
                         ? deviation::verify_gap_nonconcentration(mu, cfg)
                         : deviation::verify_vplus_nonconcentration(mu, cfg);
    art.summary["decay"] = decay_to_json(rep);
    art.summary["property_S_verdict"] = ctx.search.verdict;
    art.summary["fitted_c"] = rep.fitted_c;
    art.summary["r_squared"] = rep.r_squared;
    art.write_csv("decay.csv", decay_to_csv(rep));
    return;
  }

  if (c.experiment == "deviation-ii") {
    WalkContext ctx = walk_context(mu, c, true);
    deviation::DeviationConfig cfg;
    cfg.omega = value_or<double>(p, path, "omega", 0.2);
    cfg.l_values = value_or<std::vector<int>>(p, path, "schedule", {40, 60, 80, 100, 120});
    cfg.n = *std::max_element(cfg.l_values.begin(), cfg.l_values.end());
    cfg.trials = value_or<int>(p, path, "trials", 1000);
    cfg.seed = derive_seed(c.master_seed, 8);
    cfg.threads = c.threads;
    cfg.V = ctx.adversarial_v;
    const auto rep = deviation::verify_contraction(mu, cfg, ctx.profile, ctx.r);
    art.summary["decay"] = decay_to_json(rep);
    art.write_csv("decay.csv", decay_to_csv(rep));
    return;
  }

  if (c.experiment == "large-deviation-suite") {
    WalkContext ctx = walk_context(mu, c, false);
    deviation::DeviationConfig cfg;
    cfg.omega = value_or<double>(p, path, "omega", 0.2);
    cfg.l_values = value_or<std::vector<int>>(p, path, "schedule", {20, 40, 60, 80});
    cfg.n = value_or<int>(p, path, "n", 80);
    cfg.trials = value_or<int>(p, path, "trials", 1000);
    cfg.seed = derive_seed(c.master_seed, 9);
    cfg.threads = c.threads;
    std::optional<walk::LambdaSplit> split;
    if (ctx.r > 1) {
      const auto pis = walk::estimate_pi_gamma(mu, ctx.r, value_or<int>(p, path, "split_n", 120),
                                               value_or<int>(p, path, "split_trials", 400),
                                               derive_seed(c.master_seed, 10), c.threads);
      split = walk::compute_lambda_split(pis, ctx.r, mu, derive_seed(c.master_seed, 11));
    }
    const auto suite = deviation::verify_large_deviation_suite(
        mu, cfg, ctx.profile, split ? &*split : nullptr);
    art.summary["singular_values"] = decay_to_json(suite.singular_values);
    art.summary["vector_growth"] = decay_to_json(suite.vector_growth);
    art.summary["form_alignment"] = decay_to_json(suite.form_alignment);
    art.summary["form_note"] = suite.form_note;
    art.write_csv("singular_values.csv", decay_to_csv(suite.singular_values));
    art.write_csv("vector_growth.csv", decay_to_csv(suite.vector_growth));
    art.write_csv("form_alignment.csv", decay_to_csv(suite.form_alignment));
    return;
  }

  if (c.experiment == "holder") {
    WalkContext ctx = walk_context(mu, c, true);
    const int burn_in = value_or<int>(p, path, "burn_in", 200);
    const int trials = value_or<int>(p, path, "trials", 2000);
    Rng rng(derive_seed(c.master_seed, 12));
    const auto start = linalg::random_subspace(mu.dim(), ctx.r, rng);
    const auto pts = walk::stationary_sample(mu, ctx.r, burn_in, trials, start,
                                             derive_seed(c.master_seed, 13), c.threads);
    std::vector<linalg::Subspace> probes{ctx.adversarial_w};
    const int extra = value_or<int>(p, path, "probes", 4);
    for (int i = 0; i < extra; ++i)
      probes.push_back(linalg::random_subspace(mu.dim(), mu.dim() - ctx.r, rng));
    std::vector<double> rho_grid =
        value_or<std::vector<double>>(p, path, "rho_grid",
                                      {1e-4, 3e-4, 1e-3, 3e-3, 1e-2, 3e-2, 1e-1, 3e-1, 0.5});
    const auto rep = deviation::verify_holder_regularity(pts, probes, rho_grid);
    art.summary["kappa_hat"] = rep.kappa_hat;
    art.summary["moment_value"] = rep.moment_value;
    if (!rep.note.empty()) art.summary["note"] = rep.note;
    return;
  }

  if (c.experiment == "torus-dichotomy") {
    const int bits = value_or<int>(p, path, "bits", 512);
    const auto x0 = parse_x0(value_or<std::string>(p, path, "x0", "sqrt:2,3"), mu.dim(), bits);
    const double t = value_or<double>(p, path, "t", 0.5);
    const int bign = value_or<int>(p, path, "N", 5);
    const int trials = value_or<int>(p, path, "trials", 20000);
    const std::vector<int> schedule =
        value_or<std::vector<int>>(p, path, "schedule", {5, 10, 15, 20, 25, 30, 35, 40});
    const auto rep = torus::dichotomy_experiment(mu, x0, t, schedule, bign, trials,
                                                 derive_seed(c.master_seed, 14), c.threads);
    art.summary["mode"] = rep.mode;
    art.summary["decay_threshold_n"] = rep.decay_threshold_n;
    art.summary["persistence_flat"] = rep.persistence_flat;
    art.summary["persistent_frequencies"] = rep.persistent_frequencies;
    art.summary["A_tn_sizes"] = rep.large_set_sizes;
    art.summary["max_nonzero_abs"] = rep.max_nonzero_abs;
    if (!rep.note.empty()) art.summary["note"] = rep.note;
    // covering numbers of the large-coefficient sets at the final horizon
    if (!rep.schedule.empty()) {
      std::vector<linalg::Vec> pts;
      const int last_n = rep.schedule.back();
      for (const auto& row : rep.rows) {
        if (row.n != last_n || row.abs < t) continue;
        linalg::Vec v(mu.dim());
        for (int i = 0; i < mu.dim(); ++i) v(i) = static_cast<double>(row.a[static_cast<std::size_t>(i)]);
        pts.push_back(v);
      }
      const auto cov = torus::covering_number(pts, 1.5);
      art.summary["covering_numbers"] = {{"greedy_cover", cov.greedy_cover},
                                         {"separated_lower", cov.separated_lower}};
    }
    std::string csv = "n";
    for (int i = 0; i < mu.dim(); ++i) csv += ",a" + std::to_string(i + 1);
    csv += ",re,im,abs,stderr\n";
    for (const auto& row : rep.rows) {
      csv += std::to_string(row.n);
      for (auto a : row.a) csv += "," + std::to_string(a);
      csv += "," + fmt_double(row.value.real()) + "," + fmt_double(row.value.imag()) + "," +
             fmt_double(row.abs) + "," + fmt_double(row.stderr_) + "\n";
    }
    art.write_csv("fourier.csv", csv);
    return;
  }

  throw ConfigError("unhandled experiment " + c.experiment);
  (void)log;
}

const json* resolve_path(const json& root, const std::string& dotted) {
  const json* cur = &root;
  std::stringstream ss(dotted);
  std::string tok;
  while (std::getline(ss, tok, '.')) {
    if (cur->is_array()) {
      const std::size_t idx = std::stoul(tok);
      if (idx >= cur->size()) return nullptr;
      cur = &(*cur)[idx];
    } else if (cur->is_object() && cur->contains(tok)) {
      cur = &cur->at(tok);
    } else {
      return nullptr;
    }
  }
  return cur;
}

int check_against_expected(const Config& c, const Artifacts& art,
                           const std::string& expected_path, std::ostream& log) {
  std::ifstream f(expected_path);
  if (!f) {
    log << "check: cannot open expected-results file " << expected_path << "\n";
    return 1;
  }
  json exp;
  f >> exp;
  if (!exp.contains("entries") || !exp.at("entries").contains(c.check_key)) {
    log << "check: no expected entry for key '" << c.check_key << "'\n";
    return 1;
  }
  const json& entry = exp.at("entries").at(c.check_key);
  int failures = 0;
  if (entry.contains("values")) {
    for (auto it = entry.at("values").begin(); it != entry.at("values").end(); ++it) {
      const json* got = resolve_path(art.summary, it.key());
      if (got == nullptr) {
        log << "check: summary missing value '" << it.key() << "'\n";
        ++failures;
        continue;
      }
      const double want = it.value().at("value").get<double>();
      const double tol = it.value().at("tol").get<double>();
      const double have = got->get<double>();
      if (!(std::abs(have - want) <= tol)) {
        log << "check: " << it.key() << " = " << have << ", expected " << want << " +- " << tol
            << "\n";
        ++failures;
      }
    }
  }
  if (entry.contains("checksums")) {
    for (auto it = entry.at("checksums").begin(); it != entry.at("checksums").end(); ++it) {
      const auto found = art.csv_checksums.find(it.key());
      if (found == art.csv_checksums.end() || found->second != it.value().get<std::string>()) {
        log << "check: checksum mismatch for " << it.key() << "\n";
        ++failures;
      }
    }
  }
  if (failures == 0) log << "check: all expectations met for '" << c.check_key << "'\n";
  return failures == 0 ? 0 : 1;
}

}  // namespace

std::string list_presets_text() {
  std::string out = "available presets:\n";
  for (const auto& p : groups::preset_names()) out += "  " + p + "\n";
  out += "(slh1-in-sl4 is recognized but deliberately not shipped: compact realification)\n";
  return out;
}

int validate(const std::string& config_path, std::ostream& diagnostics) {
  try {
    std::ifstream f(config_path);
    if (!f) throw ConfigError("cannot open config file " + config_path);
    json j;
    try {
      f >> j;
    } catch (const json::exception& e) {
      throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    const Config c = parse_config(j);
    validate_parameters(c);
    diagnostics << "ok: " << c.experiment << " experiment, "
                << (c.preset ? *c.preset : std::string("inline measure")) << ", seed "
                << c.master_seed << "\n";
    return 0;
  } catch (const ConfigError& e) {
    diagnostics << "config error: " << e.what() << "\n";
    return 2;
  }
}

int run(const RunOptions& opts, std::ostream& log) {
  Config c;
  try {
    std::ifstream f(opts.config_path);
    if (!f) throw ConfigError("cannot open config file " + opts.config_path);
    json j;
    try {
      f >> j;
    } catch (const json::exception& e) {
      throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (opts.seed_override) j["master_seed"] = *opts.seed_override;
    if (opts.threads_override) j["threads"] = *opts.threads_override;
    if (opts.out_override) j["output_dir"] = *opts.out_override;
    c = parse_config(j);
    validate_parameters(c);
    c.echo = j;
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << "\n";
    return 2;
  }

  Artifacts art;
  art.dir = c.output_dir;
  fs::create_directories(art.dir);

  const auto t0 = std::chrono::steady_clock::now();
  try {
    run_experiment(c, art, log);
  } catch (const std::exception& e) {
    log << "experiment failed: " << e.what() << "\n";
    return 2;
  }
  const auto wall_ms =
      std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0)
          .count();

  {
    std::ofstream f(art.dir / "summary.json", std::ios::binary);
    f << art.summary.dump(2) << "\n";
  }
  json manifest;
  manifest["config"] = c.echo;
  manifest["engine_version"] = kEngineVersion;
  manifest["wall_ms"] = wall_ms;
  manifest["summary"] = "summary.json";
  manifest["csv_checksums"] = art.csv_checksums;
  manifest["summary_checksum"] = fnv1a_hex(art.summary.dump(2));
  {
    std::ofstream f(art.dir / "manifest.json", std::ios::binary);
    f << manifest.dump(2) << "\n";
  }
  log << "wrote " << (art.dir / "manifest.json").string() << "\n";

  if (opts.check) return check_against_expected(c, art, opts.expected_results_path, log);
  return 0;
}

}  // namespace rmp::runner
