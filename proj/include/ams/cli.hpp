#pragma once

// Command-line front end: experiment configs, subcommand dispatch, CSV/JSON
// emitters. Exit codes: 0 ok, 1 test failure, 2 configuration error,
// 3 runaway run.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "ams/acceptance.hpp"
#include "ams/ams.hpp"
#include "ams/models.hpp"
#include "ams/oracle.hpp"
#include "ams/stats.hpp"

#ifndef AMS_BUILD_ID
#define AMS_BUILD_ID "dev"
#endif

namespace ams::cli {

using json = nlohmann::ordered_json;

enum ExitCode : int { kOk = 0, kTestFailure = 1, kConfigError = 2, kRunaway = 3 };

struct OutputSpec {
  std::string format = "csv";  // csv | json
  std::string path;            // empty: stdout
};

struct ExperimentConfig {
  ModelSpec model;
  int n = 100;
  int k = 1;
  double x = 0.0;
  double a = 1.0;
  std::int64_t max_iterations = 0;
  std::int64_t m_reps = 1000;
  std::uint64_t seed = 1;
  OutputSpec output;
  std::optional<oracle::CostModel> cost;

  AmsConfig ams() const { return AmsConfig{n, k, x, a, max_iterations}; }

  void validate() const {
    ams().validate();
    if (m_reps < 1) throw input_error("m_reps must be >= 1");
    if (output.format != "csv" && output.format != "json")
      throw input_error("output.format must be 'csv' or 'json'");
    (void)make_model(model);
    if (model.key == "committor" && a != 1.0) throw input_error("committor model requires a = 1");
    if (cost) cost->validate();
  }

  json to_json() const {
    json j;
    j["model"] = {{"key", model.key}, {"params", model.params}};
    j["n"] = n;
    j["k"] = k;
    j["x"] = x;
    j["a"] = a;
    j["max_iterations"] = max_iterations;
    j["m_reps"] = m_reps;
    j["seed"] = seed;
    j["output"] = {{"format", output.format}, {"path", output.path}};
    if (cost) j["cost"] = {{"c0", cost->c0}, {"c1", cost->c1}, {"epsilon", cost->epsilon}};
    return j;
  }
};

inline ExperimentConfig config_from_json(const json& j) {
  static const std::vector<std::string> known = {"model", "n",    "k",      "x",   "a",
                                                 "max_iterations", "m_reps", "seed", "output",
                                                 "cost"};
  if (!j.is_object()) throw input_error("config: top level must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw input_error("config: unknown field '" + key + "'");
  }
  ExperimentConfig c;
  try {
    if (j.contains("model")) {
      const auto& m = j.at("model");
      if (m.is_string()) {
        c.model.key = m.get<std::string>();
      } else {
        c.model.key = m.at("key").get<std::string>();
        if (m.contains("params")) c.model.params = m.at("params").get<std::vector<double>>();
      }
    }
    if (j.contains("n")) c.n = j.at("n").get<int>();
    if (j.contains("k")) c.k = j.at("k").get<int>();
    if (j.contains("x")) c.x = j.at("x").get<double>();
    if (j.contains("a")) c.a = j.at("a").get<double>();
    if (j.contains("max_iterations")) c.max_iterations = j.at("max_iterations").get<std::int64_t>();
    if (j.contains("m_reps")) c.m_reps = j.at("m_reps").get<std::int64_t>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("output")) {
      const auto& o = j.at("output");
      if (o.contains("format")) c.output.format = o.at("format").get<std::string>();
      if (o.contains("path")) c.output.path = o.at("path").get<std::string>();
    }
    if (j.contains("cost")) {
      const auto& q = j.at("cost");
      oracle::CostModel cm;
      if (q.contains("c0")) cm.c0 = q.at("c0").get<double>();
      if (q.contains("c1")) cm.c1 = q.at("c1").get<double>();
      if (q.contains("epsilon")) cm.epsilon = q.at("epsilon").get<double>();
      c.cost = cm;
    }
  } catch (const json::exception& e) {
    throw input_error(std::string("config: ") + e.what());
  }
  return c;
}

/// FNV-1a 64 of the canonical JSON form of the effective config.
inline std::string config_digest(const ExperimentConfig& c) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : c.to_json().dump()) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline json provenance(const ExperimentConfig& c) {
  return {{"seed", c.seed}, {"config_digest", config_digest(c)}, {"build", AMS_BUILD_ID}};
}

inline std::string provenance_comment(const ExperimentConfig& c) {
  return "# seed=" + std::to_string(c.seed) + " config_digest=" + config_digest(c) +
         " build=" + AMS_BUILD_ID + "\n";
}

/// Writes to output.path if set, else to `out`. Always LF line endings.
inline void emit(const ExperimentConfig& c, std::ostream& out, const std::string& text) {
  if (c.output.path.empty()) {
    out << text;
    out.flush();
    return;
  }
  std::ofstream f(c.output.path, std::ios::binary);
  if (!f) throw input_error("cannot open output path '" + c.output.path + "'");
  f << text;
}

template <class F>
decltype(auto) with_model(const ExperimentConfig& c, F&& f) {
  const AnyModel model = make_model(c.model);
  return std::visit(std::forward<F>(f), model);
}

// ---------------------------------------------------------------------------
// Subcommands

inline int cmd_run(const ExperimentConfig& c, std::ostream& out) {
  const AmsResult r = with_model(
      c, [&](const auto& m) { return run_ams(m, c.ams(), c.seed, 0, true); });
  json j;
  j["J"] = r.j_count;
  j["C"] = r.corrector();
  j["estimate"] = r.estimate;
  j["survivors"] = r.survivors;
  j["samples_drawn"] = r.samples_drawn;
  j["n"] = r.n;
  j["k"] = r.k;
  j["level_trace"] = r.level_trace;
  j["provenance"] = provenance(c);
  emit(c, out, j.dump(2) + "\n");
  return kOk;
}

inline std::string summary_csv(const ExperimentConfig& c, const ReplicationSummary& s) {
  std::ostringstream o;
  o << provenance_comment(c);
  o << "model,n,k,x,a,M,mean,var,se_mean,se_var,mean_J,var_J,mean_samples,wallclock\n";
  o << c.model.key << ',' << s.n << ',' << s.k << ',' << num(s.x) << ',' << num(s.a) << ','
    << s.m_reps << ',' << num(s.mean_estimate) << ',' << num(s.variance_estimate) << ','
    << num(s.se_mean) << ',' << num(s.se_variance) << ',' << num(s.mean_J) << ','
    << num(s.var_J) << ',' << num(s.mean_samples) << ',' << num(s.wallclock_seconds) << '\n';
  return o.str();
}

inline json summary_json(const ExperimentConfig& c, const ReplicationSummary& s) {
  json j;
  j["model"] = c.model.key;
  j["n"] = s.n;
  j["k"] = s.k;
  j["x"] = s.x;
  j["a"] = s.a;
  j["M"] = s.m_reps;
  j["mean"] = s.mean_estimate;
  j["var"] = s.variance_estimate;
  j["se_mean"] = s.se_mean;
  j["se_var"] = s.se_variance;
  j["mean_J"] = s.mean_J;
  j["var_J"] = s.var_J;
  j["mean_samples"] = s.mean_samples;
  j["j_histogram"] = s.j_histogram;
  j["wallclock"] = s.wallclock_seconds;
  j["provenance"] = provenance(c);
  return j;
}

inline int cmd_replicate(const ExperimentConfig& c, std::ostream& out,
                         const std::string& runs_csv) {
  if (c.m_reps < 2) throw input_error("replicate: m_reps must be >= 2");
  const bool keep = !runs_csv.empty();
  const auto s = with_model(c, [&](const auto& m) {
    return run_replications(m, c.ams(), c.m_reps, c.seed, keep);
  });
  if (keep) {
    std::ofstream f(runs_csv, std::ios::binary);
    if (!f) throw input_error("cannot open runs CSV path '" + runs_csv + "'");
    f << provenance_comment(c) << "index,J,C,estimate\n";
    for (std::size_t i = 0; i < s.runs.size(); ++i) {
      const auto& r = s.runs[i];
      f << i << ',' << r.j_count << ',' << num(static_cast<double>(r.survivors) / s.n) << ','
        << num(r.estimate) << '\n';
    }
  }
  emit(c, out, c.output.format == "json" ? summary_json(c, s).dump(2) + "\n" : summary_csv(c, s));
  return kOk;
}

struct OracleOptions {
  std::string kind = "v";           // p | v | T
  std::string method = "spectral";  // spectral | grid
  int grid_size = 4096;
  int points = 101;
};

inline json complex_list(const std::vector<oracle::cplx>& v) {
  json arr = json::array();
  for (const auto& z : v) arr.push_back({z.real(), z.imag()});
  return arr;
}

inline int cmd_oracle(const ExperimentConfig& c, const OracleOptions& o, std::ostream& out) {
  if (c.model.key != "exponential") throw input_error("oracle: only the exponential model");
  if (o.method != "spectral" && o.method != "grid")
    throw input_error("oracle: method must be 'spectral' or 'grid'");
  if (o.points < 2) throw input_error("oracle: points must be >= 2");
  const auto kind = oracle::parse_equation_kind(o.kind);
  const bool csv = c.output.format == "csv";
  std::ostringstream s;
  json j;
  j["kind"] = o.kind;
  j["method"] = o.method;
  j["n"] = c.n;
  j["k"] = c.k;
  j["a"] = c.a;

  if (o.method == "spectral") {
    if (kind == oracle::EquationKind::p) throw input_error("oracle: spectral method covers v and T");
    const auto sol = kind == oracle::EquationKind::v ? oracle::spectral_v(c.n, c.k, c.a)
                                                      : oracle::spectral_T(c.n, c.k, c.a);
    const double err = sol.bc_residual;
    j["roots"] = complex_list(sol.roots);
    j["coeffs"] = complex_list(sol.coeffs);
    j["slope"] = sol.slope;
    j["bc_residual"] = err;
    if (kind == oracle::EquationKind::T) j["M_nk"] = oracle::m_nk(c.n, c.k).str();
    json rows = json::array();
    s << provenance_comment(c) << "x,value,error_estimate\n";
    for (int i = 0; i < o.points; ++i) {
      const double x = c.a * i / (o.points - 1);
      const double v = sol(x);
      s << num(x) << ',' << num(v) << ',' << num(err) << '\n';
      rows.push_back({x, v, err});
    }
    j["values"] = rows;
  } else {
    const auto g = oracle::solve_functional_equation(kind, c.n, c.k, c.a, o.grid_size);
    j["grid_size"] = g.grid_size;
    j["estimated_error"] = g.estimated_error;
    json rows = json::array();
    s << provenance_comment(c) << "x,value,error_estimate\n";
    const int stride = std::max(1, g.grid_size / (o.points - 1));
    for (int i = 0; i <= g.grid_size; i += stride) {
      s << num(g.grid[i]) << ',' << num(g.values[i]) << ',' << num(g.error[i]) << '\n';
      rows.push_back({g.grid[i], g.values[i], g.error[i]});
    }
    j["values"] = rows;
  }
  j["provenance"] = provenance(c);
  emit(c, out, csv ? s.str() : j.dump(2) + "\n");
  return kOk;
}

struct VerifyOptions {
  std::vector<int> criteria;
  double scale = 1.0;
};

inline int cmd_verify(const ExperimentConfig& c, const VerifyOptions& v, std::ostream& out) {
  acceptance::Options opt;
  opt.seed = c.seed;
  opt.scale = v.scale;
  std::vector<int> ids = v.criteria;
  if (ids.empty())
    for (int i = 1; i <= 12; ++i) ids.push_back(i);

  bool all_pass = true;
  std::ostringstream csv;
  json arr = json::array();
  csv << provenance_comment(c) << "criterion,name,statistic,threshold,p_value,verdict,seed,inputs\n";
  for (int id : ids) {
    const auto res = acceptance::run_criterion(id, opt);
    all_pass = all_pass && res.pass();
    std::cerr << "criterion " << id << ": " << (res.pass() ? "PASS" : "FAIL") << "  "
              << res.title << '\n';
    for (const auto& r : res.reports) {
      csv << id << ',' << r.name << ',' << num(r.statistic) << ',' << num(r.threshold) << ','
          << (r.p_value ? num(*r.p_value) : std::string()) << ',' << (r.pass ? "pass" : "fail")
          << ',' << c.seed << ",\"" << r.digest << "\"\n";
      json jr = {{"criterion", id},        {"name", r.name}, {"statistic", r.statistic},
                 {"threshold", r.threshold}, {"verdict", r.pass ? "pass" : "fail"},
                 {"inputs", r.digest},       {"detail", r.detail}};
      if (r.p_value) jr["p_value"] = *r.p_value;
      arr.push_back(jr);
    }
  }
  if (c.output.format == "json") {
    json j;
    j["reports"] = arr;
    j["pass"] = all_pass;
    j["provenance"] = provenance(c);
    emit(c, out, j.dump(2) + "\n");
  } else {
    emit(c, out, csv.str());
  }
  return all_pass ? kOk : kTestFailure;
}

struct CompareOptions {
  std::vector<double> p_values;
  double p_min = 1e-12;
  double p_max = 0.5;
  int p_count = 12;
};

struct CompareRow {
  double p;
  double ams_cost;
  double direct_cost;
  double ratio;
  double ams_limit_cost;  // leading order in n
  bool ams_wins;
};

/// AMS cost from the finite-n oracle versus direct Monte Carlo, exponential
/// model with a = -log p and x = 0.
inline std::vector<CompareRow> compare_costs(int n, int k, const oracle::CostModel& cm,
                                             const std::vector<double>& ps) {
  std::vector<CompareRow> rows;
  for (double p : ps) {
    if (!(p > 0.0 && p < 1.0)) throw input_error("compare: p must lie in (0,1)");
    const double a = -std::log(p);
    const auto m = oracle::spectral_moments(n, k, 0.0, a);
    const double ams = oracle::cost_ams(m.v, m.P, m.T, n, k, cm);
    const double direct = oracle::cost_direct_mc(p, cm);
    const double L = a;
    const double limit = (cm.c0 + cm.c1 * std::log(static_cast<double>(n))) * (L * L + L) /
                         (cm.epsilon * cm.epsilon);
    rows.push_back({p, ams, direct, ams / direct, limit, ams < direct});
  }
  return rows;
}

inline int cmd_compare(const ExperimentConfig& c, const CompareOptions& o, std::ostream& out) {
  if (!c.cost) throw input_error("compare: config needs a cost block (c0, c1, epsilon)");
  std::vector<double> ps = o.p_values;
  if (ps.empty()) {
    if (!(o.p_min > 0.0 && o.p_max < 1.0 && o.p_min < o.p_max) || o.p_count < 2)
      throw input_error("compare: need 0 < p_min < p_max < 1 and p_count >= 2");
    const double lo = std::log(o.p_min);
    const double hi = std::log(o.p_max);
    for (int i = 0; i < o.p_count; ++i) ps.push_back(std::exp(hi + (lo - hi) * i / (o.p_count - 1)));
  }
  std::sort(ps.begin(), ps.end(), std::greater<>());
  const auto rows = compare_costs(c.n, c.k, *c.cost, ps);

  // Largest grid p at which AMS wins with every smaller grid p also winning.
  std::optional<double> crossover;
  for (auto it = rows.rbegin(); it != rows.rend() && it->ams_wins; ++it) crossover = it->p;

  if (c.output.format == "json") {
    json j;
    json arr = json::array();
    for (const auto& r : rows)
      arr.push_back({{"p", r.p},           {"n", c.n},         {"k", c.k},
                     {"ams_cost", r.ams_cost}, {"direct_cost", r.direct_cost},
                     {"ratio", r.ratio},    {"ams_limit_cost", r.ams_limit_cost},
                     {"ams_wins", r.ams_wins}});
    j["rows"] = arr;
    j["crossover_p"] = crossover ? json(*crossover) : json(nullptr);
    j["provenance"] = provenance(c);
    emit(c, out, j.dump(2) + "\n");
  } else {
    std::ostringstream s;
    s << provenance_comment(c);
    s << "# crossover_p=" << (crossover ? num(*crossover) : std::string("none")) << '\n';
    s << "p,n,k,ams_cost,direct_cost,ratio,ams_limit_cost,ams_wins\n";
    for (const auto& r : rows)
      s << num(r.p) << ',' << c.n << ',' << c.k << ',' << num(r.ams_cost) << ','
        << num(r.direct_cost) << ',' << num(r.ratio) << ',' << num(r.ams_limit_cost) << ','
        << (r.ams_wins ? 1 : 0) << '\n';
    emit(c, out, s.str());
  }
  return kOk;
}

// ---------------------------------------------------------------------------

/// Parses argv, runs the subcommand, maps errors to exit codes.
inline int dispatch(int argc, const char* const* argv, std::ostream& out = std::cout,
                    std::ostream& err = std::cerr) {
  CLI::App app{"Adaptive Multilevel Splitting: simulation, oracles and verification"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::string> model_key, format, output_path;
  std::optional<std::vector<double>> params;
  std::optional<int> n, k;
  std::optional<double> x, a, c0, c1, epsilon;
  std::optional<std::int64_t> m_reps, max_iterations;
  std::optional<std::uint64_t> seed;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config_path, "JSON experiment config");
    sub->add_option("--model", model_key, "model key");
    sub->add_option("--params", params, "model parameters");
    sub->add_option("-n,--n", n, "particle count");
    sub->add_option("-k,--k", k, "kill count");
    sub->add_option("-x,--x", x, "start level");
    sub->add_option("-a,--a", a, "target level");
    sub->add_option("-M,--m-reps", m_reps, "replications");
    sub->add_option("--max-iterations", max_iterations, "iteration cap (0: automatic)");
    sub->add_option("-s,--seed", seed, "64-bit seed");
    sub->add_option("-f,--format", format, "csv or json");
    sub->add_option("-o,--output", output_path, "output file (default stdout)");
    sub->add_option("--c0", c0, "cost per sample");
    sub->add_option("--c1", c1, "sorting cost coefficient");
    sub->add_option("--epsilon", epsilon, "target relative error");
  };

  auto* run = app.add_subcommand("run", "single AMS run, JSON to stdout");
  auto* rep = app.add_subcommand("replicate", "M independent runs, summary CSV/JSON");
  auto* orc = app.add_subcommand("oracle", "spectral or quadrature solution dump");
  auto* ver = app.add_subcommand("verify", "acceptance suite");
  auto* cmp = app.add_subcommand("compare", "AMS vs direct Monte Carlo cost table");
  for (auto* sub : {run, rep, orc, ver, cmp}) add_common(sub);

  std::string runs_csv;
  rep->add_option("--runs-csv", runs_csv, "also write per-run (J, C, estimate) rows here");

  OracleOptions oo;
  orc->add_option("--kind", oo.kind, "p, v or T")->capture_default_str();
  orc->add_option("--method", oo.method, "spectral or grid")->capture_default_str();
  orc->add_option("--grid-size", oo.grid_size, "quadrature grid size")->capture_default_str();
  orc->add_option("--points", oo.points, "output points")->capture_default_str();

  VerifyOptions vo;
  ver->add_option("--criteria", vo.criteria, "criterion ids (default: all)");
  ver->add_option("--scale", vo.scale, "replication count multiplier")->capture_default_str();

  CompareOptions co;
  cmp->add_option("--p", co.p_values, "explicit p values");
  cmp->add_option("--p-min", co.p_min)->capture_default_str();
  cmp->add_option("--p-max", co.p_max)->capture_default_str();
  cmp->add_option("--p-count", co.p_count)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? kOk : kConfigError;
  }

  try {
    ExperimentConfig cfg;
    if (!config_path.empty()) {
      std::ifstream f(config_path);
      if (!f) throw input_error("cannot read config '" + config_path + "'");
      json j;
      try {
        j = json::parse(f);
      } catch (const json::exception& e) {
        throw input_error(std::string("config: ") + e.what());
      }
      cfg = config_from_json(j);
    }
    if (model_key) {
      cfg.model.key = *model_key;
      if (!params) cfg.model.params.clear();
    }
    if (params) cfg.model.params = *params;
    if (n) cfg.n = *n;
    if (k) cfg.k = *k;
    if (x) cfg.x = *x;
    if (a) cfg.a = *a;
    if (m_reps) cfg.m_reps = *m_reps;
    if (max_iterations) cfg.max_iterations = *max_iterations;
    if (seed) cfg.seed = *seed;
    if (format) cfg.output.format = *format;
    if (output_path) cfg.output.path = *output_path;
    if (c0 || c1 || epsilon) {
      auto cm = cfg.cost.value_or(oracle::CostModel{});
      if (c0) cm.c0 = *c0;
      if (c1) cm.c1 = *c1;
      if (epsilon) cm.epsilon = *epsilon;
      cfg.cost = cm;
    }
    cfg.validate();

    if (*run) return cmd_run(cfg, out);
    if (*rep) return cmd_replicate(cfg, out, runs_csv);
    if (*orc) return cmd_oracle(cfg, oo, out);
    if (*ver) return cmd_verify(cfg, vo, out);
    if (*cmp) return cmd_compare(cfg, co, out);
    return kConfigError;
  } catch (const runaway_error& e) {
    err << "runaway: " << e.what() << '\n';
    return kRunaway;
  } catch (const input_error& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const degenerate_conditioning& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kTestFailure;
  }
}

}  // namespace ams::cli
