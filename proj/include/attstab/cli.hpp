#pragma once

// Command-line front end. `run` never calls exit(); it returns the process
// exit code: 0 success, 2 validation error, 3 file I/O failure.

#include <algorithm>
#include <cstdlib>
#include <iostream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "attstab/control.hpp"
#include "attstab/errors.hpp"
#include "attstab/io.hpp"
#include "attstab/lyapunov.hpp"
#include "attstab/model.hpp"
#include "attstab/stability.hpp"
#include "attstab/sweep.hpp"

namespace attstab::cli {

using Json = nlohmann::ordered_json;

/// Bad flag combinations or values. Maps to exit code 2.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Flag and config-file values after merging; flags win over the file.
class RunConfig {
 public:
  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }
  bool has(const std::string& key) const { return values_.count(key) != 0; }

  std::optional<double> number(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    try {
      return parse_double(it->second);
    } catch (const IoError&) {
      throw ValidationError("--" + key + " expects a number, got '" + it->second + "'");
    }
  }

  std::optional<std::string> text(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return it->second;
  }

  std::optional<std::vector<double>> list(const std::string& key, std::size_t count) const {
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    std::vector<double> out;
    for (const std::string& f : split(it->second, ',')) {
      try {
        out.push_back(parse_double(f));
      } catch (const IoError&) {
        throw ValidationError("--" + key + " expects comma-separated numbers");
      }
    }
    if (out.size() != count) {
      throw ValidationError("--" + key + " expects " + std::to_string(count) + " values");
    }
    return out;
  }

  std::optional<std::size_t> count(const std::string& key) const {
    const auto v = number(key);
    if (!v) return std::nullopt;
    if (!(*v >= 1.0) || *v != static_cast<double>(static_cast<std::size_t>(*v))) {
      throw ValidationError("--" + key + " expects a positive integer");
    }
    return static_cast<std::size_t>(*v);
  }

  double tolerance() const {
    const double tol = number("tol").value_or(kDefaultTolerance);
    if (!(tol >= 0.0)) throw ValidationError("--tol must be >= 0");
    return tol;
  }

  /// Inertia from either --jx/--jy/--jz or --beta1/--beta2 (normalised Jz = 1).
  SpacecraftInertia inertia() const {
    const bool any_j = has("jx") || has("jy") || has("jz");
    const bool any_b = has("beta1") || has("beta2");
    if (any_j == any_b) {
      throw ValidationError("give exactly one of --jx/--jy/--jz or --beta1/--beta2");
    }
    if (any_j) {
      if (!(has("jx") && has("jy") && has("jz"))) {
        throw ValidationError("--jx, --jy and --jz must be given together");
      }
      SpacecraftInertia j{*number("jx"), *number("jy"), *number("jz")};
      j.validate();
      return j;
    }
    if (!(has("beta1") && has("beta2"))) {
      throw ValidationError("--beta1 and --beta2 must be given together");
    }
    return inertia_from_beta(*number("beta1"), *number("beta2"));
  }

  SigmaTriple sigmas() const {
    if (has("beta1") || has("beta2")) {
      inertia();  // shape checks
      return sigmas_from_beta(*number("beta1"), *number("beta2"));
    }
    return sigmas_from_inertia(inertia());
  }

  OrbitalRate rate(bool required) const {
    const bool r = has("r");
    const bool w = has("omega0");
    if (r && w) throw ValidationError("give only one of --r and --omega0");
    if (r) return orbital_rate(*number("r"));
    if (w) {
      const double w0 = *number("omega0");
      if (!(w0 > 0.0)) throw ValidationError("--omega0 must be > 0");
      return OrbitalRate(w0);
    }
    if (required) throw ValidationError("this command needs --r or --omega0");
    return OrbitalRate(1.0);
  }

 private:
  std::map<std::string, std::string> values_;
};

namespace detail {

inline std::string json_scalar_to_text(const nlohmann::json& v, const std::string& key) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number()) return format_g17(v.get<double>());
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_array()) {
    std::string out;
    for (std::size_t k = 0; k < v.size(); ++k) {
      if (!v[k].is_number()) throw ValidationError("config key '" + key + "' must hold numbers");
      if (k) out += ',';
      out += format_g17(v[k].get<double>());
    }
    return out;
  }
  throw ValidationError("config key '" + key + "' has an unsupported type");
}

inline Json complex_list(const std::vector<Complex>& zs) {
  Json arr = Json::array();
  for (const Complex& z : zs) arr.push_back(Json::array({z.real(), z.imag()}));
  return arr;
}

inline Json matrix_json(const Matrix& m) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

inline Json classify_json(const SigmaTriple& s, double tol) {
  const PhiPair p = phis(s);
  const StabilityClass c = classify(s, tol);
  Json j;
  j["sigma"] = Json::array({s.s1, s.s2, s.s3});
  j["phi1"] = p.phi1;
  j["phi2"] = p.phi2;
  j["delta"] = p.delta;
  j["class"] = std::string(to_string(c.verdict));
  j["boundary"] = c.boundary;
  return j;
}

inline unsigned resolve_jobs(const RunConfig& cfg) {
  if (auto n = cfg.count("jobs")) return static_cast<unsigned>(*n);
  if (const char* env = std::getenv("ATTSTAB_JOBS"); env != nullptr && *env != '\0') {
    RunConfig tmp;
    tmp.set("jobs", env);
    try {
      return static_cast<unsigned>(*tmp.count("jobs"));
    } catch (const ValidationError&) {
      throw ValidationError("ATTSTAB_JOBS must be a positive integer");
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Sends `text` to --out when given, otherwise to `out`.
inline void emit(const RunConfig& cfg, std::ostream& out, const std::string& text) {
  if (auto path = cfg.text("out")) {
    write_file(*path, [&](std::ostream& os) { os << text; });
  } else {
    out << text;
  }
}

inline int cmd_classify(const RunConfig& cfg, std::ostream& out) {
  emit(cfg, out, classify_json(cfg.sigmas(), cfg.tolerance()).dump() + "\n");
  return 0;
}

inline int cmd_eigs(const RunConfig& cfg, std::ostream& out) {
  const SpacecraftInertia j = cfg.inertia();
  const OrbitalRate w = cfg.rate(true);
  const double tol = cfg.tolerance();
  const SigmaTriple s = cfg.sigmas();
  const SystemMatrices sys = build_system(j, w);

  std::vector<Complex> numeric = poly_roots(char_poly_coeffs(sys.a));
  std::sort(numeric.begin(), numeric.end(), [](const Complex& a, const Complex& b) {
    return a.imag() != b.imag() ? a.imag() > b.imag() : a.real() > b.real();
  });

  Json j_out;
  j_out["omega0"] = w.omega0;
  j_out["class"] = std::string(to_string(classify(s, tol).verdict));
  if (is_polynomially_stable(s, tol)) {
    const EigenSet e = closed_form_eigenvalues(s, w, tol);
    j_out["closed_form"] = complex_list({e.begin(), e.end()});
  } else {
    j_out["closed_form"] = nullptr;
  }
  j_out["numeric"] = complex_list(numeric);
  emit(cfg, out, j_out.dump() + "\n");
  return 0;
}

inline int cmd_lyap(const RunConfig& cfg, std::ostream& out) {
  const SpacecraftInertia j = cfg.inertia();
  const OrbitalRate w = cfg.rate(true);
  const SigmaTriple s = sigmas_from_inertia(j);

  Json j_out;
  j_out["sigma"] = Json::array({s.s1, s.s2, s.s3});
  j_out["omega0"] = w.omega0;

  std::optional<LyapunovSolution> sol;
  if (cfg.has("alpha3") || cfg.has("alpha13") || cfg.has("alpha2")) {
    const double a2 = cfg.number("alpha2").value_or(1.0);
    const double a3 = cfg.number("alpha3").value_or(1.0);
    const double a13 = cfg.number("alpha13").value_or(0.0);
    sol = solution_family(j, w, {solve_alpha1(j, a3, a13), a2, a3, a13});
  } else {
    PdSearchResult search = find_positive_definite(j, w);
    if (!search.found()) {
      j_out["found"] = false;
      j_out["scan"] = {{"min", search.scan_min},
                       {"max", search.scan_max},
                       {"candidates", search.candidates}};
      emit(cfg, out, j_out.dump() + "\n");
      return 0;
    }
    sol = std::move(search.solution);
  }

  j_out["found"] = true;
  j_out["alpha"] = {{"alpha1", sol->params.a1},
                    {"alpha2", sol->params.a2},
                    {"alpha3", sol->params.a3},
                    {"alpha13", sol->params.a13}};
  j_out["P2"] = matrix_json(sol->p2);
  j_out["P1"] = matrix_json(sol->p1);
  j_out["P3"] = matrix_json(sol->p3);
  j_out["P"] = matrix_json(sol->p);
  j_out["is_pd"] = sol->is_pd;
  j_out["residual"] = sol->residual;
  j_out["residual_relative"] = sol->residual_relative;
  emit(cfg, out, j_out.dump() + "\n");
  return 0;
}

/// --kappa auto: loop gain times step of 0.5, well inside RK4's stability region.
inline constexpr double kAutoKappaStep = 0.5;

inline int cmd_simulate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const SpacecraftInertia j = cfg.inertia();
  const OrbitalRate w = cfg.rate(true);
  const SystemMatrices sys = build_system(j, w);

  const auto x0v = cfg.list("x0", 6);
  if (!x0v) throw ValidationError("simulate needs --x0");
  State x0{};
  std::copy(x0v->begin(), x0v->end(), x0.begin());
  const double dt = cfg.number("dt").value_or(1e-3 / w.omega0);
  const double horizon = cfg.number("horizon").value_or(w.period());
  const bool auto_kappa = cfg.text("kappa").value_or("") == "auto";
  const double kappa = auto_kappa ? 0.0 : cfg.number("kappa").value_or(1.0);
  Control u_max{0.1, 0.1, 0.1};
  if (auto um = cfg.list("umax", 3)) std::copy(um->begin(), um->end(), u_max.begin());
  const bool open_loop = cfg.text("open-loop").value_or("false") == "true";

  std::optional<Matrix> weight;
  try {
    PdSearchResult search = find_positive_definite(j, w);
    if (search.found()) weight = search.solution->p;
  } catch (const DegenerateError&) {
  }

  std::optional<SaturatedFeedback> fb;
  if (!open_loop) {
    if (!weight) {
      throw ValidationError(
          "no positive definite Lyapunov solution for this body; use --open-loop");
    }
    const double gain = loop_gain(*weight, sys.b);
    const double k = auto_kappa ? kAutoKappaStep / (gain * dt) : kappa;
    if (!auto_kappa && k * gain * dt > 1.0) {
      err << "warning: kappa * ||B^T P B|| * dt = " << k * gain * dt
          << " > 1; the step does not resolve the feedback loop (try --kappa auto)\n";
    }
    fb.emplace(*weight, k, u_max);
  }

  const Trajectory tr = simulate(sys, fb, x0, dt, horizon, weight);
  std::ostringstream os;
  write_trajectory_csv(os, tr);
  emit(cfg, out, os.str());
  return 0;
}

inline int cmd_sweep(const RunConfig& cfg, std::ostream& out) {
  SweepConfig sc;
  sc.b1min = cfg.number("b1min").value_or(sc.b1min);
  sc.b1max = cfg.number("b1max").value_or(sc.b1max);
  sc.b2min = cfg.number("b2min").value_or(sc.b2min);
  sc.b2max = cfg.number("b2max").value_or(sc.b2max);
  sc.n1 = cfg.count("n1").value_or(sc.n1);
  sc.n2 = cfg.count("n2").value_or(sc.n2);
  sc.tol = cfg.tolerance();
  const unsigned jobs = resolve_jobs(cfg);

  const SweepResult r = run_sweep(sc, jobs);
  const auto pgm = cfg.text("pgm");
  const auto csv = cfg.text("csv");
  if (pgm) write_file(*pgm, [&](std::ostream& os) { write_sweep_pgm(os, r); });
  if (csv) write_file(*csv, [&](std::ostream& os) { write_sweep_csv(os, r); });

  if (!pgm && !csv) {
    std::ostringstream os;
    write_sweep_csv(os, r);
    emit(cfg, out, os.str());
    return 0;
  }
  std::size_t counts[3] = {0, 0, 0};
  for (const SweepCell& c : r.cells) ++counts[static_cast<int>(c.cls.verdict)];
  Json summary;
  summary["n1"] = r.n1;
  summary["n2"] = r.n2;
  summary["Unstable"] = counts[0];
  summary["PolynomiallyStableOnly"] = counts[1];
  summary["LyapunovStable"] = counts[2];
  emit(cfg, out, summary.dump() + "\n");
  return 0;
}

inline void load_config_file(const std::string& path, const std::vector<std::string>& allowed,
                             RunConfig& cfg) {
  const std::string text = read_file(path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError("config '" + path + "' is not valid JSON: " + e.what());
  }
  if (!doc.is_object()) throw ValidationError("config '" + path + "' must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end() || key == "config") {
      throw ValidationError("config key '" + key + "' is not valid here");
    }
    if (!cfg.has(key)) cfg.set(key, json_scalar_to_text(value, key));
  }
}

}  // namespace detail

inline const std::vector<std::string>& common_options() {
  static const std::vector<std::string> keys{"jx", "jy", "jz", "beta1", "beta2", "r",
                                             "omega0", "tol", "config", "out"};
  return keys;
}

inline const std::map<std::string, std::vector<std::string>>& command_options() {
  static const std::map<std::string, std::vector<std::string>> m{
      {"classify", {}},
      {"eigs", {}},
      {"lyap", {"alpha2", "alpha3", "alpha13"}},
      {"simulate", {"x0", "dt", "horizon", "kappa", "umax"}},
      {"sweep", {"b1min", "b1max", "b2min", "b2max", "n1", "n2", "pgm", "csv", "jobs"}},
  };
  return m;
}

inline const std::map<std::string, std::string>& option_help() {
  static const std::map<std::string, std::string> m{
      {"jx", "principal moment Jx (kg m^2)"},
      {"jy", "principal moment Jy (kg m^2)"},
      {"jz", "principal moment Jz (kg m^2)"},
      {"beta1", "ratio Jx/Jy (use with --beta2 instead of --jx/--jy/--jz)"},
      {"beta2", "ratio Jy/Jz"},
      {"r", "circular orbit radius (m)"},
      {"omega0", "orbital rate (rad/s), instead of --r"},
      {"tol", "condition tolerance (default 1e-9)"},
      {"config", "flat JSON file of option values; flags override it"},
      {"out", "write the result here instead of stdout"},
      {"alpha2", "family parameter alpha2 (default 1)"},
      {"alpha3", "family parameter alpha3 (default 1)"},
      {"alpha13", "family parameter alpha13 (default 0)"},
      {"x0", "initial state: 6 comma-separated values"},
      {"dt", "RK4 step (s), default 1e-3/omega0"},
      {"horizon", "simulated time (s), default one orbital period"},
      {"kappa", "feedback gain (default 1) or 'auto'"},
      {"umax", "torque limits: 3 comma-separated values (default 0.1)"},
      {"b1min", "lower beta1 edge (default 0.3)"},
      {"b1max", "upper beta1 edge (default 2.5)"},
      {"b2min", "lower beta2 edge (default 0.3)"},
      {"b2max", "upper beta2 edge (default 2.5)"},
      {"n1", "cells along beta1 (default 400)"},
      {"n2", "cells along beta2 (default 400)"},
      {"pgm", "write the binary PGM map here"},
      {"csv", "write the per-cell CSV here"},
      {"jobs", "worker threads (default ATTSTAB_JOBS or all cores)"},
  };
  return m;
}

inline const std::map<std::string, std::string>& command_help() {
  static const std::map<std::string, std::string> m{
      {"classify", "stability verdict from the inertia ratios (JSON)"},
      {"eigs", "closed-form and numeric eigenvalues of A (JSON)"},
      {"lyap", "Lyapunov solution P with A^T P + P A = 0 (JSON)"},
      {"simulate", "RK4 trajectory, open loop or saturated feedback (CSV)"},
      {"sweep", "stability map over (beta1, beta2) (PGM and/or CSV)"},
  };
  return m;
}

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Stability analysis for the linearized gravity-gradient attitude model",
               "attstab"};
  app.require_subcommand(1);

  std::map<std::string, std::map<std::string, std::string>> raw;
  std::map<std::string, std::map<std::string, CLI::Option*>> opts;
  std::map<std::string, bool> open_loop_flag;
  std::map<std::string, CLI::App*> subs;
  const auto& cmds = command_options();
  for (const auto& [name, extra] : cmds) {
    CLI::App* sub = app.add_subcommand(name, command_help().at(name));
    subs[name] = sub;
    std::vector<std::string> keys = common_options();
    keys.insert(keys.end(), extra.begin(), extra.end());
    for (const std::string& key : keys) {
      opts[name][key] = sub->add_option("--" + key, raw[name][key], option_help().at(key));
    }
    if (name == "simulate") {
      open_loop_flag[name] = false;
      sub->add_flag("--open-loop", open_loop_flag[name], "simulate with u = 0");
    }
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  std::string name;
  for (const auto& [n, sub] : subs) {
    if (sub->parsed()) name = n;
  }

  try {
    RunConfig cfg;
    for (const auto& [key, opt] : opts[name]) {
      if (opt->count() > 0) cfg.set(key, raw[name][key]);
    }
    if (name == "simulate" && open_loop_flag[name]) cfg.set("open-loop", "true");
    // Config files may only carry keys this command understands.
    std::vector<std::string> allowed = common_options();
    const auto& extra = cmds.at(name);
    allowed.insert(allowed.end(), extra.begin(), extra.end());
    if (name == "simulate") allowed.push_back("open-loop");
    if (auto path = cfg.text("config")) detail::load_config_file(*path, allowed, cfg);

    if (name == "classify") return detail::cmd_classify(cfg, out);
    if (name == "eigs") return detail::cmd_eigs(cfg, out);
    if (name == "lyap") return detail::cmd_lyap(cfg, out);
    if (name == "simulate") return detail::cmd_simulate(cfg, out, err);
    return detail::cmd_sweep(cfg, out);
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace attstab::cli
