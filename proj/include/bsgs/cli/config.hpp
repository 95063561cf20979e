#ifndef BSGS_CLI_CONFIG_HPP_
#define BSGS_CLI_CONFIG_HPP_

// Run configuration: one JSON file with nested sections. Unknown keys are
// rejected so typos fail early. Only the output directory and the thread
// count may come from the environment (BSGS_OUT_DIR, BSGS_THREADS).

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "bsgs/cli/panel.hpp"
#include "bsgs/cli/report.hpp"
#include "bsgs/design.hpp"
#include "bsgs/dgp.hpp"
#include "bsgs/sampler.hpp"
#include "bsgs/tuning.hpp"
#include "bsgs/volatility.hpp"

namespace bsgs::cli {

using Json = nlohmann::json;

enum class Mode { SimulateGrouped, SimulateMidas, Estimate, Tune, Nowcast };

inline Mode mode_from_string(const std::string& s) {
  if (s == "simulate-grouped") return Mode::SimulateGrouped;
  if (s == "simulate-midas") return Mode::SimulateMidas;
  if (s == "estimate") return Mode::Estimate;
  if (s == "tune") return Mode::Tune;
  if (s == "nowcast") return Mode::Nowcast;
  throw std::invalid_argument("unknown mode '" + s + "'");
}

inline const char* to_string(Mode m) {
  switch (m) {
    case Mode::SimulateGrouped: return "simulate-grouped";
    case Mode::SimulateMidas: return "simulate-midas";
    case Mode::Estimate: return "estimate";
    case Mode::Tune: return "tune";
    case Mode::Nowcast: return "nowcast";
  }
  return "?";
}

struct McmcBlock {
  int sweeps = 6000, burn_in = 1000, thin = 5, chains = 1;
};

struct PriorBlock {
  std::optional<double> c0, c1;
  bool group_specific_pi1 = true;
  bool hierarchical_a1 = true;
};

/// DIC search over [c_min, span * c_min] from the analytic lower bounds.
struct TuningBlock {
  bool enabled = false;
  double u0 = 0.32, u1 = 0.32, k0 = 1.0, k1 = 1.0;
  int s0gr_guess = 1;
  double span = 3.0;
  int points = 5;
  int sweeps = 1500, burn_in = 500, thin = 1;
  DicPlugIn plug_in = DicPlugIn::PosteriorMedian;
  std::vector<std::pair<double, double>> points_list;  // explicit (c0, c1) pairs
};

struct StudyBlock {
  int replications = 10;
  int bootstrap = 200;
  std::vector<GroupedDgpSpec> grouped_cells;
  std::vector<MidasDgpSpec> midas_cells;
  std::vector<std::string> cell_labels;
};

struct DataBlock {
  std::string path;
  PanelSchema schema;
};

/// Estimation target and regressors.
///  design = "midas": monthly series enter through a lag polynomial basis,
///    one group per series, plus p_y AR lags of the target.
///  design = "grouped": same-frequency regressors lagged `lag` periods,
///    grouped by the `groups` map (or one group per series).
struct ModelBlock {
  std::string target;
  std::string design = "midas";
  std::vector<std::string> series;  // empty: every non-target series
  BasisFamily basis = BasisFamily::RestrictedAlmon;
  int basis_g = 3;
  int p_x = 11;
  int p_y = 1;
  double horizon = 0.0;
  int lag = 1;
  bool standardize = true;
  VolatilityModel volatility = VolatilityModel::Homoskedastic;
  std::map<std::string, std::vector<std::string>> groups;
};

struct NowcastBlock {
  int window = 40;
  std::string first_origin;  // quarter label; empty means window + lags
  std::vector<double> horizons{0.0};
  std::vector<BasisFamily> bases;
  std::vector<VolatilityModel> volatility;
  bool whole = true;
  std::map<std::string, std::vector<std::string>> partition;  // named group map
  std::vector<std::string> pool_levels;
  std::vector<std::string> exclude;  // quarters left out of scoring
};

struct RunConfig {
  Mode mode = Mode::Estimate;
  std::uint64_t seed = 1;
  int threads = 1;
  std::string out_dir = "out";
  std::vector<std::string> formats{"csv", "json", "svg"};
  McmcBlock mcmc;
  PriorBlock prior;
  TuningBlock tuning;
  StudyBlock study;
  DataBlock data;
  ModelBlock model;
  NowcastBlock nowcast;
};

inline const std::vector<std::string>& pool_level_names() {
  static const std::vector<std::string> names = {"groups", "volatility_groups", "basis_volatility_groups",
                                                 "volatility_whole", "basis_volatility_whole"};
  return names;
}

namespace detail {

inline void check_keys(const Json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw std::invalid_argument("config: '" + where + "' must be an object");
  for (const auto& [k, _] : j.items()) {
    if (!allowed.count(k)) throw std::invalid_argument("config: unknown key '" + k + "' in " + where);
  }
}

template <class T>
void read(const Json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw std::invalid_argument(std::string("config: bad value for '") + key + "' in " + where);
  }
}

/// Accepts 0, 0.333.., "1/3" and the like.
inline double parse_horizon(const Json& h) {
  if (h.is_number()) return h.get<double>();
  const std::string s = h.get<std::string>();
  const auto slash = s.find('/');
  if (slash == std::string::npos) return std::stod(s);
  return std::stod(s.substr(0, slash)) / std::stod(s.substr(slash + 1));
}

inline GroupedDgpSpec grouped_cell(const Json& j, const std::string& where) {
  check_keys(j, {"label", "N", "g", "s0gr", "s0j", "T", "T_oos", "rho_z", "rho_eps", "full_corr", "nsr", "alpha",
                 "beta_y", "sigma", "theta", "skew_alpha", "dgp_seed"},
             where);
  GroupedDgpSpec s;
  read(j, "N", s.N, where);
  read(j, "g", s.g, where);
  read(j, "s0gr", s.s0gr, where);
  read(j, "s0j", s.s0j, where);
  read(j, "T", s.T, where);
  read(j, "T_oos", s.T_oos, where);
  read(j, "rho_z", s.rho_z, where);
  read(j, "rho_eps", s.rho_eps, where);
  read(j, "full_corr", s.full_corr, where);
  read(j, "nsr", s.nsr, where);
  read(j, "alpha", s.alpha_const, where);
  read(j, "beta_y", s.beta_y, where);
  read(j, "sigma", s.sigma, where);
  read(j, "theta", s.theta_mag, where);
  if (j.contains("skew_alpha")) s.skew_alpha = j.at("skew_alpha").get<double>();
  s.seed = 0;
  read(j, "dgp_seed", s.seed, where);
  validate(s);
  return s;
}

inline MidasDgpSpec midas_cell(const Json& j, const std::string& where) {
  check_keys(j, {"label", "N", "s0gr", "T", "T_oos", "m", "p_x", "weights", "rho_x", "rho_eps", "alpha", "beta_y",
                 "sigma", "nsr", "h", "basis", "basis_g", "dgp_seed"},
             where);
  MidasDgpSpec s;
  read(j, "N", s.N, where);
  read(j, "s0gr", s.s0gr, where);
  read(j, "T", s.T, where);
  read(j, "T_oos", s.T_oos, where);
  read(j, "m", s.m, where);
  read(j, "p_x", s.p_x, where);
  if (j.contains("weights")) {
    const auto w = j.at("weights").get<std::vector<double>>();
    if (w.size() != 3) throw std::invalid_argument("config: 'weights' in " + where + " must be [a, b, c]");
    s.a = w[0];
    s.b = w[1];
    s.c = w[2];
  }
  read(j, "rho_x", s.rho_x, where);
  read(j, "rho_eps", s.rho_eps, where);
  read(j, "alpha", s.alpha_const, where);
  read(j, "beta_y", s.beta_y, where);
  read(j, "sigma", s.sigma, where);
  read(j, "nsr", s.nsr, where);
  if (j.contains("h")) s.h = parse_horizon(j.at("h"));
  if (j.contains("basis")) s.basis = basis_family_from_string(j.at("basis").get<std::string>());
  read(j, "basis_g", s.basis_g, where);
  s.seed = 0;
  read(j, "dgp_seed", s.seed, where);
  validate(s);
  return s;
}

inline std::map<std::string, std::vector<std::string>> group_map(const Json& j, const std::string& where) {
  if (!j.is_object()) throw std::invalid_argument("config: " + where + " must map group names to series lists");
  std::map<std::string, std::vector<std::string>> out;
  for (const auto& [name, list] : j.items()) {
    out[name] = list.get<std::vector<std::string>>();
    if (out[name].empty()) throw std::invalid_argument("config: group '" + name + "' in " + where + " is empty");
  }
  return out;
}

}  // namespace detail

inline RunConfig parse_config(const Json& j) {
  using detail::check_keys;
  using detail::read;
  check_keys(j, {"mode", "seed", "threads", "output", "mcmc", "prior", "tuning", "study", "data", "model", "nowcast"},
             "top level");
  if (!j.contains("mode")) throw std::invalid_argument("config: 'mode' is required");
  RunConfig c;
  c.mode = mode_from_string(j.at("mode").get<std::string>());
  read(j, "seed", c.seed, "top level");
  read(j, "threads", c.threads, "top level");
  if (c.threads < 1) throw std::invalid_argument("config: threads must be >= 1");

  if (j.contains("output")) {
    const Json& o = j.at("output");
    check_keys(o, {"dir", "formats"}, "output");
    read(o, "dir", c.out_dir, "output");
    read(o, "formats", c.formats, "output");
    parse_formats(c.formats);
  }
  if (j.contains("mcmc")) {
    const Json& m = j.at("mcmc");
    check_keys(m, {"sweeps", "burn_in", "thin", "chains"}, "mcmc");
    read(m, "sweeps", c.mcmc.sweeps, "mcmc");
    read(m, "burn_in", c.mcmc.burn_in, "mcmc");
    read(m, "thin", c.mcmc.thin, "mcmc");
    read(m, "chains", c.mcmc.chains, "mcmc");
  }
  if (c.mcmc.sweeps <= c.mcmc.burn_in || c.mcmc.burn_in < 0 || c.mcmc.thin < 1 || c.mcmc.chains < 1) {
    throw std::invalid_argument("config: mcmc needs sweeps > burn_in >= 0, thin >= 1, chains >= 1");
  }
  if (j.contains("prior")) {
    const Json& p = j.at("prior");
    check_keys(p, {"c0", "c1", "group_specific_pi1", "hierarchical_a1"}, "prior");
    if (p.contains("c0")) c.prior.c0 = p.at("c0").get<double>();
    if (p.contains("c1")) c.prior.c1 = p.at("c1").get<double>();
    read(p, "group_specific_pi1", c.prior.group_specific_pi1, "prior");
    read(p, "hierarchical_a1", c.prior.hierarchical_a1, "prior");
  }
  if (j.contains("tuning")) {
    const Json& t = j.at("tuning");
    check_keys(t, {"enabled", "u0", "u1", "k0", "k1", "s0gr_guess", "span", "points", "sweeps", "burn_in", "thin",
                   "plug_in", "grid"},
               "tuning");
    c.tuning.enabled = true;
    read(t, "enabled", c.tuning.enabled, "tuning");
    read(t, "u0", c.tuning.u0, "tuning");
    read(t, "u1", c.tuning.u1, "tuning");
    read(t, "k0", c.tuning.k0, "tuning");
    read(t, "k1", c.tuning.k1, "tuning");
    read(t, "s0gr_guess", c.tuning.s0gr_guess, "tuning");
    read(t, "span", c.tuning.span, "tuning");
    read(t, "points", c.tuning.points, "tuning");
    read(t, "sweeps", c.tuning.sweeps, "tuning");
    read(t, "burn_in", c.tuning.burn_in, "tuning");
    read(t, "thin", c.tuning.thin, "tuning");
    if (t.contains("plug_in")) {
      const std::string s = t.at("plug_in").get<std::string>();
      if (s == "median") c.tuning.plug_in = DicPlugIn::PosteriorMedian;
      else if (s == "mean") c.tuning.plug_in = DicPlugIn::PosteriorMean;
      else throw std::invalid_argument("config: tuning.plug_in must be 'median' or 'mean'");
    }
    if (t.contains("grid")) {
      for (const auto& pt : t.at("grid")) {
        const auto v = pt.get<std::vector<double>>();
        if (v.size() != 2) throw std::invalid_argument("config: tuning.grid entries must be [c0, c1]");
        c.tuning.points_list.emplace_back(v[0], v[1]);
      }
    }
    if (!(c.tuning.span >= 1.0) || c.tuning.points < 1 || c.tuning.sweeps <= c.tuning.burn_in) {
      throw std::invalid_argument("config: tuning needs span >= 1, points >= 1 and sweeps > burn_in");
    }
  }
  if (j.contains("study")) {
    const Json& s = j.at("study");
    check_keys(s, {"replications", "bootstrap", "cells"}, "study");
    read(s, "replications", c.study.replications, "study");
    read(s, "bootstrap", c.study.bootstrap, "study");
    if (c.study.replications < 1) throw std::invalid_argument("config: study.replications must be >= 1");
    if (!s.contains("cells") || !s.at("cells").is_array() || s.at("cells").empty()) {
      throw std::invalid_argument("config: study.cells must be a non-empty list");
    }
    int k = 0;
    for (const auto& cell : s.at("cells")) {
      const std::string where = "study.cells[" + std::to_string(k) + "]";
      c.study.cell_labels.push_back(cell.value("label", "cell" + std::to_string(k + 1)));
      if (c.mode == Mode::SimulateMidas) c.study.midas_cells.push_back(detail::midas_cell(cell, where));
      else c.study.grouped_cells.push_back(detail::grouped_cell(cell, where));
      ++k;
    }
  }
  if (j.contains("data")) {
    const Json& d = j.at("data");
    check_keys(d, {"path", "date_column", "series"}, "data");
    read(d, "path", c.data.path, "data");
    read(d, "date_column", c.data.schema.date_column, "data");
    if (d.contains("series")) {
      for (const auto& [name, spec] : d.at("series").items()) {
        detail::check_keys(spec, {"frequency", "transform"}, "data.series." + name);
        SeriesSchema ss;
        if (spec.contains("frequency")) ss.frequency = frequency_from_string(spec.at("frequency").get<std::string>());
        if (spec.contains("transform")) ss.transform = transform_from_string(spec.at("transform").get<std::string>());
        c.data.schema.series[name] = ss;
      }
    }
  }
  if (j.contains("model")) {
    const Json& m = j.at("model");
    check_keys(m, {"target", "design", "series", "basis", "basis_g", "p_x", "p_y", "horizon", "lag", "standardize",
                   "volatility", "groups"},
               "model");
    read(m, "target", c.model.target, "model");
    read(m, "design", c.model.design, "model");
    if (c.model.design != "midas" && c.model.design != "grouped") {
      throw std::invalid_argument("config: model.design must be 'midas' or 'grouped'");
    }
    read(m, "series", c.model.series, "model");
    if (m.contains("basis")) c.model.basis = basis_family_from_string(m.at("basis").get<std::string>());
    read(m, "basis_g", c.model.basis_g, "model");
    read(m, "p_x", c.model.p_x, "model");
    read(m, "p_y", c.model.p_y, "model");
    if (m.contains("horizon")) c.model.horizon = detail::parse_horizon(m.at("horizon"));
    read(m, "lag", c.model.lag, "model");
    read(m, "standardize", c.model.standardize, "model");
    if (m.contains("volatility")) c.model.volatility = volatility_from_string(m.at("volatility").get<std::string>());
    if (m.contains("groups")) c.model.groups = detail::group_map(m.at("groups"), "model.groups");
    if (c.model.target.empty()) throw std::invalid_argument("config: model.target is required");
  }
  if (j.contains("nowcast")) {
    const Json& n = j.at("nowcast");
    check_keys(n, {"window", "first_origin", "horizons", "bases", "volatility", "whole", "partition", "pooling",
                   "exclude"},
               "nowcast");
    read(n, "window", c.nowcast.window, "nowcast");
    read(n, "first_origin", c.nowcast.first_origin, "nowcast");
    if (n.contains("horizons")) {
      c.nowcast.horizons.clear();
      for (const auto& h : n.at("horizons")) c.nowcast.horizons.push_back(detail::parse_horizon(h));
    }
    for (double h : c.nowcast.horizons) {
      bool ok = false;
      for (double allowed : {0.0, 1.0 / 3.0, 2.0 / 3.0}) ok = ok || std::abs(h - allowed) < 1e-9;
      if (!ok) throw std::invalid_argument("config: nowcast horizons must be a subset of {0, 1/3, 2/3}");
    }
    if (n.contains("bases")) {
      for (const auto& b : n.at("bases")) c.nowcast.bases.push_back(basis_family_from_string(b.get<std::string>()));
    }
    if (n.contains("volatility")) {
      for (const auto& v : n.at("volatility")) c.nowcast.volatility.push_back(volatility_from_string(v.get<std::string>()));
    }
    read(n, "whole", c.nowcast.whole, "nowcast");
    if (n.contains("partition")) c.nowcast.partition = detail::group_map(n.at("partition"), "nowcast.partition");
    if (n.contains("pooling")) {
      const Json& p = n.at("pooling");
      detail::check_keys(p, {"levels"}, "nowcast.pooling");
      read(p, "levels", c.nowcast.pool_levels, "nowcast.pooling");
      for (const auto& l : c.nowcast.pool_levels) {
        const auto& names = pool_level_names();
        if (std::find(names.begin(), names.end(), l) == names.end()) {
          throw std::invalid_argument("config: unknown pool level '" + l + "'");
        }
      }
    }
    read(n, "exclude", c.nowcast.exclude, "nowcast");
    for (const auto& q : c.nowcast.exclude) quarter_index(q);
    if (c.nowcast.window < 10) throw std::invalid_argument("config: nowcast.window must be >= 10");
  }

  // Mode-required blocks.
  auto require = [&](bool ok, const char* block) {
    if (!ok) throw std::invalid_argument(std::string("config: mode '") + to_string(c.mode) + "' requires a '" + block + "' block");
  };
  switch (c.mode) {
    case Mode::SimulateGrouped:
    case Mode::SimulateMidas: require(j.contains("study"), "study"); break;
    case Mode::Nowcast: require(j.contains("nowcast"), "nowcast"); [[fallthrough]];
    case Mode::Estimate:
    case Mode::Tune:
      require(j.contains("data"), "data");
      require(j.contains("model"), "model");
      if (c.data.path.empty()) throw std::invalid_argument("config: data.path is required");
      break;
  }
  if (c.mode == Mode::Tune && !c.tuning.enabled) {
    throw std::invalid_argument("config: mode 'tune' requires a 'tuning' block");
  }
  return c;
}

/// Reads the file; a relative data path is resolved against the config's directory.
inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config " + path);
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument("config " + path + ": " + e.what());
  }
  RunConfig c = parse_config(j);
  if (!c.data.path.empty()) {
    const std::filesystem::path p(c.data.path);
    if (p.is_relative()) c.data.path = (std::filesystem::path(path).parent_path() / p).string();
  }
  return c;
}

inline void apply_environment(RunConfig& c) {
  if (const char* dir = std::getenv("BSGS_OUT_DIR"); dir && *dir) c.out_dir = dir;
  if (const char* t = std::getenv("BSGS_THREADS"); t && *t) {
    const int n = std::atoi(t);
    if (n < 1) throw std::invalid_argument("BSGS_THREADS must be a positive integer");
    c.threads = n;
  }
}

/// Header of a CSV file, read without loading the data.
inline std::vector<std::string> read_csv_header(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open data file " + path);
  std::string line;
  std::getline(in, line);
  return detail::split_csv_line(line);
}

/// Checks every series reference against the data header. Runs before any
/// estimation so a typo in a partition fails immediately.
inline void validate_references(const RunConfig& c, const std::vector<std::string>& header) {
  auto known = [&](const std::string& s) { return std::find(header.begin(), header.end(), s) != header.end(); };
  auto check = [&](const std::string& s, const std::string& where) {
    if (!known(s)) throw std::invalid_argument("config: " + where + " names unknown series '" + s + "'");
  };
  check(c.model.target, "model.target");
  for (const auto& s : c.model.series) check(s, "model.series");
  for (const auto& [g, list] : c.model.groups)
    for (const auto& s : list) check(s, "model.groups." + g);
  for (const auto& [g, list] : c.nowcast.partition)
    for (const auto& s : list) check(s, "nowcast.partition." + g);
}

}  // namespace bsgs::cli

#endif  // BSGS_CLI_CONFIG_HPP_
