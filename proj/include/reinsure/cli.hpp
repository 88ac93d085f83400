#ifndef REINSURE_CLI_HPP
#define REINSURE_CLI_HPP

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "reinsure/conditions.hpp"
#include "reinsure/contracts.hpp"
#include "reinsure/errors.hpp"
#include "reinsure/kernels.hpp"
#include "reinsure/loss_models.hpp"
#include "reinsure/optimizer.hpp"
#include "reinsure/valuation.hpp"

namespace reinsure::cli {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Command { evaluate, optimize, check, sweep, asymptotics };

inline Command parse_command(const std::string& s) {
  if (s == "evaluate") return Command::evaluate;
  if (s == "optimize") return Command::optimize;
  if (s == "check") return Command::check;
  if (s == "sweep") return Command::sweep;
  if (s == "asymptotics") return Command::asymptotics;
  throw ConfigError("command: unknown command '" + s +
                    "' (expected evaluate, optimize, check, sweep or asymptotics)");
}

inline const char* to_string(Command c) {
  switch (c) {
    case Command::evaluate: return "evaluate";
    case Command::optimize: return "optimize";
    case Command::check: return "check";
    case Command::sweep: return "sweep";
    case Command::asymptotics: return "asymptotics";
  }
  return "unknown";
}

struct SweepSpec {
  std::vector<double> gamma;
  std::vector<double> gamma_r;
  std::vector<double> epsilon;
};

struct AsymptoticsSpec {
  std::vector<long> n;
  double unit_mean = 1.0;
  double unit_sd = 1.0;
};

struct RunConfig {
  Command command = Command::check;
  std::optional<LossModel> model;
  std::optional<PricingKernel> kernel;
  MarketSpec market;
  bool has_market = false;
  std::optional<std::vector<Layer>> layers;
  std::optional<SweepSpec> sweep;
  std::optional<AsymptoticsSpec> asymptotics;
  Tolerances tolerances;
  std::optional<std::string> output_path;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

inline double parse_number(const std::string& key, const std::string& text) {
  const std::string t = lower(trim(text));
  if (t == "inf" || t == "+inf" || t == "infinity") return kInf;
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &used);
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a number, got '" + text + "'");
  }
  if (used != t.size())
    throw ConfigError(key + ": expected a number, got '" + text + "'");
  return v;
}

/// "a, b, c" or "[a, b, c]".
inline std::vector<double> parse_list(const std::string& key,
                                      const std::string& text) {
  std::string t = trim(text);
  if (!t.empty() && t.front() == '[') {
    if (t.back() != ']') throw ConfigError(key + ": unbalanced brackets");
    t = t.substr(1, t.size() - 2);
  }
  std::vector<double> out;
  std::stringstream ss(t);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (trim(item).empty()) throw ConfigError(key + ": empty list entry");
    out.push_back(parse_number(key, item));
  }
  if (out.empty()) throw ConfigError(key + ": empty list");
  return out;
}

/// "[[a1, b1], [a2, b2]]"; an empty list "[]" means no cession.
inline std::vector<Layer> parse_layers(const std::string& key,
                                       const std::string& text) {
  std::string t = trim(text);
  if (t.size() < 2 || t.front() != '[' || t.back() != ']')
    throw ConfigError(key + ": expected [[a1, b1], [a2, b2], ...]");
  t = trim(t.substr(1, t.size() - 2));
  std::vector<Layer> out;
  std::size_t pos = 0;
  while (pos < t.size()) {
    const auto open = t.find('[', pos);
    if (open == std::string::npos) {
      if (!trim(t.substr(pos)).empty())
        throw ConfigError(key + ": unexpected text '" + t.substr(pos) + "'");
      break;
    }
    const auto gap = trim(t.substr(pos, open - pos));
    if (!(gap.empty() || gap == ","))
      throw ConfigError(key + ": unexpected text '" + gap + "'");
    const auto close = t.find(']', open);
    if (close == std::string::npos) throw ConfigError(key + ": unbalanced brackets");
    const std::vector<double> pair = parse_list(key, t.substr(open + 1, close - open - 1));
    if (pair.size() != 2)
      throw ConfigError(key + ": each layer needs exactly [attachment, detachment]");
    out.push_back({pair[0], pair[1]});
    pos = close + 1;
  }
  return out;
}

class Section {
 public:
  Section(std::string name, const boost::property_tree::ptree& tree,
          std::set<std::string> allowed)
      : name_(std::move(name)), tree_(tree) {
    for (const auto& [k, v] : tree) {
      if (!allowed.count(k))
        throw ConfigError(name_ + "." + k + ": unknown key");
      if (!v.empty()) throw ConfigError(name_ + "." + k + ": nested values not allowed");
    }
  }

  std::string key(const std::string& k) const { return name_ + "." + k; }
  bool has(const std::string& k) const { return tree_.count(k) > 0; }

  std::string text(const std::string& k) const {
    auto v = tree_.get_optional<std::string>(k);
    if (!v) throw ConfigError(key(k) + ": missing mandatory key");
    return trim(*v);
  }
  double number(const std::string& k) const { return parse_number(key(k), text(k)); }
  double number(const std::string& k, double fallback) const {
    return has(k) ? number(k) : fallback;
  }
  std::vector<double> list(const std::string& k) const {
    return parse_list(key(k), text(k));
  }

 private:
  std::string name_;
  const boost::property_tree::ptree& tree_;
};

template <class Fn>
auto build(const std::string& what, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(what + ": " + e.what());
  }
}

inline LossModel parse_model(const Section& s,
                             const std::filesystem::path& base_dir) {
  const std::string family = lower(s.text("family"));
  LossModel m = build("model", [&]() -> LossModel {
    if (family == "exponential") return LossModel::exponential(s.number("mean"));
    if (family == "pareto") {
      if (s.has("scale")) return LossModel::pareto(s.number("shape"), s.number("scale"));
      return LossModel::pareto_with_mean(s.number("shape"), s.number("mean"));
    }
    if (family == "lognormal") {
      if (s.has("mu")) return LossModel::lognormal(s.number("mu"), s.number("sigma"));
      return LossModel::lognormal_with_mean(s.number("mean"), s.number("sigma"));
    }
    if (family == "gamma") {
      if (s.has("scale")) return LossModel::gamma(s.number("shape"), s.number("scale"));
      const double shape = s.number("shape");
      return LossModel::gamma(shape, s.number("mean") / shape);
    }
    if (family == "empirical") {
      std::filesystem::path p = s.text("csv");
      if (p.is_relative()) p = base_dir / p;
      return LossModel::empirical_from_csv_file(p.string());
    }
    if (family == "normal_portfolio") {
      const double n = s.number("n");
      if (n != std::floor(n)) throw ConfigError(s.key("n") + ": must be an integer");
      return LossModel::iid_portfolio_normal(static_cast<long>(n),
                                             s.number("unit_mean"),
                                             s.number("unit_sd"));
    }
    throw ConfigError(s.key("family") + ": unknown family '" + family + "'");
  });
  if (s.has("xi")) m = build(s.key("xi"), [&] { return m.rescaled(s.number("xi")); });
  return m;
}

inline PricingKernel parse_kernel(const Section& s) {
  const std::string family = lower(s.text("family"));
  const double gr = s.number("gamma_r");
  return build("kernel", [&]() -> PricingKernel {
    if (family == "quadratic") {
      const double c = s.number("c");
      if (!(c > 0.0 && c <= 1.0))
        throw ConfigError(s.key("c") + ": must lie in (0, 1] (K0'(0) = c must be <= 1)");
      return PricingKernel::quadratic(c, gr);
    }
    if (family == "proportional_hazard")
      return PricingKernel::proportional_hazard(s.number("r"), gr);
    if (family == "dual_power") return PricingKernel::dual_power(s.number("k"), gr);
    if (family == "capped_linear")
      return PricingKernel::capped_linear(s.number("lambda"), gr);
    if (family == "tvar_mixture")
      return PricingKernel::tvar_mixture(s.number("w"), s.number("alpha"), gr);
    throw ConfigError(s.key("family") + ": unknown family '" + family + "'");
  });
}

inline MarketSpec parse_market(const Section& s) {
  MarketSpec m;
  m.gamma = s.number("gamma");
  m.epsilon = s.number("epsilon");
  m.beta = s.number("beta", 0.0);
  if (s.has("risk_measure")) {
    const std::string r = lower(s.text("risk_measure"));
    if (r == "var")
      m.risk_measure = RiskMeasure::VaR;
    else if (r == "cvar")
      m.risk_measure = RiskMeasure::CVaR;
    else
      throw ConfigError(s.key("risk_measure") + ": expected VaR or CVaR");
  }
  if (!(m.epsilon > 0.0 && m.epsilon < 0.5))
    throw ConfigError("market.epsilon: epsilon must lie in (0, 0.5)");
  if (!(m.gamma > 0.0) || !std::isfinite(m.gamma))
    throw ConfigError("market.gamma: gamma must be positive");
  if (!(m.beta >= 0.0) || !std::isfinite(m.beta))
    throw ConfigError("market.beta: beta must be nonnegative");
  return m;
}

}  // namespace detail

/// Parses sectioned key/value text. Unknown sections or keys are errors.
/// Relative CSV paths resolve against base_dir.
inline RunConfig parse_config(const std::string& text,
                              const std::filesystem::path& base_dir = ".") {
  namespace pt = boost::property_tree;
  pt::ptree root;
  std::istringstream in(text);
  try {
    pt::read_ini(in, root);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config syntax: ") + e.message() + " (line " +
                      std::to_string(e.line()) + ")");
  }
  static const std::map<std::string, std::set<std::string>> allowed = {
      {"model", {"family", "mean", "shape", "scale", "mu", "sigma", "csv", "n",
                 "unit_mean", "unit_sd", "xi"}},
      {"kernel", {"family", "c", "r", "k", "lambda", "w", "alpha", "gamma_r"}},
      {"market", {"gamma", "beta", "epsilon", "risk_measure"}},
      {"contract", {"layers"}},
      {"sweep", {"gamma", "gamma_r", "epsilon"}},
      {"asymptotics", {"n", "unit_mean", "unit_sd"}},
      {"solver", {"tol_quad", "tol_root"}},
      {"output", {"path"}},
  };
  RunConfig cfg;
  bool has_command = false;
  for (const auto& [name, node] : root) {
    if (node.empty()) {
      if (name != "command") throw ConfigError(name + ": unknown top-level key");
      cfg.command = parse_command(detail::trim(node.data()));
      has_command = true;
      continue;
    }
    auto it = allowed.find(name);
    if (it == allowed.end()) throw ConfigError("[" + name + "]: unknown section");
    const detail::Section s(name, node, it->second);
    if (name == "model") {
      cfg.model = detail::parse_model(s, base_dir);
    } else if (name == "kernel") {
      cfg.kernel = detail::parse_kernel(s);
    } else if (name == "market") {
      cfg.market = detail::parse_market(s);
      cfg.has_market = true;
    } else if (name == "contract") {
      cfg.layers = detail::parse_layers(s.key("layers"), s.text("layers"));
      detail::build("contract.layers",
                    [&] { return IndemnitySchedule::from_layers(*cfg.layers); });
    } else if (name == "sweep") {
      SweepSpec sw;
      if (s.has("gamma")) sw.gamma = s.list("gamma");
      if (s.has("gamma_r")) sw.gamma_r = s.list("gamma_r");
      if (s.has("epsilon")) sw.epsilon = s.list("epsilon");
      for (double e : sw.epsilon)
        if (!(e > 0.0 && e < 0.5))
          throw ConfigError("sweep.epsilon: epsilon must lie in (0, 0.5)");
      cfg.sweep = sw;
    } else if (name == "asymptotics") {
      AsymptoticsSpec a;
      for (double n : s.list("n")) {
        if (n != std::floor(n) || n < 10)
          throw ConfigError("asymptotics.n: entries must be integers >= 10");
        a.n.push_back(static_cast<long>(n));
      }
      a.unit_mean = s.number("unit_mean", 1.0);
      a.unit_sd = s.number("unit_sd", 1.0);
      if (!(a.unit_mean > 0.0) || !(a.unit_sd > 0.0))
        throw ConfigError("asymptotics: unit_mean and unit_sd must be positive");
      cfg.asymptotics = a;
    } else if (name == "solver") {
      cfg.tolerances.quad = s.number("tol_quad", cfg.tolerances.quad);
      cfg.tolerances.root = s.number("tol_root", cfg.tolerances.root);
      if (!(cfg.tolerances.quad > 0.0) || !(cfg.tolerances.root > 0.0))
        throw ConfigError("solver: tolerances must be positive");
    } else if (name == "output") {
      cfg.output_path = s.text("path");
    }
  }
  if (!has_command) throw ConfigError("command: missing mandatory key");
  return cfg;
}

/// Checks that the sections required by the command are present.
inline void require_sections(const RunConfig& cfg) {
  auto need = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string(what) + ": missing mandatory section");
  };
  need(cfg.kernel.has_value(), "[kernel]");
  need(cfg.has_market, "[market]");
  if (cfg.command != Command::asymptotics) need(cfg.model.has_value(), "[model]");
  if (cfg.command == Command::evaluate) need(cfg.layers.has_value(), "[contract]");
  if (cfg.command == Command::sweep) need(cfg.sweep.has_value(), "[sweep]");
  if (cfg.command == Command::asymptotics)
    need(cfg.asymptotics.has_value(), "[asymptotics]");
}

struct RunOutput {
  int status = 0;
  std::string csv;
  std::string summary;
};

namespace detail {

inline std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os << std::setprecision(12) << v;
  return os.str();
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::string csv_row(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += csv_field(fields[i]);
  }
  return out + "\r\n";
}

inline std::string bool_str(bool b) { return b ? "true" : "false"; }

inline std::string run_evaluate(const RunConfig& cfg, std::string& summary) {
  const IndemnitySchedule s = IndemnitySchedule::from_layers(*cfg.layers);
  const Valuation v = criterion(*cfg.model, *cfg.kernel, s, cfg.market, cfg.tolerances);
  std::string csv = csv_row({"contract", "surplus", "profit", "risk", "ratio"});
  csv += csv_row({s.describe(), fmt(v.surplus), fmt(v.profit), fmt(v.risk), fmt(v.ratio)});
  std::ostringstream os;
  os << "contract " << s.describe() << "\n"
     << "surplus  " << fmt(v.surplus) << "\nprofit   " << fmt(v.profit)
     << "\nrisk     " << fmt(v.risk) << "\nratio    " << fmt(v.ratio) << "\n";
  summary = os.str();
  return csv;
}

inline std::string run_optimize(const RunConfig& cfg, std::string& summary) {
  const OptimResult r = dinkelbach_optimize(*cfg.model, *cfg.kernel, cfg.market,
                                            {}, cfg.tolerances);
  const OptimResult t =
      best_truncated_stop_loss(*cfg.model, *cfg.kernel, cfg.market, cfg.tolerances);
  const AHatResult ah =
      solve_a_hat(*cfg.model, *cfg.kernel, cfg.market, cfg.tolerances);
  std::string csv = csv_row({"section", "index", "name", "value"});
  const auto layers = r.schedule.layers();
  for (std::size_t i = 0; i < layers.size(); ++i) {
    csv += csv_row({"layer", std::to_string(i), "attachment", fmt(layers[i].attachment)});
    csv += csv_row({"layer", std::to_string(i), "detachment", fmt(layers[i].detachment)});
  }
  csv += csv_row({"valuation", "0", "surplus", fmt(r.valuation.surplus)});
  csv += csv_row({"valuation", "0", "profit", fmt(r.valuation.profit)});
  csv += csv_row({"valuation", "0", "risk", fmt(r.valuation.risk)});
  csv += csv_row({"valuation", "0", "ratio", fmt(r.valuation.ratio)});
  for (std::size_t i = 0; i < r.mu_trace.size(); ++i)
    csv += csv_row({"mu_trace", std::to_string(i), "mu", fmt(r.mu_trace[i])});
  csv += csv_row({"classification", "0", "shape", to_string(r.classification)});
  csv += csv_row({"classification", "0", "layer_count", std::to_string(r.layer_count)});
  csv += csv_row({"classification", "0", "converged", bool_str(r.converged)});
  const auto tl = t.schedule.layers().front();
  csv += csv_row({"best_truncated_stop_loss", "0", "attachment", fmt(tl.attachment)});
  csv += csv_row({"best_truncated_stop_loss", "0", "detachment", fmt(tl.detachment)});
  csv += csv_row({"best_truncated_stop_loss", "0", "ratio", fmt(t.valuation.ratio)});
  csv += csv_row({"a_hat", "0", "a_hat", fmt(ah.a_hat)});
  csv += csv_row({"a_hat", "0", "ratio", fmt(ah.ratio)});
  csv += csv_row({"a_hat", "0", "root_found", bool_str(ah.root_found)});

  std::ostringstream os;
  os << "optimal contract  " << r.schedule.describe() << "\n"
     << "classification    " << to_string(r.classification) << " ("
     << r.layer_count << " layer" << (r.layer_count == 1 ? "" : "s") << ")\n"
     << "ratio             " << fmt(r.valuation.ratio) << "\n"
     << "profit            " << fmt(r.valuation.profit) << "\n"
     << "risk              " << fmt(r.valuation.risk) << "\n"
     << "dinkelbach steps  " << r.mu_trace.size() - 1
     << (r.converged ? "" : " (not converged)") << "\n"
     << "best single layer " << t.schedule.describe() << " ratio "
     << fmt(t.valuation.ratio) << "\n"
     << "fixed point a_hat " << fmt(ah.a_hat) << "\n";
  summary = os.str();
  return csv;
}

inline std::vector<std::string> check_header() {
  return {"loading_ok", "loading_margin", "quantile_ok", "quantile_margin",
          "solvency_ok", "solvency_value", "e33_ok", "lhs", "rhs",
          "gamma_bar", "gamma_lower", "predicted_shape"};
}

inline std::vector<std::string> check_fields(const ConditionReport& c) {
  return {bool_str(c.loading_ok), fmt(c.loading_margin), bool_str(c.quantile_ok),
          fmt(c.quantile_margin), bool_str(c.solvency_ok), fmt(c.solvency_value),
          bool_str(c.e33_ok), fmt(c.e33_lhs), fmt(c.e33_rhs), fmt(c.gamma_bar),
          fmt(c.gamma_lower), to_string(c.predicted_shape)};
}

inline std::string run_check(const RunConfig& cfg, std::string& summary) {
  const ConditionReport c =
      check_conditions(*cfg.model, *cfg.kernel, cfg.market, cfg.tolerances);
  std::string csv = csv_row(check_header()) + csv_row(check_fields(c));
  std::ostringstream os;
  const auto h = check_header();
  const auto f = check_fields(c);
  for (std::size_t i = 0; i < h.size(); ++i)
    os << std::left << std::setw(16) << h[i] << f[i] << "\n";
  summary = os.str();
  return csv;
}

struct SweepCell {
  double gamma;
  double gamma_r;
  double epsilon;
};

inline std::vector<std::string> sweep_cell(const RunConfig& cfg, const SweepCell& cell) {
  MarketSpec m = cfg.market;
  m.gamma = cell.gamma;
  m.epsilon = cell.epsilon;
  const PricingKernel k = cfg.kernel->with_gamma_r(cell.gamma_r);
  const ConditionReport c = check_conditions(*cfg.model, k, m, cfg.tolerances);
  std::string status = "ok";
  std::string layer_count = "";
  std::string shape = "";
  std::string ratio = "";
  std::string agrees = "";
  try {
    const OptimResult r = dinkelbach_optimize(*cfg.model, k, m, {}, cfg.tolerances);
    layer_count = std::to_string(r.layer_count);
    shape = to_string(r.classification);
    ratio = fmt(r.valuation.ratio);
    if (c.predicted_shape == PredictedShape::single_layer)
      agrees = bool_str(r.layer_count <= 1);
  } catch (const NonpositiveRiskError&) {
    status = "infinite-ratio";
  } catch (const SolverError&) {
    status = "solver-error";
  }
  return {fmt(cell.gamma), fmt(cell.gamma_r), fmt(cell.epsilon),
          to_string(c.predicted_shape), fmt(c.e33_lhs), fmt(c.e33_rhs),
          fmt(c.solvency_value), status, layer_count, shape, ratio, agrees};
}

inline std::string run_sweep(const RunConfig& cfg, std::string& summary) {
  const SweepSpec& sw = *cfg.sweep;
  const auto pick = [](const std::vector<double>& v, double base) {
    return v.empty() ? std::vector<double>{base} : v;
  };
  std::vector<SweepCell> cells;
  for (double g : pick(sw.gamma, cfg.market.gamma))
    for (double gr : pick(sw.gamma_r, cfg.kernel->gamma_r()))
      for (double e : pick(sw.epsilon, cfg.market.epsilon))
        cells.push_back({g, gr, e});

  std::vector<std::vector<std::string>> rows(cells.size());
  std::vector<std::string> errors(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < cells.size();) {
      try {
        rows[i] = sweep_cell(cfg, cells[i]);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  const std::size_t n_threads = std::max<std::size_t>(
      1, std::min<std::size_t>(cells.size(), std::thread::hardware_concurrency()));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (std::size_t i = 0; i < cells.size(); ++i)
    if (!errors[i].empty()) throw SolverError("sweep cell " + std::to_string(i) + ": " + errors[i]);

  std::string csv = csv_row({"gamma", "gamma_r", "epsilon", "predicted_shape",
                             "lhs", "rhs", "solvency_value", "optimizer_status",
                             "layer_count", "classification", "ratio",
                             "prediction_agrees"});
  std::size_t single = 0;
  for (const auto& r : rows) {
    csv += csv_row(r);
    if (r[3] == "single-layer") ++single;
  }
  std::ostringstream os;
  os << cells.size() << " cells, " << single << " predicted single-layer\n";
  summary = os.str();
  return csv;
}

inline std::string run_asymptotics(const RunConfig& cfg, std::string& summary) {
  const AsymptoticsSpec& a = *cfg.asymptotics;
  const auto rows = asymptotic_profit_ratio(a.n, a.unit_mean, a.unit_sd,
                                            *cfg.kernel, cfg.market, cfg.tolerances);
  std::string csv = csv_row({"n", "xi", "x_eps", "g_over_xi", "limit", "gap",
                             "gap_sqrt_n", "sign"});
  std::ostringstream os;
  for (const auto& r : rows) {
    csv += csv_row({std::to_string(r.n), fmt(r.xi), fmt(r.x_eps), fmt(r.g_over_xi),
                    fmt(r.limit), fmt(r.gap), fmt(r.gap_sqrt_n), std::to_string(r.sign)});
    os << "n=" << r.n << "  G/xi=" << fmt(r.g_over_xi) << "  gap=" << fmt(r.gap)
       << "  gap*sqrt(n)=" << fmt(r.gap_sqrt_n) << "\n";
  }
  summary = os.str();
  return csv;
}

}  // namespace detail

/// Dispatches the configured command. Solver failures propagate as
/// exceptions; see execute() for the exit-status mapping.
inline RunOutput run(const RunConfig& cfg) {
  require_sections(cfg);
  RunOutput out;
  switch (cfg.command) {
    case Command::evaluate: out.csv = detail::run_evaluate(cfg, out.summary); break;
    case Command::optimize: out.csv = detail::run_optimize(cfg, out.summary); break;
    case Command::check: out.csv = detail::run_check(cfg, out.summary); break;
    case Command::sweep: out.csv = detail::run_sweep(cfg, out.summary); break;
    case Command::asymptotics: out.csv = detail::run_asymptotics(cfg, out.summary); break;
  }
  return out;
}

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitSolver = 3;

struct Invocation {
  std::string config_path;
  std::optional<std::string> out_path;
  std::optional<std::string> command;
  std::optional<double> tol_quad;
  std::optional<double> tol_root;
};

/// Reads the configuration, applies flag overrides, runs, and writes the
/// CSV (to the output path, or to `out` when none is set). The summary goes
/// to `out` when the CSV goes to a file, otherwise to `err`.
inline int execute(const Invocation& inv, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  try {
    std::ifstream in(inv.config_path);
    if (!in) throw ConfigError("cannot open config file " + inv.config_path);
    std::stringstream buf;
    buf << in.rdbuf();
    const std::filesystem::path base =
        std::filesystem::path(inv.config_path).parent_path();
    cfg = parse_config(buf.str(), base.empty() ? std::filesystem::path(".") : base);
    if (inv.command) cfg.command = parse_command(*inv.command);
    if (inv.out_path) cfg.output_path = inv.out_path;
    if (inv.tol_quad) cfg.tolerances.quad = *inv.tol_quad;
    if (inv.tol_root) cfg.tolerances.root = *inv.tol_root;
    if (!(cfg.tolerances.quad > 0.0) || !(cfg.tolerances.root > 0.0))
      throw ConfigError("tolerances must be positive");
    require_sections(cfg);
  } catch (const std::exception& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  RunOutput r;
  try {
    r = run(cfg);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "solver error: " << e.what() << "\n";
    return kExitSolver;
  }
  if (cfg.output_path) {
    std::ofstream f(*cfg.output_path, std::ios::binary);
    if (!f) {
      err << "cannot write " << *cfg.output_path << "\n";
      return kExitConfig;
    }
    f << r.csv;
    out << r.summary;
  } else {
    out << r.csv;
    err << r.summary;
  }
  return r.status;
}

}  // namespace reinsure::cli

#endif  // REINSURE_CLI_HPP
