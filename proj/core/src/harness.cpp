#include "ratiomom/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "ratiomom/asymptotics.hpp"
#include "ratiomom/combinatorics.hpp"
#include "ratiomom/errors.hpp"
#include "ratiomom/exact_moments.hpp"

namespace ratiomom::harness {

namespace {

using nlohmann::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr const char* kVersion = "0.1.0";

// ---- config parsing --------------------------------------------------------

void reject_unknown(const json& obj, const std::string& path, const std::set<std::string>& allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key())) {
      throw ConfigError(path.empty() ? it.key() : path + "." + it.key(), "unknown key");
    }
  }
}

const json& require_object(const json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path, "expected an object");
  return j;
}

double get_number(const json& obj, const std::string& key, const std::string& path, bool required,
                  double fallback) {
  const std::string field = path + "." + key;
  if (!obj.contains(key)) {
    if (required) throw ConfigError(field, "required field missing");
    return fallback;
  }
  const auto& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(field, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ConfigError(field, "must be finite");
  return d;
}

std::string get_string(const json& obj, const std::string& key, const std::string& path,
                       const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_string()) throw ConfigError(path + "." + key, "expected a string");
  return v.get<std::string>();
}

long long get_integer(const json& v, const std::string& field) {
  if (!v.is_number_integer() && !v.is_number_unsigned()) {
    if (v.is_number_float()) {
      const double d = v.get<double>();
      if (std::floor(d) == d && std::fabs(d) < 9e15) return static_cast<long long>(d);
    }
    throw ConfigError(field, "expected an integer");
  }
  return v.get<long long>();
}

SeveritySpec parse_severity(const json& j) {
  require_object(j, "severity");
  reject_unknown(j, "severity", {"family", "alpha", "x0", "log_power"});
  SeveritySpec s;
  s.family = get_string(j, "family", "severity", "strict_pareto");
  if (s.family != "strict_pareto" && s.family != "log_pareto") {
    throw ConfigError("severity.family", "expected \"strict_pareto\" or \"log_pareto\", got \"" + s.family + "\"");
  }
  s.alpha = get_number(j, "alpha", "severity", true, 0.0);
  if (!(s.alpha > 0.0)) throw ConfigError("severity.alpha", "must be > 0");
  const bool log = s.family == "log_pareto";
  s.x0 = get_number(j, "x0", "severity", false, log ? 0.0 : 1.0);
  if (!(s.x0 > 0.0) && !(log && s.x0 == 0.0)) throw ConfigError("severity.x0", "must be > 0");
  s.log_power = get_number(j, "log_power", "severity", false, 0.0);
  if (!log && s.log_power != 0.0) throw ConfigError("severity.log_power", "only valid for log_pareto");
  if (log) {
    try {
      severity::SeverityModel::log_pareto(s.alpha, s.log_power, s.x0);
    } catch (const DomainError& ex) {
      throw ConfigError("severity.x0", ex.what());
    }
  }
  return s;
}

MixingSpec parse_mixing(const json& j) {
  require_object(j, "mixing");
  reject_unknown(j, "mixing", {"kind", "lambda", "shape", "rate"});
  MixingSpec m;
  m.kind = get_string(j, "kind", "mixing", "degenerate");
  if (m.kind == "degenerate") {
    if (j.contains("shape") || j.contains("rate")) throw ConfigError("mixing", "shape/rate need kind \"gamma\"");
    m.lambda = get_number(j, "lambda", "mixing", false, 1.0);
    if (!(m.lambda > 0.0)) throw ConfigError("mixing.lambda", "must be > 0");
  } else if (m.kind == "gamma") {
    if (j.contains("lambda")) throw ConfigError("mixing.lambda", "only valid for kind \"degenerate\"");
    m.shape = get_number(j, "shape", "mixing", true, 0.0);
    m.rate = get_number(j, "rate", "mixing", true, 0.0);
    if (!(m.shape > 0.0)) throw ConfigError("mixing.shape", "must be > 0");
    if (!(m.rate > 0.0)) throw ConfigError("mixing.rate", "must be > 0");
  } else {
    throw ConfigError("mixing.kind", "expected \"degenerate\" or \"gamma\", got \"" + m.kind + "\"");
  }
  return m;
}

std::vector<double> parse_t_list(const json& j) {
  if (!j.is_array() || j.empty()) throw ConfigError("t", "expected a non-empty array of horizons");
  std::vector<double> ts;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string field = "t[" + std::to_string(i) + "]";
    if (!j[i].is_number()) throw ConfigError(field, "expected a number");
    const double t = j[i].get<double>();
    if (!(t > 0.0) || !std::isfinite(t)) throw ConfigError(field, "must be finite and > 0");
    if (!ts.empty() && !(t > ts.back())) throw ConfigError(field, "t grid must be strictly increasing");
    ts.push_back(t);
  }
  return ts;
}

std::vector<double> parse_t_grid(const json& j) {
  require_object(j, "t_grid");
  reject_unknown(j, "t_grid", {"start", "stop", "points_per_decade"});
  const double start = get_number(j, "start", "t_grid", true, 0.0);
  const double stop = get_number(j, "stop", "t_grid", true, 0.0);
  const double ppd = get_number(j, "points_per_decade", "t_grid", false, 1.0);
  if (!(start > 0.0)) throw ConfigError("t_grid.start", "must be > 0");
  if (!(stop >= start)) throw ConfigError("t_grid.stop", "must be >= start");
  if (!(ppd > 0.0) || std::floor(ppd) != ppd) throw ConfigError("t_grid.points_per_decade", "must be a positive integer");
  const double decades = std::log10(stop / start);
  const int n = static_cast<int>(std::floor(decades * ppd + 1e-9));
  std::vector<double> ts;
  for (int i = 0; i <= n; ++i) {
    const double t = start * std::pow(10.0, i / ppd);
    ts.push_back(i == n && std::fabs(t / stop - 1.0) < 1e-9 ? stop : t);
  }
  return ts;
}

std::vector<int> parse_ks(const json& j) {
  std::vector<int> ks;
  auto push = [&](const json& v, const std::string& field) {
    const long long k = get_integer(v, field);
    if (k < 1 || k > combinatorics::kMaxOrder) throw ConfigError(field, "moment order must lie in [1, 30]");
    if (std::find(ks.begin(), ks.end(), static_cast<int>(k)) != ks.end()) {
      throw ConfigError(field, "duplicate moment order");
    }
    ks.push_back(static_cast<int>(k));
  };
  if (j.is_array()) {
    if (j.empty()) throw ConfigError("k", "expected at least one moment order");
    for (std::size_t i = 0; i < j.size(); ++i) push(j[i], "k[" + std::to_string(i) + "]");
  } else {
    push(j, "k");
  }
  std::sort(ks.begin(), ks.end());
  return ks;
}

std::string join(const std::vector<std::string>& v, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? sep : "") + v[i];
  return out;
}

// ---- shared evaluation -------------------------------------------------------

template <class Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
  threads = static_cast<int>(std::min<std::size_t>(std::max(threads, 1), std::max<std::size_t>(n, 1)));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (int w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

struct CellContext {
  std::string regime;
  std::string hypotheses;
  double asymptote = kNaN;
  std::string asymptote_error;
};

CellContext context_for(const severity::SeverityModel& sev, const mixing::MixingModel& mix, int k, double t) {
  CellContext c;
  const auto reg = asymptotics::classify(sev, k);
  c.regime = to_string(reg);
  c.hypotheses = mixing::validate_hypotheses(mix, reg, k, sev.alpha()).summary();
  if (reg.near_boundary) c.hypotheses += "; warning: " + reg.warning;
  try {
    c.asymptote = asymptotics::asymptote(sev, mix, k, reg, t).value;
  } catch (const std::exception& ex) {
    c.asymptote_error = std::string("asymptote: ") + ex.what();
  }
  return c;
}

ConvergenceRow make_row(double t, int k, double alpha, const std::string& method, double value,
                        double err, const CellContext& ctx) {
  ConvergenceRow r;
  r.t = t;
  r.k = k;
  r.alpha = alpha;
  r.method = method;
  r.value = value;
  r.err_est = err;
  r.asymptote = ctx.asymptote;
  r.ratio = (std::isfinite(ctx.asymptote) && ctx.asymptote != 0.0 && std::isfinite(value))
                ? value / ctx.asymptote
                : kNaN;
  r.regime = ctx.regime;
  r.hypotheses = ctx.hypotheses;
  return r;
}

// ---- writers -------------------------------------------------------------------

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

void write_provenance(std::ostream& os, const Provenance& prov) {
  for (const auto& [k, v] : prov) os << "# " << k << "=" << v << "\n";
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

// ---- verify checks --------------------------------------------------------------

VerifyCheck check_q_integral() {
  const auto mix = mixing::MixingModel::gamma(2.0, 1.0);
  numerics::QuadratureConfig cfg;
  cfg.rel_tol = 1e-11;
  double worst = 0.0;
  std::string where;
  for (int r : {1, 2, 3}) {
    for (double beta : {0.5, 1.0, 2.5}) {
      const auto lhs = numerics::integrate_semi_infinite(
          [&](double w) { return std::pow(w, beta - 1.0) * mixing::q_r(mix, r, w); }, 0.0, cfg);
      const double rhs = std::exp(numerics::log_gamma(beta)) * mixing::lambda_moment(mix, r - beta);
      const double rel = std::fabs(lhs.value / rhs - 1.0);
      if (rel > worst) {
        worst = rel;
        where = "r=" + std::to_string(r) + " beta=" + format_number(beta);
      }
    }
  }
  return {"q-integral-identity", worst <= 1e-7, worst, 1e-7, "gamma(2,1), 9 combos; worst at " + where};
}

VerifyCheck check_g_coefficient() {
  double worst = 0.0;
  for (double alpha : {0.25, 0.5, 0.75}) {
    for (int k = 1; k <= 8; ++k) {
      for (int r = 1; r <= k; ++r) {
        const double a = combinatorics::g_coefficient(r, k, alpha);
        const double b = combinatorics::g_coefficient_by_compositions(r, k, alpha);
        worst = std::max(worst, std::fabs(a / b - 1.0));
      }
    }
  }
  return {"g-coefficient-equivalence", worst <= 1e-10, worst, 1e-10, "k<=8, all r, alpha in {0.25,0.5,0.75}"};
}

VerifyCheck check_pgf_identity() {
  double worst = 0.0;
  const std::vector<mixing::MixingModel> models{mixing::MixingModel::degenerate(1.0),
                                                mixing::MixingModel::degenerate(2.5),
                                                mixing::MixingModel::gamma(2.0, 1.0),
                                                mixing::MixingModel::gamma(0.7, 3.0)};
  for (const auto& m : models) {
    for (int r = 0; r <= 4; ++r) {
      for (double t : {1.0, 10.0, 100.0}) {
        for (double frac : {0.0, 0.01, 0.25, 0.5, 0.9}) {
          const double w = frac * t;
          const double lhs = mixing::pgf_deriv(m, r, t, 1.0 - w / t) / std::pow(t, r);
          worst = std::max(worst, std::fabs(lhs / mixing::q_r(m, r, w) - 1.0));
        }
      }
    }
    for (double t : {0.5, 1.0, 10.0}) worst = std::max(worst, std::fabs(mixing::pgf_deriv(m, 0, t, 1.0) - 1.0));
  }
  return {"pgf-identity", worst <= 1e-12, worst, 1e-12, "r<=4, t in {1,10,100}, w/t in [0,0.9], 4 models"};
}

VerifyCheck check_cv_identity(const StudyConfig& cfg, int threads) {
  montecarlo::SimulationConfig sim = cfg.simulation;
  sim.n_replicates = 10000;
  sim.n_streams = std::max(threads, 1);
  const double t = std::min(cfg.ts.front(), 100.0);
  try {
    const auto s = montecarlo::cv_summary(cfg.make_severity(), cfg.make_mixing(), t, sim);
    return {"cv-identity", s.max_identity_residual <= 1e-12, s.max_identity_residual, 1e-12,
            std::to_string(s.defined) + " defined samples at t=" + format_number(t)};
  } catch (const IdentityError& ex) {
    return {"cv-identity", false, kNaN, 1e-12, ex.what()};
  }
}

VerifyCheck check_complete_monotonicity(const StudyConfig& cfg) {
  std::vector<severity::SeverityModel> models{cfg.make_severity(),
                                              severity::SeverityModel::strict_pareto(0.5),
                                              severity::SeverityModel::strict_pareto(1.5),
                                              severity::SeverityModel::strict_pareto(3.0),
                                              severity::SeverityModel::log_pareto(2.0, -2.0)};
  int bad = 0;
  int total = 0;
  std::string first;
  for (const auto& m : models) {
    for (int n = 1; n <= 6; ++n) {
      for (double s : {0.01, 0.1, 1.0, 10.0}) {
        ++total;
        const double d = severity::laplace_deriv(m, n, s);
        const bool ok = std::isfinite(d) && d != 0.0 && ((n % 2 == 0) == (d > 0.0));
        if (!ok && bad++ == 0) first = m.describe() + " n=" + std::to_string(n) + " s=" + format_number(s);
      }
    }
  }
  return {"complete-monotonicity", bad == 0, static_cast<double>(bad), 0.0,
          std::to_string(total) + " sign checks" + (bad ? "; first failure " + first : "")};
}

VerifyCheck check_moment_bounds(const StudyConfig& cfg) {
  const auto sev = cfg.make_severity();
  const auto mix = cfg.make_mixing();
  const double t = cfg.ts.front();
  double prev = 1.0;
  std::string detail;
  bool ok = true;
  for (int k = 1; k <= 4; ++k) {
    const double v = exact::moment_tk(sev, mix, t, k, cfg.quadrature).value;
    if (!(v >= 0.0 && v <= 1.0) || v > prev * (1.0 + 1e-9)) {
      ok = false;
      detail = "violated at k=" + std::to_string(k) + " value=" + format_number(v);
    }
    prev = v;
  }
  if (ok) detail = "0 <= E{T^k} <= 1 and non-increasing for k<=4 at t=" + format_number(t);
  return {"moment-bounds", ok, 0.0, 0.0, detail};
}

}  // namespace

// ---- StudyConfig -------------------------------------------------------------

severity::SeverityModel StudyConfig::make_severity() const {
  if (severity.family == "log_pareto") {
    return severity::SeverityModel::log_pareto(severity.alpha, severity.log_power, severity.x0);
  }
  return severity::SeverityModel::strict_pareto(severity.alpha, severity.x0);
}

mixing::MixingModel StudyConfig::make_mixing() const {
  if (mixing.kind == "gamma") return mixing::MixingModel::gamma(mixing.shape, mixing.rate);
  return mixing::MixingModel::degenerate(mixing.lambda);
}

Provenance StudyConfig::provenance() const {
  std::vector<std::string> k_txt;
  for (int k : ks) k_txt.push_back(std::to_string(k));
  std::vector<std::string> t_txt;
  for (double t : ts) t_txt.push_back(format_number(t));
  std::vector<std::string> methods;
  if (run_quadrature) methods.push_back("quadrature");
  if (run_monte_carlo) methods.push_back("monte-carlo");
  if (run_asymptote) methods.push_back("asymptote");
  return {
      {"ratiomom_version", kVersion},
      {"severity", make_severity().describe()},
      {"mixing", make_mixing().describe()},
      {"k", join(k_txt, ";")},
      {"t", join(t_txt, ";")},
      {"methods", join(methods, ";")},
      {"quadrature.rel_tol", format_number(quadrature.rel_tol)},
      {"quadrature.abs_tol", format_number(quadrature.abs_tol)},
      {"quadrature.max_subdivisions", std::to_string(quadrature.max_subdivisions)},
      {"quadrature.tail_cutoff_factor", format_number(quadrature.tail_cutoff_factor)},
      {"simulation.replicates", std::to_string(simulation.n_replicates)},
      {"simulation.seed", std::to_string(simulation.seed)},
  };
}

StudyConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& ex) {
    std::size_t line = 1;
    const std::size_t upto = std::min<std::size_t>(ex.byte, text.size());
    for (std::size_t i = 0; i + 1 < upto; ++i) line += text[i] == '\n';
    throw ConfigError("", "syntax error at line " + std::to_string(line) + ": " + ex.what());
  }
  if (!j.is_object()) throw ConfigError("", "top level must be an object");
  reject_unknown(j, "", {"severity", "mixing", "k", "t", "t_grid", "methods", "quadrature", "simulation", "output"});

  StudyConfig c;
  if (j.contains("severity")) c.severity = parse_severity(j["severity"]);
  if (j.contains("mixing")) c.mixing = parse_mixing(j["mixing"]);
  if (j.contains("k")) c.ks = parse_ks(j["k"]);
  if (j.contains("t") && j.contains("t_grid")) throw ConfigError("t_grid", "give either t or t_grid, not both");
  if (j.contains("t")) c.ts = parse_t_list(j["t"]);
  if (j.contains("t_grid")) c.ts = parse_t_grid(j["t_grid"]);
  if (j.contains("methods")) {
    const auto& m = j["methods"];
    if (!m.is_array() || m.empty()) throw ConfigError("methods", "expected a non-empty array");
    c.run_quadrature = c.run_asymptote = c.run_monte_carlo = false;
    for (std::size_t i = 0; i < m.size(); ++i) {
      const std::string field = "methods[" + std::to_string(i) + "]";
      if (!m[i].is_string()) throw ConfigError(field, "expected a string");
      const auto s = m[i].get<std::string>();
      if (s == "quadrature") c.run_quadrature = true;
      else if (s == "asymptote") c.run_asymptote = true;
      else if (s == "monte-carlo") c.run_monte_carlo = true;
      else throw ConfigError(field, "unknown method \"" + s + "\"");
    }
  }
  if (j.contains("quadrature")) {
    const auto& q = require_object(j["quadrature"], "quadrature");
    reject_unknown(q, "quadrature", {"rel_tol", "abs_tol", "max_subdivisions", "tail_cutoff_factor"});
    c.quadrature.rel_tol = get_number(q, "rel_tol", "quadrature", false, c.quadrature.rel_tol);
    c.quadrature.abs_tol = get_number(q, "abs_tol", "quadrature", false, c.quadrature.abs_tol);
    c.quadrature.tail_cutoff_factor =
        get_number(q, "tail_cutoff_factor", "quadrature", false, c.quadrature.tail_cutoff_factor);
    if (q.contains("max_subdivisions")) {
      const long long m = get_integer(q["max_subdivisions"], "quadrature.max_subdivisions");
      if (m < 1 || m > 10000000) throw ConfigError("quadrature.max_subdivisions", "must lie in [1, 1e7]");
      c.quadrature.max_subdivisions = static_cast<int>(m);
    }
    try {
      c.quadrature.validate();
    } catch (const DomainError& ex) {
      throw ConfigError("quadrature", ex.what());
    }
  }
  if (j.contains("simulation")) {
    const auto& s = require_object(j["simulation"], "simulation");
    reject_unknown(s, "simulation", {"replicates", "seed"});
    if (s.contains("replicates")) {
      const long long n = get_integer(s["replicates"], "simulation.replicates");
      if (n < 1) throw ConfigError("simulation.replicates", "must be >= 1");
      c.simulation.n_replicates = n;
    }
    if (s.contains("seed")) {
      const auto& v = s["seed"];
      if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
        throw ConfigError("simulation.seed", "expected a non-negative integer");
      }
      c.simulation.seed = v.get<std::uint64_t>();
    }
  }
  c.output = get_string(j, "output", "", "");
  if (j.contains("output")) {
    if (!j["output"].is_string()) throw ConfigError("output", "expected a string");
  }
  try {
    (void)c.make_severity();
    (void)c.make_mixing();
  } catch (const DomainError& ex) {
    throw ConfigError("severity", ex.what());
  }
  return c;
}

StudyConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

// ---- commands -------------------------------------------------------------------

std::vector<LimitsRow> cmd_limits(const StudyConfig& cfg) {
  const double a = cfg.severity.alpha;
  if (!(a > 0.0 && a < 1.0)) throw ConfigError("severity.alpha", "limits needs alpha in (0, 1)");
  std::vector<LimitsRow> rows;
  for (int k : cfg.ks) {
    const auto terms = asymptotics::limit_alpha01_terms(a, k);
    const double lim = asymptotics::limit_alpha01(a, k);
    for (const auto& t : terms) rows.push_back({k, a, t.r, t.g_coefficient, t.term, lim});
  }
  return rows;
}

std::vector<ConvergenceRow> cmd_converge(const StudyConfig& cfg, int threads) {
  const auto sev = cfg.make_severity();
  const auto mix = cfg.make_mixing();
  exact::MomentEvaluator eval(sev, mix, cfg.quadrature);
  struct Cell {
    int k;
    double t;
    CellContext ctx;
    std::vector<ConvergenceRow> rows;
  };
  std::vector<Cell> cells;
  for (int k : cfg.ks) {
    for (double t : cfg.ts) cells.push_back({k, t, {}, {}});
  }

  // Quadrature and asymptotes in parallel across cells; Monte Carlo runs
  // afterwards with the threads spread over its own blocks.
  parallel_for(cells.size(), threads, [&](std::size_t i) {
    auto& c = cells[i];
    c.ctx = context_for(sev, mix, c.k, c.t);
    if (cfg.run_quadrature) {
      ConvergenceRow row;
      try {
        const auto e = eval.moment(c.t, c.k);
        row = make_row(c.t, c.k, sev.alpha(), "quadrature", e.value, e.err_est, c.ctx);
      } catch (const ConvergenceError& ex) {
        row = make_row(c.t, c.k, sev.alpha(), "quadrature", ex.partial_value(), ex.partial_err(), c.ctx);
        row.error = ex.what();
      } catch (const std::exception& ex) {
        row = make_row(c.t, c.k, sev.alpha(), "quadrature", kNaN, kNaN, c.ctx);
        row.error = ex.what();
      }
      c.rows.push_back(std::move(row));
    }
  });
  if (cfg.run_monte_carlo) {
    auto sim = cfg.simulation;
    sim.n_streams = std::max(threads, 1);
    for (auto& c : cells) {
      ConvergenceRow row;
      try {
        const auto e = montecarlo::mc_moment(sev, mix, c.t, c.k, sim);
        row = make_row(c.t, c.k, sev.alpha(), "monte-carlo", e.value, e.err_est, c.ctx);
      } catch (const std::exception& ex) {
        row = make_row(c.t, c.k, sev.alpha(), "monte-carlo", kNaN, kNaN, c.ctx);
        row.error = ex.what();
      }
      c.rows.push_back(std::move(row));
    }
  }
  // The α = 1, μ1 = ∞ law converges too slowly for a tolerance; its rows
  // carry a trend verdict against the previous t instead.
  std::map<std::pair<int, std::string>, double> last_gap;
  for (auto& c : cells) {
    if (c.ctx.regime != to_string(RegimeTag::Alpha1Mu1Inf)) continue;
    for (auto& r : c.rows) {
      if (std::isnan(r.ratio)) continue;
      const double gap = std::fabs(r.ratio - 1.0);
      const auto key = std::make_pair(c.k, r.method);
      const auto it = last_gap.find(key);
      if (it != last_gap.end()) r.hypotheses += gap < it->second ? "; trend=toward" : "; trend=away";
      last_gap[key] = gap;
    }
  }
  std::vector<ConvergenceRow> out;
  for (auto& c : cells) {
    for (auto& r : c.rows) out.push_back(std::move(r));
    if (cfg.run_asymptote) {
      auto row = make_row(c.t, c.k, sev.alpha(), "asymptote", c.ctx.asymptote, 0.0, c.ctx);
      row.error = c.ctx.asymptote_error;
      out.push_back(std::move(row));
    }
  }
  return out;
}

std::vector<ConvergenceRow> cmd_simulate(const StudyConfig& cfg, int threads) {
  const auto sev = cfg.make_severity();
  const auto mix = cfg.make_mixing();
  auto sim = cfg.simulation;
  sim.n_streams = std::max(threads, 1);
  const double a = sev.alpha();

  std::map<std::pair<int, double>, std::vector<ConvergenceRow>> by_cell;
  std::vector<ConvergenceRow> cv_rows;
  for (double t : cfg.ts) {
    std::vector<MomentEstimate> est;
    std::string err;
    try {
      est = montecarlo::mc_moments(sev, mix, t, cfg.ks, sim);
    } catch (const std::exception& ex) {
      err = ex.what();
    }
    for (std::size_t j = 0; j < cfg.ks.size(); ++j) {
      const int k = cfg.ks[j];
      const auto ctx = context_for(sev, mix, k, t);
      auto& rows = by_cell[{k, t}];
      if (est.empty()) {
        auto row = make_row(t, k, a, "monte-carlo", kNaN, kNaN, ctx);
        row.error = err;
        rows.push_back(std::move(row));
        continue;
      }
      rows.push_back(make_row(t, k, a, "monte-carlo", est[j].value, est[j].err_est, ctx));
      if (a <= 2.0) rows.push_back(make_row(t, k, a, "monte-carlo-median", est[j].median_of_means, kNaN, ctx));
    }
    ConvergenceRow cv;
    cv.t = t;
    cv.k = 0;
    cv.alpha = a;
    cv.method = "sample-cv";
    cv.asymptote = kNaN;
    cv.ratio = kNaN;
    try {
      const auto s = montecarlo::cv_summary(sev, mix, t, sim);
      cv.value = s.mean_cv;
      cv.err_est = s.mean_cv_stderr;
    } catch (const std::exception& ex) {
      cv.value = kNaN;
      cv.err_est = kNaN;
      cv.error = ex.what();
    }
    cv_rows.push_back(std::move(cv));
  }
  std::vector<ConvergenceRow> out;
  for (auto& r : cv_rows) out.push_back(std::move(r));
  for (auto& [key, rows] : by_cell) {
    for (auto& r : rows) out.push_back(std::move(r));
  }
  return out;
}

std::vector<VerifyCheck> cmd_verify(const StudyConfig& cfg, int threads) {
  std::vector<VerifyCheck> out;
  const auto guarded = [&](const char* name, auto&& fn) {
    try {
      out.push_back(fn());
    } catch (const std::exception& ex) {
      out.push_back({name, false, kNaN, kNaN, std::string("exception: ") + ex.what()});
    }
  };
  guarded("q-integral-identity", [] { return check_q_integral(); });
  guarded("g-coefficient-equivalence", [] { return check_g_coefficient(); });
  guarded("pgf-identity", [] { return check_pgf_identity(); });
  guarded("cv-identity", [&] { return check_cv_identity(cfg, threads); });
  guarded("complete-monotonicity", [&] { return check_complete_monotonicity(cfg); });
  guarded("moment-bounds", [&] { return check_moment_bounds(cfg); });
  return out;
}

// ---- output -----------------------------------------------------------------------

std::string format_number(double v) {
  if (std::isnan(v)) return "";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_rows_csv(std::ostream& os, const std::vector<ConvergenceRow>& rows, const Provenance& prov) {
  write_provenance(os, prov);
  os << "t,k,alpha,method,value,err_est,asymptote,ratio,regime,hypotheses,error\n";
  for (const auto& r : rows) {
    os << format_number(r.t) << ',' << r.k << ',' << format_number(r.alpha) << ',' << csv_field(r.method) << ','
       << format_number(r.value) << ',' << format_number(r.err_est) << ',' << format_number(r.asymptote) << ','
       << format_number(r.ratio) << ',' << csv_field(r.regime) << ',' << csv_field(r.hypotheses) << ','
       << csv_field(r.error) << '\n';
  }
}

void write_rows_json(std::ostream& os, const std::vector<ConvergenceRow>& rows, const Provenance&) {
  json arr = json::array();
  for (const auto& r : rows) {
    arr.push_back({{"t", r.t},
                   {"k", r.k},
                   {"alpha", r.alpha},
                   {"method", r.method},
                   {"value", number_or_null(r.value)},
                   {"err_est", number_or_null(r.err_est)},
                   {"asymptote", number_or_null(r.asymptote)},
                   {"ratio", number_or_null(r.ratio)},
                   {"regime", r.regime},
                   {"hypotheses", r.hypotheses},
                   {"error", r.error}});
  }
  os << arr.dump(2) << '\n';
}

void write_limits_csv(std::ostream& os, const std::vector<LimitsRow>& rows, const Provenance& prov) {
  write_provenance(os, prov);
  os << "k,alpha,r,g_coefficient,term,limit\n";
  for (const auto& r : rows) {
    os << r.k << ',' << format_number(r.alpha) << ',' << r.r << ',' << format_number(r.g_coefficient) << ','
       << format_number(r.term) << ',' << format_number(r.limit) << '\n';
  }
}

void write_limits_json(std::ostream& os, const std::vector<LimitsRow>& rows, const Provenance&) {
  json arr = json::array();
  for (const auto& r : rows) {
    arr.push_back({{"k", r.k}, {"alpha", r.alpha}, {"r", r.r}, {"g_coefficient", r.g_coefficient},
                   {"term", r.term}, {"limit", r.limit}});
  }
  os << arr.dump(2) << '\n';
}

void write_verify_report(std::ostream& os, const std::vector<VerifyCheck>& checks) {
  for (const auto& c : checks) {
    char metric[32];
    char tol[32];
    std::snprintf(metric, sizeof metric, "%.3g", c.metric);
    std::snprintf(tol, sizeof tol, "%.3g", c.tolerance);
    os << (c.passed ? "PASS " : "FAIL ") << c.name << " metric=" << metric << " tol=" << tol << " "
       << c.detail << '\n';
  }
}

}  // namespace ratiomom::harness
