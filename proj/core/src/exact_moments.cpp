#include "ratiomom/exact_moments.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "ratiomom/errors.hpp"

namespace ratiomom {

std::string to_string(Method m) {
  switch (m) {
    case Method::Quadrature: return "quadrature";
    case Method::MonteCarlo: return "monte-carlo";
    case Method::Asymptote: return "asymptote";
  }
  return "unknown";
}

}  // namespace ratiomom

namespace ratiomom::exact {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

int sum_of(const std::vector<int>& parts) {
  int k = 0;
  for (int p : parts) k += p;
  return k;
}

std::string parts_text(const std::vector<int>& parts) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < parts.size(); ++i) os << (i ? "," : "") << parts[i];
  os << ")";
  return os.str();
}

void check_k(int k) {
  if (k < 1) throw DomainError("moment_tk: k must be >= 1");
  if (k > combinatorics::kMaxOrder) throw DomainError("moment_tk: k above supported maximum of 30");
}

struct TableEntry {
  std::vector<int> parts;
  double orderings;
  double weight;
};

std::vector<TableEntry> build_table(int k) {
  std::vector<TableEntry> out;
  const double log_k = numerics::log_gamma(k + 1.0);
  const double log_den = numerics::log_gamma(2.0 * k);
  for (int r = 1; r <= k; ++r) {
    for (auto& p : combinatorics::partitions(k, r)) {
      double w = log_k - log_den - numerics::log_gamma(r + 1.0);
      for (int part : p) w -= numerics::log_gamma(part + 1.0);
      const double n = combinatorics::ordering_count(p);
      out.push_back({std::move(p), n, std::exp(w)});
    }
  }
  return out;
}

template <class BtFn>
MomentEstimate assemble(double t, int k, const std::vector<TableEntry>& table, BtFn&& bt) {
  MomentEstimate est;
  est.method = Method::Quadrature;
  est.t = t;
  est.k = k;
  if (t == 0.0) return est;
  numerics::CompensatedSum value;
  double err = 0.0;
  for (const auto& e : table) {
    numerics::QuadratureResult r;
    try {
      r = bt(e.parts);
    } catch (const ConvergenceError& ex) {
      const double partial = value.value() + e.orderings * e.weight * ex.partial_value();
      throw ConvergenceError("moment_tk: B_t" + parts_text(e.parts) + " did not converge: " + ex.what(),
                             partial, err + e.orderings * e.weight * ex.partial_err());
    }
    PartContribution pc;
    pc.parts = e.parts;
    pc.orderings = e.orderings;
    pc.weight = e.weight;
    pc.bt = r.value;
    pc.bt_err = r.err_est;
    pc.contribution = e.orderings * e.weight * r.value;
    value.add(pc.contribution);
    err += e.orderings * e.weight * r.err_est;
    est.diagnostics.push_back(std::move(pc));
  }
  est.value = value.value();
  est.err_est = err;
  return est;
}

}  // namespace

double bt_log_integrand(const SeverityModel& sev, const MixingModel& mix, double t,
                        const std::vector<int>& parts, double s) {
  if (!(s > 0.0)) return kNegInf;
  const int k = sum_of(parts);
  const int r = static_cast<int>(parts.size());
  double v = (2.0 * k - 1.0) * std::log(s) + r * std::log(t);
  for (int p : parts) v += severity::log_abs_laplace_deriv(sev, 2 * p, s);
  v += mixing::log_q_r(mix, r, t * severity::one_minus_laplace(sev, s));
  return std::isnan(v) ? kNegInf : v;
}

numerics::QuadratureResult bt_integral(const SeverityModel& sev, const MixingModel& mix, double t,
                                       const std::vector<int>& parts,
                                       const numerics::QuadratureConfig& cfg) {
  if (parts.empty()) throw DomainError("bt_integral: empty composition");
  if (!(t >= 0.0)) throw DomainError("bt_integral: t must be >= 0");
  if (t == 0.0) return {};
  // u = ln s; the Jacobian e^u adds one power of s.
  const auto g = [&](double u) {
    return std::exp(bt_log_integrand(sev, mix, t, parts, std::exp(u)) + u);
  };
  return numerics::integrate_real_line(g, cfg);
}

numerics::QuadratureResult bt_integral(const SeverityModel& sev, const MixingModel& mix, double t,
                                       const combinatorics::Composition& c,
                                       const numerics::QuadratureConfig& cfg) {
  return bt_integral(sev, mix, t, c.parts, cfg);
}

MomentEstimate moment_tk(const SeverityModel& sev, const MixingModel& mix, double t, int k,
                         const numerics::QuadratureConfig& cfg) {
  check_k(k);
  if (!(t >= 0.0)) throw DomainError("moment_tk: t must be >= 0");
  return assemble(t, k, build_table(k),
                  [&](const std::vector<int>& p) { return bt_integral(sev, mix, t, p, cfg); });
}

double substituted_integrand(const SeverityModel& sev, const MixingModel& mix, double t,
                             const combinatorics::Composition& c, double w) {
  if (!(t > 0.0)) throw DomainError("substituted_integrand: t must be > 0");
  if (!(w >= 0.0)) throw DomainError("substituted_integrand: w must be >= 0");
  if (w >= t || w == 0.0) return 0.0;
  const double s = severity::psi(sev, w / t);
  double v = (c.r - 1.0) * std::log(t) + (2.0 * c.k - 1.0) * std::log(s);
  for (int p : c.parts) v += severity::log_abs_laplace_deriv(sev, 2 * p, s);
  v += mixing::log_q_r(mix, c.r, w) - severity::log_abs_laplace_deriv(sev, 1, s);
  return std::exp(v);
}

numerics::QuadratureResult substituted_integral(const SeverityModel& sev, const MixingModel& mix,
                                                double t, const combinatorics::Composition& c,
                                                const numerics::QuadratureConfig& cfg) {
  if (!(t > 0.0)) throw DomainError("substituted_integral: t must be > 0");
  // w = t v with logistic v(u) in (0, 1); dw = t v (1 - v) du.
  const auto g = [&](double u) {
    const double v = u >= 0.0 ? 1.0 / (1.0 + std::exp(-u)) : std::exp(u) / (1.0 + std::exp(u));
    const double one_minus_v = u >= 0.0 ? std::exp(-u) / (1.0 + std::exp(-u)) : 1.0 / (1.0 + std::exp(u));
    if (v <= 0.0 || one_minus_v <= 0.0) return 0.0;
    return substituted_integrand(sev, mix, t, c, t * v) * t * v * one_minus_v;
  };
  auto local = cfg;
  local.log_scan_min = std::max(cfg.log_scan_min, -60.0);
  local.log_scan_max = std::min(cfg.log_scan_max, 36.0);
  return numerics::integrate_real_line(g, local);
}

MomentEvaluator::MomentEvaluator(SeverityModel sev, MixingModel mix, numerics::QuadratureConfig cfg)
    : sev_(std::move(sev)), mix_(std::move(mix)), cfg_(cfg) {
  cfg_.validate();
}

const std::vector<MomentEvaluator::Entry>& MomentEvaluator::table(int k) {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = tables_.find(k);
  if (it == tables_.end()) {
    std::vector<Entry> entries;
    for (auto& e : build_table(k)) entries.push_back({std::move(e.parts), e.orderings, e.weight});
    it = tables_.emplace(k, std::move(entries)).first;
  }
  return it->second;
}

numerics::QuadratureResult MomentEvaluator::bt(double t, const std::vector<int>& parts) {
  const auto key = std::make_pair(t, parts);
  {
    std::lock_guard<std::mutex> lock(mu_);
    if (auto it = bt_cache_.find(key); it != bt_cache_.end()) return it->second;
  }
  const auto r = bt_integral(sev_, mix_, t, parts, cfg_);
  std::lock_guard<std::mutex> lock(mu_);
  bt_cache_.emplace(key, r);
  return r;
}

MomentEstimate MomentEvaluator::moment(double t, int k) {
  check_k(k);
  if (!(t >= 0.0)) throw DomainError("moment_tk: t must be >= 0");
  std::vector<TableEntry> tab;
  for (const auto& e : table(k)) tab.push_back({e.parts, e.orderings, e.weight});
  return assemble(t, k, tab, [&](const std::vector<int>& p) { return bt(t, p); });
}

}  // namespace ratiomom::exact
