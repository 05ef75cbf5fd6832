#include "ratiomom/severity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "ratiomom/errors.hpp"

namespace ratiomom::severity {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Inner quadratures feed outer ones; keep them well below the outer tolerance.
numerics::QuadratureConfig inner_config() {
  numerics::QuadratureConfig cfg;
  cfg.rel_tol = 1e-12;
  cfg.abs_tol = 0.0;
  cfg.max_subdivisions = 4000;
  cfg.log_scan_min = -30.0;
  cfg.log_scan_max = 7.0;
  return cfg;
}

// Inner integral; a result that stalls just short of inner_config's
// tolerance is still far below any outer one and is accepted.
numerics::QuadratureResult inner_integral(const numerics::Integrand& f,
                                          const numerics::QuadratureConfig& cfg) {
  try {
    return numerics::integrate_semi_infinite(f, 0.0, cfg);
  } catch (const ConvergenceError& e) {
    if (!(std::fabs(e.partial_err()) <= 1e-10 * std::fabs(e.partial_value()))) throw;
    numerics::QuadratureResult r;
    r.value = e.partial_value();
    r.err_est = e.partial_err();
    r.subdivisions = cfg.max_subdivisions;
    return r;
  }
}

double log_tail(const SeverityModel& m, double log_x) {
  const double y0 = std::log(m.x0());
  if (log_x <= y0) return 0.0;
  double v = -m.alpha() * (log_x - y0);
  if (m.family() == Family::LogPareto) v += m.log_power() * (std::log(log_x) - std::log(y0));
  return v;
}

// ln f(x) for x = exp(log_x) >= x0.
double log_density_at(const SeverityModel& m, double log_x) {
  const double a = m.alpha();
  const double y0 = std::log(m.x0());
  if (log_x < y0) return -kInf;
  if (m.family() == Family::StrictPareto) return std::log(a) + a * y0 - (a + 1.0) * log_x;
  const double g = m.log_power();
  const double log_c = a * y0 - g * std::log(y0);
  const double shape = a * log_x - g;
  if (shape <= 0.0) return -kInf;
  return log_c - (a + 1.0) * log_x + (g - 1.0) * std::log(log_x) + std::log(shape);
}

// ∫_{x0}^∞ e^{-sx} (1 - F(x)) dx for the log-perturbed family.
double log_pareto_tail_laplace(const SeverityModel& m, double s) {
  const double y0 = std::log(m.x0());
  const auto f = [&](double v) {
    const double lx = y0 + v;
    return std::exp(-s * std::exp(lx) + log_tail(m, lx) + lx);
  };
  return inner_integral(f, inner_config()).value;
}

// ln ∫ x^n e^{-sx} dF(x). The exponent is taken relative to x0 (expm1 keeps
// the s·x term exact for large s) and the integrand is scaled by its value
// near the peak so that s^{α-n}-sized results do not overflow.
double log_pareto_log_abs_deriv(const SeverityModel& m, int n, double s,
                                const numerics::QuadratureConfig& cfg, bool lenient,
                                double* err = nullptr) {
  const double y0 = std::log(m.x0());
  const double sx0 = s * m.x0();
  const double ld0 = log_density_at(m, y0);
  const double base = (n + 1.0) * y0 - sx0 + ld0;
  const auto d = [&](double v) {
    return (n + 1.0) * v - sx0 * std::expm1(v) + log_density_at(m, y0 + v) - ld0;
  };
  const double peak = std::max(0.0, std::log(std::max(n - m.alpha(), 0.5) / s) - y0);
  const double shift = d(peak);
  const auto f = [&](double v) { return std::exp(d(v) - shift); };
  const auto r = lenient ? inner_integral(f, cfg) : numerics::integrate_semi_infinite(f, 0.0, cfg);
  if (err != nullptr) *err = r.err_est * std::exp(shift + base);
  return std::log(r.value) + shift + base;
}

}  // namespace

SeverityModel::SeverityModel(Family f, double alpha, double x0, double log_power)
    : family_(f), alpha_(alpha), x0_(x0), log_power_(log_power) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw DomainError("SeverityModel: alpha must be > 0");
  if (!(x0 > 0.0) || !std::isfinite(x0)) throw DomainError("SeverityModel: x0 must be > 0");
  if (f == Family::StrictPareto) {
    tail_sv_ = numerics::SlowVaryModel::constant_limit(std::pow(x0, alpha));
  } else {
    const double y0 = std::log(x0);
    tail_sv_ = numerics::SlowVaryModel::log_power_law(std::exp(alpha * y0 - log_power * std::log(y0)),
                                                      log_power);
  }
}

SeverityModel SeverityModel::strict_pareto(double alpha, double x0) {
  return SeverityModel(Family::StrictPareto, alpha, x0, 0.0);
}

SeverityModel SeverityModel::log_pareto(double alpha, double log_power, double x0) {
  if (!(alpha > 0.0)) throw DomainError("SeverityModel: alpha must be > 0");
  if (!std::isfinite(log_power)) throw DomainError("SeverityModel: log_power must be finite");
  const double min_x0 = std::max(std::exp(1.0), std::exp(log_power / alpha));
  if (x0 == 0.0) x0 = min_x0;
  if (x0 < min_x0 * (1.0 - 1e-12)) {
    std::ostringstream os;
    os << "SeverityModel: log-Pareto threshold x0 must be >= max(e, exp(beta/alpha)) = " << min_x0;
    throw DomainError(os.str());
  }
  return SeverityModel(Family::LogPareto, alpha, x0, log_power);
}

std::string SeverityModel::describe() const {
  std::ostringstream os;
  os.precision(17);
  if (family_ == Family::StrictPareto) {
    os << "strict-pareto(alpha=" << alpha_ << " x0=" << x0_ << ")";
  } else {
    os << "log-pareto(alpha=" << alpha_ << " x0=" << x0_ << " log_power=" << log_power_ << ")";
  }
  return os.str();
}

double tail(const SeverityModel& m, double x) {
  if (!(x > 0.0)) return 1.0;
  if (x <= m.x0()) return 1.0;
  return std::exp(log_tail(m, std::log(x)));
}

double log_density(const SeverityModel& m, double x) {
  if (!(x > 0.0)) return -kInf;
  return log_density_at(m, std::log(x));
}

MomentValue moment(const SeverityModel& m, double beta) {
  if (!(beta > 0.0)) throw DomainError("moment: order must be > 0");
  const double a = m.alpha();
  const double x0 = m.x0();
  const bool boundary = beta == a;
  if (beta > a) return {kInf, beta, true, false};
  if (m.family() == Family::StrictPareto) {
    if (boundary) return {kInf, beta, true, true};
    return {a * std::pow(x0, beta) / (a - beta), beta, false, false};
  }
  const double g = m.log_power();
  const double y0 = std::log(x0);
  const double c_sv = m.tail_sv().constant;
  if (boundary) {
    if (g < -1.0) {
      return {std::pow(x0, beta) + beta * c_sv * std::pow(y0, g + 1.0) / (-g - 1.0), beta, false, true};
    }
    return {kInf, beta, true, true};
  }
  const double c = a - beta;
  const auto ig = numerics::upper_incomplete_gamma(g + 1.0, c * y0);
  if (ig.saturated) return {kInf, beta, true, false};
  return {std::pow(x0, beta) + beta * c_sv * std::pow(c, -g - 1.0) * ig.value, beta, false, false};
}

numerics::QuadratureResult moment_by_quadrature(const SeverityModel& m, double beta,
                                                const numerics::QuadratureConfig& cfg) {
  if (!(beta > 0.0)) throw DomainError("moment_by_quadrature: order must be > 0");
  const double y0 = std::log(m.x0());
  const double a = m.alpha();
  const double g = m.log_power();
  // Grouped so that β = α does not cancel two huge terms far out.
  const auto f = [&](double v) {
    double e = beta * y0 + (beta - a) * v;
    if (m.family() == Family::LogPareto) e += g * std::log1p(v / y0);
    return std::exp(e);
  };
  auto r = numerics::integrate_semi_infinite(f, 0.0, cfg);
  r.value = std::pow(m.x0(), beta) + beta * r.value;
  r.err_est *= beta;
  return r;
}

double one_minus_laplace(const SeverityModel& m, double s) {
  if (s < 0.0 || std::isnan(s)) throw DomainError("laplace: s must be >= 0");
  if (s == 0.0) return 0.0;
  if (std::isinf(s)) return 1.0;
  const double z = s * m.x0();
  const double head = -std::expm1(-z);
  if (m.family() == Family::StrictPareto) {
    return head + std::exp(std::log(z) + numerics::log_expint_e(m.alpha(), z));
  }
  return head + s * log_pareto_tail_laplace(m, s);
}

double laplace(const SeverityModel& m, double s) {
  if (s < 0.0 || std::isnan(s)) throw DomainError("laplace: s must be >= 0");
  if (s == 0.0) return 1.0;
  return std::exp(log_abs_laplace_deriv(m, 0, s));
}

double log_abs_laplace_deriv(const SeverityModel& m, int n, double s) {
  if (n < 0) throw DomainError("laplace_deriv: order must be >= 0");
  if (s < 0.0 || std::isnan(s)) throw DomainError("laplace_deriv: s must be >= 0");
  if (s == 0.0) {
    if (n == 0) return 0.0;
    const auto mu = moment(m, n);
    if (mu.infinite) throw DomainError("laplace_deriv: derivative is infinite at s = 0 for n >= alpha");
    return std::log(mu.value);
  }
  if (m.family() == Family::StrictPareto) {
    const double a = m.alpha();
    const double z = s * m.x0();
    return std::log(a) + n * std::log(m.x0()) + numerics::log_expint_e(a - n + 1.0, z);
  }
  return log_pareto_log_abs_deriv(m, n, s, inner_config(), true);
}

double laplace_deriv(const SeverityModel& m, int n, double s) {
  if (n < 1) throw DomainError("laplace_deriv: order must be >= 1");
  const double mag = std::exp(log_abs_laplace_deriv(m, n, s));
  return (n % 2 == 0) ? mag : -mag;
}

numerics::QuadratureResult abs_laplace_deriv_by_quadrature(const SeverityModel& m, int n, double s,
                                                           const numerics::QuadratureConfig& cfg) {
  if (n < 0) throw DomainError("laplace_deriv: order must be >= 0");
  if (!(s > 0.0)) throw DomainError("laplace_deriv quadrature: s must be > 0");
  numerics::QuadratureResult r;
  r.value = std::exp(log_pareto_log_abs_deriv(m, n, s, cfg, false, &r.err_est));
  return r;
}

double psi(const SeverityModel& m, double u) {
  if (!(u > 0.0 && u < 1.0)) throw DomainError("psi: argument must lie in (0, 1)");
  const auto mu1 = moment(m, 1.0);
  const double seed = mu1.finite() ? u / mu1.value : u;
  return numerics::find_root_monotone([&m](double s) { return one_minus_laplace(m, s); }, u, seed);
}

double ell(const SeverityModel& m, double x) {
  if (!(x > 0.0)) throw DomainError("ell: x must be > 0");
  if (x <= m.x0()) return std::pow(x, m.alpha());
  return std::exp(m.alpha() * std::log(x) + log_tail(m, std::log(x)));
}

double ell_tilde(const SeverityModel& m, double x) {
  if (!(x > 0.0)) throw DomainError("ell_tilde: x must be > 0");
  const double a = m.alpha();
  if (x <= m.x0()) return std::pow(x, a) / a;
  const double head = std::pow(m.x0(), a) / a;
  const double c = m.tail_sv().constant;
  if (m.family() == Family::StrictPareto) return head + c * std::log(x / m.x0());
  const double g = m.log_power();
  const double y0 = std::log(m.x0());
  const double y = std::log(x);
  if (g == -1.0) return head + c * std::log(y / y0);
  return head + c * (std::pow(y, g + 1.0) - std::pow(y0, g + 1.0)) / (g + 1.0);
}

double tail_quantile(const SeverityModel& m, double u) {
  if (!(u > 0.0 && u <= 1.0)) throw DomainError("tail_quantile: u must lie in (0, 1]");
  if (u == 1.0) return m.x0();
  const double a = m.alpha();
  if (m.family() == Family::StrictPareto) return m.x0() * std::pow(u, -1.0 / a);
  const double target = -std::log(u);
  const double g = m.log_power();
  const double y0 = std::log(m.x0());
  const auto h = [&](double y) { return a * y - g * std::log1p(y / y0); };
  const double y = numerics::find_root_monotone(h, target, target / a);
  return m.x0() * std::exp(y);
}

double sample(const SeverityModel& m, Rng& rng) { return tail_quantile(m, uniform_open0(rng)); }

}  // namespace ratiomom::severity
