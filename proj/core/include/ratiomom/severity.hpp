#pragma once

#include <string>

#include "ratiomom/numerics.hpp"
#include "ratiomom/rng.hpp"

namespace ratiomom::severity {

enum class Family {
  StrictPareto,  // 1 - F(x) = (x / x0)^{-α}, x >= x0
  LogPareto,     // 1 - F(x) = (x / x0)^{-α} (ln x / ln x0)^β, x >= x0
};

/// A positive Pareto-type severity with tail index α and slowly varying
/// factor ℓ(x) = x^α (1 - F(x)). Immutable value type.
class SeverityModel {
 public:
  static SeverityModel strict_pareto(double alpha, double x0 = 1.0);

  /// Log-perturbed Pareto. x0 defaults to the smallest threshold that keeps
  /// the tail non-increasing: max(e, exp(β/α)).
  static SeverityModel log_pareto(double alpha, double log_power, double x0 = 0.0);

  Family family() const noexcept { return family_; }
  double alpha() const noexcept { return alpha_; }
  double x0() const noexcept { return x0_; }
  double log_power() const noexcept { return log_power_; }
  const numerics::SlowVaryModel& tail_sv() const noexcept { return tail_sv_; }

  std::string describe() const;

 private:
  SeverityModel(Family f, double alpha, double x0, double log_power);

  Family family_;
  double alpha_;
  double x0_;
  double log_power_;
  numerics::SlowVaryModel tail_sv_;
};

/// μ_β = E{X^β}; `infinite` set when the defining integral diverges.
struct MomentValue {
  double value;
  double order;
  bool infinite;
  bool at_boundary;  // β == α: finiteness decided by ℓ alone

  bool finite() const noexcept { return !infinite; }
};

double tail(const SeverityModel& m, double x);
double log_density(const SeverityModel& m, double x);

MomentValue moment(const SeverityModel& m, double beta);

/// μ_β from β ∫_0^∞ x^{β-1} (1 - F(x)) dx by quadrature. Independent of the
/// closed forms used by moment(); only meaningful for finite moments.
numerics::QuadratureResult moment_by_quadrature(const SeverityModel& m, double beta,
                                                const numerics::QuadratureConfig& cfg = {});

/// φ(s) = E{e^{-sX}}.
double laplace(const SeverityModel& m, double s);

/// 1 - φ(s), evaluated without cancellation near s = 0.
double one_minus_laplace(const SeverityModel& m, double s);

/// φ^{(n)}(s), n >= 1. Sign is (-1)^n.
double laplace_deriv(const SeverityModel& m, int n, double s);

/// ln((-1)^n φ^{(n)}(s)) for n >= 0, s > 0. Finite where φ^{(n)} overflows.
double log_abs_laplace_deriv(const SeverityModel& m, int n, double s);

/// (-1)^n φ^{(n)}(s) = ∫ x^n e^{-sx} dF(x) by direct quadrature over the density.
numerics::QuadratureResult abs_laplace_deriv_by_quadrature(const SeverityModel& m, int n, double s,
                                                           const numerics::QuadratureConfig& cfg = {});

/// ψ(u) = φ^{-1}(1 - u), 0 < u < 1.
double psi(const SeverityModel& m, double u);

/// ℓ(x) = x^α (1 - F(x)).
double ell(const SeverityModel& m, double x);

/// ℓ̃(x) = ∫_0^x ℓ(u)/u du.
double ell_tilde(const SeverityModel& m, double x);

/// Inverse-CDF draw from F.
double sample(const SeverityModel& m, Rng& rng);

/// Inverse of the tail: the x with 1 - F(x) = u, u in (0, 1].
double tail_quantile(const SeverityModel& m, double u);

}  // namespace ratiomom::severity
