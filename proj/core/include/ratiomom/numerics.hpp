#pragma once

#include <functional>
#include <string>

namespace ratiomom::numerics {

/// Controls for integrate_semi_infinite.
///
/// The integrand is mapped onto the real line through a logarithmic change of
/// variable and located by a coarse scan over [log_scan_min, log_scan_max];
/// tails beyond the significant region are marched with geometrically growing
/// panels until the extrapolated remainder drops below
/// tail_cutoff_factor * rel_tol * |value|.
struct QuadratureConfig {
  double rel_tol = 1e-8;
  double abs_tol = 1e-14;
  int max_subdivisions = 2000;
  double tail_cutoff_factor = 1e-2;
  double log_scan_min = -200.0;
  double log_scan_max = 200.0;

  void validate() const;
};

struct QuadratureResult {
  double value = 0.0;
  double err_est = 0.0;
  int evaluations = 0;
  int subdivisions = 0;
};

using Integrand = std::function<double(double)>;

double log_gamma(double x);
double beta_fn(double a, double b);

struct IncompleteGamma {
  double value;
  bool saturated;  // true when the result overflowed double range
};

/// Γ(s, x) = ∫_x^∞ u^{s-1} e^{-u} du for any real s and x > 0.
///
/// Negative shapes are reached from a shift s + m in (0, 1] (or from
/// Γ(0, x) = E_1(x) when s is a non-positive integer) through
/// Γ(a, x) = (Γ(a+1, x) - x^a e^{-x}) / a.
IncompleteGamma upper_incomplete_gamma(double s, double x);

/// ln Γ(a, x) for a > 0, x >= 0.
double log_upper_gamma(double a, double x);

/// Generalized exponential integral E_p(z) = ∫_1^∞ e^{-zy} y^{-p} dy,
/// real p, z > 0 (z = 0 allowed when p > 1).
double expint_e(double p, double z);

/// ln E_p(z). Stays finite where E_p itself would overflow.
double log_expint_e(double p, double z);

/// ∫_a^∞ f(x) dx. f must be finite and eventually decaying.
/// Throws ConvergenceError (with the partial value) when max_subdivisions is hit.
QuadratureResult integrate_semi_infinite(const Integrand& f, double a,
                                         const QuadratureConfig& cfg = {});

/// ∫_{-∞}^{∞} g(u) du for g decaying at both ends. The engine behind
/// integrate_semi_infinite; exposed for integrands already in log variables.
QuadratureResult integrate_real_line(const Integrand& g, const QuadratureConfig& cfg = {});

/// Solves g(x) = target on (0, ∞) for strictly monotone g. The bracket is
/// grown geometrically from bracket_seed, then bisected to full precision.
double find_root_monotone(const std::function<double(double)>& g, double target,
                          double bracket_seed);

/// Running sum with Neumaier compensation.
class CompensatedSum {
 public:
  void add(double x) noexcept;
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

enum class SlowVaryKind { Constant, LogPower, PiecewiseFromTail };
enum class LimitClass { Vanishes, Converges, Diverges };

/// The slowly varying factor ℓ of a Pareto-type tail 1 - F(x) ~ x^{-α} ℓ(x).
///
/// Below the support threshold ℓ is taken as x^α (1 - F(x)); the catalog is
/// closed so that limit_class is always known exactly.
struct SlowVaryModel {
  SlowVaryKind kind = SlowVaryKind::Constant;
  double constant = 1.0;   // C
  double log_power = 0.0;  // β of C (log x)^β; zero for Constant
  LimitClass limit_class = LimitClass::Converges;

  static SlowVaryModel constant_limit(double c);
  static SlowVaryModel log_power_law(double c, double beta);

  /// lim ℓ(x) when limit_class is Converges, 0 or +∞ otherwise.
  double limit() const;
  void validate() const;
};

std::string to_string(LimitClass c);

}  // namespace ratiomom::numerics
