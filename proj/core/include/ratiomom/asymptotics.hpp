#pragma once

#include <string>
#include <vector>

#include "ratiomom/mixing.hpp"
#include "ratiomom/regime.hpp"
#include "ratiomom/severity.hpp"

namespace ratiomom::asymptotics {

using severity::SeverityModel;
using mixing::MixingModel;

/// α values closer than this to an integer are treated as that integer.
inline constexpr double kIntegerSnap = 1e-12;
/// α values this close to an integer (but not snapped) carry a warning.
inline constexpr double kProximityWarn = 1e-6;

/// Asymptotic case for E{T^k} given the severity (α taken from `sev`).
Regime classify(const SeverityModel& sev, int k);
/// Same, with α supplied explicitly; must match sev.alpha() up to snapping.
Regime classify(double alpha, int k, const SeverityModel& sev);

/// lim E{T^k} for α in (0, 1).
double limit_alpha01(double alpha, int k);

struct LimitTerm {
  int r;
  double g_coefficient;
  double term;  // k!/(2k-1)! α^{r-1} G(r,k) / (r Γ(1-α)^r)
};
std::vector<LimitTerm> limit_alpha01_terms(double alpha, int k);

/// The exact root of a / ℓ̃(a) = t for an α = 1 severity.
double solve_a_t(const SeverityModel& sev, double t);

enum class SvKind { None, Ell, EllTilde, RatioAtAt };
std::string to_string(SvKind k);

/// E{T^k} ~ constant · t^{t_power} · sv(t), evaluated at one t.
struct AsymptoticLaw {
  Regime regime;
  double constant = 0.0;
  double t_power = 0.0;
  SvKind sv_kind = SvKind::None;
  double t = 0.0;
  double sv_value = 1.0;
  double value = 0.0;
};

/// Throws HypothesisError if a mixing moment the law needs is infinite.
AsymptoticLaw asymptote(const SeverityModel& sev, const MixingModel& mix, int k,
                        const Regime& regime, double t);
AsymptoticLaw asymptote(const SeverityModel& sev, const MixingModel& mix, int k, double t);

/// α/μ1^α B(2k-α, α) E{Λ^{1-α}}: the constant shared by the α in (1,2)
/// law and the α > 2, k > α-1 law.
double heavy_term_constant(const SeverityModel& sev, const MixingModel& mix, int k);

}  // namespace ratiomom::asymptotics
