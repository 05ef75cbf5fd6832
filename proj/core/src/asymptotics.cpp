#include "ratiomom/asymptotics.hpp"

#include <cmath>
#include <sstream>

#include "ratiomom/combinatorics.hpp"
#include "ratiomom/errors.hpp"
#include "ratiomom/numerics.hpp"

namespace ratiomom {

std::string to_string(RegimeTag t) {
  switch (t) {
    case RegimeTag::Alpha01: return "Alpha01";
    case RegimeTag::Alpha1Mu1Inf: return "Alpha1Mu1Inf";
    case RegimeTag::Alpha1to2Mu1Fin: return "Alpha1to2Mu1Fin";
    case RegimeTag::Alpha2K1Mu2Fin: return "Alpha2K1Mu2Fin";
    case RegimeTag::Alpha2K1Mu2Inf: return "Alpha2K1Mu2Inf";
    case RegimeTag::Alpha2Kge2: return "Alpha2Kge2";
    case RegimeTag::AlphaGt2KltBoundary: return "AlphaGt2KltBoundary";
    case RegimeTag::AlphaGt2KgtBoundary: return "AlphaGt2KgtBoundary";
    case RegimeTag::AlphaGt2KeqBoundary: return "AlphaGt2KeqBoundary";
  }
  return "unknown";
}

std::string to_string(const Regime& r) {
  if (r.tag == RegimeTag::AlphaGt2KeqBoundary) {
    return to_string(r.tag) + "(" + numerics::to_string(r.sub) + ")";
  }
  return to_string(r.tag);
}

}  // namespace ratiomom

namespace ratiomom::asymptotics {

namespace {

// E{X^α} at the tail index itself; decided by ℓ alone.
bool moment_at_index_finite(const SeverityModel& sev) {
  return sev.family() == severity::Family::LogPareto && sev.log_power() < -1.0;
}

double mu(const SeverityModel& sev, double order) {
  const auto m = severity::moment(sev, order);
  if (m.infinite) {
    std::ostringstream os;
    os << "asymptote: severity moment of order " << order << " is infinite";
    throw DomainError(os.str());
  }
  return m.value;
}

double needed_lambda_moment(const MixingModel& mix, double p) {
  const double v = mixing::lambda_moment(mix, p);
  if (!std::isfinite(v)) {
    std::ostringstream os;
    os << "asymptote: requires E{L^(" << p << ")} < inf, infinite for " << mix.describe();
    throw HypothesisError(os.str());
  }
  return v;
}

}  // namespace

Regime classify(double alpha, int k, const SeverityModel& sev) {
  if (!(alpha > 0.0)) throw DomainError("classify: alpha must be > 0");
  if (k < 1) throw DomainError("classify: k must be >= 1");
  if (std::fabs(alpha - sev.alpha()) > kIntegerSnap * std::max(1.0, alpha)) {
    throw DomainError("classify: alpha does not match the severity model");
  }
  Regime reg;
  const double nearest = std::round(alpha);
  const double gap = std::fabs(alpha - nearest);
  const bool integral = nearest >= 1.0 && gap <= kIntegerSnap;
  if (nearest >= 1.0 && !integral && gap < kProximityWarn) {
    reg.near_boundary = true;
    std::ostringstream os;
    os.precision(17);
    os << "alpha=" << alpha << " is within " << kProximityWarn << " of " << nearest
       << "; strict-inequality regime used";
    reg.warning = os.str();
  }
  const double a = integral ? nearest : alpha;

  if (a < 1.0) {
    reg.tag = RegimeTag::Alpha01;
  } else if (a == 1.0) {
    reg.tag = moment_at_index_finite(sev) ? RegimeTag::Alpha1to2Mu1Fin : RegimeTag::Alpha1Mu1Inf;
  } else if (a < 2.0) {
    reg.tag = RegimeTag::Alpha1to2Mu1Fin;
  } else if (a == 2.0) {
    if (k >= 2) {
      reg.tag = RegimeTag::Alpha2Kge2;
    } else {
      reg.tag = moment_at_index_finite(sev) ? RegimeTag::Alpha2K1Mu2Fin : RegimeTag::Alpha2K1Mu2Inf;
    }
  } else {
    const double boundary = a - 1.0;
    if (integral && k == static_cast<int>(boundary)) {
      reg.tag = RegimeTag::AlphaGt2KeqBoundary;
      reg.sub = sev.tail_sv().limit_class;
    } else if (k < boundary) {
      reg.tag = RegimeTag::AlphaGt2KltBoundary;
    } else {
      reg.tag = RegimeTag::AlphaGt2KgtBoundary;
    }
  }
  return reg;
}

Regime classify(const SeverityModel& sev, int k) { return classify(sev.alpha(), k, sev); }

std::vector<LimitTerm> limit_alpha01_terms(double alpha, int k) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("limit_alpha01: alpha must lie in (0, 1)");
  if (k < 1 || k > combinatorics::kMaxOrder) throw DomainError("limit_alpha01: k must lie in [1, 30]");
  const double lg1 = numerics::log_gamma(1.0 - alpha);
  const double lead = numerics::log_gamma(k + 1.0) - numerics::log_gamma(2.0 * k);
  std::vector<LimitTerm> out;
  for (int r = 1; r <= k; ++r) {
    const double g = combinatorics::g_coefficient(r, k, alpha);
    const double term =
        std::exp(lead + (r - 1) * std::log(alpha) - std::log(static_cast<double>(r)) - r * lg1) * g;
    out.push_back({r, g, term});
  }
  return out;
}

double limit_alpha01(double alpha, int k) {
  numerics::CompensatedSum s;
  for (const auto& t : limit_alpha01_terms(alpha, k)) s.add(t.term);
  return s.value();
}

double solve_a_t(const SeverityModel& sev, double t) {
  if (std::fabs(sev.alpha() - 1.0) > kIntegerSnap) throw DomainError("solve_a_t: needs an alpha = 1 severity");
  if (moment_at_index_finite(sev)) throw DomainError("solve_a_t: needs mu_1 = infinity");
  if (!(t >= 1.0)) throw DomainError("solve_a_t: t must be >= 1");
  const auto g = [&sev](double a) { return a / severity::ell_tilde(sev, a); };
  const double seed = sev.x0() * std::max(t, std::exp(1.0)) * (1.0 + std::log(std::max(t, 1.0)));
  return numerics::find_root_monotone(g, t, seed);
}

std::string to_string(SvKind k) {
  switch (k) {
    case SvKind::None: return "none";
    case SvKind::Ell: return "ell(t)";
    case SvKind::EllTilde: return "ell_tilde(t)";
    case SvKind::RatioAtAt: return "ell(a_t)/ell_tilde(a_t)";
  }
  return "unknown";
}

double heavy_term_constant(const SeverityModel& sev, const MixingModel& mix, int k) {
  const double a = sev.alpha();
  return a / std::pow(mu(sev, 1.0), a) * numerics::beta_fn(2.0 * k - a, a) *
         needed_lambda_moment(mix, 1.0 - a);
}

AsymptoticLaw asymptote(const SeverityModel& sev, const MixingModel& mix, int k, const Regime& regime,
                        double t) {
  if (k < 1) throw DomainError("asymptote: k must be >= 1");
  if (!(t > 0.0)) throw DomainError("asymptote: t must be > 0");
  if (!(classify(sev, k) == regime)) {
    throw DomainError("asymptote: regime " + to_string(regime) + " inconsistent with severity and k");
  }
  AsymptoticLaw law;
  law.regime = regime;
  law.t = t;
  const double a = sev.alpha();
  const auto light = [&] {
    const double m1 = mu(sev, 1.0);
    return std::pow(mu(sev, 2.0) / (m1 * m1), k) * needed_lambda_moment(mix, -k);
  };

  switch (regime.tag) {
    case RegimeTag::Alpha01:
      law.constant = limit_alpha01(a, k);
      break;
    case RegimeTag::Alpha1Mu1Inf: {
      law.constant = 1.0 / (2.0 * k - 1.0);
      law.sv_kind = SvKind::RatioAtAt;
      const double at = solve_a_t(sev, std::max(t, 1.0));
      law.sv_value = severity::ell(sev, at) / severity::ell_tilde(sev, at);
      break;
    }
    case RegimeTag::Alpha1to2Mu1Fin:
    case RegimeTag::AlphaGt2KgtBoundary:
      law.constant = heavy_term_constant(sev, mix, k);
      law.t_power = 1.0 - a;
      law.sv_kind = SvKind::Ell;
      break;
    case RegimeTag::AlphaGt2KltBoundary:
      law.constant = light();
      law.t_power = -k;
      break;
    case RegimeTag::AlphaGt2KeqBoundary:
      if (regime.sub == numerics::LimitClass::Vanishes) {
        law.constant = light();
        law.t_power = -k;
      } else if (regime.sub == numerics::LimitClass::Converges) {
        const double m1 = mu(sev, 1.0);
        const double extra =
            sev.tail_sv().limit() * (k + 1.0) * numerics::beta_fn(k - 1.0, k + 1.0) / std::pow(m1, k + 1.0);
        law.constant = light() + extra * needed_lambda_moment(mix, -k);
        law.t_power = -k;
      } else {
        law.constant = heavy_term_constant(sev, mix, k);
        law.t_power = 1.0 - a;
        law.sv_kind = SvKind::Ell;
      }
      break;
    case RegimeTag::Alpha2K1Mu2Fin: {
      const double m1 = mu(sev, 1.0);
      law.constant = mu(sev, 2.0) * needed_lambda_moment(mix, -1.0) / (m1 * m1);
      law.t_power = -1.0;
      break;
    }
    case RegimeTag::Alpha2K1Mu2Inf: {
      const double m1 = mu(sev, 1.0);
      law.constant = 2.0 * needed_lambda_moment(mix, -1.0) / (m1 * m1);
      law.t_power = -1.0;
      law.sv_kind = SvKind::EllTilde;
      break;
    }
    case RegimeTag::Alpha2Kge2: {
      const double m1 = mu(sev, 1.0);
      law.constant = needed_lambda_moment(mix, -1.0) / (m1 * m1 * (k - 1.0) * (2.0 * k - 1.0));
      law.t_power = -1.0;
      law.sv_kind = SvKind::Ell;
      break;
    }
  }
  if (law.sv_kind == SvKind::Ell) law.sv_value = severity::ell(sev, t);
  if (law.sv_kind == SvKind::EllTilde) law.sv_value = severity::ell_tilde(sev, t);
  law.value = law.constant * std::pow(t, law.t_power) * law.sv_value;
  return law;
}

AsymptoticLaw asymptote(const SeverityModel& sev, const MixingModel& mix, int k, double t) {
  return asymptote(sev, mix, k, classify(sev, k), t);
}

}  // namespace ratiomom::asymptotics
