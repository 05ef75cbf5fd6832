#include "ratiomom/mixing.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "ratiomom/errors.hpp"
#include "ratiomom/numerics.hpp"

namespace ratiomom::mixing {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kBoundaryBand = 1e-6;

void check_rw(int r, double w) {
  if (r < 0) throw DomainError("q_r: r must be >= 0");
  if (!(w >= 0.0)) throw DomainError("q_r: w must be >= 0");
}

Condition evaluate(const MixingModel& m, double exponent, int direction) {
  Condition c{exponent, direction, 0.0, kInf, Verdict::Violated};
  if (m.kind() == Kind::Degenerate) {
    c.epsilon = 1.0;
    c.moment = lambda_moment(m, exponent + direction * c.epsilon);
    c.verdict = Verdict::Satisfied;
    return c;
  }
  // Gamma: E{Λ^q} < ∞ iff q > -a.
  const double gap = exponent + m.shape();
  if (direction > 0) {
    c.epsilon = gap > -1.0 ? 1.0 : 1.0 - gap;
  } else {
    if (gap <= 0.0) return c;
    c.epsilon = 0.5 * gap;
  }
  c.moment = lambda_moment(m, exponent + direction * c.epsilon);
  c.verdict = (direction < 0 && gap < kBoundaryBand) ? Verdict::Boundary : Verdict::Satisfied;
  return c;
}

}  // namespace

MixingModel MixingModel::degenerate(double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("MixingModel: lambda must be > 0");
  return MixingModel(Kind::Degenerate, lambda, 0.0);
}

MixingModel MixingModel::gamma(double shape, double rate) {
  if (!(shape > 0.0) || !std::isfinite(shape)) throw DomainError("MixingModel: gamma shape must be > 0");
  if (!(rate > 0.0) || !std::isfinite(rate)) throw DomainError("MixingModel: gamma rate must be > 0");
  return MixingModel(Kind::Gamma, shape, rate);
}

double MixingModel::mean() const noexcept { return kind_ == Kind::Degenerate ? p1_ : p1_ / p2_; }

std::string MixingModel::describe() const {
  std::ostringstream os;
  os.precision(17);
  if (kind_ == Kind::Degenerate) {
    os << "degenerate(lambda=" << p1_ << ")";
  } else {
    os << "gamma(shape=" << p1_ << " rate=" << p2_ << ")";
  }
  return os.str();
}

double log_q_r(const MixingModel& m, int r, double w) {
  check_rw(r, w);
  if (m.kind() == Kind::Degenerate) return r * std::log(m.lambda()) - w * m.lambda();
  const double a = m.shape();
  const double b = m.rate();
  return a * std::log(b) + numerics::log_gamma(a + r) - numerics::log_gamma(a) -
         (a + r) * std::log(b + w);
}

double q_r(const MixingModel& m, int r, double w) { return std::exp(log_q_r(m, r, w)); }

double lambda_moment(const MixingModel& m, double p) {
  if (std::isnan(p)) throw DomainError("lambda_moment: p is NaN");
  if (m.kind() == Kind::Degenerate) return std::pow(m.lambda(), p);
  const double a = m.shape();
  if (!(p > -a)) return kInf;
  return std::exp(numerics::log_gamma(a + p) - numerics::log_gamma(a) - p * std::log(m.rate()));
}

double pgf_deriv(const MixingModel& m, int r, double t, double z) {
  if (!(t > 0.0)) throw DomainError("pgf_deriv: t must be > 0");
  if (!(z >= 0.0 && z <= 1.0)) throw DomainError("pgf_deriv: z must lie in [0, 1]");
  return std::exp(r * std::log(t) + log_q_r(m, r, t * (1.0 - z)));
}

double log_count_pmf(const MixingModel& m, std::int64_t n, double t) {
  if (n < 0) throw DomainError("count_pmf: n must be >= 0");
  if (!(t > 0.0)) throw DomainError("count_pmf: t must be > 0");
  const double dn = static_cast<double>(n);
  if (m.kind() == Kind::Degenerate) {
    const double mu = m.lambda() * t;
    return dn * std::log(mu) - mu - numerics::log_gamma(dn + 1.0);
  }
  const double a = m.shape();
  const double b = m.rate();
  return numerics::log_gamma(a + dn) - numerics::log_gamma(a) - numerics::log_gamma(dn + 1.0) +
         a * std::log(b / (b + t)) + dn * std::log(t / (b + t));
}

double count_pmf(const MixingModel& m, std::int64_t n, double t) {
  return std::exp(log_count_pmf(m, n, t));
}

std::int64_t sample_poisson(double mean, Rng& rng) {
  if (!(mean >= 0.0) || !std::isfinite(mean)) throw DomainError("sample_poisson: mean must be finite and >= 0");
  if (mean == 0.0) return 0;
  if (mean <= 30.0) {
    double p = std::exp(-mean);
    double cdf = p;
    const double u = uniform01(rng);
    std::int64_t n = 0;
    while (u >= cdf) {
      ++n;
      p *= mean / static_cast<double>(n);
      cdf += p;
      if (p < 1e-300 && cdf < u) break;  // rounding left the cdf short of u
    }
    return n;
  }
  std::poisson_distribution<std::int64_t> pois(mean);
  return pois(rng);
}

CountDraw sample_count(const MixingModel& m, double t, Rng& rng) {
  if (!(t > 0.0)) throw DomainError("sample_count: t must be > 0");
  double lam = m.lambda();
  if (m.kind() == Kind::Gamma) {
    std::gamma_distribution<double> g(m.shape(), 1.0 / m.rate());
    do {
      lam = g(rng);
    } while (!(lam > 0.0));
  }
  return {sample_poisson(lam * t, rng), lam};
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Satisfied: return "satisfied";
    case Verdict::Violated: return "violated";
    case Verdict::Boundary: return "boundary";
  }
  return "unknown";
}

std::string Condition::statement() const {
  std::ostringstream os;
  os.precision(6);
  os << "E{L^(" << exponent << (direction > 0 ? "+" : "-") << "eps)}<inf";
  return os.str();
}

Verdict HypothesisReport::overall() const {
  Verdict v = Verdict::Satisfied;
  for (const auto& c : conditions) {
    if (c.verdict == Verdict::Violated) return Verdict::Violated;
    if (c.verdict == Verdict::Boundary) v = Verdict::Boundary;
  }
  return v;
}

std::string HypothesisReport::summary() const {
  std::ostringstream os;
  os << to_string(overall());
  for (const auto& c : conditions) {
    if (c.verdict != Verdict::Satisfied) os << " [" << c.statement() << " " << to_string(c.verdict) << "]";
  }
  return os.str();
}

HypothesisReport validate_hypotheses(const MixingModel& m, const Regime& regime, int k, double alpha) {
  if (k < 1) throw DomainError("validate_hypotheses: k must be >= 1");
  HypothesisReport rep{regime, k, alpha, {}};
  auto need = [&](double exponent, int direction) {
    rep.conditions.push_back(evaluate(m, exponent, direction));
  };
  switch (regime.tag) {
    case RegimeTag::Alpha01:
    case RegimeTag::Alpha1Mu1Inf:
      need(0.0, +1);
      need(0.0, -1);
      break;
    case RegimeTag::Alpha1to2Mu1Fin:
      need(0.0, +1);
      need(-k * (alpha - 1.0), -1);
      break;
    case RegimeTag::Alpha2K1Mu2Fin:
    case RegimeTag::Alpha2K1Mu2Inf:
    case RegimeTag::Alpha2Kge2:
    case RegimeTag::AlphaGt2KltBoundary:
    case RegimeTag::AlphaGt2KgtBoundary:
    case RegimeTag::AlphaGt2KeqBoundary:
      if (k == 1) {
        need(-1.0, -1);
      } else {
        need(k - 2.0, +1);
        need(1.0 - 2.0 * k, -1);
      }
      break;
  }
  return rep;
}

}  // namespace ratiomom::mixing
