#include "ratiomom/numerics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "ratiomom/errors.hpp"

namespace ratiomom::numerics {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kTiny = 1e-300;
constexpr double kEulerGamma = 0.57721566490153286060651209008240243;
constexpr int kMaxSeriesTerms = 100000;

bool is_integer(double x) { return std::abs(x - std::nearbyint(x)) <= 1e-12 * std::max(1.0, std::abs(x)); }

// ln γ(a, x) by the power series, a > 0, x > 0.
double log_lower_gamma_series(double a, double x) {
  double ap = a;
  double del = 1.0 / a;
  double sum = del;
  for (int n = 0; n < kMaxSeriesTerms; ++n) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * kEps) break;
  }
  return -x + a * std::log(x) + std::log(sum);
}

// ln Γ(a, x) by the Legendre continued fraction (modified Lentz), valid for x > 0.
double log_upper_gamma_cf(double a, double x) {
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxSeriesTerms; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return -x + a * std::log(x) + std::log(h);
}

// E_p(z) for p >= 1, 0 < z <= 1, by series.
double expint_series(double p, double z) {
  if (is_integer(p)) {
    const int nm1 = static_cast<int>(std::nearbyint(p)) - 1;
    double ans = nm1 != 0 ? 1.0 / nm1 : -std::log(z) - kEulerGamma;
    double fact = 1.0;
    for (int i = 1; i < kMaxSeriesTerms; ++i) {
      fact *= -z / i;
      double del;
      if (i != nm1) {
        del = -fact / (i - nm1);
      } else {
        double psi = -kEulerGamma;
        for (int ii = 1; ii <= nm1; ++ii) psi += 1.0 / ii;
        del = fact * (-std::log(z) + psi);
      }
      ans += del;
      if (std::abs(del) < std::abs(ans) * kEps) break;
    }
    return ans;
  }
  // E_p(z) = z^{p-1} Γ(1-p) - Σ_k (-z)^k / (k! (1-p+k))
  double sum = 0.0;
  double term = 1.0;  // (-z)^k / k!
  for (int k = 0; k < kMaxSeriesTerms; ++k) {
    if (k > 0) term *= -z / k;
    const double del = term / (1.0 - p + k);
    sum += del;
    if (k > 2 && std::abs(del) < std::abs(sum) * kEps) break;
  }
  return std::pow(z, p - 1.0) * std::tgamma(1.0 - p) - sum;
}

// ln E_p(z) for p >= 1, z > 1, by continued fraction.
double log_expint_cf(double p, double z) {
  double b = z + p;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxSeriesTerms; ++i) {
    const double an = -i * (p - 1.0 + i);
    b += 2.0;
    d = 1.0 / (an * d + b);
    c = b + an / c;
    const double del = c * d;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return std::log(h) - z;
}

// Gauss-Kronrod 7/15 nodes and weights on [-1, 1] (QUADPACK qk15).
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a;
  double b;
  double value;
  double err;
  bool operator<(const Panel& o) const { return err < o.err; }
};

class RealLineQuadrature {
 public:
  RealLineQuadrature(const Integrand& g, const QuadratureConfig& cfg) : g_(g), cfg_(cfg) {}

  QuadratureResult run();

 private:
  double eval(double u) {
    ++evaluations_;
    const double v = g_(u);
    if (!std::isfinite(v)) {
      std::ostringstream os;
      os << "non-finite integrand value at log-variable " << u;
      throw ConvergenceError(os.str(), std::numeric_limits<double>::quiet_NaN(),
                             std::numeric_limits<double>::infinity());
    }
    return v;
  }

  Panel gk15(double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double fc = eval(c);
    double resg = fc * kWg[3];
    double resk = fc * kWgk[7];
    double resabs = std::abs(fc) * kWgk[7];
    for (int j = 0; j < 3; ++j) {
      const int jtw = 2 * j + 1;
      const double dx = h * kXgk[jtw];
      const double f1 = eval(c - dx);
      const double f2 = eval(c + dx);
      resg += kWg[j] * (f1 + f2);
      resk += kWgk[jtw] * (f1 + f2);
      resabs += kWgk[jtw] * (std::abs(f1) + std::abs(f2));
    }
    for (int j = 0; j < 4; ++j) {
      const int jtwm1 = 2 * j;
      const double dx = h * kXgk[jtwm1];
      const double f1 = eval(c - dx);
      const double f2 = eval(c + dx);
      resk += kWgk[jtwm1] * (f1 + f2);
      resabs += kWgk[jtwm1] * (std::abs(f1) + std::abs(f2));
    }
    const double err = std::max(std::abs((resk - resg) * h), 50.0 * kEps * resabs * h);
    return Panel{a, b, resk * h, err};
  }

  // Marches panels of doubling width away from `start` in direction `dir`
  // until the geometric extrapolation of the remainder is negligible.
  // Returns the extrapolated remainder.
  double march(double start, int dir, double scale, std::vector<Panel>& out);

  const Integrand& g_;
  const QuadratureConfig& cfg_;
  int evaluations_ = 0;
};

constexpr double kMarchLimit = 700.0;

double RealLineQuadrature::march(double start, int dir, double scale, std::vector<Panel>& out) {
  const double cutoff = cfg_.tail_cutoff_factor * std::max(cfg_.abs_tol, cfg_.rel_tol * scale);
  double width = 1.0;
  double pos = start;
  double prev = -1.0;
  int zero_run = 0;
  for (int step = 0; step < 200; ++step) {
    const double next = pos + dir * width;
    const Panel p = dir > 0 ? gk15(pos, next) : gk15(next, pos);
    out.push_back(p);
    pos = next;
    const double mag = std::abs(p.value) + p.err;
    zero_run = (p.value == 0.0) ? zero_run + 1 : 0;
    if (zero_run >= 2) return 0.0;
    if (prev >= 0.0 && mag <= cutoff) {
      const double rho = prev > 0.0 ? mag / prev : 0.0;
      if (rho < 0.9) {
        const double tail = mag * rho / (1.0 - rho);
        if (tail <= cutoff) return tail;
      }
    }
    if (std::abs(pos) > kMarchLimit) return mag;
    prev = mag;
    width *= 2.0;
  }
  return prev;
}

QuadratureResult RealLineQuadrature::run() {
  cfg_.validate();
  const double lo = cfg_.log_scan_min;
  const double hi = cfg_.log_scan_max;
  constexpr double kScanStep = 0.5;
  const int n_scan = static_cast<int>(std::ceil((hi - lo) / kScanStep)) + 1;
  std::vector<double> scan(static_cast<std::size_t>(n_scan));
  double peak = 0.0;
  for (int i = 0; i < n_scan; ++i) {
    scan[static_cast<std::size_t>(i)] = eval(lo + i * kScanStep);
    peak = std::max(peak, std::abs(scan[static_cast<std::size_t>(i)]));
  }
  QuadratureResult result;
  if (peak == 0.0) {
    result.evaluations = evaluations_;
    return result;
  }
  const double threshold = 1e-3 * cfg_.rel_tol * peak;
  int first = -1;
  int last = -1;
  for (int i = 0; i < n_scan; ++i) {
    if (std::abs(scan[static_cast<std::size_t>(i)]) >= threshold) {
      if (first < 0) first = i;
      last = i;
    }
  }
  const double region_lo = lo + first * kScanStep - 1.0;
  const double region_hi = lo + last * kScanStep + 1.0;
  const int n_panels = std::max(1, static_cast<int>(std::ceil(region_hi - region_lo)));
  const double width = (region_hi - region_lo) / n_panels;

  std::vector<Panel> panels;
  panels.reserve(static_cast<std::size_t>(n_panels) + 64);
  CompensatedSum region_sum;
  for (int i = 0; i < n_panels; ++i) {
    panels.push_back(gk15(region_lo + i * width, region_lo + (i + 1) * width));
    region_sum.add(std::abs(panels.back().value));
  }
  const double scale = region_sum.value();
  double tails = march(region_hi, +1, scale, panels);
  tails += march(region_lo, -1, scale, panels);

  std::make_heap(panels.begin(), panels.end());
  auto totals = [&panels]() {
    CompensatedSum v;
    CompensatedSum e;
    for (const Panel& p : panels) {
      v.add(p.value);
      e.add(p.err);
    }
    return std::pair{v.value(), e.value()};
  };

  auto [value, err] = totals();
  int subdivisions = 0;
  while (err + tails > std::max(cfg_.abs_tol, cfg_.rel_tol * std::abs(value))) {
    if (subdivisions >= cfg_.max_subdivisions) {
      std::ostringstream os;
      os << "quadrature did not converge within " << cfg_.max_subdivisions
         << " subdivisions (value " << value << ", error estimate " << err + tails << ")";
      throw ConvergenceError(os.str(), value, err + tails);
    }
    std::pop_heap(panels.begin(), panels.end());
    const Panel worst = panels.back();
    panels.pop_back();
    const double mid = 0.5 * (worst.a + worst.b);
    const Panel left = gk15(worst.a, mid);
    const Panel right = gk15(mid, worst.b);
    panels.push_back(left);
    std::push_heap(panels.begin(), panels.end());
    panels.push_back(right);
    std::push_heap(panels.begin(), panels.end());
    ++subdivisions;
    value += (left.value + right.value) - worst.value;
    err += (left.err + right.err) - worst.err;
    if (subdivisions % 64 == 0) std::tie(value, err) = totals();
  }
  std::tie(value, err) = totals();
  result.value = value;
  result.err_est = err + tails;
  result.evaluations = evaluations_;
  result.subdivisions = subdivisions;
  return result;
}

}  // namespace

void QuadratureConfig::validate() const {
  if (!(rel_tol > 0.0)) throw DomainError("QuadratureConfig: rel_tol must be > 0");
  if (!(abs_tol >= 0.0)) throw DomainError("QuadratureConfig: abs_tol must be >= 0");
  if (max_subdivisions < 1) throw DomainError("QuadratureConfig: max_subdivisions must be >= 1");
  if (!(tail_cutoff_factor > 0.0)) throw DomainError("QuadratureConfig: tail_cutoff_factor must be > 0");
  if (!(log_scan_max > log_scan_min)) throw DomainError("QuadratureConfig: empty scan range");
}

double log_gamma(double x) {
  if (!(x > 0.0)) throw DomainError("log_gamma: argument must be positive");
  int sign = 0;
  return ::lgamma_r(x, &sign);
}

double beta_fn(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) throw DomainError("beta_fn: arguments must be positive");
  return std::exp(log_gamma(a) + log_gamma(b) - log_gamma(a + b));
}

double log_upper_gamma(double a, double x) {
  if (!(a > 0.0)) throw DomainError("log_upper_gamma: shape must be positive");
  if (x < 0.0) throw DomainError("log_upper_gamma: x must be >= 0");
  if (x == 0.0) return log_gamma(a);
  if (x < a + 1.0) {
    const double log_p = log_lower_gamma_series(a, x) - log_gamma(a);
    return log_gamma(a) + std::log1p(-std::exp(log_p));
  }
  return log_upper_gamma_cf(a, x);
}

IncompleteGamma upper_incomplete_gamma(double s, double x) {
  if (x < 0.0 || std::isnan(x)) throw DomainError("upper_incomplete_gamma: x must be >= 0");
  constexpr double kInf = std::numeric_limits<double>::infinity();
  if (x == 0.0) {
    if (s > 0.0) return {std::exp(log_gamma(s)), false};
    return {kInf, true};
  }
  if (s > 0.0) {
    const double v = std::exp(log_upper_gamma(s, x));
    return {v, !std::isfinite(v)};
  }
  int steps;
  double a;
  double g;
  if (is_integer(s)) {
    steps = static_cast<int>(-std::nearbyint(s));
    a = 0.0;
    g = expint_e(1.0, x);
  } else {
    steps = static_cast<int>(std::ceil(-s));
    a = s + steps;
    g = std::exp(log_upper_gamma(a, x));
  }
  for (int i = 0; i < steps; ++i) {
    a -= 1.0;
    g = (g - std::exp(a * std::log(x) - x)) / a;
    if (!std::isfinite(g)) return {kInf, true};
  }
  return {g, false};
}

double log_expint_e(double p, double z) {
  if (z < 0.0 || std::isnan(z) || std::isnan(p)) throw DomainError("expint_e: z must be >= 0");
  if (z == 0.0) {
    if (p > 1.0) return -std::log(p - 1.0);
    return std::numeric_limits<double>::infinity();
  }
  if (p < 1.0 && !is_integer(p)) return (p - 1.0) * std::log(z) + log_upper_gamma(1.0 - p, z);
  if (p < 1.0) {
    // E_{-m}(z) = z^{-m-1} Γ(m+1, z), m >= 0
    return (p - 1.0) * std::log(z) + log_upper_gamma(1.0 - std::nearbyint(p), z);
  }
  if (z <= 1.0) return std::log(expint_series(p, z));
  return log_expint_cf(p, z);
}

double expint_e(double p, double z) { return std::exp(log_expint_e(p, z)); }

QuadratureResult integrate_real_line(const Integrand& g, const QuadratureConfig& cfg) {
  RealLineQuadrature q(g, cfg);
  return q.run();
}

QuadratureResult integrate_semi_infinite(const Integrand& f, double a, const QuadratureConfig& cfg) {
  if (!(a >= 0.0)) throw DomainError("integrate_semi_infinite: lower bound must be >= 0");
  const Integrand mapped = [&f, a](double u) {
    const double du = std::exp(u);
    if (du == 0.0) return 0.0;
    const double x = a + du;
    if (!std::isfinite(x)) return 0.0;
    const double v = f(x);
    return v == 0.0 ? 0.0 : v * du;
  };
  return integrate_real_line(mapped, cfg);
}

double find_root_monotone(const std::function<double(double)>& g, double target,
                          double bracket_seed) {
  if (!(bracket_seed > 0.0) || !std::isfinite(bracket_seed))
    throw DomainError("find_root_monotone: bracket seed must be positive");
  constexpr int kMaxExpansions = 200;

  // Direction from two probes; widen the probe pair across plateaus.
  double x1 = bracket_seed;
  double g1 = g(x1);
  double x2 = 2.0 * bracket_seed;
  double g2 = g(x2);
  int widen = 0;
  while (g2 == g1 && widen < kMaxExpansions) {
    x2 *= 2.0;
    g2 = g(x2);
    ++widen;
  }
  if (g2 == g1) throw NoRootError("find_root_monotone: function is flat");
  const double sign = g2 > g1 ? 1.0 : -1.0;
  auto h = [&](double x) { return sign * (g(x) - target); };

  double lo;
  double hi;
  double h1 = sign * (g1 - target);
  if (h1 == 0.0) return x1;
  if (h1 < 0.0) {
    lo = x1;
    hi = x1;
    int n = 0;
    double hh;
    do {
      lo = hi;
      hi *= 2.0;
      hh = h(hi);
      if (++n > kMaxExpansions || !std::isfinite(hi))
        throw NoRootError("find_root_monotone: bracket expansion failed (upward)");
    } while (hh < 0.0);
    if (hh == 0.0) return hi;
  } else {
    hi = x1;
    lo = x1;
    int n = 0;
    double hl;
    do {
      hi = lo;
      lo *= 0.5;
      hl = h(lo);
      if (++n > kMaxExpansions || lo == 0.0)
        throw NoRootError("find_root_monotone: bracket expansion failed (downward)");
    } while (hl > 0.0);
    if (hl == 0.0) return lo;
  }

  for (int it = 0; it < 2000; ++it) {
    const double mid = hi > 4.0 * lo ? std::sqrt(lo * hi) : lo + 0.5 * (hi - lo);
    if (!(mid > lo && mid < hi)) break;
    const double hm = h(mid);
    if (hm == 0.0) return mid;
    if (hm < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return std::abs(h(lo)) <= std::abs(h(hi)) ? lo : hi;
}

void CompensatedSum::add(double x) noexcept {
  const double t = sum_ + x;
  if (std::abs(sum_) >= std::abs(x)) {
    comp_ += (sum_ - t) + x;
  } else {
    comp_ += (x - t) + sum_;
  }
  sum_ = t;
}

SlowVaryModel SlowVaryModel::constant_limit(double c) {
  SlowVaryModel m{SlowVaryKind::Constant, c, 0.0, LimitClass::Converges};
  m.validate();
  return m;
}

SlowVaryModel SlowVaryModel::log_power_law(double c, double beta) {
  LimitClass cls = LimitClass::Converges;
  if (beta > 0.0) cls = LimitClass::Diverges;
  if (beta < 0.0) cls = LimitClass::Vanishes;
  SlowVaryModel m{beta == 0.0 ? SlowVaryKind::Constant : SlowVaryKind::LogPower, c, beta, cls};
  m.validate();
  return m;
}

double SlowVaryModel::limit() const {
  switch (limit_class) {
    case LimitClass::Vanishes:
      return 0.0;
    case LimitClass::Converges:
      return constant;
    case LimitClass::Diverges:
      return std::numeric_limits<double>::infinity();
  }
  return constant;
}

void SlowVaryModel::validate() const {
  if (!(constant > 0.0)) throw DomainError("SlowVaryModel: constant must be positive");
  switch (kind) {
    case SlowVaryKind::Constant:
      if (limit_class != LimitClass::Converges || log_power != 0.0)
        throw DomainError("SlowVaryModel: constant kind must converge");
      break;
    case SlowVaryKind::LogPower:
      if ((log_power > 0.0 && limit_class != LimitClass::Diverges) ||
          (log_power < 0.0 && limit_class != LimitClass::Vanishes) || log_power == 0.0)
        throw DomainError("SlowVaryModel: log-power limit class inconsistent with exponent");
      break;
    case SlowVaryKind::PiecewiseFromTail:
      break;
  }
}

std::string to_string(LimitClass c) {
  switch (c) {
    case LimitClass::Vanishes:
      return "vanishes";
    case LimitClass::Converges:
      return "converges";
    case LimitClass::Diverges:
      return "diverges";
  }
  return "unknown";
}

}  // namespace ratiomom::numerics
