#include <cmath>
#include <vector>

#include "doctest.h"
#include "ratiomom/combinatorics.hpp"
#include "ratiomom/errors.hpp"
#include "ratiomom/exact_moments.hpp"
#include "ratiomom/numerics.hpp"

using namespace ratiomom;
using namespace ratiomom::exact;
using combinatorics::Composition;

namespace {

double rel(double a, double b) { return std::fabs(a / b - 1.0); }

// E{T_n^k} by direct simulation for a fixed count n; returns {mean, standard error}.
std::pair<double, double> fixed_n_moment(const SeverityModel& sev, int n, int k, int reps, std::uint64_t seed) {
  if (n == 0) return {0.0, 0.0};
  Rng rng(seed);
  numerics::CompensatedSum s, s2;
  for (int i = 0; i < reps; ++i) {
    std::vector<double> x(n);
    double mx = 0.0;
    for (auto& v : x) {
      v = severity::sample(sev, rng);
      mx = std::max(mx, v);
    }
    double sq = 0.0, sum = 0.0;
    for (double v : x) {
      sq += (v / mx) * (v / mx);
      sum += v / mx;
    }
    const double tk = std::pow(sq / (sum * sum), k);
    s.add(tk);
    s2.add(tk * tk);
  }
  const double mean = s.value() / reps;
  const double var = std::max(0.0, s2.value() / reps - mean * mean);
  return {mean, std::sqrt(var / reps)};
}

}  // namespace

TEST_SUITE("exact_moments") {

TEST_CASE("moment at t = 0 vanishes") {
  const auto sev = SeverityModel::strict_pareto(3.0);
  const auto mix = MixingModel::degenerate(1.0);
  for (int k : {1, 2, 5}) {
    const auto m = moment_tk(sev, mix, 0.0, k);
    CHECK(m.value == 0.0);
    CHECK(m.method == Method::Quadrature);
  }
  CHECK(moment_tk(sev, mix, 1e-8, 1).value < 1e-7);
  CHECK(bt_integral(sev, mix, 1e-8, Composition::from_parts({1})).value < 1e-7);
}

TEST_CASE("B_t for k = 1 matches the conditional series") {
  const auto sev = SeverityModel::strict_pareto(3.0);
  const auto mix = MixingModel::degenerate(1.0);
  const double t = 10.0;
  numerics::QuadratureConfig cfg;
  cfg.rel_tol = 1e-10;
  numerics::CompensatedSum series;
  for (int n = 1; n <= 200; ++n) {
    const double pn = mixing::count_pmf(mix, n, t);
    if (pn < 1e-300) continue;
    const auto inner = numerics::integrate_semi_infinite(
        [&](double s) {
          return s * severity::laplace_deriv(sev, 2, s) * std::pow(severity::laplace(sev, s), n - 1);
        },
        0.0, cfg);
    series.add(pn * n * inner.value);
  }
  const auto bt = bt_integral(sev, mix, t, Composition::from_parts({1}), cfg);
  CHECK(rel(bt.value, series.value()) <= 1e-8);
  CHECK(rel(moment_tk(sev, mix, t, 1).value, series.value()) <= 1e-7);
}

TEST_CASE("integrand is positive and finite in log form") {
  const auto sev = SeverityModel::strict_pareto(0.5);
  const auto mix = MixingModel::gamma(2.0, 1.0);
  for (const std::vector<int>& parts : {std::vector<int>{1}, {2, 1}, {1, 1, 1}, {3, 3}}) {
    for (double s : {1e-12, 1e-4, 0.1, 1.0, 10.0}) {
      const double v = bt_log_integrand(sev, mix, 100.0, parts, s);
      CHECK_FALSE(std::isnan(v));
      CHECK(std::isfinite(std::exp(v)));
    }
  }
}

TEST_CASE("heavy-tail limit at large t") {
  const auto m = moment_tk(SeverityModel::strict_pareto(0.5), MixingModel::degenerate(1.0), 1e4, 1);
  CHECK(rel(m.value, 0.5) <= 0.05);
  CHECK(m.err_est < 1e-6);
}

TEST_CASE("light-tail decay at large t") {
  const auto m = moment_tk(SeverityModel::strict_pareto(3.0), MixingModel::degenerate(1.0), 1e3, 1);
  CHECK(rel(m.value * 1e3, 4.0 / 3.0) <= 0.02);
}

TEST_CASE("moments lie in [0, 1], decrease in k and obey Jensen") {
  const auto mix = MixingModel::gamma(3.0, 3.0);
  for (double a : {0.5, 1.5, 3.0}) {
    const auto sev = SeverityModel::strict_pareto(a);
    for (double t : {1.0, 30.0}) {
      const double m1 = moment_tk(sev, mix, t, 1).value;
      double prev = m1;
      for (int k = 2; k <= 5; ++k) {
        const double mk = moment_tk(sev, mix, t, k).value;
        CHECK(mk > 0.0);
        CHECK(mk < prev);
        CHECK(mk >= std::pow(m1, k) * (1.0 - 1e-7));
        prev = mk;
      }
      CHECK(m1 <= 1.0);
      // P[N >= 1] bounds E{T^k} for every k.
      CHECK(m1 <= 1.0 - mixing::count_pmf(mix, 0, t) + 1e-9);
    }
  }
}

TEST_CASE("diagnostics add up") {
  const int k = 6;
  const auto m = moment_tk(SeverityModel::strict_pareto(1.5), MixingModel::degenerate(2.0), 20.0, k);
  numerics::CompensatedSum s;
  double orderings = 0.0;
  for (const auto& d : m.diagnostics) {
    s.add(d.contribution);
    orderings += d.orderings;
    CHECK(d.contribution == doctest::Approx(d.orderings * d.weight * d.bt).epsilon(1e-14));
    CHECK(d.bt_err >= 0.0);
  }
  CHECK(m.value == doctest::Approx(s.value()).epsilon(1e-14));
  CHECK(orderings == 32.0);
  CHECK(m.diagnostics.size() == 11);  // partitions of 6
}

TEST_CASE("small-t agreement with the fixed-count series") {
  const auto sev = SeverityModel::strict_pareto(1.5);
  const auto mix = MixingModel::degenerate(1.0);
  const int reps = 200000;
  for (double t : {0.5, 1.0, 2.0}) {
    for (int k : {1, 2}) {
      double series = 0.0, var = 0.0, head = 0.0;
      for (int n = 0; n <= 6; ++n) {
        const double pn = mixing::count_pmf(mix, n, t);
        head += pn;
        const auto [mean, se] = fixed_n_moment(sev, n, k, reps, 1000 + 10 * n + k);
        series += pn * mean;
        var += pn * pn * se * se;
      }
      const double tail = 1.0 - head;  // E{T^k} <= 1 on the omitted counts
      const double q = moment_tk(sev, mix, t, k).value;
      CHECK(q >= series - 4.0 * std::sqrt(var));
      CHECK(q <= series + tail + 4.0 * std::sqrt(var));
    }
  }
}

TEST_CASE("gamma mixing approaches the degenerate value as the shape grows") {
  const auto sev = SeverityModel::strict_pareto(3.0);
  const double lam = 1.0;
  const double t = 100.0;
  const double deg = moment_tk(sev, MixingModel::degenerate(lam), t, 1).value;
  double prev = INFINITY;
  for (double a : {1.0, 10.0, 100.0}) {
    const double g = moment_tk(sev, MixingModel::gamma(a, a / lam), t, 1).value;
    const double gap = std::fabs(g - deg);
    CHECK(gap < prev);
    prev = gap;
  }
  CHECK(prev / deg < 0.05);
}

TEST_CASE("substituted integrand cutoff and pointwise consistency") {
  const auto sev = SeverityModel::strict_pareto(3.0);
  const auto mix = MixingModel::gamma(2.0, 1.0);
  const auto c = Composition::from_parts({2, 1});
  CHECK(substituted_integrand(sev, mix, 50.0, c, 50.0) == 0.0);
  CHECK(substituted_integrand(sev, mix, 50.0, c, 75.0) == 0.0);
  CHECK(substituted_integrand(sev, mix, 50.0, c, 0.0) == 0.0);
  // The change of variables s = ψ(w/t) rescales the B_t integrand by ds/dw.
  const double t = 50.0;
  for (double w : {0.5, 5.0, 30.0}) {
    const double s = severity::psi(sev, w / t);
    const double bt_pt = std::exp(bt_log_integrand(sev, mix, t, c.parts, s));
    const double jac = 1.0 / (t * -severity::laplace_deriv(sev, 1, s));
    CHECK(rel(substituted_integrand(sev, mix, t, c, w), bt_pt * jac) <= 1e-9);
  }
}

TEST_CASE("substituted integral equals B_t") {
  const auto sev = SeverityModel::strict_pareto(3.0);
  const auto mix = MixingModel::degenerate(1.0);
  for (const auto& c : {Composition::from_parts({1}), Composition::from_parts({1, 2}),
                        Composition::from_parts({1, 1, 1})}) {
    const auto a = bt_integral(sev, mix, 50.0, c);
    const auto b = substituted_integral(sev, mix, 50.0, c);
    CHECK(std::fabs(a.value - b.value) <= 2.0 * (a.err_est + b.err_est));
    CHECK(rel(a.value, b.value) <= 1e-7);
  }
}

TEST_CASE("substituted integrand has the heavy-tail pointwise limit") {
  const double a = 0.5;
  const auto sev = SeverityModel::strict_pareto(a);
  const auto mix = MixingModel::gamma(2.0, 1.0);
  const double g1a = std::exp(numerics::log_gamma(1.0 - a));
  for (const auto& c : {Composition::from_parts({1}), Composition::from_parts({1, 1}),
                        Composition::from_parts({2, 1})}) {
    double prod = 1.0;
    for (int ki : c.parts) prod *= std::exp(numerics::log_gamma(2.0 * ki - a));
    for (double w : {0.5, 1.0, 2.0}) {
      const double lim = std::pow(a, c.r - 1) * prod / std::pow(g1a, c.r) * std::pow(w, c.r - 1) *
                         mixing::q_r(mix, c.r, w);
      CHECK(rel(substituted_integrand(sev, mix, 1e6, c, w), lim) <= 0.05);
    }
  }
}

TEST_CASE("order limits") {
  const auto sev = SeverityModel::strict_pareto(3.0);
  const auto mix = MixingModel::degenerate(1.0);
  CHECK_THROWS_AS(moment_tk(sev, mix, 1.0, 31), DomainError);
  CHECK_THROWS_AS(moment_tk(sev, mix, 1.0, 0), DomainError);
  CHECK_THROWS_AS(moment_tk(sev, mix, -1.0, 1), DomainError);
}

TEST_CASE("evaluator reproduces direct calls and caches") {
  const auto sev = SeverityModel::strict_pareto(1.5);
  const auto mix = MixingModel::gamma(3.0, 3.0);
  MomentEvaluator ev(sev, mix);
  for (double t : {10.0, 100.0}) {
    for (int k : {1, 3}) {
      const double direct = moment_tk(sev, mix, t, k).value;
      const double first = ev.moment(t, k).value;
      const double second = ev.moment(t, k).value;
      CHECK(rel(first, direct) <= 1e-13);
      CHECK(first == second);
    }
  }
  CHECK(ev.moment(0.0, 2).value == 0.0);
}

}  // TEST_SUITE
