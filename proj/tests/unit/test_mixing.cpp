#include <cmath>
#include <vector>

#include "doctest.h"
#include "ratiomom/errors.hpp"
#include "ratiomom/mixing.hpp"
#include "ratiomom/numerics.hpp"

using namespace ratiomom;
using namespace ratiomom::mixing;

namespace {

double rel(double a, double b) { return std::fabs(a / b - 1.0); }

double gamma_density(double a, double b, double x) {
  return std::exp(a * std::log(b) + (a - 1.0) * std::log(x) - b * x - numerics::log_gamma(a));
}

// Upper 1% points of the chi-square distribution.
double chi2_99(int df) {
  static const double table[] = {0,     6.635, 9.210, 11.345, 13.277, 15.086, 16.812, 18.475,
                                 20.090, 21.666, 23.209, 24.725, 26.217, 27.688, 29.141, 30.578,
                                 32.000, 33.409, 34.805, 36.191, 37.566};
  REQUIRE(df <= 20);
  return table[df];
}

Regime regime(RegimeTag t) {
  Regime r;
  r.tag = t;
  return r;
}

}  // namespace

TEST_SUITE("mixing") {

TEST_CASE("model validation") {
  CHECK_THROWS_AS(MixingModel::degenerate(0.0), DomainError);
  CHECK_THROWS_AS(MixingModel::gamma(0.0, 1.0), DomainError);
  CHECK_THROWS_AS(MixingModel::gamma(1.0, -1.0), DomainError);
  CHECK(MixingModel::gamma(3.0, 2.0).mean() == 1.5);
  CHECK(MixingModel::degenerate(2.5).mean() == 2.5);
}

TEST_CASE("q_r examples") {
  const auto d1 = MixingModel::degenerate(1.0);
  const auto g21 = MixingModel::gamma(2.0, 1.0);
  CHECK(rel(q_r(d1, 0, 2.0), std::exp(-2.0)) <= 1e-15);
  CHECK(rel(q_r(g21, 1, 0.0), 2.0) <= 1e-14);
  CHECK(rel(q_r(g21, 1, 1.0), 0.25) <= 1e-14);
  numerics::QuadratureConfig cfg;
  cfg.rel_tol = 1e-12;
  const auto q = numerics::integrate_semi_infinite(
      [](double x) { return std::exp(-x) * x * gamma_density(2.0, 1.0, x); }, 0.0, cfg);
  CHECK(rel(q.value, 0.25) <= 1e-10);
  CHECK(rel(q_r(MixingModel::degenerate(2.0), 3, 0.5), 8.0 * std::exp(-1.0)) <= 1e-14);
}

TEST_CASE("q_r is strictly decreasing in w") {
  for (const auto& m : {MixingModel::degenerate(1.5), MixingModel::gamma(0.5, 2.0), MixingModel::gamma(4.0, 1.0)}) {
    for (int r = 0; r <= 6; ++r) {
      double prev = q_r(m, r, 0.0);
      for (double w = 0.1; w < 50.0; w *= 1.7) {
        const double v = q_r(m, r, w);
        CHECK(v < prev);
        CHECK(v > 0.0);
        CHECK(std::fabs(log_q_r(m, r, w) - std::log(v)) <= 1e-12 * std::max(1.0, std::fabs(std::log(v))));
        prev = v;
      }
    }
  }
  // Degenerate closed form times e^{wλ} stays at λ^r.
  const auto d = MixingModel::degenerate(0.7);
  for (double w : {0.0, 10.0, 500.0}) CHECK(rel(q_r(d, 2, w) * std::exp(w * 0.7), 0.49) <= 1e-12);
}

TEST_CASE("lambda_moment examples") {
  const auto d1 = MixingModel::degenerate(1.0);
  for (double p : {-7.0, -0.5, 0.0, 3.3}) CHECK(lambda_moment(d1, p) == 1.0);
  const auto g21 = MixingModel::gamma(2.0, 1.0);
  CHECK(rel(lambda_moment(g21, -1.0), 1.0) <= 1e-14);
  CHECK(std::isinf(lambda_moment(g21, -2.0)));
  CHECK(std::isinf(lambda_moment(g21, -3.0)));
  numerics::QuadratureConfig cfg;
  cfg.rel_tol = 1e-12;
  const auto q = numerics::integrate_semi_infinite(
      [](double x) { return gamma_density(2.0, 1.0, x) / x; }, 0.0, cfg);
  CHECK(rel(q.value, 1.0) <= 1e-10);
  CHECK(rel(lambda_moment(MixingModel::gamma(3.0, 2.0), 2.0), 3.0) <= 1e-14);
}

TEST_CASE("lambda_moment finiteness is monotone on a grid") {
  for (double a : {0.3, 1.0, 2.0, 5.5}) {
    const auto m = MixingModel::gamma(a, 1.7);
    for (double s = 0.1; s <= 8.0; s += 0.1) {
      for (double r = 0.05; r <= s; r += 0.05) {
        if (std::isfinite(lambda_moment(m, s))) CHECK(std::isfinite(lambda_moment(m, r)));
        if (std::isfinite(lambda_moment(m, -s))) CHECK(std::isfinite(lambda_moment(m, -r)));
      }
    }
  }
}

TEST_CASE("integral identity for q_r") {
  const auto m = MixingModel::gamma(2.0, 1.0);
  numerics::QuadratureConfig cfg;
  cfg.rel_tol = 1e-11;
  for (int r : {1, 2, 3}) {
    for (double beta : {0.5, 1.0, 2.5}) {
      const auto lhs = numerics::integrate_semi_infinite(
          [&](double w) { return std::pow(w, beta - 1.0) * q_r(m, r, w); }, 0.0, cfg);
      const double rhs = std::exp(numerics::log_gamma(beta)) * lambda_moment(m, r - beta);
      CHECK(rel(lhs.value, rhs) <= 1e-7);
    }
  }
}

TEST_CASE("pgf_deriv examples and identities") {
  const auto g = MixingModel::gamma(2.5, 1.5);
  const auto d = MixingModel::degenerate(1.3);
  for (const auto& m : {g, d}) {
    for (double t : {0.1, 1.0, 40.0}) {
      CHECK(rel(pgf_deriv(m, 0, t, 1.0), 1.0) <= 1e-15);
      CHECK(rel(pgf_deriv(m, 0, t, 0.3), q_r(m, 0, t * 0.7)) <= 1e-14);
      for (int r = 1; r <= 5; ++r) {
        for (double w : {0.0, 0.05 * t, 0.6 * t}) {
          CHECK(rel(pgf_deriv(m, r, t, 1.0 - w / t) / std::pow(t, r), q_r(m, r, w)) <= 1e-12);
        }
      }
    }
  }
  CHECK(rel(pgf_deriv(d, 1, 1.0, 0.0), 1.3 * std::exp(-1.3)) <= 1e-14);
  // Q_t(0) = P[N(t) = 0].
  CHECK(rel(pgf_deriv(g, 0, 2.0, 0.0), count_pmf(g, 0, 2.0)) <= 1e-13);
  CHECK_THROWS_AS(pgf_deriv(g, 1, 1.0, 1.5), DomainError);
  CHECK_THROWS_AS(pgf_deriv(g, 1, 0.0, 0.5), DomainError);
}

TEST_CASE("count_pmf examples and normalization") {
  CHECK(rel(count_pmf(MixingModel::degenerate(1.0), 0, 1.0), std::exp(-1.0)) <= 1e-15);
  CHECK(rel(count_pmf(MixingModel::gamma(1.0, 1.0), 0, 1.0), 0.5) <= 1e-15);
  CHECK(rel(count_pmf(MixingModel::gamma(1.0, 1.0), 3, 1.0), 1.0 / 16.0) <= 1e-14);
  for (const auto& m : {MixingModel::degenerate(1.0), MixingModel::gamma(5.0, 5.0)}) {
    for (double t : {0.5, 1.0, 5.0, 20.0}) {
      numerics::CompensatedSum s;
      for (int n = 0; n <= 200; ++n) s.add(count_pmf(m, n, t));
      CHECK(std::fabs(s.value() - 1.0) <= 1e-10);
    }
  }
  CHECK_THROWS_AS(count_pmf(MixingModel::degenerate(1.0), -1, 1.0), DomainError);
}

TEST_CASE("sample_count empirical pmf passes a chi-square test") {
  const int draws = 1000000;
  for (const auto& m : {MixingModel::degenerate(1.0), MixingModel::gamma(2.0, 1.0)}) {
    const double t = 3.0;
    Rng rng(11);
    const int bins = 12;
    std::vector<double> obs(bins + 1, 0.0);
    for (int i = 0; i < draws; ++i) {
      const auto c = sample_count(m, t, rng);
      if (m.kind() == Kind::Degenerate) CHECK_UNARY(c.lambda_drawn == 1.0);
      obs[static_cast<std::size_t>(std::min<std::int64_t>(c.n, bins))] += 1.0;
    }
    double chi2 = 0.0;
    double head = 0.0;
    for (int n = 0; n < bins; ++n) {
      const double e = draws * count_pmf(m, n, t);
      head += count_pmf(m, n, t);
      chi2 += (obs[n] - e) * (obs[n] - e) / e;
    }
    const double e_tail = draws * (1.0 - head);
    chi2 += (obs[bins] - e_tail) * (obs[bins] - e_tail) / e_tail;
    CHECK(chi2 < chi2_99(bins));
  }
}

TEST_CASE("N(t)/t tracks the mean intensity") {
  const auto m = MixingModel::gamma(3.0, 2.0);
  const double t = 1000.0;
  const int draws = 100000;
  Rng rng(5);
  numerics::CompensatedSum s, s2;
  for (int i = 0; i < draws; ++i) {
    const double v = static_cast<double>(sample_count(m, t, rng).n) / t;
    s.add(v);
    s2.add(v * v);
  }
  const double mean = s.value() / draws;
  const double var = s2.value() / draws - mean * mean;
  CHECK(std::fabs(mean - m.mean()) <= 3.0 * std::sqrt(var / draws));
}

TEST_CASE("Poisson sampler moments on both branches") {
  for (double mu : {0.3, 7.0, 29.5, 30.5, 250.0, 1e5}) {
    Rng rng(17);
    const int draws = 200000;
    numerics::CompensatedSum s, s2;
    for (int i = 0; i < draws; ++i) {
      const double n = static_cast<double>(sample_poisson(mu, rng));
      s.add(n);
      s2.add(n * n);
    }
    const double mean = s.value() / draws;
    const double var = s2.value() / draws - mean * mean;
    CHECK(std::fabs(mean - mu) <= 4.0 * std::sqrt(mu / draws));
    CHECK(std::fabs(var / mu - 1.0) <= 0.03);
  }
  Rng rng(1);
  CHECK(sample_poisson(0.0, rng) == 0);
  CHECK_THROWS_AS(sample_poisson(-1.0, rng), DomainError);
}

TEST_CASE("validate_hypotheses examples") {
  const auto d1 = MixingModel::degenerate(1.0);
  for (auto tag : {RegimeTag::Alpha01, RegimeTag::Alpha1to2Mu1Fin, RegimeTag::AlphaGt2KgtBoundary}) {
    const auto rep = validate_hypotheses(d1, regime(tag), 3, 1.5);
    CHECK(rep.overall() == Verdict::Satisfied);
    CHECK_FALSE(rep.conditions.empty());
  }
  const auto g2 = MixingModel::gamma(2.0, 1.0);
  const auto bad = validate_hypotheses(g2, regime(RegimeTag::Alpha1to2Mu1Fin), 4, 1.5);
  CHECK(bad.overall() == Verdict::Violated);
  CHECK(bad.summary().find("violated") != std::string::npos);
  CHECK(bad.summary().find("E{L^(-2-eps)}<inf") != std::string::npos);
  const auto good = validate_hypotheses(MixingModel::gamma(5.0, 1.0), regime(RegimeTag::Alpha1to2Mu1Fin), 1, 1.5);
  CHECK(good.overall() == Verdict::Satisfied);
  for (const auto& c : good.conditions) {
    CHECK(c.epsilon > 0.0);
    CHECK(std::isfinite(c.moment));
  }
  // ε is half the distance to the finiteness boundary.
  CHECK(good.conditions[1].epsilon == doctest::Approx(2.25));
}

TEST_CASE("validate_hypotheses conditions per regime") {
  const auto g = MixingModel::gamma(4.0, 1.0);
  const auto light = validate_hypotheses(g, regime(RegimeTag::AlphaGt2KltBoundary), 1, 3.0);
  REQUIRE(light.conditions.size() == 1);
  CHECK(light.conditions[0].exponent == -1.0);
  const auto heavy = validate_hypotheses(g, regime(RegimeTag::AlphaGt2KgtBoundary), 3, 3.0);
  REQUIRE(heavy.conditions.size() == 2);
  CHECK(heavy.conditions[0].exponent == 1.0);
  CHECK(heavy.conditions[1].exponent == -5.0);
  CHECK(heavy.overall() == Verdict::Violated);
  // Exponent within a hair of the boundary is flagged rather than decided.
  const auto edge = validate_hypotheses(MixingModel::gamma(1.0 + 1e-8, 1.0), regime(RegimeTag::AlphaGt2KltBoundary), 1, 3.0);
  CHECK(edge.overall() == Verdict::Boundary);
  CHECK_THROWS_AS(validate_hypotheses(g, regime(RegimeTag::Alpha01), 0, 0.5), DomainError);
}

}  // TEST_SUITE
