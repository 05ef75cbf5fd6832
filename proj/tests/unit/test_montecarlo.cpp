#include <cmath>
#include <vector>

#include "doctest.h"
#include "ratiomom/errors.hpp"
#include "ratiomom/exact_moments.hpp"
#include "ratiomom/montecarlo.hpp"

using namespace ratiomom;
using namespace ratiomom::montecarlo;

TEST_SUITE("montecarlo") {

TEST_CASE("ratio_T examples") {
  CHECK(ratio_T({}) == 0.0);
  CHECK(ratio_T({3.7}) == 1.0);
  CHECK(ratio_T({2.0, 2.0}) == 0.5);
  CHECK(ratio_T({1.0, 2.0, 3.0}) == doctest::Approx(14.0 / 36.0).epsilon(1e-15));
  CHECK(ratio_T({1e300, 1e300, 1e300}) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(ratio_T({1e-300, 2e-300}) == doctest::Approx(5.0 / 9.0).epsilon(1e-15));
  CHECK_THROWS_AS(ratio_T({1.0, -1.0}), DomainError);
}

TEST_CASE("sampled T stays in [1/n, 1]") {
  const auto sev = SeverityModel::strict_pareto(0.5);
  const auto mix = MixingModel::gamma(2.0, 1.0);
  Rng rng(123);
  int zeros = 0;
  for (int i = 0; i < 20000; ++i) {
    const auto s = sample_T(sev, mix, 3.0, rng);
    if (s.n == 0) {
      CHECK_UNARY(s.T == 0.0);
      ++zeros;
    } else {
      CHECK_UNARY(s.T <= 1.0);
      CHECK_UNARY(s.T * static_cast<double>(s.n) >= 1.0 - 1e-12);
    }
    CHECK_UNARY(s.lambda_drawn > 0.0);
  }
  const double p0 = mixing::count_pmf(mix, 0, 3.0);
  CHECK(std::fabs(zeros / 20000.0 - p0) <= 4.0 * std::sqrt(p0 * (1 - p0) / 20000.0));
}

TEST_CASE("coefficient of variation examples") {
  const auto one = cv_from_draws({4.2});
  CHECK(one.cv_hat == 0.0);
  CHECK(one.T == 1.0);
  for (int n : {2, 7, 50}) {
    const auto eq = cv_from_draws(std::vector<double>(n, 3.3));
    CHECK(eq.cv_hat == doctest::Approx(0.0));
    CHECK(eq.T == doctest::Approx(1.0 / n));
  }
  const auto c = cv_from_draws({1.0, 2.0, 3.0});
  CHECK(c.cv_hat == doctest::Approx(std::sqrt(1.0 / 6.0)).epsilon(1e-13));
  CHECK(c.cv_direct == doctest::Approx(std::sqrt(1.0 / 6.0)).epsilon(1e-13));
  CHECK_THROWS_AS(cv_from_draws({}), UndefinedSampleError);
}

TEST_CASE("coefficient of variation identity on random samples") {
  const auto sev = SeverityModel::strict_pareto(1.5);
  const auto mix = MixingModel::degenerate(1.0);
  Rng rng(9);
  for (int i = 0; i < 10000; ++i) {
    try {
      const auto c = sample_cv(sev, mix, 50.0, rng);
      const double nt = c.n * c.T;
      CHECK_UNARY(std::fabs(c.cv_direct * c.cv_direct - (nt - 1.0)) <= 1e-12 * nt);
    } catch (const UndefinedSampleError&) {
    }
  }
  SimulationConfig cfg;
  cfg.n_replicates = 10000;
  const auto s = cv_summary(sev, mix, 50.0, cfg);
  CHECK(s.replicates == 10000);
  CHECK(s.defined == 10000);
  CHECK(s.max_identity_residual <= 1e-12);
  CHECK(s.mean_cv > 0.0);
  // Empty samples are skipped, not counted as defined.
  const auto sparse = cv_summary(sev, mix, 0.5, cfg);
  CHECK(sparse.defined < sparse.replicates);
}

TEST_CASE("Monte Carlo agrees with quadrature") {
  struct Case {
    SeverityModel sev;
    MixingModel mix;
    double t;
  };
  const std::vector<Case> cases = {
      {SeverityModel::strict_pareto(3.0), MixingModel::degenerate(1.0), 50.0},
      {SeverityModel::strict_pareto(1.5), MixingModel::gamma(3.0, 3.0), 20.0},
      {SeverityModel::strict_pareto(0.5), MixingModel::degenerate(2.0), 10.0},
      {SeverityModel::log_pareto(2.5, 1.0), MixingModel::gamma(4.0, 2.0), 15.0}};
  SimulationConfig cfg;
  cfg.n_replicates = 200000;
  cfg.n_streams = 4;
  for (const auto& c : cases) {
    const auto mc = mc_moments(c.sev, c.mix, c.t, {1, 2, 3}, cfg);
    REQUIRE(mc.size() == 3);
    for (const auto& e : mc) {
      const double q = exact::moment_tk(c.sev, c.mix, c.t, e.k).value;
      CHECK(e.method == Method::MonteCarlo);
      CHECK(e.replicates == cfg.n_replicates);
      CHECK(std::fabs(e.value - q) <= 3.5 * e.err_est);
    }
    CHECK(mc[0].value > mc[1].value);
    CHECK(mc[1].value > mc[2].value);
  }
}

TEST_CASE("results do not depend on the number of streams") {
  const auto sev = SeverityModel::strict_pareto(1.5);
  const auto mix = MixingModel::gamma(2.0, 2.0);
  SimulationConfig a;
  a.n_replicates = 50000;
  a.seed = 77;
  SimulationConfig b = a;
  b.n_streams = 4;
  const auto ra = mc_moment(sev, mix, 10.0, 2, a);
  const auto rb = mc_moment(sev, mix, 10.0, 2, b);
  CHECK(ra.value == rb.value);
  CHECK(ra.err_est == rb.err_est);
  CHECK(ra.median_of_means == rb.median_of_means);
  SimulationConfig c = a;
  c.seed = 78;
  CHECK(mc_moment(sev, mix, 10.0, 2, c).value != ra.value);
  const auto sa = cv_summary(sev, mix, 10.0, a);
  const auto sb = cv_summary(sev, mix, 10.0, b);
  CHECK(sa.mean_cv == sb.mean_cv);
}

TEST_CASE("median of block means only for heavy tails") {
  SimulationConfig cfg;
  cfg.n_replicates = 20000;
  const auto heavy = mc_moment(SeverityModel::strict_pareto(1.5), MixingModel::degenerate(1.0), 10.0, 1, cfg);
  CHECK(std::isfinite(heavy.median_of_means));
  CHECK(std::fabs(heavy.median_of_means - heavy.value) <= 5.0 * heavy.err_est * std::sqrt(5.0));
  const auto light = mc_moment(SeverityModel::strict_pareto(3.0), MixingModel::degenerate(1.0), 10.0, 1, cfg);
  CHECK(std::isnan(light.median_of_means));
}

TEST_CASE("configuration errors") {
  SimulationConfig cfg;
  cfg.n_replicates = 0;
  CHECK_THROWS_AS(cfg.validate(), DomainError);
  cfg.n_replicates = 10;
  cfg.n_streams = 0;
  CHECK_THROWS_AS(cfg.validate(), DomainError);
  SimulationConfig ok;
  CHECK_THROWS_AS(mc_moment(SeverityModel::strict_pareto(2.5), MixingModel::degenerate(1.0), 10.0, 0, ok),
                  DomainError);
}

TEST_CASE("counting law of large numbers") {
  const auto mix = MixingModel::gamma(3.0, 1.5);
  SimulationConfig cfg;
  cfg.n_replicates = 40000;
  const auto rows = lln_diagnostic(mix, {10.0, 100.0, 1e3, 1e4, 1e5}, cfg);
  REQUIRE(rows.size() == 5);
  for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].mean_abs_dev < rows[i - 1].mean_abs_dev);
  for (std::size_t i = 2; i < rows.size(); ++i) {
    const double ratio = rows[i].mean_abs_dev / rows[i - 2].mean_abs_dev;
    CHECK(ratio >= 0.05);
    CHECK(ratio <= 0.2);
  }
  // Degenerate mixing: E|N/t - λ| ≈ sqrt(2λ / (π t)) for large t.
  const auto d = lln_diagnostic(MixingModel::degenerate(2.0), {1e4}, cfg);
  CHECK(d[0].mean_abs_dev == doctest::Approx(std::sqrt(2.0 * 2.0 / (M_PI * 1e4))).epsilon(0.03));
}

}  // TEST_SUITE
