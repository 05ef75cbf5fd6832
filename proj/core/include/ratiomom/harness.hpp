#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "ratiomom/mixing.hpp"
#include "ratiomom/montecarlo.hpp"
#include "ratiomom/numerics.hpp"
#include "ratiomom/severity.hpp"

namespace ratiomom::harness {

enum class Exit : int { Ok = 0, VerifyFailed = 1, Usage = 2 };

struct SeveritySpec {
  std::string family = "strict_pareto";  // or "log_pareto"
  double alpha = 3.0;
  double x0 = 1.0;          // 0 for log_pareto means the automatic threshold
  double log_power = 0.0;   // β of the log_pareto tail
};

struct MixingSpec {
  std::string kind = "degenerate";  // or "gamma"
  double lambda = 1.0;
  double shape = 1.0;
  double rate = 1.0;
};

struct StudyConfig {
  SeveritySpec severity;
  MixingSpec mixing;
  std::vector<int> ks{1};
  std::vector<double> ts{1e2, 1e3, 1e4};
  bool run_quadrature = true;
  bool run_asymptote = true;
  bool run_monte_carlo = false;
  numerics::QuadratureConfig quadrature;
  montecarlo::SimulationConfig simulation;
  std::string output;  // empty: stdout

  severity::SeverityModel make_severity() const;
  mixing::MixingModel make_mixing() const;

  /// Every setting that influences results, in a fixed order. Thread
  /// count is excluded: it never changes output.
  std::vector<std::pair<std::string, std::string>> provenance() const;
};

/// Parses the JSON study file. Unknown keys and bad values raise
/// ConfigError naming the field; syntax errors name the line.
StudyConfig parse_config(const std::string& text);
StudyConfig load_config(const std::string& path);

struct ConvergenceRow {
  double t = 0.0;
  int k = 0;
  double alpha = 0.0;
  std::string method;
  double value;       // NaN when the method failed
  double err_est;
  double asymptote;   // NaN when unavailable
  double ratio;       // value / asymptote; NaN unless the asymptote is finite and nonzero
  std::string regime;
  std::string hypotheses;
  std::string error;
};

struct LimitsRow {
  int k;
  double alpha;
  int r;
  double g_coefficient;
  double term;
  double limit;
};

struct VerifyCheck {
  std::string name;
  bool passed;
  double metric;     // worst observed deviation
  double tolerance;
  std::string detail;
};

/// Throws ConfigError if α is outside (0, 1).
std::vector<LimitsRow> cmd_limits(const StudyConfig& cfg);
std::vector<ConvergenceRow> cmd_converge(const StudyConfig& cfg, int threads);
/// Monte Carlo moments for every (k, t), median-of-batch-means rows when
/// α <= 2, and one "sample-cv" row per t (k = 0) summarizing √(nT - 1).
std::vector<ConvergenceRow> cmd_simulate(const StudyConfig& cfg, int threads);
std::vector<VerifyCheck> cmd_verify(const StudyConfig& cfg, int threads);

using Provenance = std::vector<std::pair<std::string, std::string>>;

void write_rows_csv(std::ostream& os, const std::vector<ConvergenceRow>& rows, const Provenance& prov);
void write_rows_json(std::ostream& os, const std::vector<ConvergenceRow>& rows, const Provenance& prov);
void write_limits_csv(std::ostream& os, const std::vector<LimitsRow>& rows, const Provenance& prov);
void write_limits_json(std::ostream& os, const std::vector<LimitsRow>& rows, const Provenance& prov);
void write_verify_report(std::ostream& os, const std::vector<VerifyCheck>& checks);

/// %.17g, or the empty string for NaN.
std::string format_number(double v);

}  // namespace ratiomom::harness
