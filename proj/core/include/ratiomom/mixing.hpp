#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ratiomom/regime.hpp"
#include "ratiomom/rng.hpp"

namespace ratiomom::mixing {

enum class Kind { Degenerate, Gamma };

/// Distribution of the positive mixing intensity Λ.
class MixingModel {
 public:
  static MixingModel degenerate(double lambda);
  /// Gamma with shape a and rate b (mean a/b).
  static MixingModel gamma(double shape, double rate);

  Kind kind() const noexcept { return kind_; }
  double lambda() const noexcept { return p1_; }
  double shape() const noexcept { return p1_; }
  double rate() const noexcept { return p2_; }
  double mean() const noexcept;

  std::string describe() const;

 private:
  MixingModel(Kind k, double p1, double p2) : kind_(k), p1_(p1), p2_(p2) {}

  Kind kind_;
  double p1_;
  double p2_;
};

/// q_r(w) = E{e^{-wΛ} Λ^r}.
double q_r(const MixingModel& m, int r, double w);
double log_q_r(const MixingModel& m, int r, double w);

/// E{Λ^p}; +∞ when the integral diverges.
double lambda_moment(const MixingModel& m, double p);

/// Q_t^{(r)}(z) = t^r q_r(t(1 - z)).
double pgf_deriv(const MixingModel& m, int r, double t, double z);

/// P[N(t) = n].
double count_pmf(const MixingModel& m, std::int64_t n, double t);
double log_count_pmf(const MixingModel& m, std::int64_t n, double t);

struct CountDraw {
  std::int64_t n;
  double lambda_drawn;
};

/// Λ from the mixing law, then N ~ Poisson(Λ t).
CountDraw sample_count(const MixingModel& m, double t, Rng& rng);

/// Poisson(mean) draw: sequential inversion up to mean 30, rejection above.
std::int64_t sample_poisson(double mean, Rng& rng);

enum class Verdict { Satisfied, Violated, Boundary };
std::string to_string(Verdict v);

/// One requirement E{Λ^{exponent + direction·ε}} < ∞ for some ε > 0.
struct Condition {
  double exponent;
  int direction;    // +1 or -1
  double epsilon;   // ε used for the check; 0 when violated
  double moment;    // E{Λ^{exponent + direction·ε}}
  Verdict verdict;

  std::string statement() const;
};

struct HypothesisReport {
  Regime regime;
  int k;
  double alpha;
  std::vector<Condition> conditions;

  Verdict overall() const;
  std::string summary() const;
};

/// Checks the mixing-moment hypotheses of the asymptotic law for `regime`.
/// Violations are reported, never thrown.
HypothesisReport validate_hypotheses(const MixingModel& m, const Regime& regime, int k,
                                     double alpha);

}  // namespace ratiomom::mixing
