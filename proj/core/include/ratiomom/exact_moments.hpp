#pragma once

#include <map>
#include <mutex>
#include <utility>
#include <vector>

#include "ratiomom/combinatorics.hpp"
#include "ratiomom/mixing.hpp"
#include "ratiomom/moment_estimate.hpp"
#include "ratiomom/numerics.hpp"
#include "ratiomom/severity.hpp"

namespace ratiomom::exact {

using severity::SeverityModel;
using mixing::MixingModel;

/// ln of s^{2k-1} ∏ φ^{(2k_i)}(s) Q_t^{(r)}(φ(s)); -∞ where it underflows.
double bt_log_integrand(const SeverityModel& sev, const MixingModel& mix, double t,
                        const std::vector<int>& parts, double s);

/// B_t(k_1..k_r) = ∫_0^∞ s^{2k-1} ∏ φ^{(2k_i)}(s) Q_t^{(r)}(φ(s)) ds.
numerics::QuadratureResult bt_integral(const SeverityModel& sev, const MixingModel& mix, double t,
                                       const combinatorics::Composition& c,
                                       const numerics::QuadratureConfig& cfg = {});
numerics::QuadratureResult bt_integral(const SeverityModel& sev, const MixingModel& mix, double t,
                                       const std::vector<int>& parts,
                                       const numerics::QuadratureConfig& cfg = {});

/// E{T_{N(t)}^k} as the weighted sum of B_t over compositions of k.
MomentEstimate moment_tk(const SeverityModel& sev, const MixingModel& mix, double t, int k,
                         const numerics::QuadratureConfig& cfg = {});

/// The B_t integrand after s = ψ(w/t):
///   t^{r-1} ψ^{2k-1} ∏ φ^{(2k_i)}(ψ) q_r(w) / (-φ'(ψ)),  ψ = ψ(w/t),
/// and 0 for w >= t.
double substituted_integrand(const SeverityModel& sev, const MixingModel& mix, double t,
                             const combinatorics::Composition& c, double w);

/// ∫_0^t substituted_integrand dw. Equal to bt_integral by change of variables.
numerics::QuadratureResult substituted_integral(const SeverityModel& sev, const MixingModel& mix,
                                                double t, const combinatorics::Composition& c,
                                                const numerics::QuadratureConfig& cfg = {});

/// Repeated moment_tk calls over a t-sweep. The partition table and weights
/// for each k are built once; B_t values are memoized by (t, parts).
/// Thread-safe.
class MomentEvaluator {
 public:
  MomentEvaluator(SeverityModel sev, MixingModel mix, numerics::QuadratureConfig cfg = {});

  MomentEstimate moment(double t, int k);

  const SeverityModel& severity() const noexcept { return sev_; }
  const MixingModel& mixing() const noexcept { return mix_; }

 private:
  struct Entry {
    std::vector<int> parts;
    double orderings;
    double weight;
  };
  const std::vector<Entry>& table(int k);
  numerics::QuadratureResult bt(double t, const std::vector<int>& parts);

  SeverityModel sev_;
  MixingModel mix_;
  numerics::QuadratureConfig cfg_;
  std::mutex mu_;
  std::map<int, std::vector<Entry>> tables_;
  std::map<std::pair<double, std::vector<int>>, numerics::QuadratureResult> bt_cache_;
};

}  // namespace ratiomom::exact
