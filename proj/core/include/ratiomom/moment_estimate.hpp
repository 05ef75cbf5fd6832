#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace ratiomom {

enum class Method { Quadrature, MonteCarlo, Asymptote };
std::string to_string(Method m);

/// Contribution of one multiset of parts {k_1..k_r} to E{T^k}. All orderings
/// of the same multiset share one B_t value; `orderings` counts them.
struct PartContribution {
  std::vector<int> parts;
  double orderings = 1.0;
  double weight = 0.0;  // k!/∏k_i! / ((2k-1)! r!)
  double bt = 0.0;
  double bt_err = 0.0;
  double contribution = 0.0;  // orderings * weight * bt
};

/// An estimate of E{T_{N(t)}^k}. For Monte Carlo err_est is the standard error.
struct MomentEstimate {
  double value = 0.0;
  Method method = Method::Quadrature;
  double err_est = 0.0;
  double t = 0.0;
  int k = 1;
  std::vector<PartContribution> diagnostics;
  std::int64_t replicates = 0;
  double median_of_means = std::numeric_limits<double>::quiet_NaN();
};

}  // namespace ratiomom
