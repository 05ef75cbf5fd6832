#pragma once

#include <cstdint>
#include <vector>

#include "ratiomom/mixing.hpp"
#include "ratiomom/moment_estimate.hpp"
#include "ratiomom/rng.hpp"
#include "ratiomom/severity.hpp"

namespace ratiomom::montecarlo {

using severity::SeverityModel;
using mixing::MixingModel;

/// Replicates are generated in fixed blocks, block b drawing from
/// stream_rng(seed, b). Threads only decide who computes which block, so
/// every result is a function of (seed, n_replicates) alone.
inline constexpr std::int64_t kBlockSize = 4096;

struct SimulationConfig {
  std::int64_t n_replicates = 100000;
  std::uint64_t seed = 20240607;
  int n_streams = 1;  // worker threads

  void validate() const;
};

struct TSample {
  double T;
  std::int64_t n;
  double lambda_drawn;
};

/// T = Σx_i² / (Σx_i)² for the given draws (0 for none), computed on
/// max-scaled values with compensated sums.
double ratio_T(const std::vector<double>& x);

TSample sample_T(const SeverityModel& sev, const MixingModel& mix, double t, Rng& rng);

struct CvSample {
  double cv_hat;     // √(n T - 1)
  double cv_direct;  // S / X̄ with the 1/n variance
  double T;
  std::int64_t n;
};

/// Both coefficient-of-variation paths for one sample. Throws
/// UndefinedSampleError for an empty sample and IdentityError when
/// |cv_direct² - (nT - 1)| > 1e-12 · nT.
CvSample cv_from_draws(const std::vector<double>& x);
CvSample sample_cv(const SeverityModel& sev, const MixingModel& mix, double t, Rng& rng);

/// Mean of T^k for each k, all from the same replicates. err_est is the
/// standard error; median_of_means (over blocks) is filled when α <= 2.
std::vector<MomentEstimate> mc_moments(const SeverityModel& sev, const MixingModel& mix, double t,
                                       const std::vector<int>& ks, const SimulationConfig& cfg);
MomentEstimate mc_moment(const SeverityModel& sev, const MixingModel& mix, double t, int k,
                         const SimulationConfig& cfg);

struct CvSummary {
  double t;
  std::int64_t replicates;   // total drawn
  std::int64_t defined;      // replicates with n >= 1
  double mean_cv;
  double mean_cv_stderr;
  double max_identity_residual;  // max |cv_direct² - (nT-1)| / (nT)
};

/// Runs sample_cv over the configured replicates, checking the identity on each.
CvSummary cv_summary(const SeverityModel& sev, const MixingModel& mix, double t,
                     const SimulationConfig& cfg);

struct LlnRow {
  double t;
  double mean_abs_dev;  // mean |N(t)/t - Λ|
  double std_err;
};

std::vector<LlnRow> lln_diagnostic(const MixingModel& mix, const std::vector<double>& t_grid,
                                   const SimulationConfig& cfg);

}  // namespace ratiomom::montecarlo
