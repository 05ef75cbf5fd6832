#include "ratiomom/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

#include "ratiomom/errors.hpp"
#include "ratiomom/numerics.hpp"

namespace ratiomom::montecarlo {

namespace {

constexpr double kIdentityTol = 1e-12;

// Runs fn(b) for b in [0, n_blocks) on `threads` workers.
template <class Fn>
void for_each_block(std::int64_t n_blocks, int threads, Fn&& fn) {
  threads = static_cast<int>(std::min<std::int64_t>(std::max(threads, 1), std::max<std::int64_t>(n_blocks, 1)));
  if (threads == 1) {
    for (std::int64_t b = 0; b < n_blocks; ++b) fn(b);
    return;
  }
  std::atomic<std::int64_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int i = 0; i < threads; ++i) {
    pool.emplace_back([&] {
      for (std::int64_t b = next++; b < n_blocks && !failed; b = next++) {
        try {
          fn(b);
        } catch (...) {
          if (!failed.exchange(true)) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

std::int64_t block_count(std::int64_t n) { return (n + kBlockSize - 1) / kBlockSize; }

std::int64_t block_len(std::int64_t n, std::int64_t b) {
  return std::min(kBlockSize, n - b * kBlockSize);
}

void draw_severities(const SeverityModel& sev, std::int64_t n, Rng& rng, std::vector<double>& x) {
  x.resize(static_cast<std::size_t>(n));
  for (auto& v : x) v = severity::sample(sev, rng);
}

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  const auto mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  const double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + mid);
  return 0.5 * (lo + hi);
}

struct Moments2 {
  numerics::CompensatedSum sum;
  numerics::CompensatedSum sum_sq;
};

}  // namespace

void SimulationConfig::validate() const {
  if (n_replicates < 1) throw DomainError("SimulationConfig: n_replicates must be >= 1");
  if (n_streams < 1) throw DomainError("SimulationConfig: n_streams must be >= 1");
}

double ratio_T(const std::vector<double>& x) {
  if (x.empty()) return 0.0;
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  const double mx = *hi;
  if (!(*lo > 0.0) || !std::isfinite(mx)) throw DomainError("ratio_T: draws must be positive and finite");
  numerics::CompensatedSum s1;
  numerics::CompensatedSum s2;
  for (double v : x) {
    const double y = v / mx;
    s1.add(y);
    s2.add(y * y);
  }
  const double a = s1.value();
  return std::min(1.0, s2.value() / (a * a));
}

TSample sample_T(const SeverityModel& sev, const MixingModel& mix, double t, Rng& rng) {
  thread_local std::vector<double> x;
  const auto c = mixing::sample_count(mix, t, rng);
  draw_severities(sev, c.n, rng, x);
  return {ratio_T(x), c.n, c.lambda_drawn};
}

CvSample cv_from_draws(const std::vector<double>& x) {
  if (x.empty()) throw UndefinedSampleError("sample_cv: N(t) = 0, coefficient of variation undefined");
  const double n = static_cast<double>(x.size());
  const double mx = *std::max_element(x.begin(), x.end());
  numerics::CompensatedSum s1;
  for (double v : x) s1.add(v / mx);
  const double mean = s1.value() / n;
  numerics::CompensatedSum dev;
  for (double v : x) {
    const double d = v / mx - mean;
    dev.add(d * d);
  }
  const double var = dev.value() / n;
  const double T = ratio_T(x);
  const double nt = n * T;
  const double direct_sq = var / (mean * mean);
  CvSample out{std::sqrt(std::max(0.0, nt - 1.0)), std::sqrt(direct_sq), T,
               static_cast<std::int64_t>(x.size())};
  const double resid = std::fabs(direct_sq - (nt - 1.0));
  if (resid > kIdentityTol * nt) {
    std::ostringstream os;
    os.precision(17);
    os << "sample_cv: paths disagree, S^2/mean^2=" << direct_sq << " nT-1=" << nt - 1.0;
    throw IdentityError(os.str());
  }
  return out;
}

CvSample sample_cv(const SeverityModel& sev, const MixingModel& mix, double t, Rng& rng) {
  thread_local std::vector<double> x;
  const auto c = mixing::sample_count(mix, t, rng);
  draw_severities(sev, c.n, rng, x);
  return cv_from_draws(x);
}

std::vector<MomentEstimate> mc_moments(const SeverityModel& sev, const MixingModel& mix, double t,
                                       const std::vector<int>& ks, const SimulationConfig& cfg) {
  cfg.validate();
  if (!(t > 0.0)) throw DomainError("mc_moment: t must be > 0");
  if (ks.empty()) throw DomainError("mc_moment: no moment orders requested");
  for (int k : ks) {
    if (k < 1) throw DomainError("mc_moment: k must be >= 1");
  }
  const std::int64_t nb = block_count(cfg.n_replicates);
  const std::size_t nk = ks.size();
  std::vector<std::vector<Moments2>> blocks(static_cast<std::size_t>(nb), std::vector<Moments2>(nk));

  for_each_block(nb, cfg.n_streams, [&](std::int64_t b) {
    Rng rng = stream_rng(cfg.seed, static_cast<std::uint64_t>(b));
    auto& acc = blocks[static_cast<std::size_t>(b)];
    const std::int64_t len = block_len(cfg.n_replicates, b);
    for (std::int64_t i = 0; i < len; ++i) {
      const double T = sample_T(sev, mix, t, rng).T;
      for (std::size_t j = 0; j < nk; ++j) {
        const double v = std::pow(T, ks[j]);
        acc[j].sum.add(v);
        acc[j].sum_sq.add(v * v);
      }
    }
  });

  const double n = static_cast<double>(cfg.n_replicates);
  std::vector<MomentEstimate> out;
  for (std::size_t j = 0; j < nk; ++j) {
    numerics::CompensatedSum s;
    numerics::CompensatedSum sq;
    std::vector<double> batch_means;
    for (std::int64_t b = 0; b < nb; ++b) {
      const auto& a = blocks[static_cast<std::size_t>(b)][j];
      s.add(a.sum.value());
      sq.add(a.sum_sq.value());
      if (block_len(cfg.n_replicates, b) == kBlockSize) batch_means.push_back(a.sum.value() / kBlockSize);
    }
    MomentEstimate e;
    e.method = Method::MonteCarlo;
    e.t = t;
    e.k = ks[j];
    e.replicates = cfg.n_replicates;
    e.value = s.value() / n;
    const double var = n > 1.0 ? std::max(0.0, (sq.value() - n * e.value * e.value) / (n - 1.0)) : 0.0;
    e.err_est = std::sqrt(var / n);
    if (sev.alpha() <= 2.0) e.median_of_means = median(std::move(batch_means));
    out.push_back(std::move(e));
  }
  return out;
}

MomentEstimate mc_moment(const SeverityModel& sev, const MixingModel& mix, double t, int k,
                         const SimulationConfig& cfg) {
  return mc_moments(sev, mix, t, {k}, cfg).front();
}

CvSummary cv_summary(const SeverityModel& sev, const MixingModel& mix, double t,
                     const SimulationConfig& cfg) {
  cfg.validate();
  if (!(t > 0.0)) throw DomainError("cv_summary: t must be > 0");
  struct Acc {
    std::int64_t defined = 0;
    Moments2 cv;
    double max_resid = 0.0;
  };
  const std::int64_t nb = block_count(cfg.n_replicates);
  std::vector<Acc> blocks(static_cast<std::size_t>(nb));
  for_each_block(nb, cfg.n_streams, [&](std::int64_t b) {
    Rng rng = stream_rng(cfg.seed, static_cast<std::uint64_t>(b));
    auto& acc = blocks[static_cast<std::size_t>(b)];
    std::vector<double> x;
    const std::int64_t len = block_len(cfg.n_replicates, b);
    for (std::int64_t i = 0; i < len; ++i) {
      const auto c = mixing::sample_count(mix, t, rng);
      draw_severities(sev, c.n, rng, x);
      if (x.empty()) continue;
      const auto cv = cv_from_draws(x);
      const double nt = static_cast<double>(cv.n) * cv.T;
      const double resid = std::fabs(cv.cv_direct * cv.cv_direct - cv.cv_hat * cv.cv_hat) / nt;
      acc.max_resid = std::max(acc.max_resid, resid);
      ++acc.defined;
      acc.cv.sum.add(cv.cv_hat);
      acc.cv.sum_sq.add(cv.cv_hat * cv.cv_hat);
    }
  });
  CvSummary out{t, cfg.n_replicates, 0, 0.0, 0.0, 0.0};
  numerics::CompensatedSum s;
  numerics::CompensatedSum sq;
  for (const auto& a : blocks) {
    out.defined += a.defined;
    s.add(a.cv.sum.value());
    sq.add(a.cv.sum_sq.value());
    out.max_identity_residual = std::max(out.max_identity_residual, a.max_resid);
  }
  if (out.defined > 0) {
    const double n = static_cast<double>(out.defined);
    out.mean_cv = s.value() / n;
    const double var = n > 1.0 ? std::max(0.0, (sq.value() - n * out.mean_cv * out.mean_cv) / (n - 1.0)) : 0.0;
    out.mean_cv_stderr = std::sqrt(var / n);
  } else {
    out.mean_cv = std::numeric_limits<double>::quiet_NaN();
    out.mean_cv_stderr = std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

std::vector<LlnRow> lln_diagnostic(const MixingModel& mix, const std::vector<double>& t_grid,
                                   const SimulationConfig& cfg) {
  cfg.validate();
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    if (!(t_grid[i] > 0.0)) throw DomainError("lln_diagnostic: horizons must be > 0");
    if (i > 0 && !(t_grid[i] > t_grid[i - 1])) throw DomainError("lln_diagnostic: t_grid must be increasing");
  }
  const std::int64_t nb = block_count(cfg.n_replicates);
  std::vector<LlnRow> out;
  for (std::size_t g = 0; g < t_grid.size(); ++g) {
    const double t = t_grid[g];
    std::vector<Moments2> blocks(static_cast<std::size_t>(nb));
    for_each_block(nb, cfg.n_streams, [&](std::int64_t b) {
      // Separate stream family per horizon: high word is the grid index.
      Rng rng = stream_rng(cfg.seed, (static_cast<std::uint64_t>(g + 1) << 40) + static_cast<std::uint64_t>(b));
      auto& acc = blocks[static_cast<std::size_t>(b)];
      const std::int64_t len = block_len(cfg.n_replicates, b);
      for (std::int64_t i = 0; i < len; ++i) {
        const auto c = mixing::sample_count(mix, t, rng);
        const double d = std::fabs(static_cast<double>(c.n) / t - c.lambda_drawn);
        acc.sum.add(d);
        acc.sum_sq.add(d * d);
      }
    });
    numerics::CompensatedSum s;
    numerics::CompensatedSum sq;
    for (const auto& a : blocks) {
      s.add(a.sum.value());
      sq.add(a.sum_sq.value());
    }
    const double n = static_cast<double>(cfg.n_replicates);
    const double mean = s.value() / n;
    const double var = n > 1.0 ? std::max(0.0, (sq.value() - n * mean * mean) / (n - 1.0)) : 0.0;
    out.push_back({t, mean, std::sqrt(var / n)});
  }
  return out;
}

}  // namespace ratiomom::montecarlo
