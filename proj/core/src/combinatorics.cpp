#include "ratiomom/combinatorics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "ratiomom/errors.hpp"
#include "ratiomom/numerics.hpp"

namespace ratiomom::combinatorics {

namespace {

void check_kr(int k, int r, const char* who) {
  if (k < 1 || r < 1 || r > k) {
    throw DomainError(std::string(who) + ": need 1 <= r <= k, got k=" + std::to_string(k) +
                      " r=" + std::to_string(r));
  }
  if (k > kMaxOrder) throw DomainError(std::string(who) + ": k above supported maximum of 30");
}

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("g_coefficient: alpha must lie in (0, 1)");
}

double g_term(int i, double alpha) {
  return std::exp(numerics::log_gamma(2.0 * i - alpha) - numerics::log_gamma(i + 1.0));
}

void extend(std::vector<int>& cur, int remaining, int slots, std::vector<Composition>& out) {
  if (slots == 1) {
    cur.push_back(remaining);
    out.push_back(Composition{cur, 0, 0});
    cur.pop_back();
    return;
  }
  for (int p = 1; p <= remaining - (slots - 1); ++p) {
    cur.push_back(p);
    extend(cur, remaining - p, slots - 1, out);
    cur.pop_back();
  }
}

void extend_partition(std::vector<int>& cur, int remaining, int slots, int cap,
                      std::vector<std::vector<int>>& out) {
  if (slots == 0) {
    if (remaining == 0) out.push_back(cur);
    return;
  }
  const int hi = std::min(cap, remaining - (slots - 1));
  for (int p = hi; p >= 1; --p) {
    if (p * slots < remaining) break;
    cur.push_back(p);
    extend_partition(cur, remaining - p, slots - 1, p, out);
    cur.pop_back();
  }
}

}  // namespace

Composition Composition::from_parts(std::vector<int> parts) {
  if (parts.empty()) throw DomainError("Composition: no parts");
  int k = 0;
  for (int p : parts) {
    if (p < 1) throw DomainError("Composition: parts must be >= 1");
    k += p;
  }
  const int r = static_cast<int>(parts.size());
  return Composition{std::move(parts), k, r};
}

std::vector<Composition> compositions(int k, int r) {
  check_kr(k, r, "compositions");
  std::vector<Composition> out;
  std::vector<int> cur;
  cur.reserve(r);
  extend(cur, k, r, out);
  for (auto& c : out) {
    c.k = k;
    c.r = r;
  }
  return out;
}

std::vector<std::vector<int>> partitions(int k, int r) {
  check_kr(k, r, "partitions");
  std::vector<std::vector<int>> out;
  std::vector<int> cur;
  extend_partition(cur, k, r, k, out);
  return out;
}

double ordering_count(const std::vector<int>& parts) {
  std::map<int, int> mult;
  for (int p : parts) ++mult[p];
  double lg = numerics::log_gamma(parts.size() + 1.0);
  for (const auto& [part, m] : mult) lg -= numerics::log_gamma(m + 1.0);
  return std::round(std::exp(lg));
}

double log_multinomial_weight(const std::vector<int>& parts) {
  int k = 0;
  double lg = 0.0;
  for (int p : parts) {
    k += p;
    lg -= numerics::log_gamma(p + 1.0);
  }
  return lg + numerics::log_gamma(k + 1.0);
}

double multinomial_weight(const Composition& c) {
  if (c.k <= 20) {
    // Exact in integer arithmetic: 20! fits in 64 bits.
    unsigned long long num = 1;
    for (int i = 2; i <= c.k; ++i) num *= static_cast<unsigned long long>(i);
    for (int p : c.parts) {
      unsigned long long f = 1;
      for (int i = 2; i <= p; ++i) f *= static_cast<unsigned long long>(i);
      num /= f;
    }
    return static_cast<double>(num);
  }
  return std::exp(log_multinomial_weight(c.parts));
}

double g_coefficient(int r, int k, double alpha) {
  check_kr(k, r, "g_coefficient");
  check_alpha(alpha);
  if (k > kMaxOrder) throw DomainError("g_coefficient: k above supported maximum of 30");
  const int top = k - r + 1;
  std::vector<double> base(k + 1, 0.0);
  for (int i = 1; i <= top; ++i) base[i] = g_term(i, alpha);
  std::vector<double> acc = base;
  for (int j = 2; j <= r; ++j) {
    std::vector<double> next(k + 1, 0.0);
    for (int a = j - 1; a <= k; ++a) {
      if (acc[a] == 0.0) continue;
      for (int b = 1; b <= top && a + b <= k; ++b) next[a + b] += acc[a] * base[b];
    }
    acc = std::move(next);
  }
  return acc[k];
}

double g_coefficient_by_compositions(int r, int k, double alpha) {
  check_kr(k, r, "g_coefficient");
  check_alpha(alpha);
  if (k > kMaxOrder) throw DomainError("g_coefficient: k above supported maximum of 30");
  numerics::CompensatedSum sum;
  for (const auto& c : compositions(k, r)) {
    double prod = 1.0;
    for (int p : c.parts) prod *= g_term(p, alpha);
    sum.add(prod);
  }
  return sum.value();
}

}  // namespace ratiomom::combinatorics
