#pragma once

#include <vector>

namespace ratiomom::combinatorics {

/// Largest moment order supported anywhere in the library.
inline constexpr int kMaxOrder = 30;

/// An ordered split k = k_1 + ... + k_r with every k_i >= 1.
struct Composition {
  std::vector<int> parts;
  int k = 0;
  int r = 0;

  /// Validates and fills k and r from the parts.
  static Composition from_parts(std::vector<int> parts);
};

/// All compositions of k into r parts, lexicographic order.
std::vector<Composition> compositions(int k, int r);

/// Partitions of k into exactly r parts, each stored non-increasing.
std::vector<std::vector<int>> partitions(int k, int r);

/// Number of distinct orderings of a multiset of parts: r! / ∏ m_j!.
double ordering_count(const std::vector<int>& parts);

/// k! / ∏ k_i!.
double multinomial_weight(const Composition& c);
double log_multinomial_weight(const std::vector<int>& parts);

/// Coefficient of x^k in (Σ_{i=1}^{k-r+1} Γ(2i-α)/i! x^i)^r, by repeated
/// truncated polynomial multiplication.
double g_coefficient(int r, int k, double alpha);

/// The same coefficient as Σ over compositions of ∏ Γ(2k_i-α)/k_i!.
double g_coefficient_by_compositions(int r, int k, double alpha);

}  // namespace ratiomom::combinatorics
