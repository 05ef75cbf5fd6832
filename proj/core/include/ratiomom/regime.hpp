#pragma once

#include <string>

#include "ratiomom/numerics.hpp"

namespace ratiomom {

enum class RegimeTag {
  Alpha01,
  Alpha1Mu1Inf,
  Alpha1to2Mu1Fin,
  Alpha2K1Mu2Fin,
  Alpha2K1Mu2Inf,
  Alpha2Kge2,
  AlphaGt2KltBoundary,
  AlphaGt2KgtBoundary,
  AlphaGt2KeqBoundary,
};

/// Asymptotic case for a (severity, k) pair. `sub` is meaningful only for
/// AlphaGt2KeqBoundary and carries the limit class of ℓ.
struct Regime {
  RegimeTag tag = RegimeTag::Alpha01;
  numerics::LimitClass sub = numerics::LimitClass::Converges;
  bool near_boundary = false;  // α within 1e-6 of an integer but not snapped to it
  std::string warning;

  bool operator==(const Regime& o) const noexcept {
    return tag == o.tag && (tag != RegimeTag::AlphaGt2KeqBoundary || sub == o.sub);
  }
};

/// Stable text tag, e.g. "AlphaGt2KeqBoundary(converges)".
std::string to_string(const Regime& r);
std::string to_string(RegimeTag t);

}  // namespace ratiomom
