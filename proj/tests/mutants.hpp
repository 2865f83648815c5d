#pragma once

#include "witness/safefun.hpp"

namespace fx {

/// Broken level function: every encryption counts as protective, so a key
/// the intruder holds still "hides" what it encrypts.
inline witness::LevelFunction every_key_protects(const witness::VerificationContext& ctx) {
  return [&ctx](const witness::Term& alpha, const witness::Term& m) {
    return witness::level_of(witness::SelectionKind::Max, alpha, m, ctx, witness::SecurityLevel::bottom());
  };
}

}  // namespace fx
