#pragma once

#include <optional>
#include <variant>

#include "witness/context.hpp"
#include "witness/safefun.hpp"
#include "witness/term.hpp"

namespace witness {

/// The analyzed item is an atom present in the template.
struct StaticAtom {
  Term atom;
};

/// The analyzed item reaches the message only through variable `var`,
/// evaluated as an opaque block. `stands_for` is the level of the content
/// the block carries, when known; it is the protection level used when
/// searching for a protective key above the block.
struct VarBlock {
  Term var;
  std::optional<SecurityLevel> stands_for;
};

using AtomOrVarBinding = std::variant<StaticAtom, VarBlock>;

/// ∂m: every variable occurrence removed, then ε-normalized.
Term derive(const Term& m);

/// ∂[X̄]m: every variable except `x` removed, plus every key-position
/// variable (including `x`). Throws std::invalid_argument if x ∉ vars(m).
Term derive_keep(const Term& x, const Term& m);

/// True when `x` occurs both as a key and elsewhere, so ∂[X̄] drops some of
/// its occurrences.
bool keep_collides(const Term& x, const Term& m);

/// Protection level a VarBlock is evaluated with.
SecurityLevel block_protection(const VarBlock& b, const VerificationContext& ctx);

/// F on derivatives.
SecurityLevel derived_level(SelectionKind kind, const AtomOrVarBinding& b, const Term& m,
                            const VerificationContext& ctx);

/// Two-case rule on an instance pσ of template p for atom α: F(α, ∂p) when
/// α survives derivation, otherwise the meet of F(Z, ∂[Z̄]p) over the
/// non-key variables Z of p whose image under σ contains α. Top when
/// neither case applies.
SecurityLevel instance_level(SelectionKind kind, const Term& alpha, const Term& p,
                             const Substitution& sigma, const VerificationContext& ctx);

}  // namespace witness
