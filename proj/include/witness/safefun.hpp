#pragma once

#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "witness/context.hpp"
#include "witness/lattice.hpp"
#include "witness/term.hpp"

namespace witness {

/// The three selections of the S_Gen^EK class.
enum class SelectionKind { Max, EK, N };

std::string_view to_string(SelectionKind kind);
/// "max" | "ek" | "n"; throws std::invalid_argument otherwise.
SelectionKind parse_selection_kind(std::string_view text);

/// Result of a selection: Bottom ("all atoms") or a finite set of chosen
/// atoms. Chosen(∅) is the supremum.
struct Selection {
  bool bottom = false;
  TermSet items;

  static Selection bottom_sel() { return Selection{true, {}}; }
  static Selection chosen(TermSet items) { return Selection{false, std::move(items)}; }

  friend bool operator==(const Selection&, const Selection&) = default;
};

/// Union of two selections, Bottom absorbing.
Selection merge(const Selection& a, const Selection& b);

struct ProtectiveKey {
  Term key;
  /// The Enc subterm headed by `key`.
  Term protected_subterm;

  friend bool operator==(const ProtectiveKey&, const ProtectiveKey&) = default;
};

/// Per-occurrence protective keys of a target inside a message.
/// `present == false` is the absent-atom result.
struct ProtectionScan {
  bool present = false;
  /// One entry per non-key occurrence, in pre-order; nullopt when that
  /// occurrence has no protective key.
  std::vector<std::optional<ProtectiveKey>> occurrences;
};

/// Walks outermost-to-innermost along the encryptions enclosing each
/// occurrence of `target` and picks the first key k with ⌜k⁻¹⌝ ⊒ `protection`.
/// `target` is an atom or a variable treated as an opaque block.
ProtectionScan external_protective_key(const Term& target, const Term& m,
                                       const VerificationContext& ctx,
                                       const SecurityLevel& protection);
/// Uses ⌜target⌝ as the protection level.
ProtectionScan external_protective_key(const Term& target, const Term& m,
                                       const VerificationContext& ctx);

Selection select(SelectionKind kind, const Term& target, const Term& m,
                 const VerificationContext& ctx, const SecurityLevel& protection);
Selection select(SelectionKind kind, const Term& target, const Term& m,
                 const VerificationContext& ctx);

/// ψ: identities map to themselves, a key to the identities that know it.
SecurityLevel apply_morphism(const Selection& sel, const VerificationContext& ctx);

/// F = ψ ∘ S.
SecurityLevel level_of(SelectionKind kind, const Term& target, const Term& m,
                       const VerificationContext& ctx, const SecurityLevel& protection);
SecurityLevel level_of(SelectionKind kind, const Term& target, const Term& m,
                       const VerificationContext& ctx);

/// Meet of `level_of` over the set; Top when empty.
SecurityLevel level_of_set(SelectionKind kind, const Term& target, const std::vector<Term>& messages,
                           const VerificationContext& ctx);

/// F(α, m) as a first-class value, so probes can be pointed at other
/// candidate functions.
using LevelFunction = std::function<SecurityLevel(const Term& alpha, const Term& m)>;

LevelFunction make_level_function(SelectionKind kind, const VerificationContext& ctx);

SecurityLevel level_of_set(const LevelFunction& f, const Term& target,
                           const std::vector<Term>& messages);

}  // namespace witness
