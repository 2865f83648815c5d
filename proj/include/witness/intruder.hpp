#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "witness/protocol.hpp"
#include "witness/safefun.hpp"

namespace witness {

/// A finite set of ground terms.
using Knowledge = TermSet;

/// Closure under pair projection and decryption with held inverse keys.
/// Hashes are one-way.
Knowledge saturate(const Knowledge& m, const VerificationContext& ctx);

/// M ⊨ m: m is in the closure or can be composed from it. Encryption keys
/// must be key atoms.
bool derives(const Knowledge& m, const Term& t, const VerificationContext& ctx);
/// Same test against an already saturated set.
bool derives_saturated(const Knowledge& saturated, const Term& t);

/// Every derivable ground term of size <= max_size.
Knowledge derivable_up_to(const Knowledge& m, const VerificationContext& ctx, int max_size);

/// Identities, every public atom, the intruder's own keys, declared extras.
Knowledge initial_intruder_knowledge(const ProtocolSpec& spec);

struct InvarianceViolation {
  Term alpha;
  Term message;
  SecurityLevel in_knowledge;
  SecurityLevel in_message;
};

/// Full invariance checked exhaustively over derivable_up_to(M, max_size):
/// no derivable message lowers an atom below its level in M unless the
/// intruder is entitled to it.
std::vector<InvarianceViolation> probe_full_invariance(const LevelFunction& f, const VerificationContext& ctx,
                                                       const Knowledge& m, int max_size);
std::vector<InvarianceViolation> probe_full_invariance(SelectionKind kind, const VerificationContext& ctx,
                                                       const Knowledge& m, int max_size);

struct WellFormednessViolation {
  std::string law;
  std::string detail;
};

/// Randomized check of the three well-formedness laws on terms over the context's
/// atoms.
std::vector<WellFormednessViolation> probe_well_formedness(SelectionKind kind, const VerificationContext& ctx,
                                                           int trials, std::uint64_t seed);
std::vector<WellFormednessViolation> probe_well_formedness(const LevelFunction& f, const VerificationContext& ctx,
                                                           int trials, std::uint64_t seed);

/// One randomized full-invariance scenario: a context with random atom
/// levels (optionally one compromised principal) and a knowledge set drawn
/// from the protocol's messages.
struct InvarianceScenario {
  ProtocolSpec spec;
  Knowledge knowledge;
  std::string compromised;
};

InvarianceScenario random_invariance_scenario(const ProtocolSpec& base, std::uint64_t seed);

struct InvarianceSummary {
  int scenarios = 0;
  std::size_t messages_checked = 0;
  std::vector<InvarianceViolation> violations;
};

/// Runs `scenarios` random scenarios per corpus protocol. `make` builds the
/// level function for each scenario's context.
InvarianceSummary probe_full_invariance_random(
    const std::vector<ProtocolSpec>& protocols,
    const std::function<LevelFunction(const VerificationContext&)>& make, int scenarios, int max_size,
    std::uint64_t seed, bool parallel = true);

}  // namespace witness
