#pragma once

#include <string>
#include <vector>

#include "witness/protocol.hpp"

namespace witness {

struct Overlap {
  int step_a = 0;
  int step_b = 0;
  Substitution unifier;
  /// Generalized patterns; identities of the parties appear as variables.
  Term pattern_a;
  Term pattern_b;
};

struct OverlapReport {
  std::vector<Overlap> overlaps;
  bool clean = true;
  std::vector<std::string> notes;
};

/// Outermost encryptions of every role event with parties abstracted:
/// identities become typed variables, their key pairs linked key
/// variables, and atomic data a sender relays stays atomic.
std::vector<PatternEntry> generalized_patterns(const ProtocolSpec& spec);

/// Unifier of two generalized patterns that respects key links and
/// identity typing, if any.
std::optional<Substitution> overlap_unifier(const Term& a, const Term& b);

/// Cross-step unifiable pattern pairs, ordered by (step_a, step_b, a, b).
OverlapReport check_overlap(const ProtocolSpec& spec, bool parallel = true);

struct NonRepStep {
  int step = 0;
  std::string sender;
  bool sender_identity_plain = false;
  bool sender_identity_signed = false;
  bool all_asymmetric = false;
  bool verdict = false;
};

struct NonRepReport {
  std::vector<NonRepStep> steps;
  bool pass = true;
};

NonRepReport check_non_repudiation(const ProtocolSpec& spec);

}  // namespace witness
