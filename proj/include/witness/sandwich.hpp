#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "witness/witness.hpp"

namespace witness {

/// One (template, item) pair of a role whose bounds get sampled.
struct SandwichItem {
  std::string role;
  int step = 0;
  Term templ;
  AtomOrVarBinding binding;
  /// The atom whose witness value is measured; for a block, the atom planted in it.
  Term measured;
};

struct SandwichViolation {
  std::string role;
  int step = 0;
  Term measured;
  Term instance;
  SecurityLevel lower;
  SecurityLevel witness;
  SecurityLevel upper;
};

struct SandwichSummary {
  std::size_t items = 0;
  std::size_t samples = 0;
  std::vector<SandwichViolation> violations;
};

/// Static atoms of every role event, and every non-key variable paired with
/// every non-key atom absent from the event.
std::vector<SandwichItem> sandwich_items(const ProtocolSpec& spec);

/// Draws `samples` random ground instances per item and checks
/// lower <= W <= upper. Each item has its own stream derived from `seed`,
/// so serial and parallel runs agree.
SandwichSummary check_sandwich(const ProtocolSpec& spec, SelectionKind kind, int samples, std::uint64_t seed,
                               bool parallel = true);

}  // namespace witness
