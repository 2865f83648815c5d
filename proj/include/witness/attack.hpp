#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "witness/intruder.hpp"

namespace witness {

enum class IntruderAction { Forward, Synthesize, Decompose };
std::string_view to_string(IntruderAction a);

/// How one role instance was set up: who plays it and whom it talks to.
struct SessionSetup {
  int session = 0;
  std::string role;
  std::string self;
  /// Ground identities of the role template other than its owner -> chosen agent.
  std::map<std::string, std::string> peers;

  friend bool operator==(const SessionSetup&, const SessionSetup&) = default;
};

struct TraceEvent {
  int session = 0;
  int step = 0;
  Direction direction = Direction::Send;
  Term message;
  IntruderAction action = IntruderAction::Decompose;

  friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

struct AttackTrace {
  std::vector<SessionSetup> sessions;
  std::vector<TraceEvent> events;
  Term exposed_secret;
  /// Level of the exposed secret as seen by its session.
  SecurityLevel secret_level;
};

struct SearchConfig {
  int max_sessions = 2;
  int synth_depth = 2;
  std::size_t state_limit = 400000;
  bool parallel = true;
  /// A principal accepts each timestamp value at most once.
  bool fresh_timestamps = false;
};

enum class SearchOutcome { Attack, NoAttack, Exhausted };
std::string_view to_string(SearchOutcome o);

struct SearchResult {
  SearchOutcome outcome = SearchOutcome::NoAttack;
  std::optional<AttackTrace> trace;
  std::size_t states = 0;
  int layers = 0;
  /// NoAttack settled by the relaxed fixpoint, without enumerating states.
  bool by_overapproximation = false;
};

/// Breadth-first search over interleavings of at most `max_sessions`
/// instances per role, preceded by a relaxed fixpoint that can prove the
/// absence of attacks outright. The first attack found is the shortest, ties broken
/// by a fixed move order; parallel and serial runs return the same trace.
SearchResult search_attack(const ProtocolSpec& spec, const SearchConfig& config);

/// Re-executes a trace against fresh role instances. True when every
/// event is accepted and the secret is derivable at the end.
bool replay(const ProtocolSpec& spec, const AttackTrace& trace);

/// Aligned arrow diagram, one line per event.
std::string render_trace(const AttackTrace& trace);

}  // namespace witness
