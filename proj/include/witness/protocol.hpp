#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "witness/context.hpp"
#include "witness/lattice.hpp"
#include "witness/term.hpp"

namespace witness {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, int line, int column);
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

/// Semantic problem in an otherwise well-formed spec.
class SpecError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct KeyDecl {
  std::string key;
  std::string inverse;
  /// ⌜k⁻¹⌝.
  SecurityLevel level;
};

struct AtomDecl {
  std::string name;
  AtomKind kind = AtomKind::Nonce;
  std::optional<std::string> owner;
  SecurityLevel level;
};

struct Step {
  int index = 0;
  std::string sender;
  std::string receiver;
  Term message;
};

struct ProtocolSpec {
  std::string name;
  std::vector<std::string> principals;
  std::string intruder;
  std::optional<SecurityLevel> intruder_level;
  /// Extra initial intruder knowledge.
  std::vector<Term> intruder_knows;
  std::vector<KeyDecl> keys;
  std::vector<AtomDecl> atoms;
  std::vector<Step> steps;

  VerificationContext context() const;
  const Step& step(int index) const;
};

ProtocolSpec parse_protocol(std::string_view text);
std::string print_protocol(const ProtocolSpec& spec);
/// Reads and parses a .wproto file.
ProtocolSpec load_protocol_file(const std::string& path);

/// Names accepted by load_builtin, in a fixed order.
const std::vector<std::string>& builtin_names();
/// Throws std::invalid_argument for an unknown name.
std::string_view builtin_source(std::string_view name);
ProtocolSpec load_builtin(std::string_view name);

enum class Direction { Receive, Send };
std::string_view to_string(Direction d);

struct RoleEvent {
  Direction direction = Direction::Send;
  Term templ;
  int step = 0;
};

/// One principal's projected view of the protocol.
struct GeneralizedRole {
  std::string principal;
  std::string role_id;
  std::vector<RoleEvent> events;
  /// Role variable -> the ground term it stands for in the honest run.
  Substitution honest_binding;

  /// Receive templates strictly before event `event_index`.
  std::vector<Term> history(std::size_t event_index) const;
};

/// One role per principal that takes part in some step, in principal order.
std::vector<GeneralizedRole> project_generalized_roles(const ProtocolSpec& spec);

struct PatternEntry {
  Term term;
  std::string origin_role;
  int origin_step = 0;
  Direction direction = Direction::Send;
};

struct PatternSet {
  std::vector<PatternEntry> patterns;

  std::vector<Term> terms() const;
};

/// All encrypted subterms of all role templates, each entry renamed apart.
PatternSet encryption_patterns(const std::vector<GeneralizedRole>& roles);

/// ⌜t⌝ for an atom, Top for a variable; ContextError otherwise.
SecurityLevel context_level(const VerificationContext& ctx, const Term& t);

}  // namespace witness
