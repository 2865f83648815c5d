#pragma once

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "witness/lattice.hpp"
#include "witness/term.hpp"

namespace witness {

class ContextError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Static facts about the atoms of one protocol: levels ⌜α⌝, key inverses,
/// key ownership and the intruder's level ⌜K(I)⌝.
class VerificationContext {
 public:
  struct KeyInfo {
    std::string inverse;
    /// Set when the key pair belongs to one identity.
    std::optional<std::string> owner;
    /// Public half of an owned asymmetric pair.
    bool is_public = false;
  };

  void declare_identity(const std::string& id, SecurityLevel level = SecurityLevel::bottom());
  void declare_atom(const std::string& name, AtomKind kind, SecurityLevel level,
                    std::optional<std::string> owner = std::nullopt);
  /// Declares k and its inverse; `inverse_level` is the knower level of the
  /// inverse ⌜k⁻¹⌝. For k ≠ k⁻¹, ⌜k⌝ is Bottom (public).
  void declare_key_pair(const std::string& key, const std::string& inverse,
                        SecurityLevel inverse_level);
  void set_intruder(const std::string& id, std::optional<SecurityLevel> level = std::nullopt);

  bool declared(const std::string& name) const { return kinds_.count(name) != 0; }
  AtomKind kind_of(const std::string& name) const;
  Term atom(const std::string& name) const { return Term::atom(name, kind_of(name)); }

  /// ⌜α⌝ for an atom; Top for a variable. Throws ContextError otherwise.
  SecurityLevel level(const Term& t) const;
  SecurityLevel level(const std::string& atom_name) const;

  bool is_key(const std::string& name) const { return keys_.count(name) != 0; }
  const KeyInfo& key_info(const std::string& key) const;
  std::string inverse(const std::string& key) const;
  bool asymmetric(const std::string& key) const { return inverse(key) != key; }
  /// Keys owned by an identity: (public, private).
  std::optional<std::pair<std::string, std::string>> key_pair_of(const std::string& id) const;

  const std::string& intruder() const { return intruder_; }
  const SecurityLevel& intruder_level() const { return intruder_level_; }
  /// ⌜K(I)⌝ ⊒ ⌜α⌝.
  bool intruder_authorized(const SecurityLevel& atom_level) const {
    return leq(atom_level, intruder_level_);
  }

  const std::vector<std::string>& identities() const { return identities_; }
  /// Every declared atom name, sorted.
  std::vector<std::string> atom_names() const;
  const std::optional<std::string>& owner_of(const std::string& atom) const;

  /// Level used to test protective keys for a block whose content is
  /// unknown: every declared identity.
  SecurityLevel all_identities_level() const;

 private:
  std::map<std::string, AtomKind> kinds_;
  std::map<std::string, SecurityLevel> levels_;
  std::map<std::string, std::optional<std::string>> owners_;
  std::map<std::string, KeyInfo> keys_;
  std::vector<std::string> identities_;
  std::string intruder_;
  SecurityLevel intruder_level_;
};

}  // namespace witness
