#pragma once

#include <initializer_list>
#include <set>
#include <string>

#include "json.hpp"

namespace witness {

/// Security level: a set of principal identities ordered by reverse
/// inclusion, plus a symbolic Bottom. Top is the empty set (nobody).
class SecurityLevel {
 public:
  /// Top.
  SecurityLevel() = default;

  static SecurityLevel bottom();
  static SecurityLevel top() { return SecurityLevel(); }
  static SecurityLevel known(std::set<std::string> ids);
  static SecurityLevel known(std::initializer_list<std::string> ids);

  bool is_bottom() const { return bottom_; }
  bool is_top() const { return !bottom_ && ids_.empty(); }
  /// Empty when Bottom.
  const std::set<std::string>& ids() const { return ids_; }
  bool contains(const std::string& id) const { return !bottom_ && ids_.count(id) != 0; }

  std::string str() const;

  friend bool operator==(const SecurityLevel&, const SecurityLevel&) = default;

 private:
  bool bottom_ = false;
  std::set<std::string> ids_;
};

/// Greatest lower bound: union of identity sets, Bottom absorbing.
SecurityLevel meet(const SecurityLevel& a, const SecurityLevel& b);

/// a ⊑ b.
bool leq(const SecurityLevel& a, const SecurityLevel& b);

/// a ⊒ b.
inline bool geq(const SecurityLevel& a, const SecurityLevel& b) { return leq(b, a); }

/// "BOTTOM" or a sorted array of identities.
nlohmann::json to_json(const SecurityLevel& level);
SecurityLevel level_from_json(const nlohmann::json& j);

}  // namespace witness
