#include "witness/lattice.hpp"

#include <algorithm>
#include <stdexcept>

#include "json.hpp"

namespace witness {

SecurityLevel SecurityLevel::bottom() {
  SecurityLevel l;
  l.bottom_ = true;
  return l;
}

SecurityLevel SecurityLevel::known(std::set<std::string> ids) {
  SecurityLevel l;
  l.ids_ = std::move(ids);
  return l;
}

SecurityLevel SecurityLevel::known(std::initializer_list<std::string> ids) {
  return known(std::set<std::string>(ids));
}

std::string SecurityLevel::str() const {
  if (bottom_) return "BOTTOM";
  std::string out = "{";
  bool first = true;
  for (const auto& id : ids_) {
    if (!first) out += ",";
    first = false;
    out += id;
  }
  return out + "}";
}

SecurityLevel meet(const SecurityLevel& a, const SecurityLevel& b) {
  if (a.is_bottom() || b.is_bottom()) return SecurityLevel::bottom();
  std::set<std::string> ids = a.ids();
  ids.insert(b.ids().begin(), b.ids().end());
  return SecurityLevel::known(std::move(ids));
}

bool leq(const SecurityLevel& a, const SecurityLevel& b) {
  if (a.is_bottom()) return true;
  if (b.is_bottom()) return false;
  return std::includes(a.ids().begin(), a.ids().end(), b.ids().begin(), b.ids().end());
}

nlohmann::json to_json(const SecurityLevel& level) {
  if (level.is_bottom()) return "BOTTOM";
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& id : level.ids()) arr.push_back(id);
  return arr;
}

SecurityLevel level_from_json(const nlohmann::json& j) {
  if (j.is_string() && j.get<std::string>() == "BOTTOM") return SecurityLevel::bottom();
  if (!j.is_array()) throw std::invalid_argument("security level must be \"BOTTOM\" or an array");
  std::set<std::string> ids;
  for (const auto& e : j) ids.insert(e.get<std::string>());
  return SecurityLevel::known(std::move(ids));
}

}  // namespace witness
