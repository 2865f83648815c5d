#include "witness/context.hpp"

namespace witness {

namespace {

std::optional<std::string> singleton(const SecurityLevel& level) {
  if (!level.is_bottom() && level.ids().size() == 1) return *level.ids().begin();
  return std::nullopt;
}

}  // namespace

void VerificationContext::declare_identity(const std::string& id, SecurityLevel level) {
  if (kinds_.count(id)) throw ContextError("duplicate declaration of '" + id + "'");
  kinds_[id] = AtomKind::Identity;
  levels_[id] = std::move(level);
  owners_[id] = id;
  identities_.push_back(id);
}

void VerificationContext::declare_atom(const std::string& name, AtomKind kind, SecurityLevel level,
                                       std::optional<std::string> owner) {
  if (kinds_.count(name)) throw ContextError("duplicate declaration of '" + name + "'");
  kinds_[name] = kind;
  levels_[name] = std::move(level);
  owners_[name] = std::move(owner);
}

void VerificationContext::declare_key_pair(const std::string& key, const std::string& inverse,
                                           SecurityLevel inverse_level) {
  if (kinds_.count(key)) throw ContextError("duplicate declaration of '" + key + "'");
  if (key != inverse && kinds_.count(inverse)) {
    throw ContextError("duplicate declaration of '" + inverse + "'");
  }
  std::optional<std::string> owner = singleton(inverse_level);
  kinds_[key] = AtomKind::Key;
  kinds_[inverse] = AtomKind::Key;
  owners_[key] = owner;
  owners_[inverse] = owner;
  if (key == inverse) {
    levels_[key] = inverse_level;
    keys_[key] = KeyInfo{key, std::nullopt, false};
    return;
  }
  levels_[inverse] = inverse_level;
  levels_[key] = SecurityLevel::bottom();
  keys_[key] = KeyInfo{inverse, owner, true};
  keys_[inverse] = KeyInfo{key, owner, false};
}

void VerificationContext::set_intruder(const std::string& id, std::optional<SecurityLevel> level) {
  intruder_ = id;
  intruder_level_ = level ? *level : SecurityLevel::known({id});
}

AtomKind VerificationContext::kind_of(const std::string& name) const {
  auto it = kinds_.find(name);
  if (it == kinds_.end()) throw ContextError("undeclared atom '" + name + "'");
  return it->second;
}

SecurityLevel VerificationContext::level(const Term& t) const {
  if (t.is_variable()) return SecurityLevel::top();
  if (!t.is_atom()) throw ContextError("context level requested for compound term " + t.str());
  return level(t.name());
}

SecurityLevel VerificationContext::level(const std::string& atom_name) const {
  auto it = levels_.find(atom_name);
  if (it == levels_.end()) throw ContextError("undeclared atom '" + atom_name + "'");
  return it->second;
}

const VerificationContext::KeyInfo& VerificationContext::key_info(const std::string& key) const {
  auto it = keys_.find(key);
  if (it == keys_.end()) throw ContextError("'" + key + "' is not a declared key");
  return it->second;
}

std::string VerificationContext::inverse(const std::string& key) const {
  return key_info(key).inverse;
}

std::optional<std::pair<std::string, std::string>> VerificationContext::key_pair_of(
    const std::string& id) const {
  for (const auto& [name, info] : keys_) {
    if (info.owner && *info.owner == id && info.is_public) {
      return std::make_pair(name, info.inverse);
    }
  }
  return std::nullopt;
}

std::vector<std::string> VerificationContext::atom_names() const {
  std::vector<std::string> out;
  out.reserve(kinds_.size());
  for (const auto& [name, _] : kinds_) out.push_back(name);
  return out;
}

const std::optional<std::string>& VerificationContext::owner_of(const std::string& atom) const {
  static const std::optional<std::string> none;
  auto it = owners_.find(atom);
  return it == owners_.end() ? none : it->second;
}

SecurityLevel VerificationContext::all_identities_level() const {
  return SecurityLevel::known(std::set<std::string>(identities_.begin(), identities_.end()));
}

}  // namespace witness
