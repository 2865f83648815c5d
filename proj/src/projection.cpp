#include <map>

#include "witness/protocol.hpp"

namespace witness {

namespace {

class Projector {
 public:
  Projector(const VerificationContext& ctx, std::string self) : ctx_(ctx), self_(std::move(self)) {
    Term me = Term::atom(self_, AtomKind::Identity);
    view_[me] = me;
  }

  Term receive(const Term& t) {
    if (auto it = view_.find(t); it != view_.end()) return it->second;
    switch (t.kind()) {
      case TermKind::Atom:
        return receive_atom(t);
      case TermKind::Pair: {
        Term l = receive(t.left());
        return Term::pair(l, receive(t.right()));
      }
      case TermKind::Enc:
        if (can_open(t) || constructible(t)) {
          Term b = receive(t.body());
          return Term::enc(b, receive(t.key()));
        }
        return blob(t);
      case TermKind::Hash:
        if (constructible(t)) return Term::hash(receive(t.body()));
        return blob(t);
      default:
        return t;
    }
  }

  Term send(const Term& t) {
    if (auto it = view_.find(t); it != view_.end()) return it->second;
    switch (t.kind()) {
      case TermKind::Atom:
        return send_atom(t);
      case TermKind::Pair: {
        Term l = send(t.left());
        return Term::pair(l, send(t.right()));
      }
      case TermKind::Enc: {
        Term b = send(t.body());
        return Term::enc(b, send(t.key()));
      }
      case TermKind::Hash:
        return Term::hash(send(t.body()));
      default:
        return t;
    }
  }

  Substitution honest;

 private:
  bool owned_by_self(const Term& a) const {
    const auto& owner = ctx_.owner_of(a.name());
    return owner && *owner == self_;
  }

  bool holds_key(const std::string& k) const {
    if (ctx_.is_key(k)) {
      const auto& info = ctx_.key_info(k);
      if (info.owner && info.is_public) return true;
      if (info.owner && *info.owner == self_) return true;
    }
    if (view_.count(Term::atom(k, ctx_.kind_of(k)))) return true;
    const SecurityLevel l = ctx_.level(k);
    return l.is_bottom() || l.contains(self_);
  }

  bool can_open(const Term& e) const {
    if (!e.key().is_atom()) return false;
    const std::string& k = e.key().name();
    return holds_key(ctx_.is_key(k) ? ctx_.inverse(k) : k);
  }

  bool knows_atom(const Term& a) const {
    if (view_.count(a) || owned_by_self(a)) return true;
    if (a.atom_kind() == AtomKind::Constant) return true;
    if (a.atom_kind() == AtomKind::Key) return holds_key(a.name());
    return false;
  }

  bool constructible(const Term& t) const {
    for (const Term& a : atoms(t)) {
      if (!knows_atom(a)) return false;
    }
    return true;
  }

  Term fresh_variable(const Term& ground, std::string name, std::optional<KeyLink> link = std::nullopt) {
    while (used_.count(name)) name += "'";
    used_.insert(name);
    Term v = Term::variable(name, std::move(link));
    honest.bind(name, ground);
    view_[ground] = v;
    return v;
  }

  Term blob(const Term& t) { return fresh_variable(t, "U" + std::to_string(++blobs_)); }

  /// A key of an identity seen as a variable becomes a linked variable.
  std::optional<Term> linked_key(const Term& a, bool from_receive) {
    if (!ctx_.is_key(a.name())) return std::nullopt;
    const auto& info = ctx_.key_info(a.name());
    if (!info.owner) return std::nullopt;
    Term owner_atom = Term::atom(*info.owner, AtomKind::Identity);
    Term owner = from_receive ? receive_atom(owner_atom) : send_atom(owner_atom);
    if (!owner.is_variable()) {
      view_[a] = a;
      return a;
    }
    KeyLink link{owner.name(), info.is_public ? KeySide::Public : KeySide::Private};
    return fresh_variable(a, a.name() + "'", link);
  }

  Term receive_atom(const Term& a) {
    if (auto it = view_.find(a); it != view_.end()) return it->second;
    if (a.atom_kind() == AtomKind::Identity) return fresh_variable(a, a.name() + "'");
    if (auto k = linked_key(a, true)) return *k;
    if (knows_atom(a)) {
      view_[a] = a;
      return a;
    }
    return fresh_variable(a, a.name() + "'");
  }

  Term send_atom(const Term& a) {
    if (auto it = view_.find(a); it != view_.end()) return it->second;
    // Identities first met when sending are peers the principal chose.
    if (a.atom_kind() == AtomKind::Identity) {
      view_[a] = a;
      return a;
    }
    if (auto k = linked_key(a, false)) return *k;
    if (!knows_atom(a)) {
      throw SpecError("principal " + self_ + " sends '" + a.name() + "' without knowing it");
    }
    view_[a] = a;
    return a;
  }

  const VerificationContext& ctx_;
  std::string self_;
  std::map<Term, Term> view_;
  std::set<std::string> used_;
  int blobs_ = 0;
};

}  // namespace

std::vector<Term> GeneralizedRole::history(std::size_t event_index) const {
  std::vector<Term> out;
  for (std::size_t i = 0; i < event_index && i < events.size(); ++i) {
    if (events[i].direction == Direction::Receive) out.push_back(events[i].templ);
  }
  return out;
}

std::vector<GeneralizedRole> project_generalized_roles(const ProtocolSpec& spec) {
  const VerificationContext ctx = spec.context();
  std::vector<GeneralizedRole> roles;
  for (const std::string& p : spec.principals) {
    GeneralizedRole role;
    role.principal = p;
    role.role_id = p;
    Projector proj(ctx, p);
    for (const Step& s : spec.steps) {
      if (s.receiver == p) {
        role.events.push_back({Direction::Receive, proj.receive(s.message), s.index});
      } else if (s.sender == p) {
        role.events.push_back({Direction::Send, proj.send(s.message), s.index});
      }
    }
    if (role.events.empty()) continue;
    role.honest_binding = proj.honest;
    roles.push_back(std::move(role));
  }
  return roles;
}

std::vector<Term> PatternSet::terms() const {
  std::vector<Term> out;
  out.reserve(patterns.size());
  for (const auto& p : patterns) out.push_back(p.term);
  return out;
}

PatternSet encryption_patterns(const std::vector<GeneralizedRole>& roles) {
  PatternSet out;
  for (const auto& role : roles) {
    for (const auto& ev : role.events) {
      for (const Term& e : encrypted_subterms(ev.templ)) {
        const std::string tag = "#" + std::to_string(out.patterns.size() + 1);
        out.patterns.push_back({rename_apart(e, tag), role.role_id, ev.step, ev.direction});
      }
    }
  }
  return out;
}

}  // namespace witness
