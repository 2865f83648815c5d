#include "witness/witness.hpp"

#include <algorithm>
#include <tuple>

namespace witness {

namespace {

/// Reachable from the top through pairs and hashes only.
bool exposed(const Term& m, const Term& item) {
  if (m == item) return true;
  if (m.is_pair()) return exposed(m.left(), item) || exposed(m.right(), item);
  if (m.is_hash()) return exposed(m.body(), item);
  return false;
}

/// False only when `p` cannot unify with the ground term `g` for structural reasons.
bool may_match(const Term& p, const Term& g) {
  if (p.is_variable()) return true;
  if (p.kind() != g.kind()) return false;
  switch (p.kind()) {
    case TermKind::Atom:
      return p == g;
    case TermKind::Pair:
      return may_match(p.left(), g.left()) && may_match(p.right(), g.right());
    case TermKind::Enc:
      return may_match(p.key(), g.key()) && may_match(p.body(), g.body());
    case TermKind::Hash:
      return may_match(p.body(), g.body());
    default:
      return true;
  }
}

bool exposed_variable(const Term& m) {
  if (m.is_variable()) return true;
  if (m.is_pair()) return exposed_variable(m.left()) || exposed_variable(m.right());
  if (m.is_hash()) return exposed_variable(m.body());
  return false;
}

bool subset_of(const TermSet& a, const TermSet& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

SecurityLevel static_contribution(SelectionKind kind, const Term& alpha, const Term& p,
                                  const Substitution& mgu, const VerificationContext& ctx) {
  const Term dp = derive(p);
  if (atoms(dp).count(alpha)) return level_of(kind, alpha, dp, ctx);
  SecurityLevel out = SecurityLevel::top();
  const SecurityLevel protection = ctx.level(alpha);
  for (const Term& z : non_key_variables(p)) {
    const Term image = apply(z, mgu);
    if (image.is_ground() && !atoms(image).count(alpha)) continue;
    out = meet(out, level_of(kind, z, derive_keep(z, p), ctx, protection));
  }
  return out;
}

// The carried atom is unknown but lies outside A(m).
SecurityLevel block_contribution(SelectionKind kind, const VarBlock& b, const TermSet& atoms_of_m,
                                 const Term& p, const Substitution& mgu, const VerificationContext& ctx) {
  const Term dp = derive(p);
  SecurityLevel out = SecurityLevel::top();
  for (const Term& beta : atoms(dp)) {
    if (atoms_of_m.count(beta)) continue;
    out = meet(out, level_of(kind, beta, dp, ctx));
  }
  const SecurityLevel protection = block_protection(b, ctx);
  for (const Term& z : non_key_variables(p)) {
    const Term image = apply(z, mgu);
    if (image.is_ground() && subset_of(atoms(image), atoms_of_m)) continue;
    out = meet(out, level_of(kind, z, derive_keep(z, p), ctx, protection));
  }
  return out;
}

}  // namespace

SecurityLevel upper_bound(SelectionKind kind, const AtomOrVarBinding& b, const Term& m,
                          const VerificationContext& ctx) {
  return derived_level(kind, b, m, ctx);
}

SecurityLevel lower_bound(SelectionKind kind, const AtomOrVarBinding& b, const Term& m,
                          const PatternSet& patterns, const VerificationContext& ctx) {
  const auto* s = std::get_if<StaticAtom>(&b);
  const Term item = s ? s->atom : std::get<VarBlock>(b).var;
  if (exposed(m, item) || exposed_variable(m)) return SecurityLevel::bottom();
  const TermSet atoms_of_m = atoms(m);
  SecurityLevel out = SecurityLevel::top();
  for (const Term& e : top_level_encryptions(m)) {
    if (!contains(e, item) && non_key_variables(e).empty()) continue;
    for (const auto& entry : patterns.patterns) {
      auto mgu = unify(entry.term, e);
      if (!mgu) continue;
      out = meet(out, s ? static_contribution(kind, s->atom, entry.term, *mgu, ctx)
                        : block_contribution(kind, std::get<VarBlock>(b), atoms_of_m, entry.term, *mgu, ctx));
      if (out.is_bottom()) return out;
    }
  }
  return out;
}

SecurityLevel witness_value_ground(SelectionKind kind, const Term& alpha, const Term& ground_m,
                                   const PatternSet& patterns, const VerificationContext& ctx) {
  if (exposed(ground_m, alpha)) return SecurityLevel::bottom();
  SecurityLevel out = SecurityLevel::top();
  for (const Term& e : top_level_encryptions(ground_m)) {
    if (!contains(e, alpha)) continue;
    for (const auto& entry : patterns.patterns) {
      if (!may_match(entry.term, e)) continue;
      auto matcher = unify(entry.term, e);
      if (!matcher) continue;
      out = meet(out, instance_level(kind, alpha, entry.term, *matcher, ctx));
      if (out.is_bottom()) return out;
    }
  }
  return out;
}

SecrecyReport check_secrecy(const ProtocolSpec& spec, SelectionKind kind) {
  const VerificationContext ctx = spec.context();
  const auto roles = project_generalized_roles(spec);
  const PatternSet patterns = encryption_patterns(roles);

  SecrecyReport report;
  report.protocol = spec.name;
  report.function = kind;
  report.notes.push_back("variables of sent templates are analyzed as opaque blocks");

  for (const auto& role : roles) {
    for (std::size_t i = 0; i < role.events.size(); ++i) {
      const RoleEvent& ev = role.events[i];
      if (ev.direction != Direction::Send) continue;
      const std::vector<Term> history = role.history(i);

      std::vector<std::pair<Term, AtomOrVarBinding>> items;
      for (const Term& a : atoms(ev.templ)) items.emplace_back(a, StaticAtom{a});
      for (const Term& v : non_key_variables(ev.templ)) {
        items.emplace_back(v, VarBlock{v, std::nullopt});
        if (keep_collides(v, ev.templ)) {
          report.notes.push_back("role " + role.role_id + " step " + std::to_string(ev.step) + ": " +
                                 v.str() + " also occurs as a key");
        }
      }

      for (const auto& [item, binding] : items) {
        SecrecyResult r;
        r.role = role.role_id;
        r.step = ev.step;
        r.item = item.str();
        r.variable = item.is_variable();
        r.reception = SecurityLevel::top();
        for (const Term& past : history) {
          if (!contains(past, item)) continue;
          r.reception = meet(r.reception, derived_level(kind, binding, past, ctx));
        }
        r.context = context_level(ctx, item);
        r.rhs = meet(r.context, r.reception);
        r.lower = lower_bound(kind, binding, ev.templ, patterns, ctx);
        r.upper = upper_bound(kind, binding, ev.templ, ctx);
        r.pass = leq(r.rhs, r.lower);
        report.overall = report.overall && r.pass;
        report.results.push_back(std::move(r));
      }
    }
  }
  std::stable_sort(report.results.begin(), report.results.end(), [](const auto& a, const auto& b) {
    return std::tie(a.role, a.step, a.item) < std::tie(b.role, b.step, b.item);
  });
  return report;
}

AuthReport check_authentication(const ProtocolSpec& spec, SelectionKind kind, const AuthQuery& q) {
  const VerificationContext ctx = spec.context();
  if (!ctx.declared(q.secret)) throw QueryError("secret '" + q.secret + "' is not a declared atom");
  const auto roles = project_generalized_roles(spec);
  const GeneralizedRole* role = nullptr;
  for (const auto& r : roles) {
    if (r.principal == q.authenticator) role = &r;
  }
  if (!role) throw QueryError("'" + q.authenticator + "' has no role in protocol " + spec.name);
  const RoleEvent* event = nullptr;
  for (const auto& ev : role->events) {
    if (ev.step == q.step && ev.direction == Direction::Receive) event = &ev;
  }
  if (!event) {
    throw QueryError("step " + std::to_string(q.step) + " is not a receive of " + q.authenticator);
  }

  const Term secret = ctx.atom(q.secret);
  std::optional<AtomOrVarBinding> binding;
  AuthReport out;
  out.query = q;
  if (non_key_atoms(event->templ).count(secret)) {
    binding = StaticAtom{secret};
    out.located_at = secret.str();
  } else {
    for (const Term& v : non_key_variables(event->templ)) {
      const Term* honest = role->honest_binding.find(v.name());
      if (honest && atoms(*honest).count(secret)) {
        binding = VarBlock{v, ctx.level(secret)};
        out.located_at = v.str();
        break;
      }
    }
  }
  if (!binding) {
    throw QueryError("secret '" + q.secret + "' does not occur in step " + std::to_string(q.step) +
                     " as received by " + q.authenticator);
  }
  out.upper = upper_bound(kind, *binding, event->templ, ctx);
  out.membership_ok = out.upper.contains(q.authenticatee);
  out.secrecy_ok = check_secrecy(spec, kind).overall;
  out.pass = out.secrecy_ok && out.membership_ok;
  return out;
}

}  // namespace witness
