#include "witness/derivation.hpp"

#include <stdexcept>

namespace witness {

namespace {

Term strip(const Term& m, const std::string* keep) {
  switch (m.kind()) {
    case TermKind::Variable:
      return keep && m.name() == *keep ? m : Term::epsilon();
    case TermKind::Pair: {
      Term l = strip(m.left(), keep);
      Term r = strip(m.right(), keep);
      if (l.is_epsilon()) return r;
      if (r.is_epsilon()) return l;
      return Term::pair(std::move(l), std::move(r));
    }
    case TermKind::Enc: {
      if (m.key().is_variable()) return Term::epsilon();
      Term b = strip(m.body(), keep);
      if (b.is_epsilon()) return b;
      return Term::enc(std::move(b), m.key());
    }
    case TermKind::Hash: {
      Term b = strip(m.body(), keep);
      if (b.is_epsilon()) return b;
      return Term::hash(std::move(b));
    }
    default:
      return m;
  }
}

}  // namespace

Term derive(const Term& m) { return strip(m, nullptr); }

Term derive_keep(const Term& x, const Term& m) {
  if (!x.is_variable() || !variables(m).count(x)) {
    throw std::invalid_argument("derive_keep: " + x.str() + " is not a variable of " + m.str());
  }
  return strip(m, &x.name());
}

bool keep_collides(const Term& x, const Term& m) {
  return key_position_terms(m).count(x) && non_key_variables(m).count(x);
}

SecurityLevel block_protection(const VarBlock& b, const VerificationContext& ctx) {
  return b.stands_for ? *b.stands_for : ctx.all_identities_level();
}

SecurityLevel derived_level(SelectionKind kind, const AtomOrVarBinding& b, const Term& m,
                            const VerificationContext& ctx) {
  if (const auto* s = std::get_if<StaticAtom>(&b)) {
    return level_of(kind, s->atom, derive(m), ctx);
  }
  const auto& v = std::get<VarBlock>(b);
  if (!variables(m).count(v.var)) return SecurityLevel::top();
  return level_of(kind, v.var, derive_keep(v.var, m), ctx, block_protection(v, ctx));
}

SecurityLevel instance_level(SelectionKind kind, const Term& alpha, const Term& p,
                             const Substitution& sigma, const VerificationContext& ctx) {
  const Term dp = derive(p);
  if (atoms(dp).count(alpha)) return level_of(kind, alpha, dp, ctx);
  SecurityLevel out = SecurityLevel::top();
  const SecurityLevel protection = ctx.level(alpha);
  for (const Term& z : non_key_variables(p)) {
    const Term* image = sigma.find(z.name());
    if (!image || !atoms(*image).count(alpha)) continue;
    out = meet(out, level_of(kind, z, derive_keep(z, p), ctx, protection));
  }
  return out;
}

}  // namespace witness
