#include "witness/intruder.hpp"

#include <map>

namespace witness {

namespace {

Term inverse_term(const Term& key, const VerificationContext& ctx) {
  const std::string& k = key.name();
  const std::string inv = ctx.is_key(k) ? ctx.inverse(k) : k;
  if (inv == k) return key;
  return Term::atom(inv, ctx.declared(inv) ? ctx.kind_of(inv) : AtomKind::Key);
}

}  // namespace

Knowledge saturate(const Knowledge& m, const VerificationContext& ctx) {
  Knowledge out;
  std::vector<Term> work;
  std::vector<Term> locked;
  auto add = [&](const Term& t) {
    if (out.insert(t).second) work.push_back(t);
  };
  for (const Term& t : m) add(t);
  while (true) {
    while (!work.empty()) {
      Term t = work.back();
      work.pop_back();
      if (t.is_pair()) {
        add(t.left());
        add(t.right());
      } else if (t.is_enc() && t.key().is_atom()) {
        locked.push_back(t);
      }
    }
    bool progress = false;
    for (auto it = locked.begin(); it != locked.end();) {
      if (out.count(inverse_term(it->key(), ctx))) {
        add(it->body());
        it = locked.erase(it);
        progress = true;
      } else {
        ++it;
      }
    }
    if (!progress) break;
  }
  return out;
}

bool derives_saturated(const Knowledge& saturated, const Term& t) {
  if (saturated.count(t)) return true;
  switch (t.kind()) {
    case TermKind::Pair:
      return derives_saturated(saturated, t.left()) && derives_saturated(saturated, t.right());
    case TermKind::Hash:
      return derives_saturated(saturated, t.body());
    case TermKind::Enc:
      return t.key().is_atom() && t.key().atom_kind() == AtomKind::Key && saturated.count(t.key()) &&
             derives_saturated(saturated, t.body());
    default:
      return false;
  }
}

bool derives(const Knowledge& m, const Term& t, const VerificationContext& ctx) {
  return derives_saturated(saturate(m, ctx), t);
}

Knowledge derivable_up_to(const Knowledge& m, const VerificationContext& ctx, int max_size) {
  const Knowledge sat = saturate(m, ctx);
  std::vector<std::vector<Term>> by_size(static_cast<std::size_t>(std::max(max_size, 0)) + 1);
  Knowledge out;
  auto keep = [&](const Term& t) {
    if (static_cast<int>(t.size()) <= max_size && out.insert(t).second) by_size[t.size()].push_back(t);
  };
  for (const Term& t : sat) keep(t);
  std::vector<Term> keys;
  for (const Term& t : sat) {
    if (t.is_atom() && t.atom_kind() == AtomKind::Key) keys.push_back(t);
  }
  for (int n = 2; n <= max_size; ++n) {
    for (const Term& b : by_size[n - 1]) keep(Term::hash(b));
    for (int i = 1; i + 1 < n; ++i) {
      const int j = n - 1 - i;
      for (const Term& a : by_size[i]) {
        for (const Term& b : by_size[j]) keep(Term::pair(a, b));
      }
    }
    if (n >= 3) {
      for (const Term& b : by_size[n - 2]) {
        for (const Term& k : keys) keep(Term::enc(b, k));
      }
    }
  }
  return out;
}

Knowledge initial_intruder_knowledge(const ProtocolSpec& spec) {
  const VerificationContext ctx = spec.context();
  Knowledge out;
  for (const std::string& id : ctx.identities()) out.insert(Term::atom(id, AtomKind::Identity));
  for (const std::string& name : ctx.atom_names()) {
    if (ctx.level(name).is_bottom()) out.insert(ctx.atom(name));
  }
  if (auto own = ctx.key_pair_of(spec.intruder)) {
    out.insert(ctx.atom(own->first));
    out.insert(ctx.atom(own->second));
  }
  for (const Term& t : spec.intruder_knows) out.insert(t);
  return out;
}

}  // namespace witness
