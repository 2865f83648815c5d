#include "witness/safefun.hpp"

#include <stdexcept>
#include <string>

namespace witness {

std::string_view to_string(SelectionKind kind) {
  switch (kind) {
    case SelectionKind::Max: return "max";
    case SelectionKind::EK: return "ek";
    case SelectionKind::N: return "n";
  }
  return "max";
}

SelectionKind parse_selection_kind(std::string_view text) {
  if (text == "max") return SelectionKind::Max;
  if (text == "ek") return SelectionKind::EK;
  if (text == "n") return SelectionKind::N;
  throw std::invalid_argument("unknown function kind '" + std::string(text) + "' (max|ek|n)");
}

Selection merge(const Selection& a, const Selection& b) {
  if (a.bottom || b.bottom) return Selection::bottom_sel();
  TermSet items = a.items;
  items.insert(b.items.begin(), b.items.end());
  return Selection::chosen(std::move(items));
}

namespace {

// Atoms used as keys without a key declaration act as symmetric keys.
std::string inverse_name(const std::string& key, const VerificationContext& ctx) {
  return ctx.is_key(key) ? ctx.inverse(key) : key;
}

bool protects(const Term& key, const SecurityLevel& protection, const VerificationContext& ctx) {
  // A variable key has no known inverse.
  if (!key.is_atom()) return false;
  return leq(protection, ctx.level(inverse_name(key.name(), ctx)));
}

void scan(const Term& target, const Term& m, const VerificationContext& ctx,
          const SecurityLevel& protection, const std::optional<ProtectiveKey>& enclosing,
          ProtectionScan& out) {
  if (m == target) {
    out.present = true;
    out.occurrences.push_back(enclosing);
    return;
  }
  switch (m.kind()) {
    case TermKind::Pair:
      scan(target, m.left(), ctx, protection, enclosing, out);
      scan(target, m.right(), ctx, protection, enclosing, out);
      break;
    case TermKind::Hash:
      scan(target, m.body(), ctx, protection, enclosing, out);
      break;
    case TermKind::Enc:
      if (!enclosing && contains(m.body(), target) && protects(m.key(), protection, ctx)) {
        scan(target, m.body(), ctx, protection, ProtectiveKey{m.key(), m}, out);
      } else {
        scan(target, m.body(), ctx, protection, enclosing, out);
      }
      // Key-slot occurrences do not expose the key.
      if (m.key() == target) out.present = true;
      break;
    default:
      break;
  }
}

TermSet identities_in(const Term& m, const Term& excluded) {
  TermSet out;
  for (const Term& a : atoms(m)) {
    if (a.atom_kind() == AtomKind::Identity && a != excluded) out.insert(a);
  }
  return out;
}

}  // namespace

ProtectionScan external_protective_key(const Term& target, const Term& m,
                                       const VerificationContext& ctx,
                                       const SecurityLevel& protection) {
  ProtectionScan out;
  scan(target, m, ctx, protection, std::nullopt, out);
  return out;
}

ProtectionScan external_protective_key(const Term& target, const Term& m,
                                       const VerificationContext& ctx) {
  return external_protective_key(target, m, ctx, ctx.level(target));
}

Selection select(SelectionKind kind, const Term& target, const Term& m,
                 const VerificationContext& ctx, const SecurityLevel& protection) {
  ProtectionScan found = external_protective_key(target, m, ctx, protection);
  Selection sel = Selection::chosen({});
  for (const auto& occ : found.occurrences) {
    if (!occ) return Selection::bottom_sel();
    TermSet items;
    const Term inverse = ctx.atom(inverse_name(occ->key.name(), ctx));
    switch (kind) {
      case SelectionKind::Max:
        items = identities_in(occ->protected_subterm, target);
        items.insert(inverse);
        break;
      case SelectionKind::EK:
        items.insert(inverse);
        break;
      case SelectionKind::N:
        items = identities_in(occ->protected_subterm, target);
        break;
    }
    sel = merge(sel, Selection::chosen(std::move(items)));
  }
  return sel;
}

Selection select(SelectionKind kind, const Term& target, const Term& m,
                 const VerificationContext& ctx) {
  return select(kind, target, m, ctx, ctx.level(target));
}

SecurityLevel apply_morphism(const Selection& sel, const VerificationContext& ctx) {
  if (sel.bottom) return SecurityLevel::bottom();
  SecurityLevel out = SecurityLevel::top();
  for (const Term& item : sel.items) {
    if (item.atom_kind() == AtomKind::Key) {
      out = meet(out, ctx.level(item.name()));
    } else {
      // Identities and any other atom stand for their own name.
      out = meet(out, SecurityLevel::known({item.name()}));
    }
  }
  return out;
}

SecurityLevel level_of(SelectionKind kind, const Term& target, const Term& m,
                       const VerificationContext& ctx, const SecurityLevel& protection) {
  return apply_morphism(select(kind, target, m, ctx, protection), ctx);
}

SecurityLevel level_of(SelectionKind kind, const Term& target, const Term& m,
                       const VerificationContext& ctx) {
  return level_of(kind, target, m, ctx, ctx.level(target));
}

SecurityLevel level_of_set(SelectionKind kind, const Term& target, const std::vector<Term>& messages,
                           const VerificationContext& ctx) {
  SecurityLevel out = SecurityLevel::top();
  for (const Term& m : messages) {
    out = meet(out, level_of(kind, target, m, ctx));
    if (out.is_bottom()) break;
  }
  return out;
}

LevelFunction make_level_function(SelectionKind kind, const VerificationContext& ctx) {
  return [kind, &ctx](const Term& alpha, const Term& m) { return level_of(kind, alpha, m, ctx); };
}

SecurityLevel level_of_set(const LevelFunction& f, const Term& target,
                           const std::vector<Term>& messages) {
  SecurityLevel out = SecurityLevel::top();
  for (const Term& m : messages) {
    out = meet(out, f(target, m));
    if (out.is_bottom()) break;
  }
  return out;
}

}  // namespace witness
