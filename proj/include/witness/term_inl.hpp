#pragma once

// Template definitions for term.hpp.

namespace witness {

template <typename Fn>
Term rewrite(const Term& m, Fn&& fn) {
  if (std::optional<Term> replaced = fn(m)) {
    return *replaced;
  }
  switch (m.kind()) {
    case TermKind::Pair: {
      Term l = rewrite(m.left(), fn);
      Term r = rewrite(m.right(), fn);
      return Term::pair(std::move(l), std::move(r));
    }
    case TermKind::Enc: {
      Term b = rewrite(m.body(), fn);
      Term k = rewrite(m.key(), fn);
      return Term::enc(std::move(b), std::move(k));
    }
    case TermKind::Hash:
      return Term::hash(rewrite(m.body(), fn));
    default:
      return m;
  }
}

}  // namespace witness
