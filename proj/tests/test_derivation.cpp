#include "doctest.h"
#include "fixtures.hpp"
#include "witness/derivation.hpp"

using namespace fx;

namespace {

const Term alpha = nonce("alpha");
const Term A = id("A"), C = id("C"), S = id("S");
const Term kab = key("kab");
const Term X = var("X"), Y = var("Y"), K = var("K");
const Term m1 = enc(tup({alpha, C, X}), kab);
const Term m2 = enc(tup({alpha, Y, S}), kab);

// Removes exactly the named variables, key slots untouched unless named.
Term remove_vars(const Term& m, const TermSet& drop) {
  switch (m.kind()) {
    case TermKind::Variable:
      return drop.count(m) ? Term::epsilon() : m;
    case TermKind::Pair: {
      Term l = remove_vars(m.left(), drop), r = remove_vars(m.right(), drop);
      if (l.is_epsilon()) return r;
      if (r.is_epsilon()) return l;
      return Term::pair(l, r);
    }
    case TermKind::Enc: {
      Term k = remove_vars(m.key(), drop);
      Term b = remove_vars(m.body(), drop);
      if (k.is_epsilon() || b.is_epsilon()) return Term::epsilon();
      return Term::enc(b, k);
    }
    case TermKind::Hash: {
      Term b = remove_vars(m.body(), drop);
      return b.is_epsilon() ? b : Term::hash(b);
    }
    default:
      return m;
  }
}

Term drop_key_slots(const Term& m) {
  return rewrite(m, [](const Term& t) -> std::optional<Term> {
    if (t.is_enc()) {
      if (t.key().is_variable()) return Term::epsilon();
      Term b = drop_key_slots(t.body());
      return b.is_epsilon() ? b : Term::enc(b, t.key());
    }
    if (t.is_pair()) {
      Term l = drop_key_slots(t.left()), r = drop_key_slots(t.right());
      if (l.is_epsilon()) return r;
      if (r.is_epsilon()) return l;
      return Term::pair(l, r);
    }
    if (t.is_hash()) {
      Term b = drop_key_slots(t.body());
      return b.is_epsilon() ? b : Term::hash(b);
    }
    return t;
  });
}

}  // namespace

TEST_CASE("derive removes variables") {
  CHECK(derive(m1) == enc(pr(alpha, C), kab));
  CHECK(derive(enc(pr(alpha, C), kab)) == enc(pr(alpha, C), kab));
  CHECK(derive(X).is_epsilon());
  CHECK(derive(enc(X, kab)).is_epsilon());
  CHECK(derive(hsh(X)).is_epsilon());
  CHECK(derive(pr(enc(alpha, K), C)) == C);
}

TEST_CASE("derive_keep keeps one variable") {
  CHECK(derive_keep(X, m1) == m1);
  CHECK(derive_keep(X, enc(pr(X, Y), kab)) == enc(X, kab));
  CHECK(derive_keep(X, pr(enc(alpha, K), X)) == X);
  CHECK(derive_keep(X, pr(enc(alpha, X), X)) == X);
  CHECK(keep_collides(X, pr(enc(alpha, X), X)));
  CHECK_FALSE(keep_collides(X, m1));
  CHECK_THROWS_AS(derive_keep(Y, m1), std::invalid_argument);
}

TEST_CASE("derivation laws on random terms") {
  TermGen g(17);
  g.leaves = {alpha, A, C};
  for (int i = 0; i < 2000; ++i) {
    Term m = g.gen(4);
    Term d = derive(m);
    CHECK(derive(d) == d);
    CHECK(variables(d).empty());
    if (m.is_ground()) CHECK(d == m);
    CHECK(d == remove_vars(m, variables(m)));
    TermSet vs = variables(m);
    if (vs.size() >= 2) {
      auto it = vs.begin();
      TermSet first{*it}, rest(std::next(it), vs.end());
      CHECK(remove_vars(remove_vars(m, first), rest) == d);
      CHECK(remove_vars(remove_vars(m, rest), first) == d);
    }
    for (const Term& x : vs) {
      Term k = derive_keep(x, m);
      TermSet others = vs;
      others.erase(x);
      // Key slots first, then the other variables; the order does not matter.
      CHECK(k == remove_vars(drop_key_slots(m), others));
      CHECK(k == drop_key_slots(remove_vars(m, others)));
      CHECK(derive(k) == d);
      CHECK(variables(k).size() <= 1);
    }
  }
}

TEST_CASE("derived level on patterns with unknown parts") {
  auto ctx = small_context();
  CHECK(derived_level(SelectionKind::Max, StaticAtom{alpha}, m1, ctx) == SecurityLevel::known({"A", "B", "C"}));
  CHECK(derived_level(SelectionKind::Max, StaticAtom{alpha}, m2, ctx) == SecurityLevel::known({"A", "B", "S"}));
  CHECK(derived_level(SelectionKind::Max, VarBlock{X, std::nullopt}, m1, ctx) ==
        SecurityLevel::known({"A", "B", "C"}));
  CHECK(derived_level(SelectionKind::EK, VarBlock{X, std::nullopt}, m1, ctx) == SecurityLevel::known({"A", "B"}));
  CHECK(derived_level(SelectionKind::Max, StaticAtom{alpha}, pr(C, S), ctx).is_top());
  CHECK(derived_level(SelectionKind::Max, VarBlock{Y, std::nullopt}, m1, ctx).is_top());
}

TEST_CASE("derived level of a ground message is level_of") {
  auto ctx = small_context();
  TermGen g(23);
  g.leaves = {alpha, A, C, S};
  g.keys = {kab, key("kas"), key("kb"), key("kb_inv")};
  g.var_rate = 0;
  for (int i = 0; i < 500; ++i) {
    Term m = g.gen(3);
    for (SelectionKind k : {SelectionKind::Max, SelectionKind::EK, SelectionKind::N}) {
      CHECK(derived_level(k, StaticAtom{alpha}, m, ctx) == level_of(k, alpha, m, ctx));
    }
  }
}

TEST_CASE("instance level picks the case from the substitution") {
  auto ctx = small_context();
  Substitution to_s;
  to_s.bind("X", S);
  CHECK(instance_level(SelectionKind::Max, alpha, m1, to_s, ctx) == SecurityLevel::known({"A", "B", "C"}));

  Term p = enc(pr(Y, X), kab);
  Substitution carry;
  carry.bind("X", alpha);
  carry.bind("Y", C);
  // α only arrives through X: evaluated as the block {X}_kab.
  CHECK(instance_level(SelectionKind::Max, alpha, p, carry, ctx) == SecurityLevel::known({"A", "B"}));

  Substitution none;
  none.bind("X", C);
  none.bind("Y", C);
  CHECK(instance_level(SelectionKind::Max, alpha, p, none, ctx).is_top());
}
