#include <algorithm>
#include <random>
#include <set>

#include "doctest.h"
#include "fixtures.hpp"
#include "witness/safefun.hpp"

using namespace fx;

namespace {

const Term alpha = nonce("alpha");
const Term A = id("A"), B = id("B"), C = id("C"), D = id("D"), S = id("S");
const Term kab = key("kab"), kas = key("kas"), kb = key("kb"), kb_inv = key("kb_inv");
const Term nested = enc(pr(C, enc(pr(alpha, D), kas)), kab);

}  // namespace

TEST_CASE("outermost protective key") {
  auto ctx = small_context();
  auto scan = external_protective_key(alpha, nested, ctx);
  CHECK(scan.present);
  REQUIRE(scan.occurrences.size() == 1);
  REQUIRE(scan.occurrences[0]);
  CHECK(scan.occurrences[0]->key == kab);
  CHECK(scan.occurrences[0]->protected_subterm == nested);

  auto plain = external_protective_key(alpha, pr(alpha, B), ctx);
  REQUIRE(plain.occurrences.size() == 1);
  CHECK_FALSE(plain.occurrences[0]);

  CHECK_FALSE(external_protective_key(alpha, pr(B, C), ctx).present);
}

TEST_CASE("a public key protects only public data") {
  auto ctx = small_context();
  ctx.declare_key_pair("kp", "kp_inv", SecurityLevel::bottom());
  ctx.declare_atom("pub", AtomKind::Payload, SecurityLevel::bottom());
  CHECK_FALSE(external_protective_key(alpha, enc(alpha, key("kp")), ctx).occurrences[0]);
  CHECK(external_protective_key(Term::atom("pub", AtomKind::Payload),
                                enc(Term::atom("pub", AtomKind::Payload), key("kp")), ctx)
            .occurrences[0]);
}

TEST_CASE("inner key is used when the outer one does not protect") {
  auto ctx = small_context();
  ctx.declare_key_pair("kc", "kc_inv", SecurityLevel::known({"C", "D"}));
  // {C,D} is not above {A,B,S}; kas {A,S} is.
  Term m = enc(pr(C, enc(pr(alpha, D), kas)), key("kc"));
  CHECK(external_protective_key(alpha, m, ctx).occurrences[0]->key == kas);
  CHECK(select(SelectionKind::Max, alpha, m, ctx) == Selection::chosen({D, kas}));
}

TEST_CASE("selections on the nested worked case") {
  auto ctx = small_context();
  CHECK(select(SelectionKind::Max, alpha, nested, ctx) == Selection::chosen({C, D, kab}));
  CHECK(select(SelectionKind::EK, alpha, nested, ctx) == Selection::chosen({kab}));
  CHECK(select(SelectionKind::N, alpha, nested, ctx) == Selection::chosen({C, D}));
  CHECK(select(SelectionKind::Max, alpha, pr(alpha, B), ctx).bottom);
  CHECK(select(SelectionKind::Max, alpha, pr(B, C), ctx) == Selection::chosen({}));
}

TEST_CASE("morphism") {
  auto ctx = small_context();
  CHECK(apply_morphism(Selection::chosen({C, D, kab}), ctx) == SecurityLevel::known({"A", "B", "C", "D"}));
  CHECK(apply_morphism(Selection::chosen({}), ctx).is_top());
  CHECK(apply_morphism(Selection::bottom_sel(), ctx).is_bottom());
  CHECK(apply_morphism(Selection::chosen({kb_inv}), ctx) == SecurityLevel::known({"B"}));
}

TEST_CASE("level_of") {
  auto ctx = small_context();
  CHECK(level_of(SelectionKind::Max, alpha, nested, ctx) == SecurityLevel::known({"A", "B", "C", "D"}));
  CHECK(level_of(SelectionKind::EK, alpha, nested, ctx) == SecurityLevel::known({"A", "B"}));
  CHECK(level_of(SelectionKind::N, alpha, nested, ctx) == SecurityLevel::known({"C", "D"}));
  CHECK(level_of(SelectionKind::Max, alpha, pr(B, C), ctx).is_top());
  CHECK(level_of(SelectionKind::Max, alpha, pr(alpha, B), ctx).is_bottom());
}

TEST_CASE("level_of_set") {
  auto ctx = small_context();
  CHECK(level_of_set(SelectionKind::Max, alpha, {alpha}, ctx).is_bottom());
  CHECK(level_of_set(SelectionKind::Max, alpha, {}, ctx).is_top());
  Term a = enc(tup({alpha, C}), kab), b = enc(tup({alpha, S}), kab);
  CHECK(level_of_set(SelectionKind::Max, alpha, {a, b}, ctx) ==
        meet(level_of(SelectionKind::Max, alpha, a, ctx), level_of(SelectionKind::Max, alpha, b, ctx)));
  auto f = make_level_function(SelectionKind::EK, ctx);
  CHECK(level_of_set(f, alpha, {a, b}) == SecurityLevel::known({"A", "B"}));
}

TEST_CASE("multiple occurrences combine by union") {
  auto ctx = small_context();
  Term m = pr(enc(pr(alpha, C), kab), enc(pr(alpha, D), kas));
  CHECK(select(SelectionKind::Max, alpha, m, ctx) == Selection::chosen({C, D, kab, kas}));
  Term exposed = pr(enc(pr(alpha, C), kab), alpha);
  CHECK(select(SelectionKind::Max, alpha, exposed, ctx).bottom);
}

TEST_CASE("key slots are not exposures") {
  auto ctx = small_context();
  CHECK(level_of(SelectionKind::Max, kab, enc(alpha, kab), ctx).is_top());
}

TEST_CASE("variable key never protects") {
  auto ctx = small_context();
  CHECK(level_of(SelectionKind::Max, alpha, enc(alpha, var("K")), ctx).is_bottom());
}

TEST_CASE("EK selection is included in MAX selection") {
  auto ctx = small_context();
  TermGen g(9);
  g.leaves = {alpha, A, B, C, nonce("n")};
  g.keys = {kab, kas, kb, kb_inv};
  g.var_rate = 0;
  for (int i = 0; i < 2000; ++i) {
    Term m = g.gen(3);
    Selection mx = select(SelectionKind::Max, alpha, m, ctx);
    Selection ek = select(SelectionKind::EK, alpha, m, ctx);
    Selection n = select(SelectionKind::N, alpha, m, ctx);
    CHECK(mx.bottom == ek.bottom);
    CHECK(mx.bottom == n.bottom);
    if (!mx.bottom) {
      for (const Term& t : ek.items) CHECK(mx.items.count(t));
      for (const Term& t : n.items) CHECK(mx.items.count(t));
      CHECK_FALSE(mx.items.count(alpha));
      CHECK(leq(level_of(SelectionKind::Max, alpha, m, ctx), level_of(SelectionKind::EK, alpha, m, ctx)));
    }
  }
}

TEST_CASE("adding a message never raises the level") {
  auto ctx = small_context();
  TermGen g(13);
  g.leaves = {alpha, A, B, C};
  g.keys = {kab, kas, kb, kb_inv};
  g.var_rate = 0;
  for (SelectionKind k : {SelectionKind::Max, SelectionKind::EK, SelectionKind::N}) {
    for (int i = 0; i < 500; ++i) {
      std::vector<Term> msgs = {g.gen(3), g.gen(3)};
      SecurityLevel before = level_of_set(k, alpha, msgs, ctx);
      msgs.push_back(g.gen(3));
      CHECK(leq(level_of_set(k, alpha, msgs, ctx), before));
    }
  }
}

TEST_CASE("kind names") {
  CHECK(parse_selection_kind("max") == SelectionKind::Max);
  CHECK(parse_selection_kind("ek") == SelectionKind::EK);
  CHECK(parse_selection_kind("n") == SelectionKind::N);
  CHECK_THROWS_AS(parse_selection_kind("foo"), std::invalid_argument);
  CHECK(to_string(SelectionKind::EK) == "ek");
}

namespace {

// Independent path-based evaluation of F.
void enclosing_paths(const Term& t, const Term& target, std::vector<Term>& path,
                     std::vector<std::vector<Term>>& out) {
  if (t == target) {
    out.push_back(path);
    return;
  }
  if (t.is_pair()) {
    enclosing_paths(t.left(), target, path, out);
    enclosing_paths(t.right(), target, path, out);
  } else if (t.is_hash()) {
    enclosing_paths(t.body(), target, path, out);
  } else if (t.is_enc()) {
    path.push_back(t);
    enclosing_paths(t.body(), target, path, out);
    path.pop_back();
  }
}

void identity_names(const Term& t, const Term& skip, std::set<std::string>& out) {
  if (t.is_atom() && t.atom_kind() == AtomKind::Identity && t != skip) out.insert(t.name());
  if (t.is_pair()) {
    identity_names(t.left(), skip, out);
    identity_names(t.right(), skip, out);
  } else if (t.is_enc() || t.is_hash()) {
    identity_names(t.body(), skip, out);
  }
}

SecurityLevel oracle_level(SelectionKind kind, const Term& a, const Term& m, const VerificationContext& ctx) {
  std::vector<Term> path;
  std::vector<std::vector<Term>> paths;
  enclosing_paths(m, a, path, paths);
  const SecurityLevel la = ctx.level(a);
  std::set<std::string> ids;
  for (const auto& p : paths) {
    const Term* chosen = nullptr;
    std::string inv;
    for (const Term& e : p) {
      if (!e.key().is_atom()) continue;
      inv = ctx.inverse(e.key().name());
      SecurityLevel li = ctx.level(inv);
      if (li.is_bottom()) {
        if (la.is_bottom()) { chosen = &e; break; }
        continue;
      }
      bool subset = la.is_bottom() ||
                    std::includes(la.ids().begin(), la.ids().end(), li.ids().begin(), li.ids().end());
      if (subset) { chosen = &e; break; }
    }
    if (!chosen) return SecurityLevel::bottom();
    SecurityLevel li = ctx.level(inv);
    if (kind != SelectionKind::EK) identity_names(*chosen, a, ids);
    if (kind != SelectionKind::N) {
      if (li.is_bottom()) return SecurityLevel::bottom();
      ids.insert(li.ids().begin(), li.ids().end());
    }
  }
  return SecurityLevel::known(ids);
}

}  // namespace

TEST_CASE("level_of matches a path-based oracle") {
  auto ctx = small_context();
  ctx.declare_key_pair("kc", "kc_inv", SecurityLevel::known({"C", "D"}));
  ctx.declare_key_pair("kp", "kp_inv", SecurityLevel::bottom());
  TermGen g(21);
  g.leaves = {alpha, A, B, C, D, nonce("n")};
  g.keys = {kab, kas, kb, kb_inv, key("kc"), key("kp"), key("kp_inv")};
  g.var_rate = 0;
  int non_trivial = 0;
  for (SelectionKind k : {SelectionKind::Max, SelectionKind::EK, SelectionKind::N}) {
    for (int i = 0; i < 2000; ++i) {
      Term m = g.gen(4);
      SecurityLevel got = level_of(k, alpha, m, ctx);
      CHECK_MESSAGE(got == oracle_level(k, alpha, m, ctx), m.str());
      if (!got.is_bottom() && !got.is_top()) ++non_trivial;
    }
  }
  CHECK(non_trivial > 100);
}
