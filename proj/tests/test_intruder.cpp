#include "doctest.h"
#include "fixtures.hpp"
#include "mutants.hpp"
#include "witness/intruder.hpp"

using namespace fx;

namespace {

Knowledge ks(std::initializer_list<Term> ts) { return Knowledge(ts); }

/// Naive closure: repeat every analysis rule over the whole set until
/// nothing changes.
Knowledge naive_closure(Knowledge k, const VerificationContext& ctx) {
  bool changed = true;
  while (changed) {
    changed = false;
    for (const Term& t : Knowledge(k)) {
      std::vector<Term> add;
      if (t.is_pair()) add = {t.left(), t.right()};
      if (t.is_enc() && t.key().is_atom()) {
        const std::string& n = t.key().name();
        const std::string inv = ctx.is_key(n) ? ctx.inverse(n) : n;
        for (const Term& have : k) {
          if (have.is_atom() && have.name() == inv) add = {t.body()};
        }
      }
      for (const Term& a : add) changed = k.insert(a).second || changed;
    }
  }
  return k;
}

bool naive_derives(const Knowledge& closed, const Term& t) {
  if (closed.count(t)) return true;
  if (t.is_pair()) return naive_derives(closed, t.left()) && naive_derives(closed, t.right());
  if (t.is_hash()) return naive_derives(closed, t.body());
  if (t.is_enc()) {
    return t.key().is_atom() && t.key().atom_kind() == AtomKind::Key && closed.count(t.key()) &&
           naive_derives(closed, t.body());
  }
  return false;
}

}  // namespace

TEST_CASE("saturation") {
  auto ctx = small_context();
  Term n = nonce("n");
  CHECK(saturate(ks({enc(n, key("kb")), key("kb_inv")}), ctx).count(n));
  CHECK(saturate(ks({enc(n, key("kb"))}), ctx) == ks({enc(n, key("kb"))}));
  Term inner = enc(nonce("b"), key("kab"));
  auto s = saturate(ks({pr(nonce("a"), inner), key("kab")}), ctx);
  CHECK(s.count(nonce("a")));
  CHECK(s.count(inner));
  CHECK(s.count(nonce("b")));
  // Keys learned late still open earlier ciphertexts.
  auto late = saturate(ks({enc(n, key("kab")), enc(key("kab"), key("kas")), key("kas")}), ctx);
  CHECK(late.count(n));
  CHECK_FALSE(saturate(ks({hsh(n)}), ctx).count(n));
}

TEST_CASE("derivability") {
  auto ctx = small_context();
  Term a = nonce("a");
  CHECK(derives(ks({a, key("kb")}), enc(pr(a, a), key("kb")), ctx));
  CHECK_FALSE(derives(ks({hsh(a)}), a, ctx));
  CHECK_FALSE(derives(ks({a}), enc(a, a), ctx));
  CHECK(derives(ks({a}), hsh(hsh(a)), ctx));

  // Last message of the man-in-the-middle run, encrypted for the intruder.
  VerificationContext ns = load_builtin("ns_flawed").context();
  Knowledge k = ks({id("A"), id("B"), id("I"), key("ka"), key("kb"), key("ki"), key("ki_inv")});
  k.insert(enc(tup({nonce("Nb"), id("B"), nonce("Na"), id("A")}), key("ki")));
  CHECK(derives(k, nonce("Nb"), ns));
  CHECK_FALSE(derives(k, key("kb_inv"), ns));
}

TEST_CASE("bounded enumeration") {
  auto ctx = small_context();
  Term a = nonce("a");
  CHECK(derivable_up_to(ks({a}), ctx, 3) == ks({a, hsh(a), hsh(hsh(a)), pr(a, a)}));
  CHECK(derivable_up_to(ks({a, enc(a, key("kb"))}), ctx, 1) == ks({a}));
  CHECK(derivable_up_to({}, ctx, 4).empty());
  auto with_key = derivable_up_to(ks({key("kab")}), ctx, 3);
  CHECK(with_key.count(enc(key("kab"), key("kab"))));
  for (const Term& t : derivable_up_to(ks({a, key("kab"), id("C")}), ctx, 4)) {
    CHECK(t.size() <= 4);
    CHECK(t.is_ground());
  }
}

TEST_CASE("saturation is monotone and idempotent and matches a naive closure") {
  auto ctx = small_context();
  TermGen g(11);
  g.leaves = {id("A"), id("C"), nonce("n"), nonce("alpha"), key("kab"), key("kb_inv")};
  g.keys = {key("kab"), key("kas"), key("kb"), key("kb_inv")};
  g.var_rate = 0;
  for (int i = 0; i < 300; ++i) {
    Knowledge k;
    for (int j = 0; j < 4; ++j) k.insert(g.gen(3));
    auto s = saturate(k, ctx);
    CHECK(saturate(s, ctx) == s);
    CHECK(std::includes(s.begin(), s.end(), k.begin(), k.end()));
    CHECK(s == naive_closure(k, ctx));
    Knowledge more = k;
    more.insert(g.gen(2));
    auto s2 = saturate(more, ctx);
    CHECK(std::includes(s2.begin(), s2.end(), s.begin(), s.end()));
  }
}

TEST_CASE("derives agrees with bounded enumeration") {
  auto ctx = small_context();
  TermGen g(3);
  g.leaves = {id("A"), id("C"), nonce("n"), key("kab"), key("kb")};
  g.keys = {key("kab"), key("kb")};
  g.var_rate = 0;
  int disagreements = 0;
  int positive = 0;
  for (int i = 0; i < 200; ++i) {
    Knowledge k;
    for (int j = 0; j < 3; ++j) k.insert(g.gen(2));
    Term probe = g.gen(2);
    while (probe.size() > 4) probe = g.gen(2);
    auto all = derivable_up_to(k, ctx, 4);
    const bool a = derives(k, probe, ctx);
    const bool b = all.count(probe) != 0;
    const bool c = naive_derives(naive_closure(k, ctx), probe);
    disagreements += (a != b) + (a != c);
    positive += a;
  }
  CHECK(disagreements == 0);
  CHECK(positive > 20);
}

TEST_CASE("well-formedness probe") {
  for (const auto& name : builtin_names()) {
    auto ctx = load_builtin(name).context();
    for (auto kind : {SelectionKind::Max, SelectionKind::EK, SelectionKind::N}) {
      CHECK(probe_well_formedness(kind, ctx, 300, 5).empty());
    }
  }
  // A function that never returns Bottom breaks the clear-atom law.
  auto ctx = small_context();
  LevelFunction constant = [](const Term&, const Term&) { return SecurityLevel::known({"A"}); };
  auto v = probe_well_formedness(constant, ctx, 20, 1);
  CHECK_FALSE(v.empty());
  CHECK(v.front().law == "clear-atom");
}

TEST_CASE("full-invariance probe") {
  std::vector<ProtocolSpec> corpus;
  for (const auto& name : builtin_names()) corpus.push_back(load_builtin(name));
  for (auto kind : {SelectionKind::Max, SelectionKind::EK, SelectionKind::N}) {
    auto summary = probe_full_invariance_random(
        corpus, [kind](const VerificationContext& c) { return make_level_function(kind, c); }, 20, 4, 17);
    CHECK(summary.scenarios == 60);
    CHECK(summary.messages_checked > 1000);
    const std::string first = summary.violations.empty() ? "" : summary.violations.front().message.str();
    CHECK_MESSAGE(summary.violations.empty(), first);
  }
  auto mutant = probe_full_invariance_random(corpus, every_key_protects, 20, 4, 17);
  CHECK_FALSE(mutant.violations.empty());

  auto serial = probe_full_invariance_random(corpus, every_key_protects, 20, 4, 17, false);
  CHECK(serial.violations.size() == mutant.violations.size());
  CHECK(serial.messages_checked == mutant.messages_checked);

  // An atom the intruder may know never counts.
  auto ctx = small_context();
  ctx.declare_atom("pub", AtomKind::Nonce, SecurityLevel::known({"A", "I"}));
  CHECK(probe_full_invariance(every_key_protects(ctx), ctx, ks({nonce("pub")}), 4).empty());
}
