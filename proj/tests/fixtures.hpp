#pragma once

#include <random>
#include <vector>

#include "doctest.h"
#include "witness/context.hpp"
#include "witness/term.hpp"

namespace doctest {
template <>
struct StringMaker<witness::Term> {
  static String convert(const witness::Term& t) { return t.str().c_str(); }
};
template <>
struct StringMaker<witness::SecurityLevel> {
  static String convert(const witness::SecurityLevel& l) { return l.str().c_str(); }
};
}  // namespace doctest

namespace fx {

using namespace witness;

inline Term id(const char* n) { return Term::atom(n, AtomKind::Identity); }
inline Term nonce(const char* n) { return Term::atom(n, AtomKind::Nonce); }
inline Term key(const char* n) { return Term::atom(n, AtomKind::Key); }
inline Term var(const char* n) { return Term::variable(n); }
inline Term pr(Term a, Term b) { return Term::pair(std::move(a), std::move(b)); }
inline Term tup(std::vector<Term> parts) { return Term::tuple(parts); }
inline Term enc(Term b, Term k) { return Term::enc(std::move(b), std::move(k)); }
inline Term hsh(Term b) { return Term::hash(std::move(b)); }

/// Identities A B C D S; secret `alpha` known to {A,B,S}; shared keys
/// kab {A,B} and kas {A,S}; public key kb with private kb_inv {B}.
inline VerificationContext small_context() {
  VerificationContext ctx;
  for (const char* p : {"A", "B", "C", "D", "S"}) ctx.declare_identity(p);
  ctx.declare_identity("I");
  ctx.set_intruder("I");
  ctx.declare_atom("alpha", AtomKind::Nonce, SecurityLevel::known({"A", "B", "S"}), "A");
  ctx.declare_atom("n", AtomKind::Nonce, SecurityLevel::known({"A", "B"}), "A");
  ctx.declare_key_pair("kab", "kab", SecurityLevel::known({"A", "B"}));
  ctx.declare_key_pair("kas", "kas", SecurityLevel::known({"A", "S"}));
  ctx.declare_key_pair("kb", "kb_inv", SecurityLevel::known({"B"}));
  return ctx;
}

/// Small random terms over a fixed alphabet; used by property tests.
class TermGen {
 public:
  explicit TermGen(unsigned seed) : rng_(seed) {}

  std::vector<Term> leaves = {id("A"), id("B"), nonce("n"), nonce("m")};
  std::vector<Term> keys = {key("k1"), key("k2")};
  std::vector<Term> vars = {var("X"), var("Y"), var("Z")};
  double var_rate = 0.3;

  Term gen(int depth) {
    std::uniform_int_distribution<int> pick(0, depth <= 0 ? 1 : 4);
    switch (pick(rng_)) {
      case 0:
      case 1:
        return leaf();
      case 2:
        return Term::pair(gen(depth - 1), gen(depth - 1));
      case 3:
        return Term::enc(gen(depth - 1), key_leaf());
      default:
        return Term::hash(gen(depth - 1));
    }
  }

  Term leaf() {
    if (coin(var_rate)) return choose(vars);
    return choose(leaves);
  }

  Term key_leaf() {
    if (coin(var_rate / 2)) return choose(vars);
    return choose(keys);
  }

  bool coin(double p) { return std::bernoulli_distribution(p)(rng_); }

  template <typename T>
  const T& choose(const std::vector<T>& v) {
    return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng_)];
  }

  std::mt19937& rng() { return rng_; }

 private:
  std::mt19937 rng_;
};

}  // namespace fx
