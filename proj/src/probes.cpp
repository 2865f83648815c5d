#include <exception>
#include <map>
#include <random>

#include "witness/intruder.hpp"

namespace witness {

namespace {

class RandomTerms {
 public:
  RandomTerms(const VerificationContext& ctx, std::uint64_t seed) : rng_(seed) {
    for (const auto& name : ctx.atom_names()) {
      atoms_.push_back(ctx.atom(name));
      if (ctx.is_key(name)) keys_.push_back(atoms_.back());
    }
  }

  Term gen(int depth) {
    const int choice = std::uniform_int_distribution<int>(0, depth <= 0 ? 1 : 4)(rng_);
    if (choice <= 1) return pick(atoms_);
    if (choice == 2) return Term::pair(gen(depth - 1), gen(depth - 1));
    if (choice == 3 && !keys_.empty()) return Term::enc(gen(depth - 1), pick(keys_));
    return Term::hash(gen(depth - 1));
  }

  const Term& atom() { return pick(atoms_); }
  bool coin(double p) { return std::bernoulli_distribution(p)(rng_); }
  int below(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng_); }

 private:
  const Term& pick(const std::vector<Term>& v) { return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng_)]; }

  std::mt19937_64 rng_;
  std::vector<Term> atoms_;
  std::vector<Term> keys_;
};

std::vector<Term> as_vector(const Knowledge& k) { return {k.begin(), k.end()}; }

}  // namespace

std::vector<InvarianceViolation> probe_full_invariance(const LevelFunction& f, const VerificationContext& ctx,
                                                       const Knowledge& m, int max_size) {
  std::vector<InvarianceViolation> out;
  const std::vector<Term> known = as_vector(m);
  std::map<Term, SecurityLevel> in_knowledge;
  for (const Term& msg : derivable_up_to(m, ctx, max_size)) {
    for (const Term& alpha : atoms(msg)) {
      if (ctx.intruder_authorized(ctx.level(alpha))) continue;
      auto it = in_knowledge.find(alpha);
      if (it == in_knowledge.end()) it = in_knowledge.emplace(alpha, level_of_set(f, alpha, known)).first;
      const SecurityLevel here = f(alpha, msg);
      if (!leq(it->second, here)) out.push_back({alpha, msg, it->second, here});
    }
  }
  return out;
}

std::vector<InvarianceViolation> probe_full_invariance(SelectionKind kind, const VerificationContext& ctx,
                                                       const Knowledge& m, int max_size) {
  return probe_full_invariance(make_level_function(kind, ctx), ctx, m, max_size);
}

std::vector<WellFormednessViolation> probe_well_formedness(const LevelFunction& f, const VerificationContext& ctx,
                                                           int trials, std::uint64_t seed) {
  std::vector<WellFormednessViolation> out;
  RandomTerms gen(ctx, seed);
  for (int t = 0; t < trials; ++t) {
    const Term alpha = gen.atom();
    if (!f(alpha, alpha).is_bottom()) {
      out.push_back({"clear-atom", alpha.str() + " -> " + f(alpha, alpha).str()});
    }

    const Term m = gen.gen(3);
    for (const Term& a : {gen.atom(), gen.atom()}) {
      if (!atoms(m).count(a) && !f(a, m).is_top()) {
        out.push_back({"absent-atom", a.str() + " in " + m.str() + " -> " + f(a, m).str()});
      }
    }

    std::vector<Term> all, left, right;
    const int n = 1 + gen.below(4);
    for (int i = 0; i < n; ++i) {
      all.push_back(gen.gen(3));
      (gen.coin(0.5) ? left : right).push_back(all.back());
    }
    for (const Term& a : atoms(Term::tuple(all))) {
      const SecurityLevel whole = level_of_set(f, a, all);
      const SecurityLevel split = meet(level_of_set(f, a, left), level_of_set(f, a, right));
      if (whole != split) {
        out.push_back({"union", a.str() + ": " + whole.str() + " vs " + split.str()});
      }
    }
  }
  return out;
}

std::vector<WellFormednessViolation> probe_well_formedness(SelectionKind kind, const VerificationContext& ctx,
                                                           int trials, std::uint64_t seed) {
  return probe_well_formedness(make_level_function(kind, ctx), ctx, trials, seed);
}

InvarianceScenario random_invariance_scenario(const ProtocolSpec& base, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto coin = [&](double p) { return std::bernoulli_distribution(p)(rng); };
  const auto& people = base.principals;
  auto pick = [&]() { return people[std::uniform_int_distribution<std::size_t>(0, people.size() - 1)(rng)]; };

  InvarianceScenario s{base, {}, {}};
  if (coin(0.5)) s.compromised = pick();

  for (auto& a : s.spec.atoms) {
    std::set<std::string> ids;
    for (const auto& p : people) {
      if (coin(0.5)) ids.insert(p);
    }
    if (ids.empty()) ids.insert(a.owner ? *a.owner : pick());
    if (!s.compromised.empty() && ids.count(s.compromised)) ids.insert(base.intruder);
    a.level = SecurityLevel::known(std::move(ids));
  }

  const VerificationContext before = base.context();
  std::optional<std::string> leaked;
  if (!s.compromised.empty()) {
    if (auto pair = before.key_pair_of(s.compromised)) {
      leaked = pair->second;
      for (auto& k : s.spec.keys) {
        if (k.inverse == *leaked && !k.level.is_bottom()) {
          auto ids = k.level.ids();
          ids.insert(base.intruder);
          k.level = SecurityLevel::known(std::move(ids));
        }
      }
    }
  }

  s.knowledge = initial_intruder_knowledge(s.spec);
  const VerificationContext ctx = s.spec.context();
  if (leaked) s.knowledge.insert(ctx.atom(*leaked));
  for (const Step& st : s.spec.steps) {
    if (coin(0.5)) s.knowledge.insert(st.message);
    for (const Term& e : encrypted_subterms(st.message)) {
      if (coin(0.3)) s.knowledge.insert(e);
    }
  }
  return s;
}

InvarianceSummary probe_full_invariance_random(
    const std::vector<ProtocolSpec>& protocols,
    const std::function<LevelFunction(const VerificationContext&)>& make, int scenarios, int max_size,
    std::uint64_t seed, bool parallel) {
  const int tasks = static_cast<int>(protocols.size()) * scenarios;
  std::vector<std::vector<InvarianceViolation>> found(static_cast<std::size_t>(tasks));
  std::vector<std::size_t> counted(static_cast<std::size_t>(tasks), 0);
  std::exception_ptr error;

#pragma omp parallel for schedule(dynamic) if (parallel)
  for (int t = 0; t < tasks; ++t) {
    try {
      const auto& base = protocols[static_cast<std::size_t>(t / scenarios)];
      InvarianceScenario s = random_invariance_scenario(base, seed * 1000003ULL + static_cast<std::uint64_t>(t));
      const VerificationContext ctx = s.spec.context();
      found[t] = probe_full_invariance(make(ctx), ctx, s.knowledge, max_size);
      counted[t] = derivable_up_to(s.knowledge, ctx, max_size).size();
    } catch (...) {
#pragma omp critical
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);

  InvarianceSummary out;
  out.scenarios = tasks;
  for (int t = 0; t < tasks; ++t) {
    out.messages_checked += counted[t];
    for (auto& v : found[t]) out.violations.push_back(std::move(v));
  }
  return out;
}

}  // namespace witness
