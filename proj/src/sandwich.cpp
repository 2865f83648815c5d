#include "witness/sandwich.hpp"

#include <exception>
#include <map>
#include <random>

namespace witness {

namespace {

class GroundGen {
 public:
  GroundGen(const VerificationContext& ctx, std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{seed & 0xffffffffu, seed >> 32, stream & 0xffffffffu, stream >> 32};
    rng_.seed(seq);
    for (const auto& name : ctx.atom_names()) {
      leaves_.push_back(ctx.atom(name));
      if (ctx.is_key(name)) keys_.push_back(ctx.atom(name));
    }
  }

  Term gen(int depth) {
    switch (std::uniform_int_distribution<int>(0, depth <= 0 ? 1 : 4)(rng_)) {
      case 0:
      case 1:
        return choose(leaves_);
      case 2:
        return Term::pair(gen(depth - 1), gen(depth - 1));
      case 3:
        return Term::enc(gen(depth - 1), choose(keys_));
      default:
        return Term::hash(gen(depth - 1));
    }
  }

  /// Key slots take key atoms; other variables the honest value now and then.
  Substitution ground(const Term& m, const Substitution& honest, const Term* plant, const std::string& plant_in) {
    Substitution s;
    const TermSet key_vars = key_position_terms(m);
    for (const Term& v : variables(m)) {
      Term value;
      if (key_vars.count(v)) {
        value = choose(keys_);
      } else if (const Term* h = honest.find(v.name()); h && coin(0.4)) {
        value = *h;
      } else {
        value = gen(2);
      }
      if (plant && v.name() == plant_in) value = coin(0.5) ? *plant : Term::pair(*plant, value);
      s.bind(v.name(), value);
    }
    return s;
  }

  bool empty() const { return leaves_.empty() || keys_.empty(); }

 private:
  bool coin(double p) { return std::bernoulli_distribution(p)(rng_); }
  const Term& choose(const std::vector<Term>& v) {
    return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng_)];
  }

  std::mt19937_64 rng_;
  std::vector<Term> leaves_;
  std::vector<Term> keys_;
};

}  // namespace

std::vector<SandwichItem> sandwich_items(const ProtocolSpec& spec) {
  const auto ctx = spec.context();
  std::vector<SandwichItem> out;
  for (const auto& role : project_generalized_roles(spec)) {
    for (const auto& ev : role.events) {
      const Term& m = ev.templ;
      const TermSet present = atoms(m);
      for (const Term& a : present) out.push_back({role.role_id, ev.step, m, StaticAtom{a}, a});
      for (const Term& x : non_key_variables(m)) {
        for (const auto& name : ctx.atom_names()) {
          const Term carried = ctx.atom(name);
          if (present.count(carried) || ctx.is_key(name)) continue;
          out.push_back({role.role_id, ev.step, m, VarBlock{x, ctx.level(carried)}, carried});
        }
      }
    }
  }
  return out;
}

SandwichSummary check_sandwich(const ProtocolSpec& spec, SelectionKind kind, int samples, std::uint64_t seed,
                               bool parallel) {
  if (samples < 0) throw std::invalid_argument("samples must be non-negative");
  const auto ctx = spec.context();
  const auto roles = project_generalized_roles(spec);
  const PatternSet ps = encryption_patterns(roles);
  std::map<std::string, const GeneralizedRole*> by_id;
  for (const auto& r : roles) by_id[r.role_id] = &r;
  const auto items = sandwich_items(spec);

  const long n = static_cast<long>(items.size());
  std::vector<std::vector<SandwichViolation>> found(items.size());
  std::exception_ptr error;

#pragma omp parallel for schedule(dynamic) if (parallel)
  for (long i = 0; i < n; ++i) {
    try {
      const SandwichItem& it = items[i];
      const Substitution& honest = by_id.at(it.role)->honest_binding;
      const auto lo = lower_bound(kind, it.binding, it.templ, ps, ctx);
      const auto hi = upper_bound(kind, it.binding, it.templ, ctx);
      const auto* block = std::get_if<VarBlock>(&it.binding);
      GroundGen g(ctx, seed, static_cast<std::uint64_t>(i));
      if (g.empty()) continue;
      std::map<Term, SecurityLevel> seen;
      for (int t = 0; t < samples; ++t) {
        const Term inst = apply(it.templ, g.ground(it.templ, honest, block ? &it.measured : nullptr,
                                                   block ? block->var.name() : std::string()));
        auto [slot, fresh] = seen.try_emplace(inst);
        if (!fresh) continue;
        slot->second = witness_value_ground(kind, it.measured, inst, ps, ctx);
        const SecurityLevel& w = slot->second;
        if (!leq(lo, w) || !leq(w, hi)) found[i].push_back({it.role, it.step, it.measured, inst, lo, w, hi});
      }
    } catch (...) {
#pragma omp critical
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);

  SandwichSummary out;
  out.items = items.size();
  out.samples = items.size() * static_cast<std::size_t>(samples);
  for (auto& f : found) {
    for (auto& v : f) out.violations.push_back(std::move(v));
  }
  return out;
}

}  // namespace witness
