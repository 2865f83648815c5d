#include "witness/structcheck.hpp"

#include <algorithm>
#include <exception>
#include <functional>
#include <map>

namespace witness {

namespace {

/// Identity positions: '~' prefix. Atomic data relayed by a sender: '^'.
bool typed_identity(const Term& v) { return v.is_variable() && !v.name().empty() && v.name().front() == '~'; }
bool typed_atomic(const Term& v) { return v.is_variable() && !v.name().empty() && v.name().front() == '^'; }

std::string base_name(const std::string& n) { return n.substr(0, n.rfind('#')); }

}  // namespace

std::vector<PatternEntry> generalized_patterns(const ProtocolSpec& spec) {
  const VerificationContext ctx = spec.context();
  const auto roles = project_generalized_roles(spec);
  std::map<std::string, const GeneralizedRole*> by_id;
  for (const auto& r : roles) by_id[r.role_id] = &r;

  std::vector<std::string> parties = spec.principals;
  parties.push_back(spec.intruder);
  std::map<std::string, std::pair<std::string, KeySide>> key_owner;
  for (const auto& p : parties) {
    if (auto pair = ctx.key_pair_of(p)) {
      key_owner[pair->first] = {p, KeySide::Public};
      key_owner[pair->second] = {p, KeySide::Private};
    }
  }

  // What a receiver opens at each step: the outermost encryptions.
  std::vector<PatternEntry> out;
  for (const auto& role : roles) {
    for (const auto& ev : role.events) {
      for (const Term& e : top_level_encryptions(ev.templ)) {
        out.push_back({rename_apart(e, "#" + std::to_string(out.size() + 1)), role.role_id, ev.step, ev.direction});
      }
    }
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    const GeneralizedRole& role = *by_id.at(out[i].origin_role);
    const std::string tag = "." + std::to_string(i + 1);
    auto is_identity_var = [&](const std::string& name) {
      const Term* b = role.honest_binding.find(base_name(name));
      return b && b->is_atom() && b->atom_kind() == AtomKind::Identity;
    };
    const bool sent = out[i].direction == Direction::Send;
    auto is_atomic_var = [&](const std::string& name) {
      const Term* b = role.honest_binding.find(base_name(name));
      return sent && b && b->is_atom();
    };
    auto party_var = [&](const std::string& p) { return "~" + p + tag; };
    out[i].term = rewrite(out[i].term, [&](const Term& t) -> std::optional<Term> {
      if (t.is_atom()) {
        if (t.atom_kind() == AtomKind::Identity) return Term::variable(party_var(t.name()));
        if (auto it = key_owner.find(t.name()); it != key_owner.end()) {
          const auto& [owner, side] = it->second;
          return Term::variable("k" + std::string(side == KeySide::Public ? "+" : "-") + owner + tag,
                                KeyLink{party_var(owner), side});
        }
        return t;
      }
      if (t.is_variable()) {
        std::optional<KeyLink> link = t.key_link();
        if (link && is_identity_var(link->owner)) link->owner = "~" + link->owner;
        std::string name = t.name();
        if (is_identity_var(name)) {
          name = "~" + name;
        } else if (!link && is_atomic_var(name)) {
          name = "^" + name;
        }
        return Term::variable(name, std::move(link));
      }
      return std::nullopt;
    });
  }
  return out;
}

std::optional<Substitution> overlap_unifier(const Term& a, const Term& b) {
  std::vector<Term> vars;
  for (const Term& v : variables(a)) vars.push_back(v);
  for (const Term& v : variables(b)) vars.push_back(v);

  std::vector<std::pair<Term, Term>> eqs{{a, b}};
  // Each round either fails, succeeds or adds an owner equation; owners are finite.
  for (std::size_t round = 0; round <= vars.size(); ++round) {
    auto sigma = unify_all(eqs);
    if (!sigma) return std::nullopt;
    bool added = false;
    for (const Term& v : vars) {
      const Term r = apply(v, *sigma);
      if (typed_identity(v) && !r.is_variable()) return std::nullopt;
      if (typed_atomic(v) && !r.is_variable() && !r.is_atom()) return std::nullopt;
      if (!v.key_link()) continue;
      if (!r.is_variable()) return std::nullopt;
      if (!r.key_link()) continue;
      if (r.key_link()->side != v.key_link()->side) return std::nullopt;
      const Term mine = apply(Term::variable(v.key_link()->owner), *sigma);
      const Term theirs = apply(Term::variable(r.key_link()->owner), *sigma);
      if (mine != theirs) {
        eqs.emplace_back(mine, theirs);
        added = true;
      }
    }
    if (!added) return sigma;
  }
  return std::nullopt;
}

OverlapReport check_overlap(const ProtocolSpec& spec, bool parallel) {
  const auto patterns = generalized_patterns(spec);
  const long n = static_cast<long>(patterns.size());
  std::vector<std::vector<Overlap>> found(patterns.size());
  std::exception_ptr error;

#pragma omp parallel for schedule(dynamic) if (parallel)
  for (long i = 0; i < n; ++i) {
    try {
      for (long j = i + 1; j < n; ++j) {
        const PatternEntry* x = &patterns[i];
        const PatternEntry* y = &patterns[j];
        // A confusion needs a produced message landing on another step's receive.
        if (x->origin_step == y->origin_step || x->direction == y->direction) continue;
        if (x->origin_step > y->origin_step) std::swap(x, y);
        if (auto u = overlap_unifier(x->term, y->term)) {
          found[i].push_back({x->origin_step, y->origin_step, std::move(*u), x->term, y->term});
        }
      }
    } catch (...) {
#pragma omp critical
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);

  OverlapReport report;
  for (auto& f : found) {
    for (auto& o : f) report.overlaps.push_back(std::move(o));
  }
  std::sort(report.overlaps.begin(), report.overlaps.end(), [](const Overlap& l, const Overlap& r) {
    return std::tie(l.step_a, l.step_b, l.pattern_a, l.pattern_b) <
           std::tie(r.step_a, r.step_b, r.pattern_a, r.pattern_b);
  });
  report.clean = report.overlaps.empty();
  report.notes.push_back("freshness of timestamps and nonces is not modeled here; replays are left to the attack search");
  return report;
}

NonRepReport check_non_repudiation(const ProtocolSpec& spec) {
  const VerificationContext ctx = spec.context();
  NonRepReport report;
  for (const Step& st : spec.steps) {
    NonRepStep out;
    out.step = st.index;
    out.sender = st.sender;
    const Term sender = Term::atom(st.sender, AtomKind::Identity);

    // Pairs from the top, then through one layer of encryption.
    std::function<void(const Term&, bool)> scan = [&](const Term& t, bool opened) {
      if (t.is_pair()) {
        scan(t.left(), opened);
        scan(t.right(), opened);
      } else if (t.is_enc() && !opened) {
        scan(t.body(), true);
      } else if (t == sender) {
        out.sender_identity_plain = true;
      }
    };
    scan(st.message, false);

    const auto own = ctx.key_pair_of(st.sender);
    out.all_asymmetric = true;
    for (const Term& e : encrypted_subterms(st.message)) {
      const Term& k = e.key();
      if (own && k.is_atom() && k.name() == own->second) out.sender_identity_signed = true;
      if (!k.is_atom() || !ctx.is_key(k.name()) || ctx.inverse(k.name()) == k.name()) out.all_asymmetric = false;
    }
    out.verdict = (out.sender_identity_plain || out.sender_identity_signed) && out.all_asymmetric;
    report.pass = report.pass && out.verdict;
    report.steps.push_back(std::move(out));
  }
  return report;
}

}  // namespace witness
