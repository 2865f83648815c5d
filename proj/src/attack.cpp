#include "witness/attack.hpp"

#include <algorithm>
#include <exception>
#include <functional>
#include <memory>
#include <sstream>
#include <unordered_set>

namespace witness {

std::string_view to_string(IntruderAction a) {
  switch (a) {
    case IntruderAction::Forward:
      return "forward";
    case IntruderAction::Synthesize:
      return "synthesize";
    case IntruderAction::Decompose:
      return "decompose";
  }
  return "?";
}

std::string_view to_string(SearchOutcome o) {
  switch (o) {
    case SearchOutcome::Attack:
      return "attack";
    case SearchOutcome::NoAttack:
      return "no-attack";
    case SearchOutcome::Exhausted:
      return "bound-exhausted";
  }
  return "?";
}

namespace {

struct RoleInfo {
  const GeneralizedRole* role = nullptr;
  /// Ground identities in the templates other than the owner.
  std::vector<std::string> peers;
  /// Identity name -> the variable standing for it.
  std::map<std::string, std::string> identity_vars;
  std::set<std::string> identity_var_names;
  /// Atoms the owner creates; renamed per session.
  std::set<std::string> fresh;
  std::vector<Term> linked_vars;
  /// Variables still mentioned from event i on.
  std::vector<std::set<std::string>> live;
  /// Whether any send remains from event i on.
  std::vector<bool> sends_ahead;
  /// Variables standing for someone else's timestamp.
  std::vector<std::string> stamp_vars;
};

struct Instance {
  int role = 0;
  SessionSetup setup;
  std::shared_ptr<const std::vector<Term>> templ;
  std::size_t pc = 0;
  Substitution sigma;
};

struct TraceLink {
  std::shared_ptr<const TraceLink> parent;
  TraceEvent event;
};

struct State {
  std::vector<Instance> instances;
  std::shared_ptr<const Knowledge> knowledge;
  std::shared_ptr<const TraceLink> trace;
  std::optional<std::pair<Term, SecurityLevel>> exposed;
};

class Engine {
 public:
  Engine(const ProtocolSpec& spec, const SearchConfig& config)
      : spec_(spec), config_(config), ctx_(spec.context()), roles_(project_generalized_roles(spec)) {
    for (const auto& p : spec.principals) agents_.push_back(p);
    agents_.push_back(spec.intruder);
    for (const auto& r : roles_) infos_.push_back(describe(r));
    for (const auto& name : ctx_.atom_names()) {
      const auto& owner = ctx_.owner_of(name);
      const AtomKind kind = ctx_.kind_of(name);
      if (kind == AtomKind::Identity || ctx_.level(name).is_bottom()) continue;
      if (kind == AtomKind::Key) {
        const auto& info = ctx_.key_info(name);
        if (info.owner && *info.owner == spec.intruder) continue;
        if (info.owner && info.is_public) continue;
        global_secrets_.push_back(ctx_.atom(name));
      } else if (!owner) {
        global_secrets_.push_back(ctx_.atom(name));
      }
    }
  }

  State initial() const {
    State s;
    s.knowledge = std::make_shared<const Knowledge>(saturate(initial_intruder_knowledge(spec_), ctx_));
    return s;
  }

  /// Successors in fixed move order.
  std::vector<State> expand(const State& s) const {
    std::vector<State> out;
    for (std::size_t i = 0; i < s.instances.size(); ++i) receive_moves(s, i, out);
    std::vector<int> count(roles_.size(), 0);
    for (const auto& inst : s.instances) ++count[inst.role];
    for (std::size_t r = 0; r < roles_.size(); ++r) {
      if (count[r] >= config_.max_sessions) continue;
      for (const std::string& self : selves(r, any_principal_)) {
        for (const auto& peers : peer_choices(r, self)) {
          State next = s;
          // Numbered by role slot so creation order across roles does not matter.
          const int session = static_cast<int>(r) * config_.max_sessions + count[r] + 1;
          next.instances.push_back(create(static_cast<int>(r), session, self, peers));
          const std::size_t idx = next.instances.size() - 1;
          if (roles_[r].events.front().direction == Direction::Send) {
            fire_sends(next, idx);
            check_goal(next);
            out.push_back(std::move(next));
          } else {
            receive_moves(next, idx, out);
          }
        }
      }
    }
    return out;
  }

  /// Knowledge plus what each instance can still do; bindings no later
  /// event mentions are dropped.
  std::size_t key(const State& s) const {
    std::ostringstream os;
    std::vector<const Instance*> order;
    for (const auto& inst : s.instances) order.push_back(&inst);
    std::sort(order.begin(), order.end(), [](auto* a, auto* b) { return a->setup.session < b->setup.session; });
    for (const Instance* ip : order) {
      const Instance& inst = *ip;
      const RoleInfo& info = infos_[inst.role];
      os << inst.setup.session << ':' << inst.role << '/' << inst.setup.self << '/';
      for (const auto& [k, v] : inst.setup.peers) os << k << '=' << v << ',';
      os << '/' << inst.pc << '/';
      for (const auto& [v, t] : inst.sigma.bindings()) {
        if (info.live[inst.pc].count(v) || info.identity_var_names.count(v)) os << v << '=' << t.str() << ',';
      }
      os << ';';
    }
    std::size_t h = std::hash<std::string>{}(os.str());
    for (const Term& t : *s.knowledge) h = h * 1099511628211ULL ^ t.hash_value();
    return h;
  }

  AttackTrace trace_of(const State& s) const {
    AttackTrace t;
    for (const auto& inst : s.instances) t.sessions.push_back(inst.setup);
    for (auto link = s.trace; link; link = link->parent) t.events.push_back(link->event);
    std::reverse(t.events.begin(), t.events.end());
    t.exposed_secret = s.exposed->first;
    t.secret_level = s.exposed->second;
    return t;
  }

  const VerificationContext& ctx() const { return ctx_; }

  /// Off: each role is played only by its own principal.
  void allow_role_swap(bool on) { any_principal_ = on; }

  int role_index(const std::string& role_id) const {
    for (std::size_t i = 0; i < roles_.size(); ++i) {
      if (roles_[i].role_id == role_id) return static_cast<int>(i);
    }
    return -1;
  }

  Instance create(int r, int session, const std::string& self, const std::map<std::string, std::string>& peers) const {
    const RoleInfo& info = infos_[r];
    std::map<std::string, Term> rename;
    auto map_identity = [&](const std::string& from, const std::string& to) {
      rename[from] = Term::atom(to, AtomKind::Identity);
      auto a = ctx_.key_pair_of(from);
      auto b = ctx_.key_pair_of(to);
      if (a && b) {
        rename[a->first] = ctx_.atom(b->first);
        rename[a->second] = ctx_.atom(b->second);
      }
    };
    map_identity(info.role->principal, self);
    for (const auto& [from, to] : peers) map_identity(from, to);
    for (const auto& f : info.fresh) {
      rename[f] = Term::atom(f + "@" + std::to_string(session), ctx_.kind_of(f));
    }
    auto templ = std::make_shared<std::vector<Term>>();
    for (const auto& ev : info.role->events) {
      templ->push_back(rewrite(ev.templ, [&](const Term& t) -> std::optional<Term> {
        if (!t.is_atom()) return std::nullopt;
        auto it = rename.find(t.name());
        if (it == rename.end()) return t;
        return it->second;
      }));
    }
    Instance inst;
    inst.role = r;
    inst.setup = {session, info.role->role_id, self, peers};
    inst.templ = std::move(templ);
    return inst;
  }

  /// Binds key variables linked to identity variables, in both directions.
  bool close_links(const RoleInfo& info, Substitution& s) const {
    bool changed = true;
    while (changed) {
      changed = false;
      for (const Term& v : info.linked_vars) {
        const KeyLink& link = *v.key_link();
        const Term* owner = s.find(link.owner);
        const Term* k = s.find(v.name());
        if (owner) {
          if (!owner->is_atom() || owner->atom_kind() != AtomKind::Identity) {
            if (k) return false;
            continue;
          }
          auto pair = ctx_.key_pair_of(owner->name());
          if (!pair) {
            if (k) return false;
            continue;
          }
          Term expected = ctx_.atom(link.side == KeySide::Public ? pair->first : pair->second);
          if (!k) {
            s.bind(v.name(), expected);
            changed = true;
          } else if (*k != expected) {
            return false;
          }
        } else if (k) {
          bool found = false;
          for (const auto& a : agents_) {
            auto pair = ctx_.key_pair_of(a);
            if (!pair) continue;
            const std::string& side = link.side == KeySide::Public ? pair->first : pair->second;
            if (k->is_atom() && k->name() == side) {
              s.bind(link.owner, Term::atom(a, AtomKind::Identity));
              found = changed = true;
              break;
            }
          }
          if (!found) return false;
        }
      }
    }
    return true;
  }

  static bool merge(Substitution& into, const Substitution& extra) {
    for (const auto& [v, t] : extra.bindings()) {
      if (const Term* have = into.find(v)) {
        if (*have != t) return false;
      } else {
        into.bind(v, t);
      }
    }
    return true;
  }

  /// Appends every message send of instance idx that is ready.
  void fire_sends(State& s, std::size_t idx) const {
    Instance& inst = s.instances[idx];
    const auto& events = roles_[inst.role].events;
    while (inst.pc < events.size() && events[inst.pc].direction == Direction::Send) {
      Term msg = apply((*inst.templ)[inst.pc], inst.sigma);
      if (!msg.is_ground()) return;
      Knowledge k = *s.knowledge;
      k.insert(msg);
      s.knowledge = std::make_shared<const Knowledge>(saturate(k, ctx_));
      s.trace = std::make_shared<const TraceLink>(
          TraceLink{s.trace, {inst.setup.session, events[inst.pc].step, Direction::Send, msg, IntruderAction::Decompose}});
      ++inst.pc;
    }
  }

  SecurityLevel session_level(const Instance& inst, const SecurityLevel& declared) const {
    if (declared.is_bottom()) return declared;
    const RoleInfo& info = infos_[inst.role];
    std::set<std::string> ids;
    for (const auto& id : declared.ids()) {
      if (id == info.role->principal) {
        ids.insert(inst.setup.self);
      } else if (auto p = inst.setup.peers.find(id); p != inst.setup.peers.end()) {
        ids.insert(p->second);
      } else if (auto v = info.identity_vars.find(id); v != info.identity_vars.end()) {
        const Term* bound = inst.sigma.find(v->second);
        // Unknown partner: assume the intruder may be it.
        ids.insert(bound && bound->is_atom() && bound->atom_kind() == AtomKind::Identity ? bound->name()
                                                                                         : spec_.intruder);
      } else {
        ids.insert(id);
      }
    }
    return SecurityLevel::known(std::move(ids));
  }

  void check_goal(State& s) const {
    const Knowledge& k = *s.knowledge;
    for (const auto& inst : s.instances) {
      for (const auto& f : infos_[inst.role].fresh) {
        Term t = Term::atom(f + "@" + std::to_string(inst.setup.session), ctx_.kind_of(f));
        if (!k.count(t)) continue;
        SecurityLevel l = session_level(inst, ctx_.level(f));
        if (!ctx_.intruder_authorized(l)) {
          s.exposed = {t, l};
          return;
        }
      }
    }
    for (const Term& t : global_secrets_) {
      if (k.count(t) && !ctx_.intruder_authorized(ctx_.level(t))) {
        s.exposed = {t, ctx_.level(t)};
        return;
      }
    }
  }

  std::optional<std::pair<Substitution, IntruderAction>> accept(const Instance& inst, const Knowledge& k,
                                                                 const Term& msg) const {
    const auto& events = roles_[inst.role].events;
    if (inst.pc >= events.size() || events[inst.pc].direction != Direction::Receive) return std::nullopt;
    if (!derives_saturated(k, msg)) return std::nullopt;
    auto u = unify(apply((*inst.templ)[inst.pc], inst.sigma), msg);
    if (!u) return std::nullopt;
    Substitution s = inst.sigma;
    if (!merge(s, *u) || !close_links(infos_[inst.role], s) || talks_to_self(inst, s)) return std::nullopt;
    return std::make_pair(s, k.count(msg) ? IntruderAction::Forward : IntruderAction::Synthesize);
  }

  const std::vector<GeneralizedRole>& roles() const { return roles_; }

  /// Over-approximation: every setup may run any number of times, session
  /// slots are merged and fresh atoms are named by setup plus the partner
  /// bindings at their first send. True when no secret can leak within the
  /// bounded number of sends; false means undecided. With fresh timestamps,
  /// each leaked secret is re-examined once per choice of the single session
  /// allowed to accept a contested timestamp.
  bool relaxed_safe() const {
    std::map<Stamp, std::set<std::string>> consumers;
    const std::set<Term> leaks = relaxed_fixpoint({}, consumers, std::nullopt);
    if (leaks.empty()) return true;
    if (!config_.fresh_timestamps) return false;
    int budget = 256;
    for (const Term& secret : leaks) {
      if (!relaxed_safe_for(secret, {}, consumers, budget)) return false;
    }
    return true;
  }

 private:
  RoleInfo describe(const GeneralizedRole& r) const {
    RoleInfo info;
    info.role = &r;
    std::set<std::string> peers;
    for (const auto& ev : r.events) {
      for (const Term& a : atoms(ev.templ)) {
        if (a.atom_kind() == AtomKind::Identity && a.name() != r.principal) peers.insert(a.name());
        const auto& owner = ctx_.owner_of(a.name());
        if (owner && *owner == r.principal && a.atom_kind() != AtomKind::Identity && a.atom_kind() != AtomKind::Key) {
          info.fresh.insert(a.name());
        }
      }
      for (const Term& v : variables(ev.templ)) {
        if (v.key_link() && std::find(info.linked_vars.begin(), info.linked_vars.end(), v) == info.linked_vars.end()) {
          info.linked_vars.push_back(v);
        }
      }
    }
    info.peers.assign(peers.begin(), peers.end());
    const std::size_t n = r.events.size();
    info.live.assign(n + 1, {});
    info.sends_ahead.assign(n + 1, false);
    for (std::size_t i = n; i-- > 0;) {
      info.live[i] = info.live[i + 1];
      for (const Term& v : variables(r.events[i].templ)) info.live[i].insert(v.name());
      info.sends_ahead[i] = info.sends_ahead[i + 1] || r.events[i].direction == Direction::Send;
    }
    for (const auto& [v, t] : r.honest_binding.bindings()) {
      if (t.is_atom() && t.atom_kind() == AtomKind::Identity) {
        info.identity_vars[t.name()] = v;
        info.identity_var_names.insert(v);
      }
      if (t.is_atom() && t.atom_kind() == AtomKind::Timestamp) info.stamp_vars.push_back(v);
    }
    return info;
  }

  /// The role's own principal first, then the others.
  std::vector<std::string> selves(std::size_t r, bool any_principal = true) const {
    std::vector<std::string> out{roles_[r].principal};
    if (!any_principal) return out;
    for (const auto& p : spec_.principals) {
      if (p != roles_[r].principal) out.push_back(p);
    }
    return out;
  }

  std::vector<std::map<std::string, std::string>> peer_choices(std::size_t r, const std::string& self) const {
    std::vector<std::map<std::string, std::string>> out{{}};
    for (const auto& peer : infos_[r].peers) {
      std::vector<std::map<std::string, std::string>> next;
      for (const auto& partial : out) {
        for (const auto& a : agents_) {
          if (a == self) continue;
          auto m = partial;
          m[peer] = a;
          next.push_back(std::move(m));
        }
      }
      out = std::move(next);
    }
    return out;
  }

  using Goals = std::vector<std::pair<Term, int>>;

  void solve(const RoleInfo& info, const std::string& self, const Knowledge& k, Goals goals, Substitution s,
             std::vector<Substitution>& out, bool top = false) const {
    if (goals.empty()) {
      out.push_back(std::move(s));
      return;
    }
    auto [goal, depth] = goals.back();
    goals.pop_back();
    const Term t = apply(goal, s);
    if (t.is_ground()) {
      if (derives_saturated(k, t)) solve(info, self, k, std::move(goals), std::move(s), out);
      return;
    }
    if (t.is_variable()) {
      for (const Term& value : candidates(info, self, t)) {
        Substitution next = s;
        next.bind(t.name(), value);
        if (close_links(info, next)) solve(info, self, k, goals, std::move(next), out);
      }
      return;
    }
    // Pairs are always rebuilt from parts; ciphertexts and hashes may be replayed.
    for (const Term& known : k) {
      if (known.kind() != t.kind() || (t.is_pair() && !top)) continue;
      auto u = unify(t, known);
      if (!u) continue;
      Substitution next = s;
      if (merge(next, *u) && close_links(info, next)) solve(info, self, k, goals, std::move(next), out);
    }
    switch (t.kind()) {
      case TermKind::Pair:
        goals.emplace_back(t.right(), depth);
        goals.emplace_back(t.left(), depth);
        break;
      case TermKind::Hash:
        if (depth <= 0) return;
        goals.emplace_back(t.body(), depth - 1);
        break;
      case TermKind::Enc:
        if (depth <= 0) return;
        goals.emplace_back(t.key(), depth);
        goals.emplace_back(t.body(), depth - 1);
        break;
      default:
        return;
    }
    solve(info, self, k, std::move(goals), std::move(s), out);
  }

  std::vector<Term> candidates(const RoleInfo& info, const std::string& self, const Term& v) const {
    std::vector<Term> out;
    if (v.key_link()) {
      for (const auto& a : agents_) {
        if (auto pair = ctx_.key_pair_of(a)) {
          out.push_back(ctx_.atom(v.key_link()->side == KeySide::Public ? pair->first : pair->second));
        }
      }
    } else if (info.identity_var_names.count(v.name())) {
      // Nobody runs a session with itself.
      for (const auto& a : agents_) {
        if (a != self) out.push_back(Term::atom(a, AtomKind::Identity));
      }
    } else {
      // Free data the intruder supplies itself.
      out.push_back(Term::atom(spec_.intruder, AtomKind::Identity));
    }
    return out;
  }

  bool talks_to_self(const Instance& inst, const Substitution& s) const {
    for (const auto& v : infos_[inst.role].identity_var_names) {
      const Term* b = s.find(v);
      if (b && b->is_atom() && b->name() == inst.setup.self) return true;
    }
    return false;
  }

  static bool is_stamp(const Term& t) { return t.is_atom() && t.atom_kind() == AtomKind::Timestamp; }

  /// A principal that already accepted a timestamp in another session.
  bool replayed_stamp(const State& s, std::size_t idx, const Substitution& bound) const {
    const Instance& inst = s.instances[idx];
    for (const auto& v : infos_[inst.role].stamp_vars) {
      const Term* now = bound.find(v);
      if (!now || inst.sigma.find(v) || !is_stamp(*now)) continue;
      for (std::size_t j = 0; j < s.instances.size(); ++j) {
        const Instance& other = s.instances[j];
        if (j == idx || other.setup.self != inst.setup.self) continue;
        for (const auto& w : infos_[other.role].stamp_vars) {
          const Term* seen = other.sigma.find(w);
          if (seen && *seen == *now) return true;
        }
      }
    }
    return false;
  }

  void receive_moves(const State& s, std::size_t idx, std::vector<State>& out) const {
    const Instance& inst = s.instances[idx];
    const auto& events = roles_[inst.role].events;
    if (inst.pc >= events.size() || events[inst.pc].direction != Direction::Receive) return;
    const Term templ = (*inst.templ)[inst.pc];
    std::vector<Substitution> found;
    solve(infos_[inst.role], inst.setup.self, *s.knowledge, {{templ, config_.synth_depth}}, inst.sigma, found, true);
    std::set<Term> seen;
    for (auto& sigma : found) {
      Term msg = apply(templ, sigma);
      if (!msg.is_ground() || !seen.insert(msg).second) continue;
      State next = s;
      Instance& ni = next.instances[idx];
      // The message fixes the bindings; recompute them from it.
      auto u = unify(apply(templ, inst.sigma), msg);
      Substitution bound = inst.sigma;
      if (!u || !merge(bound, *u) || !close_links(infos_[inst.role], bound) || talks_to_self(inst, bound)) continue;
      if (config_.fresh_timestamps && replayed_stamp(s, idx, bound)) continue;
      ni.sigma = std::move(bound);
      const IntruderAction action = s.knowledge->count(msg) ? IntruderAction::Forward : IntruderAction::Synthesize;
      next.trace = std::make_shared<const TraceLink>(
          TraceLink{next.trace, {ni.setup.session, events[ni.pc].step, Direction::Receive, msg, action}});
      ++ni.pc;
      fire_sends(next, idx);
      check_goal(next);
      // Taught the intruder nothing and can never send again: dominated.
      if (!next.exposed && next.knowledge->size() == s.knowledge->size() &&
          !infos_[ni.role].sends_ahead[ni.pc]) {
        continue;
      }
      out.push_back(std::move(next));
    }
  }

  using Stamp = std::pair<std::string, Term>;
  using StampChoice = std::map<Stamp, std::string>;

  /// Splits on contested stamps until `secret` no longer leaks in any branch.
  bool relaxed_safe_for(const Term& secret, const StampChoice& choice,
                        const std::map<Stamp, std::set<std::string>>& consumers, int& budget) const {
    // Stamps minted by the run that minted the secret come first.
    const std::string run = secret.name().substr(std::min(secret.name().find('@'), secret.name().size()));
    const Stamp* pick = nullptr;
    for (const auto& [stamp, keys] : consumers) {
      if (keys.size() < 2 || choice.count(stamp)) continue;
      const std::string& n = stamp.second.name();
      const bool same_run = !run.empty() && n.size() >= run.size() &&
                            n.compare(n.size() - run.size(), run.size(), run) == 0;
      if (!pick || same_run) pick = &stamp;
      if (same_run) break;
    }
    if (!pick) return false;
    for (const auto& key : consumers.at(*pick)) {
      if (--budget < 0) return false;
      StampChoice narrowed = choice;
      narrowed[*pick] = key;
      std::map<Stamp, std::set<std::string>> seen;
      if (relaxed_fixpoint(narrowed, seen, secret).empty()) continue;
      if (!relaxed_safe_for(secret, narrowed, seen, budget)) return false;
    }
    return true;
  }

  /// Secrets leaking at the fixpoint; with a target, stops once it leaks
  /// and reports only it.
  std::set<Term> relaxed_fixpoint(const StampChoice& choice, std::map<Stamp, std::set<std::string>>& consumers,
                                  const std::optional<Term>& target) const {
    int bound = 0;
    for (const auto& r : roles_) {
      for (const auto& ev : r.events) bound += ev.direction == Direction::Send;
    }
    bound *= config_.max_sessions;

    std::vector<Instance> setups;
    for (std::size_t r = 0; r < roles_.size(); ++r) {
      for (const std::string& self : selves(r)) {
        for (const auto& peers : peer_choices(r, self)) setups.push_back(create(static_cast<int>(r), 0, self, peers));
      }
    }

    Knowledge k = *initial().knowledge;
    std::map<Term, bool> fresh_safe;
    for (int round = 0; round < bound; ++round) {
      std::vector<Relaxed> found(setups.size());
      std::exception_ptr error;
      const long n = static_cast<long>(setups.size());
#pragma omp parallel for schedule(dynamic) if (config_.parallel)
      for (long i = 0; i < n; ++i) {
        try {
          std::set<std::string> memo;
          relaxed_run(setups[i], k, "", choice, memo, found[i]);
        } catch (...) {
#pragma omp critical
          if (!error) error = std::current_exception();
        }
      }
      if (error) std::rethrow_exception(error);
      Knowledge grown = k;
      for (auto& f : found) {
        grown.insert(f.sends.begin(), f.sends.end());
        for (const auto& [t, ok] : f.fresh) {
          auto [it, first] = fresh_safe.emplace(t, ok);
          if (!first) it->second = it->second && ok;
        }
        for (auto& [stamp, keys] : f.consumers) consumers[stamp].insert(keys.begin(), keys.end());
      }
      grown = saturate(grown, ctx_);
      const bool stable = grown.size() == k.size();
      k = std::move(grown);
      if (target) {
        if (relaxed_leaks(k, fresh_safe).count(*target)) return {*target};
      }
      if (stable) break;
    }
    return target ? std::set<Term>{} : relaxed_leaks(k, fresh_safe);
  }

  struct Relaxed {
    std::set<Term> sends;
    /// Fresh atom -> whether its level already admits the intruder.
    std::map<Term, bool> fresh;
    /// Timestamp accepted by a principal -> the run points that accepted it.
    std::map<Stamp, std::set<std::string>> consumers;
  };

  std::set<Term> relaxed_leaks(const Knowledge& k, const std::map<Term, bool>& fresh_safe) const {
    std::set<Term> out;
    for (const auto& [t, ok] : fresh_safe) {
      if (!ok && k.count(t)) out.insert(t);
    }
    for (const Term& t : global_secrets_) {
      if (k.count(t) && !ctx_.intruder_authorized(ctx_.level(t))) out.insert(t);
    }
    return out;
  }

  void relaxed_run(Instance inst, const Knowledge& k, std::string tag, const StampChoice& choice,
                   std::set<std::string>& memo, Relaxed& out) const {
    const RoleInfo& info = infos_[inst.role];
    const auto& events = roles_[inst.role].events;
    while (inst.pc < events.size() && events[inst.pc].direction == Direction::Send) {
      if (tag.empty()) {
        tag = relaxed_tag(inst);
        rename_fresh(inst, tag);
      }
      Term msg = apply((*inst.templ)[inst.pc], inst.sigma);
      if (!msg.is_ground()) return;
      out.sends.insert(std::move(msg));
      ++inst.pc;
    }
    if (!tag.empty()) {
      // Same judgement as the exact goal, with this node's bindings.
      for (const auto& f : info.fresh) {
        const bool ok = ctx_.intruder_authorized(session_level(inst, ctx_.level(f)));
        auto [it, first] = out.fresh.emplace(Term::atom(f + "@" + tag, ctx_.kind_of(f)), ok);
        if (!first) it->second = it->second && ok;
      }
    }
    if (inst.pc >= events.size()) return;

    std::ostringstream key;
    key << tag << '|' << inst.pc << '|';
    for (const auto& [v, t] : inst.sigma.bindings()) {
      if (info.live[inst.pc].count(v) || info.identity_var_names.count(v)) key << v << '=' << t.str() << ',';
    }
    if (!memo.insert(key.str()).second) return;

    const Term templ = (*inst.templ)[inst.pc];
    std::vector<Substitution> found;
    solve(info, inst.setup.self, k, {{templ, config_.synth_depth}}, inst.sigma, found, true);
    std::set<Term> seen;
    for (auto& sigma : found) {
      Term msg = apply(templ, sigma);
      if (!msg.is_ground() || !seen.insert(msg).second) continue;
      auto u = unify(apply(templ, inst.sigma), msg);
      Substitution bound = inst.sigma;
      if (!u || !merge(bound, *u) || !close_links(info, bound) || talks_to_self(inst, bound)) continue;
      if (config_.fresh_timestamps && !consume_stamps(inst, bound, choice, out)) continue;
      Instance next = inst;
      next.sigma = std::move(bound);
      ++next.pc;
      relaxed_run(std::move(next), k, tag, choice, memo, out);
    }
  }

  bool consume_stamps(const Instance& inst, const Substitution& bound, const StampChoice& choice,
                      Relaxed& out) const {
    std::string key;
    for (const auto& v : infos_[inst.role].stamp_vars) {
      const Term* now = bound.find(v);
      if (!now || inst.sigma.find(v) || !is_stamp(*now)) continue;
      if (key.empty()) {
        std::ostringstream os;
        os << inst.role << '/' << inst.setup.self << '/';
        for (const auto& [p, a] : inst.setup.peers) os << p << '=' << a << ',';
        os << '/' << inst.pc << '/';
        for (const auto& [w, t] : bound.bindings()) os << w << '=' << t.str() << ',';
        key = os.str();
      }
      Stamp stamp{inst.setup.self, *now};
      auto it = choice.find(stamp);
      if (it != choice.end() && it->second != key) return false;
      out.consumers[stamp].insert(key);
    }
    return true;
  }

  std::string relaxed_tag(const Instance& inst) const {
    std::string tag = "R" + std::to_string(inst.role) + "." + inst.setup.self;
    for (const auto& [p, a] : inst.setup.peers) tag += "." + p + "=" + a;
    for (const auto& v : infos_[inst.role].identity_var_names) {
      if (const Term* b = inst.sigma.find(v)) tag += "." + v + "=" + b->str();
    }
    return tag;
  }

  void rename_fresh(Instance& inst, const std::string& tag) const {
    std::map<std::string, Term> rename;
    for (const auto& f : infos_[inst.role].fresh) rename[f + "@0"] = Term::atom(f + "@" + tag, ctx_.kind_of(f));
    auto templ = std::make_shared<std::vector<Term>>();
    for (const Term& t : *inst.templ) {
      templ->push_back(rewrite(t, [&](const Term& a) -> std::optional<Term> {
        if (!a.is_atom()) return std::nullopt;
        auto it = rename.find(a.name());
        return it == rename.end() ? a : it->second;
      }));
    }
    inst.templ = std::move(templ);
  }

  const ProtocolSpec& spec_;
  SearchConfig config_;
  VerificationContext ctx_;
  std::vector<GeneralizedRole> roles_;
  std::vector<RoleInfo> infos_;
  std::vector<std::string> agents_;
  std::vector<Term> global_secrets_;
  bool any_principal_ = true;
};

}  // namespace

namespace {
SearchResult exhaustive_search(const Engine& engine, const SearchConfig& config);
}  // namespace

SearchResult search_attack(const ProtocolSpec& spec, const SearchConfig& config) {
  if (config.max_sessions < 1) throw std::invalid_argument("max_sessions must be at least 1");
  if (config.synth_depth < 0) throw std::invalid_argument("synth_depth must be non-negative");
  Engine engine(spec, config);
  SearchResult result;
  if (engine.relaxed_safe()) {
    result.outcome = SearchOutcome::NoAttack;
    result.by_overapproximation = true;
    return result;
  }
  // Cheap pass first: any attack it finds is one of the full model.
  engine.allow_role_swap(false);
  result = exhaustive_search(engine, config);
  if (result.outcome == SearchOutcome::Attack) return result;
  const std::size_t first_pass = result.states;
  engine.allow_role_swap(true);
  result = exhaustive_search(engine, config);
  result.states += first_pass;
  return result;
}

namespace {

SearchResult exhaustive_search(const Engine& engine, const SearchConfig& config) {
  SearchResult result;
  std::unordered_set<std::size_t> visited;
  std::vector<State> layer{engine.initial()};
  visited.insert(engine.key(layer.front()));
  result.states = 1;

  while (!layer.empty()) {
    ++result.layers;
    std::vector<std::vector<State>> next(layer.size());
    std::exception_ptr error;
    const long n = static_cast<long>(layer.size());
#pragma omp parallel for schedule(dynamic) if (config.parallel)
    for (long i = 0; i < n; ++i) {
      try {
        next[i] = engine.expand(layer[i]);
      } catch (...) {
#pragma omp critical
        if (!error) error = std::current_exception();
      }
    }
    if (error) std::rethrow_exception(error);

    std::vector<State> merged;
    for (auto& succ : next) {
      for (auto& st : succ) {
        if (!visited.insert(engine.key(st)).second) continue;
        ++result.states;
        if (st.exposed) {
          result.outcome = SearchOutcome::Attack;
          result.trace = engine.trace_of(st);
          return result;
        }
        merged.push_back(std::move(st));
        if (result.states > config.state_limit) {
          result.outcome = SearchOutcome::Exhausted;
          return result;
        }
      }
    }
    layer = std::move(merged);
  }
  result.outcome = SearchOutcome::NoAttack;
  return result;
}

}  // namespace

bool replay(const ProtocolSpec& spec, const AttackTrace& trace) {
  const Engine engine(spec, SearchConfig{});
  Knowledge k = saturate(initial_intruder_knowledge(spec), engine.ctx());
  std::map<int, Instance> live;
  for (const auto& setup : trace.sessions) {
    const int r = engine.role_index(setup.role);
    if (r < 0) return false;
    live.emplace(setup.session, engine.create(r, setup.session, setup.self, setup.peers));
  }
  for (const auto& ev : trace.events) {
    auto it = live.find(ev.session);
    if (it == live.end()) return false;
    Instance& inst = it->second;
    const auto& events = engine.roles()[inst.role].events;
    if (inst.pc >= events.size() || events[inst.pc].step != ev.step || events[inst.pc].direction != ev.direction) {
      return false;
    }
    if (ev.direction == Direction::Receive) {
      auto ok = engine.accept(inst, k, ev.message);
      if (!ok) return false;
      inst.sigma = std::move(ok->first);
    } else {
      if (apply((*inst.templ)[inst.pc], inst.sigma) != ev.message) return false;
      k.insert(ev.message);
      k = saturate(k, engine.ctx());
    }
    ++inst.pc;
  }
  return k.count(trace.exposed_secret) != 0;
}

std::string render_trace(const AttackTrace& trace) {
  std::map<int, std::string> label;
  for (const auto& s : trace.sessions) {
    label[s.session] = s.self + "(" + s.role + "#" + std::to_string(s.session) + ")";
  }
  std::vector<std::string> heads;
  std::size_t width = 0;
  for (const auto& ev : trace.events) {
    const std::string& who = label[ev.session];
    std::string head = ev.direction == Direction::Send ? who + " -> I" : "I -> " + who;
    head += "  [" + std::to_string(ev.step) + "]";
    width = std::max(width, head.size());
    heads.push_back(std::move(head));
  }
  std::ostringstream os;
  for (std::size_t i = 0; i < trace.events.size(); ++i) {
    os << heads[i] << std::string(width - heads[i].size(), ' ') << " : " << trace.events[i].message.str() << "  ("
       << to_string(trace.events[i].action) << ")\n";
  }
  os << "exposed " << trace.exposed_secret.str() << " at level " << trace.secret_level.str() << "\n";
  return os.str();
}

}  // namespace witness
