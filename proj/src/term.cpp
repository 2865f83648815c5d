#include "witness/term.hpp"

#include <functional>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace witness {

namespace detail {

struct Node {
  TermKind kind = TermKind::Epsilon;
  AtomKind atom_kind = AtomKind::Constant;
  std::string name;
  std::optional<KeyLink> link;
  std::optional<Term> a;
  std::optional<Term> b;
  bool ground = true;
  std::size_t size = 1;
  std::size_t hash = 0;
};

}  // namespace detail

namespace {

std::size_t mix(std::size_t seed, std::size_t v) {
  return seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}

const std::shared_ptr<const detail::Node>& epsilon_node() {
  static const auto node = [] {
    auto n = std::make_shared<detail::Node>();
    n->kind = TermKind::Epsilon;
    n->hash = mix(0, static_cast<std::size_t>(TermKind::Epsilon));
    return std::shared_ptr<const detail::Node>(n);
  }();
  return node;
}

const Term& empty_term() {
  static const Term t;
  return t;
}

const std::string& empty_string() {
  static const std::string s;
  return s;
}

}  // namespace

std::string_view to_string(AtomKind kind) {
  switch (kind) {
    case AtomKind::Identity: return "identity";
    case AtomKind::Nonce: return "nonce";
    case AtomKind::Key: return "key";
    case AtomKind::Timestamp: return "timestamp";
    case AtomKind::Payload: return "payload";
    case AtomKind::Constant: return "constant";
  }
  return "constant";
}

Term::Term() : node_(epsilon_node()) {}

Term Term::atom(std::string name, AtomKind kind) {
  auto n = std::make_shared<detail::Node>();
  n->kind = TermKind::Atom;
  n->atom_kind = kind;
  n->hash = mix(mix(static_cast<std::size_t>(TermKind::Atom), std::hash<std::string>{}(name)),
                static_cast<std::size_t>(kind));
  n->name = std::move(name);
  return Term(std::move(n));
}

Term Term::variable(std::string name, std::optional<KeyLink> link) {
  auto n = std::make_shared<detail::Node>();
  n->kind = TermKind::Variable;
  n->ground = false;
  n->hash = mix(static_cast<std::size_t>(TermKind::Variable), std::hash<std::string>{}(name));
  n->name = std::move(name);
  n->link = std::move(link);
  return Term(std::move(n));
}

Term Term::pair(Term left, Term right) {
  auto n = std::make_shared<detail::Node>();
  n->kind = TermKind::Pair;
  n->ground = left.is_ground() && right.is_ground();
  n->size = 1 + left.size() + right.size();
  n->hash = mix(mix(static_cast<std::size_t>(TermKind::Pair), left.hash_value()), right.hash_value());
  n->a = std::move(left);
  n->b = std::move(right);
  return Term(std::move(n));
}

Term Term::enc(Term body, Term key) {
  auto n = std::make_shared<detail::Node>();
  n->kind = TermKind::Enc;
  n->ground = body.is_ground() && key.is_ground();
  n->size = 1 + body.size() + key.size();
  n->hash = mix(mix(static_cast<std::size_t>(TermKind::Enc), body.hash_value()), key.hash_value());
  n->a = std::move(body);
  n->b = std::move(key);
  return Term(std::move(n));
}

Term Term::hash(Term body) {
  auto n = std::make_shared<detail::Node>();
  n->kind = TermKind::Hash;
  n->ground = body.is_ground();
  n->size = 1 + body.size();
  n->hash = mix(static_cast<std::size_t>(TermKind::Hash), body.hash_value());
  n->a = std::move(body);
  return Term(std::move(n));
}

Term Term::epsilon() { return Term(); }

Term Term::tuple(const std::vector<Term>& parts) {
  if (parts.empty()) {
    throw std::invalid_argument("tuple of zero terms");
  }
  Term acc = parts.back();
  for (std::size_t i = parts.size() - 1; i-- > 0;) {
    acc = pair(parts[i], acc);
  }
  return acc;
}

TermKind Term::kind() const { return node_->kind; }

const std::string& Term::name() const {
  return (is_atom() || is_variable()) ? node_->name : empty_string();
}

AtomKind Term::atom_kind() const { return node_->atom_kind; }

const std::optional<KeyLink>& Term::key_link() const { return node_->link; }

const Term& Term::left() const { return is_pair() ? *node_->a : empty_term(); }
const Term& Term::right() const { return is_pair() ? *node_->b : empty_term(); }
const Term& Term::body() const { return (is_enc() || is_hash()) ? *node_->a : empty_term(); }
const Term& Term::key() const { return is_enc() ? *node_->b : empty_term(); }

bool Term::is_ground() const { return node_->ground; }
std::size_t Term::size() const { return node_->size; }
std::size_t Term::hash_value() const { return node_->hash; }

namespace {

void print(std::ostream& os, const Term& t, bool pair_left) {
  switch (t.kind()) {
    case TermKind::Atom:
    case TermKind::Variable:
      os << t.name();
      break;
    case TermKind::Epsilon:
      os << "eps";
      break;
    case TermKind::Pair:
      if (pair_left) os << '(';
      print(os, t.left(), true);
      os << '.';
      print(os, t.right(), false);
      if (pair_left) os << ')';
      break;
    case TermKind::Enc:
      os << '{';
      print(os, t.body(), false);
      os << "}_";
      print(os, t.key(), true);
      break;
    case TermKind::Hash:
      os << "h(";
      print(os, t.body(), false);
      os << ')';
      break;
  }
}

}  // namespace

std::string Term::str() const {
  std::ostringstream os;
  print(os, *this, false);
  return os.str();
}

bool operator==(const Term& a, const Term& b) {
  if (a.node_ == b.node_) return true;
  if (a.node_->hash != b.node_->hash || a.node_->kind != b.node_->kind) return false;
  return (a <=> b) == std::strong_ordering::equal;
}

std::strong_ordering operator<=>(const Term& a, const Term& b) {
  if (a.node_ == b.node_) return std::strong_ordering::equal;
  if (auto c = a.kind() <=> b.kind(); c != 0) return c;
  switch (a.kind()) {
    case TermKind::Atom:
      if (auto c = a.name() <=> b.name(); c != 0) return c;
      return a.atom_kind() <=> b.atom_kind();
    case TermKind::Variable:
      return a.name() <=> b.name();
    case TermKind::Epsilon:
      return std::strong_ordering::equal;
    case TermKind::Pair:
      if (auto c = a.left() <=> b.left(); c != 0) return c;
      return a.right() <=> b.right();
    case TermKind::Enc:
      if (auto c = a.body() <=> b.body(); c != 0) return c;
      return a.key() <=> b.key();
    case TermKind::Hash:
      return a.body() <=> b.body();
  }
  return std::strong_ordering::equal;
}

// ---------------------------------------------------------------------------
// Substitution

const Term* Substitution::find(const std::string& var) const {
  auto it = bindings_.find(var);
  return it == bindings_.end() ? nullptr : &it->second;
}

void Substitution::bind(const std::string& var, Term value) {
  bindings_.insert_or_assign(var, std::move(value));
}

Substitution Substitution::then(const Substitution& next) const {
  Substitution out;
  for (const auto& [v, t] : bindings_) {
    out.bindings_.emplace(v, apply(t, next));
  }
  for (const auto& [v, t] : next.bindings_) {
    out.bindings_.emplace(v, t);
  }
  for (auto it = out.bindings_.begin(); it != out.bindings_.end();) {
    if (it->second.is_variable() && it->second.name() == it->first) {
      it = out.bindings_.erase(it);
    } else {
      ++it;
    }
  }
  return out;
}

std::string Substitution::str() const {
  std::ostringstream os;
  os << '{';
  bool first = true;
  for (const auto& [v, t] : bindings_) {
    if (!first) os << ", ";
    first = false;
    os << v << " -> " << t.str();
  }
  os << '}';
  return os.str();
}

// ---------------------------------------------------------------------------
// Queries

namespace {

template <typename Fn>
void visit(const Term& m, bool key_slot, Fn& fn) {
  fn(m, key_slot);
  switch (m.kind()) {
    case TermKind::Pair:
      visit(m.left(), false, fn);
      visit(m.right(), false, fn);
      break;
    case TermKind::Enc:
      visit(m.body(), false, fn);
      visit(m.key(), true, fn);
      break;
    case TermKind::Hash:
      visit(m.body(), false, fn);
      break;
    default:
      break;
  }
}

}  // namespace

TermSet atoms(const Term& m) {
  TermSet out;
  auto fn = [&](const Term& t, bool) {
    if (t.is_atom()) out.insert(t);
  };
  visit(m, false, fn);
  return out;
}

TermSet non_key_atoms(const Term& m) {
  TermSet out;
  auto fn = [&](const Term& t, bool key_slot) {
    if (t.is_atom() && !key_slot) out.insert(t);
  };
  visit(m, false, fn);
  return out;
}

TermSet variables(const Term& m) {
  TermSet out;
  if (m.is_ground()) return out;
  auto fn = [&](const Term& t, bool) {
    if (t.is_variable()) out.insert(t);
  };
  visit(m, false, fn);
  return out;
}

TermSet non_key_variables(const Term& m) {
  TermSet out;
  if (m.is_ground()) return out;
  auto fn = [&](const Term& t, bool key_slot) {
    if (t.is_variable() && !key_slot) out.insert(t);
  };
  visit(m, false, fn);
  return out;
}

TermSet key_position_terms(const Term& m) {
  TermSet out;
  auto fn = [&](const Term& t, bool) {
    if (t.is_enc()) out.insert(t.key());
  };
  visit(m, false, fn);
  return out;
}

bool contains(const Term& m, const Term& sub) {
  if (m == sub) return true;
  switch (m.kind()) {
    case TermKind::Pair:
      return contains(m.left(), sub) || contains(m.right(), sub);
    case TermKind::Enc:
      return contains(m.body(), sub) || contains(m.key(), sub);
    case TermKind::Hash:
      return contains(m.body(), sub);
    default:
      return false;
  }
}

Term apply(const Term& m, const Substitution& s) {
  if (s.empty() || m.is_ground()) return m;
  return rewrite(m, [&](const Term& t) -> std::optional<Term> {
    if (t.is_ground()) return t;
    if (t.is_variable()) {
      if (const Term* bound = s.find(t.name())) return *bound;
      return t;
    }
    return std::nullopt;
  });
}

// ---------------------------------------------------------------------------
// Unification

namespace {

// Triangular-form solver; bindings may reference other bound variables.
class Solver {
 public:
  Term walk(Term t) const {
    while (t.is_variable()) {
      auto it = bound_.find(t.name());
      if (it == bound_.end()) break;
      t = it->second;
    }
    return t;
  }

  bool occurs(const std::string& var, const Term& t) const {
    if (t.is_ground()) return false;
    Term w = walk(t);
    switch (w.kind()) {
      case TermKind::Variable:
        return w.name() == var;
      case TermKind::Pair:
        return occurs(var, w.left()) || occurs(var, w.right());
      case TermKind::Enc:
        return occurs(var, w.body()) || occurs(var, w.key());
      case TermKind::Hash:
        return occurs(var, w.body());
      default:
        return false;
    }
  }

  bool solve(const Term& a0, const Term& b0) {
    std::vector<std::pair<Term, Term>> stack{{a0, b0}};
    while (!stack.empty()) {
      auto [x, y] = stack.back();
      stack.pop_back();
      Term a = walk(x);
      Term b = walk(y);
      if (a == b) continue;
      if (a.is_variable()) {
        if (occurs(a.name(), b)) return false;
        bound_.emplace(a.name(), b);
        continue;
      }
      if (b.is_variable()) {
        if (occurs(b.name(), a)) return false;
        bound_.emplace(b.name(), a);
        continue;
      }
      if (a.kind() != b.kind()) return false;
      switch (a.kind()) {
        case TermKind::Pair:
          stack.emplace_back(a.right(), b.right());
          stack.emplace_back(a.left(), b.left());
          break;
        case TermKind::Enc:
          stack.emplace_back(a.key(), b.key());
          stack.emplace_back(a.body(), b.body());
          break;
        case TermKind::Hash:
          stack.emplace_back(a.body(), b.body());
          break;
        default:
          return false;  // distinct atoms, or epsilon vs something
      }
    }
    return true;
  }

  Term resolve(const Term& t) const {
    return rewrite(t, [&](const Term& u) -> std::optional<Term> {
      if (u.is_ground()) return u;
      if (u.is_variable()) {
        Term w = walk(u);
        if (w.is_variable()) return w;
        return resolve(w);
      }
      return std::nullopt;
    });
  }

  Substitution result() const {
    Substitution s;
    for (const auto& [v, _] : bound_) {
      s.bind(v, resolve(Term::variable(v)));
    }
    return s;
  }

 private:
  std::map<std::string, Term> bound_;
};

}  // namespace

std::optional<Substitution> unify(const Term& a, const Term& b) {
  Solver solver;
  if (!solver.solve(a, b)) return std::nullopt;
  return solver.result();
}

std::optional<Substitution> unify_all(const std::vector<std::pair<Term, Term>>& equations) {
  Solver solver;
  for (const auto& [a, b] : equations) {
    if (!solver.solve(a, b)) return std::nullopt;
  }
  return solver.result();
}

// ---------------------------------------------------------------------------

std::vector<Term> encrypted_subterms(const Term& m) {
  std::vector<Term> out;
  std::unordered_set<Term, TermHash> seen;
  auto fn = [&](const Term& t, bool) {
    if (t.is_enc() && seen.insert(t).second) out.push_back(t);
  };
  visit(m, false, fn);
  return out;
}

std::vector<Term> top_level_encryptions(const Term& m) {
  std::vector<Term> out;
  std::unordered_set<Term, TermHash> seen;
  std::function<void(const Term&)> go = [&](const Term& t) {
    switch (t.kind()) {
      case TermKind::Enc:
        if (seen.insert(t).second) out.push_back(t);
        break;
      case TermKind::Pair:
        go(t.left());
        go(t.right());
        break;
      case TermKind::Hash:
        go(t.body());
        break;
      default:
        break;
    }
  };
  go(m);
  return out;
}

Term rename_apart(const Term& m, std::string_view tag) {
  if (m.is_ground()) return m;
  return rewrite(m, [&](const Term& t) -> std::optional<Term> {
    if (t.is_ground()) return t;
    if (t.is_variable()) {
      std::optional<KeyLink> link = t.key_link();
      if (link) link->owner += tag;
      return Term::variable(t.name() + std::string(tag), std::move(link));
    }
    return std::nullopt;
  });
}

}  // namespace witness
