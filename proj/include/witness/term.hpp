#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace witness {

enum class AtomKind : std::uint8_t { Identity, Nonce, Key, Timestamp, Payload, Constant };

std::string_view to_string(AtomKind kind);

enum class TermKind : std::uint8_t { Atom, Variable, Pair, Enc, Hash, Epsilon };

/// Which half of an identity's key pair a linked key variable stands for.
enum class KeySide : std::uint8_t { Public, Private };

/// A key variable may be linked to an identity variable: `ka'` stands for
/// "the public key of whoever A' turns out to be".
struct KeyLink {
  std::string owner;
  KeySide side = KeySide::Public;
};

class Term;

namespace detail {
struct Node;
}

/// Immutable message term. Copies share structure.
class Term {
 public:
  Term();  // Epsilon

  static Term atom(std::string name, AtomKind kind);
  static Term variable(std::string name, std::optional<KeyLink> link = std::nullopt);
  static Term pair(Term left, Term right);
  static Term enc(Term body, Term key);
  static Term hash(Term body);
  static Term epsilon();

  /// Right-nested pairing: tuple({a,b,c}) == pair(a, pair(b, c)).
  static Term tuple(const std::vector<Term>& parts);

  TermKind kind() const;
  bool is_atom() const { return kind() == TermKind::Atom; }
  bool is_variable() const { return kind() == TermKind::Variable; }
  bool is_pair() const { return kind() == TermKind::Pair; }
  bool is_enc() const { return kind() == TermKind::Enc; }
  bool is_hash() const { return kind() == TermKind::Hash; }
  bool is_epsilon() const { return kind() == TermKind::Epsilon; }

  /// Atom or Variable name; empty otherwise.
  const std::string& name() const;
  AtomKind atom_kind() const;
  const std::optional<KeyLink>& key_link() const;

  /// Pair: left/right. Enc: body/key. Hash: body.
  const Term& left() const;
  const Term& right() const;
  const Term& body() const;
  const Term& key() const;

  bool is_ground() const;
  /// Node count; an Enc counts its key leaf.
  std::size_t size() const;
  std::size_t hash_value() const;

  std::string str() const;

  friend bool operator==(const Term& a, const Term& b);
  friend std::strong_ordering operator<=>(const Term& a, const Term& b);

 private:
  explicit Term(std::shared_ptr<const detail::Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const detail::Node> node_;
};

struct TermHash {
  std::size_t operator()(const Term& t) const { return t.hash_value(); }
};

using TermSet = std::set<Term>;

/// Variable name -> term.
class Substitution {
 public:
  Substitution() = default;

  bool empty() const { return bindings_.empty(); }
  std::size_t size() const { return bindings_.size(); }
  const std::map<std::string, Term>& bindings() const { return bindings_; }

  const Term* find(const std::string& var) const;
  bool binds(const std::string& var) const { return bindings_.count(var) != 0; }

  /// Inserts without normalization; callers keep the map idempotent.
  void bind(const std::string& var, Term value);
  void erase(const std::string& var) { bindings_.erase(var); }

  /// Composition: (this ∘ other) applied as `apply(apply(t, other), this)`
  /// is replaced by one idempotent map.
  Substitution then(const Substitution& next) const;

  std::string str() const;

  friend bool operator==(const Substitution&, const Substitution&) = default;

 private:
  std::map<std::string, Term> bindings_;
};

/// All atom leaves, key positions included.
TermSet atoms(const Term& m);
/// Atoms occurring somewhere other than an Enc key slot.
TermSet non_key_atoms(const Term& m);
TermSet variables(const Term& m);
/// Variables occurring somewhere other than an Enc key slot.
TermSet non_key_variables(const Term& m);
TermSet key_position_terms(const Term& m);

bool contains(const Term& m, const Term& sub);

Term apply(const Term& m, const Substitution& s);

std::optional<Substitution> unify(const Term& a, const Term& b);
/// Unifies every pair simultaneously.
std::optional<Substitution> unify_all(const std::vector<std::pair<Term, Term>>& equations);

/// Every Enc subterm, outermost first (pre-order), duplicates removed.
std::vector<Term> encrypted_subterms(const Term& m);

/// Maximal Enc subterms reachable through Pair and Hash only.
std::vector<Term> top_level_encryptions(const Term& m);

Term rename_apart(const Term& m, std::string_view tag);

/// Depth-first replacement; `fn` returns nullopt to recurse.
template <typename Fn>
Term rewrite(const Term& m, Fn&& fn);

}  // namespace witness

#include "witness/term_inl.hpp"
