#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "witness/derivation.hpp"
#include "witness/protocol.hpp"

namespace witness {

class QueryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// F(α, ∂[ᾱ]m): the static upper bound.
SecurityLevel upper_bound(SelectionKind kind, const AtomOrVarBinding& b, const Term& m,
                          const VerificationContext& ctx);

/// Meet, over encrypted components of m and the patterns unifiable with
/// them, of the derivative evaluation under the most general unifier.
SecurityLevel lower_bound(SelectionKind kind, const AtomOrVarBinding& b, const Term& m,
                          const PatternSet& patterns, const VerificationContext& ctx);

/// Exact witness value of a ground message: meet over every pattern that
/// matches an encrypted component of `ground_m`.
SecurityLevel witness_value_ground(SelectionKind kind, const Term& alpha, const Term& ground_m,
                                   const PatternSet& patterns, const VerificationContext& ctx);

struct SecrecyResult {
  std::string role;
  int step = 0;
  std::string item;
  bool variable = false;
  SecurityLevel reception;
  SecurityLevel context;
  SecurityLevel rhs;
  SecurityLevel lower;
  SecurityLevel upper;
  bool pass = false;
};

struct SecrecyReport {
  std::string protocol;
  SelectionKind function = SelectionKind::Max;
  /// Ordered by (role, step, item).
  std::vector<SecrecyResult> results;
  bool overall = true;
  std::vector<std::string> notes;
};

SecrecyReport check_secrecy(const ProtocolSpec& spec, SelectionKind kind);

struct AuthQuery {
  std::string authenticator;
  std::string authenticatee;
  std::string secret;
  int step = 0;
};

struct AuthReport {
  AuthQuery query;
  /// Template item the secret was located at (an atom or a variable).
  std::string located_at;
  SecurityLevel upper;
  bool secrecy_ok = false;
  bool membership_ok = false;
  bool pass = false;
};

/// Throws QueryError when the step is not a receive of the authenticator
/// or the secret does not occur in its template.
AuthReport check_authentication(const ProtocolSpec& spec, SelectionKind kind, const AuthQuery& q);

}  // namespace witness
