#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "witness/attack.hpp"
#include "witness/sandwich.hpp"
#include "witness/structcheck.hpp"
#include "witness/witness.hpp"

namespace witness {

using Json = nlohmann::ordered_json;

/// Every report carries "kind", "protocol" (except corpus listings), a
/// boolean "pass" and "notes". Layouts are in docs/report-schema.md.
Json to_json(const SecrecyReport& r);
Json to_json(const AuthReport& r, const std::string& protocol, SelectionKind kind);
Json to_json(const SearchResult& r, const std::string& protocol, const SearchConfig& config);
Json to_json(const OverlapReport& r, const std::string& protocol);
Json to_json(const NonRepReport& r, const std::string& protocol);
Json roles_to_json(const ProtocolSpec& spec);
Json corpus_to_json();
Json wf_probe_to_json(const std::string& protocol, SelectionKind kind, int trials, std::uint64_t seed,
                      const std::vector<WellFormednessViolation>& v);
Json fi_probe_to_json(const std::string& protocol, SelectionKind kind, int scenarios, int max_size,
                      std::uint64_t seed, const InvarianceSummary& s);
Json to_json(const SandwichSummary& s, const std::string& protocol, SelectionKind kind, int samples,
             std::uint64_t seed);

/// Inverse of to_json(SecrecyReport); throws std::invalid_argument.
SecrecyReport secrecy_from_json(const Json& j);

/// Structural check against the documented layout. Empty when valid.
std::vector<std::string> validate_report(const Json& j);

/// Line-oriented rendering of any report produced above. The last line
/// is always "verdict: pass" or "verdict: fail" (or "bound-exhausted").
std::string render_text(const Json& j);

}  // namespace witness
