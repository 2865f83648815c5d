#include <stdexcept>
#include <string>

#include "witness/protocol.hpp"

namespace witness {

namespace corpus_data {
extern const std::string_view mission;
extern const std::string_view ns_flawed;
extern const std::string_view ns_tagged;
}  // namespace corpus_data

const std::vector<std::string>& builtin_names() {
  static const std::vector<std::string> names = {"mission", "ns_flawed", "ns_tagged"};
  return names;
}

std::string_view builtin_source(std::string_view name) {
  if (name == "mission") return corpus_data::mission;
  if (name == "ns_flawed") return corpus_data::ns_flawed;
  if (name == "ns_tagged") return corpus_data::ns_tagged;
  throw std::invalid_argument("unknown builtin protocol '" + std::string(name) +
                              "' (mission|ns_flawed|ns_tagged)");
}

ProtocolSpec load_builtin(std::string_view name) { return parse_protocol(builtin_source(name)); }

}  // namespace witness
