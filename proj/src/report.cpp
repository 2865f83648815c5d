#include "witness/report.hpp"

#include <map>
#include <sstream>
#include <stdexcept>

namespace witness {

namespace {

Json level(const SecurityLevel& l) { return Json(to_json(l)); }

SecurityLevel level_of_json(const Json& j) { return level_from_json(nlohmann::json(j)); }

Json notes(const std::vector<std::string>& n) { return Json(n); }

Json header(const char* kind, const std::string& protocol) {
  Json j;
  j["kind"] = kind;
  j["protocol"] = protocol;
  return j;
}

std::string yes(bool b) { return b ? "yes" : "no"; }

std::string lvl(const Json& j) { return level_of_json(j).str(); }

}  // namespace

Json to_json(const SecrecyReport& r) {
  Json j = header("secrecy", r.protocol);
  j["function"] = std::string(to_string(r.function));
  Json rows = Json::array();
  for (const auto& x : r.results) {
    rows.push_back({{"role", x.role},
                    {"step", x.step},
                    {"item", x.item},
                    {"variable", x.variable},
                    {"reception", level(x.reception)},
                    {"context", level(x.context)},
                    {"rhs", level(x.rhs)},
                    {"lower", level(x.lower)},
                    {"upper", level(x.upper)},
                    {"pass", x.pass}});
  }
  j["results"] = std::move(rows);
  j["pass"] = r.overall;
  j["notes"] = notes(r.notes);
  return j;
}

SecrecyReport secrecy_from_json(const Json& j) {
  if (auto errs = validate_report(j); !errs.empty()) throw std::invalid_argument(errs.front());
  if (j.at("kind") != "secrecy") throw std::invalid_argument("not a secrecy report");
  SecrecyReport r;
  r.protocol = j.at("protocol").get<std::string>();
  r.function = parse_selection_kind(j.at("function").get<std::string>());
  for (const auto& x : j.at("results")) {
    SecrecyResult s;
    s.role = x.at("role").get<std::string>();
    s.step = x.at("step").get<int>();
    s.item = x.at("item").get<std::string>();
    s.variable = x.at("variable").get<bool>();
    s.reception = level_of_json(x.at("reception"));
    s.context = level_of_json(x.at("context"));
    s.rhs = level_of_json(x.at("rhs"));
    s.lower = level_of_json(x.at("lower"));
    s.upper = level_of_json(x.at("upper"));
    s.pass = x.at("pass").get<bool>();
    r.results.push_back(std::move(s));
  }
  r.overall = j.at("pass").get<bool>();
  r.notes = j.at("notes").get<std::vector<std::string>>();
  return r;
}

Json to_json(const AuthReport& r, const std::string& protocol, SelectionKind kind) {
  Json j = header("authentication", protocol);
  j["function"] = std::string(to_string(kind));
  j["query"] = {{"authenticator", r.query.authenticator},
                {"authenticatee", r.query.authenticatee},
                {"secret", r.query.secret},
                {"step", r.query.step}};
  j["located_at"] = r.located_at;
  j["upper"] = level(r.upper);
  j["secrecy_ok"] = r.secrecy_ok;
  j["membership_ok"] = r.membership_ok;
  j["pass"] = r.pass;
  j["notes"] = Json::array();
  return j;
}

Json to_json(const SearchResult& r, const std::string& protocol, const SearchConfig& config) {
  Json j = header("attack", protocol);
  j["bounds"] = {{"sessions", config.max_sessions},
                 {"depth", config.synth_depth},
                 {"state_limit", config.state_limit},
                 {"fresh_timestamps", config.fresh_timestamps}};
  j["outcome"] = std::string(to_string(r.outcome));
  j["states"] = r.states;
  j["layers"] = r.layers;
  j["by_overapproximation"] = r.by_overapproximation;
  if (r.trace) {
    Json sessions = Json::array();
    for (const auto& s : r.trace->sessions) {
      sessions.push_back({{"session", s.session}, {"role", s.role}, {"self", s.self}, {"peers", s.peers}});
    }
    Json events = Json::array();
    for (const auto& e : r.trace->events) {
      events.push_back({{"session", e.session},
                        {"step", e.step},
                        {"direction", std::string(to_string(e.direction))},
                        {"message", e.message.str()},
                        {"action", std::string(to_string(e.action))}});
    }
    j["trace"] = {{"sessions", std::move(sessions)},
                  {"events", std::move(events)},
                  {"exposed_secret", r.trace->exposed_secret.str()},
                  {"secret_level", level(r.trace->secret_level)},
                  {"diagram", render_trace(*r.trace)}};
  } else {
    j["trace"] = nullptr;
  }
  j["pass"] = r.outcome == SearchOutcome::NoAttack;
  j["notes"] = Json::array();
  if (!config.fresh_timestamps) j["notes"].push_back("timestamps are not freshness constraints; replays of them are allowed");
  return j;
}

Json to_json(const OverlapReport& r, const std::string& protocol) {
  Json j = header("overlap", protocol);
  Json rows = Json::array();
  for (const auto& o : r.overlaps) {
    Json u = Json::object();
    for (const auto& [v, t] : o.unifier.bindings()) u[v] = t.str();
    rows.push_back({{"step_a", o.step_a},
                    {"step_b", o.step_b},
                    {"pattern_a", o.pattern_a.str()},
                    {"pattern_b", o.pattern_b.str()},
                    {"unifier", std::move(u)}});
  }
  j["overlaps"] = std::move(rows);
  j["pass"] = r.clean;
  j["notes"] = notes(r.notes);
  return j;
}

Json to_json(const NonRepReport& r, const std::string& protocol) {
  Json j = header("nonrep", protocol);
  Json rows = Json::array();
  for (const auto& s : r.steps) {
    rows.push_back({{"step", s.step},
                    {"sender", s.sender},
                    {"sender_identity_plain", s.sender_identity_plain},
                    {"sender_identity_signed", s.sender_identity_signed},
                    {"all_asymmetric", s.all_asymmetric},
                    {"verdict", s.verdict}});
  }
  j["steps"] = std::move(rows);
  j["pass"] = r.pass;
  j["notes"] = Json::array();
  return j;
}

Json roles_to_json(const ProtocolSpec& spec) {
  Json j = header("roles", spec.name);
  Json roles = Json::array();
  for (const auto& role : project_generalized_roles(spec)) {
    Json events = Json::array();
    for (const auto& ev : role.events) {
      events.push_back({{"step", ev.step}, {"direction", std::string(to_string(ev.direction))}, {"template", ev.templ.str()}});
    }
    Json honest = Json::object();
    for (const auto& [v, t] : role.honest_binding.bindings()) honest[v] = t.str();
    roles.push_back({{"role", role.role_id}, {"principal", role.principal}, {"events", std::move(events)},
                     {"honest_binding", std::move(honest)}});
  }
  j["roles"] = std::move(roles);
  j["pass"] = true;
  j["notes"] = Json::array();
  return j;
}

Json corpus_to_json() {
  Json j;
  j["kind"] = "corpus";
  Json list = Json::array();
  for (const auto& name : builtin_names()) {
    const auto spec = load_builtin(name);
    list.push_back({{"name", name}, {"principals", spec.principals}, {"steps", spec.steps.size()}});
  }
  j["protocols"] = std::move(list);
  j["pass"] = true;
  j["notes"] = Json::array();
  return j;
}

Json wf_probe_to_json(const std::string& protocol, SelectionKind kind, int trials, std::uint64_t seed,
                      const std::vector<WellFormednessViolation>& v) {
  Json j = header("probe-wf", protocol);
  j["function"] = std::string(to_string(kind));
  j["trials"] = trials;
  j["seed"] = seed;
  Json rows = Json::array();
  for (const auto& x : v) rows.push_back({{"law", x.law}, {"detail", x.detail}});
  j["violations"] = std::move(rows);
  j["pass"] = v.empty();
  j["notes"] = Json::array();
  return j;
}

Json fi_probe_to_json(const std::string& protocol, SelectionKind kind, int scenarios, int max_size,
                      std::uint64_t seed, const InvarianceSummary& s) {
  Json j = header("probe-fi", protocol);
  j["function"] = std::string(to_string(kind));
  j["scenarios"] = scenarios;
  j["max_size"] = max_size;
  j["seed"] = seed;
  j["messages_checked"] = s.messages_checked;
  Json rows = Json::array();
  for (const auto& x : s.violations) {
    rows.push_back({{"alpha", x.alpha.str()},
                    {"message", x.message.str()},
                    {"in_knowledge", level(x.in_knowledge)},
                    {"in_message", level(x.in_message)}});
  }
  j["violations"] = std::move(rows);
  j["pass"] = s.violations.empty();
  j["notes"] = Json::array();
  return j;
}

Json to_json(const SandwichSummary& s, const std::string& protocol, SelectionKind kind, int samples,
             std::uint64_t seed) {
  Json j = header("sandwich", protocol);
  j["function"] = std::string(to_string(kind));
  j["samples"] = samples;
  j["seed"] = seed;
  j["items"] = s.items;
  Json rows = Json::array();
  for (const auto& v : s.violations) {
    rows.push_back({{"role", v.role},
                    {"step", v.step},
                    {"measured", v.measured.str()},
                    {"instance", v.instance.str()},
                    {"lower", level(v.lower)},
                    {"witness", level(v.witness)},
                    {"upper", level(v.upper)}});
  }
  j["violations"] = std::move(rows);
  j["pass"] = s.violations.empty();
  j["notes"] = Json::array();
  return j;
}

namespace {

enum class T { Str, Int, Bool, Level, Arr, Obj, StrMap, Any };

bool is_level(const Json& j) {
  if (j.is_string()) return j.get<std::string>() == "BOTTOM";
  if (!j.is_array()) return false;
  for (const auto& e : j) {
    if (!e.is_string()) return false;
  }
  return true;
}

bool has_type(const Json& j, T t) {
  switch (t) {
    case T::Str: return j.is_string();
    case T::Int: return j.is_number_integer();
    case T::Bool: return j.is_boolean();
    case T::Level: return is_level(j);
    case T::Arr: return j.is_array();
    case T::Obj: return j.is_object();
    case T::StrMap:
      if (!j.is_object()) return false;
      for (const auto& [k, v] : j.items()) {
        if (!v.is_string()) return false;
      }
      return true;
    case T::Any: return true;
  }
  return false;
}

using Fields = std::vector<std::pair<const char*, T>>;

void require(const Json& j, const Fields& fields, const std::string& where, std::vector<std::string>& errs) {
  if (!j.is_object()) {
    errs.push_back(where + ": expected an object");
    return;
  }
  for (const auto& [name, t] : fields) {
    if (!j.contains(name)) {
      errs.push_back(where + ": missing '" + name + "'");
    } else if (!has_type(j.at(name), t)) {
      errs.push_back(where + ": wrong type for '" + name + "'");
    }
  }
}

void each(const Json& j, const char* field, const Fields& fields, std::vector<std::string>& errs) {
  if (!j.contains(field) || !j.at(field).is_array()) return;
  std::size_t i = 0;
  for (const auto& e : j.at(field)) require(e, fields, std::string(field) + "[" + std::to_string(i++) + "]", errs);
}

const std::map<std::string, Fields>& layouts() {
  static const std::map<std::string, Fields> m = {
      {"secrecy", {{"protocol", T::Str}, {"function", T::Str}, {"results", T::Arr}}},
      {"authentication",
       {{"protocol", T::Str}, {"function", T::Str}, {"query", T::Obj}, {"located_at", T::Str}, {"upper", T::Level},
        {"secrecy_ok", T::Bool}, {"membership_ok", T::Bool}}},
      {"attack",
       {{"protocol", T::Str}, {"bounds", T::Obj}, {"outcome", T::Str}, {"states", T::Int}, {"layers", T::Int},
        {"by_overapproximation", T::Bool}, {"trace", T::Any}}},
      {"overlap", {{"protocol", T::Str}, {"overlaps", T::Arr}}},
      {"nonrep", {{"protocol", T::Str}, {"steps", T::Arr}}},
      {"roles", {{"protocol", T::Str}, {"roles", T::Arr}}},
      {"corpus", {{"protocols", T::Arr}}},
      {"probe-wf", {{"protocol", T::Str}, {"function", T::Str}, {"trials", T::Int}, {"seed", T::Int}, {"violations", T::Arr}}},
      {"probe-fi",
       {{"protocol", T::Str}, {"function", T::Str}, {"scenarios", T::Int}, {"max_size", T::Int}, {"seed", T::Int},
        {"messages_checked", T::Int}, {"violations", T::Arr}}},
      {"sandwich",
       {{"protocol", T::Str}, {"function", T::Str}, {"samples", T::Int}, {"seed", T::Int}, {"items", T::Int},
        {"violations", T::Arr}}},
  };
  return m;
}

}  // namespace

std::vector<std::string> validate_report(const Json& j) {
  std::vector<std::string> errs;
  require(j, {{"kind", T::Str}, {"pass", T::Bool}, {"notes", T::Arr}}, "report", errs);
  if (!errs.empty()) return errs;
  const std::string kind = j.at("kind").get<std::string>();
  auto it = layouts().find(kind);
  if (it == layouts().end()) return {"report: unknown kind '" + kind + "'"};
  require(j, it->second, kind, errs);
  for (const auto& n : j.at("notes")) {
    if (!n.is_string()) errs.push_back("notes: entries must be strings");
  }
  if (j.contains("function") && j.at("function").is_string()) {
    const auto f = j.at("function").get<std::string>();
    if (f != "max" && f != "ek" && f != "n") errs.push_back(kind + ": unknown function '" + f + "'");
  }
  if (!errs.empty()) return errs;

  if (kind == "secrecy") {
    each(j, "results",
         {{"role", T::Str}, {"step", T::Int}, {"item", T::Str}, {"variable", T::Bool}, {"reception", T::Level},
          {"context", T::Level}, {"rhs", T::Level}, {"lower", T::Level}, {"upper", T::Level}, {"pass", T::Bool}},
         errs);
    bool all = true;
    for (const auto& r : j.at("results")) all = all && r.value("pass", false);
    if (errs.empty() && all != j.at("pass").get<bool>()) errs.push_back("secrecy: pass disagrees with results");
  } else if (kind == "authentication") {
    require(j.at("query"), {{"authenticator", T::Str}, {"authenticatee", T::Str}, {"secret", T::Str}, {"step", T::Int}},
            "query", errs);
    if (errs.empty() && j.at("pass").get<bool>() != (j.at("secrecy_ok").get<bool>() && j.at("membership_ok").get<bool>())) {
      errs.push_back("authentication: pass disagrees with its conditions");
    }
  } else if (kind == "attack") {
    require(j.at("bounds"), {{"sessions", T::Int}, {"depth", T::Int}, {"state_limit", T::Int}, {"fresh_timestamps", T::Bool}},
            "bounds", errs);
    const auto outcome = j.at("outcome").get<std::string>();
    if (outcome != "attack" && outcome != "no-attack" && outcome != "bound-exhausted") {
      errs.push_back("attack: unknown outcome '" + outcome + "'");
    }
    const Json& tr = j.at("trace");
    if ((outcome == "attack") != !tr.is_null()) errs.push_back("attack: trace present iff outcome is attack");
    if (!tr.is_null()) {
      require(tr, {{"sessions", T::Arr}, {"events", T::Arr}, {"exposed_secret", T::Str}, {"secret_level", T::Level},
                   {"diagram", T::Str}},
              "trace", errs);
      if (errs.empty()) {
        each(tr, "sessions", {{"session", T::Int}, {"role", T::Str}, {"self", T::Str}, {"peers", T::StrMap}}, errs);
        each(tr, "events",
             {{"session", T::Int}, {"step", T::Int}, {"direction", T::Str}, {"message", T::Str}, {"action", T::Str}},
             errs);
      }
    }
    if (errs.empty() && j.at("pass").get<bool>() != (outcome == "no-attack")) errs.push_back("attack: pass disagrees with outcome");
  } else if (kind == "overlap") {
    each(j, "overlaps",
         {{"step_a", T::Int}, {"step_b", T::Int}, {"pattern_a", T::Str}, {"pattern_b", T::Str}, {"unifier", T::StrMap}},
         errs);
    if (errs.empty() && j.at("pass").get<bool>() != j.at("overlaps").empty()) errs.push_back("overlap: pass disagrees with overlaps");
  } else if (kind == "nonrep") {
    each(j, "steps",
         {{"step", T::Int}, {"sender", T::Str}, {"sender_identity_plain", T::Bool}, {"sender_identity_signed", T::Bool},
          {"all_asymmetric", T::Bool}, {"verdict", T::Bool}},
         errs);
    if (errs.empty()) {
      bool all = true;
      for (const auto& s : j.at("steps")) {
        const bool v = (s.at("sender_identity_plain").get<bool>() || s.at("sender_identity_signed").get<bool>()) &&
                       s.at("all_asymmetric").get<bool>();
        if (v != s.at("verdict").get<bool>()) errs.push_back("nonrep: verdict disagrees with its conditions");
        all = all && v;
      }
      if (all != j.at("pass").get<bool>()) errs.push_back("nonrep: pass disagrees with steps");
    }
  } else if (kind == "roles") {
    each(j, "roles", {{"role", T::Str}, {"principal", T::Str}, {"events", T::Arr}, {"honest_binding", T::StrMap}}, errs);
  } else if (kind == "corpus") {
    each(j, "protocols", {{"name", T::Str}, {"principals", T::Arr}, {"steps", T::Int}}, errs);
  } else if (kind == "probe-wf") {
    each(j, "violations", {{"law", T::Str}, {"detail", T::Str}}, errs);
  } else if (kind == "probe-fi") {
    each(j, "violations", {{"alpha", T::Str}, {"message", T::Str}, {"in_knowledge", T::Level}, {"in_message", T::Level}}, errs);
  } else if (kind == "sandwich") {
    each(j, "violations",
         {{"role", T::Str}, {"step", T::Int}, {"measured", T::Str}, {"instance", T::Str}, {"lower", T::Level},
          {"witness", T::Level}, {"upper", T::Level}},
         errs);
  }
  if (errs.empty() && j.contains("violations") && j.at("pass").get<bool>() != j.at("violations").empty()) {
    errs.push_back(kind + ": pass disagrees with violations");
  }
  return errs;
}

std::string render_text(const Json& j) {
  std::ostringstream out;
  const std::string kind = j.at("kind").get<std::string>();
  if (j.contains("protocol")) out << kind << " " << j.at("protocol").get<std::string>();
  else out << kind;
  if (j.contains("function")) out << " function=" << j.at("function").get<std::string>();
  out << "\n";

  if (kind == "secrecy") {
    for (const auto& r : j.at("results")) {
      out << "  " << r.at("role").get<std::string>() << " step " << r.at("step").get<int>() << " "
          << r.at("item").get<std::string>() << (r.at("variable").get<bool>() ? " (block)" : "")
          << "  reception=" << lvl(r.at("reception")) << " context=" << lvl(r.at("context"))
          << " rhs=" << lvl(r.at("rhs")) << " lower=" << lvl(r.at("lower")) << " upper=" << lvl(r.at("upper"))
          << "  " << (r.at("pass").get<bool>() ? "ok" : "FAIL") << "\n";
    }
  } else if (kind == "authentication") {
    const Json& q = j.at("query");
    out << "  " << q.at("authenticator").get<std::string>() << " authenticates "
        << q.at("authenticatee").get<std::string>() << " via " << q.at("secret").get<std::string>() << " at step "
        << q.at("step").get<int>() << " (located at " << j.at("located_at").get<std::string>() << ")\n"
        << "  upper=" << lvl(j.at("upper")) << "\n"
        << "  secrecy condition: " << yes(j.at("secrecy_ok").get<bool>()) << "\n"
        << "  membership condition: " << yes(j.at("membership_ok").get<bool>()) << "\n";
  } else if (kind == "attack") {
    const Json& b = j.at("bounds");
    out << "  sessions=" << b.at("sessions").get<int>() << " depth=" << b.at("depth").get<int>()
        << " fresh_timestamps=" << yes(b.at("fresh_timestamps").get<bool>()) << "\n"
        << "  outcome: " << j.at("outcome").get<std::string>() << " (states=" << j.at("states").get<std::size_t>()
        << ", layers=" << j.at("layers").get<int>()
        << (j.at("by_overapproximation").get<bool>() ? ", by relaxation" : "") << ")\n";
    if (!j.at("trace").is_null()) out << j.at("trace").at("diagram").get<std::string>();
  } else if (kind == "overlap") {
    for (const auto& o : j.at("overlaps")) {
      out << "  steps " << o.at("step_a").get<int>() << "," << o.at("step_b").get<int>() << ": "
          << o.at("pattern_a").get<std::string>() << " ~ " << o.at("pattern_b").get<std::string>() << "\n";
    }
    if (j.at("overlaps").empty()) out << "  no cross-step overlap\n";
  } else if (kind == "nonrep") {
    for (const auto& s : j.at("steps")) {
      out << "  step " << s.at("step").get<int>() << " sender " << s.at("sender").get<std::string>()
          << "  plain=" << yes(s.at("sender_identity_plain").get<bool>())
          << " signed=" << yes(s.at("sender_identity_signed").get<bool>())
          << " asymmetric=" << yes(s.at("all_asymmetric").get<bool>()) << "  "
          << (s.at("verdict").get<bool>() ? "ok" : "FAIL") << "\n";
    }
  } else if (kind == "roles") {
    for (const auto& r : j.at("roles")) {
      out << "  role " << r.at("role").get<std::string>() << "\n";
      for (const auto& e : r.at("events")) {
        out << "    " << e.at("step").get<int>() << " " << e.at("direction").get<std::string>() << " "
            << e.at("template").get<std::string>() << "\n";
      }
    }
  } else if (kind == "corpus") {
    for (const auto& p : j.at("protocols")) {
      out << "  " << p.at("name").get<std::string>() << " (" << p.at("steps").get<std::size_t>() << " steps)\n";
    }
  } else if (kind == "probe-wf" || kind == "probe-fi" || kind == "sandwich") {
    if (kind == "probe-wf") out << "  trials=" << j.at("trials").get<int>();
    if (kind == "probe-fi") {
      out << "  scenarios=" << j.at("scenarios").get<int>() << " max_size=" << j.at("max_size").get<int>()
          << " messages=" << j.at("messages_checked").get<std::size_t>();
    }
    if (kind == "sandwich") out << "  items=" << j.at("items").get<std::size_t>() << " samples=" << j.at("samples").get<int>();
    out << " seed=" << j.at("seed").get<std::uint64_t>() << " violations=" << j.at("violations").size() << "\n";
    for (const auto& v : j.at("violations")) out << "    " << v.dump() << "\n";
  }
  for (const auto& n : j.at("notes")) out << "  note: " << n.get<std::string>() << "\n";

  std::string verdict = j.at("pass").get<bool>() ? "pass" : "fail";
  if (kind == "attack" && j.at("outcome") == "bound-exhausted") verdict = "bound-exhausted";
  out << "verdict: " << verdict << "\n";
  return out.str();
}

}  // namespace witness
