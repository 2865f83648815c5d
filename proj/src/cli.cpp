#include "witness/cli.hpp"

#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "witness/report.hpp"

namespace witness {

namespace {

struct Input {
  std::string builtin;
  std::string file;
  std::string positional;

  bool given() const { return !builtin.empty() || !file.empty() || !positional.empty(); }

  ProtocolSpec load() const {
    const int n = !builtin.empty() + !file.empty() + !positional.empty();
    if (n == 0) throw std::invalid_argument("no protocol given (use --builtin NAME or a file path)");
    if (n > 1) throw std::invalid_argument("give exactly one protocol source");
    if (!builtin.empty()) return load_builtin(builtin);
    return load_protocol_file(file.empty() ? positional : file);
  }
};

void add_input(CLI::App* cmd, Input& in) {
  cmd->add_option("--builtin", in.builtin, "shipped protocol name");
  cmd->add_option("--file", in.file, "protocol file");
  cmd->add_option("input", in.positional, "protocol file");
}

void add_format(CLI::App* cmd, std::string& format) {
  cmd->add_option("--format", format, "text or json")->check(CLI::IsMember({"text", "json"}));
}

void add_function(CLI::App* cmd, std::string& function) {
  cmd->add_option("--function", function, "max, ek or n")->check(CLI::IsMember({"max", "ek", "n"}));
}

AuthQuery parse_auth(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string p; std::getline(ss, p, ',');) parts.push_back(p);
  if (parts.size() != 4) throw QueryError("--auth expects authenticator,authenticatee,secret,step");
  for (const auto& p : parts) {
    if (p.empty()) throw QueryError("--auth has an empty field");
  }
  std::size_t used = 0;
  int step = 0;
  try {
    step = std::stoi(parts[3], &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != parts[3].size()) throw QueryError("--auth step must be an integer");
  return {parts[0], parts[1], parts[2], step};
}

/// The given protocol, or every shipped one.
std::vector<ProtocolSpec> inputs_or_corpus(const Input& in) {
  if (in.given()) return {in.load()};
  std::vector<ProtocolSpec> all;
  for (const auto& name : builtin_names()) all.push_back(load_builtin(name));
  return all;
}

std::string label(const std::vector<ProtocolSpec>& specs) { return specs.size() == 1 ? specs.front().name : "corpus"; }

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Static secrecy and authentication analysis of cryptographic protocols", "wfcheck"};
  app.require_subcommand(1);

  Input in;
  std::string format = "text";
  std::string function = "max";
  std::string auth;
  int sessions = 2;
  int depth = 2;
  std::size_t state_limit = SearchConfig{}.state_limit;
  bool fresh = false;
  bool serial = false;
  std::uint64_t seed = 1;
  int trials = 1000;
  int scenarios = 20;
  int max_size = 4;
  int samples = 1000;

  auto* analyze = app.add_subcommand("analyze", "secrecy report, or an authentication query with --auth");
  add_input(analyze, in);
  add_function(analyze, function);
  add_format(analyze, format);
  analyze->add_option("--auth", auth, "authenticator,authenticatee,secret,step");

  auto* attack = app.add_subcommand("attack", "bounded attack search");
  add_input(attack, in);
  add_format(attack, format);
  attack->add_option("--sessions", sessions, "instances per role")->check(CLI::PositiveNumber);
  attack->add_option("--depth", depth, "synthesis depth")->check(CLI::NonNegativeNumber);
  attack->add_option("--state-limit", state_limit, "states before giving up");
  attack->add_flag("--fresh-timestamps", fresh, "a principal accepts each timestamp at most once");
  attack->add_flag("--serial", serial, "disable the parallel layer expansion");

  auto* overlap = app.add_subcommand("check-overlap", "cross-step pattern confusion");
  add_input(overlap, in);
  add_format(overlap, format);
  overlap->add_flag("--serial", serial, "disable the parallel pairwise check");

  auto* nonrep = app.add_subcommand("check-nonrep", "sender attribution per step");
  add_input(nonrep, in);
  add_format(nonrep, format);

  auto* roles = app.add_subcommand("roles", "generalized roles of each principal");
  add_input(roles, in);
  add_format(roles, format);

  auto* corpus = app.add_subcommand("corpus", "list shipped protocols, or print one with --builtin");
  corpus->add_option("--builtin", in.builtin, "print this protocol's source");
  add_format(corpus, format);

  auto* probe_wf = app.add_subcommand("probe-wf", "randomized well-formedness laws");
  add_input(probe_wf, in);
  add_function(probe_wf, function);
  add_format(probe_wf, format);
  probe_wf->add_option("--trials", trials, "trials per protocol")->check(CLI::PositiveNumber);
  probe_wf->add_option("--seed", seed, "random seed");

  auto* probe_fi = app.add_subcommand("probe-fi", "randomized full invariance by intruder");
  add_input(probe_fi, in);
  add_function(probe_fi, function);
  add_format(probe_fi, format);
  probe_fi->add_option("--scenarios", scenarios, "scenarios per protocol")->check(CLI::PositiveNumber);
  probe_fi->add_option("--max-size", max_size, "largest derived term")->check(CLI::PositiveNumber);
  probe_fi->add_option("--seed", seed, "random seed");
  probe_fi->add_flag("--serial", serial, "disable the parallel scenarios");

  auto* sandwich = app.add_subcommand("sandwich", "sample lower <= witness <= upper on random instances");
  add_input(sandwich, in);
  add_function(sandwich, function);
  add_format(sandwich, format);
  sandwich->add_option("--samples", samples, "instances per item")->check(CLI::PositiveNumber);
  sandwich->add_option("--seed", seed, "random seed");
  sandwich->add_flag("--serial", serial, "disable the parallel sampling");

  std::vector<std::string> argv_store{"wfcheck"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_store) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kPass : kError;
  }

  try {
    const SelectionKind kind = parse_selection_kind(function);
    Json report;
    if (analyze->parsed()) {
      const auto spec = in.load();
      report = auth.empty() ? to_json(check_secrecy(spec, kind))
                            : to_json(check_authentication(spec, kind, parse_auth(auth)), spec.name, kind);
    } else if (attack->parsed()) {
      const auto spec = in.load();
      SearchConfig config;
      config.max_sessions = sessions;
      config.synth_depth = depth;
      config.state_limit = state_limit;
      config.fresh_timestamps = fresh;
      config.parallel = !serial;
      report = to_json(search_attack(spec, config), spec.name, config);
    } else if (overlap->parsed()) {
      const auto spec = in.load();
      report = to_json(check_overlap(spec, !serial), spec.name);
    } else if (nonrep->parsed()) {
      const auto spec = in.load();
      report = to_json(check_non_repudiation(spec), spec.name);
    } else if (roles->parsed()) {
      report = roles_to_json(in.load());
    } else if (corpus->parsed()) {
      if (!in.builtin.empty()) {
        out << builtin_source(in.builtin);
        return kPass;
      }
      report = corpus_to_json();
    } else if (probe_wf->parsed()) {
      const auto specs = inputs_or_corpus(in);
      std::vector<WellFormednessViolation> all;
      for (const auto& s : specs) {
        for (auto& v : probe_well_formedness(kind, s.context(), trials, seed)) all.push_back(std::move(v));
      }
      report = wf_probe_to_json(label(specs), kind, trials, seed, all);
    } else if (probe_fi->parsed()) {
      const auto specs = inputs_or_corpus(in);
      const auto summary = probe_full_invariance_random(
          specs, [&](const VerificationContext& ctx) { return make_level_function(kind, ctx); }, scenarios, max_size,
          seed, !serial);
      report = fi_probe_to_json(label(specs), kind, scenarios, max_size, seed, summary);
    } else if (sandwich->parsed()) {
      const auto spec = in.load();
      report = to_json(check_sandwich(spec, kind, samples, seed, !serial), spec.name, kind, samples, seed);
    }

    if (format == "json") {
      out << report.dump(2) << "\n";
    } else {
      out << render_text(report);
    }
    if (report.value("outcome", "") == "bound-exhausted") return kExhausted;
    return report.at("pass").get<bool>() ? kPass : kFinding;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kError;
  }
}

}  // namespace witness
