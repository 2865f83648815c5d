#include "witness/protocol.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace witness {

ParseError::ParseError(const std::string& what, int line, int column)
    : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) + ": " + what),
      line_(line),
      column_(column) {}

namespace {

enum class Tok { Ident, Number, Punct, Arrow, End };

struct Token {
  Tok type = Tok::End;
  std::string text;
  int line = 1;
  int column = 1;
};

std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < src.size()) {
    const char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '#') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    Token t;
    t.line = line;
    t.column = col;
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
      t.type = Tok::Ident;
      t.text = std::string(src.substr(i, j - i));
      advance(j - i);
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      t.type = Tok::Number;
      t.text = std::string(src.substr(i, j - i));
      advance(j - i);
    } else if (c == '-' && i + 1 < src.size() && src[i + 1] == '>') {
      t.type = Tok::Arrow;
      t.text = "->";
      advance(2);
    } else if (std::string_view("{}();,.:_").find(c) != std::string_view::npos) {
      t.type = Tok::Punct;
      t.text = std::string(1, c);
      advance(1);
    } else {
      throw ParseError(std::string("unexpected character '") + c + "'", line, col);
    }
    out.push_back(std::move(t));
  }
  Token end;
  end.line = line;
  end.column = col;
  out.push_back(end);
  return out;
}

class Parser {
 public:
  explicit Parser(std::string_view src) : toks_(lex(src)) {}

  ProtocolSpec run() {
    expect_word("protocol");
    spec_.name = ident("protocol name");
    expect("{");
    std::set<std::string> seen;
    while (!peek_is("}")) {
      const Token& t = peek();
      if (t.type != Tok::Ident) fail("expected a section keyword", t);
      if (!seen.insert(t.text).second) fail("duplicate section '" + t.text + "'", t);
      if (t.text == "principals") {
        next();
        principals();
      } else if (t.text == "intruder") {
        next();
        intruder();
      } else if (t.text == "keys") {
        next();
        keys();
      } else if (t.text == "atoms") {
        next();
        atoms();
      } else if (t.text == "steps") {
        next();
        steps();
      } else {
        fail("unknown section '" + t.text + "'", t);
      }
    }
    expect("}");
    if (peek().type != Tok::End) fail("trailing input after protocol", peek());
    validate();
    return std::move(spec_);
  }

 private:
  const Token& peek(std::size_t ahead = 0) const {
    return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
  }
  const Token& next() { return toks_[std::min(pos_++, toks_.size() - 1)]; }
  bool peek_is(std::string_view p, std::size_t ahead = 0) const {
    const Token& t = peek(ahead);
    return (t.type == Tok::Punct || t.type == Tok::Arrow) && t.text == p;
  }
  bool peek_word(std::string_view w) const { return peek().type == Tok::Ident && peek().text == w; }

  [[noreturn]] void fail(const std::string& msg, const Token& t) const {
    throw ParseError(msg, t.line, t.column);
  }

  void expect(std::string_view p) {
    if (!peek_is(p)) fail("expected '" + std::string(p) + "'", peek());
    next();
  }
  void expect_word(std::string_view w) {
    if (!peek_word(w)) fail("expected '" + std::string(w) + "'", peek());
    next();
  }
  std::string ident(const char* what) {
    if (peek().type != Tok::Ident) fail(std::string("expected ") + what, peek());
    return next().text;
  }

  void declare(const std::string& name, AtomKind kind, const Token& at) {
    if (!kinds_.emplace(name, kind).second) fail("duplicate declaration of '" + name + "'", at);
  }

  std::vector<std::string> id_list() {
    std::vector<std::string> out;
    out.push_back(ident("identity"));
    while (peek_is(",")) {
      next();
      out.push_back(ident("identity"));
    }
    return out;
  }

  SecurityLevel level() {
    if (peek_word("public")) {
      next();
      return SecurityLevel::bottom();
    }
    expect("{");
    std::set<std::string> ids;
    if (!peek_is("}")) {
      for (auto& id : id_list()) ids.insert(std::move(id));
    }
    expect("}");
    return SecurityLevel::known(std::move(ids));
  }

  void principals() {
    const Token& at = peek();
    for (const auto& p : id_list()) {
      declare(p, AtomKind::Identity, at);
      spec_.principals.push_back(p);
    }
    expect(";");
  }

  void intruder() {
    const Token& at = peek();
    spec_.intruder = ident("intruder identity");
    declare(spec_.intruder, AtomKind::Identity, at);
    if (peek_word("level")) {
      next();
      spec_.intruder_level = level();
    }
    if (peek_word("knows")) {
      next();
      knows_start_ = pos_;
      // Terms are resolved after every declaration is read.
      int depth = 0;
      while (!(depth == 0 && peek_is(";")) && peek().type != Tok::End) {
        if (peek_is("{") || peek_is("(")) ++depth;
        if (peek_is("}") || peek_is(")")) --depth;
        next();
      }
      knows_end_ = pos_;
    }
    expect(";");
  }

  void keys() {
    expect("{");
    while (!peek_is("}")) {
      const Token& at = peek();
      KeyDecl d;
      d.key = ident("key name");
      expect_word("inv");
      d.inverse = ident("inverse key name");
      expect_word("level");
      d.level = level();
      expect(";");
      declare(d.key, AtomKind::Key, at);
      if (d.inverse != d.key) declare(d.inverse, AtomKind::Key, at);
      inverse_[d.key] = d.inverse;
      inverse_[d.inverse] = d.key;
      spec_.keys.push_back(std::move(d));
    }
    expect("}");
  }

  void atoms() {
    static const std::map<std::string, AtomKind> kinds = {{"nonce", AtomKind::Nonce},
                                                          {"timestamp", AtomKind::Timestamp},
                                                          {"payload", AtomKind::Payload},
                                                          {"constant", AtomKind::Constant}};
    expect("{");
    while (!peek_is("}")) {
      const Token& at = peek();
      AtomDecl d;
      d.name = ident("atom name");
      expect(":");
      const Token& kt = peek();
      auto k = kinds.find(ident("atom kind"));
      if (k == kinds.end()) fail("atom kind must be nonce, timestamp, payload or constant", kt);
      d.kind = k->second;
      if (peek_word("of")) {
        next();
        d.owner = ident("owner identity");
      }
      expect_word("level");
      d.level = level();
      expect(";");
      declare(d.name, d.kind, at);
      spec_.atoms.push_back(std::move(d));
    }
    expect("}");
  }

  void steps() {
    expect("{");
    steps_start_ = pos_;
    int depth = 0;
    while (!(depth == 0 && peek_is("}")) && peek().type != Tok::End) {
      if (peek_is("{") || peek_is("(")) ++depth;
      if (peek_is("}") || peek_is(")")) --depth;
      next();
    }
    steps_end_ = pos_;
    expect("}");
  }

  void parse_steps() {
    std::size_t saved = pos_;
    pos_ = steps_start_;
    std::set<int> indices;
    while (pos_ < steps_end_) {
      const Token& at = peek();
      if (at.type != Tok::Number) fail("expected step number", at);
      Step s;
      s.index = std::stoi(next().text);
      expect(".");
      s.sender = identity_ref();
      if (peek().type != Tok::Arrow) fail("expected '->'", peek());
      next();
      s.receiver = identity_ref();
      expect(":");
      s.message = term();
      expect(";");
      if (!indices.insert(s.index).second) {
        throw SpecError("duplicate step index " + std::to_string(s.index));
      }
      if (s.sender == s.receiver) {
        throw SpecError("step " + std::to_string(s.index) + ": sender and receiver are both " + s.sender);
      }
      spec_.steps.push_back(std::move(s));
    }
    pos_ = saved;
  }

  void parse_knows() {
    if (knows_end_ == 0) return;
    std::size_t saved = pos_;
    pos_ = knows_start_;
    spec_.intruder_knows.push_back(term());
    while (peek_is(",")) {
      next();
      spec_.intruder_knows.push_back(term());
    }
    if (pos_ != knows_end_) fail("expected ',' or ';'", peek());
    pos_ = saved;
  }

  std::string identity_ref() {
    const Token& at = peek();
    std::string id = ident("identity");
    auto it = kinds_.find(id);
    if (it == kinds_.end() || it->second != AtomKind::Identity) {
      throw SpecError(std::to_string(at.line) + ":" + std::to_string(at.column) + ": '" + id +
                      "' is not a declared identity");
    }
    return id;
  }

  Term atom_ref() {
    const Token& at = peek();
    std::string name = ident("atom");
    auto it = kinds_.find(name);
    if (it == kinds_.end()) {
      throw SpecError(std::to_string(at.line) + ":" + std::to_string(at.column) + ": undeclared atom '" +
                      name + "'");
    }
    return Term::atom(name, it->second);
  }

  Term key_ref() {
    if (peek_word("inv") && peek_is("(", 1)) {
      next();
      next();
      const Token& at = peek();
      std::string k = ident("key");
      expect(")");
      auto it = inverse_.find(k);
      if (it == inverse_.end()) {
        throw SpecError(std::to_string(at.line) + ":" + std::to_string(at.column) + ": '" + k +
                        "' is not a declared key");
      }
      return Term::atom(it->second, AtomKind::Key);
    }
    // Any declared atom may serve as a symmetric key.
    return atom_ref();
  }

  Term term() {
    Term first = primary();
    if (peek_is(".")) {
      next();
      return Term::pair(first, term());
    }
    return first;
  }

  Term primary() {
    if (peek_is("{")) {
      next();
      Term body = term();
      expect("}");
      expect("_");
      return Term::enc(body, key_ref());
    }
    if (peek_is("(")) {
      next();
      Term t = term();
      expect(")");
      return t;
    }
    if (peek_word("h") && peek_is("(", 1) && !kinds_.count("h")) {
      next();
      next();
      Term body = term();
      expect(")");
      return Term::hash(body);
    }
    return atom_ref();
  }

  void validate() {
    if (spec_.principals.empty()) throw SpecError("no principals declared");
    if (spec_.intruder.empty()) throw SpecError("no intruder declared");
    for (const auto& a : spec_.atoms) {
      if (a.owner) {
        auto it = kinds_.find(*a.owner);
        if (it == kinds_.end() || it->second != AtomKind::Identity) {
          throw SpecError("owner '" + *a.owner + "' of atom '" + a.name + "' is not an identity");
        }
      }
    }
    parse_knows();
    parse_steps();
    if (spec_.steps.empty()) throw SpecError("protocol '" + spec_.name + "' has no steps");
    std::sort(spec_.steps.begin(), spec_.steps.end(),
              [](const Step& a, const Step& b) { return a.index < b.index; });
    for (std::size_t i = 0; i < spec_.steps.size(); ++i) {
      if (spec_.steps[i].index != static_cast<int>(i + 1)) {
        throw SpecError("step indices must be 1.." + std::to_string(spec_.steps.size()) + " without gaps");
      }
    }
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  ProtocolSpec spec_;
  std::map<std::string, AtomKind> kinds_;
  std::map<std::string, std::string> inverse_;
  std::size_t knows_start_ = 0, knows_end_ = 0;
  std::size_t steps_start_ = 0, steps_end_ = 0;
};

std::string level_text(const SecurityLevel& l) {
  if (l.is_bottom()) return "public";
  return l.str();
}

}  // namespace

ProtocolSpec parse_protocol(std::string_view text) { return Parser(text).run(); }

ProtocolSpec load_protocol_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_protocol(buf.str());
}

std::string print_protocol(const ProtocolSpec& spec) {
  std::ostringstream os;
  os << "protocol " << spec.name << " {\n";
  os << "  principals ";
  for (std::size_t i = 0; i < spec.principals.size(); ++i) os << (i ? ", " : "") << spec.principals[i];
  os << ";\n";
  os << "  intruder " << spec.intruder;
  if (spec.intruder_level) os << " level " << level_text(*spec.intruder_level);
  if (!spec.intruder_knows.empty()) {
    os << " knows ";
    for (std::size_t i = 0; i < spec.intruder_knows.size(); ++i) {
      os << (i ? ", " : "") << spec.intruder_knows[i].str();
    }
  }
  os << ";\n";
  os << "  keys {\n";
  for (const auto& k : spec.keys) {
    os << "    " << k.key << " inv " << k.inverse << " level " << level_text(k.level) << ";\n";
  }
  os << "  }\n";
  os << "  atoms {\n";
  for (const auto& a : spec.atoms) {
    os << "    " << a.name << " : " << to_string(a.kind);
    if (a.owner) os << " of " << *a.owner;
    os << " level " << level_text(a.level) << ";\n";
  }
  os << "  }\n";
  os << "  steps {\n";
  for (const auto& s : spec.steps) {
    os << "    " << s.index << ". " << s.sender << " -> " << s.receiver << " : " << s.message.str() << ";\n";
  }
  os << "  }\n}\n";
  return os.str();
}

VerificationContext ProtocolSpec::context() const {
  VerificationContext ctx;
  for (const auto& p : principals) ctx.declare_identity(p);
  ctx.declare_identity(intruder);
  ctx.set_intruder(intruder, intruder_level);
  for (const auto& k : keys) ctx.declare_key_pair(k.key, k.inverse, k.level);
  for (const auto& a : atoms) ctx.declare_atom(a.name, a.kind, a.level, a.owner);
  return ctx;
}

const Step& ProtocolSpec::step(int index) const {
  if (index < 1 || index > static_cast<int>(steps.size())) {
    throw SpecError("no step " + std::to_string(index) + " in protocol '" + name + "'");
  }
  return steps[static_cast<std::size_t>(index - 1)];
}

SecurityLevel context_level(const VerificationContext& ctx, const Term& t) { return ctx.level(t); }

std::string_view to_string(Direction d) { return d == Direction::Receive ? "receive" : "send"; }

}  // namespace witness
