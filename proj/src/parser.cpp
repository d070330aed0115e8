#include "picalc/parser.hpp"

#include <cctype>
#include <sstream>

#include "picalc/errors.hpp"

namespace picalc {

Declarations::Declarations() {
  for (const char* c : {"0", "1"}) {
    Symbol s = const_sym(c);
    constants.insert(s);
    public_atoms.insert(s);
  }
}

std::optional<Symbol> Declarations::resolve(const std::string& id) const {
  Symbol as_name = name_sym(id);
  if (names.count(as_name)) return as_name;
  Symbol as_const = const_sym(id);
  if (constants.count(as_const)) return as_const;
  Symbol as_var = var_sym(id);
  if (variables.count(as_var)) return as_var;
  return std::nullopt;
}

std::string SpecQuery::kind_name() const {
  switch (kind) {
    case Kind::Normalize: return "normalize";
    case Kind::Lts: return "lts";
    case Kind::Barbs: return "barbs";
    case Kind::Bisim: return "bisim";
    case Kind::Static: return "static";
    case Kind::BarbEq: return "barbeq";
    case Kind::Probe: return "probe";
    case Kind::Closure: return "closure";
    case Kind::Oracle: return "oracle";
  }
  return "?";
}

namespace {

enum class Tok { Ident, Number, Punct, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  int line = 1;
  int col = 1;
};

class Lexer {
 public:
  explicit Lexer(const std::string& text) : s_(text) { advance(); }

  const Token& peek() const { return tok_; }

  Token next() {
    Token t = tok_;
    advance();
    return t;
  }

 private:
  void advance() {
    skip_ws();
    tok_ = Token{Tok::End, "", line_, col_};
    if (pos_ >= s_.size()) return;
    const char c = s_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < s_.size() &&
             (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_' ||
              s_[pos_] == '\'')) {
        bump();
      }
      tok_.kind = Tok::Ident;
      tok_.text = s_.substr(start, pos_ - start);
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t start = pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) bump();
      tok_.kind = Tok::Number;
      tok_.text = s_.substr(start, pos_ - start);
      return;
    }
    if (c == '-' && pos_ + 1 < s_.size() && s_[pos_ + 1] == '>') {
      tok_.kind = Tok::Punct;
      tok_.text = "->";
      bump();
      bump();
      return;
    }
    tok_.kind = Tok::Punct;
    tok_.text = std::string(1, c);
    bump();
  }

  void skip_ws() {
    for (;;) {
      while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) bump();
      if (pos_ < s_.size() && s_[pos_] == '#') {
        while (pos_ < s_.size() && s_[pos_] != '\n') bump();
        continue;
      }
      break;
    }
  }

  void bump() {
    if (s_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  const std::string& s_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
  Token tok_;
};

class Parser {
 public:
  Parser(const std::string& text, Declarations& decls) : lex_(text), decls_(decls) {}

  [[noreturn]] void err(const std::string& msg) const {
    throw ParseError(msg, lex_.peek().line, lex_.peek().col);
  }

  bool accept_punct(const std::string& p) {
    if (lex_.peek().kind == Tok::Punct && lex_.peek().text == p) {
      lex_.next();
      return true;
    }
    return false;
  }

  void expect_punct(const std::string& p) {
    if (!accept_punct(p)) err("expected '" + p + "'");
  }

  bool accept_kw(const std::string& kw) {
    if (lex_.peek().kind == Tok::Ident && lex_.peek().text == kw) {
      lex_.next();
      return true;
    }
    return false;
  }

  std::string expect_ident(const std::string& what) {
    if (lex_.peek().kind != Tok::Ident) err("expected " + what);
    return lex_.next().text;
  }

  bool at_end() const { return lex_.peek().kind == Tok::End; }
  const Token& peek() const { return lex_.peek(); }
  Token next() { return lex_.next(); }

  // --- terms ---------------------------------------------------------------

  Symbol resolve_atom(const std::string& id) {
    for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
      auto f = it->find(id);
      if (f != it->end()) return f->second;
    }
    if (auto s = decls_.resolve(id)) return *s;
    err("undeclared identifier '" + id + "'");
  }

  Term parse_term() {
    const Token& t = lex_.peek();
    if (t.kind == Tok::Number) {
      return Term::atom(const_sym(lex_.next().text));
    }
    if (t.kind == Tok::Ident) {
      Token id = lex_.next();
      if (accept_punct("(")) {
        if (!decls_.sig.contains(id.text)) {
          throw ParseError("unknown function symbol '" + id.text + "'", id.line, id.col);
        }
        std::vector<Term> args;
        args.push_back(parse_term());
        while (accept_punct(",")) args.push_back(parse_term());
        expect_punct(")");
        if (args.size() != decls_.sig.arity(id.text)) {
          throw ParseError("arity mismatch for '" + id.text + "': expected " +
                               std::to_string(decls_.sig.arity(id.text)) + " arguments, got " +
                               std::to_string(args.size()),
                           id.line, id.col);
        }
        return Term::app(id.text, std::move(args));
      }
      return Term::atom(resolve_atom(id.text));
    }
    if (accept_punct("(")) {
      Term first = parse_term();
      if (accept_punct(",")) {
        Term second = parse_term();
        expect_punct(")");
        return Term::pair(std::move(first), std::move(second));
      }
      expect_punct(")");
      return first;
    }
    err("expected a term");
  }

  // --- processes -----------------------------------------------------------

  void push_scope(const std::string& id, const Symbol& s) {
    scopes_.push_back({{id, s}});
  }
  void pop_scope() { scopes_.pop_back(); }

  ExtendedProcess parse_ep() {
    ExtendedProcess left = parse_ep_prefix();
    if (accept_punct("|")) {
      return ExtendedProcess::par(std::move(left), parse_ep());
    }
    return left;
  }

  ExtendedProcess parse_ep_prefix() {
    const Token& t = lex_.peek();
    if (t.kind == Tok::Number && t.text == "0") {
      lex_.next();
      return ExtendedProcess::plain(PlainProcess::nil());
    }
    if (t.kind == Tok::Punct && t.text == "{") {
      lex_.next();
      Term e = parse_term();
      expect_punct("/");
      Token id = lex_.next();
      if (id.kind != Tok::Ident) throw ParseError("expected a variable", id.line, id.col);
      Symbol v = resolve_subst_var(id);
      expect_punct("}");
      return ExtendedProcess::subst(std::move(e), v);
    }
    if (t.kind == Tok::Punct && t.text == "(") {
      lex_.next();
      ExtendedProcess inner = parse_ep();
      expect_punct(")");
      return inner;
    }
    if (accept_kw("nu")) {
      Token id = lex_.next();
      if (id.kind != Tok::Ident) throw ParseError("expected an identifier", id.line, id.col);
      // nu binds a name when the identifier is a declared name, a variable
      // otherwise.
      Symbol binder = decls_.names.count(name_sym(id.text)) ? name_sym(id.text)
                                                            : var_sym(id.text);
      expect_punct(".");
      push_scope(id.text, binder);
      ExtendedProcess body = parse_ep_prefix();
      pop_scope();
      return ExtendedProcess::res(binder, std::move(body));
    }
    if (accept_kw("new")) {
      Token id = lex_.next();
      if (id.kind != Tok::Ident) throw ParseError("expected a name", id.line, id.col);
      Symbol binder = name_sym(id.text);
      expect_punct(".");
      push_scope(id.text, binder);
      ExtendedProcess body = parse_ep_prefix();
      pop_scope();
      return ExtendedProcess::res(binder, std::move(body));
    }
    // Everything else is a plain prefix form.
    return ExtendedProcess::plain(parse_pp_prefix());
  }

  PlainProcess parse_pp() {
    PlainProcess left = parse_pp_prefix();
    if (accept_punct("|")) {
      return PlainProcess::par(std::move(left), parse_pp());
    }
    return left;
  }

  PlainProcess parse_pp_prefix() {
    const Token& t = lex_.peek();
    if (t.kind == Tok::Number && t.text == "0") {
      lex_.next();
      return PlainProcess::nil();
    }
    if (t.kind == Tok::Punct && t.text == "(") {
      lex_.next();
      PlainProcess inner = parse_pp();
      expect_punct(")");
      return inner;
    }
    if (t.kind == Tok::Punct && t.text == "{") {
      err("active substitutions cannot appear under a prefix");
    }
    if (accept_punct("!")) {
      return PlainProcess::repl(parse_pp_prefix());
    }
    if (lex_.peek().kind == Tok::Ident && (lex_.peek().text == "new" || lex_.peek().text == "nu")) {
      Token kw = lex_.next();
      Token id = lex_.next();
      if (id.kind != Tok::Ident) throw ParseError("expected a name", id.line, id.col);
      if (kw.text == "nu" && !decls_.names.count(name_sym(id.text))) {
        throw ParseError("variable restriction cannot appear under a prefix", kw.line, kw.col);
      }
      Symbol binder = name_sym(id.text);
      expect_punct(".");
      push_scope(id.text, binder);
      PlainProcess body = parse_pp_prefix();
      pop_scope();
      return PlainProcess::name_res(binder, std::move(body));
    }
    if (accept_kw("if")) {
      Term lhs = parse_term();
      expect_punct("=");
      Term rhs = parse_term();
      if (!accept_kw("then")) err("expected 'then'");
      PlainProcess then_branch = parse_pp_prefix();
      PlainProcess else_branch = PlainProcess::nil();
      if (accept_kw("else")) else_branch = parse_pp_prefix();
      return PlainProcess::cond(std::move(lhs), std::move(rhs), std::move(then_branch),
                                std::move(else_branch));
    }
    if (accept_kw("in")) {
      expect_punct("(");
      Term chan = parse_term();
      expect_punct(",");
      Token id = lex_.next();
      if (id.kind != Tok::Ident) throw ParseError("expected a variable", id.line, id.col);
      Symbol v = var_sym(id.text);
      expect_punct(")");
      expect_punct(".");
      if (contains_symbol(chan, v)) {
        throw ParseError("input variable '" + id.text + "' occurs in its channel", id.line,
                         id.col);
      }
      push_scope(id.text, v);
      PlainProcess body = parse_pp_prefix();
      pop_scope();
      return PlainProcess::input(std::move(chan), v, std::move(body));
    }
    if (accept_kw("out")) {
      expect_punct("(");
      Term chan = parse_term();
      expect_punct(",");
      Term msg = parse_term();
      expect_punct(")");
      expect_punct(".");
      PlainProcess body = parse_pp_prefix();
      return PlainProcess::output(std::move(chan), std::move(msg), std::move(body));
    }
    err("expected a process");
  }

  Symbol resolve_subst_var(const Token& id) {
    for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
      auto f = it->find(id.text);
      if (f != it->end()) {
        if (f->second.kind != SymbolKind::Variable) {
          throw ParseError("'" + id.text + "' is not a variable here", id.line, id.col);
        }
        return f->second;
      }
    }
    if (decls_.variables.count(var_sym(id.text))) return var_sym(id.text);
    throw ParseError("undeclared substitution variable '" + id.text + "'", id.line, id.col);
  }

 private:
  Lexer lex_;
  Declarations& decls_;
  std::vector<std::map<std::string, Symbol>> scopes_;
};

void declare_unique(Declarations& decls, const Symbol& s, const Parser& p) {
  if (decls.resolve(s.id) || decls.sig.contains(s.id)) {
    p.err("identifier '" + s.id + "' is already declared");
  }
  switch (s.kind) {
    case SymbolKind::Name: decls.names.insert(s); break;
    case SymbolKind::Constant: decls.constants.insert(s); break;
    case SymbolKind::Variable: decls.variables.insert(s); break;
  }
}

}  // namespace

SpecFile parse_spec_file(const std::string& text, const std::string& filename) {
  (void)filename;  // positions identify the file in caller-side messages
  SpecFile out;
  Parser p(text, out.decls);

  auto expect_dot = [&] {
    if (!p.accept_punct(".")) p.err("expected '.' at the end of the clause");
  };

  while (!p.at_end()) {
    if (p.accept_kw("fun")) {
      std::string id = p.expect_ident("a function name");
      p.expect_punct("/");
      if (p.peek().kind != Tok::Number) p.err("expected an arity");
      unsigned arity = static_cast<unsigned>(std::stoul(p.next().text));
      if (arity == 0) p.err("function arity must be positive; declare a const instead");
      if (out.decls.resolve(id) || out.decls.sig.contains(id)) {
        p.err("identifier '" + id + "' is already declared");
      }
      out.decls.sig.declare(id, arity);
      expect_dot();
      continue;
    }
    bool is_public = p.accept_kw("public");
    if (p.accept_kw("const")) {
      std::string id = p.expect_ident("a constant name");
      Symbol s = const_sym(id);
      declare_unique(out.decls, s, p);
      if (is_public) out.decls.public_atoms.insert(s);
      expect_dot();
      continue;
    }
    if (p.accept_kw("name")) {
      std::string id = p.expect_ident("a name");
      Symbol s = name_sym(id);
      declare_unique(out.decls, s, p);
      if (is_public) out.decls.public_atoms.insert(s);
      expect_dot();
      continue;
    }
    if (is_public) p.err("'public' applies to const and name declarations");
    if (p.accept_kw("var")) {
      std::string id = p.expect_ident("a variable name");
      declare_unique(out.decls, var_sym(id), p);
      expect_dot();
      continue;
    }
    if (p.accept_kw("rewrite")) {
      Term lhs = p.parse_term();
      p.expect_punct("->");
      Term rhs = p.parse_term();
      expect_dot();
      try {
        out.rules.push_back(make_rule(std::move(lhs), std::move(rhs)));
      } catch (const std::invalid_argument& e) {
        p.err(e.what());
      }
      continue;
    }
    if (p.accept_kw("process")) {
      const Token name_tok = p.peek();
      std::string name = p.expect_ident("a process name");
      if (out.processes.count(name)) {
        throw ParseError("process '" + name + "' is already defined", name_tok.line,
                         name_tok.col);
      }
      p.expect_punct("=");
      ExtendedProcess body = p.parse_ep();
      expect_dot();
      CorrectnessReport rep = check_correct(body);
      if (!rep.ok()) {
        throw ParseError("process '" + name + "' is not correct: " + rep.violations[0].rule +
                             (rep.violations[0].detail.empty()
                                  ? ""
                                  : " (" + rep.violations[0].detail + ")"),
                         name_tok.line, name_tok.col);
      }
      out.processes.emplace(name, std::move(body));
      out.process_order.push_back(name);
      continue;
    }
    if (p.accept_kw("query")) {
      const Token qtok = p.peek();
      std::string kw = p.expect_ident("a query kind");
      SpecQuery q;
      q.line = qtok.line;
      q.col = qtok.col;
      std::size_t arity = 1;
      if (kw == "normalize") q.kind = SpecQuery::Kind::Normalize;
      else if (kw == "lts") q.kind = SpecQuery::Kind::Lts;
      else if (kw == "barbs") q.kind = SpecQuery::Kind::Barbs;
      else if (kw == "bisim") { q.kind = SpecQuery::Kind::Bisim; arity = 2; }
      else if (kw == "static") { q.kind = SpecQuery::Kind::Static; arity = 2; }
      else if (kw == "barbeq") { q.kind = SpecQuery::Kind::BarbEq; arity = 2; }
      else if (kw == "probe") { q.kind = SpecQuery::Kind::Probe; arity = 2; }
      else if (kw == "closure") { q.kind = SpecQuery::Kind::Closure; arity = 2; }
      else if (kw == "oracle") { q.kind = SpecQuery::Kind::Oracle; arity = 2; }
      else throw ParseError("unknown query '" + kw + "'", qtok.line, qtok.col);
      for (std::size_t i = 0; i < arity; ++i) {
        const Token ptok = p.peek();
        std::string pname = p.expect_ident("a process name");
        if (!out.processes.count(pname)) {
          throw ParseError("undefined process '" + pname + "'", ptok.line, ptok.col);
        }
        q.args.push_back(pname);
      }
      expect_dot();
      out.queries.push_back(std::move(q));
      continue;
    }
    p.err("expected a declaration, rewrite rule, process definition or query");
  }
  return out;
}

Term parse_term_string(const std::string& text, const Declarations& decls) {
  Declarations copy = decls;
  Parser p(text, copy);
  Term t = p.parse_term();
  if (!p.at_end()) p.err("trailing input after term");
  return t;
}

ExtendedProcess parse_process_string(const std::string& text, const Declarations& decls) {
  Declarations copy = decls;
  Parser p(text, copy);
  ExtendedProcess a = p.parse_ep();
  if (!p.at_end()) p.err("trailing input after process");
  return a;
}

}  // namespace picalc
