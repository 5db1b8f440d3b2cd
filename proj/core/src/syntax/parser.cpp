#include "ttm/syntax/parser.hpp"

#include <algorithm>
#include <array>
#include <set>

#include <fmt/format.h>

#include "ttm/syntax/lexer.hpp"

namespace ttm::syntax {
namespace {

constexpr std::string_view kReserved[] = {
    "module",  "end",      "interface", "local",     "timers",        "depends",     "events",
    "event",   "when",     "start",     "stop",      "do",            "if",          "then",
    "elseif",  "else",     "fi",        "skip",      "sync",          "as",          "with",
    "instances", "system", "type",      "const",     "predicate",     "variables",   "properties",
    "fair",    "just",     "compassionate", "spontaneous", "in",      "out",         "share",
    "array",   "of",       "queue",     "bool",      "true",          "false",       "forall",
    "exists",  "BOOL"};

constexpr int kMaxDepth = 400;

class Parser {
 public:
  Parser(std::string_view src, bool formula_mode)
      : src_(src), toks_(tokenize(src)), formula_mode_(formula_mode) {}

  SourceModel parse_model();
  Expr parse_single_expression();

 private:
  // ---- token helpers
  const Token& peek(std::size_t ahead = 0) const {
    std::size_t i = std::min(pos_ + ahead, toks_.size() - 1);
    return toks_[i];
  }
  const Token& next() {
    const Token& t = toks_[pos_];
    if (pos_ + 1 < toks_.size()) ++pos_;
    return t;
  }
  bool at(std::string_view s, std::size_t ahead = 0) const { return peek(ahead).is(s); }
  bool accept(std::string_view s) {
    if (at(s)) {
      next();
      return true;
    }
    return false;
  }
  [[noreturn]] void fail(const Token& t, std::string_view what) const {
    std::string got = t.kind == TokenKind::Eof ? "end of input" : fmt::format("'{}'", t.text);
    throw Error(ErrorKind::SyntaxError, fmt::format("expected {}, found {}", what, got), t.loc);
  }
  const Token& expect(std::string_view s) {
    if (!at(s)) fail(peek(), fmt::format("'{}'", s));
    return next();
  }
  bool at_ident(std::size_t ahead = 0) const {
    const Token& t = peek(ahead);
    return t.kind == TokenKind::Ident && !is_reserved(t.text);
  }
  std::string expect_ident(std::string_view what = "identifier") {
    if (!at_ident()) fail(peek(), what);
    return next().text;
  }

  struct DepthGuard {
    explicit DepthGuard(Parser& p) : p(p) {
      if (++p.depth_ > kMaxDepth)
        throw Error(ErrorKind::SyntaxError, "nesting too deep", p.peek().loc);
    }
    ~DepthGuard() { --p.depth_; }
    Parser& p;
  };

  // ---- declarations
  void parse_item(SourceModel& m);
  TypeExpr parse_type();
  TypeExpr parse_type_primary();
  void parse_var_section(std::vector<VarDecl>& out);
  ModuleDecl parse_module();
  EventDecl parse_event();
  void parse_index_list(EventDecl& ev);
  std::vector<IndexDecl> parse_param_indices();
  std::vector<Stmt> parse_stmts();
  Stmt parse_stmt();
  InstanceDecl parse_instance_body(std::string name, SourceLoc loc);
  CompositionExpr parse_composition();
  CompositionExpr parse_composition_term();
  PropertySource parse_property_in_block();
  Mode parse_mode();
  bool at_decl_start() const;

  // ---- expressions
  Expr parse_expr();
  Expr parse_implies();
  Expr parse_or();
  Expr parse_and();
  Expr parse_until();
  Expr parse_equality();
  Expr parse_relational();
  Expr parse_additive();
  Expr parse_multiplicative();
  Expr parse_unary();
  Expr parse_postfix();
  Expr parse_primary();
  Expr parse_fold(Op op, SourceLoc loc);
  Expr parse_set_expr();
  std::vector<Expr> parse_args();

  std::string_view src_;
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  bool formula_mode_;
  int depth_ = 0;
};

// ---------------------------------------------------------------- model

SourceModel Parser::parse_model() {
  SourceModel m;
  while (peek().kind != TokenKind::Eof) parse_item(m);
  return m;
}

void Parser::parse_item(SourceModel& m) {
  const Token& t = peek();
  if (accept("type")) {
    TypeDecl d;
    d.loc = peek().loc;
    d.name = expect_ident("type name");
    expect("=");
    d.type = parse_type();
    accept(";");
    m.types.push_back(std::move(d));
  } else if (accept("const")) {
    ConstDecl d;
    d.loc = peek().loc;
    d.name = expect_ident("constant name");
    expect("=");
    d.value = parse_expr();
    accept(";");
    m.consts.push_back(std::move(d));
  } else if (accept("predicate")) {
    PredicateDecl d;
    d.loc = peek().loc;
    d.name = expect_ident("predicate name");
    expect("(");
    if (!at(")")) {
      do {
        std::vector<std::pair<std::string, SourceLoc>> names;
        do {
          SourceLoc l = peek().loc;
          names.emplace_back(expect_ident("parameter name"), l);
        } while (accept(","));
        expect(":");
        TypeExpr ty = parse_type();
        for (auto& [n, l] : names) d.params.push_back(Param{n, ty, l});
      } while (accept(";"));
    }
    expect(")");
    expect("=");
    d.body = parse_expr();
    accept(";");
    m.predicates.push_back(std::move(d));
  } else if (accept("variables")) {
    parse_var_section(m.globals);
    expect("end");
  } else if (at("module")) {
    m.modules.push_back(parse_module());
  } else if (accept("instances")) {
    while (!at("end")) {
      SourceLoc loc = peek().loc;
      std::string name = expect_ident("instance name");
      if (accept("::=")) {
        GroupDecl g;
        g.name = std::move(name);
        g.loc = loc;
        do {
          g.members.push_back(expect_ident("instance name"));
        } while (accept("||"));
        m.groups.push_back(std::move(g));
      } else {
        expect("=");
        m.instances.push_back(parse_instance_body(std::move(name), loc));
      }
      if (!accept(";")) break;
    }
    expect("end");
  } else if (accept("system")) {
    if (m.system) throw Error(ErrorKind::DuplicateName, "system composition declared twice", t.loc);
    expect("=");
    m.system = parse_composition();
    accept(";");
  } else if (accept("properties")) {
    while (!at("end")) m.properties.push_back(parse_property_in_block());
    expect("end");
  } else {
    fail(t, "declaration ('type', 'const', 'predicate', 'variables', 'module', 'instances', "
            "'system' or 'properties')");
  }
}

bool Parser::at_decl_start() const {
  if (!at_ident()) return false;
  // `a, b : T` or `a : T`
  std::size_t k = 1;
  while (peek(k).is_symbol(",") && peek(k + 1).kind == TokenKind::Ident) k += 2;
  return peek(k).is_symbol(":");
}

void Parser::parse_var_section(std::vector<VarDecl>& out) {
  while (at_decl_start()) {
    std::vector<std::pair<std::string, SourceLoc>> names;
    do {
      SourceLoc l = peek().loc;
      names.emplace_back(expect_ident("variable name"), l);
    } while (accept(","));
    expect(":");
    TypeExpr ty = parse_type();
    std::optional<Expr> init;
    if (accept("=")) init = parse_expr();
    for (auto& [n, l] : names) out.push_back(VarDecl{n, ty, init, l});
    if (!accept(";")) accept(",");
  }
}

Mode Parser::parse_mode() {
  if (accept("in")) return Mode::In;
  if (accept("out")) return Mode::Out;
  if (accept("share")) return Mode::Share;
  fail(peek(), "mode ('in', 'out' or 'share')");
}

TypeExpr Parser::parse_type() {
  TypeExpr first = parse_type_primary();
  if (!at("+") || first.kind == TypeExpr::Kind::Range) return first;
  TypeExpr u;
  u.kind = TypeExpr::Kind::Union;
  u.loc = first.loc;
  u.parts.push_back(std::move(first));
  while (accept("+")) u.parts.push_back(parse_type_primary());
  return u;
}

TypeExpr Parser::parse_type_primary() {
  TypeExpr t;
  t.loc = peek().loc;
  if (accept("bool") || accept("BOOL")) {
    t.kind = TypeExpr::Kind::Bool;
  } else if (accept("array")) {
    t.kind = TypeExpr::Kind::Array;
    expect("[");
    t.parts.push_back(parse_type());
    expect("]");
    expect("of");
    t.parts.push_back(parse_type_primary());
  } else if (accept("queue")) {
    t.kind = TypeExpr::Kind::Queue;
    expect("[");
    t.parts.push_back(parse_type());
    expect("]");
    expect("(");
    t.exprs.push_back(parse_expr());
    expect(")");
  } else if (at("{")) {
    next();
    t.kind = TypeExpr::Kind::Set;
    if (!at("}")) {
      do {
        t.exprs.push_back(parse_additive());
      } while (accept(","));
    }
    expect("}");
  } else if (at_ident() && !peek(1).is_symbol("..") && !peek(1).is_symbol("-") &&
             !peek(1).is_symbol("*") && !peek(1).is_symbol("/")) {
    t.kind = TypeExpr::Kind::Named;
    t.name = next().text;
  } else {
    t.kind = TypeExpr::Kind::Range;
    t.exprs.push_back(parse_additive());
    expect("..");
    t.exprs.push_back(parse_additive());
  }
  return t;
}

ModuleDecl Parser::parse_module() {
  expect("module");
  ModuleDecl mod;
  mod.loc = peek().loc;
  mod.name = expect_ident("module name");
  while (!at("end")) {
    const Token& t = peek();
    if (accept("interface")) {
      while (at_decl_start()) {
        std::vector<std::pair<std::string, SourceLoc>> names;
        do {
          SourceLoc l = peek().loc;
          names.emplace_back(expect_ident("interface variable"), l);
        } while (accept(","));
        expect(":");
        Mode mode = parse_mode();
        TypeExpr ty = parse_type();
        std::optional<Expr> init;
        if (accept("=")) init = parse_expr();
        for (auto& [n, l] : names) mod.interface.push_back(InterfaceDecl{n, mode, ty, init, l});
        if (!accept(";")) accept(",");
      }
    } else if (accept("local")) {
      parse_var_section(mod.locals);
    } else if (accept("timers")) {
      while (at_decl_start()) {
        std::vector<std::pair<std::string, SourceLoc>> names;
        do {
          SourceLoc l = peek().loc;
          names.emplace_back(expect_ident("timer name"), l);
        } while (accept(","));
        expect(":");
        const Token& lo = peek();
        if (lo.kind != TokenKind::Int || lo.value != 0) fail(lo, "timer range starting at 0");
        next();
        expect("..");
        Expr bound = parse_additive();
        for (auto& [n, l] : names) mod.timers.push_back(TimerDecl{n, bound, l});
        if (!accept(";")) accept(",");
      }
    } else if (accept("depends")) {
      while (at_decl_start()) {
        DependsDecl d;
        d.loc = peek().loc;
        d.slot = expect_ident("dependency slot");
        expect(":");
        d.module = expect_ident("module name");
        mod.depends.push_back(std::move(d));
        if (!accept(";")) accept(",");
      }
    } else if (accept("events")) {
      while (at_ident() || at("event")) mod.events.push_back(parse_event());
    } else {
      fail(t, "module section ('interface', 'local', 'timers', 'depends', 'events') or 'end'");
    }
  }
  expect("end");
  return mod;
}

std::vector<IndexDecl> Parser::parse_param_indices() {
  // ( a, b : fair T ; c : U )   -- `fair` is accepted but recorded by caller
  std::vector<IndexDecl> out;
  expect("(");
  if (!at(")")) {
    do {
      std::vector<std::pair<std::string, SourceLoc>> names;
      do {
        SourceLoc l = peek().loc;
        names.emplace_back(expect_ident("index name"), l);
      } while (accept(","));
      expect(":");
      accept("fair");
      TypeExpr set = parse_type();
      for (auto& [n, l] : names) out.push_back(IndexDecl{n, set, l});
    } while (accept(";"));
  }
  expect(")");
  return out;
}

void Parser::parse_index_list(EventDecl& ev) {
  expect("(");
  if (!at(")")) {
    do {
      std::vector<std::pair<std::string, SourceLoc>> names;
      do {
        SourceLoc l = peek().loc;
        names.emplace_back(expect_ident("index name"), l);
      } while (accept(","));
      expect(":");
      bool fair = accept("fair");
      TypeExpr set = parse_type();
      for (auto& [n, l] : names)
        (fair ? ev.fair_indices : ev.demonic_indices).push_back(IndexDecl{n, set, l});
    } while (accept(";"));
  }
  expect(")");
}

EventDecl Parser::parse_event() {
  accept("event");
  EventDecl ev;
  ev.loc = peek().loc;
  ev.name = expect_ident("event name");
  if (at("(")) parse_index_list(ev);
  if (at("[")) {
    next();
    ev.has_bounds = true;
    ev.lower = parse_expr();
    expect(",");
    if (!accept("*")) ev.upper = parse_expr();
    expect("]");
  }
  if (accept("just"))
    ev.fairness = Fairness::Just;
  else if (accept("compassionate"))
    ev.fairness = Fairness::Compassionate;
  else
    accept("spontaneous");

  std::set<std::string> seen;
  auto once = [&](const Token& t) {
    if (!seen.insert(t.text).second)
      throw Error(ErrorKind::SyntaxError, fmt::format("duplicate '{}' clause", t.text), t.loc);
  };
  while (!at("end")) {
    const Token& t = peek();
    if (accept("sync")) {
      once(t);
      SyncClause sc;
      sc.loc = t.loc;
      do {
        QualifiedName q;
        q.loc = peek().loc;
        q.instance = expect_ident("dependency slot");
        expect(".");
        q.event = expect_ident("event name");
        sc.targets.push_back(std::move(q));
      } while (accept(","));
      expect("as");
      sc.compound_name = expect_ident("compound event name");
      ev.sync = std::move(sc);
    } else if (accept("when")) {
      once(t);
      ev.guard = parse_expr();
    } else if (accept("start")) {
      once(t);
      do {
        ev.start.push_back(expect_ident("timer name"));
      } while (accept(","));
    } else if (accept("stop")) {
      once(t);
      do {
        ev.stop.push_back(expect_ident("timer name"));
      } while (accept(","));
    } else if (accept("do")) {
      once(t);
      ev.action = parse_stmts();
    } else {
      fail(t, "event clause ('sync', 'when', 'start', 'stop', 'do') or 'end'");
    }
  }
  expect("end");
  return ev;
}

std::vector<Stmt> Parser::parse_stmts() {
  std::vector<Stmt> out;
  out.push_back(parse_stmt());
  while (accept(",") || accept(";")) out.push_back(parse_stmt());
  return out;
}

Stmt Parser::parse_stmt() {
  DepthGuard guard(*this);
  Stmt s;
  s.loc = peek().loc;
  if (accept("skip")) {
    s.kind = StmtKind::Skip;
    return s;
  }
  if (accept("if")) {
    s.kind = StmtKind::If;
    s.conditions.push_back(parse_expr());
    expect("then");
    s.branches.push_back(parse_stmts());
    while (accept("elseif")) {
      s.conditions.push_back(parse_expr());
      expect("then");
      s.branches.push_back(parse_stmts());
    }
    if (accept("else")) s.branches.push_back(parse_stmts());
    expect("fi");
    return s;
  }
  // lvalue
  SourceLoc loc = peek().loc;
  Expr target = Expr::ident(expect_ident("statement"), loc);
  if (at("[")) {
    SourceLoc l = peek().loc;
    next();
    Expr idx = parse_expr();
    expect("]");
    target = Expr::index(std::move(target), std::move(idx), l);
  }
  s.target = std::move(target);
  if (accept(":=")) {
    s.kind = StmtKind::Assign;
    s.value = parse_expr();
  } else if (accept("::")) {
    s.kind = StmtKind::Demonic;
    s.value = parse_set_expr();
  } else {
    fail(peek(), "':=' or '::'");
  }
  return s;
}

InstanceDecl Parser::parse_instance_body(std::string name, SourceLoc loc) {
  InstanceDecl inst;
  inst.name = std::move(name);
  inst.loc = loc;
  inst.module = expect_ident("module name");
  expect("(");
  if (!at(")")) {
    do {
      Argument a;
      a.loc = peek().loc;
      a.mode = parse_mode();
      a.value = parse_additive();
      inst.args.push_back(std::move(a));
    } while (accept(","));
  }
  expect(")");
  if (accept("with")) {
    do {
      DependencyBinding b;
      b.loc = peek().loc;
      b.slot = expect_ident("dependency slot");
      expect(":=");
      b.instance = expect_ident("instance name");
      inst.with.push_back(std::move(b));
    } while (accept(","));
    expect("end");
  }
  return inst;
}

CompositionExpr Parser::parse_composition() {
  CompositionExpr first = parse_composition_term();
  if (!at("||")) return first;
  CompositionExpr par;
  par.kind = CompositionExpr::Kind::Parallel;
  par.loc = first.loc;
  par.parts.push_back(std::move(first));
  while (accept("||")) par.parts.push_back(parse_composition_term());
  return par;
}

CompositionExpr Parser::parse_composition_term() {
  DepthGuard guard(*this);
  CompositionExpr c;
  c.loc = peek().loc;
  if (accept("(")) {
    c = parse_composition();
    expect(")");
    return c;
  }
  if (accept("||")) {
    c.kind = CompositionExpr::Kind::Iterated;
    c.name = expect_ident("index name");
    expect(":");
    c.set = parse_type();
    expect("@");
    CompositionExpr body;
    body.kind = CompositionExpr::Kind::Inline;
    body.loc = peek().loc;
    body.inline_instance = parse_instance_body("", body.loc);
    c.parts.push_back(std::move(body));
    return c;
  }
  if (at_ident() && peek(1).is_symbol("(")) {
    c.kind = CompositionExpr::Kind::Inline;
    c.inline_instance = parse_instance_body("", c.loc);
    return c;
  }
  c.kind = CompositionExpr::Kind::Ref;
  c.name = expect_ident("instance name");
  return c;
}

PropertySource Parser::parse_property_in_block() {
  PropertySource p;
  p.loc = peek().loc;
  p.name = expect_ident("property name");
  if (at("(")) p.params = parse_param_indices();
  expect(":");
  std::size_t begin = peek().offset;
  int depth = 0;
  while (true) {
    const Token& t = peek();
    if (t.kind == TokenKind::Eof) fail(t, "';' ending the property");
    if (t.kind == TokenKind::Symbol) {
      if (t.text == "(" || t.text == "[" || t.text == "{") ++depth;
      if (t.text == ")" || t.text == "]" || t.text == "}") --depth;
      if (t.text == ";" && depth <= 0) break;
    }
    next();
  }
  std::size_t end = peek().offset;
  next();  // ';'
  p.text = std::string(src_.substr(begin, end - begin));
  while (!p.text.empty() && std::isspace(static_cast<unsigned char>(p.text.back()))) p.text.pop_back();
  if (p.text.empty()) throw Error(ErrorKind::SyntaxError, "empty property formula", p.loc);
  return p;
}

// ---------------------------------------------------------------- expressions

Expr Parser::parse_single_expression() {
  Expr e = parse_expr();
  if (peek().kind != TokenKind::Eof) fail(peek(), "end of expression");
  return e;
}

Expr Parser::parse_expr() {
  DepthGuard guard(*this);
  SourceLoc loc = peek().loc;
  if (formula_mode_ && (at("forall") || at("exists"))) {
    Op op = next().text == "forall" ? Op::Forall : Op::Exists;
    std::vector<std::string> vars;
    do {
      vars.push_back(expect_ident("quantified variable"));
    } while (accept(","));
    expect(":");
    Expr set = parse_set_expr();
    expect("@");
    Expr body = parse_expr();
    for (auto it = vars.rbegin(); it != vars.rend(); ++it) body = Expr::fold(op, *it, set, std::move(body), loc);
    return body;
  }
  return parse_implies();
}

Expr Parser::parse_implies() {
  Expr lhs = parse_or();
  if (at("=>") || at("->")) {
    SourceLoc loc = next().loc;
    Expr rhs = parse_expr();  // right associative, admits a trailing quantifier
    return Expr::binary(Op::Implies, std::move(lhs), std::move(rhs), loc);
  }
  return lhs;
}

Expr Parser::parse_or() {
  Expr lhs = parse_and();
  while (at("||") || (formula_mode_ && at("or"))) {
    SourceLoc loc = next().loc;
    lhs = Expr::binary(Op::Or, std::move(lhs), parse_and(), loc);
  }
  return lhs;
}

Expr Parser::parse_and() {
  Expr lhs = parse_until();
  while (at("&&") || (formula_mode_ && at("and"))) {
    SourceLoc loc = next().loc;
    lhs = Expr::binary(Op::And, std::move(lhs), parse_until(), loc);
  }
  return lhs;
}

Expr Parser::parse_until() {
  Expr lhs = parse_equality();
  if (formula_mode_ && at("U") && peek().kind == TokenKind::Ident) {
    SourceLoc loc = next().loc;
    Expr rhs = parse_until();
    return Expr::temporal(Op::Until, {std::move(lhs), std::move(rhs)}, loc);
  }
  return lhs;
}

Expr Parser::parse_equality() {
  Expr lhs = parse_relational();
  if (at("==") || at("=") || at("!=")) {
    const Token& t = next();
    Op op = t.text == "!=" ? Op::Ne : Op::Eq;
    lhs = Expr::binary(op, std::move(lhs), parse_relational(), t.loc);
  }
  return lhs;
}

Expr Parser::parse_relational() {
  Expr lhs = parse_additive();
  while (true) {
    if (at("in") && peek().kind == TokenKind::Ident) {
      SourceLoc loc = next().loc;
      lhs = Expr::binary(Op::In, std::move(lhs), parse_set_expr(), loc);
      continue;
    }
    Op op = Op::None;
    if (at("<")) op = Op::Lt;
    else if (at("<=")) op = Op::Le;
    else if (at(">")) op = Op::Gt;
    else if (at(">=")) op = Op::Ge;
    if (op == Op::None) return lhs;
    SourceLoc loc = next().loc;
    lhs = Expr::binary(op, std::move(lhs), parse_additive(), loc);
  }
}

Expr Parser::parse_additive() {
  Expr lhs = parse_multiplicative();
  while (at("+") || at("-")) {
    const Token& t = next();
    Op op = t.text == "+" ? Op::Add : Op::Sub;
    lhs = Expr::binary(op, std::move(lhs), parse_multiplicative(), t.loc);
  }
  return lhs;
}

Expr Parser::parse_multiplicative() {
  Expr lhs = parse_unary();
  while (at("*") || at("/") || at("%")) {
    const Token& t = next();
    Op op = t.text == "*" ? Op::Mul : t.text == "/" ? Op::Div : Op::Mod;
    lhs = Expr::binary(op, std::move(lhs), parse_unary(), t.loc);
  }
  return lhs;
}

Expr Parser::parse_unary() {
  DepthGuard guard(*this);
  SourceLoc loc = peek().loc;
  if (accept("!")) return Expr::unary(Op::Not, parse_unary(), loc);
  if (formula_mode_ && accept("not")) return Expr::unary(Op::Not, parse_unary(), loc);
  if (accept("-")) {
    Expr operand = parse_unary();
    if (operand.kind == ExprKind::IntLit) {
      operand.value = -operand.value;
      operand.loc = loc;
      return operand;
    }
    return Expr::unary(Op::Neg, std::move(operand), loc);
  }
  if (formula_mode_ && accept("[]")) return Expr::temporal(Op::Always, {parse_unary()}, loc);
  if (formula_mode_ && accept("<>")) return Expr::temporal(Op::Eventually, {parse_unary()}, loc);
  return parse_postfix();
}

std::vector<Expr> Parser::parse_args() {
  std::vector<Expr> args;
  expect("(");
  if (!at(")")) {
    do {
      args.push_back(parse_expr());
    } while (accept(","));
  }
  expect(")");
  return args;
}

Expr Parser::parse_postfix() {
  Expr e = parse_primary();
  while (true) {
    if (at("[")) {
      SourceLoc loc = next().loc;
      Expr idx = parse_expr();
      expect("]");
      e = Expr::index(std::move(e), std::move(idx), loc);
    } else if (at(".") && peek(1).kind == TokenKind::Ident && peek(2).is_symbol("(")) {
      SourceLoc loc = next().loc;
      Expr m;
      m.kind = ExprKind::Method;
      m.name = next().text;
      m.loc = loc;
      m.kids.push_back(std::move(e));
      for (auto& a : parse_args()) m.kids.push_back(std::move(a));
      e = std::move(m);
    } else {
      return e;
    }
  }
}

Expr Parser::parse_fold(Op op, SourceLoc loc) {
  std::string var = expect_ident("bound variable");
  expect(":");
  Expr set = parse_set_expr();
  expect("@");
  Expr body = parse_expr();
  return Expr::fold(op, std::move(var), std::move(set), std::move(body), loc);
}

Expr Parser::parse_set_expr() {
  SourceLoc loc = peek().loc;
  if (at("ARRAY") && peek(1).is_symbol("[")) {
    next();
    next();
    Expr e;
    e.kind = ExprKind::ArrayOf;
    e.loc = loc;
    e.kids.push_back(parse_set_expr());
    expect("]");
    expect("(");
    e.kids.push_back(parse_expr());
    expect(")");
    return e;
  }
  Expr lo = parse_additive();
  if (accept("..")) {
    Expr r;
    r.kind = ExprKind::Range;
    r.loc = loc;
    r.kids.push_back(std::move(lo));
    r.kids.push_back(parse_additive());
    return r;
  }
  return lo;
}

Expr Parser::parse_primary() {
  const Token& t = peek();
  if (t.kind == TokenKind::Int) {
    next();
    return Expr::integer(t.value, t.loc);
  }
  if (accept("true")) return Expr::boolean(true, t.loc);
  if (accept("false")) return Expr::boolean(false, t.loc);
  if (accept("(")) {
    Expr e = parse_expr();
    expect(")");
    return e;
  }
  if (accept("{")) {
    Expr s;
    s.kind = ExprKind::SetLit;
    s.loc = t.loc;
    if (!at("}")) {
      do {
        s.kids.push_back(parse_expr());
      } while (accept(","));
    }
    expect("}");
    return s;
  }
  if (at("&&") && at_ident(1) && peek(2).is_symbol(":")) {
    next();
    return parse_fold(Op::And, t.loc);
  }
  if (at("||") && at_ident(1) && peek(2).is_symbol(":")) {
    next();
    return parse_fold(Op::Or, t.loc);
  }
  if (at_ident()) {
    std::string name = next().text;
    if (name == "ARRAY" && at("[")) {
      --pos_;
      return parse_set_expr();
    }
    if (at("(")) {
      Expr c;
      c.kind = ExprKind::Call;
      c.name = std::move(name);
      c.loc = t.loc;
      c.kids = parse_args();
      // call(f, x, ...) is sugar for f(x, ...)
      if (c.name == "call" && !c.kids.empty() && c.kids.front().kind == ExprKind::Name &&
          !c.kids.front().primed) {
        c.name = c.kids.front().name;
        c.kids.erase(c.kids.begin());
      }
      return c;
    }
    // qualified name: inst.var or inst.event (not followed by a method call)
    while (at(".") && peek(1).kind == TokenKind::Ident && !peek(2).is_symbol("(")) {
      next();
      name += '.';
      name += next().text;
    }
    if (at(".") && peek(1).kind == TokenKind::Ident && peek(2).is_symbol("(") && formula_mode_) {
      // inst.event(args) in a formula is an event atom, not a method call,
      // unless the receiver is clearly a queue method name.
      const std::string& member = peek(1).text;
      static const std::set<std::string> kMethods = {"Count", "First", "Enqueue", "Dequeue"};
      if (!kMethods.count(member)) {
        next();
        name += '.';
        name += next().text;
        Expr c;
        c.kind = ExprKind::Call;
        c.name = std::move(name);
        c.loc = t.loc;
        c.kids = parse_args();
        return c;
      }
    }
    bool primed = accept("'");
    return Expr::ident(std::move(name), t.loc, primed);
  }
  fail(t, "expression");
}

// ---------------------------------------------------------------- checks

class Checker {
 public:
  explicit Checker(const SourceModel& m) : m_(m) {}

  std::vector<Diagnostic> run() {
    try {
      consts_ = m_.constants();
    } catch (const Error& e) {
      for (const auto& d : e.diagnostics()) diags_.push_back(d);
    }
    check_top_level_names();
    for (const auto& mod : m_.modules) check_module(mod);
    check_instances();
    if (m_.system) check_composition(*m_.system);
    return std::move(diags_);
  }

 private:
  void report(ErrorKind k, std::string msg, SourceLoc loc) {
    diags_.push_back(Diagnostic{k, std::move(msg), loc});
  }

  void unique(std::set<std::string>& seen, const std::string& name, SourceLoc loc,
              std::string_view what) {
    if (!seen.insert(name).second)
      report(ErrorKind::DuplicateName, fmt::format("duplicate {} '{}'", what, name), loc);
  }

  void check_top_level_names() {
    std::set<std::string> seen;
    for (const auto& d : m_.types) unique(seen, d.name, d.loc, "type");
    for (const auto& d : m_.consts) unique(seen, d.name, d.loc, "constant");
    for (const auto& d : m_.predicates) unique(seen, d.name, d.loc, "predicate");
    std::set<std::string> vars;
    for (const auto& d : m_.globals) unique(vars, d.name, d.loc, "variable");
    std::set<std::string> mods;
    for (const auto& d : m_.modules) unique(mods, d.name, d.loc, "module");
    std::set<std::string> insts;
    for (const auto& d : m_.instances) unique(insts, d.name, d.loc, "instance");
    for (const auto& d : m_.groups) unique(insts, d.name, d.loc, "instance");
    std::set<std::string> props;
    for (const auto& d : m_.properties) unique(props, d.name, d.loc, "property");
  }

  std::optional<std::int64_t> eval(const Expr& e) {
    try {
      return eval_const(e, consts_);
    } catch (const Error& err) {
      report(err.kind(), err.diagnostics().front().message, err.loc());
      return std::nullopt;
    }
  }

  void check_module(const ModuleDecl& mod) {
    std::set<std::string> names;
    for (const auto& v : mod.interface) unique(names, v.name, v.loc, "variable");
    for (const auto& v : mod.locals) unique(names, v.name, v.loc, "variable");
    for (const auto& t : mod.timers) {
      unique(names, t.name, t.loc, "timer");
      if (auto b = eval(t.bound); b && *b < 0)
        report(ErrorKind::BoundError, fmt::format("timer '{}' has negative bound {}", t.name, *b), t.loc);
    }
    std::set<std::string> slots;
    for (const auto& d : mod.depends) {
      unique(slots, d.slot, d.loc, "dependency slot");
      if (!m_.find_module(d.module))
        report(ErrorKind::UnknownReference, fmt::format("unknown module '{}'", d.module), d.loc);
    }
    std::set<std::string> events;
    for (const auto& ev : mod.events) {
      unique(events, ev.name, ev.loc, "event");
      check_event(mod, ev, names);
    }
  }

  void check_event(const ModuleDecl& mod, const EventDecl& ev, const std::set<std::string>& names) {
    std::set<std::string> idx;
    auto check_index = [&](const IndexDecl& d) {
      unique(idx, d.name, d.loc, "index");
      if (names.count(d.name))
        report(ErrorKind::DuplicateName,
               fmt::format("index '{}' shadows a variable or timer of module '{}'", d.name, mod.name),
               d.loc);
    };
    for (const auto& d : ev.fair_indices) check_index(d);
    for (const auto& d : ev.demonic_indices) check_index(d);

    auto lo = eval(ev.lower);
    std::optional<std::int64_t> hi;
    if (ev.upper) hi = eval(*ev.upper);
    if (lo && *lo < 0)
      report(ErrorKind::BoundError, fmt::format("event '{}' has negative lower bound", ev.name), ev.loc);
    if (lo && hi && *lo > *hi)
      report(ErrorKind::BoundError,
             fmt::format("event '{}' has lower bound {} greater than upper bound {}", ev.name, *lo, *hi),
             ev.loc);
    if (ev.upper && ev.fairness != Fairness::Spontaneous)
      report(ErrorKind::BoundError,
             fmt::format("event '{}' is declared {} but has a finite upper bound", ev.name,
                         to_string(ev.fairness)),
             ev.loc);
    std::set<std::string> timers;
    for (const auto& t : mod.timers) timers.insert(t.name);
    for (const auto& list : {&ev.start, &ev.stop})
      for (const auto& t : *list)
        if (!timers.count(t))
          report(ErrorKind::UnknownReference, fmt::format("unknown timer '{}' in event '{}'", t, ev.name),
                 ev.loc);
    if (ev.sync) {
      std::set<std::string> slots;
      for (const auto& d : mod.depends) slots.insert(d.slot);
      for (const auto& q : ev.sync->targets)
        if (!slots.count(q.instance))
          report(ErrorKind::UnknownReference,
                 fmt::format("sync target '{}.{}' does not name a dependency slot of module '{}'",
                             q.instance, q.event, mod.name),
                 q.loc);
    }
  }

  void check_instances() {
    for (const auto& inst : m_.instances)
      if (!m_.find_module(inst.module))
        report(ErrorKind::UnknownReference, fmt::format("unknown module '{}'", inst.module), inst.loc);
    for (const auto& g : m_.groups)
      for (const auto& mem : g.members)
        if (!m_.find_instance(mem) && !m_.find_group(mem))
          report(ErrorKind::UnknownReference, fmt::format("unknown instance '{}'", mem), g.loc);
  }

  void check_composition(const CompositionExpr& c) {
    switch (c.kind) {
      case CompositionExpr::Kind::Ref:
        if (!m_.find_instance(c.name) && !m_.find_group(c.name))
          report(ErrorKind::UnknownReference, fmt::format("unknown instance '{}'", c.name), c.loc);
        break;
      case CompositionExpr::Kind::Inline:
        if (!m_.find_module(c.inline_instance->module))
          report(ErrorKind::UnknownReference,
                 fmt::format("unknown module '{}'", c.inline_instance->module), c.loc);
        break;
      case CompositionExpr::Kind::Parallel:
      case CompositionExpr::Kind::Iterated:
        for (const auto& p : c.parts) check_composition(p);
        break;
    }
  }

  const SourceModel& m_;
  std::map<std::string, std::int64_t> consts_;
  std::vector<Diagnostic> diags_;
};

}  // namespace

bool is_reserved(std::string_view word) {
  return std::find(std::begin(kReserved), std::end(kReserved), word) != std::end(kReserved);
}

ParseResult parse(std::string_view source) {
  ParseResult result;
  try {
    Parser p(source, false);
    SourceModel m = p.parse_model();
    result.diagnostics = Checker(m).run();
    if (result.diagnostics.empty()) result.model = std::move(m);
  } catch (const Error& e) {
    result.diagnostics = e.diagnostics();
  } catch (const std::exception& e) {
    result.diagnostics.push_back(Diagnostic{ErrorKind::SyntaxError, e.what(), SourceLoc{1, 1}});
  }
  return result;
}

SourceModel parse_or_throw(std::string_view source) {
  ParseResult r = parse(source);
  if (!r.ok()) throw Error(std::move(r.diagnostics));
  return std::move(*r.model);
}

Expr parse_expression(std::string_view source) { return Parser(source, false).parse_single_expression(); }

Expr parse_formula(std::string_view source) { return Parser(source, true).parse_single_expression(); }

std::vector<PropertySource> parse_property_file(std::string_view source) {
  std::vector<PropertySource> out;
  std::size_t start = 0;
  int line_no = 0;
  while (start <= source.size()) {
    std::size_t nl = source.find('\n', start);
    std::string_view line = source.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
    ++line_no;
    start = nl == std::string_view::npos ? source.size() + 1 : nl + 1;

    std::vector<Token> toks;
    try {
      toks = tokenize(line);
    } catch (const Error& e) {
      throw Error(e.kind(), e.diagnostics().front().message, SourceLoc{line_no, e.loc().column});
    }
    if (toks.size() == 1) continue;  // blank or comment-only

    auto at_line = [&](const Token& t) { return SourceLoc{line_no, t.loc.column}; };
    std::size_t i = 0;
    PropertySource p;
    p.loc = at_line(toks[0]);
    if (toks[0].kind != TokenKind::Ident || is_reserved(toks[0].text))
      throw Error(ErrorKind::SyntaxError, "expected property name", p.loc);
    p.name = toks[i++].text;
    if (toks[i].is_symbol("(")) {
      // Reuse the model parser for the parameter list.
      std::size_t close = i;
      int depth = 0;
      for (; close < toks.size(); ++close) {
        if (toks[close].is_symbol("(")) ++depth;
        if (toks[close].is_symbol(")") && --depth == 0) break;
      }
      if (close >= toks.size() - 1)
        throw Error(ErrorKind::SyntaxError, "unterminated parameter list", at_line(toks[i]));
      std::string head = "properties " + p.name + " " +
                         std::string(line.substr(toks[i].offset, toks[close].end - toks[i].offset)) +
                         " : true ; end";
      SourceModel tmp = Parser(head, false).parse_model();
      p.params = tmp.properties.front().params;
      for (auto& d : p.params) d.loc = SourceLoc{line_no, d.loc.column};
      i = close + 1;
    }
    if (!toks[i].is_symbol(":"))
      throw Error(ErrorKind::SyntaxError, "expected ':' after property name", at_line(toks[i]));
    std::size_t begin = toks[i].end;
    std::size_t end = toks[toks.size() - 2].end;
    if (toks[toks.size() - 2].is_symbol(";")) end = toks[toks.size() - 2].offset;
    if (end <= begin) throw Error(ErrorKind::SyntaxError, "empty property formula", p.loc);
    std::string_view text = line.substr(begin, end - begin);
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
    p.text = std::string(text);
    out.push_back(std::move(p));
  }
  return out;
}

std::int64_t eval_const(const Expr& e, const std::map<std::string, std::int64_t>& constants) {
  auto ev = [&](const Expr& k) { return eval_const(k, constants); };
  switch (e.kind) {
    case ExprKind::IntLit:
    case ExprKind::BoolLit:
      return e.value;
    case ExprKind::Name: {
      auto it = constants.find(e.name);
      if (it == constants.end() || e.primed)
        throw Error(ErrorKind::UnknownReference, fmt::format("'{}' is not a constant", e.name), e.loc);
      return it->second;
    }
    case ExprKind::Unary:
      return e.op == Op::Not ? !ev(e.kids[0]) : -ev(e.kids[0]);
    case ExprKind::Binary: {
      std::int64_t a = ev(e.kids[0]);
      if (e.op == Op::And && !a) return 0;
      if (e.op == Op::Or && a) return 1;
      if (e.op == Op::Implies && !a) return 1;
      std::int64_t b = ev(e.kids[1]);
      switch (e.op) {
        case Op::Add: return a + b;
        case Op::Sub: return a - b;
        case Op::Mul: return a * b;
        case Op::Div:
        case Op::Mod:
          if (b == 0) throw Error(ErrorKind::EvaluationError, "division by zero", e.loc);
          return e.op == Op::Div ? a / b : a % b;
        case Op::Eq: return a == b;
        case Op::Ne: return a != b;
        case Op::Lt: return a < b;
        case Op::Le: return a <= b;
        case Op::Gt: return a > b;
        case Op::Ge: return a >= b;
        case Op::And:
        case Op::Or:
        case Op::Implies: return b != 0;
        default: break;
      }
      break;
    }
    default:
      break;
  }
  throw Error(ErrorKind::TypeError, "expression is not a constant", e.loc);
}

}  // namespace ttm::syntax
