#include "layoutc/parser.hpp"

#include <cctype>

#include "layoutc/lexer.hpp"

namespace layoutc {

namespace {

struct ParseAbort {};

class Parser {
 public:
  Parser(std::vector<Token> toks, int file_id, std::set<std::string> known_types,
         std::vector<Diagnostic>* diags)
      : toks_(std::move(toks)), file_id_(file_id), types_(std::move(known_types)), diags_(diags) {}

  Program parse_program() {
    Program p;
    while (!at(Tok::End)) {
      if (at_kw("type")) {
        p.types.push_back(parse_type_decl());
      } else if (at_kw("func")) {
        p.funcs.push_back(parse_func_decl());
      } else if (at_kw("layout")) {
        p.layouts.push_back(parse_layout_decl());
      } else if (at_kw("build")) {
        p.builds.push_back(parse_build_decl());
      } else {
        error_expected({"type", "func", "layout", "build"});
      }
    }
    return p;
  }

 private:
  std::vector<Token> toks_;
  size_t pos_ = 0;
  int file_id_;
  std::set<std::string> types_;
  std::vector<Diagnostic>* diags_;
  bool in_build_ = false;

  const Token& cur() const { return toks_[pos_]; }
  const Token& peek(size_t n = 1) const {
    return toks_[pos_ + n < toks_.size() ? pos_ + n : toks_.size() - 1];
  }
  bool at(Tok k) const { return cur().kind == k; }
  bool at_kw(const char* kw) const { return cur().kind == Tok::Ident && cur().text == kw; }
  Token advance() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
  bool accept(Tok k) {
    if (at(k)) {
      advance();
      return true;
    }
    return false;
  }
  bool accept_kw(const char* kw) {
    if (at_kw(kw)) {
      advance();
      return true;
    }
    return false;
  }
  Token expect(Tok k, const char* what) {
    if (!at(k)) error_expected({what});
    return advance();
  }
  void expect_kw(const char* kw) {
    if (!at_kw(kw)) error_expected({kw});
    advance();
  }

  [[noreturn]] void error_expected(std::vector<std::string> expected) {
    Diagnostic d;
    d.code = DiagCode::SyntaxError;
    d.span = cur().span;
    d.message = "unexpected ";
    d.message += cur().kind == Tok::End ? "end of input" : ("'" + describe(cur()) + "'");
    if (!expected.empty()) {
      d.message += ", expected ";
      for (size_t i = 0; i < expected.size(); i++) {
        if (i) d.message += i + 1 == expected.size() ? " or " : ", ";
        d.message += "'" + expected[i] + "'";
      }
    }
    d.expected = std::move(expected);
    diags_->push_back(std::move(d));
    throw ParseAbort{};
  }

  static std::string describe(const Token& t) {
    if (!t.text.empty()) return t.text;
    if (t.kind == Tok::Int || t.kind == Tok::Float) return "number";
    return "token";
  }

  // -------------------------------------------------------------------------
  // Types
  // -------------------------------------------------------------------------

  // Decode an identifier as a type: primitives, vectors (f32x3x8), or a
  // declared type name, with trailing xN vector suffixes peeled as needed.
  // In strict mode unknown names fail instead of falling back to Named; the
  // vector-suffix recursion and expression-context probes use strict mode so
  // that e.g. `mx2` in `if a > mx2 { ... }` never reads as a type.
  SemTypePtr decode_type_ident(const std::string& id, bool* ok, bool strict = false) {
    *ok = true;
    if (id == "bool") return SemType::make_bool();
    if (id == "ptr") return SemType::make_ptr();
    if (id == "f16") return SemType::make_float(16);
    if (id == "f32") return SemType::make_float(32);
    if ((id[0] == 'u' || id[0] == 'i') && id.size() > 1) {
      bool digits = true;
      for (size_t i = 1; i < id.size(); i++)
        if (!std::isdigit(static_cast<unsigned char>(id[i]))) digits = false;
      if (digits) {
        uint32_t w = static_cast<uint32_t>(std::stoul(id.substr(1)));
        if (w >= 1 && w <= 64) return SemType::make_int(w, id[0] == 'i');
        *ok = false;
        return SemType::make_void();
      }
    }
    if (types_.count(id)) return SemType::make_named(id);
    // Try peeling a trailing xN suffix: the base must decode strictly.
    size_t x = id.rfind('x');
    if (x != std::string::npos && x > 0 && x + 1 < id.size()) {
      bool digits = true;
      for (size_t i = x + 1; i < id.size(); i++)
        if (!std::isdigit(static_cast<unsigned char>(id[i]))) digits = false;
      if (digits) {
        bool sub_ok = false;
        SemTypePtr base = decode_type_ident(id.substr(0, x), &sub_ok, /*strict=*/true);
        if (sub_ok) {
          uint32_t lanes = static_cast<uint32_t>(std::stoul(id.substr(x + 1)));
          return SemType::make_vec(base, lanes);
        }
      }
    }
    if (strict) {
      *ok = false;
      return SemType::make_void();
    }
    // Unknown name: keep as Named; sema reports unresolved types.
    return SemType::make_named(id);
  }

  SemTypePtr parse_type() {
    SemTypePtr t;
    if (at(Tok::LParen)) {
      advance();
      std::vector<SemTypePtr> members;
      members.push_back(parse_type());
      while (accept(Tok::Comma)) members.push_back(parse_type());
      expect(Tok::RParen, ")");
      t = SemType::make_tuple(std::move(members));
    } else if (at_kw("set")) {
      advance();
      expect(Tok::LBracket, "[");
      SemTypePtr e = parse_type();
      expect(Tok::RBracket, "]");
      t = SemType::make_set(e);
    } else if (at_kw("option")) {
      advance();
      expect(Tok::LBracket, "[");
      SemTypePtr e = parse_type();
      expect(Tok::RBracket, "]");
      t = SemType::make_optional(e);
    } else if (at(Tok::Ident)) {
      Token id = advance();
      bool ok = false;
      t = decode_type_ident(id.text, &ok);
      if (!ok) {
        Diagnostic d;
        d.code = DiagCode::SyntaxError;
        d.span = id.span;
        d.message = "invalid primitive width in '" + id.text + "' (bit width must be 1..64)";
        diags_->push_back(std::move(d));
        throw ParseAbort{};
      }
    } else {
      error_expected({"type"});
    }
    // Array suffixes: T[3] (static) or T[name] (dynamically sized by a field).
    while (at(Tok::LBracket)) {
      advance();
      if (at(Tok::Int)) {
        uint64_t n = advance().int_val;
        t = SemType::make_array(t, static_cast<uint32_t>(n));
      } else if (at(Tok::Ident)) {
        t = SemType::make_dyn_array(t, advance().text);
      } else {
        error_expected({"array length"});
      }
      expect(Tok::RBracket, "]");
    }
    return t;
  }

  // -------------------------------------------------------------------------
  // Expressions
  // -------------------------------------------------------------------------

  ExprPtr mk(ExprKind k, Span sp) {
    auto e = std::make_unique<Expr>();
    e->kind = k;
    e->span = sp;
    return e;
  }

  bool ident_is_type(const std::string& id) {
    bool ok = false;
    SemTypePtr t = decode_type_ident(id, &ok, /*strict=*/true);
    return ok && t->kind != TypeKind::Void;
  }

  SemTypePtr suffix_to_type(const Token& t) {
    if (t.suffix.empty()) return nullptr;
    if (t.suffix == "u") return SemType::make_int(32, false);
    bool ok = false;
    SemTypePtr ty = decode_type_ident(t.suffix, &ok);
    if (ok && (ty->kind == TypeKind::Int || ty->kind == TypeKind::Float)) return ty;
    Diagnostic d;
    d.code = DiagCode::SyntaxError;
    d.span = t.span;
    d.message = "invalid numeric suffix '" + t.suffix + "'";
    diags_->push_back(std::move(d));
    throw ParseAbort{};
  }

  ExprPtr parse_primary() {
    Span sp = cur().span;
    if (at(Tok::Int)) {
      Token t = advance();
      auto e = mk(ExprKind::IntLit, sp);
      e->int_val = t.int_val;
      e->suffix_type = suffix_to_type(t);
      e->int_has_suffix = e->suffix_type != nullptr;
      return e;
    }
    if (at(Tok::Float)) {
      Token t = advance();
      auto e = mk(ExprKind::FloatLit, sp);
      e->float_val = t.float_val;
      e->suffix_type = suffix_to_type(t);
      return e;
    }
    if (at_kw("true") || at_kw("false")) {
      auto e = mk(ExprKind::BoolLit, sp);
      e->bool_val = cur().text == "true";
      advance();
      return e;
    }
    if (at_kw("inf")) {
      advance();
      return mk(ExprKind::InfLit, sp);
    }
    if (at_kw("parent")) {
      advance();
      expect(Tok::Dot, ".");
      auto e = mk(ExprKind::ParentField, sp);
      e->name = expect(Tok::Ident, "identifier").text;
      return e;
    }
    if (at_kw("this")) {
      advance();
      return mk(ExprKind::This, sp);
    }
    if (at_kw("append")) {
      advance();
      expect(Tok::LParen, "(");
      auto e = mk(ExprKind::Append, sp);
      e->name = expect(Tok::Ident, "identifier").text;
      expect(Tok::Comma, ",");
      e->args.push_back(parse_expr());
      expect(Tok::RParen, ")");
      return e;
    }
    if (at_kw("build") && in_build_) {
      advance();
      auto e = mk(ExprKind::BuildChild, sp);
      e->name = expect(Tok::Ident, "identifier").text;
      return e;
    }
    if (at_kw("match")) {
      return parse_match_expr();
    }
    if (at(Tok::LBrace)) {
      advance();
      auto e = mk(ExprKind::Aggregate, sp);
      if (!at(Tok::RBrace)) {
        e->args.push_back(parse_expr());
        while (accept(Tok::Comma)) e->args.push_back(parse_expr());
      }
      expect(Tok::RBrace, "}");
      return e;
    }
    if (at(Tok::LParen)) {
      advance();
      ExprPtr first = parse_expr();
      if (at(Tok::Comma)) {
        auto e = mk(ExprKind::Tuple, sp);
        e->args.push_back(std::move(first));
        while (accept(Tok::Comma)) e->args.push_back(parse_expr());
        expect(Tok::RParen, ")");
        return e;
      }
      expect(Tok::RParen, ")");
      return first;
    }
    if (at(Tok::Ident)) {
      Token id = advance();
      if (at(Tok::LParen)) {
        advance();
        std::vector<ExprPtr> args;
        if (!at(Tok::RParen)) {
          args.push_back(parse_expr());
          while (accept(Tok::Comma)) args.push_back(parse_expr());
        }
        expect(Tok::RParen, ")");
        auto e = mk(ident_is_type(id.text) ? ExprKind::Construct : ExprKind::Call, sp);
        e->name = id.text;
        e->args = std::move(args);
        if (e->kind == ExprKind::Construct) {
          bool ok = false;
          e->cast_type = decode_type_ident(id.text, &ok);
        }
        return e;
      }
      if (at(Tok::LBrace) && ident_is_type(id.text)) {
        advance();
        auto e = mk(ExprKind::Construct, sp);
        e->name = id.text;
        bool ok = false;
        e->cast_type = decode_type_ident(id.text, &ok);
        if (!at(Tok::RBrace)) {
          e->args.push_back(parse_expr());
          while (accept(Tok::Comma)) e->args.push_back(parse_expr());
        }
        expect(Tok::RBrace, "}");
        return e;
      }
      auto e = mk(ExprKind::Ident, sp);
      e->name = id.text;
      return e;
    }
    error_expected({"expression"});
  }

  ExprPtr parse_match_expr() {
    Span sp = cur().span;
    expect_kw("match");
    auto e = mk(ExprKind::MatchExpr, sp);
    e->base = parse_expr();
    expect(Tok::LBrace, "{");
    while (at(Tok::Pipe)) {
      advance();
      MatchExprArm arm;
      arm.pattern = parse_pattern();
      expect(Tok::Arrow, "->");
      // Arm values bind tighter than `|` so the next arm's pipe terminates
      // the expression; parenthesize to use |, && or || in an arm.
      arm.value = parse_binary(4);
      accept(Tok::Semi);
      e->match_arms.push_back(std::move(arm));
    }
    expect(Tok::RBrace, "}");
    return e;
  }

  MatchPattern parse_pattern() {
    MatchPattern p;
    p.span = cur().span;
    if (accept(Tok::Underscore)) {
      p.wildcard = true;
      return p;
    }
    p.variant = expect(Tok::Ident, "variant name").text;
    if (accept(Tok::LParen)) {
      if (!at(Tok::RParen)) {
        auto binder = [&]() -> std::string {
          if (accept(Tok::Underscore)) return "_";
          return expect(Tok::Ident, "binder").text;
        };
        p.binders.push_back(binder());
        while (accept(Tok::Comma)) p.binders.push_back(binder());
      }
      expect(Tok::RParen, ")");
    }
    return p;
  }

  ExprPtr parse_postfix() {
    ExprPtr e = parse_primary();
    for (;;) {
      Span sp = cur().span;
      if (at(Tok::Dot)) {
        advance();
        std::string f = expect(Tok::Ident, "field name").text;
        if (at(Tok::LParen)) {
          advance();
          auto m = mk(ExprKind::MethodCall, sp);
          m->name = f;
          m->base = std::move(e);
          if (!at(Tok::RParen)) {
            m->args.push_back(parse_expr());
            while (accept(Tok::Comma)) m->args.push_back(parse_expr());
          }
          expect(Tok::RParen, ")");
          e = std::move(m);
        } else {
          auto fe = mk(ExprKind::Field, sp);
          fe->name = f;
          fe->base = std::move(e);
          e = std::move(fe);
        }
        continue;
      }
      if (at(Tok::LBracket)) {
        advance();
        ExprPtr a = parse_expr();
        if (accept(Tok::Colon)) {
          ExprPtr b = parse_expr();
          auto s = mk(ExprKind::Slice, sp);
          s->base = std::move(e);
          s->index = std::move(a);
          s->index2 = std::move(b);
          e = std::move(s);
        } else {
          auto s = mk(ExprKind::Index, sp);
          s->base = std::move(e);
          s->index = std::move(a);
          e = std::move(s);
        }
        expect(Tok::RBracket, "]");
        continue;
      }
      break;
    }
    return e;
  }

  ExprPtr parse_unary() {
    Span sp = cur().span;
    if (accept(Tok::Minus)) {
      auto e = mk(ExprKind::Unary, sp);
      e->un_op = UnOp::Neg;
      e->base = parse_unary();
      return e;
    }
    if (accept(Tok::Not)) {
      auto e = mk(ExprKind::Unary, sp);
      e->un_op = UnOp::Not;
      e->base = parse_unary();
      return e;
    }
    if (accept(Tok::Tilde)) {
      auto e = mk(ExprKind::Unary, sp);
      e->un_op = UnOp::BitNot;
      e->base = parse_unary();
      return e;
    }
    return parse_cast();
  }

  ExprPtr parse_cast() {
    ExprPtr e = parse_postfix();
    for (;;) {
      Span sp = cur().span;
      if (at_kw("as")) {
        advance();
        auto c = mk(ExprKind::CastAs, sp);
        c->base = std::move(e);
        c->cast_type = parse_type();
        e = std::move(c);
      } else if (at_kw("to")) {
        advance();
        auto c = mk(ExprKind::CastTo, sp);
        c->base = std::move(e);
        c->cast_type = parse_type();
        e = std::move(c);
      } else {
        break;
      }
    }
    return e;
  }

  struct OpInfo {
    BinOp op;
    int prec;
  };

  bool binop_at(OpInfo* out) {
    switch (cur().kind) {
      case Tok::PipePipe: *out = {BinOp::Or, 1}; return true;
      case Tok::AmpAmp: *out = {BinOp::And, 2}; return true;
      case Tok::Pipe: *out = {BinOp::BitOr, 3}; return true;
      case Tok::Caret: *out = {BinOp::BitXor, 4}; return true;
      case Tok::Amp: *out = {BinOp::BitAnd, 5}; return true;
      case Tok::Eq: *out = {BinOp::Eq, 6}; return true;
      case Tok::Ne: *out = {BinOp::Ne, 6}; return true;
      case Tok::Lt: *out = {BinOp::Lt, 7}; return true;
      case Tok::Gt: *out = {BinOp::Gt, 7}; return true;
      case Tok::Le: *out = {BinOp::Le, 7}; return true;
      case Tok::Ge: *out = {BinOp::Ge, 7}; return true;
      case Tok::Shl: *out = {BinOp::Shl, 8}; return true;
      case Tok::Shr: *out = {BinOp::Shr, 8}; return true;
      case Tok::Plus: *out = {BinOp::Add, 9}; return true;
      case Tok::Minus: *out = {BinOp::Sub, 9}; return true;
      case Tok::Star: *out = {BinOp::Mul, 10}; return true;
      case Tok::Slash: *out = {BinOp::Div, 10}; return true;
      case Tok::Percent: *out = {BinOp::Mod, 10}; return true;
      default: return false;
    }
  }

  ExprPtr parse_binary(int min_prec) {
    ExprPtr lhs = parse_unary();
    for (;;) {
      OpInfo info;
      if (!binop_at(&info) || info.prec < min_prec) break;
      Span sp = cur().span;
      advance();
      ExprPtr rhs = parse_binary(info.prec + 1);
      auto e = mk(ExprKind::Binary, sp);
      e->bin_op = info.op;
      e->index = std::move(lhs);
      e->index2 = std::move(rhs);
      lhs = std::move(e);
    }
    return lhs;
  }

  ExprPtr parse_expr() { return parse_binary(1); }

  // -------------------------------------------------------------------------
  // Statements
  // -------------------------------------------------------------------------

  StmtPtr mk_stmt(StmtKind k, Span sp) {
    auto s = std::make_unique<Stmt>();
    s->kind = k;
    s->span = sp;
    return s;
  }

  StmtPtr parse_block() {
    Span sp = cur().span;
    expect(Tok::LBrace, "{");
    auto b = mk_stmt(StmtKind::Block, sp);
    while (!at(Tok::RBrace)) b->block.push_back(parse_stmt());
    expect(Tok::RBrace, "}");
    return b;
  }

  StmtPtr parse_let_tail(Span sp, bool had_let_kw) {
    auto s = mk_stmt(StmtKind::Let, sp);
    s->name = expect(Tok::Ident, "identifier").text;
    expect(Tok::Colon, ":");
    if (accept_kw("mut")) s->is_mut = true;
    s->decl_type = parse_type();
    if (accept(Tok::Assign)) s->expr = parse_expr();
    else if (had_let_kw || true) expect(Tok::Assign, "=");
    expect(Tok::Semi, ";");
    return s;
  }

  StmtPtr parse_stmt() {
    Span sp = cur().span;
    if (at(Tok::LBrace)) return parse_block();
    if (at_kw("let")) {
      advance();
      return parse_let_tail(sp, true);
    }
    if (at_kw("return")) {
      advance();
      auto s = mk_stmt(StmtKind::Return, sp);
      if (!at(Tok::Semi)) s->expr = parse_expr();
      expect(Tok::Semi, ";");
      return s;
    }
    if (at_kw("match")) {
      advance();
      auto s = mk_stmt(StmtKind::Match, sp);
      s->expr = parse_expr();
      expect(Tok::LBrace, "{");
      while (at(Tok::Pipe)) {
        advance();
        MatchStmtArm arm;
        arm.pattern = parse_pattern();
        expect(Tok::Arrow, "->");
        arm.body = parse_stmt();
        accept(Tok::Semi);
        s->match_arms.push_back(std::move(arm));
      }
      expect(Tok::RBrace, "}");
      accept(Tok::Semi);
      return s;
    }
    if (at_kw("if")) {
      advance();
      auto s = mk_stmt(StmtKind::If, sp);
      IfClause first;
      first.cond = parse_expr();
      first.body = parse_block();
      s->if_clauses.push_back(std::move(first));
      for (;;) {
        if (at_kw("elif")) {
          advance();
          IfClause c;
          c.cond = parse_expr();
          c.body = parse_block();
          s->if_clauses.push_back(std::move(c));
        } else if (at_kw("else")) {
          advance();
          s->else_body = parse_block();
          break;
        } else {
          break;
        }
      }
      return s;
    }
    if (at_kw("foreach")) {
      advance();
      auto s = mk_stmt(StmtKind::Foreach, sp);
      s->name = expect(Tok::Ident, "identifier").text;
      expect_kw("in");
      s->expr = parse_expr();
      if (accept(Tok::Colon)) s->foreach_hi = parse_expr();
      StmtPtr body = parse_block();
      s->block.push_back(std::move(body));
      return s;
    }
    if (at_kw("build") && in_build_) {
      advance();
      auto s = mk_stmt(StmtKind::BuildField, sp);
      s->name = expect(Tok::Ident, "identifier").text;
      if (accept(Tok::Assign)) s->expr = parse_expr();
      expect(Tok::Semi, ";");
      return s;
    }
    // Bare declaration `x : mut T = e;` (no `let` keyword).
    if (at(Tok::Ident) && peek().kind == Tok::Colon) {
      return parse_let_tail(sp, false);
    }

    ExprPtr e = parse_expr();
    if (at(Tok::Assign)) {
      advance();
      auto s = mk_stmt(StmtKind::Assign, sp);
      if (!to_lvalue(*e, s.get())) {
        Diagnostic d;
        d.code = DiagCode::SyntaxError;
        d.span = e->span;
        d.message = "invalid assignment target";
        diags_->push_back(std::move(d));
        throw ParseAbort{};
      }
      s->expr = parse_expr();
      expect(Tok::Semi, ";");
      return s;
    }
    auto s = mk_stmt(StmtKind::ExprStmt, sp);
    s->expr = std::move(e);
    expect(Tok::Semi, ";");
    return s;
  }

  bool to_lvalue(const Expr& e, Stmt* s) {
    if (e.kind == ExprKind::Ident) {
      s->lv_name = e.name;
      return true;
    }
    if (e.kind == ExprKind::This) {
      s->lv_name = "this";
      return true;
    }
    if (e.kind == ExprKind::Field && e.base && e.base->kind == ExprKind::Ident) {
      s->lv_name = e.base->name;
      s->lv_field = e.name;
      s->lv_is_field = true;
      return true;
    }
    if (e.kind == ExprKind::Index && e.base &&
        (e.base->kind == ExprKind::Ident || e.base->kind == ExprKind::This)) {
      s->lv_name = e.base->kind == ExprKind::This ? "this" : e.base->name;
      s->lv_index = clone_expr(*e.index);
      s->lv_is_index = true;
      return true;
    }
    if (e.kind == ExprKind::Slice && e.base &&
        (e.base->kind == ExprKind::Ident || e.base->kind == ExprKind::This)) {
      s->lv_name = e.base->kind == ExprKind::This ? "this" : e.base->name;
      s->lv_index = clone_expr(*e.index);
      s->lv_index2 = clone_expr(*e.index2);
      s->lv_is_bitrange = true;
      return true;
    }
    return false;
  }

  // -------------------------------------------------------------------------
  // Declarations
  // -------------------------------------------------------------------------

  std::vector<FieldDecl> parse_field_list() {
    std::vector<FieldDecl> fields;
    expect(Tok::LParen, "(");
    if (!at(Tok::RParen)) {
      do {
        FieldDecl f;
        f.span = cur().span;
        f.name = expect(Tok::Ident, "field name").text;
        expect(Tok::Colon, ":");
        f.type = parse_type();
        if (accept(Tok::Assign)) f.default_value = parse_expr();
        fields.push_back(std::move(f));
      } while (accept(Tok::Comma));
    }
    expect(Tok::RParen, ")");
    return fields;
  }

  AdtDecl parse_type_decl() {
    AdtDecl d;
    d.span = cur().span;
    expect_kw("type");
    d.name = expect(Tok::Ident, "type name").text;
    types_.insert(d.name);  // allow recursive references
    if (at(Tok::LParen)) d.common_fields = parse_field_list();
    if (accept(Tok::Assign)) {
      do {
        VariantDecl v;
        v.span = cur().span;
        v.name = expect(Tok::Ident, "variant name").text;
        v.fields = parse_field_list();
        d.variants.push_back(std::move(v));
      } while (accept(Tok::Pipe));
    }
    expect(Tok::Semi, ";");
    return d;
  }

  std::vector<ParamDecl> parse_params() {
    std::vector<ParamDecl> params;
    expect(Tok::LParen, "(");
    if (!at(Tok::RParen)) {
      do {
        ParamDecl p;
        p.span = cur().span;
        p.name = expect(Tok::Ident, "parameter name").text;
        expect(Tok::Colon, ":");
        if (accept_kw("mut")) p.is_mut = true;
        p.type = parse_type();
        if (accept(Tok::Assign)) p.default_value = parse_expr();
        params.push_back(std::move(p));
      } while (accept(Tok::Comma));
    }
    expect(Tok::RParen, ")");
    return params;
  }

  FuncDecl parse_func_decl() {
    FuncDecl f;
    f.span = cur().span;
    expect_kw("func");
    f.name = expect(Tok::Ident, "function name").text;
    if (accept(Tok::LBracket)) {
      do {
        f.attrs.push_back(expect(Tok::Ident, "attribute").text);
      } while (accept(Tok::Comma));
      expect(Tok::RBracket, "]");
    }
    f.params = parse_params();
    if (accept(Tok::Arrow)) f.return_type = parse_type();
    else f.return_type = SemType::make_void();
    if (accept(Tok::Assign)) {
      f.body = parse_stmt();
    } else if (at(Tok::LBrace)) {
      f.body = parse_block();
    } else {
      error_expected({"=", "{"});
    }
    return f;
  }

  // ----- layout language -----

  MemberPtr mk_member(MemberKind k, Span sp) {
    auto m = std::make_unique<Member>();
    m->kind = k;
    m->span = sp;
    return m;
  }

  void parse_group_attrs(Member* g) {
    expect(Tok::LBracket, "[");
    do {
      if (at(Tok::Int)) {
        g->tile = advance().int_val;
      } else if (at_kw("size")) {
        advance();
        expect(Tok::Assign, "=");
        g->size_expr = parse_expr();
      } else if (at_kw("align")) {
        advance();
        expect(Tok::Assign, "=");
        Token n = expect(Tok::Int, "alignment");
        if (n.int_val == 0 || (n.int_val & (n.int_val - 1)) != 0) {
          Diagnostic d;
          d.code = DiagCode::BadAttribute;
          d.span = n.span;
          d.message = "alignment must be a power of two, got " + std::to_string(n.int_val);
          diags_->push_back(std::move(d));
          throw ParseAbort{};
        }
        g->align_bytes = n.int_val;
      } else {
        error_expected({"size", "align", "tile count"});
      }
    } while (accept(Tok::Comma));
    expect(Tok::RBracket, "]");
  }

  SplitArm parse_split_arm() {
    SplitArm arm;
    arm.span = cur().span;
    if (accept(Tok::Underscore)) {
      arm.pattern = PatternKind::Wildcard;
    } else {
      if (accept(Tok::Gt)) arm.pattern = PatternKind::Gt;
      else if (accept(Tok::Lt)) arm.pattern = PatternKind::Lt;
      else if (accept(Tok::Ge)) arm.pattern = PatternKind::Ge;
      else if (accept(Tok::Le)) arm.pattern = PatternKind::Le;
      else if (accept(Tok::Tilde)) arm.pattern = PatternKind::Approx;
      else arm.pattern = PatternKind::Literal;
      // Pattern operand: integer literal with optional leading minus.
      Span vsp = cur().span;
      bool neg = accept(Tok::Minus);
      Token n = expect(Tok::Int, "pattern literal");
      auto lit = mk(ExprKind::IntLit, vsp);
      lit->int_val = neg ? static_cast<uint64_t>(-static_cast<int64_t>(n.int_val)) : n.int_val;
      lit->suffix_type = suffix_to_type(n);
      lit->int_has_suffix = lit->suffix_type != nullptr;
      arm.pattern_value = std::move(lit);
    }
    expect(Tok::Arrow, "->");
    arm.variant = expect(Tok::Ident, "variant name").text;
    if (at_kw("from")) {
      advance();
      arm.is_from = true;
      arm.from_group = expect(Tok::Ident, "group name").text;
      expect(Tok::LBracket, "[");
      arm.from_key = parse_expr();
      expect(Tok::RBracket, "]");
    } else {
      expect(Tok::LBrace, "{");
      while (!at(Tok::RBrace)) arm.members.push_back(parse_member());
      expect(Tok::RBrace, "}");
    }
    accept(Tok::Semi);
    return arm;
  }

  MemberPtr parse_member() {
    Span sp = cur().span;
    if (at(Tok::Separator)) {
      advance();
      return mk_member(MemberKind::Separator, sp);
    }
    if (at(Tok::Int)) {
      auto m = mk_member(MemberKind::Padding, sp);
      m->padding_bits = advance().int_val;
      expect(Tok::Semi, ";");
      return m;
    }
    if (at_kw("let")) {
      advance();
      auto m = mk_member(MemberKind::Let, sp);
      m->name = expect(Tok::Ident, "identifier").text;
      expect(Tok::Colon, ":");
      m->type = parse_type();
      expect(Tok::Assign, "=");
      m->value = parse_expr();
      expect(Tok::Semi, ";");
      return m;
    }
    if (at_kw("split")) {
      advance();
      auto m = mk_member(MemberKind::Split, sp);
      m->value = parse_expr();
      expect(Tok::LBrace, "{");
      while (!at(Tok::RBrace)) m->arms.push_back(parse_split_arm());
      expect(Tok::RBrace, "}");
      accept(Tok::Semi);
      return m;
    }
    bool indirect = false;
    if (at_kw("indirect")) {
      advance();
      indirect = true;
      if (!at_kw("group")) error_expected({"group"});
    }
    if (at_kw("group")) {
      advance();
      auto m = mk_member(MemberKind::Group, sp);
      m->indirect = indirect;
      if (at(Tok::Ident) && cur().text != "by") m->group_name = advance().text;
      if (at(Tok::LBracket)) parse_group_attrs(m.get());
      if (at_kw("by")) {
        advance();
        m->index_binding = expect(Tok::Ident, "index name").text;
      }
      expect(Tok::LBrace, "{");
      while (!at(Tok::RBrace)) m->members.push_back(parse_member());
      expect(Tok::RBrace, "}");
      accept(Tok::Semi);
      return m;
    }
    // field or derive
    std::string name = expect(Tok::Ident, "member").text;
    if (accept(Tok::Colon)) {
      auto m = mk_member(MemberKind::StoredField, sp);
      m->name = name;
      m->type = parse_type();
      expect(Tok::Semi, ";");
      return m;
    }
    if (accept(Tok::Assign)) {
      auto m = mk_member(MemberKind::Derive, sp);
      m->name = name;
      m->value = parse_expr();
      expect(Tok::Semi, ";");
      return m;
    }
    error_expected({":", "="});
  }

  LayoutSpec parse_layout_decl() {
    LayoutSpec l;
    l.span = cur().span;
    expect_kw("layout");
    l.name = expect(Tok::Ident, "layout name").text;
    l.reference_params = parse_params();
    expect(Tok::LBrace, "{");
    while (!at(Tok::RBrace)) l.members.push_back(parse_member());
    expect(Tok::RBrace, "}");
    accept(Tok::Semi);
    return l;
  }

  // ----- build language -----

  BuildSpec parse_build_decl() {
    BuildSpec b;
    b.span = cur().span;
    expect_kw("build");
    b.name = expect(Tok::Ident, "build name").text;
    expect(Tok::LBracket, "[");
    expect_kw("order");
    expect(Tok::Assign, "=");
    Token ord = expect(Tok::Ident, "pre or post");
    if (ord.text == "pre") {
      b.order = BuildOrder::Pre;
    } else if (ord.text == "post") {
      b.order = BuildOrder::Post;
    } else {
      Diagnostic d;
      d.code = DiagCode::BadAttribute;
      d.span = ord.span;
      d.message = "invalid build order '" + ord.text + "' (must be pre or post)";
      diags_->push_back(std::move(d));
      throw ParseAbort{};
    }
    expect(Tok::RBracket, "]");
    expect(Tok::LBrace, "{");
    in_build_ = true;
    while (!at(Tok::RBrace)) {
      expect_kw("build");
      VariantBuilder vb;
      vb.span = cur().span;
      vb.variant = expect(Tok::Ident, "variant name").text;
      vb.params = parse_params();
      expect(Tok::LBrace, "{");
      while (!at(Tok::RBrace)) {
        if (at_kw("build") && peek().kind == Tok::Ident && peek().text == "root") {
          Span rsp = cur().span;
          advance();
          advance();
          if (vb.has_root) {
            Diagnostic d;
            d.code = DiagCode::DuplicateName;
            d.span = rsp;
            d.message = "duplicate root block";
            diags_->push_back(std::move(d));
          }
          vb.has_root = true;
          expect(Tok::LBrace, "{");
          while (!at(Tok::RBrace)) vb.root_block.push_back(parse_stmt());
          expect(Tok::RBrace, "}");
          accept(Tok::Semi);
          continue;
        }
        vb.stmts.push_back(parse_stmt());
      }
      expect(Tok::RBrace, "}");
      accept(Tok::Semi);
      b.builders.push_back(std::move(vb));
    }
    in_build_ = false;
    expect(Tok::RBrace, "}");
    accept(Tok::Semi);
    return b;
  }
};

void check_duplicates(const Program& p, std::vector<Diagnostic>* diags) {
  auto dup = [&](const std::string& what, const std::string& name, Span sp) {
    Diagnostic d;
    d.code = DiagCode::DuplicateName;
    d.span = sp;
    d.message = "duplicate " + what + " '" + name + "'";
    diags->push_back(std::move(d));
  };
  std::set<std::string> seen;
  for (const auto& t : p.types) {
    if (!seen.insert("type:" + t.name).second) dup("type", t.name, t.span);
    std::set<std::string> vs;
    for (const auto& v : t.variants) {
      if (!vs.insert(v.name).second) dup("variant", v.name, v.span);
      std::set<std::string> fs;
      for (const auto& f : t.common_fields) fs.insert(f.name);
      for (const auto& f : v.fields) {
        if (!fs.insert(f.name).second) dup("field", f.name, f.span);
      }
    }
    if (t.variants.empty()) {
      std::set<std::string> fs;
      for (const auto& f : t.common_fields) {
        if (!fs.insert(f.name).second) dup("field", f.name, f.span);
      }
    }
  }
  // Functions may be overloaded: duplicates checked by (name, arity, param types).
  std::set<std::string> fsigs;
  for (const auto& f : p.funcs) {
    std::string sig = f.name + "(";
    for (const auto& pa : f.params) sig += type_to_string(*pa.type) + ",";
    sig += ")";
    if (!fsigs.insert(sig).second) dup("function", f.name, f.span);
  }
  for (const auto& l : p.layouts) {
    if (!seen.insert("layout:" + l.name).second) dup("layout", l.name, l.span);
  }
  for (const auto& b : p.builds) {
    if (!seen.insert("build:" + b.name).second) dup("build", b.name, b.span);
  }
}

}  // namespace

ParseResult parse_source(const std::string& text, int file_id,
                         const std::set<std::string>& known_types) {
  ParseResult r;
  LexResult lx = lex(text, file_id);
  r.diags = lx.diags;
  if (!r.diags.empty()) return r;
  Parser parser(std::move(lx.tokens), file_id, known_types, &r.diags);
  try {
    r.program = parser.parse_program();
  } catch (ParseAbort&) {
    return r;
  }
  check_duplicates(r.program, &r.diags);
  return r;
}

ParseResult parse_sources(const SourceSet& sources) {
  ParseResult r;
  std::set<std::string> known;
  for (int i = 0; i < sources.count(); i++) {
    ParseResult one = parse_source(sources.file(i).text, i, known);
    for (auto& d : one.diags) r.diags.push_back(std::move(d));
    if (!one.diags.empty()) continue;
    for (auto& t : one.program.types) {
      known.insert(t.name);
      r.program.types.push_back(std::move(t));
    }
    for (auto& f : one.program.funcs) r.program.funcs.push_back(std::move(f));
    for (auto& l : one.program.layouts) r.program.layouts.push_back(std::move(l));
    for (auto& b : one.program.builds) r.program.builds.push_back(std::move(b));
  }
  if (r.diags.empty()) check_duplicates(r.program, &r.diags);
  return r;
}

ParseResult parse_traversal(const std::string& text, int file_id) {
  return parse_source(text, file_id);
}
ParseResult parse_layout(const std::string& text, int file_id) {
  return parse_source(text, file_id);
}
ParseResult parse_build(const std::string& text, int file_id) {
  return parse_source(text, file_id);
}

}  // namespace layoutc
