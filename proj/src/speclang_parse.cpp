// Copyright (c) SpecForge contributors.
// SPDX-License-Identifier: Apache-2.0
//
// Recursive-descent parser for the closed Python/Z3-flavored surface
// grammar: one `def` per file, a guard binding, an optional state copy,
// ordered writes on the copy, and a `return cond, util.If(...)` line.
#include <cctype>
#include <sstream>

#include "specforge/speclang.hpp"

namespace specforge {

std::string fault_kind_name(FaultKind k) {
  switch (k) {
    case FaultKind::ParseError: return "ParseError";
    case FaultKind::TypeSortError: return "TypeSortError";
    case FaultKind::ApiReferenceError: return "ApiReferenceError";
    case FaultKind::DomainError: return "DomainError";
  }
  return "?";
}

namespace {

enum class Tok {
  End, Newline, Ident, Number,
  LParen, RParen, LBracket, RBracket, Comma, Colon, Dot,
  Assign, PlusAssign, MinusAssign,
  EqEq, NotEq, Lt, Gt, Shl, Plus, Minus, Star, Pipe, Amp,
};

struct Token {
  Tok kind = Tok::End;
  std::string text;
  Word number = 0;
  int line = 0;
  int col = 0;
};

struct ParseFault {
  SpecFault fault;
};

[[noreturn]] void fail(int line, int col, std::string msg) {
  throw ParseFault{SpecFault{FaultKind::ParseError, std::move(msg), line, col}};
}

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) { tokenize(); }
  const std::vector<Token>& tokens() const { return tokens_; }

 private:
  void tokenize() {
    int line = 1, col = 1;
    int depth = 0;
    std::size_t i = 0;
    bool line_has_token = false;
    auto push = [&](Tok k, std::string text, Word num = 0) {
      tokens_.push_back(Token{k, std::move(text), num, line, col});
    };
    while (i < text_.size()) {
      char c = text_[i];
      if (c == '\n') {
        if (depth == 0 && line_has_token) {
          push(Tok::Newline, "\\n");
          line_has_token = false;
        }
        ++i;
        ++line;
        col = 1;
        continue;
      }
      if (c == ' ' || c == '\t' || c == '\r') {
        ++i;
        ++col;
        continue;
      }
      if (c == '#') {
        while (i < text_.size() && text_[i] != '\n') ++i;
        continue;
      }
      line_has_token = true;
      int tok_col = col;
      auto emit = [&](Tok k, std::string_view text) {
        tokens_.push_back(Token{k, std::string(text), 0, line, tok_col});
        i += text.size();
        col += static_cast<int>(text.size());
      };
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::size_t j = i;
        while (j < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[j])) ||
                text_[j] == '_'))
          ++j;
        tokens_.push_back(
            Token{Tok::Ident, std::string(text_.substr(i, j - i)), 0, line,
                  tok_col});
        col += static_cast<int>(j - i);
        i = j;
        continue;
      }
      if (std::isdigit(static_cast<unsigned char>(c))) {
        std::size_t j = i;
        int base = 10;
        if (c == '0' && j + 1 < text_.size() &&
            (text_[j + 1] == 'x' || text_[j + 1] == 'X')) {
          base = 16;
          j += 2;
        }
        while (j < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[j]))))
          ++j;
        std::string lit(text_.substr(i, j - i));
        Word value = 0;
        try {
          value = std::stoull(lit, nullptr, base);
        } catch (const std::exception&) {
          fail(line, tok_col, "malformed number literal '" + lit + "'");
        }
        tokens_.push_back(Token{Tok::Number, lit, value, line, tok_col});
        col += static_cast<int>(j - i);
        i = j;
        continue;
      }
      switch (c) {
        case '(': ++depth; emit(Tok::LParen, "("); break;
        case ')': --depth; emit(Tok::RParen, ")"); break;
        case '[': ++depth; emit(Tok::LBracket, "["); break;
        case ']': --depth; emit(Tok::RBracket, "]"); break;
        case ',': emit(Tok::Comma, ","); break;
        case ':': emit(Tok::Colon, ":"); break;
        case '.': emit(Tok::Dot, "."); break;
        case '|': emit(Tok::Pipe, "|"); break;
        case '&': emit(Tok::Amp, "&"); break;
        case '*': emit(Tok::Star, "*"); break;
        case '=':
          if (i + 1 < text_.size() && text_[i + 1] == '=') emit(Tok::EqEq, "==");
          else emit(Tok::Assign, "=");
          break;
        case '!':
          if (i + 1 < text_.size() && text_[i + 1] == '=')
            emit(Tok::NotEq, "!=");
          else
            fail(line, tok_col, "unexpected '!'");
          break;
        case '<':
          if (i + 1 < text_.size() && text_[i + 1] == '<') emit(Tok::Shl, "<<");
          else emit(Tok::Lt, "<");
          break;
        case '>': emit(Tok::Gt, ">"); break;
        case '+':
          if (i + 1 < text_.size() && text_[i + 1] == '=')
            emit(Tok::PlusAssign, "+=");
          else
            emit(Tok::Plus, "+");
          break;
        case '-':
          if (i + 1 < text_.size() && text_[i + 1] == '=')
            emit(Tok::MinusAssign, "-=");
          else
            emit(Tok::Minus, "-");
          break;
        default:
          fail(line, tok_col, std::string("unexpected character '") + c + "'");
      }
    }
    if (line_has_token) tokens_.push_back(Token{Tok::Newline, "\\n", 0, line, col});
    tokens_.push_back(Token{Tok::End, "", 0, line, col});
  }

  std::string_view text_;
  std::vector<Token> tokens_;
};

class Parser {
 public:
  explicit Parser(std::string_view text) : lexer_(text) {}

  SpecAst parse() {
    SpecAst ast;
    expect_ident("def");
    ast.name = expect(Tok::Ident, "function name").text;
    expect(Tok::LParen, "'('");
    ast.state_param = expect(Tok::Ident, "state parameter").text;
    while (accept(Tok::Comma)) ast.params.push_back(
        expect(Tok::Ident, "parameter name").text);
    expect(Tok::RParen, "')'");
    expect(Tok::Colon, "':'");
    expect(Tok::Newline, "end of line");
    ast_ = &ast;

    parse_guard();
    bool saw_return = false;
    while (!saw_return) {
      const Token& t = peek();
      if (t.kind == Tok::End)
        fail(t.line, t.col, "missing return statement");
      if (t.kind == Tok::Ident && t.text == "return") {
        parse_return();
        saw_return = true;
      } else {
        parse_body_statement();
      }
    }
    if (peek().kind != Tok::End)
      fail(peek().line, peek().col, "unexpected text after return");
    return ast;
  }

 private:
  const Token& peek(int ahead = 0) const {
    std::size_t i = pos_ + static_cast<std::size_t>(ahead);
    const auto& toks = lexer_.tokens();
    return i < toks.size() ? toks[i] : toks.back();
  }
  const Token& next() {
    const Token& t = peek();
    if (t.kind != Tok::End) ++pos_;
    return t;
  }
  bool accept(Tok k) {
    if (peek().kind == k) {
      ++pos_;
      return true;
    }
    return false;
  }
  const Token& expect(Tok k, const char* what) {
    const Token& t = peek();
    if (t.kind != k)
      fail(t.line, t.col,
           std::string("expected ") + what + ", found '" + t.text + "'");
    return next();
  }
  void expect_ident(const char* word) {
    const Token& t = peek();
    if (t.kind != Tok::Ident || t.text != word)
      fail(t.line, t.col,
           std::string("expected '") + word + "', found '" + t.text + "'");
    next();
  }

  bool is_param(const std::string& name) const {
    for (const auto& p : ast_->params)
      if (p == name) return true;
    return false;
  }

  void parse_guard() {
    const Token& t = peek();
    if (t.kind != Tok::Ident)
      fail(t.line, t.col, "the body must start with the pre-condition binding");
    if (t.text == "return")
      fail(t.line, t.col, "the pre-condition must be bound before return");
    // A leading copy would leave the guard unbound.
    if (peek(1).kind == Tok::Assign && is_copy_rhs(2))
      fail(t.line, t.col,
           "the pre-condition must be bound before the state copy");
    ast_->guard_var = next().text;
    expect(Tok::Assign, "'='");
    ast_->guard = parse_expr();
    expect(Tok::Newline, "end of line");
  }

  bool is_copy_rhs(int ahead) const {
    return peek(ahead).kind == Tok::Ident &&
           peek(ahead + 1).kind == Tok::Dot &&
           peek(ahead + 2).kind == Tok::Ident &&
           peek(ahead + 2).text == "copy";
  }

  void parse_body_statement() {
    const Token& t = peek();
    if (t.kind != Tok::Ident)
      fail(t.line, t.col, "expected a statement");
    // Bare binder: either the state copy or an illegal second binding.
    if (peek(1).kind == Tok::Assign && is_copy_rhs(2)) {
      if (ast_->has_copy)
        fail(t.line, t.col, "a specification makes exactly one state copy");
      ast_->copy_var = next().text;
      next();  // '='
      std::string src = next().text;
      if (src != ast_->state_param)
        fail(t.line, t.col, "the copy must come from the state parameter '" +
                                ast_->state_param + "'");
      expect(Tok::Dot, "'.'");
      expect_ident("copy");
      expect(Tok::LParen, "'('");
      expect(Tok::RParen, "')'");
      expect(Tok::Newline, "end of line");
      ast_->has_copy = true;
      return;
    }
    if (peek(1).kind == Tok::Assign)
      fail(t.line, t.col,
           "only the pre-condition binding and one state copy are allowed");
    parse_write();
  }

  void parse_write() {
    const Token& root_tok = next();
    const std::string root = root_tok.text;
    if (!ast_->has_copy || root != ast_->copy_var) {
      if (root == ast_->state_param)
        fail(root_tok.line, root_tok.col,
             "writes must target the copied state, not '" + root + "'");
      fail(root_tok.line, root_tok.col,
           "writes must target the copied state");
    }
    expect(Tok::Dot, "'.'");
    SpecWrite w;
    w.line = root_tok.line;
    std::string attr = expect(Tok::Ident, "field name").text;
    if (peek().kind == Tok::LBracket) {
      next();
      w.indices.push_back(parse_expr());
      expect(Tok::RBracket, "']'");
      expect(Tok::Dot, "'.'");
      std::string field = expect(Tok::Ident, "field name").text;
      w.path = FieldPath{attr, field};
      if (peek().kind == Tok::LBracket) {
        next();
        w.indices.push_back(parse_expr());
        expect(Tok::RBracket, "']'");
      } else if (peek().kind == Tok::LParen) {
        const Token& p = peek();
        fail(p.line, p.col,
             "map fields are read with parentheses but written with "
             "brackets: use " + attr + "[...]." + field + "[index] = value");
      }
    } else {
      w.path = FieldPath{attr, ""};
    }
    const Token& op = next();
    if (op.kind != Tok::Assign && op.kind != Tok::PlusAssign &&
        op.kind != Tok::MinusAssign)
      fail(op.line, op.col, "expected '=', '+=' or '-=' in a state update");
    ExprPtr rhs = parse_expr();
    if (op.kind != Tok::Assign) {
      // Compound assignment desugars to a read-modify-write against the
      // evolving state.
      auto self = Expr::read(w.path, Snapshot::New, w.indices);
      rhs = Expr::make(op.kind == Tok::PlusAssign ? ExprOp::Add : ExprOp::Sub,
                       {self, rhs});
    }
    w.rhs = std::move(rhs);
    expect(Tok::Newline, "end of line");
    ast_->writes.push_back(std::move(w));
  }

  void parse_return() {
    const Token& kw = next();  // 'return'
    ast_->ret.line = kw.line;
    ast_->ret.value_name = expect(Tok::Ident, "the pre-condition name").text;
    expect(Tok::Comma, "','");
    const Token& t = peek();
    if (t.kind != Tok::Ident)
      fail(t.line, t.col, "expected a state expression in return");
    if (t.text == "util") {
      next();
      expect(Tok::Dot, "'.'");
      expect_ident("If");
      expect(Tok::LParen, "'('");
      ast_->ret.if_cond = expect(Tok::Ident, "condition name").text;
      expect(Tok::Comma, "','");
      ast_->ret.if_then = expect(Tok::Ident, "state name").text;
      expect(Tok::Comma, "','");
      ast_->ret.if_else = expect(Tok::Ident, "state name").text;
      expect(Tok::RParen, "')'");
      ast_->ret.has_util_if = true;
    } else {
      ast_->ret.bare_state = next().text;
    }
    expect(Tok::Newline, "end of line");
  }

  // --- expressions ----------------------------------------------------

  ExprPtr parse_expr() { return parse_comparison(); }

  ExprPtr parse_comparison() {
    ExprPtr lhs = parse_bitor();
    const Token& t = peek();
    ExprOp op;
    switch (t.kind) {
      case Tok::EqEq: op = ExprOp::Eq; break;
      case Tok::NotEq: op = ExprOp::Ne; break;
      case Tok::Lt: op = ExprOp::Slt; break;
      case Tok::Gt: op = ExprOp::Sgt; break;
      default: return lhs;
    }
    next();
    ExprPtr rhs = parse_bitor();
    const Token& again = peek();
    if (again.kind == Tok::EqEq || again.kind == Tok::NotEq ||
        again.kind == Tok::Lt || again.kind == Tok::Gt)
      fail(again.line, again.col, "chained comparisons are not supported");
    auto e = Expr::make(op, {lhs, rhs});
    const_cast<Expr&>(*e).line = t.line;
    const_cast<Expr&>(*e).col = t.col;
    return e;
  }

  ExprPtr parse_bitor() {
    ExprPtr lhs = parse_bitand();
    while (peek().kind == Tok::Pipe) {
      const Token& t = next();
      ExprPtr rhs = parse_bitand();
      auto e = Expr::make(ExprOp::BitOr, {lhs, rhs});
      const_cast<Expr&>(*e).line = t.line;
      const_cast<Expr&>(*e).col = t.col;
      lhs = e;
    }
    return lhs;
  }

  ExprPtr parse_bitand() {
    ExprPtr lhs = parse_shift();
    while (peek().kind == Tok::Amp) {
      const Token& t = next();
      ExprPtr rhs = parse_shift();
      auto e = Expr::make(ExprOp::BitAnd, {lhs, rhs});
      const_cast<Expr&>(*e).line = t.line;
      const_cast<Expr&>(*e).col = t.col;
      lhs = e;
    }
    return lhs;
  }

  ExprPtr parse_shift() {
    ExprPtr lhs = parse_additive();
    while (peek().kind == Tok::Shl) {
      next();
      lhs = Expr::make(ExprOp::Shl, {lhs, parse_additive()});
    }
    return lhs;
  }

  ExprPtr parse_additive() {
    ExprPtr lhs = parse_term();
    while (peek().kind == Tok::Plus || peek().kind == Tok::Minus) {
      ExprOp op = next().kind == Tok::Plus ? ExprOp::Add : ExprOp::Sub;
      lhs = Expr::make(op, {lhs, parse_term()});
    }
    return lhs;
  }

  ExprPtr parse_term() {
    ExprPtr lhs = parse_atom();
    while (peek().kind == Tok::Star) {
      next();
      lhs = Expr::make(ExprOp::Mul, {lhs, parse_atom()});
    }
    return lhs;
  }

  std::vector<ExprPtr> parse_call_args() {
    std::vector<ExprPtr> args;
    expect(Tok::LParen, "'('");
    if (peek().kind != Tok::RParen) {
      args.push_back(parse_expr());
      while (accept(Tok::Comma)) {
        if (peek().kind == Tok::RParen) break;  // tolerate trailing comma
        args.push_back(parse_expr());
      }
    }
    expect(Tok::RParen, "')'");
    return args;
  }

  ExprPtr parse_atom() {
    const Token& t = peek();
    if (t.kind == Tok::Minus) {
      next();
      const Token& n = expect(Tok::Number, "a number after unary '-'");
      return Expr::literal(~n.number + 1, 0);
    }
    if (t.kind == Tok::Number) {
      next();
      return Expr::literal(t.number, 0);
    }
    if (t.kind == Tok::LParen) {
      next();
      ExprPtr inner = parse_expr();
      expect(Tok::RParen, "')'");
      return inner;
    }
    if (t.kind != Tok::Ident)
      fail(t.line, t.col, "expected an expression, found '" + t.text + "'");
    next();
    const std::string& name = t.text;
    if (name == "True") return Expr::boolean(true);
    if (name == "False") return Expr::boolean(false);
    if (name == "z3") return parse_z3_call(t);
    if (name == "util") {
      fail(t.line, t.col, "util.If is only valid in the return statement");
    }
    if (name == "dt") return parse_const_ref(t);
    if (name == ast_->state_param) return parse_state_read(t, Snapshot::Old);
    if (ast_->has_copy && name == ast_->copy_var)
      return parse_state_read(t, Snapshot::New);
    if (is_param(name)) {
      auto e = Expr::param(name);
      const_cast<Expr&>(*e).line = t.line;
      const_cast<Expr&>(*e).col = t.col;
      return e;
    }
    // Unknown identifier: keep it (with any call arguments) so lint and
    // typecheck can report it precisely.
    auto e = std::make_shared<Expr>();
    e->op = ExprOp::FreeName;
    e->name = name;
    e->line = t.line;
    e->col = t.col;
    if (peek().kind == Tok::LParen) e->args = parse_call_args();
    return e;
  }

  ExprPtr parse_z3_call(const Token& z3_tok) {
    expect(Tok::Dot, "'.'");
    const Token& fn = expect(Tok::Ident, "function name");
    if (fn.text == "BitVecVal") {
      auto args = parse_call_args();
      if (args.size() != 2)
        fail(fn.line, fn.col, "BitVecVal takes (value, width)");
      if (args[1]->op != ExprOp::WordLit)
        fail(fn.line, fn.col, "BitVecVal width must be an integer literal");
      auto e = Expr::make(ExprOp::BitVecVal, {args[0]});
      const_cast<Expr&>(*e).width = static_cast<int>(args[1]->value);
      const_cast<Expr&>(*e).line = fn.line;
      const_cast<Expr&>(*e).col = fn.col;
      return e;
    }
    ExprOp op;
    if (fn.text == "And") op = ExprOp::And;
    else if (fn.text == "Or") op = ExprOp::Or;
    else if (fn.text == "Not") op = ExprOp::Not;
    else if (fn.text == "Implies") op = ExprOp::Implies;
    else if (fn.text == "ULT") op = ExprOp::Ult;
    else if (fn.text == "ULE") op = ExprOp::Ule;
    else if (fn.text == "UGT") op = ExprOp::Ugt;
    else if (fn.text == "UGE") op = ExprOp::Uge;
    else if (fn.text == "UDiv") op = ExprOp::UDiv;
    else {
      auto e = std::make_shared<Expr>();
      e->op = ExprOp::FreeName;
      e->name = "z3." + fn.text;
      e->line = z3_tok.line;
      e->col = z3_tok.col;
      if (peek().kind == Tok::LParen) e->args = parse_call_args();
      return e;
    }
    auto args = parse_call_args();
    if (args.empty())
      fail(fn.line, fn.col, "z3." + fn.text + " needs arguments");
    auto e = Expr::make(op, std::move(args));
    const_cast<Expr&>(*e).line = fn.line;
    const_cast<Expr&>(*e).col = fn.col;
    return e;
  }

  ExprPtr parse_const_ref(const Token& dt_tok) {
    expect(Tok::Dot, "'.'");
    std::string name = expect(Tok::Ident, "constant name").text;
    if (peek().kind == Tok::Dot) {
      next();
      name += "." + expect(Tok::Ident, "constant name").text;
    }
    auto e = Expr::constant(name);
    const_cast<Expr&>(*e).line = dt_tok.line;
    const_cast<Expr&>(*e).col = dt_tok.col;
    return e;
  }

  ExprPtr parse_state_read(const Token& base_tok, Snapshot snap) {
    expect(Tok::Dot, "'.'");
    const Token& attr = expect(Tok::Ident, "field name");
    FieldPath path{attr.text, ""};
    std::vector<ExprPtr> indices;
    bool bracket_read = false;
    if (peek().kind == Tok::LBracket) {
      next();
      indices.push_back(parse_expr());
      expect(Tok::RBracket, "']'");
      expect(Tok::Dot, "'.'");
      path.field = expect(Tok::Ident, "field name").text;
      if (peek().kind == Tok::LParen) {
        next();
        indices.push_back(parse_expr());
        expect(Tok::RParen, "')'");
      } else if (peek().kind == Tok::LBracket) {
        next();
        indices.push_back(parse_expr());
        expect(Tok::RBracket, "']'");
        bracket_read = true;
      }
    }
    auto e = Expr::read(path, snap, std::move(indices));
    auto& m = const_cast<Expr&>(*e);
    m.bracket_read = bracket_read;
    m.line = base_tok.line;
    m.col = base_tok.col;
    return e;
  }

  Lexer lexer_;
  std::size_t pos_ = 0;
  SpecAst* ast_ = nullptr;
};

}  // namespace

ParseResult parse_spec(std::string_view text) {
  try {
    Parser p(text);
    return ParseResult{p.parse(), std::nullopt};
  } catch (const ParseFault& f) {
    return ParseResult{std::nullopt, f.fault};
  }
}

bool ast_equal(const SpecAst& a, const SpecAst& b) {
  if (a.name != b.name || a.state_param != b.state_param ||
      a.params != b.params || a.guard_var != b.guard_var ||
      a.has_copy != b.has_copy || a.copy_var != b.copy_var ||
      a.writes.size() != b.writes.size())
    return false;
  if (!expr_equal(*a.guard, *b.guard)) return false;
  for (std::size_t i = 0; i < a.writes.size(); ++i) {
    const auto& wa = a.writes[i];
    const auto& wb = b.writes[i];
    if (!(wa.path == wb.path) || wa.indices.size() != wb.indices.size())
      return false;
    for (std::size_t j = 0; j < wa.indices.size(); ++j)
      if (!expr_equal(*wa.indices[j], *wb.indices[j])) return false;
    if (!expr_equal(*wa.rhs, *wb.rhs)) return false;
  }
  const auto& ra = a.ret;
  const auto& rb = b.ret;
  return ra.value_name == rb.value_name && ra.has_util_if == rb.has_util_if &&
         ra.if_cond == rb.if_cond && ra.if_then == rb.if_then &&
         ra.if_else == rb.if_else && ra.bare_state == rb.bare_state;
}

std::string spec_to_source(const SpecAst& ast) {
  std::ostringstream out;
  out << "def " << ast.name << "(" << ast.state_param;
  for (const auto& p : ast.params) out << ", " << p;
  out << "):\n";
  out << "    " << ast.guard_var << " = " << expr_to_source(*ast.guard)
      << "\n";
  if (ast.has_copy)
    out << "    " << ast.copy_var << " = " << ast.state_param << ".copy()\n";
  for (const auto& w : ast.writes) {
    out << "    " << ast.copy_var << "." << w.path.root;
    if (!w.path.field.empty()) {
      out << "[" << expr_to_source(*w.indices.at(0)) << "]." << w.path.field;
      if (w.indices.size() == 2)
        out << "[" << expr_to_source(*w.indices.at(1)) << "]";
    }
    out << " = " << expr_to_source(*w.rhs) << "\n";
  }
  out << "    return " << ast.ret.value_name << ", ";
  if (ast.ret.has_util_if)
    out << "util.If(" << ast.ret.if_cond << ", " << ast.ret.if_then << ", "
        << ast.ret.if_else << ")";
  else
    out << ast.ret.bare_state;
  out << "\n";
  return out.str();
}

}  // namespace specforge
