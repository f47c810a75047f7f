// Copyright (c) SpecForge contributors.
// SPDX-License-Identifier: Apache-2.0
#include <cctype>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "specforge/cfront.hpp"

namespace specforge {

namespace {

struct CParseFault {
  CFault fault;
};

[[noreturn]] void fail(int line, std::string msg,
                       CFaultKind kind = CFaultKind::UnsupportedConstruct) {
  throw CParseFault{CFault{kind, std::move(msg), line}};
}

const std::map<std::string, bool>& type_table() {
  // name -> is_signed
  static const std::map<std::string, bool> table = {
      {"int", true},      {"long", true},   {"pid_t", true},
      {"off_t", true},    {"pn_t", false},  {"fd_t", false},
      {"size_t", false},  {"uint64_t", false}, {"unsigned", false},
  };
  return table;
}

struct CTok {
  enum Kind {
    End, Ident, Number,
    LParen, RParen, LBracket, RBracket, LBrace, RBrace,
    Semi, Comma, Arrow, Star, Assign, PlusAssign, MinusAssign,
    Not, AndAnd, OrOr, Eq, Ne, Lt, Gt, Le, Ge, Shl,
    Plus, Minus, Div, Amp, Pipe,
  } kind = End;
  std::string text;
  Word number = 0;
  int line = 0;
};

class CLexer {
 public:
  explicit CLexer(std::string_view text) {
    int line = 1;
    std::size_t i = 0;
    auto push = [&](CTok::Kind k, std::string t, Word n = 0) {
      toks_.push_back(CTok{k, std::move(t), n, line});
    };
    while (i < text.size()) {
      char c = text[i];
      if (c == '\n') { ++line; ++i; continue; }
      if (std::isspace(static_cast<unsigned char>(c))) { ++i; continue; }
      if (c == '/' && i + 1 < text.size() && text[i + 1] == '/') {
        while (i < text.size() && text[i] != '\n') ++i;
        continue;
      }
      if (c == '/' && i + 1 < text.size() && text[i + 1] == '*') {
        i += 2;
        while (i + 1 < text.size() && !(text[i] == '*' && text[i + 1] == '/')) {
          if (text[i] == '\n') ++line;
          ++i;
        }
        i += 2;
        continue;
      }
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::size_t j = i;
        while (j < text.size() &&
               (std::isalnum(static_cast<unsigned char>(text[j])) ||
                text[j] == '_'))
          ++j;
        push(CTok::Ident, std::string(text.substr(i, j - i)));
        i = j;
        continue;
      }
      if (std::isdigit(static_cast<unsigned char>(c))) {
        std::size_t j = i;
        int base = 10;
        if (c == '0' && j + 1 < text.size() &&
            (text[j + 1] == 'x' || text[j + 1] == 'X')) {
          base = 16;
          j += 2;
        }
        while (j < text.size() &&
               std::isalnum(static_cast<unsigned char>(text[j])))
          ++j;
        std::string lit(text.substr(i, j - i));
        Word v = 0;
        try {
          v = std::stoull(lit, nullptr, base);
        } catch (const std::exception&) {
          fail(line, "malformed number literal '" + lit + "'");
        }
        push(CTok::Number, lit, v);
        i = j;
        continue;
      }
      auto two = [&](char a, char b) {
        return c == a && i + 1 < text.size() && text[i + 1] == b;
      };
      if (two('-', '>')) { push(CTok::Arrow, "->"); i += 2; continue; }
      if (two('&', '&')) { push(CTok::AndAnd, "&&"); i += 2; continue; }
      if (two('|', '|')) { push(CTok::OrOr, "||"); i += 2; continue; }
      if (two('=', '=')) { push(CTok::Eq, "=="); i += 2; continue; }
      if (two('!', '=')) { push(CTok::Ne, "!="); i += 2; continue; }
      if (two('<', '=')) { push(CTok::Le, "<="); i += 2; continue; }
      if (two('>', '=')) { push(CTok::Ge, ">="); i += 2; continue; }
      if (two('<', '<')) { push(CTok::Shl, "<<"); i += 2; continue; }
      if (two('+', '=')) { push(CTok::PlusAssign, "+="); i += 2; continue; }
      if (two('-', '=')) { push(CTok::MinusAssign, "-="); i += 2; continue; }
      switch (c) {
        case '(': push(CTok::LParen, "("); break;
        case ')': push(CTok::RParen, ")"); break;
        case '[': push(CTok::LBracket, "["); break;
        case ']': push(CTok::RBracket, "]"); break;
        case '{': push(CTok::LBrace, "{"); break;
        case '}': push(CTok::RBrace, "}"); break;
        case ';': push(CTok::Semi, ";"); break;
        case ',': push(CTok::Comma, ","); break;
        case '*': push(CTok::Star, "*"); break;
        case '=': push(CTok::Assign, "="); break;
        case '!': push(CTok::Not, "!"); break;
        case '<': push(CTok::Lt, "<"); break;
        case '>': push(CTok::Gt, ">"); break;
        case '+': push(CTok::Plus, "+"); break;
        case '-': push(CTok::Minus, "-"); break;
        case '/': push(CTok::Div, "/"); break;
        case '&': push(CTok::Amp, "&"); break;
        case '|': push(CTok::Pipe, "|"); break;
        default:
          fail(line, std::string("unexpected character '") + c + "'");
      }
      ++i;
    }
    toks_.push_back(CTok{CTok::End, "", 0, line});
  }
  const std::vector<CTok>& tokens() const { return toks_; }

 private:
  std::vector<CTok> toks_;
};

CExprPtr cexpr(CExprOp op, std::vector<CExprPtr> args, int line) {
  auto e = std::make_shared<CExpr>();
  e->op = op;
  e->args = std::move(args);
  e->line = line;
  return e;
}

class CParser {
 public:
  explicit CParser(std::string_view text) : lexer_(text) {}

  ImplAst parse_function() {
    ImplAst ast;
    expect_ident("int");
    ast.name = expect(CTok::Ident, "function name").text;
    expect(CTok::LParen, "'('");
    if (peek().kind != CTok::RParen) {
      ast.params.push_back(parse_param());
      while (accept(CTok::Comma)) ast.params.push_back(parse_param());
    }
    expect(CTok::RParen, "')'");
    expect(CTok::LBrace, "'{'");
    ast_ = &ast;
    bool saw_return_zero = false;
    while (!accept(CTok::RBrace)) {
      const CTok& t = peek();
      if (t.kind == CTok::End) fail(t.line, "missing '}'");
      if (saw_return_zero)
        fail(t.line, "statements after 'return 0;'");
      if (t.kind == CTok::Ident && t.text == "return") {
        next();
        const CTok& z = expect(CTok::Number, "'0'");
        if (z.number != 0)
          fail(z.line, "the final return must be 'return 0;'");
        expect(CTok::Semi, "';'");
        saw_return_zero = true;
        continue;
      }
      parse_statement();
    }
    if (!saw_return_zero)
      fail(peek().line, "function must end with 'return 0;'");
    if (peek().kind != CTok::End)
      fail(peek().line, "unexpected text after '}'");
    return ast;
  }

  // Entry point for a single statement (used by bug-site replacements).
  CStmt parse_one_statement(ImplAst& context) {
    ast_ = &context;
    std::size_t before = context.stmts.size();
    parse_statement();
    if (context.stmts.size() != before + 1)
      fail(peek().line, "expected exactly one statement");
    CStmt s = std::move(context.stmts.back());
    context.stmts.pop_back();
    return s;
  }

 private:
  const CTok& peek(int ahead = 0) const {
    std::size_t i = pos_ + static_cast<std::size_t>(ahead);
    const auto& toks = lexer_.tokens();
    return i < toks.size() ? toks[i] : toks.back();
  }
  const CTok& next() {
    const CTok& t = peek();
    if (t.kind != CTok::End) ++pos_;
    return t;
  }
  bool accept(CTok::Kind k) {
    if (peek().kind == k) { ++pos_; return true; }
    return false;
  }
  const CTok& expect(CTok::Kind k, const char* what) {
    const CTok& t = peek();
    if (t.kind != k)
      fail(t.line, std::string("expected ") + what + ", found '" + t.text + "'");
    return next();
  }
  void expect_ident(const char* word) {
    const CTok& t = peek();
    if (t.kind != CTok::Ident || t.text != word)
      fail(t.line,
           std::string("expected '") + word + "', found '" + t.text + "'");
    next();
  }

  CParam parse_param() {
    const CTok& ty = expect(CTok::Ident, "parameter type");
    auto it = type_table().find(ty.text);
    if (it == type_table().end())
      fail(ty.line, "unsupported parameter type '" + ty.text + "'");
    CParam p;
    p.type_name = ty.text;
    p.is_signed = it->second;
    p.name = expect(CTok::Ident, "parameter name").text;
    return p;
  }

  void parse_statement() {
    const CTok& t = peek();
    if (t.kind != CTok::Ident) fail(t.line, "expected a statement");
    if (t.text == "struct") {
      next();
      CLocalDecl d;
      d.struct_name = expect(CTok::Ident, "struct name").text;
      if (d.struct_name != "proc" && d.struct_name != "page")
        fail(t.line, "unknown struct '" + d.struct_name + "'");
      expect(CTok::Star, "'*'");
      d.var = expect(CTok::Ident, "variable name").text;
      expect(CTok::Semi, "';'");
      ast_->locals.push_back(std::move(d));
      return;
    }
    if (t.text == "if") return parse_check();
    if (t.text == "while" || t.text == "for" || t.text == "do" ||
        t.text == "switch" || t.text == "goto")
      fail(t.line, "'" + t.text + "' is outside the supported C subset");

    // var = helper(arg); | var->field[...] op= expr; | helper(args);
    if (peek(1).kind == CTok::Assign && is_local(t.text)) {
      next();
      next();
      const CTok& h = expect(CTok::Ident, "helper name");
      expect(CTok::LParen, "'('");
      CStmtBind b;
      b.var = t.text;
      b.helper = h.text;
      b.arg = parse_expr();
      b.line = t.line;
      expect(CTok::RParen, "')'");
      expect(CTok::Semi, "';'");
      ast_->stmts.push_back(std::move(b));
      return;
    }
    if (peek(1).kind == CTok::Arrow) {
      next();
      next();
      CStmtAssign a;
      a.var = t.text;
      a.field = expect(CTok::Ident, "field name").text;
      a.line = t.line;
      if (accept(CTok::LBracket)) {
        a.index = parse_expr();
        expect(CTok::RBracket, "']'");
      }
      const CTok& op = next();
      if (op.kind == CTok::PlusAssign) a.compound = '+';
      else if (op.kind == CTok::MinusAssign) a.compound = '-';
      else if (op.kind != CTok::Assign)
        fail(op.line, "expected '=', '+=' or '-=' after the lvalue");
      a.rhs = parse_expr();
      expect(CTok::Semi, "';'");
      ast_->stmts.push_back(std::move(a));
      return;
    }
    if (peek(1).kind == CTok::LParen) {
      next();
      next();
      CStmtCall call;
      call.name = t.text;
      call.line = t.line;
      if (peek().kind != CTok::RParen) {
        call.args.push_back(parse_expr());
        while (accept(CTok::Comma)) call.args.push_back(parse_expr());
      }
      expect(CTok::RParen, "')'");
      expect(CTok::Semi, "';'");
      ast_->stmts.push_back(std::move(call));
      return;
    }
    fail(t.line, "unsupported statement starting at '" + t.text + "'");
  }

  void parse_check() {
    const CTok& kw = next();  // 'if'
    expect(CTok::LParen, "'('");
    CStmtCheck c;
    c.cond = parse_expr();
    c.line = kw.line;
    expect(CTok::RParen, "')'");
    bool braced = accept(CTok::LBrace);
    expect_ident("return");
    expect(CTok::Minus, "'-'");
    c.errname = expect(CTok::Ident, "error constant").text;
    expect(CTok::Semi, "';'");
    if (braced) expect(CTok::RBrace, "'}'");
    ast_->stmts.push_back(std::move(c));
  }

  bool is_local(const std::string& name) const {
    for (const auto& d : ast_->locals)
      if (d.var == name) return true;
    return false;
  }

  // C precedence (subset): || < && < | < & < == != < < > <= >= < << < + - <
  // * / < unary.
  CExprPtr parse_expr() { return parse_lor(); }

  CExprPtr parse_lor() {
    CExprPtr lhs = parse_land();
    while (peek().kind == CTok::OrOr) {
      int line = next().line;
      lhs = cexpr(CExprOp::LOr, {lhs, parse_land()}, line);
    }
    return lhs;
  }
  CExprPtr parse_land() {
    CExprPtr lhs = parse_bitor();
    while (peek().kind == CTok::AndAnd) {
      int line = next().line;
      lhs = cexpr(CExprOp::LAnd, {lhs, parse_bitor()}, line);
    }
    return lhs;
  }
  CExprPtr parse_bitor() {
    CExprPtr lhs = parse_bitand();
    while (peek().kind == CTok::Pipe) {
      int line = next().line;
      lhs = cexpr(CExprOp::BitOr, {lhs, parse_bitand()}, line);
    }
    return lhs;
  }
  CExprPtr parse_bitand() {
    CExprPtr lhs = parse_equality();
    while (peek().kind == CTok::Amp) {
      int line = next().line;
      lhs = cexpr(CExprOp::BitAnd, {lhs, parse_equality()}, line);
    }
    return lhs;
  }
  CExprPtr parse_equality() {
    CExprPtr lhs = parse_relational();
    while (peek().kind == CTok::Eq || peek().kind == CTok::Ne) {
      CExprOp op = peek().kind == CTok::Eq ? CExprOp::Eq : CExprOp::Ne;
      int line = next().line;
      lhs = cexpr(op, {lhs, parse_relational()}, line);
    }
    return lhs;
  }
  CExprPtr parse_relational() {
    CExprPtr lhs = parse_shift();
    for (;;) {
      CExprOp op;
      switch (peek().kind) {
        case CTok::Lt: op = CExprOp::Lt; break;
        case CTok::Gt: op = CExprOp::Gt; break;
        case CTok::Le: op = CExprOp::Le; break;
        case CTok::Ge: op = CExprOp::Ge; break;
        default: return lhs;
      }
      int line = next().line;
      lhs = cexpr(op, {lhs, parse_shift()}, line);
    }
  }
  CExprPtr parse_shift() {
    CExprPtr lhs = parse_additive();
    while (peek().kind == CTok::Shl) {
      int line = next().line;
      lhs = cexpr(CExprOp::Shl, {lhs, parse_additive()}, line);
    }
    return lhs;
  }
  CExprPtr parse_additive() {
    CExprPtr lhs = parse_term();
    while (peek().kind == CTok::Plus || peek().kind == CTok::Minus) {
      CExprOp op = peek().kind == CTok::Plus ? CExprOp::Add : CExprOp::Sub;
      int line = next().line;
      lhs = cexpr(op, {lhs, parse_term()}, line);
    }
    return lhs;
  }
  CExprPtr parse_term() {
    CExprPtr lhs = parse_unary();
    while (peek().kind == CTok::Star || peek().kind == CTok::Div) {
      CExprOp op = peek().kind == CTok::Star ? CExprOp::Mul : CExprOp::Div;
      int line = next().line;
      lhs = cexpr(op, {lhs, parse_unary()}, line);
    }
    return lhs;
  }
  CExprPtr parse_unary() {
    const CTok& t = peek();
    if (t.kind == CTok::Not) {
      next();
      return cexpr(CExprOp::LNot, {parse_unary()}, t.line);
    }
    if (t.kind == CTok::Minus) {
      next();
      const CTok& n = expect(CTok::Number, "a number after unary '-'");
      auto e = std::make_shared<CExpr>();
      e->op = CExprOp::Num;
      e->number = ~n.number + 1;
      e->line = n.line;
      return e;
    }
    return parse_postfix();
  }
  CExprPtr parse_postfix() {
    const CTok& t = peek();
    if (t.kind == CTok::Number) {
      next();
      auto e = std::make_shared<CExpr>();
      e->op = CExprOp::Num;
      e->number = t.number;
      e->line = t.line;
      return e;
    }
    if (t.kind == CTok::LParen) {
      next();
      CExprPtr inner = parse_expr();
      expect(CTok::RParen, "')'");
      return inner;
    }
    if (t.kind != CTok::Ident)
      fail(t.line, "expected an expression, found '" + t.text + "'");
    next();
    if (peek().kind == CTok::Arrow) {
      next();
      std::string field = expect(CTok::Ident, "field name").text;
      if (accept(CTok::LBracket)) {
        CExprPtr idx = parse_expr();
        expect(CTok::RBracket, "']'");
        auto e = cexpr(CExprOp::ArrowIndex, {idx}, t.line);
        const_cast<CExpr&>(*e).name = t.text;
        const_cast<CExpr&>(*e).field = field;
        return e;
      }
      auto e = cexpr(CExprOp::Arrow, {}, t.line);
      const_cast<CExpr&>(*e).name = t.text;
      const_cast<CExpr&>(*e).field = field;
      return e;
    }
    if (peek().kind == CTok::LParen) {
      next();
      auto e = cexpr(CExprOp::Call, {}, t.line);
      auto& m = const_cast<CExpr&>(*e);
      m.name = t.text;
      if (peek().kind != CTok::RParen) {
        m.args.push_back(parse_expr());
        while (accept(CTok::Comma)) m.args.push_back(parse_expr());
      }
      expect(CTok::RParen, "')'");
      return e;
    }
    auto e = cexpr(CExprOp::Ident, {}, t.line);
    const_cast<CExpr&>(*e).name = t.text;
    return e;
  }

  CLexer lexer_;
  std::size_t pos_ = 0;
  ImplAst* ast_ = nullptr;
};

}  // namespace

ImplParseResult parse_impl(std::string_view text) {
  try {
    CParser p(text);
    return ImplParseResult{p.parse_function(), std::nullopt};
  } catch (const CParseFault& f) {
    return ImplParseResult{std::nullopt, f.fault};
  }
}

// ---- printing ----------------------------------------------------------

namespace {

int cprec(CExprOp op) {
  switch (op) {
    case CExprOp::LOr: return 1;
    case CExprOp::LAnd: return 2;
    case CExprOp::BitOr: return 3;
    case CExprOp::BitAnd: return 4;
    case CExprOp::Eq: case CExprOp::Ne: return 5;
    case CExprOp::Lt: case CExprOp::Gt: case CExprOp::Le: case CExprOp::Ge:
      return 6;
    case CExprOp::Shl: return 7;
    case CExprOp::Add: case CExprOp::Sub: return 8;
    case CExprOp::Mul: case CExprOp::Div: return 9;
    default: return 10;
  }
}

const char* cop(CExprOp op) {
  switch (op) {
    case CExprOp::LOr: return "||";
    case CExprOp::LAnd: return "&&";
    case CExprOp::BitOr: return "|";
    case CExprOp::BitAnd: return "&";
    case CExprOp::Eq: return "==";
    case CExprOp::Ne: return "!=";
    case CExprOp::Lt: return "<";
    case CExprOp::Gt: return ">";
    case CExprOp::Le: return "<=";
    case CExprOp::Ge: return ">=";
    case CExprOp::Shl: return "<<";
    case CExprOp::Add: return "+";
    case CExprOp::Sub: return "-";
    case CExprOp::Mul: return "*";
    case CExprOp::Div: return "/";
    default: return nullptr;
  }
}

std::string cexpr_src(const CExpr& e, int parent_prec) {
  switch (e.op) {
    case CExprOp::Num: return std::to_string(e.number);
    case CExprOp::Ident: return e.name;
    case CExprOp::Call: {
      std::string out = e.name + "(";
      for (std::size_t i = 0; i < e.args.size(); ++i) {
        if (i) out += ", ";
        out += cexpr_src(*e.args[i], 0);
      }
      return out + ")";
    }
    case CExprOp::Arrow: return e.name + "->" + e.field;
    case CExprOp::ArrowIndex:
      return e.name + "->" + e.field + "[" + cexpr_src(*e.args.at(0), 0) + "]";
    case CExprOp::FieldRead: {
      std::string out = e.name;  // root
      if (!e.field.empty()) {
        out += "[" + cexpr_src(*e.args.at(0), 0) + "]." + e.field;
        if (e.args.size() == 2) out += "[" + cexpr_src(*e.args.at(1), 0) + "]";
      }
      return out;
    }
    case CExprOp::LNot: {
      std::string inner = cexpr_src(*e.args.at(0), 10);
      return "!" + inner;
    }
    default: {
      int prec = cprec(e.op);
      std::string out = cexpr_src(*e.args.at(0), prec) + " " + cop(e.op) +
                        " " + cexpr_src(*e.args.at(1), prec + 1);
      if (prec < parent_prec) return "(" + out + ")";
      return out;
    }
  }
}

}  // namespace

std::string impl_to_source(const ImplAst& ast) {
  std::ostringstream out;
  out << "int " << ast.name << "(";
  for (std::size_t i = 0; i < ast.params.size(); ++i) {
    if (i) out << ", ";
    out << ast.params[i].type_name << " " << ast.params[i].name;
  }
  out << ") {\n";
  for (const auto& d : ast.locals)
    out << "    struct " << d.struct_name << " *" << d.var << ";\n";
  if (!ast.locals.empty()) out << "\n";
  for (const auto& s : ast.stmts) {
    if (const auto* c = std::get_if<CStmtCheck>(&s)) {
      out << "    if (" << cexpr_src(*c->cond, 0) << ")\n";
      out << "        return -" << c->errname << ";\n";
    } else if (const auto* b = std::get_if<CStmtBind>(&s)) {
      out << "    " << b->var << " = " << b->helper << "("
          << cexpr_src(*b->arg, 0) << ");\n";
    } else if (const auto* a = std::get_if<CStmtAssign>(&s)) {
      out << "    " << a->var << "->" << a->field;
      if (a->index) out << "[" << cexpr_src(*a->index, 0) << "]";
      if (a->compound) out << " " << a->compound << "= ";
      else out << " = ";
      out << cexpr_src(*a->rhs, 0) << ";\n";
    } else if (const auto* call = std::get_if<CStmtCall>(&s)) {
      out << "    " << call->name << "(";
      for (std::size_t i = 0; i < call->args.size(); ++i) {
        if (i) out << ", ";
        out << cexpr_src(*call->args[i], 0);
      }
      out << ");\n";
    }
  }
  out << "    return 0;\n";
  out << "}\n";
  return out.str();
}

// ---- helper library -----------------------------------------------------

HelperLib HelperLib::standard() {
  return from_text(
      "expand is_pid_valid(p) = p > 0 && p < NPROC\n"
      "expand is_pn_valid(n) = n < NPAGE\n"
      "expand is_fd_valid(f) = f < NOFILE\n"
      "bind get_proc(p) -> procs\n"
      "bind get_page(n) -> pages\n"
      "ghost proc_ready_add\n"
      "ghost tlb_flush\n");
}

HelperLib HelperLib::from_text(std::string_view text) {
  HelperLib lib;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    std::istringstream ls(line);
    std::string kind;
    if (!(ls >> kind)) continue;
    HelperDef def;
    if (kind == "ghost") {
      def.kind = HelperDef::Kind::Ghost;
      ls >> def.name;
    } else if (kind == "bind") {
      def.kind = HelperDef::Kind::Bind;
      std::string sig;
      ls >> sig;
      auto paren = sig.find('(');
      def.name = sig.substr(0, paren);
      def.params.push_back(sig.substr(paren + 1, sig.find(')') - paren - 1));
      std::string arrow;
      ls >> arrow >> def.bind_root;
    } else if (kind == "expand") {
      def.kind = HelperDef::Kind::Expand;
      std::string sig;
      ls >> sig;
      auto paren = sig.find('(');
      def.name = sig.substr(0, paren);
      def.params.push_back(sig.substr(paren + 1, sig.find(')') - paren - 1));
      std::string eq;
      ls >> eq;
      std::string body;
      std::getline(ls, body);
      // Parse the template through the C expression parser by wrapping it
      // in a throwaway check.
      std::string wrapper = "int t(uint64_t " + def.params[0] +
                            ") { if (" + body + ") return -EINVAL; return 0; }";
      auto parsed = parse_impl(wrapper);
      if (!parsed.ok())
        throw ConfigError("helper '" + def.name + "' line " +
                          std::to_string(lineno) + ": " +
                          parsed.fault->message);
      def.body = std::get<CStmtCheck>(parsed.ast->stmts.at(0)).cond;
    } else {
      throw ConfigError("helpers line " + std::to_string(lineno) +
                        ": unknown kind '" + kind + "'");
    }
    lib.defs_.push_back(std::move(def));
  }
  return lib;
}

HelperLib HelperLib::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open helper library: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_text(buf.str());
}

const HelperDef* HelperLib::find(std::string_view name) const {
  for (const auto& d : defs_)
    if (d.name == name) return &d;
  return nullptr;
}

// ---- helper inlining ----------------------------------------------------

namespace {

struct Binding {
  std::string root;
  CExprPtr index;
};

CExprPtr substitute(const CExprPtr& e,
                    const std::map<std::string, CExprPtr>& env) {
  if (e->op == CExprOp::Ident) {
    auto it = env.find(e->name);
    if (it != env.end()) return it->second;
    return e;
  }
  auto out = std::make_shared<CExpr>(*e);
  out->args.clear();
  for (const auto& a : e->args) out->args.push_back(substitute(a, env));
  return out;
}

CExprPtr inline_expr(const CExprPtr& e, const HelperLib& lib,
                     const std::map<std::string, Binding>& binds, int depth) {
  if (depth > 16)
    fail(e->line, "helper expansion too deep (recursive helper?)",
         CFaultKind::UnknownHelper);
  switch (e->op) {
    case CExprOp::Call: {
      const HelperDef* def = lib.find(e->name);
      if (!def)
        fail(e->line, "unknown helper '" + e->name + "'",
             CFaultKind::UnknownHelper);
      if (def->kind != HelperDef::Kind::Expand)
        fail(e->line, "helper '" + e->name + "' cannot be used in an "
                      "expression", CFaultKind::UnknownHelper);
      if (e->args.size() != def->params.size())
        fail(e->line, "helper '" + e->name + "' arity mismatch",
             CFaultKind::UnknownHelper);
      std::map<std::string, CExprPtr> env;
      for (std::size_t i = 0; i < def->params.size(); ++i)
        env[def->params[i]] =
            inline_expr(e->args[i], lib, binds, depth + 1);
      return inline_expr(substitute(def->body, env), lib, binds, depth + 1);
    }
    case CExprOp::Arrow:
    case CExprOp::ArrowIndex: {
      auto it = binds.find(e->name);
      if (it == binds.end())
        fail(e->line, "pointer '" + e->name + "' is not bound",
             CFaultKind::UnknownHelper);
      auto out = std::make_shared<CExpr>();
      out->op = CExprOp::FieldRead;
      out->name = it->second.root;
      out->field = e->field;
      out->line = e->line;
      out->args.push_back(it->second.index);
      if (e->op == CExprOp::ArrowIndex)
        out->args.push_back(
            inline_expr(e->args.at(0), lib, binds, depth + 1));
      return out;
    }
    default: {
      if (e->args.empty()) return e;
      auto out = std::make_shared<CExpr>(*e);
      out->args.clear();
      for (const auto& a : e->args)
        out->args.push_back(inline_expr(a, lib, binds, depth + 1));
      return out;
    }
  }
}

}  // namespace

InlineResult inline_helpers(const ImplAst& ast, const HelperLib& lib) {
  try {
    ImplAst out;
    out.name = ast.name;
    out.params = ast.params;
    out.dropped_ghosts = ast.dropped_ghosts;
    std::map<std::string, Binding> binds;
    for (const auto& s : ast.stmts) {
      if (const auto* b = std::get_if<CStmtBind>(&s)) {
        const HelperDef* def = lib.find(b->helper);
        if (!def)
          fail(b->line, "unknown helper '" + b->helper + "'",
               CFaultKind::UnknownHelper);
        if (def->kind != HelperDef::Kind::Bind)
          fail(b->line, "helper '" + b->helper + "' does not bind a pointer",
               CFaultKind::UnknownHelper);
        binds[b->var] =
            Binding{def->bind_root, inline_expr(b->arg, lib, binds, 0)};
        continue;
      }
      if (const auto* call = std::get_if<CStmtCall>(&s)) {
        const HelperDef* def = lib.find(call->name);
        if (!def)
          fail(call->line, "unknown helper '" + call->name + "'",
               CFaultKind::UnknownHelper);
        if (def->kind != HelperDef::Kind::Ghost)
          fail(call->line,
               "helper '" + call->name + "' is not usable as a statement",
               CFaultKind::UnknownHelper);
        out.dropped_ghosts.push_back(call->name);
        continue;
      }
      if (const auto* c = std::get_if<CStmtCheck>(&s)) {
        CStmtCheck nc = *c;
        nc.cond = inline_expr(c->cond, lib, binds, 0);
        out.stmts.push_back(std::move(nc));
        continue;
      }
      const auto& a = std::get<CStmtAssign>(s);
      CStmtAssign na = a;
      if (!a.root.empty()) {
        // already resolved (inlining is idempotent)
        if (a.root_index)
          na.root_index = inline_expr(a.root_index, lib, binds, 0);
      } else {
        auto it = binds.find(a.var);
        if (it == binds.end())
          fail(a.line, "pointer '" + a.var + "' is not bound",
               CFaultKind::UnknownHelper);
        na.root = it->second.root;
        na.root_index = it->second.index;
      }
      if (a.index) na.index = inline_expr(a.index, lib, binds, 0);
      na.rhs = inline_expr(a.rhs, lib, binds, 0);
      out.stmts.push_back(std::move(na));
    }
    return InlineResult{std::move(out), std::nullopt};
  } catch (const CParseFault& f) {
    return InlineResult{std::nullopt, f.fault};
  }
}

// ---- lowering -----------------------------------------------------------

namespace {

struct Lowered {
  ExprPtr expr;
  bool is_bool = false;
  bool is_signed = false;  // C signedness for comparison selection
};

class Lowerer {
 public:
  Lowerer(const ImplAst& ast, const StateSchema& schema,
          const ConstantTable& constants)
      : ast_(ast), schema_(schema), constants_(constants) {}

  IRFunction run() {
    IRFunction ir;
    ir.name = ast_.name;
    ir.params = ast_.params;
    ir.dropped_ghosts = ast_.dropped_ghosts;
    for (const auto& s : ast_.stmts) {
      if (const auto* c = std::get_if<CStmtCheck>(&s)) {
        IRItem item;
        item.kind = IRItem::Kind::Check;
        item.check.guard = lower_bool(c->cond, Snapshot::Old);
        auto code = constants_.find("errno." + c->errname);
        if (!code)
          fail(c->line, "unknown error constant '" + c->errname + "'",
               CFaultKind::DomainError);
        item.check.errcode = *code;
        item.check.errname = c->errname;
        ir.items.push_back(std::move(item));
        continue;
      }
      if (std::holds_alternative<CStmtBind>(s) ||
          std::holds_alternative<CStmtCall>(s))
        fail(0, "lower_to_ir requires an inlined AST",
             CFaultKind::UnknownHelper);
      const auto& a = std::get<CStmtAssign>(s);
      IRItem item;
      item.kind = IRItem::Kind::Update;
      FieldPath path{a.root, a.field};
      const FieldInfo* f = schema_.find(path);
      if (!f)
        fail(a.line, "no schema mapping for lvalue " + path.str(),
             CFaultKind::DomainError);
      unsigned want = a.index ? 2 : 1;
      if (f->arity != want)
        fail(a.line, path.str() + " takes " + std::to_string(f->arity) +
                         " index(es)", CFaultKind::DomainError);
      item.update.path = path;
      item.update.indices.push_back(
          lower_word(a.root_index, Snapshot::New));
      if (a.index)
        item.update.indices.push_back(lower_word(a.index, Snapshot::New));
      ExprPtr rhs = lower_word(a.rhs, Snapshot::New);
      if (a.compound) {
        auto self =
            Expr::read(path, Snapshot::New, item.update.indices);
        rhs = Expr::make(a.compound == '+' ? ExprOp::Add : ExprOp::Sub,
                         {self, rhs});
      }
      item.update.rhs = std::move(rhs);
      ir.items.push_back(std::move(item));
    }
    return ir;
  }

 private:
  bool param_signed(const std::string& name, bool& found) const {
    for (const auto& p : ast_.params)
      if (p.name == name) {
        found = true;
        return p.is_signed;
      }
    found = false;
    return false;
  }

  Lowered lower(const CExprPtr& e, Snapshot snap) {
    switch (e->op) {
      case CExprOp::Num:
        return {Expr::literal(e->number,
                              static_cast<int>(schema_.config().word_width)),
                false, true};  // integer literals are signed in C
      case CExprOp::Ident: {
        bool found = false;
        bool sign = param_signed(e->name, found);
        if (found) return {Expr::param(e->name), false, sign};
        if (e->name == "current")
          return {Expr::read(FieldPath{"current", ""}, snap, {}), false,
                  false};
        if (e->name == "pages_ptr_to_int")
          return {Expr::read(FieldPath{"pages_ptr_to_int", ""}, snap, {}),
                  false, false};
        if (auto v = constants_.find_bare(e->name)) {
          (void)v;
          // Bare constants keep their symbolic name via the dt table.
          std::string dotted = dotted_name(e->name);
          return {Expr::constant(dotted), false, true};
        }
        fail(e->line, "unknown identifier '" + e->name + "'",
             CFaultKind::DomainError);
      }
      case CExprOp::FieldRead: {
        FieldPath path{e->name, e->field};
        const FieldInfo* f = schema_.find(path);
        if (!f)
          fail(e->line, "no schema mapping for " + path.str(),
               CFaultKind::DomainError);
        if (f->arity != e->args.size())
          fail(e->line, path.str() + " takes " + std::to_string(f->arity) +
                           " index(es)", CFaultKind::DomainError);
        std::vector<ExprPtr> idx;
        for (const auto& a : e->args)
          idx.push_back(lower_word(a, snap));
        return {Expr::read(path, snap, std::move(idx)), false, false};
      }
      case CExprOp::Call:
        fail(e->line, "helper '" + e->name + "' must be inlined first",
             CFaultKind::UnknownHelper);
      case CExprOp::Arrow:
      case CExprOp::ArrowIndex:
        fail(e->line, "pointer '" + e->name + "' is not bound",
             CFaultKind::UnknownHelper);
      case CExprOp::LNot: {
        Lowered a = lower(e->args.at(0), snap);
        return {Expr::make(ExprOp::Not, {as_bool(a)}), true, false};
      }
      case CExprOp::LAnd: {
        Lowered a = lower(e->args.at(0), snap);
        Lowered b = lower(e->args.at(1), snap);
        return {Expr::make(ExprOp::And, {as_bool(a), as_bool(b)}), true,
                false};
      }
      case CExprOp::LOr: {
        Lowered a = lower(e->args.at(0), snap);
        Lowered b = lower(e->args.at(1), snap);
        return {Expr::make(ExprOp::Or, {as_bool(a), as_bool(b)}), true,
                false};
      }
      case CExprOp::Eq:
      case CExprOp::Ne: {
        Lowered a = lower(e->args.at(0), snap);
        Lowered b = lower(e->args.at(1), snap);
        ExprOp op = e->op == CExprOp::Eq ? ExprOp::Eq : ExprOp::Ne;
        return {Expr::make(op, {as_word(a, e->line), as_word(b, e->line)}),
                true, false};
      }
      case CExprOp::Lt:
      case CExprOp::Gt:
      case CExprOp::Le:
      case CExprOp::Ge: {
        Lowered a = lower(e->args.at(0), snap);
        Lowered b = lower(e->args.at(1), snap);
        // Usual arithmetic conversions at one width: the comparison is
        // signed only when both operands are signed.
        bool sign = a.is_signed && b.is_signed;
        ExprOp op;
        switch (e->op) {
          case CExprOp::Lt: op = sign ? ExprOp::Slt : ExprOp::Ult; break;
          case CExprOp::Gt: op = sign ? ExprOp::Sgt : ExprOp::Ugt; break;
          case CExprOp::Le: op = sign ? ExprOp::Sle : ExprOp::Ule; break;
          default: op = sign ? ExprOp::Sge : ExprOp::Uge; break;
        }
        return {Expr::make(op, {as_word(a, e->line), as_word(b, e->line)}),
                true, false};
      }
      case CExprOp::Div: {
        Lowered a = lower(e->args.at(0), snap);
        Lowered b = lower(e->args.at(1), snap);
        if (a.is_signed && b.is_signed)
          fail(e->line, "signed division is outside the supported subset");
        return {Expr::make(ExprOp::UDiv,
                           {as_word(a, e->line), as_word(b, e->line)}),
                false, false};
      }
      default: {
        Lowered a = lower(e->args.at(0), snap);
        Lowered b = lower(e->args.at(1), snap);
        ExprOp op;
        switch (e->op) {
          case CExprOp::Add: op = ExprOp::Add; break;
          case CExprOp::Sub: op = ExprOp::Sub; break;
          case CExprOp::Mul: op = ExprOp::Mul; break;
          case CExprOp::Shl: op = ExprOp::Shl; break;
          case CExprOp::BitOr: op = ExprOp::BitOr; break;
          case CExprOp::BitAnd: op = ExprOp::BitAnd; break;
          default:
            fail(e->line, "unsupported operator");
        }
        return {Expr::make(op, {as_word(a, e->line), as_word(b, e->line)}),
                false, a.is_signed && b.is_signed};
      }
    }
  }

  std::string dotted_name(const std::string& bare) const {
    for (const auto& [dotted, value] : constants_.entries()) {
      (void)value;
      auto dot = dotted.rfind('.');
      std::string leaf =
          dot == std::string::npos ? dotted : dotted.substr(dot + 1);
      if (leaf == bare) return dotted;
    }
    return bare;
  }

  ExprPtr as_bool(const Lowered& v) {
    if (v.is_bool) return v.expr;
    // C truthiness: nonzero is true.
    return Expr::make(ExprOp::Ne,
                      {v.expr, Expr::literal(0, static_cast<int>(
                                                    schema_.config().word_width))});
  }

  ExprPtr as_word(const Lowered& v, int line) {
    if (v.is_bool)
      fail(line, "a boolean cannot be used as an arithmetic operand");
    return v.expr;
  }

  ExprPtr lower_bool(const CExprPtr& e, Snapshot snap) {
    return as_bool(lower(e, snap));
  }
  ExprPtr lower_word(const CExprPtr& e, Snapshot snap) {
    Lowered v = lower(e, snap);
    return as_word(v, e->line);
  }

  const ImplAst& ast_;
  const StateSchema& schema_;
  const ConstantTable& constants_;
};

}  // namespace

LowerResult lower_to_ir(const ImplAst& ast, const StateSchema& schema,
                        const ConstantTable& constants) {
  try {
    Lowerer l(ast, schema, constants);
    return LowerResult{l.run(), std::nullopt};
  } catch (const CParseFault& f) {
    return LowerResult{std::nullopt, f.fault};
  }
}

LowerResult frontend_pipeline(std::string_view text, const HelperLib& lib,
                              const StateSchema& schema,
                              const ConstantTable& constants) {
  auto parsed = parse_impl(text);
  if (!parsed.ok()) return LowerResult{std::nullopt, parsed.fault};
  auto inlined = inline_helpers(*parsed.ast, lib);
  if (!inlined.ok()) return LowerResult{std::nullopt, inlined.fault};
  return lower_to_ir(*inlined.ast, schema, constants);
}

}  // namespace specforge
