// Copyright (c) SpecForge contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "specforge/expr.hpp"
#include "specforge/kernel.hpp"

namespace specforge {

enum class CFaultKind { UnsupportedConstruct, UnknownHelper, DomainError };

struct CFault {
  CFaultKind kind = CFaultKind::UnsupportedConstruct;
  std::string message;
  int line = 0;
};

enum class CExprOp {
  Num, Ident, Call,
  Arrow,       // var->field            (pre-inline)
  ArrowIndex,  // var->field[idx]       (pre-inline)
  FieldRead,   // resolved state read   (post-inline)
  LNot, LAnd, LOr,
  Eq, Ne, Lt, Gt, Le, Ge,
  Add, Sub, Mul, Div, Shl, BitOr, BitAnd,
};

struct CExpr;
using CExprPtr = std::shared_ptr<const CExpr>;

struct CExpr {
  CExprOp op;
  Word number = 0;
  std::string name;   // Ident / Call / Arrow var / FieldRead root
  std::string field;  // Arrow / FieldRead
  std::vector<CExprPtr> args;  // operands; Call args; FieldRead indices
  int line = 0;
};

/// One typed parameter. Signedness drives comparison lowering exactly as
/// C's usual arithmetic conversions would at one word width.
struct CParam {
  std::string name;
  std::string type_name;
  bool is_signed = false;
};

struct CStmtCheck {
  CExprPtr cond;
  std::string errname;
  int line = 0;
};

struct CStmtAssign {
  // Pre-inline lvalue: var->field[index?]; post-inline: root/field/index0.
  std::string var;
  std::string field;
  CExprPtr index;          // null unless the lvalue is indexed
  std::string root;        // resolved map root after inlining ("procs"...)
  CExprPtr root_index;     // resolved index expression after inlining
  char compound = 0;       // 0, '+', '-'
  CExprPtr rhs;
  int line = 0;
};

struct CStmtBind {  // var = helper(arg);
  std::string var;
  std::string helper;
  CExprPtr arg;
  int line = 0;
};

struct CStmtCall {  // helper(args);
  std::string name;
  std::vector<CExprPtr> args;
  int line = 0;
};

using CStmt = std::variant<CStmtCheck, CStmtAssign, CStmtBind, CStmtCall>;

struct CLocalDecl {
  std::string struct_name;  // "proc" or "page"
  std::string var;
};

struct ImplAst {
  std::string name;
  std::vector<CParam> params;
  std::vector<CLocalDecl> locals;
  std::vector<CStmt> stmts;  // ReturnZero is implicit and final
  std::vector<std::string> dropped_ghosts;  // recorded by inline_helpers
};

struct ImplParseResult {
  std::optional<ImplAst> ast;
  std::optional<CFault> fault;
  bool ok() const { return ast.has_value(); }
};

/// Parses the restricted C subset (one function per file).
ImplParseResult parse_impl(std::string_view text);

/// Prints an ImplAst back to C text; used for bug-variant emission.
std::string impl_to_source(const ImplAst& ast);

struct HelperDef {
  enum class Kind { Expand, Bind, Ghost } kind = Kind::Ghost;
  std::string name;
  std::vector<std::string> params;  // Expand
  CExprPtr body;                    // Expand template
  std::string bind_root;            // Bind: "procs" or "pages"
};

class HelperLib {
 public:
  static HelperLib standard();
  /// Lines: `expand name(p) = <c expr>`, `bind name(p) -> root`,
  /// `ghost name`. `#` comments.
  static HelperLib from_text(std::string_view text);
  static HelperLib from_file(const std::string& path);

  const HelperDef* find(std::string_view name) const;

 private:
  std::vector<HelperDef> defs_;
};

struct InlineResult {
  std::optional<ImplAst> ast;
  std::optional<CFault> fault;
  bool ok() const { return ast.has_value(); }
};

/// Substitutes expandable helpers, resolves pointer binds into field
/// paths, and drops ghost helpers (recording them). Idempotent.
InlineResult inline_helpers(const ImplAst& ast, const HelperLib& lib);

struct IRCheck {
  ExprPtr guard;
  Word errcode = 0;
  std::string errname;
};

struct IRUpdate {
  FieldPath path;
  std::vector<ExprPtr> indices;
  ExprPtr rhs;
};

struct IRItem {
  enum class Kind { Check, Update } kind = Kind::Check;
  IRCheck check;
  IRUpdate update;
};

struct IRFunction {
  std::string name;
  std::vector<CParam> params;
  std::vector<IRItem> items;
  std::vector<std::string> dropped_ghosts;
};

struct LowerResult {
  std::optional<IRFunction> ir;
  std::optional<CFault> fault;
  bool ok() const { return ir.has_value(); }
};

/// Lowers an inlined ImplAst to straight-line checks and updates over the
/// shared expression IR. Comparison signedness follows the operands' C
/// types; error names resolve through the constant table.
LowerResult lower_to_ir(const ImplAst& ast, const StateSchema& schema,
                        const ConstantTable& constants);

/// Convenience pipeline: parse + inline + lower.
LowerResult frontend_pipeline(std::string_view text, const HelperLib& lib,
                              const StateSchema& schema,
                              const ConstantTable& constants);

}  // namespace specforge
