// Copyright (c) SpecForge contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "specforge/kernel.hpp"

namespace specforge {

/// Which state a field read observes: the function pre-state ("old") or
/// the evolving updated state ("new", sequential update semantics).
enum class Snapshot { Old, New };

enum class ExprOp {
  BoolLit,   // bval
  WordLit,   // value/width; width 0 = polymorphic until typecheck pins it
  Param,     // name
  ConstRef,  // name (dotted, without the dt. prefix)
  FreeName,  // unresolved bare identifier (fails typecheck, feeds lint)
  Read,      // path/snap; args are index expressions
  BitVecVal, // args[0] = WordLit or ConstRef; width = declared width
  And, Or, Not, Implies,
  Eq, Ne,
  Ult, Ule, Ugt, Uge,  // unsigned comparisons
  Slt, Sle, Sgt, Sge,  // two's-complement comparisons
  Add, Sub, Mul, UDiv, Shl, BitOr, BitAnd,
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  ExprOp op;
  bool bval = false;
  Word value = 0;
  int width = 0;
  std::string name;
  FieldPath path;
  Snapshot snap = Snapshot::Old;
  bool bracket_read = false;  // map leaf read written with [] (lint cat. 4)
  std::vector<ExprPtr> args;
  int line = 0;
  int col = 0;

  static ExprPtr make(ExprOp op, std::vector<ExprPtr> args = {});
  static ExprPtr boolean(bool b);
  static ExprPtr literal(Word v, int width);
  static ExprPtr param(std::string name);
  static ExprPtr constant(std::string dotted);
  static ExprPtr read(FieldPath path, Snapshot snap,
                      std::vector<ExprPtr> indices);
};

bool expr_equal(const Expr& a, const Expr& b);

/// Sortedness: Bool or BitVec(width).
struct Sort {
  bool is_bool = false;
  int width = 0;  // meaningful when !is_bool
  bool operator==(const Sort&) const = default;
};

/// Returns the sort of a typechecked expression (literals pinned).
/// Throws std::logic_error on malformed trees; real sort errors are caught
/// by the spec-lang / c-frontend validators before evaluation.
Sort sort_of(const Expr& e, const KernelConfig& config);

struct Value {
  bool is_bool = false;
  bool b = false;
  Word w = 0;
};

struct EvalEnv {
  const StateSchema* schema = nullptr;
  const ConstantTable* constants = nullptr;
  const KernelState* old_state = nullptr;
  const KernelState* new_state = nullptr;  // null when New reads are illegal
  const std::map<std::string, Word>* params = nullptr;
};

/// Concrete evaluation. Map reads are total: an out-of-domain index reads
/// as 0 (the same rule the SMT encoding uses).
Value eval_expr(const Expr& e, const EvalEnv& env);

inline bool eval_bool(const Expr& e, const EvalEnv& env) {
  return eval_expr(e, env).b;
}
inline Word eval_word(const Expr& e, const EvalEnv& env) {
  return eval_expr(e, env).w;
}

/// SMT-LIB 2 term rendering over QF_BV with maps unrolled per cell.
struct TermEnv {
  const StateSchema* schema = nullptr;
  const ConstantTable* constants = nullptr;
  /// Term for a pre-state cell (usually its declared symbol).
  std::function<std::string(std::size_t)> old_cell;
  /// Term for an evolving-state cell; unset when New reads are illegal.
  std::function<std::string(std::size_t)> new_cell;
  /// Term for a parameter.
  std::function<std::string(const std::string&)> param;
};

std::string render_literal(Word v, int width);
std::string render_term(const Expr& e, const TermEnv& env);

/// Pretty-print in the spec surface syntax (used by the parser round-trip
/// property and by diagnostics).
std::string expr_to_source(const Expr& e);

}  // namespace specforge
