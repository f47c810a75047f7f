// Copyright (c) SpecForge contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "specforge/expr.hpp"
#include "specforge/kernel.hpp"

namespace specforge {

enum class FaultKind { ParseError, TypeSortError, ApiReferenceError,
                       DomainError };

std::string fault_kind_name(FaultKind k);

/// A spec-side failure. All four kinds count as syntax-class failures in
/// the evaluation roll-up.
struct SpecFault {
  FaultKind kind = FaultKind::ParseError;
  std::string message;
  int line = 0;
  int col = 0;
};

struct LintFinding {
  int category = 0;  // Table-1 category id; statically checkable tiers only
  std::string severity;
  int line = 0;
  int col = 0;
  std::string message;
};

std::string findings_to_json(const std::vector<LintFinding>& findings);

struct SpecWrite {
  FieldPath path;
  std::vector<ExprPtr> indices;
  ExprPtr rhs;
  int line = 0;
};

/// The return statement, kept structurally: `return <value>, <state>`
/// where <state> is either util.If(<cond>, <then>, <else>) or a bare name.
struct SpecReturn {
  std::string value_name;
  bool has_util_if = false;
  std::string if_cond;
  std::string if_then;
  std::string if_else;
  std::string bare_state;  // when !has_util_if
  int line = 0;
};

struct SpecAst {
  std::string name;
  std::string state_param;           // first parameter, the old-state binder
  std::vector<std::string> params;   // remaining parameters
  std::string guard_var;
  ExprPtr guard;
  bool has_copy = false;
  std::string copy_var;
  std::vector<SpecWrite> writes;
  SpecReturn ret;
};

bool ast_equal(const SpecAst& a, const SpecAst& b);

struct ParseResult {
  std::optional<SpecAst> ast;
  std::optional<SpecFault> fault;
  bool ok() const { return ast.has_value(); }
};

/// Parses one `def` in the closed Python/Z3-flavored surface grammar.
ParseResult parse_spec(std::string_view text);

/// Canonical re-print; parse(print(parse(t))) equals parse(t).
std::string spec_to_source(const SpecAst& ast);

/// Allowed function names with arities. Variadic entries use arity -1.
/// z3.SLT is deliberately absent.
class ApiInventory {
 public:
  static ApiInventory standard();
  std::optional<int> arity(const std::string& qualified_name) const;
  void add(std::string qualified_name, int arity);
  void remove(const std::string& qualified_name);

 private:
  std::vector<std::pair<std::string, int>> entries_;
};

/// A typechecked spec: literals pinned, BitVecVal folded, every path and
/// name validated. Evaluation and encoding consume this form.
struct TypedSpec {
  SpecAst ast;           // original shape (for lint/printing)
  ExprPtr guard;         // pinned
  std::vector<SpecWrite> writes;  // pinned
};

struct TypecheckResult {
  std::optional<TypedSpec> spec;
  std::optional<SpecFault> fault;
  bool ok() const { return spec.has_value(); }
};

TypecheckResult typecheck_spec(const SpecAst& ast, const StateSchema& schema,
                               const ConstantTable& constants,
                               const ApiInventory& inventory);

/// Static lints for the statically checkable guide categories
/// {3, 4, 5, 6, 11, 14}. Never aborts; oracle specs produce no findings.
std::vector<LintFinding> lint_spec(const SpecAst& ast,
                                   const StateSchema& schema,
                                   const ConstantTable& constants,
                                   const ApiInventory& inventory);

struct SpecEval {
  bool truth = false;
  KernelState post;
  std::optional<SpecFault> fault;  // dynamic DomainError
  bool ok() const { return !fault.has_value(); }
};

/// Concrete evaluation honoring the return structure: the guard value is
/// returned as the truth, and the post-state follows the util.If shape
/// (update block applied iff the selected branch is the copied state).
/// A write whose index is out of domain faults with DomainError when it
/// reaches the post-state.
SpecEval eval_spec(const TypedSpec& spec, const StateSchema& schema,
                   const ConstantTable& constants, const KernelState& s,
                   std::span<const Word> args);

/// Symbolic encoding: a guard term plus one post-value term per cell,
/// over the symbols supplied by `env`. domain_obligations are terms that
/// must be unsatisfiable (conjoined with well-formedness) for the spec's
/// writes to be domain-safe.
struct SymbolicSpec {
  std::string guard;
  std::vector<std::string> cell_posts;
  std::vector<std::string> domain_obligations;
};

SymbolicSpec encode_spec(const TypedSpec& spec, const TermEnv& env);

}  // namespace specforge
