// Copyright (c) SpecForge contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "specforge/kernel.hpp"

namespace specforge::smt {

/// Infrastructure failure (solver crash, timeout, unparseable output).
/// Deliberately distinct from every verification verdict.
struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class SatStatus { Sat, Unsat, Unknown };

struct SmtResult {
  SatStatus status = SatStatus::Unknown;
  // Model values for declared symbols (booleans as 0/1). Symbols the
  // solver left unconstrained may be absent; callers default them to 0.
  std::map<std::string, Word> model;
};

/// ---- CDCL SAT solver -------------------------------------------------
///
/// Literals are nonzero ints, DIMACS style: +v / -v. Variable 1 is
/// reserved as the constant TRUE.
class SatSolver {
 public:
  SatSolver();

  int new_var();
  int true_lit() const { return 1; }
  int false_lit() const { return -1; }

  void add_clause(std::vector<int> lits);
  bool okay() const { return ok_; }

  SatStatus solve(long conflict_budget = -1);
  bool lit_value(int lit) const;  // valid after Sat

  std::size_t num_vars() const { return assign_.size() - 1; }
  std::size_t num_clauses() const { return clauses_.size(); }

 private:
  struct Clause {
    std::vector<int> lits;
  };

  int var_of(int lit) const { return lit > 0 ? lit : -lit; }
  int widx(int lit) const { return 2 * var_of(lit) + (lit < 0 ? 1 : 0); }
  int assigned(int lit) const;  // +1 true, -1 false, 0 unassigned

  void enqueue(int lit, int reason);
  int propagate();  // returns conflicting clause id or -1
  void analyze(int confl, std::vector<int>& learnt, int& bt_level);
  void backtrack(int level);
  int pick_branch();
  void bump(int var);
  void decay();

  // heap keyed by activity
  void heap_insert(int var);
  int heap_pop();
  void heap_up(int i);
  void heap_down(int i);
  bool heap_contains(int var) const { return heap_pos_[var] >= 0; }

  bool ok_ = true;
  std::vector<Clause> clauses_;
  std::vector<std::vector<int>> watches_;
  std::vector<int8_t> assign_;     // per var: 0 unknown, +1, -1
  std::vector<bool> phase_;        // saved polarity
  std::vector<int> level_;
  std::vector<int> reason_;
  std::vector<int> trail_;
  std::vector<int> trail_lim_;
  std::size_t qhead_ = 0;
  std::vector<double> activity_;
  double var_inc_ = 1.0;
  std::vector<int> heap_;
  std::vector<int> heap_pos_;
  std::vector<char> seen_;
};

/// ---- QF_BV bit blasting over SMT-LIB 2 scripts -----------------------
///
/// Supports the fragment the verifier emits: declare-const of Bool and
/// (_ BitVec n), assert over and/or/not/=>/xor/=/ite plus bvadd bvsub
/// bvmul bvudiv bvurem bvneg bvnot bvand bvor bvxor bvshl bvlshr and the
/// eight bvult..bvsge comparisons, with #x/#b/(_ bvN w) literals.
SmtResult solve_script(const std::string& script);

/// Renders the z3-style response text ("sat" plus a define-fun model
/// block, or "unsat"). Used by the specforge-smt tool.
std::string render_response(const std::string& script);

/// ---- external solver driver ------------------------------------------
///
/// Writes the script to a temp file, appends the path to argv, enforces
/// the timeout, and parses sat/unsat plus any (define-fun ...) model.
/// Throws SolverError on timeout, crash-without-answer, or exec failure.
SmtResult run_external_solver(const std::vector<std::string>& argv,
                              const std::string& script, int timeout_seconds,
                              const std::string& work_dir = "");

/// ---- concrete term evaluation -----------------------------------------
///
/// Independent evaluator for single SMT-LIB terms, used to cross-check
/// symbolic encodings against concrete runs. Symbols map to (value, width);
/// booleans use width 0 with value 0/1.
struct TermSymbols {
  std::map<std::string, std::pair<Word, unsigned>> values;
};

struct TermValue {
  bool is_bool = false;
  bool b = false;
  Word w = 0;
  unsigned width = 0;
};

TermValue eval_term(std::string_view term, const TermSymbols& symbols);

/// Parse-once handle for evaluating the same term at many points.
class ParsedTerm {
 public:
  explicit ParsedTerm(std::string_view term);
  ParsedTerm(ParsedTerm&&) noexcept;
  ParsedTerm& operator=(ParsedTerm&&) noexcept;
  ~ParsedTerm();
  TermValue eval(const TermSymbols& symbols) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace specforge::smt
