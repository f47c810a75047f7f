// Copyright (c) SpecForge contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <atomic>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "specforge/smt.hpp"
#include "specforge/speclang.hpp"
#include "specforge/symex.hpp"

namespace specforge {

enum class Verdict { Verified, Counterexample, SpecFaulted };

std::string verdict_name(Verdict v);

struct Witness {
  KernelState initial;
  std::vector<Word> args;
  ConcreteOutcome impl_outcome;
  bool spec_truth = false;
  KernelState spec_post;
  std::string describe(const StateSchema& schema,
                       std::span<const CParam> params) const;
};

struct VerifyOutcome {
  Verdict verdict = Verdict::Verified;
  std::optional<Witness> witness;   // present iff Counterexample
  std::optional<SpecFault> fault;   // present iff SpecFaulted
};

/// Backend selection. An empty command means the in-process solver; a
/// non-empty command is run as an external SMT-LIB 2 process per query.
struct SolverConfig {
  std::vector<std::string> command;
  int timeout_seconds = 30;
  std::string dump_dir;  // when set, every emitted script is kept here
};

/// The behavioral-equivalence refutation query: pre-state cell symbols,
/// argument symbols, and asserted terms whose conjunction is satisfiable
/// iff the pair is NOT behaviorally equivalent.
struct EquivQuery {
  std::vector<std::pair<std::string, unsigned>> symbols;  // name, width
  std::vector<std::string> asserts;
};

/// Deterministic SMT-LIB 2 rendering (QF_BV, one symbol per cell).
std::string emit_smtlib(const EquivQuery& q);

/// Builds the mismatch query for an (implementation, spec) pair:
/// (impl-success XOR spec-guard) OR (both-succeed AND some cell differs),
/// under the state well-formedness assumption current < NPROC.
EquivQuery build_equiv_query(const ImplBehavior& b, const TypedSpec& spec,
                             const StateSchema& schema,
                             const ConstantTable& constants);

class Verifier {
 public:
  Verifier(const StateSchema& schema, const ConstantTable& constants,
           SolverConfig solver = {})
      : schema_(schema), constants_(constants), solver_(std::move(solver)) {}

  /// Decides behavioral equivalence via the SMT backend. Counterexample
  /// witnesses are replayed concretely before being reported; a witness
  /// that fails to replay aborts (it would mean the encoding is wrong).
  VerifyOutcome check_equiv(const ImplBehavior& b, const TypedSpec& spec);

  /// Seeded random differential oracle: reports the first disagreement
  /// between concretize and eval_spec. Zero samples is vacuously
  /// Verified-so-far.
  VerifyOutcome differential_check(const ImplBehavior& b,
                                   const TypedSpec& spec, std::size_t samples,
                                   std::uint64_t seed);

  const StateSchema& schema() const { return schema_; }
  const ConstantTable& constants() const { return constants_; }
  const SolverConfig& solver_config() const { return solver_; }

  /// Draws a well-formed random state (current always in range; cells
  /// from a small-value/uniform mixture so guards are reachable).
  KernelState random_state(std::mt19937_64& rng) const;

  /// Draws arguments, 50% in range by parameter role.
  std::vector<Word> random_args(std::span<const CParam> params,
                                std::mt19937_64& rng) const;

 private:
  smt::SmtResult solve(const std::string& script, const std::string& tag);

  const StateSchema& schema_;
  const ConstantTable& constants_;
  SolverConfig solver_;
  std::atomic<int> query_counter_{0};
};

struct TaskVerdict {
  std::string task_id;
  bool pass = false;
  std::vector<Verdict> pattern;         // generated spec vs each variant
  std::vector<Verdict> oracle_pattern;  // oracle spec vs each variant
  std::vector<std::string> witnesses;   // per variant; "" when none
  std::optional<SpecFault> fault;       // set when the spec faulted
};

/// OSV-style pass criterion: the generated spec must parse, typecheck and
/// reproduce the oracle's Verified/Counterexample pattern over all
/// variants of the syscall. A SpecFault on any variant fails the task.
TaskVerdict judge_task(const std::string& task_id,
                       const std::string& gen_spec_text,
                       std::span<const ImplBehavior> variants,
                       std::span<const Verdict> oracle_pattern,
                       Verifier& verifier, const ApiInventory& inventory);

}  // namespace specforge
