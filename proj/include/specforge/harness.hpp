// Copyright (c) SpecForge contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "specforge/promptkit.hpp"
#include "specforge/taskgen.hpp"
#include "specforge/verifier.hpp"

namespace specforge {

enum class FailTop { Syntax, Semantic, Format };
enum class SyntaxSub { TypeSort, ApiReference };
enum class SemanticSub { DomainPattern, TranslationLogic };

struct FailureClass {
  FailTop top = FailTop::Syntax;
  std::optional<SyntaxSub> syntax_sub;
  std::optional<SemanticSub> semantic_sub;

  std::string label() const;
  static std::optional<FailureClass> from_label(const std::string& label);
};

/// Failure taxonomy: extraction failure -> Format; ParseError,
/// TypeSortError and DomainError -> Syntax/TypeSort; ApiReferenceError ->
/// Syntax/ApiReference; everything else is Semantic, DomainPattern when
/// the syscall's category needs specialized patterns (IPC, IOMMU,
/// page-mapping, page-reclaim), TranslationLogic otherwise.
FailureClass classify_failure(const std::optional<SpecFault>& fault,
                              bool format_error,
                              const std::string& category);

struct TaskRecord {
  std::string task_id;
  std::string syscall;
  std::string category;
  std::string variant;
  bool pass = false;
  bool infra_failed = false;
  std::optional<FailureClass> failure;
  std::string fault_kind;    // when a SpecFault drove the failure
  std::string fault_message;
  std::vector<std::string> pattern;         // verdict names per variant
  std::vector<std::string> oracle_pattern;
  int lint_findings = 0;
  long timing_ms = 0;  // persisted in the timing sidecar only
  std::string prompt_path;
  std::string completion_path;
};

/// Exact rational; display rounds to two decimals.
struct Ratio {
  std::uint64_t num = 0;
  std::uint64_t den = 0;
  std::string display() const;  // "50.20"; "0.00" for 0/0
};

struct EvalReport {
  std::string provider;
  std::string model;
  std::string method;  // "baseline" | "bodhi"
  double temperature = 0.0;
  int max_tokens = 0;
  std::uint64_t seed = 0;
  std::string taskset_hash;  // hex
  bool single_variant = false;
  bool partial = false;
  std::uint64_t provider_calls = 0;  // the mock call log (isolation check)
  std::vector<TaskRecord> records;
};

struct Aggregates {
  Ratio overall;
  // Column order fixed: the five bug classes, then correct.
  std::vector<std::pair<std::string, Ratio>> per_variant;
  std::vector<std::pair<std::string, Ratio>> per_syscall;
  std::map<std::string, std::uint64_t> failure_counts;
  std::uint64_t infra_failed = 0;
};

Aggregates compute_aggregates(const EvalReport& report);
Ratio pass_at_1(const EvalReport& report);

struct RunOptions {
  std::string method = "bodhi";
  std::uint64_t seed = 42;
  std::string out_dir;  // artifacts land here when set
  bool single_variant = false;
  bool partial = false;  // provider failures become records, not aborts
  int jobs = 1;
};

/// End-to-end evaluation: assemble -> complete -> extract -> parse/
/// typecheck/lint -> judge -> classify, per task. Verdicts are cached by
/// (syscall, spec text), so repeated completions cost one solver pass.
EvalReport run_eval(const std::vector<Task>& tasks, const Corpus& corpus,
                    const ModelConfig& model_cfg, const RunOptions& opt,
                    Verifier& verifier, const ApiInventory& inventory,
                    const PromptComponents& components,
                    const std::string& guide_text);

/// Canonical report JSON (sorted keys, no timing) and its inverse.
std::string report_to_json(const EvalReport& report);
EvalReport report_from_json(const std::string& json_text);

std::string report_to_csv(const EvalReport& report);
std::string report_to_md(const EvalReport& report);

/// Per-syscall pass counts before/after plus the flipped task ids
/// (regressions marked). Requires matching taskset hashes.
std::string diff_runs_md(const EvalReport& a, const EvalReport& b);

}  // namespace specforge
