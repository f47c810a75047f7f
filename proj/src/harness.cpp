// Copyright (c) SpecForge contributors.
// SPDX-License-Identifier: Apache-2.0
#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "specforge/harness.hpp"

namespace specforge {

namespace fs = std::filesystem;

std::string FailureClass::label() const {
  switch (top) {
    case FailTop::Format:
      return "format";
    case FailTop::Syntax:
      return syntax_sub == SyntaxSub::ApiReference ? "syntax/api_reference"
                                                   : "syntax/type_sort";
    case FailTop::Semantic:
      return semantic_sub == SemanticSub::DomainPattern
                 ? "semantic/domain_pattern"
                 : "semantic/translation_logic";
  }
  return "?";
}

std::optional<FailureClass> FailureClass::from_label(const std::string& l) {
  FailureClass f;
  if (l == "format") {
    f.top = FailTop::Format;
    return f;
  }
  if (l == "syntax/type_sort") {
    f.top = FailTop::Syntax;
    f.syntax_sub = SyntaxSub::TypeSort;
    return f;
  }
  if (l == "syntax/api_reference") {
    f.top = FailTop::Syntax;
    f.syntax_sub = SyntaxSub::ApiReference;
    return f;
  }
  if (l == "semantic/domain_pattern") {
    f.top = FailTop::Semantic;
    f.semantic_sub = SemanticSub::DomainPattern;
    return f;
  }
  if (l == "semantic/translation_logic") {
    f.top = FailTop::Semantic;
    f.semantic_sub = SemanticSub::TranslationLogic;
    return f;
  }
  return std::nullopt;
}

FailureClass classify_failure(const std::optional<SpecFault>& fault,
                              bool format_error,
                              const std::string& category) {
  FailureClass out;
  if (format_error) {
    out.top = FailTop::Format;
    return out;
  }
  if (fault) {
    out.top = FailTop::Syntax;
    out.syntax_sub = fault->kind == FaultKind::ApiReferenceError
                         ? SyntaxSub::ApiReference
                         : SyntaxSub::TypeSort;
    return out;
  }
  out.top = FailTop::Semantic;
  bool domain = category == "IPC" || category == "IOMMU" ||
                category == "page-mapping" || category == "page-reclaim";
  out.semantic_sub =
      domain ? SemanticSub::DomainPattern : SemanticSub::TranslationLogic;
  return out;
}

std::string Ratio::display() const {
  double pct = den == 0 ? 0.0
                        : 100.0 * static_cast<double>(num) /
                              static_cast<double>(den);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", pct);
  return buf;
}

Ratio pass_at_1(const EvalReport& report) {
  Ratio r;
  for (const auto& rec : report.records) {
    if (rec.infra_failed && report.partial) continue;
    ++r.den;
    if (rec.pass) ++r.num;
  }
  return r;
}

Aggregates compute_aggregates(const EvalReport& report) {
  Aggregates agg;
  agg.overall = pass_at_1(report);

  static const char* kColumns[] = {
      "incorrect_pointer_op", "incorrect_privilege_check", "memory_leak",
      "buffer_overflow", "missing_bounds_check", "correct"};
  for (const char* col : kColumns) {
    Ratio r;
    for (const auto& rec : report.records) {
      if (rec.variant != col) continue;
      if (rec.infra_failed && report.partial) continue;
      ++r.den;
      if (rec.pass) ++r.num;
    }
    agg.per_variant.emplace_back(col, r);
  }

  std::vector<std::string> syscall_order;
  for (const auto& rec : report.records) {
    bool seen = false;
    for (const auto& s : syscall_order) seen = seen || s == rec.syscall;
    if (!seen) syscall_order.push_back(rec.syscall);
  }
  for (const auto& sys : syscall_order) {
    Ratio r;
    for (const auto& rec : report.records) {
      if (rec.syscall != sys) continue;
      if (rec.infra_failed && report.partial) continue;
      ++r.den;
      if (rec.pass) ++r.num;
    }
    agg.per_syscall.emplace_back(sys, r);
  }

  auto& counts = agg.failure_counts;
  counts["pass"] = 0;
  counts["format"] = 0;
  counts["syntax/type_sort"] = 0;
  counts["syntax/api_reference"] = 0;
  counts["semantic/domain_pattern"] = 0;
  counts["semantic/translation_logic"] = 0;
  for (const auto& rec : report.records) {
    if (rec.infra_failed) {
      ++agg.infra_failed;
      continue;
    }
    if (rec.pass) {
      ++counts["pass"];
      continue;
    }
    if (rec.failure) ++counts[rec.failure->label()];
  }
  // FormatError rolls into the syntax bucket for Table-2-style totals.
  counts["syntax_rollup"] = counts["format"] + counts["syntax/type_sort"] +
                            counts["syntax/api_reference"];
  counts["semantic_rollup"] = counts["semantic/domain_pattern"] +
                              counts["semantic/translation_logic"];
  return agg;
}

namespace {

std::string hex64(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(v));
  return buf;
}

struct JudgeCache {
  std::mutex mu;
  // (judging scope, spec text) -> verdict
  std::map<std::pair<std::string, std::string>, TaskVerdict> entries;
};

void write_file(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  fs::path tmp = p;
  tmp += ".tmp";
  {
    std::ofstream out(tmp);
    out << text;
  }
  fs::rename(tmp, p);
}

}  // namespace

EvalReport run_eval(const std::vector<Task>& tasks, const Corpus& corpus,
                    const ModelConfig& model_cfg, const RunOptions& opt,
                    Verifier& verifier, const ApiInventory& inventory,
                    const PromptComponents& components,
                    const std::string& guide_text) {
  EvalReport report;
  report.provider = model_cfg.provider;
  report.model = model_cfg.model;
  report.method = opt.method;
  report.temperature = model_cfg.temperature;
  report.max_tokens = model_cfg.max_tokens;
  report.seed = opt.seed;
  report.taskset_hash = hex64(taskset_hash(tasks));
  report.single_variant = opt.single_variant;
  report.partial = opt.partial;
  report.records.resize(tasks.size());

  // Variant behaviors per syscall, in task order.
  HelperLib helpers = HelperLib::standard();
  std::map<std::string, std::vector<ImplBehavior>> variants;
  std::map<std::string, std::vector<std::size_t>> variant_task_index;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const Task& t = tasks[i];
    auto lowered = frontend_pipeline(t.impl_text, helpers, verifier.schema(),
                                     verifier.constants());
    if (!lowered.ok())
      throw ConfigError("task " + t.id + " does not lower: " +
                        lowered.fault->message);
    variants[t.syscall].push_back(execute(*lowered.ir));
    variant_task_index[t.syscall].push_back(i);
  }

  // Oracle verdict pattern per syscall (oracle spec vs every variant).
  std::map<std::string, std::vector<Verdict>> oracle_patterns;
  std::map<std::string, std::string> oracle_by_task;
  for (const auto& [syscall, behaviors] : variants) {
    const SyscallDef* def = corpus.find(syscall);
    if (!def) throw ConfigError("taskset syscall " + syscall +
                                " is not in the corpus");
    auto parsed = parse_spec(def->spec_text);
    auto checked = typecheck_spec(*parsed.ast, verifier.schema(),
                                  verifier.constants(), inventory);
    if (!checked.ok())
      throw ConfigError("oracle spec for " + syscall + " does not typecheck");
    std::vector<Verdict> pattern;
    for (const auto& b : behaviors)
      pattern.push_back(verifier.check_equiv(b, *checked.spec).verdict);
    oracle_patterns[syscall] = std::move(pattern);
  }
  std::vector<std::string> task_order;
  for (const auto& t : tasks) {
    const SyscallDef* def = corpus.find(t.syscall);
    oracle_by_task[t.id] = def->spec_text;
    task_order.push_back(t.id);
  }

  auto provider = make_provider(model_cfg, oracle_by_task, task_order);
  JudgeCache cache;
  std::atomic<std::size_t> next{0};
  std::mutex abort_mu;
  std::exception_ptr abort_error;

  auto worker = [&]() {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      {
        std::lock_guard<std::mutex> lock(abort_mu);
        if (abort_error) return;
      }
      const Task& task = tasks[i];
      TaskRecord rec;
      rec.task_id = task.id;
      rec.syscall = task.syscall;
      rec.category = task.category;
      rec.variant = task.variant;
      auto started = std::chrono::steady_clock::now();
      try {
        PromptBundle bundle = assemble_prompt(task, components, guide_text,
                                              opt.method == "bodhi");
        std::string prompt = bundle.render();
        Completion completion;
        try {
          completion = provider->complete(prompt, task.id);
        } catch (const ProviderError& e) {
          if (!opt.partial) throw;
          rec.infra_failed = true;
          rec.fault_message = e.what();
        }
        if (!opt.out_dir.empty()) {
          rec.prompt_path = "prompts/" + task.id + ".txt";
          rec.completion_path = "completions/" + task.id + ".txt";
          write_file(fs::path(opt.out_dir) / rec.prompt_path, prompt);
          write_file(fs::path(opt.out_dir) / rec.completion_path,
                     completion.text);
        }
        if (!rec.infra_failed) {
          auto extracted = extract_spec_block(completion.text);
          if (!extracted) {
            rec.failure = classify_failure(std::nullopt, true, task.category);
          } else {
            if (!opt.out_dir.empty())
              write_file(fs::path(opt.out_dir) / "extracted" /
                             (task.id + ".py"),
                         *extracted);
            auto parsed = parse_spec(*extracted);
            if (parsed.ok()) {
              auto findings =
                  lint_spec(*parsed.ast, verifier.schema(),
                            verifier.constants(), inventory);
              rec.lint_findings = static_cast<int>(findings.size());
              if (!opt.out_dir.empty())
                write_file(fs::path(opt.out_dir) / "lint" /
                               (task.id + ".json"),
                           findings_to_json(findings));
            }

            const auto& sys_behaviors = variants.at(task.syscall);
            const auto& sys_oracle = oracle_patterns.at(task.syscall);
            std::vector<ImplBehavior> own;
            std::vector<Verdict> own_oracle;
            std::span<const ImplBehavior> judge_variants(sys_behaviors);
            std::span<const Verdict> judge_oracle(sys_oracle);
            if (opt.single_variant) {
              const auto& idxs = variant_task_index.at(task.syscall);
              for (std::size_t k = 0; k < idxs.size(); ++k)
                if (idxs[k] == i) {
                  own.push_back(sys_behaviors[k]);
                  own_oracle.push_back(sys_oracle[k]);
                }
              judge_variants = own;
              judge_oracle = own_oracle;
            }

            TaskVerdict verdict;
            std::pair<std::string, std::string> key{
                task.syscall + (opt.single_variant ? "#" + task.id : ""),
                *extracted};
            bool cached = false;
            {
              std::lock_guard<std::mutex> lock(cache.mu);
              auto it = cache.entries.find(key);
              if (it != cache.entries.end()) {
                verdict = it->second;
                cached = true;
              }
            }
            if (!cached) {
              verdict = judge_task(task.id, *extracted, judge_variants,
                                   judge_oracle, verifier, inventory);
              std::lock_guard<std::mutex> lock(cache.mu);
              cache.entries.emplace(key, verdict);
            }
            rec.pass = verdict.pass;
            if (!opt.out_dir.empty() && !verdict.pass) {
              nlohmann::json w;
              for (std::size_t k = 0; k < verdict.witnesses.size(); ++k)
                if (!verdict.witnesses[k].empty())
                  w[std::to_string(k)] = verdict.witnesses[k];
              if (!w.empty())
                write_file(fs::path(opt.out_dir) / "witnesses" /
                               (task.id + ".json"),
                           w.dump(2));
            }
            for (Verdict v : verdict.pattern)
              rec.pattern.push_back(verdict_name(v));
            for (Verdict v : verdict.oracle_pattern)
              rec.oracle_pattern.push_back(verdict_name(v));
            if (!verdict.pass) {
              rec.failure = classify_failure(verdict.fault, false,
                                             task.category);
              if (verdict.fault) {
                rec.fault_kind = fault_kind_name(verdict.fault->kind);
                rec.fault_message = verdict.fault->message;
              }
            }
          }
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(abort_mu);
        if (!abort_error) abort_error = std::current_exception();
        return;
      }
      rec.timing_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                          std::chrono::steady_clock::now() - started)
                          .count();
      report.records[i] = std::move(rec);
    }
  };

  int jobs = std::max(1, opt.jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (abort_error) std::rethrow_exception(abort_error);
  report.provider_calls = provider->calls();

  if (!opt.out_dir.empty()) {
    write_file(fs::path(opt.out_dir) / "report.json", report_to_json(report));
    nlohmann::json timing;
    for (const auto& rec : report.records)
      timing[rec.task_id] = rec.timing_ms;
    write_file(fs::path(opt.out_dir) / "timing.json", timing.dump(2));
  }
  return report;
}

}  // namespace specforge
