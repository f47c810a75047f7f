// Copyright (c) SpecForge contributors.
// SPDX-License-Identifier: Apache-2.0
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "json.hpp"
#include "specforge/harness.hpp"

using namespace specforge;

namespace {

struct Fixture {
  KernelConfig config;
  StateSchema schema{config};
  ConstantTable constants = ConstantTable::standard(config);
  ApiInventory inventory = ApiInventory::standard();
  Corpus corpus = load_corpus(std::string(SPECFORGE_SHARE_DIR) + "/corpus");
  Verifier verifier{schema, constants};

  std::vector<Task> subset(std::initializer_list<const char*> syscalls) {
    Corpus small;
    for (const char* name : syscalls)
      small.syscalls.push_back(*corpus.find(name));
    return build_benchmark(small, 1);
  }

  PromptComponents components() {
    PromptComponents comp;
    comp.system_text = "Answer in a ```python block.\n";
    comp.programming_model = render_programming_model(schema, constants);
    return comp;
  }
};

EvalReport synthetic_report(std::uint64_t passes, std::uint64_t total) {
  EvalReport r;
  r.taskset_hash = "feed";
  for (std::uint64_t i = 0; i < total; ++i) {
    TaskRecord rec;
    rec.task_id = "t" + std::to_string(i);
    rec.syscall = "s" + std::to_string(i % 7);
    rec.category = i % 2 ? "IPC" : "file";
    rec.variant = "correct";
    rec.pass = i < passes;
    if (!rec.pass)
      rec.failure = classify_failure(std::nullopt, false, rec.category);
    r.records.push_back(std::move(rec));
  }
  return r;
}

}  // namespace

TEST_CASE("failure classification follows the taxonomy") {
  // Extraction failure.
  FailureClass format = classify_failure(std::nullopt, true, "IPC");
  CHECK(format.top == FailTop::Format);
  CHECK(format.label() == "format");

  // Parse, sort and domain faults fold into syntax/type_sort.
  for (FaultKind kind : {FaultKind::ParseError, FaultKind::TypeSortError,
                         FaultKind::DomainError}) {
    SpecFault f{kind, "m", 1, 1};
    FailureClass c = classify_failure(f, false, "file");
    CHECK(c.top == FailTop::Syntax);
    CHECK(c.label() == "syntax/type_sort");
  }
  SpecFault api{FaultKind::ApiReferenceError, "m", 1, 1};
  CHECK(classify_failure(api, false, "file").label() ==
        "syntax/api_reference");

  // Semantic split by syscall category.
  for (const char* cat : {"IPC", "IOMMU", "page-mapping", "page-reclaim"})
    CHECK(classify_failure(std::nullopt, false, cat).label() ==
          "semantic/domain_pattern");
  for (const char* cat : {"file", "process"})
    CHECK(classify_failure(std::nullopt, false, cat).label() ==
          "semantic/translation_logic");

  // Labels round-trip.
  for (const char* label :
       {"format", "syntax/type_sort", "syntax/api_reference",
        "semantic/domain_pattern", "semantic/translation_logic"}) {
    auto back = FailureClass::from_label(label);
    REQUIRE(back.has_value());
    CHECK(back->label() == label);
  }
}

TEST_CASE("pass_at_1 reproduces the reference fractions") {
  CHECK(pass_at_1(synthetic_report(123, 245)).display() == "50.20");
  CHECK(pass_at_1(synthetic_report(237, 245)).display() == "96.73");
  CHECK(pass_at_1(synthetic_report(0, 57)).display() == "0.00");
  Ratio r = pass_at_1(synthetic_report(123, 245));
  CHECK(r.num == 123);
  CHECK(r.den == 245);
}

TEST_CASE("aggregates account for every record exactly once") {
  EvalReport r = synthetic_report(10, 17);
  Aggregates agg = compute_aggregates(r);
  std::uint64_t sum = agg.failure_counts.at("pass") +
                      agg.failure_counts.at("format") +
                      agg.failure_counts.at("syntax/type_sort") +
                      agg.failure_counts.at("syntax/api_reference") +
                      agg.failure_counts.at("semantic/domain_pattern") +
                      agg.failure_counts.at("semantic/translation_logic") +
                      agg.infra_failed;
  CHECK(sum == r.records.size());
  CHECK(agg.failure_counts.at("syntax_rollup") ==
        agg.failure_counts.at("format") +
            agg.failure_counts.at("syntax/type_sort") +
            agg.failure_counts.at("syntax/api_reference"));
}

TEST_CASE("report JSON round-trips") {
  EvalReport r = synthetic_report(3, 5);
  r.provider = "echo-oracle";
  r.model = "echo-oracle";
  r.method = "bodhi";
  r.max_tokens = 4096;
  r.seed = 42;
  std::string json = report_to_json(r);
  EvalReport back = report_from_json(json);
  CHECK(report_to_json(back) == json);
}

TEST_CASE("echo-oracle end to end scores 100 percent") {
  Fixture fx;
  auto tasks = fx.subset({"sys_set_runnable", "sys_lseek"});
  ModelConfig cfg;
  cfg.provider = "echo-oracle";
  cfg.model = "echo-oracle";
  RunOptions opt;
  opt.method = "bodhi";
  EvalReport report =
      run_eval(tasks, fx.corpus, cfg, opt, fx.verifier, fx.inventory,
               fx.components(), render_guide(standard_guide()));
  Ratio p = pass_at_1(report);
  CHECK(p.num == p.den);
  CHECK(p.den == tasks.size());
  // Task isolation: one completion request per task.
  CHECK(report.provider_calls == tasks.size());
}

TEST_CASE("a scripted fault mix produces exactly the scheduled classes") {
  Fixture fx;
  auto tasks = fx.subset({"sys_set_runnable", "call_proc"});
  REQUIRE(tasks.size() == 8);  // 4 + 4 variants

  std::string schedule = "/tmp/specforge-test-mix.jsonl";
  {
    std::ofstream out(schedule);
    auto line = [&](const std::string& id, const std::string& text) {
      nlohmann::json j;
      j["task_id"] = id;
      j["response_text"] = text;
      out << j.dump() << "\n";
    };
    std::string oracle_sr = fx.corpus.find("sys_set_runnable")->spec_text;
    std::string oracle_cp = fx.corpus.find("call_proc")->spec_text;
    // Two passes, one no-fence, one API fault, one paren-write, two
    // semantic failures.
    line("sys_set_runnable__correct", "```python\n" + oracle_sr + "```\n");
    line("call_proc__correct", "```python\n" + oracle_cp + "```\n");
    line("sys_set_runnable__incorrect_pointer_op", "no code at all");
    line("sys_set_runnable__incorrect_privilege_check",
         "```python\ndef sys_set_runnable(old, pid):\n"
         "    cond = z3.SLT(pid, dt.NPROC)\n"
         "    return cond, util.If(cond, old, old)\n```\n");
    line("sys_set_runnable__missing_bounds_check",
         "```python\ndef sys_set_runnable(old, pid):\n"
         "    cond = z3.ULT(pid, dt.NPROC)\n"
         "    new = old.copy()\n"
         "    new.procs[pid].state(0) = 1\n"
         "    return cond, util.If(cond, new, old)\n```\n");
    line("call_proc__incorrect_privilege_check",
         "```python\ndef call_proc(old, pid):\n"
         "    cond = z3.And(True)\n"
         "    return cond, util.If(cond, old, old)\n```\n");
    line("call_proc__missing_bounds_check",
         "```python\ndef call_proc(old, pid):\n"
         "    cond = z3.And(pid > 0, pid < dt.NPROC)\n"
         "    new = old.copy()\n"
         "    new.procs[pid].state = dt.proc_state.PROC_RUNNING\n"
         "    return cond, util.If(cond, new, old)\n```\n");
    line("call_proc__incorrect_pointer_op",
         "```python\ndef call_proc(old, pid):\n"
         "    cond = z3.And(True)\n"
         "    return cond, util.If(cond, old, old)\n```\n");
  }
  ModelConfig cfg;
  cfg.provider = "scripted";
  cfg.model = "scripted";
  cfg.schedule_path = schedule;
  RunOptions opt;
  EvalReport report =
      run_eval(tasks, fx.corpus, cfg, opt, fx.verifier, fx.inventory,
               fx.components(), render_guide(standard_guide()));
  Aggregates agg = compute_aggregates(report);
  CHECK(agg.failure_counts.at("pass") == 2);
  CHECK(agg.failure_counts.at("format") == 1);
  CHECK(agg.failure_counts.at("syntax/api_reference") == 1);
  CHECK(agg.failure_counts.at("syntax/type_sort") == 1);
  // call_proc is IPC, so its semantic failures are domain-pattern.
  CHECK(agg.failure_counts.at("semantic/domain_pattern") == 3);
  CHECK(pass_at_1(report).display() == "25.00");  // 2/8
  std::filesystem::remove(schedule);
}

TEST_CASE("identical runs render byte-identical reports") {
  Fixture fx;
  auto tasks = fx.subset({"sys_lseek"});
  ModelConfig cfg;
  cfg.provider = "echo-oracle";
  cfg.model = "echo-oracle";
  RunOptions opt;
  EvalReport a = run_eval(tasks, fx.corpus, cfg, opt, fx.verifier,
                          fx.inventory, fx.components(),
                          render_guide(standard_guide()));
  EvalReport b = run_eval(tasks, fx.corpus, cfg, opt, fx.verifier,
                          fx.inventory, fx.components(),
                          render_guide(standard_guide()));
  CHECK(report_to_json(a) == report_to_json(b));
  CHECK(report_to_md(a) == report_to_md(b));
  CHECK(report_to_csv(a).find("sys_lseek__correct,sys_lseek,file,correct,1")
        != std::string::npos);
}

TEST_CASE("diff surfaces fixes and regressions per syscall") {
  EvalReport a = synthetic_report(3, 5);
  EvalReport b = synthetic_report(3, 5);
  CHECK(diff_runs_md(a, b).find("(+)") == std::string::npos);

  b.records[4].pass = true;   // fixed
  b.records[4].failure.reset();
  b.records[0].pass = false;  // regression
  b.records[0].failure = classify_failure(std::nullopt, false, "file");
  std::string diff = diff_runs_md(a, b);
  CHECK(diff.find("t4 (+)") != std::string::npos);
  CHECK(diff.find("t0 (-)") != std::string::npos);

  EvalReport other = synthetic_report(1, 2);
  other.taskset_hash = "beef";
  CHECK_THROWS_AS(diff_runs_md(a, other), ConfigError);
}

TEST_CASE("a no-op spec everywhere scores zero") {
  Fixture fx;
  auto tasks = fx.subset({"sys_set_runnable"});
  std::string schedule = "/tmp/specforge-test-noop.jsonl";
  {
    std::ofstream out(schedule);
    for (const auto& t : tasks) {
      nlohmann::json j;
      j["task_id"] = t.id;
      j["response_text"] =
          "```python\ndef sys_set_runnable(old, pid):\n"
          "    cond = z3.And(True)\n"
          "    return cond, util.If(cond, old, old)\n```\n";
      out << j.dump() << "\n";
    }
  }
  ModelConfig cfg;
  cfg.provider = "scripted";
  cfg.model = "scripted";
  cfg.schedule_path = schedule;
  RunOptions opt;
  EvalReport report =
      run_eval(tasks, fx.corpus, cfg, opt, fx.verifier, fx.inventory,
               fx.components(), render_guide(standard_guide()));
  Ratio p = pass_at_1(report);
  CHECK(p.num == 0);
  CHECK(p.den == tasks.size());
  // The no-op spec executes; its failures are semantic, not syntactic.
  for (const auto& rec : report.records) {
    REQUIRE(rec.failure.has_value());
    CHECK(rec.failure->top == FailTop::Semantic);
  }
  std::filesystem::remove(schedule);
}

TEST_CASE("parallel runs produce the same report bytes") {
  Fixture fx;
  auto tasks = fx.subset({"sys_set_runnable", "sys_dup"});
  ModelConfig cfg;
  cfg.provider = "echo-oracle";
  cfg.model = "echo-oracle";
  RunOptions serial;
  RunOptions parallel;
  parallel.jobs = 3;
  EvalReport a = run_eval(tasks, fx.corpus, cfg, serial, fx.verifier,
                          fx.inventory, fx.components(),
                          render_guide(standard_guide()));
  EvalReport b = run_eval(tasks, fx.corpus, cfg, parallel, fx.verifier,
                          fx.inventory, fx.components(),
                          render_guide(standard_guide()));
  CHECK(report_to_json(a) == report_to_json(b));
}

TEST_CASE("arity-matched no-op specs fail every task in the benchmark") {
  Fixture fx;
  auto tasks = build_benchmark(fx.corpus, 1);
  std::string schedule = "/tmp/specforge-test-noop-all.jsonl";
  {
    std::ofstream out(schedule);
    for (const auto& t : tasks) {
      const SyscallDef* def = fx.corpus.find(t.syscall);
      auto parsed = parse_spec(def->spec_text);
      REQUIRE(parsed.ok());
      std::string args;
      for (const auto& p : parsed.ast->params) args += ", " + p;
      nlohmann::json j;
      j["task_id"] = t.id;
      j["response_text"] =
          "```python\ndef " + t.syscall + "(old" + args + "):\n"
          "    cond = z3.And(True)\n"
          "    return cond, util.If(cond, old, old)\n```\n";
      out << j.dump() << "\n";
    }
  }
  ModelConfig cfg;
  cfg.provider = "scripted";
  cfg.model = "scripted";
  cfg.schedule_path = schedule;
  RunOptions opt;
  EvalReport report =
      run_eval(tasks, fx.corpus, cfg, opt, fx.verifier, fx.inventory,
               fx.components(), render_guide(standard_guide()));
  Ratio p = pass_at_1(report);
  CHECK(p.num == 0);
  CHECK(p.den == tasks.size());
  CHECK(p.display() == "0.00");
  std::filesystem::remove(schedule);
}

TEST_CASE("provider failures abort by default and record when partial") {
  Fixture fx;
  auto tasks = fx.subset({"sys_set_ipc_from"});  // 3 tasks
  std::string schedule = "/tmp/specforge-test-partial.jsonl";
  {
    std::ofstream out(schedule);
    const SyscallDef* def = fx.corpus.find("sys_set_ipc_from");
    // Only the correct task is scheduled; the others hit ProviderError.
    nlohmann::json j;
    j["task_id"] = "sys_set_ipc_from__correct";
    j["response_text"] = "```python\n" + def->spec_text + "```\n";
    out << j.dump() << "\n";
  }
  ModelConfig cfg;
  cfg.provider = "scripted";
  cfg.model = "scripted";
  cfg.schedule_path = schedule;

  RunOptions strict;
  CHECK_THROWS_AS(run_eval(tasks, fx.corpus, cfg, strict, fx.verifier,
                           fx.inventory, fx.components(),
                           render_guide(standard_guide())),
                  ProviderError);

  RunOptions partial;
  partial.partial = true;
  EvalReport report =
      run_eval(tasks, fx.corpus, cfg, partial, fx.verifier, fx.inventory,
               fx.components(), render_guide(standard_guide()));
  Ratio p = pass_at_1(report);
  CHECK(p.num == 1);
  CHECK(p.den == 1);  // infra failures leave the denominator
  int infra = 0;
  for (const auto& rec : report.records) infra += rec.infra_failed;
  CHECK(infra == 2);
  std::filesystem::remove(schedule);
}
