// Copyright (c) SpecForge contributors.
// SPDX-License-Identifier: Apache-2.0
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "specforge/harness.hpp"

namespace fs = std::filesystem;
using namespace specforge;

#ifndef SPECFORGE_SHARE_DIR
#define SPECFORGE_SHARE_DIR "share"
#endif

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

struct Workbench {
  std::string share_dir;
  KernelConfig config;
  std::unique_ptr<StateSchema> schema;
  ConstantTable constants;
  ApiInventory inventory;
  HelperLib helpers;
  Corpus corpus;

  explicit Workbench(const std::string& share, const std::string& config_path) {
    share_dir = share;
    config = config_path.empty() ? KernelConfig{}
                                 : KernelConfig::from_file(config_path);
    config.validate();
    schema = std::make_unique<StateSchema>(config);
    constants = ConstantTable::standard(config);
    inventory = ApiInventory::standard();
    fs::path hp = fs::path(share_dir) / "helpers.def";
    helpers = fs::exists(hp) ? HelperLib::from_file(hp.string())
                             : HelperLib::standard();
    corpus = load_corpus((fs::path(share_dir) / "corpus").string());
  }

  DivergenceGate make_gate(Verifier& verifier) {
    return [this, &verifier](const SyscallDef& def,
                             const std::string& impl_text,
                             bool expect_equivalent) {
      auto lowered =
          frontend_pipeline(impl_text, helpers, *schema, constants);
      if (!lowered.ok()) return false;
      ImplBehavior b = execute(*lowered.ir);
      auto parsed = parse_spec(def.spec_text);
      if (!parsed.ok()) return false;
      auto checked = typecheck_spec(*parsed.ast, *schema, constants,
                                    inventory);
      if (!checked.ok()) return false;
      Verdict v = verifier.check_equiv(b, *checked.spec).verdict;
      return expect_equivalent ? v == Verdict::Verified
                               : v == Verdict::Counterexample;
    };
  }

  PromptComponents make_components(const std::vector<Task>& tasks,
                                   const std::vector<std::string>& few_shot) {
    PromptComponents comp;
    fs::path sp = fs::path(share_dir) / "prompts" / "system.txt";
    comp.system_text = fs::exists(sp) ? slurp(sp.string())
                                      : "You are an expert in OS kernel "
                                        "verification. Translate the C "
                                        "system call into a specification. "
                                        "Provide ONLY specification code in "
                                        "a ```python block.\n";
    comp.programming_model = render_programming_model(*schema, constants);
    for (const auto& name : few_shot) {
      const SyscallDef* def = corpus.find(name);
      if (!def) throw ConfigError("few-shot syscall " + name +
                                  " is not in the corpus");
      for (const auto& t : tasks)
        if (t.syscall == name && t.variant == "correct")
          comp.few_shot.push_back(&t);
      comp.few_shot_specs[name] = def->spec_text;
    }
    return comp;
  }
};

ModelConfig resolve_model(const std::string& share_dir,
                          const std::string& model_id,
                          const std::string& schedule) {
  ModelConfig cfg;
  cfg.model = model_id;
  fs::path registry = fs::path(share_dir) / "models.json";
  if (fs::exists(registry)) {
    nlohmann::json j = nlohmann::json::parse(slurp(registry.string()));
    if (j.contains("models") && j["models"].contains(model_id)) {
      const auto& m = j["models"][model_id];
      cfg.provider = m.value("provider", "");
      cfg.model = m.value("model", model_id);
      cfg.endpoint = m.value("endpoint", "");
      cfg.temperature = m.value("temperature", 0.0);
      cfg.max_tokens = m.value("max_tokens", 4096);
      cfg.auth_env = m.value("auth_env", "");
    }
  }
  if (cfg.provider.empty()) {
    if (model_id == "echo-oracle") cfg.provider = "echo-oracle";
    else if (model_id == "scripted") cfg.provider = "scripted";
    else if (model_id.rfind("mutate-", 0) == 0) cfg.provider = "mutate-k";
    else
      throw ConfigError("model id '" + model_id +
                        "' is not in the registry and is not a mock id");
  }
  cfg.schedule_path = schedule;
  if (cfg.provider == "scripted" && schedule.empty())
    throw ConfigError("the scripted provider needs --mock <schedule.jsonl>");
  return cfg;
}

std::vector<std::string> split_command(const std::string& cmd) {
  std::vector<std::string> out;
  std::istringstream in(cmd);
  std::string word;
  while (in >> word) out.push_back(word);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"specforge: a desk-scale syscall specification verification "
               "workbench"};
  app.require_subcommand(1);

  std::string share_dir = SPECFORGE_SHARE_DIR;
  if (const char* env = std::getenv("SPECFORGE_SHARE")) share_dir = env;
  app.add_option("--share", share_dir, "share directory (corpus, helpers)");
  std::string config_path;
  app.add_option("--config", config_path, "kernel config file");

  // gen-tasks
  auto* gen = app.add_subcommand("gen-tasks", "generate the benchmark tasks");
  std::string gen_out = "out/taskset";
  std::uint64_t gen_seed = 1;
  bool gen_no_gate = false;
  gen->add_option("--out", gen_out, "output directory");
  gen->add_option("--seed", gen_seed, "site-selection seed");
  gen->add_flag("--no-gate", gen_no_gate,
                "skip the divergence validation gate");

  // assemble-prompt
  auto* asm_cmd = app.add_subcommand("assemble-prompt",
                                     "render a task prompt");
  std::string asm_task, asm_tasks_dir = "out/taskset", asm_out;
  bool asm_no_guide = false;
  asm_cmd->add_option("--task", asm_task, "task id")->required();
  asm_cmd->add_option("--tasks", asm_tasks_dir, "taskset directory");
  asm_cmd->add_option("-o,--out", asm_out, "output file (default stdout)");
  asm_cmd->add_flag("--no-guide", asm_no_guide, "omit the translation guide");

  // run
  auto* run_cmd = app.add_subcommand("run", "run an evaluation");
  std::string run_model, run_method = "bodhi", run_mock;
  std::string run_tasks_dir = "out/taskset", run_out = "out/runs";
  std::uint64_t run_seed = 42;
  int run_jobs = 1;
  bool run_single = false, run_partial = false;
  int run_reruns = 0;
  run_cmd->add_option("--model", run_model, "model id")->required();
  run_cmd->add_option("--method", run_method, "baseline|bodhi");
  run_cmd->add_option("--mock", run_mock, "scripted schedule (JSONL)");
  run_cmd->add_option("--tasks", run_tasks_dir, "taskset directory");
  run_cmd->add_option("--out", run_out, "runs directory");
  run_cmd->add_option("--seed", run_seed, "run seed");
  run_cmd->add_option("--jobs", run_jobs, "worker count");
  run_cmd->add_flag("--single-variant", run_single,
                    "judge each task against its own variant only");
  run_cmd->add_flag("--partial", run_partial,
                    "record provider failures instead of aborting");
  run_cmd->add_option("--reruns", run_reruns,
                      "repeat the run N extra times and warn when reports "
                      "differ (provider nondeterminism check)");

  // verify
  auto* ver = app.add_subcommand("verify", "verify one impl against a spec");
  std::string ver_impl, ver_spec, ver_backend = "both", ver_solver,
              ver_dump_smt;
  std::size_t ver_samples = 10000;
  std::uint64_t ver_seed = 42;
  bool ver_dump_behavior = false;
  ver->add_option("impl", ver_impl, "C implementation file")->required();
  ver->add_option("spec", ver_spec, "specification file")->required();
  ver->add_option("--backend", ver_backend, "smt|diff|both");
  ver->add_option("--samples", ver_samples, "differential sample count");
  ver->add_option("--seed", ver_seed, "differential seed");
  ver->add_option("--solver", ver_solver,
                  "external SMT-LIB 2 solver command (default: built-in)");
  ver->add_option("--dump-smt", ver_dump_smt,
                  "keep emitted scripts (optionally naming the directory)")
      ->expected(0, 1)
      ->default_str("out/smt");
  ver->add_flag("--dump-behavior", ver_dump_behavior,
                "print the symbolic behavior as JSON");

  // lint
  auto* lint_cmd = app.add_subcommand("lint", "lint a specification file");
  std::string lint_file;
  lint_cmd->add_option("spec", lint_file, "specification file")->required();

  // report
  auto* rep = app.add_subcommand("report", "render a run report");
  std::string rep_run, rep_format = "md", rep_out;
  rep->add_option("--run", rep_run, "run directory")->required();
  rep->add_option("--format", rep_format, "md|json|csv");
  rep->add_option("-o,--out", rep_out, "output file (default stdout)");

  // diff
  auto* diff_cmd = app.add_subcommand("diff", "diff two runs");
  std::string diff_a, diff_b;
  diff_cmd->add_option("runA", diff_a, "first run directory")->required();
  diff_cmd->add_option("runB", diff_b, "second run directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) ? 2 : 0;
  }

  try {
    Workbench wb(share_dir, config_path);
    SolverConfig solver_cfg;
    Verifier verifier(*wb.schema, wb.constants, solver_cfg);

    if (gen->parsed()) {
      DivergenceGate gate;
      if (!gen_no_gate) gate = wb.make_gate(verifier);
      auto tasks = build_benchmark(wb.corpus, gen_seed, gate);
      emit_taskset(tasks, gen_out);
      std::cout << "wrote " << tasks.size() << " tasks to " << gen_out
                << "\n";
      return 0;
    }

    if (asm_cmd->parsed()) {
      auto tasks = load_taskset(asm_tasks_dir);
      const Task* task = nullptr;
      for (const auto& t : tasks)
        if (t.id == asm_task) task = &t;
      if (!task) throw ConfigError("no task with id " + asm_task);
      auto components = wb.make_components(
          tasks, {"sys_set_runnable", "sys_alloc_page"});
      std::string guide = render_guide(standard_guide());
      PromptBundle bundle =
          assemble_prompt(*task, components, guide, !asm_no_guide);
      std::string text = bundle.render();
      if (asm_out.empty()) {
        std::cout << text;
      } else {
        std::ofstream out(asm_out);
        out << text;
      }
      return 0;
    }

    if (run_cmd->parsed()) {
      if (run_method != "baseline" && run_method != "bodhi")
        throw ConfigError("--method must be baseline or bodhi");
      auto tasks = load_taskset(run_tasks_dir);
      ModelConfig cfg = resolve_model(share_dir, run_model, run_mock);
      RunOptions opt;
      opt.method = run_method;
      opt.seed = run_seed;
      opt.single_variant = run_single;
      opt.partial = run_partial;
      opt.jobs = run_jobs;
      // Content-addressed run directory: a hash of the run manifest.
      std::uint64_t h = taskset_hash(tasks);
      for (char c : cfg.provider + cfg.model + run_method) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ULL;
      }
      h ^= run_seed;
      char tag[24];
      std::snprintf(tag, sizeof tag, "%08llx",
                    static_cast<unsigned long long>(h & 0xFFFFFFFFULL));
      opt.out_dir =
          (fs::path(run_out) /
           (std::string(tag) + "-" + cfg.provider + "-" + run_method))
              .string();
      SolverConfig run_solver;
      run_solver.dump_dir = (fs::path(opt.out_dir) / "smt").string();
      Verifier run_verifier(*wb.schema, wb.constants, run_solver);
      auto components = wb.make_components(
          tasks, {"sys_set_runnable", "sys_alloc_page"});
      std::string guide = render_guide(standard_guide());
      EvalReport report = run_eval(tasks, wb.corpus, cfg, opt, run_verifier,
                                   wb.inventory, components, guide);
      auto strip_paths = [](EvalReport r) {
        for (auto& rec : r.records) {
          rec.prompt_path.clear();
          rec.completion_path.clear();
        }
        return report_to_json(r);
      };
      for (int extra = 0; extra < run_reruns; ++extra) {
        RunOptions again = opt;
        again.out_dir.clear();  // artifacts come from the first run
        EvalReport rerun = run_eval(tasks, wb.corpus, cfg, again,
                                    run_verifier, wb.inventory, components,
                                    guide);
        if (strip_paths(rerun) != strip_paths(report))
          std::cerr << "warning: rerun " << (extra + 1)
                    << " differs from the first run (nondeterministic "
                       "provider?)\n";
      }
      Ratio p = pass_at_1(report);
      std::cout << "Pass@1 " << p.display() << "% (" << p.num << "/" << p.den
                << "), report in " << opt.out_dir << "\n";
      return 0;
    }

    if (ver->parsed()) {
      SolverConfig scfg;
      if (!ver_solver.empty()) scfg.command = split_command(ver_solver);
      if (ver->count("--dump-smt"))
        scfg.dump_dir = ver_dump_smt.empty() ? "out/smt" : ver_dump_smt;
      Verifier v(*wb.schema, wb.constants, scfg);
      auto lowered = frontend_pipeline(slurp(ver_impl), wb.helpers,
                                       *wb.schema, wb.constants);
      if (!lowered.ok()) {
        std::cout << "implementation error: " << lowered.fault->message
                  << " (line " << lowered.fault->line << ")\n";
        return 1;
      }
      ImplBehavior b = execute(*lowered.ir);
      if (ver_dump_behavior) std::cout << behavior_to_json(b) << "\n";
      auto parsed = parse_spec(slurp(ver_spec));
      if (!parsed.ok()) {
        std::cout << "SpecFaulted: " << fault_kind_name(parsed.fault->kind)
                  << ": " << parsed.fault->message << " (line "
                  << parsed.fault->line << ")\n";
        return 1;
      }
      auto checked =
          typecheck_spec(*parsed.ast, *wb.schema, wb.constants, wb.inventory);
      if (!checked.ok()) {
        std::cout << "SpecFaulted: " << fault_kind_name(checked.fault->kind)
                  << ": " << checked.fault->message << " (line "
                  << checked.fault->line << ")\n";
        return 1;
      }
      bool disagree = false;
      if (ver_backend == "smt" || ver_backend == "both") {
        VerifyOutcome out = v.check_equiv(b, *checked.spec);
        std::cout << "smt: " << verdict_name(out.verdict);
        if (out.witness)
          std::cout << " [" << out.witness->describe(*wb.schema, b.params)
                    << "]";
        if (out.fault) std::cout << " [" << out.fault->message << "]";
        std::cout << "\n";
        disagree = disagree || out.verdict != Verdict::Verified;
      }
      if (ver_backend == "diff" || ver_backend == "both") {
        VerifyOutcome out =
            v.differential_check(b, *checked.spec, ver_samples, ver_seed);
        std::cout << "diff: " << verdict_name(out.verdict) << " ("
                  << ver_samples << " samples, seed " << ver_seed << ")";
        if (out.witness)
          std::cout << " [" << out.witness->describe(*wb.schema, b.params)
                    << "]";
        std::cout << "\n";
        disagree = disagree || out.verdict != Verdict::Verified;
      }
      return disagree ? 1 : 0;
    }

    if (lint_cmd->parsed()) {
      auto parsed = parse_spec(slurp(lint_file));
      if (!parsed.ok()) {
        std::cout << "ParseError: " << parsed.fault->message << " (line "
                  << parsed.fault->line << ")\n";
        return 1;
      }
      auto findings =
          lint_spec(*parsed.ast, *wb.schema, wb.constants, wb.inventory);
      std::cout << findings_to_json(findings) << "\n";
      return findings.empty() ? 0 : 1;
    }

    if (rep->parsed()) {
      EvalReport report = report_from_json(
          slurp((fs::path(rep_run) / "report.json").string()));
      std::string text;
      if (rep_format == "json") text = report_to_json(report);
      else if (rep_format == "csv") text = report_to_csv(report);
      else if (rep_format == "md") text = report_to_md(report);
      else throw ConfigError("--format must be md, json or csv");
      if (rep_out.empty()) {
        std::cout << text;
      } else {
        std::ofstream out(rep_out);
        out << text;
      }
      return 0;
    }

    if (diff_cmd->parsed()) {
      EvalReport a = report_from_json(
          slurp((fs::path(diff_a) / "report.json").string()));
      EvalReport b = report_from_json(
          slurp((fs::path(diff_b) / "report.json").string()));
      std::cout << diff_runs_md(a, b);
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
