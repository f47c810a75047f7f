// Copyright (c) SpecForge contributors.
// SPDX-License-Identifier: Apache-2.0
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "specforge/verifier.hpp"

using namespace specforge;

namespace {

struct Fixture {
  KernelConfig config;
  StateSchema schema{config};
  ConstantTable constants = ConstantTable::standard(config);
  ApiInventory inventory = ApiInventory::standard();
  HelperLib helpers = HelperLib::standard();
  Verifier verifier{schema, constants};

  std::string corpus_file(const std::string& syscall, const char* name) {
    std::ifstream in(std::string(SPECFORGE_SHARE_DIR) + "/corpus/" + syscall +
                     "/" + name);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
  }

  ImplBehavior behavior(const std::string& text) {
    auto ir = frontend_pipeline(text, helpers, schema, constants);
    REQUIRE_MESSAGE(ir.ok(), (ir.fault ? ir.fault->message : ""));
    return execute(*ir.ir);
  }

  TypedSpec typed(const std::string& text) {
    auto parsed = parse_spec(text);
    REQUIRE_MESSAGE(parsed.ok(), (parsed.fault ? parsed.fault->message : ""));
    auto checked = typecheck_spec(*parsed.ast, schema, constants, inventory);
    REQUIRE_MESSAGE(checked.ok(), (checked.fault ? checked.fault->message : ""));
    return *checked.spec;
  }
};

const char* kNoOpImpl = "int f() { return 0; }";
const char* kNoOpSpec =
    "def f(old):\n"
    "    cond = z3.And(True)\n"
    "    return cond, util.If(cond, old, old)\n";

}  // namespace

TEST_CASE("emit_smtlib is deterministic with one symbol per cell") {
  Fixture fx;
  ImplBehavior b = fx.behavior(fx.corpus_file("sys_set_runnable", "impl.c"));
  TypedSpec spec = fx.typed(fx.corpus_file("sys_set_runnable", "spec.py"));
  EquivQuery q = build_equiv_query(b, spec, fx.schema, fx.constants);
  // 62 pre-state cells plus the one argument.
  CHECK(q.symbols.size() == 63);
  CHECK(q.symbols.front().first == "current");
  CHECK(q.symbols.back().first == "arg_pid");
  std::string s1 = emit_smtlib(q);
  std::string s2 = emit_smtlib(build_equiv_query(b, spec, fx.schema,
                                                 fx.constants));
  CHECK(s1 == s2);
  CHECK(s1.find("(set-logic QF_BV)") != std::string::npos);
  CHECK(s1.find("(declare-const procs_2_state (_ BitVec 64))") !=
        std::string::npos);
  CHECK(s1.find("(check-sat)") != std::string::npos);
  CHECK(s1.find("(get-model)") != std::string::npos);
}

TEST_CASE("the no-op pair verifies; its mismatch refutation is unsat") {
  Fixture fx;
  ImplBehavior b = fx.behavior(kNoOpImpl);
  TypedSpec spec = fx.typed(kNoOpSpec);
  EquivQuery q = build_equiv_query(b, spec, fx.schema, fx.constants);
  CHECK(smt::solve_script(emit_smtlib(q)).status == smt::SatStatus::Unsat);
  CHECK(fx.verifier.check_equiv(b, spec).verdict == Verdict::Verified);
}

TEST_CASE("reference pair verifies; the privilege deletion diverges") {
  Fixture fx;
  ImplBehavior good =
      fx.behavior(fx.corpus_file("sys_set_runnable", "impl.c"));
  TypedSpec spec = fx.typed(fx.corpus_file("sys_set_runnable", "spec.py"));
  CHECK(fx.verifier.check_equiv(good, spec).verdict == Verdict::Verified);

  std::string broken = fx.corpus_file("sys_set_runnable", "impl.c");
  auto pos = broken.find("    if (proc->ppid != current)");
  REQUIRE(pos != std::string::npos);
  auto end = broken.find(";\n", pos);
  broken.erase(pos, end + 2 - pos);
  ImplBehavior bad = fx.behavior(broken);
  VerifyOutcome out = fx.verifier.check_equiv(bad, spec);
  REQUIRE(out.verdict == Verdict::Counterexample);
  // check_equiv replays every witness before reporting it; spot-check the
  // divergence shape here too.
  REQUIRE(out.witness.has_value());
  bool impl_success = out.witness->impl_outcome.status == 0;
  CHECK(impl_success != out.witness->spec_truth);
  // The deleted check is exactly what the witness exploits: some pid
  // whose parent is not the caller.
  Word pid = out.witness->args.at(0);
  Word ppid = read_field(out.witness->initial, fx.schema,
                         FieldPath{"procs", "ppid"},
                         std::span<const Word>(&pid, 1));
  Word cur = read_field(out.witness->initial, fx.schema,
                        FieldPath{"current", ""}, {});
  CHECK(ppid != cur);
}

TEST_CASE("differential oracle agrees with the stated seeds") {
  Fixture fx;
  ImplBehavior good =
      fx.behavior(fx.corpus_file("sys_set_runnable", "impl.c"));
  TypedSpec spec = fx.typed(fx.corpus_file("sys_set_runnable", "spec.py"));
  CHECK(fx.verifier.differential_check(good, spec, 10000, 42).verdict ==
        Verdict::Verified);
  CHECK(fx.verifier.differential_check(good, spec, 0, 42).verdict ==
        Verdict::Verified);

  std::string broken = fx.corpus_file("sys_set_runnable", "impl.c");
  auto pos = broken.find("    if (proc->ppid != current)");
  auto end = broken.find(";\n", pos);
  broken.erase(pos, end + 2 - pos);
  ImplBehavior bad = fx.behavior(broken);
  VerifyOutcome out = fx.verifier.differential_check(bad, spec, 10000, 42);
  REQUIRE(out.verdict == Verdict::Counterexample);
  REQUIRE(out.witness.has_value());
  // The reported witness genuinely diverges.
  bool impl_success = out.witness->impl_outcome.status == 0;
  bool diverges = impl_success != out.witness->spec_truth ||
                  (impl_success && out.witness->spec_truth &&
                   !(out.witness->impl_outcome.post == out.witness->spec_post));
  CHECK(diverges);
}

TEST_CASE("a spec that can write out of domain faults on both backends") {
  Fixture fx;
  ImplBehavior b = fx.behavior(
      "int f(pid_t pid) {\n"
      "    struct proc *p;\n"
      "    p = get_proc(pid);\n"
      "    p->state = 1;\n"
      "    return 0;\n"
      "}\n");
  TypedSpec spec = fx.typed(
      "def f(old, pid):\n"
      "    cond = z3.UGE(pid, 0)\n"
      "    new = old.copy()\n"
      "    new.procs[pid].state = 1\n"
      "    return cond, util.If(cond, new, old)\n");
  VerifyOutcome smt_out = fx.verifier.check_equiv(b, spec);
  REQUIRE(smt_out.verdict == Verdict::SpecFaulted);
  CHECK(smt_out.fault->kind == FaultKind::DomainError);
  VerifyOutcome diff_out = fx.verifier.differential_check(b, spec, 10000, 42);
  REQUIRE(diff_out.verdict == Verdict::SpecFaulted);
  CHECK(diff_out.fault->kind == FaultKind::DomainError);
}

TEST_CASE("arity mismatches fault before solving") {
  Fixture fx;
  ImplBehavior b = fx.behavior(fx.corpus_file("sys_set_runnable", "impl.c"));
  TypedSpec spec = fx.typed(kNoOpSpec);
  VerifyOutcome out = fx.verifier.check_equiv(b, spec);
  REQUIRE(out.verdict == Verdict::SpecFaulted);
  CHECK(out.fault->kind == FaultKind::TypeSortError);
}

TEST_CASE("the external solver backend returns the same verdicts") {
  Fixture fx;
  SolverConfig scfg;
  scfg.command = {SPECFORGE_SMT_BIN};
  Verifier external(fx.schema, fx.constants, scfg);
  ImplBehavior good =
      fx.behavior(fx.corpus_file("sys_set_runnable", "impl.c"));
  TypedSpec spec = fx.typed(fx.corpus_file("sys_set_runnable", "spec.py"));
  CHECK(external.check_equiv(good, spec).verdict == Verdict::Verified);

  std::string broken = fx.corpus_file("sys_set_runnable", "impl.c");
  auto pos = broken.find("    if (proc->ppid != current)");
  auto end = broken.find(";\n", pos);
  broken.erase(pos, end + 2 - pos);
  VerifyOutcome out = external.check_equiv(fx.behavior(broken), spec);
  CHECK(out.verdict == Verdict::Counterexample);
}

TEST_CASE("judge_task matches verdict patterns across variants") {
  Fixture fx;
  std::vector<ImplBehavior> variants;
  variants.push_back(fx.behavior(fx.corpus_file("sys_set_runnable",
                                                "impl.c")));
  std::string broken = fx.corpus_file("sys_set_runnable", "impl.c");
  auto pos = broken.find("    if (proc->ppid != current)");
  auto end = broken.find(";\n", pos);
  broken.erase(pos, end + 2 - pos);
  variants.push_back(fx.behavior(broken));

  std::string oracle_text = fx.corpus_file("sys_set_runnable", "spec.py");
  TypedSpec oracle = fx.typed(oracle_text);
  std::vector<Verdict> oracle_pattern;
  for (const auto& v : variants)
    oracle_pattern.push_back(fx.verifier.check_equiv(v, oracle).verdict);
  CHECK(oracle_pattern ==
        std::vector<Verdict>{Verdict::Verified, Verdict::Counterexample});

  // The oracle text itself passes.
  TaskVerdict same = judge_task("t", oracle_text, variants, oracle_pattern,
                                fx.verifier, fx.inventory);
  CHECK(same.pass);

  // A spec with one parameter but the wrong behavior fails on pattern.
  TaskVerdict wrong = judge_task(
      "t",
      "def f(old, pid):\n"
      "    cond = z3.And(True)\n"
      "    return cond, util.If(cond, old, old)\n",
      variants, oracle_pattern, fx.verifier, fx.inventory);
  CHECK(!wrong.pass);
  CHECK(!wrong.fault.has_value());

  // A spec using z3.SLT fails as an API reference fault.
  TaskVerdict slt = judge_task(
      "t",
      "def f(old, pid):\n"
      "    cond = z3.SLT(pid, 0)\n"
      "    return cond, util.If(cond, old, old)\n",
      variants, oracle_pattern, fx.verifier, fx.inventory);
  CHECK(!slt.pass);
  REQUIRE(slt.fault.has_value());
  CHECK(slt.fault->kind == FaultKind::ApiReferenceError);
}

TEST_CASE("solver scripts can be persisted for inspection") {
  Fixture fx;
  std::string dump = "/tmp/specforge-test-smt-dump";
  std::filesystem::remove_all(dump);
  SolverConfig scfg;
  scfg.dump_dir = dump;
  Verifier v(fx.schema, fx.constants, scfg);
  ImplBehavior b = fx.behavior(kNoOpImpl);
  TypedSpec spec = fx.typed(kNoOpSpec);
  v.check_equiv(b, spec);
  bool found = false;
  for (const auto& e : std::filesystem::directory_iterator(dump))
    found = found || e.path().extension() == ".smt2";
  CHECK(found);
  std::filesystem::remove_all(dump);
}

TEST_CASE("the pipeline is width-parametric") {
  KernelConfig cfg = KernelConfig::from_text("word_width = 16\n");
  StateSchema schema{cfg};
  ConstantTable constants = ConstantTable::standard(cfg);
  ApiInventory inventory = ApiInventory::standard();
  HelperLib helpers = HelperLib::standard();
  Verifier verifier{schema, constants};

  std::ifstream impl_in(std::string(SPECFORGE_SHARE_DIR) +
                        "/corpus/sys_set_runnable/impl.c");
  std::ostringstream impl_buf;
  impl_buf << impl_in.rdbuf();
  std::ifstream spec_in(std::string(SPECFORGE_SHARE_DIR) +
                        "/corpus/sys_set_runnable/spec.py");
  std::ostringstream spec_buf;
  spec_buf << spec_in.rdbuf();

  auto ir = frontend_pipeline(impl_buf.str(), helpers, schema, constants);
  REQUIRE(ir.ok());
  ImplBehavior b = execute(*ir.ir);
  auto parsed = parse_spec(spec_buf.str());
  REQUIRE(parsed.ok());
  auto checked = typecheck_spec(*parsed.ast, schema, constants, inventory);
  REQUIRE(checked.ok());
  CHECK(verifier.check_equiv(b, *checked.spec).verdict == Verdict::Verified);
  CHECK(verifier.differential_check(b, *checked.spec, 2000, 42).verdict ==
        Verdict::Verified);
  EquivQuery q = build_equiv_query(b, *checked.spec, schema, constants);
  CHECK(emit_smtlib(q).find("(_ BitVec 16)") != std::string::npos);
}
