// Copyright (c) SpecForge contributors.
// SPDX-License-Identifier: Apache-2.0
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "specforge/symex.hpp"

using namespace specforge;

namespace {

struct Fixture {
  KernelConfig config;
  StateSchema schema{config};
  ConstantTable constants = ConstantTable::standard(config);
  HelperLib helpers = HelperLib::standard();

  ImplBehavior behavior(const std::string& text) {
    auto ir = frontend_pipeline(text, helpers, schema, constants);
    REQUIRE_MESSAGE(ir.ok(), (ir.fault ? ir.fault->message : ""));
    return execute(*ir.ir);
  }

  ImplBehavior corpus_behavior(const std::string& syscall) {
    std::ifstream in(std::string(SPECFORGE_SHARE_DIR) + "/corpus/" + syscall +
                     "/impl.c");
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return behavior(buf.str());
  }
};

}  // namespace

TEST_CASE("set_runnable yields three error paths plus one success path") {
  Fixture fx;
  ImplBehavior b = fx.corpus_behavior("sys_set_runnable");
  REQUIRE(b.paths.size() == 4);
  CHECK(b.paths[0].status == 3);   // ESRCH
  CHECK(b.paths[1].status == 13);  // EACCES
  CHECK(b.paths[2].status == 22);  // EINVAL
  CHECK(b.paths[3].status == 0);
  for (int i = 0; i < 3; ++i) CHECK(b.paths[i].updates.empty());
  CHECK(b.paths[3].updates.size() == 1);
  // Exactly one success path.
  int successes = 0;
  for (const auto& p : b.paths) successes += p.status == 0;
  CHECK(successes == 1);
}

TEST_CASE("degenerate shapes") {
  Fixture fx;
  ImplBehavior none = fx.behavior("int f() { return 0; }");
  REQUIRE(none.paths.size() == 1);
  CHECK(none.paths[0].status == 0);

  ImplBehavior one = fx.behavior(
      "int f(pid_t pid) {\n"
      "    if (pid > 0)\n"
      "        return -EINVAL;\n"
      "    return 0;\n"
      "}\n");
  REQUIRE(one.paths.size() == 2);
  CHECK(one.paths[1].updates.empty());
}

TEST_CASE("concretize follows the unique true path") {
  Fixture fx;
  ImplBehavior b = fx.corpus_behavior("sys_set_runnable");
  KernelState s0 = canonical_state(fx.schema);
  const FieldInfo* state_f = fx.schema.find(FieldPath{"procs", "state"});
  Word idx2[] = {2};
  std::size_t cell = *fx.schema.cell_index(*state_f, idx2);

  Word args2[] = {2};
  ConcreteOutcome ok = concretize(b, fx.schema, fx.constants, s0, args2);
  CHECK(ok.status == 0);
  CHECK(ok.post.cell(cell) == kProcRunnable);

  // pid = 0 fails the validity check first: !(0 > 0 && 0 < 4).
  Word args0[] = {0};
  ConcreteOutcome err = concretize(b, fx.schema, fx.constants, s0, args0);
  CHECK(err.status == 3);
  CHECK(err.post == s0);

  // With ppid perturbed the privilege check fires.
  KernelState s1 = write_field(s0, fx.schema, FieldPath{"procs", "ppid"},
                               std::span<const Word>(idx2, 1), 3);
  ConcreteOutcome acc = concretize(b, fx.schema, fx.constants, s1, args2);
  CHECK(acc.status == 13);
  CHECK(acc.post == s1);
}

TEST_CASE("path guards are exclusive and exhaustive on random inputs") {
  Fixture fx;
  std::mt19937_64 rng(31337);
  for (const char* syscall :
       {"sys_set_runnable", "sys_alloc_page", "sys_reclaim_page",
        "sys_map_page", "sys_alloc_iommu_pt", "call_proc", "send_proc",
        "sys_lseek", "sys_dup", "sys_set_ipc_from"}) {
    ImplBehavior b = fx.corpus_behavior(syscall);
    int bad = 0;
    for (int iter = 0; iter < 1000; ++iter) {
      KernelState s(fx.schema);
      for (std::size_t i = 0; i < fx.schema.cell_count(); ++i)
        s.set_cell(i, (rng() & 3) ? (rng() & 7) : rng());
      s.set_cell(0, rng() % fx.config.nproc);
      std::map<std::string, Word> params;
      std::vector<Word> args;
      for (const auto& p : b.params) {
        args.push_back((rng() & 1) ? (rng() & 7) : rng());
        params[p.name] = args.back();
      }
      EvalEnv env;
      env.schema = &fx.schema;
      env.constants = &fx.constants;
      env.old_state = &s;
      env.params = &params;
      int true_guards = 0;
      for (const auto& path : b.paths)
        true_guards += eval_bool(*path.guard, env) ? 1 : 0;
      if (true_guards != 1) ++bad;

      // Error frame: a nonzero status returns the input state unchanged.
      ConcreteOutcome out = concretize(b, fx.schema, fx.constants, s, args);
      if (out.status != 0 && !(out.post == s)) ++bad;
    }
    CHECK_MESSAGE(bad == 0, syscall);
  }
}

TEST_CASE("execute is deterministic and behaviors serialize") {
  Fixture fx;
  ImplBehavior a = fx.corpus_behavior("sys_map_page");
  ImplBehavior b = fx.corpus_behavior("sys_map_page");
  CHECK(behavior_to_json(a) == behavior_to_json(b));
  std::string json = behavior_to_json(a);
  CHECK(json.find("\"syscall\": \"sys_map_page\"") != std::string::npos);
  CHECK(json.find("pages[pt].data[index]") != std::string::npos);
}

TEST_CASE("the interleaved fixture carries updates on the success path only") {
  Fixture fx;
  ImplBehavior b = fx.corpus_behavior("sys_reclaim_page");
  REQUIRE(b.paths.size() == 4);
  // The nr_pages decrement sits between the owner and type checks in the
  // source; symbolically it lands on the success path, in program order.
  for (int i = 0; i < 3; ++i) CHECK(b.paths[i].updates.empty());
  REQUIRE(b.paths[3].updates.size() == 4);
  CHECK(b.paths[3].updates[0].path == FieldPath{"procs", "nr_pages"});
  CHECK(b.paths[3].updates[1].path == FieldPath{"pages", "type"});
}
