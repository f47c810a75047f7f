// Copyright (c) SpecForge contributors.
// SPDX-License-Identifier: Apache-2.0
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "specforge/taskgen.hpp"

using namespace specforge;

namespace {

Corpus shipped_corpus() {
  return load_corpus(std::string(SPECFORGE_SHARE_DIR) + "/corpus");
}

}  // namespace

TEST_CASE("the shipped corpus loads with category coverage") {
  Corpus corpus = shipped_corpus();
  CHECK(corpus.syscalls.size() == 10);
  CHECK(corpus.syscalls.front().name == "sys_set_runnable");
  bool ipc = false, iommu = false, reclaim = false;
  for (const auto& def : corpus.syscalls) {
    ipc = ipc || def.category == "IPC";
    iommu = iommu || def.category == "IOMMU";
    reclaim = reclaim || def.category == "page-reclaim";
    CHECK(!def.description.empty());
    CHECK(!def.sites.empty());
  }
  CHECK(ipc);
  CHECK(iommu);
  CHECK(reclaim);
}

TEST_CASE("privilege injection removes the ppid check") {
  Corpus corpus = shipped_corpus();
  const SyscallDef* def = corpus.find("sys_set_runnable");
  REQUIRE(def != nullptr);
  auto text = inject_bug(*def, BugClass::IncorrectPrivilegeCheck, 1);
  REQUIRE(text.has_value());
  CHECK(text->find("proc->ppid != current") == std::string::npos);
  CHECK(text->find("is_pid_valid") != std::string::npos);
  CHECK(text->find("proc->state != PROC_EMBRYO") != std::string::npos);

  // No refcnt site: the class is simply not applicable.
  CHECK(!inject_bug(*def, BugClass::MemoryLeak, 1).has_value());
}

TEST_CASE("pointer injection swaps the PTE formula family") {
  Corpus corpus = shipped_corpus();
  const SyscallDef* def = corpus.find("sys_alloc_iommu_pt");
  REQUIRE(def != nullptr);
  auto text = inject_bug(*def, BugClass::IncorrectPointerOp, 1);
  REQUIRE(text.has_value());
  // The byte-addressed write is replaced by the shifted-PFN form.
  CHECK(text->find("<< PTE_ADDR_SHIFT") != std::string::npos);
  CHECK(text->find("pages_ptr_to_int / PAGE_SIZE") != std::string::npos);
  CHECK(def->impl_text.find("<< PTE_ADDR_SHIFT") == std::string::npos);
}

TEST_CASE("overflow injection weakens the index bound") {
  Corpus corpus = shipped_corpus();
  const SyscallDef* def = corpus.find("sys_map_page");
  REQUIRE(def != nullptr);
  auto text = inject_bug(*def, BugClass::BufferOverflow, 1);
  REQUIRE(text.has_value());
  CHECK(text->find("index > PAGE_WORDS") != std::string::npos);
  CHECK(text->find("index >= PAGE_WORDS") == std::string::npos);
}

TEST_CASE("flip injection inverts the owner check") {
  Corpus corpus = shipped_corpus();
  const SyscallDef* def = corpus.find("sys_reclaim_page");
  REQUIRE(def != nullptr);
  auto text = inject_bug(*def, BugClass::IncorrectPrivilegeCheck, 1);
  REQUIRE(text.has_value());
  CHECK(text->find("page->owner == current") != std::string::npos);
}

TEST_CASE("build_benchmark is deterministic and correctly sized") {
  Corpus corpus = shipped_corpus();
  auto tasks = build_benchmark(corpus, 1);
  CHECK(tasks.size() == 42);  // 10 correct + 32 injected per the site table
  int correct = 0;
  for (const auto& t : tasks) correct += t.variant == "correct";
  CHECK(correct == 10);
  CHECK(tasks[0].id == "sys_set_runnable__correct");

  auto again = build_benchmark(corpus, 1);
  REQUIRE(again.size() == tasks.size());
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    CHECK(again[i].id == tasks[i].id);
    CHECK(again[i].impl_text == tasks[i].impl_text);
  }
  CHECK(taskset_hash(tasks) == taskset_hash(again));

  // Emission round-trips.
  std::string dir = "/tmp/specforge-test-taskset";
  std::filesystem::remove_all(dir);
  emit_taskset(tasks, dir);
  auto loaded = load_taskset(dir);
  REQUIRE(loaded.size() == tasks.size());
  CHECK(taskset_hash(loaded) == taskset_hash(tasks));

  // Emitting twice produces byte-identical files.
  std::string dir2 = "/tmp/specforge-test-taskset2";
  std::filesystem::remove_all(dir2);
  emit_taskset(tasks, dir2);
  for (const auto& t : tasks) {
    std::ifstream a(dir + "/tasks/" + t.id + ".c");
    std::ifstream b(dir2 + "/tasks/" + t.id + ".c");
    std::string sa((std::istreambuf_iterator<char>(a)),
                   std::istreambuf_iterator<char>());
    std::string sb((std::istreambuf_iterator<char>(b)),
                   std::istreambuf_iterator<char>());
    CHECK(sa == sb);
  }
  std::filesystem::remove_all(dir);
  std::filesystem::remove_all(dir2);
}

TEST_CASE("a syscall with no sites yields only its correct task") {
  Corpus tiny;
  SyscallDef def;
  def.name = "sys_nothing";
  def.category = "process";
  def.description = "does nothing";
  def.impl_text = "int sys_nothing() { return 0; }\n";
  def.spec_text =
      "def sys_nothing(old):\n"
      "    cond = z3.And(True)\n"
      "    return cond, util.If(cond, old, old)\n";
  tiny.syscalls.push_back(def);
  auto tasks = build_benchmark(tiny, 1);
  REQUIRE(tasks.size() == 1);
  CHECK(tasks[0].variant == "correct");
}

TEST_CASE("the quality gate aborts naming the failing variant") {
  Corpus corpus = shipped_corpus();
  DivergenceGate reject_injected = [](const SyscallDef&, const std::string&,
                                      bool expect_equivalent) {
    return expect_equivalent;  // claim every injected variant is equivalent
  };
  CHECK_THROWS_WITH_AS(build_benchmark(corpus, 1, reject_injected),
                       doctest::Contains("not divergent"), ConfigError);
}
