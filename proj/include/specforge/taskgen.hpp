// Copyright (c) SpecForge contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "specforge/cfront.hpp"

namespace specforge {

enum class BugClass {
  IncorrectPointerOp,
  IncorrectPrivilegeCheck,
  MemoryLeak,
  BufferOverflow,
  MissingBoundsCheck,
};

inline constexpr BugClass kAllBugClasses[] = {
    BugClass::IncorrectPointerOp, BugClass::IncorrectPrivilegeCheck,
    BugClass::MemoryLeak, BugClass::BufferOverflow,
    BugClass::MissingBoundsCheck};

std::string bug_class_slug(BugClass c);   // "incorrect_pointer_op", ...
std::optional<BugClass> bug_class_from_slug(std::string_view slug);

/// One injectable mutation site inside a syscall's oracle implementation.
struct BugSite {
  BugClass cls = BugClass::IncorrectPointerOp;
  std::string action;       // delete-check | flip-check | weaken-check |
                            // drop-assign | replace-assign
  int index = 0;            // among checks resp. field assignments
  std::string replacement;  // replace-assign: full C statement text
};

struct SyscallDef {
  std::string name;
  std::string category;  // IPC | IOMMU | page-mapping | page-reclaim |
                         // file | process
  std::string description;
  std::string impl_text;
  std::string spec_text;
  std::vector<BugSite> sites;
};

struct Corpus {
  std::vector<SyscallDef> syscalls;
  const SyscallDef* find(std::string_view name) const;
};

/// Loads corpus/<name>/{impl.c, spec.py, sites, desc.txt} for every name
/// listed (in order) in corpus/index. The directory also carries a
/// `category` line in each sites file.
Corpus load_corpus(const std::string& corpus_dir);

struct Task {
  std::string id;
  std::string syscall;
  std::string category;
  std::string variant;  // "correct" or a bug-class slug
  std::string impl_text;
  std::string description;
};

/// Applies the class's site mutation (seed selects among multiple sites of
/// the same class) and reprints the C text. nullopt = NotApplicable.
std::optional<std::string> inject_bug(const SyscallDef& def, BugClass cls,
                                      std::uint64_t seed);

/// Divergence gate supplied by the caller: verdict of an implementation
/// text against the syscall's oracle spec text.
using DivergenceGate =
    std::function<bool(const SyscallDef& def, const std::string& impl_text,
                       bool expect_equivalent)>;

/// One Correct task per syscall plus one task per applicable bug class,
/// in deterministic order. When a gate is supplied, every variant is
/// validated (correct => Verified, injected => Counterexample) and a
/// failing variant aborts generation by throwing ConfigError.
std::vector<Task> build_benchmark(const Corpus& corpus, std::uint64_t seed,
                                  const DivergenceGate& gate = nullptr);

/// FNV-1a over the task set, used as the run manifest's corpus hash.
std::uint64_t taskset_hash(std::span<const Task> tasks);

/// Writes tasks.jsonl plus tasks/<id>.c under out_dir, byte-deterministic.
void emit_taskset(std::span<const Task> tasks, const std::string& out_dir);

/// Reads a taskset back from tasks.jsonl (impl text loaded from the
/// referenced files).
std::vector<Task> load_taskset(const std::string& out_dir);

}  // namespace specforge
