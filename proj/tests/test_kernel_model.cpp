// Copyright (c) SpecForge contributors.
// SPDX-License-Identifier: Apache-2.0
#include <random>

#include "doctest.h"
#include "specforge/kernel.hpp"

using namespace specforge;

namespace {

Word rd(const KernelState& s, const StateSchema& schema, const char* root,
        const char* field, std::initializer_list<Word> idx) {
  return read_field(s, schema, FieldPath{root, field},
                    std::span<const Word>(idx.begin(), idx.size()));
}

KernelState wr(const KernelState& s, const StateSchema& schema,
               const char* root, const char* field,
               std::initializer_list<Word> idx, Word v) {
  return write_field(s, schema, FieldPath{root, field},
                     std::span<const Word>(idx.begin(), idx.size()), v);
}

}  // namespace

TEST_CASE("canonical state matches the shipped fixture") {
  StateSchema schema{KernelConfig{}};
  KernelState s0 = canonical_state(schema);
  CHECK(rd(s0, schema, "current", "", {}) == 1);
  CHECK(rd(s0, schema, "pages_ptr_to_int", "", {}) == 0x1000);
  CHECK(rd(s0, schema, "procs", "state", {2}) == kProcEmbryo);
  CHECK(rd(s0, schema, "procs", "ppid", {2}) == 1);
  CHECK(rd(s0, schema, "procs", "ipc_from", {2}) == 0);
  CHECK(rd(s0, schema, "procs", "nr_pages", {2}) == 0);
  for (Word p : {Word{0}, Word{1}, Word{3}})
    CHECK(rd(s0, schema, "procs", "state", {p}) == kProcUnused);
  for (Word pn = 0; pn < 4; ++pn) {
    CHECK(rd(s0, schema, "pages", "type", {pn}) == kPageTypeFree);
    CHECK(rd(s0, schema, "pages", "owner", {pn}) == 0);
    CHECK(rd(s0, schema, "pages", "refcnt", {pn}) == 0);
  }
  // Two calls with the same config are bit-identical.
  CHECK(canonical_state(schema) == s0);
}

TEST_CASE("copy independence") {
  StateSchema schema{KernelConfig{}};
  KernelState s0 = canonical_state(schema);
  KernelState copy = copy_state(s0);
  CHECK(copy == s0);
  KernelState mutated = wr(copy, schema, "procs", "state", {2}, kProcRunnable);
  CHECK(rd(s0, schema, "procs", "state", {2}) == kProcEmbryo);
  CHECK(rd(mutated, schema, "procs", "state", {2}) == kProcRunnable);
  KernelState third = copy_state(mutated);
  CHECK(third == mutated);
  CHECK(!(third == s0));
}

TEST_CASE("read and write respect domains") {
  StateSchema schema{KernelConfig{}};
  KernelState s0 = canonical_state(schema);
  CHECK(rd(s0, schema, "pages", "type", {0}) == 0);  // PAGE_TYPE_FREE
  CHECK_THROWS_AS(rd(s0, schema, "procs", "state", {7}), DomainError);
  CHECK_THROWS_AS(rd(s0, schema, "bogus", "", {}), DomainError);
  CHECK_THROWS_AS(wr(s0, schema, "pages", "data", {1, 9}, 1), DomainError);

  KernelState w1 = wr(s0, schema, "procs", "state", {2}, kProcRunnable);
  CHECK(rd(w1, schema, "procs", "state", {2}) == kProcRunnable);
  KernelState w2 = wr(s0, schema, "pages", "data", {1, 3}, 0xFF);
  CHECK(rd(w2, schema, "pages", "data", {1, 2}) == 0);
  // Exactly one differing cell.
  int diffs = 0;
  for (std::size_t c = 0; c < s0.size(); ++c)
    if (w2.cell(c) != s0.cell(c)) ++diffs;
  CHECK(diffs == 1);
}

TEST_CASE("constant table") {
  ConstantTable t = ConstantTable::standard(KernelConfig{});
  CHECK(t.find("proc_state.PROC_RUNNING") == Word{3});
  CHECK(t.find("page_type.PAGE_TYPE_FREE") == Word{0});
  CHECK(t.find("NPROC") == Word{4});
  CHECK(t.find("PAGE_SIZE") == Word{4096});
  CHECK(!t.find("proc_state.PROC_BOGUS").has_value());
  CHECK(t.find_bare("EINVAL") == Word{22});

  // Enum members within a family are pairwise distinct.
  const char* procs[] = {"proc_state.PROC_UNUSED", "proc_state.PROC_EMBRYO",
                         "proc_state.PROC_RUNNABLE",
                         "proc_state.PROC_RUNNING"};
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      CHECK(*t.find(procs[i]) != *t.find(procs[j]));
  const char* pages[] = {"page_type.PAGE_TYPE_FREE",
                         "page_type.PAGE_TYPE_FRAME",
                         "page_type.PAGE_TYPE_X86_PT",
                         "page_type.PAGE_TYPE_IOMMU_PT"};
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      CHECK(*t.find(pages[i]) != *t.find(pages[j]));
}

TEST_CASE("schema layout and symbol names") {
  StateSchema schema{KernelConfig{}};
  CHECK(schema.cell_count() == 62);
  CHECK(schema.cell_name(0) == "current");
  CHECK(schema.cell_name(1) == "pages_ptr_to_int");
  const FieldInfo* st = schema.find(FieldPath{"procs", "state"});
  REQUIRE(st != nullptr);
  Word idx2[] = {2};
  CHECK(schema.cell_name(*schema.cell_index(*st, idx2)) == "procs_2_state");
  const FieldInfo* data = schema.find(FieldPath{"pages", "data"});
  Word idx13[] = {1, 3};
  CHECK(schema.cell_name(*schema.cell_index(*data, idx13)) ==
        "pages_1_data_3");
}

TEST_CASE("config file parsing and validation") {
  KernelConfig cfg = KernelConfig::from_text(
      "word_width = 64\nnproc = 4\nnpage = 4\nnofile = 4\n"
      "page_words = 4\npage_size = 4096\npte_addr_shift = 12\n");
  CHECK(cfg == KernelConfig{});
  CHECK_THROWS_AS(KernelConfig::from_text("page_size = 1000\n"), ConfigError);
  CHECK_THROWS_AS(KernelConfig::from_text("nproc = 1\n"), ConfigError);
  CHECK_THROWS_AS(KernelConfig::from_text("frobs = 2\n"), ConfigError);
  KernelConfig small = KernelConfig::from_text("word_width = 16\n");
  CHECK(small.mask() == 0xFFFF);
}

TEST_CASE("state JSON is canonical and round-trips") {
  StateSchema schema{KernelConfig{}};
  KernelState s0 = canonical_state(schema);
  std::string json = state_to_json(s0, schema);
  // Sorted keys: current < pages < pages_ptr_to_int < procs.
  auto p1 = json.find("\"current\"");
  auto p2 = json.find("\"pages\"");
  auto p3 = json.find("\"pages_ptr_to_int\"");
  auto p4 = json.find("\"procs\"");
  CHECK(p1 < p2);
  CHECK(p2 < p3);
  CHECK(p3 < p4);
  CHECK(state_from_json(json, schema) == s0);
  CHECK(state_to_json(s0, schema) == json);

  // Golden bytes for the shipped fixture.
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : json) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  CHECK(json.size() == 1244);
  CHECK(h == 0xe66a65ad520cb868ULL);
}

TEST_CASE("read-after-write and copy independence hold on random cases") {
  StateSchema schema{KernelConfig{}};
  const KernelConfig& cfg = schema.config();
  std::mt19937_64 rng(7);
  KernelState s = canonical_state(schema);
  for (int i = 0; i < 1000; ++i) {
    const auto& fields = schema.fields();
    const FieldInfo& f = fields[rng() % fields.size()];
    Word idx[2] = {0, 0};
    for (unsigned d = 0; d < f.arity; ++d) idx[d] = rng() % f.dims[d];
    std::span<const Word> indices(idx, f.arity);
    Word v = rng();

    KernelState before = s;
    KernelState after = write_field(s, schema, f.path, indices, v);
    // Read-after-write returns the written value.
    CHECK(read_field(after, schema, f.path, indices) == cfg.truncate(v));
    // Frame: every other cell is untouched.
    auto cell = *schema.cell_index(f, indices);
    for (std::size_t c = 0; c < s.size(); ++c)
      if (c != cell) CHECK(after.cell(c) == before.cell(c));
    // Copy independence: the original is bit-identical.
    CHECK(s == before);
    s = after;
  }
}
