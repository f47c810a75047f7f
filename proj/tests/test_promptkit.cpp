// Copyright (c) SpecForge contributors.
// SPDX-License-Identifier: Apache-2.0
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "specforge/promptkit.hpp"
#include "specforge/speclang.hpp"

using namespace specforge;

namespace {

struct Fixture {
  KernelConfig config;
  StateSchema schema{config};
  ConstantTable constants = ConstantTable::standard(config);
  Corpus corpus = load_corpus(std::string(SPECFORGE_SHARE_DIR) + "/corpus");
  std::vector<Task> tasks = build_benchmark(corpus, 1);

  PromptComponents components() {
    PromptComponents comp;
    comp.system_text = "Generate the specification in a ```python block.\n";
    comp.programming_model = render_programming_model(schema, constants);
    for (const auto& t : tasks)
      if (t.variant == "correct" &&
          (t.syscall == "sys_set_runnable" || t.syscall == "sys_alloc_page"))
        comp.few_shot.push_back(&t);
    comp.few_shot_specs["sys_set_runnable"] =
        corpus.find("sys_set_runnable")->spec_text;
    comp.few_shot_specs["sys_alloc_page"] =
        corpus.find("sys_alloc_page")->spec_text;
    return comp;
  }

  std::map<std::string, std::string> oracle_by_task() {
    std::map<std::string, std::string> m;
    for (const auto& t : tasks) m[t.id] = corpus.find(t.syscall)->spec_text;
    return m;
  }

  std::vector<std::string> task_order() {
    std::vector<std::string> ids;
    for (const auto& t : tasks) ids.push_back(t.id);
    return ids;
  }
};

const char* kExpectedTitles[] = {
    "Specification template", "Pre-condition translation",
    "Post-condition patterns", "Map field syntax", "Operator rules",
    "Constant prefixes", "Page table PTE formulas", "Shadow metadata",
    "Reference counting", "TLB flush", "State pointers",
    "Field name mapping", "C helper functions", "Available helpers",
    "IPC system calls"};

}  // namespace

TEST_CASE("the guide renders all fifteen category headings in order") {
  std::string text = render_guide(standard_guide());
  std::size_t pos = 0;
  for (int id = 1; id <= 15; ++id) {
    std::string heading =
        "## " + std::to_string(id) + ". " + kExpectedTitles[id - 1];
    std::size_t found = text.find(heading);
    REQUIRE_MESSAGE(found != std::string::npos, heading);
    CHECK(found >= pos);
    pos = found;
  }
  // Exactly 15 headings.
  int headings = 0;
  for (std::size_t i = text.find("## "); i != std::string::npos;
       i = text.find("## ", i + 1))
    ++headings;
  CHECK(headings == 15);

  // Tiers partition the ids 1-6 / 7-12 / 13-15.
  std::string syntax_only = render_guide(standard_guide(), std::string("syntax"));
  CHECK(syntax_only.find("## 1. ") != std::string::npos);
  CHECK(syntax_only.find("## 6. ") != std::string::npos);
  CHECK(syntax_only.find("## 7. ") == std::string::npos);
  std::string domain_only = render_guide(standard_guide(), std::string("domain"));
  CHECK(domain_only.find("## 7. ") != std::string::npos);
  CHECK(domain_only.find("## 12. ") != std::string::npos);
  CHECK(domain_only.find("## 13. ") == std::string::npos);

  CHECK(render_guide({}).empty());
}

TEST_CASE("guide toggling changes exactly the guide segment") {
  Fixture fx;
  PromptComponents comp = fx.components();
  std::string guide = render_guide(standard_guide());
  for (const auto& task : fx.tasks) {
    PromptBundle with = assemble_prompt(task, comp, guide, true);
    PromptBundle without = assemble_prompt(task, comp, guide, false);
    std::string a = with.render();
    std::string b = without.render();
    // The diff is one contiguous inserted segment containing the guide,
    // positioned after the examples and before the target.
    std::size_t prefix = 0;
    while (prefix < a.size() && prefix < b.size() && a[prefix] == b[prefix])
      ++prefix;
    std::size_t suffix = 0;
    while (suffix < a.size() - prefix && suffix < b.size() - prefix &&
           a[a.size() - 1 - suffix] == b[b.size() - 1 - suffix])
      ++suffix;
    std::string inserted = a.substr(prefix, a.size() - prefix - suffix);
    CHECK(b.size() + inserted.size() == a.size());
    CHECK(inserted.find(guide) != std::string::npos);
    CHECK(a.find("# Examples:") < a.find("# Translation Guide:"));
    CHECK(a.find("# Translation Guide:") < a.find("# Target Task:"));
    CHECK(b.find("# Translation Guide:") == std::string::npos);
    // Determinism.
    CHECK(assemble_prompt(task, comp, guide, true).render() == a);
  }
}

TEST_CASE("prompts assemble with an empty few-shot list") {
  Fixture fx;
  PromptComponents comp = fx.components();
  comp.few_shot.clear();
  PromptBundle b = assemble_prompt(fx.tasks[0], comp,
                                   render_guide(standard_guide()), true);
  CHECK(b.few_shot.empty());
  CHECK(b.render().find("# Target Task:") != std::string::npos);
  auto est = b.size_estimates();
  CHECK(est.at("few_shot_approx_tokens") == 0);
  CHECK(est.at("total_approx_tokens") > 0);
}

TEST_CASE("fenced block extraction takes the last python block") {
  CHECK(*extract_spec_block("reasoning\n```python\nDEF_TEXT\n```\n") ==
        "DEF_TEXT\n");
  CHECK(*extract_spec_block(
            "```python\nfirst\n```\nmore\n```python\nsecond\n```\n") ==
        "second\n");
  CHECK(!extract_spec_block("pure prose, no fence").has_value());
  CHECK(!extract_spec_block("```c\nnot python\n```\n").has_value());
  // An unterminated fence does not yield a block.
  CHECK(!extract_spec_block("```python\nunclosed\n").has_value());
}

TEST_CASE("echo-oracle returns the oracle wrapped in a fence") {
  Fixture fx;
  ModelConfig cfg;
  cfg.provider = "echo-oracle";
  cfg.model = "echo-oracle";
  auto provider = make_provider(cfg, fx.oracle_by_task(), fx.task_order());
  Completion c = provider->complete("prompt", "sys_set_runnable__correct");
  auto block = extract_spec_block(c.text);
  REQUIRE(block.has_value());
  CHECK(*block == fx.corpus.find("sys_set_runnable")->spec_text);
  CHECK(provider->calls() == 1);
  CHECK_THROWS_AS(provider->complete("prompt", "nope"), ProviderError);
}

TEST_CASE("scripted provider follows its schedule file") {
  Fixture fx;
  std::string path = "/tmp/specforge-test-schedule.jsonl";
  {
    std::ofstream out(path);
    out << R"({"task_id": "a", "response_text": "```python\nX\n```"})"
        << "\n";
    out << R"({"task_id": "b", "response_text": "no fence here"})" << "\n";
  }
  ModelConfig cfg;
  cfg.provider = "scripted";
  cfg.model = "scripted";
  cfg.schedule_path = path;
  auto provider = make_provider(cfg, {}, {});
  CHECK(provider->complete("p", "a").text.find("X") != std::string::npos);
  CHECK(provider->complete("p", "b").text == "no fence here");
  CHECK_THROWS_AS(provider->complete("p", "missing"), ProviderError);
  std::filesystem::remove(path);
}

TEST_CASE("mutate-k weakens every k-th task deterministically") {
  Fixture fx;
  ModelConfig cfg;
  cfg.provider = "mutate-k";
  cfg.model = "mutate-3";
  auto oracle = fx.oracle_by_task();
  auto order = fx.task_order();
  auto provider = make_provider(cfg, oracle, order);
  int mutated = 0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    Completion c = provider->complete("p", order[i]);
    auto block = extract_spec_block(c.text);
    REQUIRE(block.has_value());
    bool is_mutated = *block != oracle[order[i]];
    if (i % 3 == 2) {
      CHECK(is_mutated);
      ++mutated;
    } else {
      // Reprinting normalizes whitespace, so compare parsed ASTs.
      auto a = parse_spec(*block);
      auto b = parse_spec(oracle[order[i]]);
      REQUIRE(a.ok());
      REQUIRE(b.ok());
      CHECK(ast_equal(*a.ast, *b.ast));
    }
  }
  CHECK(mutated == static_cast<int>(order.size()) / 3);
  CHECK(provider->calls() == order.size());

  ModelConfig bad = cfg;
  bad.model = "mutate-x";
  CHECK_THROWS_AS(make_provider(bad, oracle, order), ConfigError);
}

TEST_CASE("the programming model renders from the live schema") {
  Fixture fx;
  std::string text = render_programming_model(fx.schema, fx.constants);
  CHECK(text.find("procs[pid]") != std::string::npos);
  CHECK(text.find("dt.NPROC = 4") != std::string::npos);
  CHECK(text.find("dt.proc_state.PROC_RUNNING = 3") != std::string::npos);
  CHECK(text.find("errno") == std::string::npos);  // not part of the surface
}

TEST_CASE("an unreachable endpoint raises ProviderError after retries") {
  ModelConfig cfg;
  cfg.provider = "http";
  cfg.model = "m";
  cfg.endpoint = "http://127.0.0.1:9/v1/chat/completions";  // discard port
  cfg.auth_env = "SPECFORGE_TEST_KEY";
  cfg.retries = 2;
  setenv("SPECFORGE_TEST_KEY", "dummy", 1);
  auto provider = make_provider(cfg, {}, {});
  CHECK_THROWS_AS(provider->complete("p", "t"), ProviderError);

  ModelConfig nokey = cfg;
  nokey.auth_env = "SPECFORGE_TEST_KEY_UNSET";
  unsetenv("SPECFORGE_TEST_KEY_UNSET");
  CHECK_THROWS_AS(make_provider(nokey, {}, {}), ConfigError);
}
