// Copyright (c) SpecForge contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "specforge/kernel.hpp"
#include "specforge/taskgen.hpp"

namespace specforge {

struct GuideEntry {
  std::string source_pattern;
  std::string spec_pattern;
  std::string note;
};

/// One translation-guide category. Ids, titles and tiers are fixed; the
/// entries target this workbench's programming model.
struct GuideCategory {
  int id = 0;
  std::string title;
  std::string tier;  // "syntax" | "domain" | "completeness"
  std::vector<GuideEntry> entries;
};

/// The shipped 15-category guide.
const std::vector<GuideCategory>& standard_guide();

/// Deterministic rendering; with a tier filter, only matching categories.
std::string render_guide(const std::vector<GuideCategory>& guide,
                         const std::optional<std::string>& tier = {});

struct PromptComponents {
  std::string system_text;
  std::string programming_model;
  std::vector<const Task*> few_shot;          // tasks paired with specs
  std::map<std::string, std::string> few_shot_specs;  // syscall -> oracle
};

/// Renders the programming-model segment from the live schema/constants.
std::string render_programming_model(const StateSchema& schema,
                                     const ConstantTable& constants);

struct PromptBundle {
  std::string system;
  std::string programming_model;
  std::string few_shot;
  std::string guide;  // empty when the guide is excluded
  std::string target;
  bool has_guide = false;

  /// Fixed segment order; byte-identical across runs.
  std::string render() const;
  /// chars/4 heuristic, labelled approximate.
  std::map<std::string, std::size_t> size_estimates() const;
};

/// Guide placement is fixed: after the few-shot examples, before the
/// target. With include_guide false every other byte is identical.
PromptBundle assemble_prompt(const Task& task,
                             const PromptComponents& components,
                             const std::string& guide_text,
                             bool include_guide);

struct ProviderError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ModelConfig {
  std::string provider;  // "echo-oracle", "scripted", "mutate-k", "http"
  std::string model;
  std::string endpoint;
  double temperature = 0.0;
  int max_tokens = 4096;
  std::string auth_env;       // environment variable carrying the API key
  std::string schedule_path;  // scripted provider
  int retries = 3;
};

struct Completion {
  std::string text;
  long latency_ms = 0;
  std::string provider_meta;
};

/// Completion providers are stateless across calls; mocks take the task
/// id to look up their scripted behavior, the HTTP provider ignores it.
class Provider {
 public:
  virtual ~Provider() = default;
  virtual Completion complete(const std::string& prompt,
                              const std::string& task_id) = 0;
  virtual std::size_t calls() const = 0;
};

/// Builds a provider. Mocks need the oracle map (task id -> oracle spec
/// text); "scripted" additionally reads cfg.schedule_path (JSONL of
/// {task_id, response_text}); "mutate-k" parses k from the model name and
/// needs the sorted task order.
std::unique_ptr<Provider> make_provider(
    const ModelConfig& cfg,
    const std::map<std::string, std::string>& oracle_by_task,
    const std::vector<std::string>& task_order);

/// Returns the contents of the LAST ```python fenced block, or nullopt
/// (a FormatError downstream).
std::optional<std::string> extract_spec_block(const std::string& completion);

}  // namespace specforge
