// Copyright (c) SpecForge contributors.
// SPDX-License-Identifier: Apache-2.0
#include <sstream>

#include "specforge/promptkit.hpp"

namespace specforge {

std::string render_guide(const std::vector<GuideCategory>& guide,
                         const std::optional<std::string>& tier) {
  std::ostringstream out;
  for (const auto& cat : guide) {
    if (tier && cat.tier != *tier) continue;
    out << "## " << cat.id << ". " << cat.title << "\n";
    for (const auto& e : cat.entries) {
      if (!e.source_pattern.empty() && !e.spec_pattern.empty())
        out << "- `" << e.source_pattern << "` -> `" << e.spec_pattern
            << "`\n";
      else if (!e.spec_pattern.empty())
        out << "- `" << e.spec_pattern << "`\n";
      if (!e.note.empty()) out << "  " << e.note << "\n";
    }
    out << "\n";
  }
  return out.str();
}

std::string render_programming_model(const StateSchema& schema,
                                     const ConstantTable& constants) {
  std::ostringstream out;
  const KernelConfig& cfg = schema.config();
  out << "The kernel state is a record with these fields (all cells are "
      << cfg.word_width << "-bit words):\n";
  out << "- current: pid of the running process\n";
  out << "- pages_ptr_to_int: base address of the page array\n";
  out << "- procs[pid] for pid in 0.." << (cfg.nproc - 1)
      << ": { state, ppid, ipc_from, nr_pages, offs[fd] for fd in 0.."
      << (cfg.nofile - 1) << " }\n";
  out << "- pages[pn] for pn in 0.." << (cfg.npage - 1)
      << ": { type, owner, refcnt, data[i] for i in 0.."
      << (cfg.page_words - 1) << " }\n\n";
  out << "Scalar fields read as attributes (old.procs[pid].state); map "
         "fields read with parentheses (old.pages[pn].data(i)) and write "
         "with brackets (new.pages[pn].data[i] = v).\n\n";
  out << "Constants (dt.* namespace):\n";
  for (const auto& [name, value] : constants.entries()) {
    if (name.rfind("errno.", 0) == 0) continue;
    out << "- dt." << name << " = " << value << "\n";
  }
  out << "\nA specification is a function def f(old, args...) returning "
         "(cond, util.If(cond, new, old)) where cond is the pre-condition "
         "and new = old.copy() carries the state updates.\n";
  return out.str();
}

std::string PromptBundle::render() const {
  std::string out;
  out += "# System Prompt:\n";
  out += system;
  out += "\n# Programming Model:\n";
  out += programming_model;
  out += "\n# Examples:\n";
  out += few_shot;
  if (has_guide) {
    out += "\n# Translation Guide:\n";
    out += guide;
  }
  out += "\n# Target Task:\n";
  out += target;
  return out;
}

std::map<std::string, std::size_t> PromptBundle::size_estimates() const {
  // chars/4: approximate token counts, no tokenizer dependence.
  std::map<std::string, std::size_t> est;
  est["system_approx_tokens"] = system.size() / 4;
  est["programming_model_approx_tokens"] = programming_model.size() / 4;
  est["few_shot_approx_tokens"] = few_shot.size() / 4;
  est["guide_approx_tokens"] = guide.size() / 4;
  est["target_approx_tokens"] = target.size() / 4;
  est["total_approx_tokens"] = render().size() / 4;
  return est;
}

PromptBundle assemble_prompt(const Task& task,
                             const PromptComponents& components,
                             const std::string& guide_text,
                             bool include_guide) {
  PromptBundle b;
  b.system = components.system_text;
  b.programming_model = components.programming_model;

  std::ostringstream shots;
  int n = 0;
  for (const Task* shot : components.few_shot) {
    auto it = components.few_shot_specs.find(shot->syscall);
    if (it == components.few_shot_specs.end())
      throw ConfigError("no oracle spec for few-shot syscall " +
                        shot->syscall);
    shots << "Example " << ++n << ": " << shot->syscall << "\n";
    shots << "[Description]: " << shot->description << "\n";
    shots << "[C Code]:\n```c\n" << shot->impl_text << "```\n";
    shots << "[Specification]:\n```python\n" << it->second << "```\n\n";
  }
  b.few_shot = shots.str();

  if (include_guide) {
    b.guide = guide_text;
    b.has_guide = true;
  }

  std::ostringstream target;
  target << "Given system call " << task.syscall << ".\n";
  target << "[Description]: " << task.description << "\n";
  target << "[C Code]:\n```c\n" << task.impl_text << "```\n";
  target << "[Specification]: # generate this\n";
  b.target = target.str();
  return b;
}

std::optional<std::string> extract_spec_block(const std::string& completion) {
  std::istringstream in(completion);
  std::string line;
  std::optional<std::string> last;
  std::string current;
  bool inside = false;
  auto trimmed = [](const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    std::string t = trimmed(line);
    if (!inside && t == "```python") {
      inside = true;
      current.clear();
      continue;
    }
    if (inside && t == "```") {
      inside = false;
      last = current;
      continue;
    }
    if (inside) current += line + "\n";
  }
  return last;
}

}  // namespace specforge
