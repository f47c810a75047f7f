// Copyright (c) SpecForge contributors.
// SPDX-License-Identifier: Apache-2.0
#include <sstream>

#include "json.hpp"
#include "specforge/harness.hpp"

namespace specforge {

std::string report_to_json(const EvalReport& report) {
  nlohmann::json j;
  nlohmann::json manifest;
  manifest["provider"] = report.provider;
  manifest["model"] = report.model;
  manifest["method"] = report.method;
  manifest["temperature"] = report.temperature;
  manifest["max_tokens"] = report.max_tokens;
  manifest["seed"] = report.seed;
  manifest["taskset_hash"] = report.taskset_hash;
  manifest["single_variant"] = report.single_variant;
  manifest["partial"] = report.partial;
  manifest["provider_calls"] = report.provider_calls;
  j["manifest"] = std::move(manifest);

  nlohmann::json records = nlohmann::json::array();
  for (const auto& rec : report.records) {
    nlohmann::json r;
    r["task_id"] = rec.task_id;
    r["syscall"] = rec.syscall;
    r["category"] = rec.category;
    r["variant"] = rec.variant;
    r["pass"] = rec.pass;
    r["infra_failed"] = rec.infra_failed;
    if (rec.failure) r["failure"] = rec.failure->label();
    if (!rec.fault_kind.empty()) r["fault_kind"] = rec.fault_kind;
    if (!rec.fault_message.empty()) r["fault_message"] = rec.fault_message;
    r["pattern"] = rec.pattern;
    r["oracle_pattern"] = rec.oracle_pattern;
    r["lint_findings"] = rec.lint_findings;
    if (!rec.prompt_path.empty()) r["prompt_path"] = rec.prompt_path;
    if (!rec.completion_path.empty())
      r["completion_path"] = rec.completion_path;
    records.push_back(std::move(r));
  }
  j["records"] = std::move(records);

  Aggregates agg = compute_aggregates(report);
  nlohmann::json a;
  a["pass_at_1_percent"] = agg.overall.display();
  a["pass_at_1_num"] = agg.overall.num;
  a["pass_at_1_den"] = agg.overall.den;
  nlohmann::json per_variant;
  for (const auto& [name, r] : agg.per_variant) {
    per_variant[name] = {{"percent", r.display()},
                         {"num", r.num},
                         {"den", r.den}};
  }
  a["per_variant"] = std::move(per_variant);
  nlohmann::json per_syscall;
  for (const auto& [name, r] : agg.per_syscall) {
    per_syscall[name] = {{"percent", r.display()},
                         {"num", r.num},
                         {"den", r.den}};
  }
  a["per_syscall"] = std::move(per_syscall);
  nlohmann::json failures;
  for (const auto& [name, count] : agg.failure_counts) failures[name] = count;
  a["failure_distribution"] = std::move(failures);
  a["infra_failed"] = agg.infra_failed;
  j["aggregates"] = std::move(a);
  return j.dump(2) + "\n";
}

EvalReport report_from_json(const std::string& json_text) {
  nlohmann::json j = nlohmann::json::parse(json_text);
  EvalReport report;
  const auto& m = j.at("manifest");
  report.provider = m.at("provider").get<std::string>();
  report.model = m.at("model").get<std::string>();
  report.method = m.at("method").get<std::string>();
  report.temperature = m.at("temperature").get<double>();
  report.max_tokens = m.at("max_tokens").get<int>();
  report.seed = m.at("seed").get<std::uint64_t>();
  report.taskset_hash = m.at("taskset_hash").get<std::string>();
  report.single_variant = m.at("single_variant").get<bool>();
  report.partial = m.at("partial").get<bool>();
  report.provider_calls = m.value("provider_calls", std::uint64_t{0});
  for (const auto& r : j.at("records")) {
    TaskRecord rec;
    rec.task_id = r.at("task_id").get<std::string>();
    rec.syscall = r.at("syscall").get<std::string>();
    rec.category = r.at("category").get<std::string>();
    rec.variant = r.at("variant").get<std::string>();
    rec.pass = r.at("pass").get<bool>();
    rec.infra_failed = r.at("infra_failed").get<bool>();
    if (r.contains("failure"))
      rec.failure = FailureClass::from_label(r.at("failure").get<std::string>());
    if (r.contains("fault_kind"))
      rec.fault_kind = r.at("fault_kind").get<std::string>();
    if (r.contains("fault_message"))
      rec.fault_message = r.at("fault_message").get<std::string>();
    rec.pattern = r.at("pattern").get<std::vector<std::string>>();
    rec.oracle_pattern =
        r.at("oracle_pattern").get<std::vector<std::string>>();
    rec.lint_findings = r.at("lint_findings").get<int>();
    if (r.contains("prompt_path"))
      rec.prompt_path = r.at("prompt_path").get<std::string>();
    if (r.contains("completion_path"))
      rec.completion_path = r.at("completion_path").get<std::string>();
    report.records.push_back(std::move(rec));
  }
  return report;
}

std::string report_to_csv(const EvalReport& report) {
  std::ostringstream out;
  out << "task_id,syscall,category,variant,pass,failure\n";
  for (const auto& rec : report.records) {
    out << rec.task_id << "," << rec.syscall << "," << rec.category << ","
        << rec.variant << "," << (rec.pass ? 1 : 0) << ","
        << (rec.failure ? rec.failure->label() : "") << "\n";
  }
  return out.str();
}

namespace {

const char* kColumnHeads[] = {"Incorrect Ptr", "Incorrect Priv", "Mem Leak",
                              "Buf Ovfl", "Bounds Chk", "Correct"};

}  // namespace

std::string report_to_md(const EvalReport& report) {
  Aggregates agg = compute_aggregates(report);
  std::ostringstream out;
  out << "# Evaluation report\n\n";
  out << "- provider: " << report.provider << "\n";
  out << "- model: " << report.model << "\n";
  out << "- method: " << report.method << "\n";
  out << "- temperature: " << report.temperature << "\n";
  out << "- max_tokens: " << report.max_tokens << "\n";
  out << "- seed: " << report.seed << "\n";
  out << "- taskset: " << report.taskset_hash << "\n\n";

  out << "## Pass@1 (%)\n\n";
  out << "| Model |";
  for (const char* h : kColumnHeads) out << " " << h << " |";
  out << " Total |\n";
  out << "|---|";
  for (std::size_t i = 0; i < std::size(kColumnHeads) + 1; ++i) out << "---|";
  out << "\n";
  out << "| " << report.model << " (" << report.method << ") |";
  for (const auto& [name, r] : agg.per_variant) {
    (void)name;
    out << " " << r.display() << " |";
  }
  out << " " << agg.overall.display() << " |\n\n";

  out << "## Failure distribution\n\n";
  out << "| class | count |\n|---|---|\n";
  for (const char* key :
       {"pass", "format", "syntax/type_sort", "syntax/api_reference",
        "semantic/domain_pattern", "semantic/translation_logic",
        "syntax_rollup", "semantic_rollup"})
    out << "| " << key << " | " << agg.failure_counts.at(key) << " |\n";
  out << "\n## Per-syscall Pass@1\n\n";
  out << "| syscall | pass | total | percent |\n|---|---|---|---|\n";
  for (const auto& [name, r] : agg.per_syscall)
    out << "| " << name << " | " << r.num << " | " << r.den << " | "
        << r.display() << " |\n";
  return out.str();
}

std::string diff_runs_md(const EvalReport& a, const EvalReport& b) {
  if (a.taskset_hash != b.taskset_hash)
    throw ConfigError("diff: runs use different task sets (" +
                      a.taskset_hash + " vs " + b.taskset_hash + ")");
  std::map<std::string, const TaskRecord*> b_by_id;
  for (const auto& rec : b.records) b_by_id[rec.task_id] = &rec;

  struct Row {
    std::uint64_t before = 0, after = 0, total = 0;
    std::vector<std::string> fixed;
    std::vector<std::string> regressed;
  };
  std::vector<std::pair<std::string, Row>> rows;
  auto row_of = [&](const std::string& syscall) -> Row& {
    for (auto& [name, row] : rows)
      if (name == syscall) return row;
    rows.emplace_back(syscall, Row{});
    return rows.back().second;
  };
  for (const auto& ra : a.records) {
    auto it = b_by_id.find(ra.task_id);
    if (it == b_by_id.end())
      throw ConfigError("diff: task " + ra.task_id + " missing from run B");
    const TaskRecord& rb = *it->second;
    Row& row = row_of(ra.syscall);
    ++row.total;
    if (ra.pass) ++row.before;
    if (rb.pass) ++row.after;
    if (!ra.pass && rb.pass) row.fixed.push_back(ra.task_id);
    if (ra.pass && !rb.pass) row.regressed.push_back(ra.task_id);
  }

  std::ostringstream out;
  out << "# Run diff: " << a.model << " (" << a.method << ") -> " << b.model
      << " (" << b.method << ")\n\n";
  out << "| syscall | before | after | delta | flipped |\n";
  out << "|---|---|---|---|---|\n";
  for (const auto& [name, row] : rows) {
    long delta = static_cast<long>(row.after) - static_cast<long>(row.before);
    out << "| " << name << " | " << row.before << "/" << row.total << " | "
        << row.after << "/" << row.total << " | " << (delta >= 0 ? "+" : "")
        << delta << " | ";
    bool first = true;
    for (const auto& id : row.fixed) {
      out << (first ? "" : ", ") << id << " (+)";
      first = false;
    }
    for (const auto& id : row.regressed) {
      out << (first ? "" : ", ") << id << " (-)";
      first = false;
    }
    out << " |\n";
  }
  Ratio pa = pass_at_1(a), pb = pass_at_1(b);
  out << "\nPass@1: " << pa.display() << "% -> " << pb.display() << "%\n";
  return out.str();
}

}  // namespace specforge
