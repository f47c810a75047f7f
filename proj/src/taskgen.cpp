// Copyright (c) SpecForge contributors.
// SPDX-License-Identifier: Apache-2.0
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "specforge/taskgen.hpp"

namespace specforge {

namespace fs = std::filesystem;

std::string bug_class_slug(BugClass c) {
  switch (c) {
    case BugClass::IncorrectPointerOp: return "incorrect_pointer_op";
    case BugClass::IncorrectPrivilegeCheck: return "incorrect_privilege_check";
    case BugClass::MemoryLeak: return "memory_leak";
    case BugClass::BufferOverflow: return "buffer_overflow";
    case BugClass::MissingBoundsCheck: return "missing_bounds_check";
  }
  return "?";
}

std::optional<BugClass> bug_class_from_slug(std::string_view slug) {
  for (BugClass c : kAllBugClasses)
    if (bug_class_slug(c) == slug) return c;
  return std::nullopt;
}

const SyscallDef* Corpus::find(std::string_view name) const {
  for (const auto& s : syscalls)
    if (s.name == name) return &s;
  return nullptr;
}

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw ConfigError("cannot open " + p.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

Corpus load_corpus(const std::string& corpus_dir) {
  Corpus corpus;
  fs::path root(corpus_dir);
  std::istringstream index(slurp(root / "index"));
  std::string name;
  while (std::getline(index, name)) {
    name = trim(name);
    if (name.empty() || name[0] == '#') continue;
    fs::path dir = root / name;
    SyscallDef def;
    def.name = name;
    def.impl_text = slurp(dir / "impl.c");
    def.spec_text = slurp(dir / "spec.py");
    def.description = trim(slurp(dir / "desc.txt"));

    std::istringstream sites(slurp(dir / "sites"));
    std::string line;
    int lineno = 0;
    while (std::getline(sites, line)) {
      ++lineno;
      if (auto hash = line.find('#'); hash != std::string::npos)
        line.erase(hash);
      line = trim(line);
      if (line.empty()) continue;
      auto eq = line.find('=');
      if (eq == std::string::npos)
        throw ConfigError(name + "/sites line " + std::to_string(lineno) +
                          ": expected key = value");
      std::string key = trim(line.substr(0, eq));
      std::string value = trim(line.substr(eq + 1));
      if (key == "category") {
        def.category = value;
        continue;
      }
      auto cls = bug_class_from_slug(key);
      if (!cls)
        throw ConfigError(name + "/sites line " + std::to_string(lineno) +
                          ": unknown bug class '" + key + "'");
      std::istringstream vs(value);
      BugSite site;
      site.cls = *cls;
      vs >> site.action >> site.index;
      std::getline(vs, site.replacement);
      site.replacement = trim(site.replacement);
      def.sites.push_back(std::move(site));
    }
    if (def.category.empty())
      throw ConfigError(name + "/sites: missing category");
    corpus.syscalls.push_back(std::move(def));
  }
  if (corpus.syscalls.empty())
    throw ConfigError("corpus index at " + corpus_dir + " lists no syscalls");
  return corpus;
}

namespace {

CExprPtr flip_comparison(const CExprPtr& cond) {
  auto flipped = std::make_shared<CExpr>(*cond);
  switch (cond->op) {
    case CExprOp::Eq: flipped->op = CExprOp::Ne; return flipped;
    case CExprOp::Ne: flipped->op = CExprOp::Eq; return flipped;
    case CExprOp::Lt: flipped->op = CExprOp::Ge; return flipped;
    case CExprOp::Gt: flipped->op = CExprOp::Le; return flipped;
    case CExprOp::Le: flipped->op = CExprOp::Gt; return flipped;
    case CExprOp::Ge: flipped->op = CExprOp::Lt; return flipped;
    case CExprOp::LNot: return cond->args.at(0);
    default: {
      auto e = std::make_shared<CExpr>();
      e->op = CExprOp::LNot;
      e->args.push_back(cond);
      e->line = cond->line;
      return e;
    }
  }
}

CExprPtr weaken_comparison(const CExprPtr& cond) {
  auto weakened = std::make_shared<CExpr>(*cond);
  switch (cond->op) {
    case CExprOp::Ge: weakened->op = CExprOp::Gt; return weakened;
    case CExprOp::Le: weakened->op = CExprOp::Lt; return weakened;
    default:
      throw ConfigError("weaken-check site needs a >= or <= comparison");
  }
}

}  // namespace

std::optional<std::string> inject_bug(const SyscallDef& def, BugClass cls,
                                      std::uint64_t seed) {
  std::vector<const BugSite*> sites;
  for (const auto& s : def.sites)
    if (s.cls == cls) sites.push_back(&s);
  if (sites.empty()) return std::nullopt;  // NotApplicable
  const BugSite& site = *sites[seed % sites.size()];

  auto parsed = parse_impl(def.impl_text);
  if (!parsed.ok())
    throw ConfigError("corpus implementation for " + def.name +
                      " does not parse: " + parsed.fault->message);
  ImplAst ast = std::move(*parsed.ast);

  // Locate the site target among checks resp. field assignments.
  int check_no = 0, assign_no = 0;
  std::size_t target = ast.stmts.size();
  for (std::size_t i = 0; i < ast.stmts.size(); ++i) {
    bool is_check = std::holds_alternative<CStmtCheck>(ast.stmts[i]);
    bool is_assign = std::holds_alternative<CStmtAssign>(ast.stmts[i]);
    bool check_action = site.action == "delete-check" ||
                        site.action == "flip-check" ||
                        site.action == "weaken-check";
    if (check_action && is_check && check_no++ == site.index) {
      target = i;
      break;
    }
    if (!check_action && is_assign && assign_no++ == site.index) {
      target = i;
      break;
    }
  }
  if (target == ast.stmts.size())
    throw ConfigError(def.name + ": site index " + std::to_string(site.index) +
                      " (" + site.action + ") does not exist");

  if (site.action == "delete-check" || site.action == "drop-assign") {
    ast.stmts.erase(ast.stmts.begin() + static_cast<long>(target));
  } else if (site.action == "flip-check") {
    auto& chk = std::get<CStmtCheck>(ast.stmts[target]);
    chk.cond = flip_comparison(chk.cond);
  } else if (site.action == "weaken-check") {
    auto& chk = std::get<CStmtCheck>(ast.stmts[target]);
    chk.cond = weaken_comparison(chk.cond);
  } else if (site.action == "replace-assign") {
    // Parse the replacement through the statement grammar with the
    // function's own locals in scope.
    std::ostringstream wrapper;
    wrapper << "int t(";
    for (std::size_t i = 0; i < ast.params.size(); ++i) {
      if (i) wrapper << ", ";
      wrapper << ast.params[i].type_name << " " << ast.params[i].name;
    }
    wrapper << ") {\n";
    for (const auto& d : ast.locals)
      wrapper << "struct " << d.struct_name << " *" << d.var << ";\n";
    wrapper << site.replacement << "\nreturn 0;\n}\n";
    auto rp = parse_impl(wrapper.str());
    if (!rp.ok())
      throw ConfigError(def.name + ": replacement statement does not parse: " +
                        rp.fault->message);
    bool replaced = false;
    for (auto& s : rp.ast->stmts)
      if (std::holds_alternative<CStmtAssign>(s)) {
        ast.stmts[target] = std::move(s);
        replaced = true;
        break;
      }
    if (!replaced)
      throw ConfigError(def.name + ": replacement is not an assignment");
  } else {
    throw ConfigError(def.name + ": unknown site action '" + site.action +
                      "'");
  }
  return impl_to_source(ast);
}

std::vector<Task> build_benchmark(const Corpus& corpus, std::uint64_t seed,
                                  const DivergenceGate& gate) {
  std::vector<Task> tasks;
  for (const auto& def : corpus.syscalls) {
    // Correct task first. Oracle C text is reprinted through the same
    // parser/printer as the variants so the task set is format-uniform.
    auto parsed = parse_impl(def.impl_text);
    if (!parsed.ok())
      throw ConfigError("corpus implementation for " + def.name +
                        " does not parse: " + parsed.fault->message);
    Task correct;
    correct.id = def.name + "__correct";
    correct.syscall = def.name;
    correct.category = def.category;
    correct.variant = "correct";
    correct.impl_text = impl_to_source(*parsed.ast);
    correct.description = def.description;
    if (gate && !gate(def, correct.impl_text, /*expect_equivalent=*/true))
      throw ConfigError("quality gate: oracle pair for " + def.name +
                        " does not verify");
    tasks.push_back(std::move(correct));

    for (BugClass cls : kAllBugClasses) {
      auto text = inject_bug(def, cls, seed);
      if (!text) continue;  // NotApplicable: fewer variants for this syscall
      Task t;
      t.id = def.name + "__" + bug_class_slug(cls);
      t.syscall = def.name;
      t.category = def.category;
      t.variant = bug_class_slug(cls);
      t.impl_text = *text;
      t.description = def.description;
      if (gate && !gate(def, t.impl_text, /*expect_equivalent=*/false))
        throw ConfigError("quality gate: variant " + t.id +
                          " is not divergent from the oracle spec");
      tasks.push_back(std::move(t));
    }
  }
  return tasks;
}

std::uint64_t taskset_hash(std::span<const Task> tasks) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&](const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ULL;
    }
    h ^= 0xff;
    h *= 1099511628211ULL;
  };
  for (const auto& t : tasks) {
    mix(t.id);
    mix(t.impl_text);
    mix(t.description);
  }
  return h;
}

void emit_taskset(std::span<const Task> tasks, const std::string& out_dir) {
  fs::path root(out_dir);
  fs::create_directories(root / "tasks");
  std::ofstream jsonl(root / "tasks.jsonl");
  for (const auto& t : tasks) {
    std::string rel = "tasks/" + t.id + ".c";
    std::ofstream impl(root / rel);
    impl << t.impl_text;
    nlohmann::json j;
    j["id"] = t.id;
    j["syscall"] = t.syscall;
    j["category"] = t.category;
    j["variant"] = t.variant;
    j["impl_path"] = rel;
    j["description"] = t.description;
    jsonl << j.dump() << "\n";
  }
}

std::vector<Task> load_taskset(const std::string& out_dir) {
  fs::path root(out_dir);
  std::ifstream jsonl(root / "tasks.jsonl");
  if (!jsonl)
    throw ConfigError("cannot open " + (root / "tasks.jsonl").string());
  std::vector<Task> tasks;
  std::string line;
  while (std::getline(jsonl, line)) {
    if (trim(line).empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line);
    Task t;
    t.id = j.at("id").get<std::string>();
    t.syscall = j.at("syscall").get<std::string>();
    t.category = j.at("category").get<std::string>();
    t.variant = j.at("variant").get<std::string>();
    t.description = j.at("description").get<std::string>();
    t.impl_text = slurp(root / j.at("impl_path").get<std::string>());
    tasks.push_back(std::move(t));
  }
  return tasks;
}

}  // namespace specforge
