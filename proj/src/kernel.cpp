// Copyright (c) SpecForge contributors.
// SPDX-License-Identifier: Apache-2.0
#include "specforge/kernel.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace specforge {

void KernelConfig::validate() const {
  if (word_width < 8 || word_width > 64)
    throw ConfigError("word_width must be in [8, 64]");
  auto check_count = [&](const char* name, Word v) {
    if (v < 2) throw ConfigError(std::string(name) + " must be >= 2");
    if (v > mask())
      throw ConfigError(std::string(name) + " is not representable in " +
                        std::to_string(word_width) + " bits");
  };
  check_count("nproc", nproc);
  check_count("npage", npage);
  check_count("nofile", nofile);
  check_count("page_words", page_words);
  check_count("page_size", page_size);
  if ((page_size & (page_size - 1)) != 0)
    throw ConfigError("page_size must be a power of two");
  if (pte_addr_shift >= word_width)
    throw ConfigError("pte_addr_shift must be smaller than word_width");
}

KernelConfig KernelConfig::from_text(std::string_view text) {
  KernelConfig cfg;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) continue;
    std::string rest;
    ls >> rest;
    if (rest == "=") ls >> rest;
    Word value = 0;
    try {
      value = std::stoull(rest, nullptr, 0);
    } catch (const std::exception&) {
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": expected a numeric value for '" + key + "'");
    }
    if (key == "word_width") cfg.word_width = static_cast<unsigned>(value);
    else if (key == "nproc") cfg.nproc = value;
    else if (key == "npage") cfg.npage = value;
    else if (key == "nofile") cfg.nofile = value;
    else if (key == "page_words") cfg.page_words = value;
    else if (key == "page_size") cfg.page_size = value;
    else if (key == "pte_addr_shift") cfg.pte_addr_shift = value;
    else
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": unknown key '" + key + "'");
  }
  cfg.validate();
  return cfg;
}

KernelConfig KernelConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_text(buf.str());
}

ConstantTable ConstantTable::standard(const KernelConfig& config) {
  ConstantTable t;
  auto add = [&](std::string name, Word v) {
    t.entries_.emplace_back(std::move(name), config.truncate(v));
  };
  add("NPROC", config.nproc);
  add("NPAGE", config.npage);
  add("NOFILE", config.nofile);
  add("PAGE_WORDS", config.page_words);
  add("PAGE_SIZE", config.page_size);
  add("PTE_ADDR_SHIFT", config.pte_addr_shift);
  add("proc_state.PROC_UNUSED", kProcUnused);
  add("proc_state.PROC_EMBRYO", kProcEmbryo);
  add("proc_state.PROC_RUNNABLE", kProcRunnable);
  add("proc_state.PROC_RUNNING", kProcRunning);
  add("page_type.PAGE_TYPE_FREE", kPageTypeFree);
  add("page_type.PAGE_TYPE_FRAME", kPageTypeFrame);
  add("page_type.PAGE_TYPE_X86_PT", kPageTypeX86Pt);
  add("page_type.PAGE_TYPE_IOMMU_PT", kPageTypeIommuPt);
  add("errno.ESRCH", 3);
  add("errno.EBADF", 9);
  add("errno.EACCES", 13);
  add("errno.EBUSY", 16);
  add("errno.EINVAL", 22);
  return t;
}

std::optional<Word> ConstantTable::find(std::string_view dotted_name) const {
  for (const auto& [name, value] : entries_)
    if (name == dotted_name) return value;
  return std::nullopt;
}

std::optional<Word> ConstantTable::find_bare(std::string_view name) const {
  for (const auto& [dotted, value] : entries_) {
    auto dot = dotted.rfind('.');
    std::string_view leaf =
        dot == std::string::npos ? std::string_view(dotted)
                                 : std::string_view(dotted).substr(dot + 1);
    if (leaf == name) return value;
  }
  return std::nullopt;
}

StateSchema::StateSchema(const KernelConfig& config) : config_(config) {
  config_.validate();
  auto add = [&](std::string root, std::string field, unsigned arity, Word d0,
                 Word d1) {
    FieldInfo f;
    f.path = FieldPath{std::move(root), std::move(field)};
    f.arity = arity;
    f.dims[0] = d0;
    f.dims[1] = d1;
    f.base = cell_count_;
    f.span = static_cast<std::size_t>(arity == 0 ? 1
                                      : arity == 1 ? d0
                                                   : d0 * d1);
    cell_count_ += f.span;
    fields_.push_back(std::move(f));
  };
  add("current", "", 0, 0, 0);
  add("pages_ptr_to_int", "", 0, 0, 0);
  add("procs", "state", 1, config_.nproc, 0);
  add("procs", "ppid", 1, config_.nproc, 0);
  add("procs", "ipc_from", 1, config_.nproc, 0);
  add("procs", "nr_pages", 1, config_.nproc, 0);
  add("procs", "offs", 2, config_.nproc, config_.nofile);
  add("pages", "type", 1, config_.npage, 0);
  add("pages", "owner", 1, config_.npage, 0);
  add("pages", "refcnt", 1, config_.npage, 0);
  add("pages", "data", 2, config_.npage, config_.page_words);
}

const FieldInfo* StateSchema::find(const FieldPath& path) const {
  for (const auto& f : fields_)
    if (f.path == path) return &f;
  return nullptr;
}

std::optional<std::size_t> StateSchema::cell_index(
    const FieldInfo& field, std::span<const Word> indices) const {
  if (indices.size() != field.arity) return std::nullopt;
  std::size_t off = 0;
  for (unsigned i = 0; i < field.arity; ++i) {
    if (indices[i] >= field.dims[i]) return std::nullopt;
    off = off * static_cast<std::size_t>(field.dims[i]) +
          static_cast<std::size_t>(indices[i]);
  }
  return field.base + off;
}

std::string StateSchema::cell_name(std::size_t cell) const {
  for (const auto& f : fields_) {
    if (cell < f.base || cell >= f.base + f.span) continue;
    std::size_t off = cell - f.base;
    std::string name = f.path.root;
    if (f.arity == 2) {
      name += "_" + std::to_string(off / f.dims[1]);
      name += "_" + f.path.field;
      name += "_" + std::to_string(off % f.dims[1]);
    } else if (f.arity == 1) {
      name += "_" + std::to_string(off) + "_" + f.path.field;
    }
    return name;
  }
  throw std::out_of_range("cell index out of range");
}

KernelState canonical_state(const StateSchema& schema) {
  KernelState s(schema);
  auto set = [&](const char* root, const char* field,
                 std::initializer_list<Word> idx, Word v) {
    const FieldInfo* f = schema.find(FieldPath{root, field});
    auto cell = schema.cell_index(*f, std::span<const Word>(idx.begin(),
                                                            idx.size()));
    s.set_cell(*cell, v);
  };
  set("current", "", {}, 1);
  set("pages_ptr_to_int", "", {}, 0x1000);
  set("procs", "state", {2}, kProcEmbryo);
  set("procs", "ppid", {2}, 1);
  return s;
}

namespace {

std::size_t checked_cell(const StateSchema& schema, const FieldPath& path,
                         std::span<const Word> indices) {
  const FieldInfo* f = schema.find(path);
  if (!f) throw DomainError("no such field: " + path.str());
  auto cell = schema.cell_index(*f, indices);
  if (!cell) {
    std::string msg = "index out of domain for " + path.str() + " (";
    for (std::size_t i = 0; i < indices.size(); ++i)
      msg += (i ? ", " : "") + std::to_string(indices[i]);
    throw DomainError(msg + ")");
  }
  return *cell;
}

}  // namespace

Word read_field(const KernelState& s, const StateSchema& schema,
                const FieldPath& path, std::span<const Word> indices) {
  return s.cell(checked_cell(schema, path, indices));
}

KernelState write_field(const KernelState& s, const StateSchema& schema,
                        const FieldPath& path, std::span<const Word> indices,
                        Word v) {
  std::size_t cell = checked_cell(schema, path, indices);
  KernelState out = s;
  out.set_cell(cell, schema.config().truncate(v));
  return out;
}

std::string state_to_json(const KernelState& s, const StateSchema& schema) {
  nlohmann::json j;
  const KernelConfig& cfg = schema.config();
  auto cell = [&](const char* root, const char* field, Word i0, Word i1,
                  unsigned arity) {
    const FieldInfo* f = schema.find(FieldPath{root, field});
    Word idx[2] = {i0, i1};
    return s.cell(*schema.cell_index(*f, std::span<const Word>(idx, arity)));
  };
  j["current"] = cell("current", "", 0, 0, 0);
  j["pages_ptr_to_int"] = cell("pages_ptr_to_int", "", 0, 0, 0);
  for (Word p = 0; p < cfg.nproc; ++p) {
    nlohmann::json proc;
    proc["state"] = cell("procs", "state", p, 0, 1);
    proc["ppid"] = cell("procs", "ppid", p, 0, 1);
    proc["ipc_from"] = cell("procs", "ipc_from", p, 0, 1);
    proc["nr_pages"] = cell("procs", "nr_pages", p, 0, 1);
    nlohmann::json offs = nlohmann::json::array();
    for (Word fd = 0; fd < cfg.nofile; ++fd)
      offs.push_back(cell("procs", "offs", p, fd, 2));
    proc["offs"] = std::move(offs);
    j["procs"].push_back(std::move(proc));
  }
  for (Word pn = 0; pn < cfg.npage; ++pn) {
    nlohmann::json page;
    page["type"] = cell("pages", "type", pn, 0, 1);
    page["owner"] = cell("pages", "owner", pn, 0, 1);
    page["refcnt"] = cell("pages", "refcnt", pn, 0, 1);
    nlohmann::json data = nlohmann::json::array();
    for (Word i = 0; i < cfg.page_words; ++i)
      data.push_back(cell("pages", "data", pn, i, 2));
    page["data"] = std::move(data);
    j["pages"].push_back(std::move(page));
  }
  return j.dump(2);
}

KernelState state_from_json(std::string_view json_text,
                            const StateSchema& schema) {
  nlohmann::json j = nlohmann::json::parse(json_text);
  const KernelConfig& cfg = schema.config();
  KernelState s(schema);
  auto put = [&](const char* root, const char* field,
                 std::initializer_list<Word> idx, Word v) {
    const FieldInfo* f = schema.find(FieldPath{root, field});
    auto cell = schema.cell_index(*f, std::span<const Word>(idx.begin(),
                                                            idx.size()));
    s.set_cell(*cell, v);
  };
  put("current", "", {}, j.at("current").get<Word>());
  put("pages_ptr_to_int", "", {}, j.at("pages_ptr_to_int").get<Word>());
  for (Word p = 0; p < cfg.nproc; ++p) {
    const auto& proc = j.at("procs").at(p);
    put("procs", "state", {p}, proc.at("state").get<Word>());
    put("procs", "ppid", {p}, proc.at("ppid").get<Word>());
    put("procs", "ipc_from", {p}, proc.at("ipc_from").get<Word>());
    put("procs", "nr_pages", {p}, proc.at("nr_pages").get<Word>());
    for (Word fd = 0; fd < cfg.nofile; ++fd)
      put("procs", "offs", {p, fd}, proc.at("offs").at(fd).get<Word>());
  }
  for (Word pn = 0; pn < cfg.npage; ++pn) {
    const auto& page = j.at("pages").at(pn);
    put("pages", "type", {pn}, page.at("type").get<Word>());
    put("pages", "owner", {pn}, page.at("owner").get<Word>());
    put("pages", "refcnt", {pn}, page.at("refcnt").get<Word>());
    for (Word i = 0; i < cfg.page_words; ++i)
      put("pages", "data", {pn, i}, page.at("data").at(i).get<Word>());
  }
  return s;
}

}  // namespace specforge
