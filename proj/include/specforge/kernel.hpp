// Copyright (c) SpecForge contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace specforge {

using Word = std::uint64_t;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Desk-scale machine dimensions. All counts are small on purpose so the
/// verifier can unroll every map to one bitvector symbol per cell.
struct KernelConfig {
  unsigned word_width = 64;
  Word nproc = 4;
  Word npage = 4;
  Word nofile = 4;
  Word page_words = 4;
  Word page_size = 4096;
  Word pte_addr_shift = 12;

  /// Bit mask selecting the low word_width bits.
  Word mask() const {
    return word_width >= 64 ? ~Word{0} : ((Word{1} << word_width) - 1);
  }
  Word truncate(Word v) const { return v & mask(); }

  /// Throws ConfigError if any invariant fails (counts >= 2 and
  /// representable, page_size a power of two, width in [8, 64]).
  void validate() const;

  bool operator==(const KernelConfig&) const = default;

  /// Key/value config file. Keys: word_width, nproc, npage, nofile,
  /// page_words, page_size, pte_addr_shift. Lines are `key = value`
  /// (the `=` is optional), `#` starts a comment.
  static KernelConfig from_text(std::string_view text);
  static KernelConfig from_file(const std::string& path);
};

/// Named scalar constants surfaced to specs under the `dt.` namespace and
/// to C implementations as bare identifiers.
class ConstantTable {
 public:
  static ConstantTable standard(const KernelConfig& config);

  /// Dotted lookup without the `dt.` prefix: "NPROC",
  /// "proc_state.PROC_RUNNING", "errno.ESRCH".
  std::optional<Word> find(std::string_view dotted_name) const;

  /// Bare C-side lookup: "NPROC", "PROC_RUNNING", "ESRCH".
  std::optional<Word> find_bare(std::string_view name) const;

  /// Deterministic (name, value) listing, dotted names.
  const std::vector<std::pair<std::string, Word>>& entries() const {
    return entries_;
  }

 private:
  std::vector<std::pair<std::string, Word>> entries_;
};

// Fixed enum values. PROC_RUNNING and PAGE_TYPE_FREE follow the programming
// model; the remaining members are distinct by assignment.
inline constexpr Word kProcUnused = 0;
inline constexpr Word kProcEmbryo = 1;
inline constexpr Word kProcRunnable = 2;
inline constexpr Word kProcRunning = 3;
inline constexpr Word kPageTypeFree = 0;
inline constexpr Word kPageTypeFrame = 1;
inline constexpr Word kPageTypeX86Pt = 2;
inline constexpr Word kPageTypeIommuPt = 3;

/// Names a cell family, e.g. {procs, state} or {current, ""}.
/// Index values (or index expressions) are carried separately.
struct FieldPath {
  std::string root;   // "current", "pages_ptr_to_int", "procs", "pages"
  std::string field;  // "" for scalars; "state", "offs", "data", ...

  bool operator==(const FieldPath&) const = default;
  std::string str() const {
    return field.empty() ? root : root + "." + field;
  }
};

struct FieldInfo {
  FieldPath path;
  unsigned arity = 0;   // number of indices the path takes (0, 1 or 2)
  Word dims[2] = {0, 0};
  std::size_t base = 0;  // offset of the first cell in the flat layout
  std::size_t span = 0;  // number of cells
};

/// Flat cell layout for a KernelConfig. Field order (and therefore cell
/// and SMT symbol order) is fixed: current, pages_ptr_to_int, then the
/// proc fields, then the page fields.
class StateSchema {
 public:
  explicit StateSchema(const KernelConfig& config);

  const KernelConfig& config() const { return config_; }
  std::size_t cell_count() const { return cell_count_; }
  const std::vector<FieldInfo>& fields() const { return fields_; }

  /// Null when the path names no schema field.
  const FieldInfo* find(const FieldPath& path) const;

  /// Flat cell index, or nullopt when any index is out of domain.
  std::optional<std::size_t> cell_index(const FieldInfo& field,
                                        std::span<const Word> indices) const;

  /// Mangled symbol name, e.g. "procs_2_state", "pages_1_data_3", "current".
  std::string cell_name(std::size_t cell) const;

 private:
  KernelConfig config_;
  std::vector<FieldInfo> fields_;
  std::size_t cell_count_ = 0;
};

/// The kernel state S: a flat vector of word cells laid out per schema.
/// Pure value semantics; copies are independent.
class KernelState {
 public:
  KernelState() = default;
  explicit KernelState(const StateSchema& schema)
      : cells_(schema.cell_count(), 0) {}

  std::size_t size() const { return cells_.size(); }
  Word cell(std::size_t i) const { return cells_.at(i); }
  void set_cell(std::size_t i, Word v) { cells_.at(i) = v; }
  std::span<const Word> cells() const { return cells_; }

  bool operator==(const KernelState&) const = default;

 private:
  std::vector<Word> cells_;
};

/// The shipped deterministic fixture S0: current = 1, proc 2 is an embryo
/// child of proc 1, everything else zeroed, pages_ptr_to_int = 0x1000.
KernelState canonical_state(const StateSchema& schema);

inline KernelState copy_state(const KernelState& s) { return s; }

/// Checked cell read; throws DomainError when an index is out of domain
/// or the path does not resolve.
Word read_field(const KernelState& s, const StateSchema& schema,
                const FieldPath& path, std::span<const Word> indices);

/// Checked functional write: returns a new state differing only at the
/// addressed cell. Throws DomainError like read_field.
KernelState write_field(const KernelState& s, const StateSchema& schema,
                        const FieldPath& path, std::span<const Word> indices,
                        Word v);

/// Canonical JSON with sorted keys, used by golden tests.
std::string state_to_json(const KernelState& s, const StateSchema& schema);
KernelState state_from_json(std::string_view json_text,
                            const StateSchema& schema);

}  // namespace specforge
