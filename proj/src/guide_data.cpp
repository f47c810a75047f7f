// Copyright (c) SpecForge contributors.
// SPDX-License-Identifier: Apache-2.0
//
// The shipped translation guide: fifteen categories in three tiers.
// Entries are general patterns over this programming model, not answers
// to any benchmark task.
#include "specforge/promptkit.hpp"

namespace specforge {

const std::vector<GuideCategory>& standard_guide() {
  static const std::vector<GuideCategory> guide = {
      {1, "Specification template", "syntax",
       {{"int sys_x(pid_t pid) { ... }",
         "def sys_x(old, pid):\n"
         "    cond = z3.And(...)\n"
         "    new = old.copy()\n"
         "    new....  = ...\n"
         "    return cond, util.If(cond, new, old)",
         "Every specification binds the pre-condition first, copies the "
         "state exactly once, updates only the copy, and returns the pair "
         "(cond, util.If(cond, new, old)). A syscall with no state change "
         "still returns util.If(cond, old, old)."}}},
      {2, "Pre-condition translation", "syntax",
       {{"if (!is_pid_valid(pid))\n    return -E;", "is_pid_valid(pid)",
         "Each C error return contributes its NEGATION as one conjunct of "
         "cond."},
        {"if (state != PROC_RUNNING)\n    return -E;",
         "old.procs[pid].state == dt.proc_state.PROC_RUNNING",
         "Equality checks negate to equalities on the old state."},
        {"if (n >= NPAGE)\n    return -E;", "z3.ULT(n, dt.NPAGE)",
         "Unsigned range checks negate to z3.ULT/ULE bounds."}}},
      {3, "Post-condition patterns", "syntax",
       {{"proc->state = PROC_RUNNABLE;",
         "new.procs[pid].state = dt.proc_state.PROC_RUNNABLE",
         "Mutations apply to the copied state `new`, never to `old`; the "
         "return wraps them in util.If(cond, new, old) so a failing "
         "pre-condition leaves the state unchanged."}}},
      {4, "Map field syntax", "syntax",
       {{"read", "old.pages[pn].data(idx)",
         "Map fields READ with parentheses."},
        {"write", "new.pages[pn].data[idx] = val",
         "Map fields WRITE with brackets. Mixing the two is the most "
         "common syntax error."},
        {"read", "old.procs[pid].offs(fd)",
         "The per-process descriptor table follows the same dual-access "
         "rule."}}},
      {5, "Operator rules", "syntax",
       {{"a && b", "z3.And(a, b)",
         "Boolean structure uses z3.And/z3.Or/z3.Not/z3.Implies, never "
         "the bitwise & and | operators."},
        {"signed compare", "offset < 0",
         "The Python operators < and > are SIGNED comparisons; unsigned "
         "comparisons must use z3.ULT/ULE/UGT/UGE explicitly."}}},
      {6, "Constant prefixes", "syntax",
       {{"NPROC", "dt.NPROC",
         "All constants live under the dt.* namespace."},
        {"PROC_EMBRYO", "dt.proc_state.PROC_EMBRYO",
         "Enum families nest one level deeper: dt.proc_state.*, "
         "dt.page_type.*."}}},
      {7, "Page table PTE formulas", "domain",
       {{"x86 page table entry", "(frm << dt.PTE_ADDR_SHIFT) | perm",
         "x86 entries encode a SHIFTED frame number plus permission "
         "bits."},
        {"IOMMU page table entry",
         "(new.pages_ptr_to_int + to * dt.PAGE_SIZE) | perm",
         "IOMMU entries encode a DIRECT BYTE ADDRESS (array base plus "
         "page offset); do not reuse the x86 shift formula here."}}},
      {8, "Shadow metadata", "domain",
       {{"page bookkeeping", "new.pages[pn].type / .owner / .refcnt",
         "A page mutation usually implies shadow updates: its type, its "
         "owner and its reference count move together."}}},
      {9, "Reference counting", "domain",
       {{"mapping a frame", "new.pages[frm].refcnt = old.pages[frm].refcnt + 1",
         "Creating a reference increments the target's refcnt even when "
         "the C code hides it behind helper calls."},
        {"releasing a frame",
         "new.pages[pn].refcnt = old.pages[pn].refcnt - 1",
         "Reclaim paths decrement; omitting the decrement is a leak the "
         "verifier rejects."}}},
      {10, "TLB flush", "domain",
       {{"tlb_flush(...)", "(no specification effect)",
         "Flush calls are ghost operations: they appear in C but have no "
         "image in the specification state."}}},
      {11, "State pointers", "domain",
       {{"pages base address", "new.pages_ptr_to_int",
         "Exactly one pointer-valued scalar exists and its exact name is "
         "pages_ptr_to_int; misspellings do not resolve."}}},
      {12, "Field name mapping", "domain",
       {{"proc->ppid", "old.procs[pid].ppid",
         "C struct accesses map to per-index state paths."},
        {"p->offs[fd] (read)", "old.procs[pid].offs(fd)",
         "Array members inside structs become two-index map fields."},
        {"current", "old.current",
         "The C global `current` is a state scalar, not an argument."}}},
      {13, "C helper functions", "completeness",
       {{"is_pid_valid(pid)", "z3.And(pid > 0, pid < dt.NPROC)",
         "Validity helpers must be expanded inline; their bodies are part "
         "of the pre-condition."},
        {"get_proc(pid)->f", "old.procs[pid].f",
         "Accessor helpers resolve to state paths and vanish."}}},
      {14, "Available helpers", "completeness",
       {{"allowed calls",
         "z3.And z3.Or z3.Not z3.Implies z3.ULT z3.ULE z3.UGT z3.UGE "
         "z3.UDiv z3.BitVecVal util.If",
         "Only this inventory is available. In particular z3.SLT does not "
         "exist here; signed comparisons use the < and > operators."}}},
      {15, "IPC system calls", "completeness",
       {{"if (p->ipc_from != 0 && p->ipc_from != current)\n    return -E;",
         "z3.Implies(old.procs[pid].ipc_from != 0,\n"
         "           old.procs[pid].ipc_from == old.current)",
         "Receiver willingness is an implication: a designated sender, if "
         "any, must match the caller. Keep it separate from the "
         "runnability conjunct; disjoining independent conditions admits "
         "invalid states."},
        {"send/call distinction",
         "send clears ipc_from; call records the caller in ipc_from",
         "The receiver starts running in both cases."}}},
  };
  return guide;
}

}  // namespace specforge
