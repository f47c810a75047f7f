// Copyright (c) SpecForge contributors.
// SPDX-License-Identifier: Apache-2.0
//
// A small CDCL solver: two-watched-literal propagation, first-UIP clause
// learning, VSIDS-style activities with an indexed max-heap, Luby
// restarts and phase saving. Instances here are bit-blasted QF_BV
// formulas over a few thousand variables, so there is no clause-database
// reduction.
#include <algorithm>
#include <cmath>

#include "specforge/smt.hpp"

namespace specforge::smt {

SatSolver::SatSolver() {
  assign_.push_back(0);  // var 0 unused
  phase_.push_back(false);
  level_.push_back(0);
  reason_.push_back(-1);
  activity_.push_back(0.0);
  heap_pos_.push_back(-1);
  seen_.push_back(0);
  watches_.resize(2);
  int t = new_var();
  (void)t;  // var 1: constant true
  add_clause({1});
}

int SatSolver::new_var() {
  assign_.push_back(0);
  phase_.push_back(false);
  level_.push_back(0);
  reason_.push_back(-1);
  activity_.push_back(0.0);
  heap_pos_.push_back(-1);
  seen_.push_back(0);
  watches_.resize(watches_.size() + 2);
  int v = static_cast<int>(assign_.size()) - 1;
  heap_insert(v);
  return v;
}

int SatSolver::assigned(int lit) const {
  int8_t a = assign_[var_of(lit)];
  if (a == 0) return 0;
  return (a > 0) == (lit > 0) ? 1 : -1;
}

void SatSolver::add_clause(std::vector<int> lits) {
  if (!ok_) return;
  // Top-level simplification: drop false literals, detect tautologies.
  std::sort(lits.begin(), lits.end(),
            [](int a, int b) { return std::abs(a) != std::abs(b)
                                          ? std::abs(a) < std::abs(b)
                                          : a < b; });
  std::vector<int> out;
  for (std::size_t i = 0; i < lits.size(); ++i) {
    int lit = lits[i];
    if (i + 1 < lits.size() && lits[i + 1] == -lit) return;  // tautology
    if (i + 1 < lits.size() && lits[i + 1] == lit) continue; // duplicate
    int val = assigned(lit);
    if (val > 0 && level_[var_of(lit)] == 0) return;          // satisfied
    if (val < 0 && level_[var_of(lit)] == 0) continue;        // falsified
    out.push_back(lit);
  }
  if (out.empty()) {
    ok_ = false;
    return;
  }
  if (out.size() == 1) {
    if (assigned(out[0]) == 0) {
      enqueue(out[0], -1);
      if (propagate() != -1) ok_ = false;
    } else if (assigned(out[0]) < 0) {
      ok_ = false;
    }
    return;
  }
  int id = static_cast<int>(clauses_.size());
  clauses_.push_back(Clause{std::move(out)});
  watches_[widx(clauses_[id].lits[0])].push_back(id);
  watches_[widx(clauses_[id].lits[1])].push_back(id);
}

void SatSolver::enqueue(int lit, int reason) {
  int v = var_of(lit);
  assign_[v] = lit > 0 ? 1 : -1;
  phase_[v] = lit > 0;
  level_[v] = static_cast<int>(trail_lim_.size());
  reason_[v] = reason;
  trail_.push_back(lit);
}

int SatSolver::propagate() {
  while (qhead_ < trail_.size()) {
    int lit = trail_[qhead_++];
    int falsified = -lit;
    std::vector<int>& ws = watches_[widx(falsified)];
    std::size_t keep = 0;
    for (std::size_t i = 0; i < ws.size(); ++i) {
      int ci = ws[i];
      Clause& c = clauses_[ci];
      if (c.lits[0] == falsified) std::swap(c.lits[0], c.lits[1]);
      // c.lits[1] == falsified now
      if (assigned(c.lits[0]) > 0) {
        ws[keep++] = ci;
        continue;
      }
      bool moved = false;
      for (std::size_t k = 2; k < c.lits.size(); ++k) {
        if (assigned(c.lits[k]) >= 0) {
          std::swap(c.lits[1], c.lits[k]);
          watches_[widx(c.lits[1])].push_back(ci);
          moved = true;
          break;
        }
      }
      if (moved) continue;
      ws[keep++] = ci;
      if (assigned(c.lits[0]) < 0) {
        // conflict: restore remaining watches and report
        for (std::size_t j = i + 1; j < ws.size(); ++j) ws[keep++] = ws[j];
        ws.resize(keep);
        qhead_ = trail_.size();
        return ci;
      }
      enqueue(c.lits[0], ci);
    }
    ws.resize(keep);
  }
  return -1;
}

void SatSolver::bump(int var) {
  activity_[var] += var_inc_;
  if (activity_[var] > 1e100) {
    for (auto& a : activity_) a *= 1e-100;
    var_inc_ *= 1e-100;
  }
  if (heap_contains(var)) heap_up(heap_pos_[var]);
}

void SatSolver::decay() { var_inc_ /= 0.95; }

void SatSolver::analyze(int confl, std::vector<int>& learnt, int& bt_level) {
  learnt.clear();
  learnt.push_back(0);  // slot for the asserting literal
  int counter = 0;
  int p = 0;
  std::size_t idx = trail_.size();
  int cur_level = static_cast<int>(trail_lim_.size());
  int clause = confl;
  do {
    const Clause& c = clauses_[clause];
    for (int q : c.lits) {
      if (q == p) continue;
      int v = var_of(q);
      if (!seen_[v] && level_[v] > 0) {
        seen_[v] = 1;
        bump(v);
        if (level_[v] >= cur_level)
          ++counter;
        else
          learnt.push_back(q);
      }
    }
    while (!seen_[var_of(trail_[idx - 1])]) --idx;
    p = trail_[--idx];
    seen_[var_of(p)] = 0;
    clause = reason_[var_of(p)];
    --counter;
  } while (counter > 0);
  learnt[0] = -p;

  bt_level = 0;
  if (learnt.size() > 1) {
    std::size_t max_i = 1;
    for (std::size_t i = 2; i < learnt.size(); ++i)
      if (level_[var_of(learnt[i])] > level_[var_of(learnt[max_i])]) max_i = i;
    std::swap(learnt[1], learnt[max_i]);
    bt_level = level_[var_of(learnt[1])];
  }
  for (std::size_t i = 1; i < learnt.size(); ++i) seen_[var_of(learnt[i])] = 0;
}

void SatSolver::backtrack(int level) {
  if (static_cast<int>(trail_lim_.size()) <= level) return;
  std::size_t until = trail_lim_[level];
  for (std::size_t i = trail_.size(); i-- > until;) {
    int v = var_of(trail_[i]);
    assign_[v] = 0;
    reason_[v] = -1;
    if (!heap_contains(v)) heap_insert(v);
  }
  trail_.resize(until);
  trail_lim_.resize(level);
  qhead_ = trail_.size();
}

int SatSolver::pick_branch() {
  while (!heap_.empty()) {
    int v = heap_pop();
    if (assign_[v] == 0) return v;
  }
  return 0;
}

void SatSolver::heap_insert(int var) {
  heap_pos_[var] = static_cast<int>(heap_.size());
  heap_.push_back(var);
  heap_up(heap_pos_[var]);
}

int SatSolver::heap_pop() {
  int top = heap_[0];
  heap_pos_[top] = -1;
  heap_[0] = heap_.back();
  heap_.pop_back();
  if (!heap_.empty()) {
    heap_pos_[heap_[0]] = 0;
    heap_down(0);
  }
  return top;
}

void SatSolver::heap_up(int i) {
  int v = heap_[i];
  while (i > 0) {
    int parent = (i - 1) / 2;
    if (activity_[heap_[parent]] >= activity_[v]) break;
    heap_[i] = heap_[parent];
    heap_pos_[heap_[i]] = i;
    i = parent;
  }
  heap_[i] = v;
  heap_pos_[v] = i;
}

void SatSolver::heap_down(int i) {
  int v = heap_[i];
  int n = static_cast<int>(heap_.size());
  for (;;) {
    int child = 2 * i + 1;
    if (child >= n) break;
    if (child + 1 < n && activity_[heap_[child + 1]] > activity_[heap_[child]])
      ++child;
    if (activity_[heap_[child]] <= activity_[v]) break;
    heap_[i] = heap_[child];
    heap_pos_[heap_[i]] = i;
    i = child;
  }
  heap_[i] = v;
  heap_pos_[v] = i;
}

namespace {

// Luby restart sequence.
long luby(long i) {
  long k = 1;
  while ((1L << k) - 1 < i + 1) ++k;
  while ((1L << k) - 1 != i + 1) {
    i -= (1L << (k - 1)) - 1;
    k = 1;
    while ((1L << k) - 1 < i + 1) ++k;
  }
  return 1L << (k - 1);
}

}  // namespace

SatStatus SatSolver::solve(long conflict_budget) {
  if (!ok_) return SatStatus::Unsat;
  if (propagate() != -1) {
    ok_ = false;
    return SatStatus::Unsat;
  }
  long conflicts_total = 0;
  long restart_no = 0;
  long restart_limit = 100 * luby(restart_no);
  long conflicts_since_restart = 0;
  std::vector<int> learnt;
  for (;;) {
    int confl = propagate();
    if (confl != -1) {
      ++conflicts_total;
      ++conflicts_since_restart;
      if (trail_lim_.empty()) {
        ok_ = false;
        return SatStatus::Unsat;
      }
      int bt_level = 0;
      analyze(confl, learnt, bt_level);
      backtrack(bt_level);
      if (learnt.size() == 1) {
        enqueue(learnt[0], -1);
      } else {
        int id = static_cast<int>(clauses_.size());
        clauses_.push_back(Clause{learnt});
        watches_[widx(learnt[0])].push_back(id);
        watches_[widx(learnt[1])].push_back(id);
        enqueue(learnt[0], id);
      }
      decay();
      if (conflict_budget >= 0 && conflicts_total >= conflict_budget)
        return SatStatus::Unknown;
    } else {
      if (conflicts_since_restart >= restart_limit) {
        conflicts_since_restart = 0;
        restart_limit = 100 * luby(++restart_no);
        backtrack(0);
        continue;
      }
      int v = pick_branch();
      if (v == 0) return SatStatus::Sat;
      trail_lim_.push_back(static_cast<int>(trail_.size()));
      enqueue(phase_[v] ? v : -v, -1);
    }
  }
}

bool SatSolver::lit_value(int lit) const { return assigned(lit) > 0; }

}  // namespace specforge::smt
