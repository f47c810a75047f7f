// Copyright (c) SpecForge contributors.
// SPDX-License-Identifier: Apache-2.0
#include <cassert>

#include "specforge/speclang.hpp"

namespace specforge {

namespace {

// Which state the post-state selects on each side of the guard.
struct BranchPlan {
  bool then_is_copy = false;
  bool else_is_copy = false;
};

BranchPlan branch_plan(const SpecAst& ast) {
  BranchPlan plan;
  const SpecReturn& r = ast.ret;
  auto is_copy = [&](const std::string& n) {
    return ast.has_copy && n == ast.copy_var;
  };
  if (r.has_util_if) {
    plan.then_is_copy = is_copy(r.if_then);
    plan.else_is_copy = is_copy(r.if_else);
  } else {
    plan.then_is_copy = plan.else_is_copy = is_copy(r.bare_state);
  }
  return plan;
}

}  // namespace

SpecEval eval_spec(const TypedSpec& spec, const StateSchema& schema,
                   const ConstantTable& constants, const KernelState& s,
                   std::span<const Word> args) {
  const SpecAst& ast = spec.ast;
  if (args.size() != ast.params.size())
    throw std::logic_error("eval_spec: argument arity mismatch");
  std::map<std::string, Word> params;
  for (std::size_t i = 0; i < args.size(); ++i)
    params[ast.params[i]] = schema.config().truncate(args[i]);

  EvalEnv env;
  env.schema = &schema;
  env.constants = &constants;
  env.old_state = &s;
  env.params = &params;

  SpecEval out;
  out.truth = eval_bool(*spec.guard, env);

  BranchPlan plan = branch_plan(ast);
  bool selected_copy = out.truth ? plan.then_is_copy : plan.else_is_copy;
  if (!selected_copy) {
    out.post = s;  // frame rule: the update block is not evaluated
    return out;
  }

  KernelState updated = s;
  env.new_state = &updated;
  for (const auto& w : spec.writes) {
    const FieldInfo* f = schema.find(w.path);
    std::vector<Word> idx;
    for (const auto& ie : w.indices) idx.push_back(eval_word(*ie, env));
    Word value = eval_word(*w.rhs, env);
    auto cell = schema.cell_index(*f, idx);
    if (!cell) {
      std::string msg = "write to " + w.path.str() + " with index (";
      for (std::size_t i = 0; i < idx.size(); ++i)
        msg += (i ? ", " : "") + std::to_string(idx[i]);
      out.fault = SpecFault{FaultKind::DomainError, msg + ") out of domain",
                            w.line, 0};
      return out;
    }
    updated.set_cell(*cell, value);
  }
  out.post = std::move(updated);
  return out;
}

SymbolicSpec encode_spec(const TypedSpec& spec, const TermEnv& base_env) {
  const StateSchema& schema = *base_env.schema;
  const int w = static_cast<int>(schema.config().word_width);
  const std::size_t ncells = schema.cell_count();

  std::vector<std::string> old_terms(ncells);
  for (std::size_t i = 0; i < ncells; ++i) old_terms[i] = base_env.old_cell(i);

  SymbolicSpec out;
  out.guard = render_term(*spec.guard, base_env);

  BranchPlan plan = branch_plan(spec.ast);
  bool copy_reachable = plan.then_is_copy || plan.else_is_copy;

  // Evolving cell terms under sequential update semantics.
  std::vector<std::string> cur = old_terms;
  TermEnv env = base_env;
  env.new_cell = [&cur](std::size_t i) { return cur[i]; };

  // The reach condition under which an update's effect is observable.
  std::string reach;
  if (plan.then_is_copy && plan.else_is_copy) reach = "true";
  else if (plan.then_is_copy) reach = out.guard;
  else if (plan.else_is_copy) reach = "(not " + out.guard + ")";

  if (copy_reachable) {
    for (const auto& wr : spec.writes) {
      const FieldInfo* f = schema.find(wr.path);
      std::vector<std::string> idx_terms;
      bool all_const = true;
      std::vector<Word> const_idx;
      for (const auto& ie : wr.indices) {
        idx_terms.push_back(render_term(*ie, env));
        if (ie->op == ExprOp::WordLit)
          const_idx.push_back(ie->value);
        else
          all_const = false;
      }
      std::string rhs = render_term(*wr.rhs, env);

      if (all_const) {
        auto cell = schema.cell_index(*f, const_idx);
        if (cell) {
          cur[*cell] = rhs;
        } else {
          out.domain_obligations.push_back(reach);  // always out of domain
        }
        continue;
      }

      std::string oob;  // any index out of its domain
      for (unsigned d = 0; d < f->arity; ++d) {
        std::string term = "(bvuge " + idx_terms[d] + " " +
                           render_literal(f->dims[d], w) + ")";
        oob = oob.empty() ? term : "(or " + oob + " " + term + ")";
      }
      out.domain_obligations.push_back("(and " + reach + " " + oob + ")");

      for (std::size_t off = 0; off < f->span; ++off) {
        std::size_t cell = f->base + off;
        std::string match;
        std::size_t rem = off;
        Word coords[2] = {0, 0};
        if (f->arity == 2) {
          coords[0] = static_cast<Word>(rem / f->dims[1]);
          coords[1] = static_cast<Word>(rem % f->dims[1]);
        } else {
          coords[0] = static_cast<Word>(rem);
        }
        for (unsigned d = 0; d < f->arity; ++d) {
          std::string eq = "(= " + idx_terms[d] + " " +
                           render_literal(coords[d], w) + ")";
          match = match.empty() ? eq : "(and " + match + " " + eq + ")";
        }
        cur[cell] = "(ite " + match + " " + rhs + " " + cur[cell] + ")";
      }
    }
  }

  out.cell_posts.resize(ncells);
  for (std::size_t i = 0; i < ncells; ++i) {
    const std::string& then_t = plan.then_is_copy ? cur[i] : old_terms[i];
    const std::string& else_t = plan.else_is_copy ? cur[i] : old_terms[i];
    if (then_t == else_t)
      out.cell_posts[i] = then_t;
    else
      out.cell_posts[i] =
          "(ite " + out.guard + " " + then_t + " " + else_t + ")";
  }
  return out;
}

}  // namespace specforge
