// Copyright (c) SpecForge contributors.
// SPDX-License-Identifier: Apache-2.0
#include <sstream>

#include "json.hpp"
#include "specforge/symex.hpp"

namespace specforge {

ImplBehavior execute(const IRFunction& ir) {
  ImplBehavior b;
  b.name = ir.name;
  b.params = ir.params;

  std::vector<ExprPtr> negated_so_far;
  std::vector<IRUpdate> updates;
  auto prefix_guard = [&](const ExprPtr& last) {
    std::vector<ExprPtr> conjuncts = negated_so_far;
    if (last) conjuncts.push_back(last);
    if (conjuncts.empty()) return Expr::boolean(true);
    if (conjuncts.size() == 1) return conjuncts[0];
    return Expr::make(ExprOp::And, std::move(conjuncts));
  };

  for (const auto& item : ir.items) {
    if (item.kind == IRItem::Kind::Check) {
      BehaviorPath p;
      p.guard = prefix_guard(item.check.guard);
      p.status = item.check.errcode;
      p.errname = item.check.errname;
      b.paths.push_back(std::move(p));
      negated_so_far.push_back(Expr::make(ExprOp::Not, {item.check.guard}));
    } else {
      updates.push_back(item.update);
    }
  }
  BehaviorPath success;
  success.guard = prefix_guard(nullptr);
  success.status = 0;
  success.updates = std::move(updates);
  b.paths.push_back(std::move(success));
  return b;
}

ConcreteOutcome concretize(const ImplBehavior& b, const StateSchema& schema,
                           const ConstantTable& constants,
                           const KernelState& s, std::span<const Word> args) {
  if (args.size() != b.params.size())
    throw std::logic_error("concretize: argument arity mismatch");
  std::map<std::string, Word> params;
  for (std::size_t i = 0; i < args.size(); ++i)
    params[b.params[i].name] = schema.config().truncate(args[i]);

  EvalEnv env;
  env.schema = &schema;
  env.constants = &constants;
  env.old_state = &s;
  env.params = &params;

  for (const auto& path : b.paths) {
    if (!eval_bool(*path.guard, env)) continue;
    ConcreteOutcome out;
    out.status = path.status;
    if (path.status != 0) {
      out.post = s;
      return out;
    }
    KernelState updated = s;
    env.new_state = &updated;
    for (const auto& u : path.updates) {
      const FieldInfo* f = schema.find(u.path);
      std::vector<Word> idx;
      for (const auto& ie : u.indices) idx.push_back(eval_word(*ie, env));
      Word value = eval_word(*u.rhs, env);
      auto cell = schema.cell_index(*f, idx);
      if (cell) updated.set_cell(*cell, value);
      // out-of-domain writes fall off the modeled state
    }
    out.post = std::move(updated);
    return out;
  }
  throw std::logic_error(
      "concretize: no path guard is true for " + b.name +
      " (path construction broken)");
}

std::string behavior_to_json(const ImplBehavior& b) {
  nlohmann::json j;
  j["syscall"] = b.name;
  nlohmann::json params = nlohmann::json::array();
  for (const auto& p : b.params) params.push_back(p.type_name + " " + p.name);
  j["params"] = std::move(params);
  nlohmann::json paths = nlohmann::json::array();
  for (const auto& p : b.paths) {
    nlohmann::json pj;
    pj["guard"] = expr_to_source(*p.guard);
    pj["status"] = p.status;
    if (!p.errname.empty()) pj["error"] = p.errname;
    nlohmann::json ups = nlohmann::json::array();
    for (const auto& u : p.updates) {
      nlohmann::json uj;
      std::string target = u.path.root;
      if (!u.path.field.empty()) {
        target += "[" + expr_to_source(*u.indices.at(0)) + "]." + u.path.field;
        if (u.indices.size() == 2)
          target += "[" + expr_to_source(*u.indices.at(1)) + "]";
      }
      uj["target"] = target;
      uj["value"] = expr_to_source(*u.rhs);
      ups.push_back(std::move(uj));
    }
    pj["updates"] = std::move(ups);
    paths.push_back(std::move(pj));
  }
  j["paths"] = std::move(paths);
  return j.dump(2);
}

}  // namespace specforge
