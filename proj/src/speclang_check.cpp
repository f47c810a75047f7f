// Copyright (c) SpecForge contributors.
// SPDX-License-Identifier: Apache-2.0
#include <functional>
#include <sstream>

#include "json.hpp"
#include "specforge/speclang.hpp"

namespace specforge {

ApiInventory ApiInventory::standard() {
  ApiInventory inv;
  inv.add("z3.And", -1);
  inv.add("z3.Or", -1);
  inv.add("z3.Not", 1);
  inv.add("z3.Implies", 2);
  inv.add("z3.ULT", 2);
  inv.add("z3.ULE", 2);
  inv.add("z3.UGT", 2);
  inv.add("z3.UGE", 2);
  inv.add("z3.UDiv", 2);
  inv.add("z3.BitVecVal", 2);
  inv.add("util.If", 3);
  return inv;
}

std::optional<int> ApiInventory::arity(const std::string& name) const {
  for (const auto& [n, a] : entries_)
    if (n == name) return a;
  return std::nullopt;
}

void ApiInventory::add(std::string name, int arity) {
  entries_.emplace_back(std::move(name), arity);
}

void ApiInventory::remove(const std::string& name) {
  std::erase_if(entries_, [&](const auto& e) { return e.first == name; });
}

std::string findings_to_json(const std::vector<LintFinding>& findings) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& f : findings) {
    nlohmann::json j;
    j["category"] = f.category;
    j["severity"] = f.severity;
    j["line"] = f.line;
    j["col"] = f.col;
    j["message"] = f.message;
    arr.push_back(std::move(j));
  }
  return arr.dump(2);
}

namespace {

struct CheckFault {
  SpecFault fault;
};

[[noreturn]] void fault(FaultKind kind, int line, int col, std::string msg) {
  throw CheckFault{SpecFault{kind, std::move(msg), line, col}};
}

class Checker {
 public:
  Checker(const SpecAst& ast, const StateSchema& schema,
          const ConstantTable& constants, const ApiInventory& inventory)
      : ast_(ast), schema_(schema), constants_(constants), inv_(inventory) {}

  TypedSpec run() {
    TypedSpec out;
    out.ast = ast_;
    auto [guard, gsort] = check(ast_.guard, false);
    if (!gsort.is_bool)
      fault(FaultKind::TypeSortError, ast_.guard->line, ast_.guard->col,
            "the pre-condition must be a boolean expression");
    out.guard = pin(guard, 0);
    for (const auto& w : ast_.writes) {
      SpecWrite tw;
      tw.path = w.path;
      tw.line = w.line;
      const FieldInfo* f = schema_.find(w.path);
      if (!f)
        fault(FaultKind::DomainError, w.line, 0,
              "no such state field: " + w.path.str());
      if (f->arity != w.indices.size())
        fault(FaultKind::DomainError, w.line, 0,
              w.path.str() + " takes " + std::to_string(f->arity) +
                  " index(es)");
      for (const auto& idx : w.indices) {
        auto [e, s] = check(idx, true);
        require_width(s, word_width(), idx->line, idx->col);
        tw.indices.push_back(pin(e, word_width()));
      }
      auto [rhs, rsort] = check(w.rhs, true);
      if (rsort.is_bool)
        fault(FaultKind::TypeSortError, w.rhs->line, w.rhs->col,
              "cannot store a boolean into " + w.path.str());
      require_width(rsort, word_width(), w.rhs->line, w.rhs->col);
      tw.rhs = pin(rhs, word_width());
      out.writes.push_back(std::move(tw));
    }
    check_return();
    return out;
  }

 private:
  int word_width() const {
    return static_cast<int>(schema_.config().word_width);
  }

  void require_width(const Sort& s, int w, int line, int col) {
    if (s.is_bool)
      fault(FaultKind::TypeSortError, line, col,
            "Sort mismatch: expected BitVec(" + std::to_string(w) +
                "), got Bool");
    if (s.width != 0 && s.width != w)
      fault(FaultKind::TypeSortError, line, col,
            "Sort mismatch: expected BitVec(" + std::to_string(w) +
                "), got BitVec(" + std::to_string(s.width) + ")");
  }

  // Pins polymorphic literals to `width` (0 keeps word width for leaves
  // that already default there).
  ExprPtr pin(const ExprPtr& e, int width) const {
    if (e->op == ExprOp::WordLit && e->width == 0) {
      int w = width ? width : word_width();
      Word mask = w >= 64 ? ~Word{0} : ((Word{1} << w) - 1);
      return Expr::literal(e->value & mask, w);
    }
    return e;
  }

  // Returns the (possibly rebuilt) expression plus its sort. `in_update`
  // legalizes new-state reads.
  std::pair<ExprPtr, Sort> check(const ExprPtr& e, bool in_update) {
    switch (e->op) {
      case ExprOp::BoolLit:
        return {e, Sort{true, 0}};
      case ExprOp::WordLit:
        return {e, Sort{false, e->width}};  // width 0 = polymorphic
      case ExprOp::Param:
        return {e, Sort{false, word_width()}};
      case ExprOp::ConstRef: {
        if (!constants_.find(e->name))
          fault(FaultKind::ApiReferenceError, e->line, e->col,
                "unknown constant dt." + e->name);
        return {e, Sort{false, word_width()}};
      }
      case ExprOp::FreeName: {
        if (e->name.find('.') != std::string::npos || !e->args.empty())
          fault(FaultKind::ApiReferenceError, e->line, e->col,
                "'" + e->name + "' is not in the API inventory");
        if (constants_.find_bare(e->name))
          fault(FaultKind::ApiReferenceError, e->line, e->col,
                "unknown name '" + e->name +
                    "' (constants use the dt.* namespace)");
        fault(FaultKind::ApiReferenceError, e->line, e->col,
              "unknown name '" + e->name + "'");
      }
      case ExprOp::BitVecVal: {
        const auto& v = e->args.at(0);
        Word value = 0;
        if (v->op == ExprOp::WordLit) {
          value = v->value;
        } else if (v->op == ExprOp::ConstRef) {
          auto c = constants_.find(v->name);
          if (!c)
            fault(FaultKind::ApiReferenceError, v->line, v->col,
                  "unknown constant dt." + v->name);
          value = *c;
        } else {
          fault(FaultKind::TypeSortError, e->line, e->col,
                "BitVecVal value must be a literal or a dt.* constant");
        }
        if (e->width < 1 || e->width > 64)
          fault(FaultKind::TypeSortError, e->line, e->col,
                "BitVecVal width must be in [1, 64]");
        Word mask =
            e->width >= 64 ? ~Word{0} : ((Word{1} << e->width) - 1);
        return {Expr::literal(value & mask, e->width), Sort{false, e->width}};
      }
      case ExprOp::Read: {
        if (e->snap == Snapshot::New && !in_update)
          fault(FaultKind::TypeSortError, e->line, e->col,
                "the copied state can only be read inside the update block");
        const FieldInfo* f = schema_.find(e->path);
        if (!f)
          fault(FaultKind::DomainError, e->line, e->col,
                "no such state field: " + e->path.str());
        if (f->arity != e->args.size())
          fault(FaultKind::DomainError, e->line, e->col,
                e->path.str() + " takes " + std::to_string(f->arity) +
                    " index(es)");
        if (e->bracket_read)
          fault(FaultKind::TypeSortError, e->line, e->col,
                "map field " + e->path.str() +
                    " is read with parentheses, not brackets");
        std::vector<ExprPtr> idx;
        for (const auto& a : e->args) {
          auto [ie, is] = check(a, in_update);
          require_width(is, word_width(), a->line, a->col);
          idx.push_back(pin(ie, word_width()));
        }
        auto r = Expr::read(e->path, e->snap, std::move(idx));
        const_cast<Expr&>(*r).line = e->line;
        const_cast<Expr&>(*r).col = e->col;
        return {r, Sort{false, word_width()}};
      }
      case ExprOp::And:
      case ExprOp::Or:
      case ExprOp::Not:
      case ExprOp::Implies: {
        check_arity(e);
        std::vector<ExprPtr> args;
        for (const auto& a : e->args) {
          auto [ae, as] = check(a, in_update);
          if (!as.is_bool)
            fault(FaultKind::TypeSortError, a->line ? a->line : e->line,
                  a->col ? a->col : e->col,
                  "Sort mismatch: expected Bool, got BitVec");
          args.push_back(ae);
        }
        return {Expr::make(e->op, std::move(args)), Sort{true, 0}};
      }
      case ExprOp::Eq:
      case ExprOp::Ne:
      case ExprOp::Ult:
      case ExprOp::Ule:
      case ExprOp::Ugt:
      case ExprOp::Uge:
      case ExprOp::Slt:
      case ExprOp::Sle:
      case ExprOp::Sgt:
      case ExprOp::Sge: {
        check_arity(e);
        auto [a, as] = check(e->args.at(0), in_update);
        auto [b, bs] = check(e->args.at(1), in_update);
        int w = unify(as, bs, e.get());
        return {Expr::make(e->op, {pin(a, w), pin(b, w)}), Sort{true, 0}};
      }
      default: {  // bitvector arithmetic
        check_arity(e);
        auto [a, as] = check(e->args.at(0), in_update);
        auto [b, bs] = check(e->args.at(1), in_update);
        int w = unify(as, bs, e.get());
        return {Expr::make(e->op, {pin(a, w), pin(b, w)}), Sort{false, w}};
      }
    }
  }

  // Equal-width rule with polymorphic literals adapting to their peer.
  int unify(const Sort& a, const Sort& b, const Expr* at) {
    if (a.is_bool || b.is_bool)
      fault(FaultKind::TypeSortError, at->line, at->col,
            "Sort mismatch: expected BitVec, got Bool");
    if (a.width == 0 && b.width == 0) return word_width();
    if (a.width == 0) return b.width;
    if (b.width == 0) return a.width;
    if (a.width != b.width)
      fault(FaultKind::TypeSortError, at->line, at->col,
            "Sort mismatch: expected BitVec(" + std::to_string(a.width) +
                "), got BitVec(" + std::to_string(b.width) + ")");
    return a.width;
  }

  void check_arity(const ExprPtr& e) {
    std::string name;
    switch (e->op) {
      case ExprOp::And: name = "z3.And"; break;
      case ExprOp::Or: name = "z3.Or"; break;
      case ExprOp::Not: name = "z3.Not"; break;
      case ExprOp::Implies: name = "z3.Implies"; break;
      case ExprOp::Ult: name = "z3.ULT"; break;
      case ExprOp::Ule: name = "z3.ULE"; break;
      case ExprOp::Ugt: name = "z3.UGT"; break;
      case ExprOp::Uge: name = "z3.UGE"; break;
      case ExprOp::UDiv: name = "z3.UDiv"; break;
      default: return;  // operator tokens have fixed parse arity
    }
    auto a = inv_.arity(name);
    if (!a)
      fault(FaultKind::ApiReferenceError, e->line, e->col,
            "'" + name + "' is not in the API inventory");
    if (*a >= 0 && e->args.size() != static_cast<std::size_t>(*a))
      fault(FaultKind::ApiReferenceError, e->line, e->col,
            name + " takes " + std::to_string(*a) + " argument(s)");
  }

  void check_return() {
    const SpecReturn& r = ast_.ret;
    if (r.value_name != ast_.guard_var)
      fault(FaultKind::TypeSortError, r.line, 0,
            "return must yield the pre-condition '" + ast_.guard_var + "'");
    auto is_state_name = [&](const std::string& n) {
      return n == ast_.state_param || (ast_.has_copy && n == ast_.copy_var);
    };
    if (r.has_util_if) {
      if (r.if_cond != ast_.guard_var)
        fault(FaultKind::TypeSortError, r.line, 0,
              "util.If condition must be the pre-condition '" +
                  ast_.guard_var + "'");
      if (!is_state_name(r.if_then) || !is_state_name(r.if_else))
        fault(FaultKind::TypeSortError, r.line, 0,
              "util.If branches must be state names");
    } else if (!is_state_name(r.bare_state)) {
      fault(FaultKind::TypeSortError, r.line, 0,
            "return state must be a state name");
    }
  }

  const SpecAst& ast_;
  const StateSchema& schema_;
  const ConstantTable& constants_;
  const ApiInventory& inv_;
};

bool produces_bool(const Expr& e) {
  switch (e.op) {
    case ExprOp::BoolLit:
    case ExprOp::And:
    case ExprOp::Or:
    case ExprOp::Not:
    case ExprOp::Implies:
    case ExprOp::Eq:
    case ExprOp::Ne:
    case ExprOp::Ult:
    case ExprOp::Ule:
    case ExprOp::Ugt:
    case ExprOp::Uge:
    case ExprOp::Slt:
    case ExprOp::Sle:
    case ExprOp::Sgt:
    case ExprOp::Sge:
      return true;
    default:
      return false;
  }
}

void walk(const ExprPtr& e, const std::function<void(const Expr&)>& fn) {
  fn(*e);
  for (const auto& a : e->args) walk(a, fn);
}

}  // namespace

TypecheckResult typecheck_spec(const SpecAst& ast, const StateSchema& schema,
                               const ConstantTable& constants,
                               const ApiInventory& inventory) {
  try {
    Checker c(ast, schema, constants, inventory);
    return TypecheckResult{c.run(), std::nullopt};
  } catch (const CheckFault& f) {
    return TypecheckResult{std::nullopt, f.fault};
  }
}

std::vector<LintFinding> lint_spec(const SpecAst& ast,
                                   const StateSchema& schema,
                                   const ConstantTable& constants,
                                   const ApiInventory& inventory) {
  std::vector<LintFinding> out;
  auto add = [&](int cat, std::string severity, int line, int col,
                 std::string msg) {
    out.push_back(LintFinding{cat, std::move(severity), line, col,
                              std::move(msg)});
  };

  auto lint_expr = [&](const ExprPtr& root) {
    walk(root, [&](const Expr& e) {
      if (e.op == ExprOp::Read) {
        if (e.bracket_read)
          add(4, "error", e.line, e.col,
              "map field " + e.path.str() +
                  " is read with parentheses but written with brackets");
        if (!schema.find(e.path) && e.path.field.empty() &&
            e.path.root.size() > 11 &&
            e.path.root.ends_with("_ptr_to_int") &&
            e.path.root != "pages_ptr_to_int")
          add(11, "error", e.line, e.col,
              "state pointer field is named 'pages_ptr_to_int', not '" +
                  e.path.root + "'");
      }
      if (e.op == ExprOp::FreeName) {
        bool call_like =
            e.name.find('.') != std::string::npos || !e.args.empty();
        if (call_like && !inventory.arity(e.name))
          add(14, "error", e.line, e.col,
              "'" + e.name + "' is not in the API inventory");
        else if (!call_like && constants.find_bare(e.name))
          add(6, "error", e.line, e.col,
              "constant '" + e.name + "' must be referenced as dt." + e.name);
      }
      if ((e.op == ExprOp::BitAnd || e.op == ExprOp::BitOr)) {
        for (const auto& a : e.args)
          if (produces_bool(*a)) {
            add(5, "warning", e.line, e.col,
                std::string("use ") +
                    (e.op == ExprOp::BitAnd ? "z3.And" : "z3.Or") +
                    " to combine boolean conditions, not the bitwise "
                    "operator");
            break;
          }
      }
    });
  };

  lint_expr(ast.guard);
  for (const auto& w : ast.writes) {
    for (const auto& idx : w.indices) lint_expr(idx);
    lint_expr(w.rhs);
  }

  const SpecReturn& r = ast.ret;
  std::string expected_then = ast.has_copy ? ast.copy_var : ast.state_param;
  if (!r.has_util_if)
    add(3, "warning", r.line, 0,
        "return must wrap the state in util.If(" + ast.guard_var + ", " +
            expected_then + ", " + ast.state_param + ")");
  else if (r.value_name != ast.guard_var || r.if_cond != ast.guard_var ||
           r.if_then != expected_then || r.if_else != ast.state_param)
    add(3, "warning", r.line, 0,
        "return should be '" + ast.guard_var + ", util.If(" + ast.guard_var +
            ", " + expected_then + ", " + ast.state_param + ")'");

  return out;
}

}  // namespace specforge
