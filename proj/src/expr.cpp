// Copyright (c) SpecForge contributors.
// SPDX-License-Identifier: Apache-2.0
#include "specforge/expr.hpp"

#include <cassert>
#include <sstream>
#include <stdexcept>

namespace specforge {

ExprPtr Expr::make(ExprOp op, std::vector<ExprPtr> args) {
  auto e = std::make_shared<Expr>();
  e->op = op;
  e->args = std::move(args);
  return e;
}

ExprPtr Expr::boolean(bool b) {
  auto e = std::make_shared<Expr>();
  e->op = ExprOp::BoolLit;
  e->bval = b;
  return e;
}

ExprPtr Expr::literal(Word v, int width) {
  auto e = std::make_shared<Expr>();
  e->op = ExprOp::WordLit;
  e->value = v;
  e->width = width;
  return e;
}

ExprPtr Expr::param(std::string name) {
  auto e = std::make_shared<Expr>();
  e->op = ExprOp::Param;
  e->name = std::move(name);
  return e;
}

ExprPtr Expr::constant(std::string dotted) {
  auto e = std::make_shared<Expr>();
  e->op = ExprOp::ConstRef;
  e->name = std::move(dotted);
  return e;
}

ExprPtr Expr::read(FieldPath path, Snapshot snap, std::vector<ExprPtr> idx) {
  auto e = std::make_shared<Expr>();
  e->op = ExprOp::Read;
  e->path = std::move(path);
  e->snap = snap;
  e->args = std::move(idx);
  return e;
}

bool expr_equal(const Expr& a, const Expr& b) {
  if (a.op != b.op || a.bval != b.bval || a.value != b.value ||
      a.width != b.width || a.name != b.name || !(a.path == b.path) ||
      a.snap != b.snap || a.args.size() != b.args.size())
    return false;
  for (std::size_t i = 0; i < a.args.size(); ++i)
    if (!expr_equal(*a.args[i], *b.args[i])) return false;
  return true;
}

Sort sort_of(const Expr& e, const KernelConfig& config) {
  const int w = static_cast<int>(config.word_width);
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
      return Sort{true, 0};
    case ExprOp::WordLit:
    case ExprOp::BitVecVal:
      return Sort{false, e.width ? e.width : w};
    case ExprOp::Param:
    case ExprOp::ConstRef:
    case ExprOp::FreeName:
    case ExprOp::Read:
      return Sort{false, w};
    default:
      return Sort{false, e.args.empty() ? w
                                        : sort_of(*e.args[0], config).width};
  }
}

namespace {

std::int64_t as_signed(Word v, unsigned width) {
  if (width >= 64) return static_cast<std::int64_t>(v);
  const Word sign = Word{1} << (width - 1);
  if (v & sign) return static_cast<std::int64_t>(v | ~((sign << 1) - 1));
  return static_cast<std::int64_t>(v);
}

Word mask_for(unsigned width) {
  return width >= 64 ? ~Word{0} : ((Word{1} << width) - 1);
}

struct Evaluated {
  Value value;
  unsigned width = 64;
};

Evaluated eval_rec(const Expr& e, const EvalEnv& env);

Evaluated eval_word_rec(const Expr& e, const EvalEnv& env) {
  Evaluated r = eval_rec(e, env);
  if (r.value.is_bool) throw std::logic_error("expected bitvector operand");
  return r;
}

Evaluated eval_rec(const Expr& e, const EvalEnv& env) {
  const unsigned word_width = env.schema->config().word_width;
  auto make_bool = [](bool b) {
    return Evaluated{Value{true, b, 0}, 0};
  };
  auto make_word = [](Word w, unsigned width) {
    return Evaluated{Value{false, false, w & mask_for(width)}, width};
  };
  switch (e.op) {
    case ExprOp::BoolLit:
      return make_bool(e.bval);
    case ExprOp::WordLit:
      return make_word(e.value, e.width ? static_cast<unsigned>(e.width)
                                        : word_width);
    case ExprOp::BitVecVal: {
      Evaluated inner = eval_word_rec(*e.args.at(0), env);
      return make_word(inner.value.w, static_cast<unsigned>(e.width));
    }
    case ExprOp::Param: {
      auto it = env.params->find(e.name);
      if (it == env.params->end())
        throw std::logic_error("unbound parameter: " + e.name);
      return make_word(it->second, word_width);
    }
    case ExprOp::ConstRef: {
      auto v = env.constants->find(e.name);
      if (!v) throw std::logic_error("unbound constant: " + e.name);
      return make_word(*v, word_width);
    }
    case ExprOp::FreeName:
      throw std::logic_error("untypechecked free name: " + e.name);
    case ExprOp::Read: {
      const KernelState* s =
          e.snap == Snapshot::Old ? env.old_state : env.new_state;
      if (!s) throw std::logic_error("new-state read with no new state");
      const FieldInfo* f = env.schema->find(e.path);
      if (!f) throw std::logic_error("read of unknown field " + e.path.str());
      std::vector<Word> idx;
      idx.reserve(e.args.size());
      for (const auto& a : e.args) idx.push_back(eval_word_rec(*a, env).value.w);
      auto cell = env.schema->cell_index(*f, idx);
      return make_word(cell ? s->cell(*cell) : 0, word_width);
    }
    case ExprOp::And: {
      bool r = true;
      for (const auto& a : e.args) r = eval_rec(*a, env).value.b && r;
      return make_bool(r);
    }
    case ExprOp::Or: {
      bool r = false;
      for (const auto& a : e.args) r = eval_rec(*a, env).value.b || r;
      return make_bool(r);
    }
    case ExprOp::Not:
      return make_bool(!eval_rec(*e.args.at(0), env).value.b);
    case ExprOp::Implies: {
      bool a = eval_rec(*e.args.at(0), env).value.b;
      bool b = eval_rec(*e.args.at(1), env).value.b;
      return make_bool(!a || b);
    }
    default:
      break;
  }
  Evaluated a = eval_word_rec(*e.args.at(0), env);
  Evaluated b = eval_word_rec(*e.args.at(1), env);
  const unsigned w = a.width;
  const Word av = a.value.w, bv = b.value.w;
  switch (e.op) {
    case ExprOp::Eq: return Evaluated{Value{true, av == bv, 0}, 0};
    case ExprOp::Ne: return Evaluated{Value{true, av != bv, 0}, 0};
    case ExprOp::Ult: return Evaluated{Value{true, av < bv, 0}, 0};
    case ExprOp::Ule: return Evaluated{Value{true, av <= bv, 0}, 0};
    case ExprOp::Ugt: return Evaluated{Value{true, av > bv, 0}, 0};
    case ExprOp::Uge: return Evaluated{Value{true, av >= bv, 0}, 0};
    case ExprOp::Slt:
      return Evaluated{Value{true, as_signed(av, w) < as_signed(bv, w), 0}, 0};
    case ExprOp::Sle:
      return Evaluated{Value{true, as_signed(av, w) <= as_signed(bv, w), 0}, 0};
    case ExprOp::Sgt:
      return Evaluated{Value{true, as_signed(av, w) > as_signed(bv, w), 0}, 0};
    case ExprOp::Sge:
      return Evaluated{Value{true, as_signed(av, w) >= as_signed(bv, w), 0}, 0};
    case ExprOp::Add: return Evaluated{Value{false, false, (av + bv) & mask_for(w)}, w};
    case ExprOp::Sub: return Evaluated{Value{false, false, (av - bv) & mask_for(w)}, w};
    case ExprOp::Mul: return Evaluated{Value{false, false, (av * bv) & mask_for(w)}, w};
    case ExprOp::UDiv:
      // SMT-LIB semantics: division by zero yields all ones.
      return Evaluated{Value{false, false,
                             bv == 0 ? mask_for(w) : (av / bv) & mask_for(w)},
                       w};
    case ExprOp::Shl:
      return Evaluated{
          Value{false, false, bv >= w ? 0 : (av << bv) & mask_for(w)}, w};
    case ExprOp::BitOr: return Evaluated{Value{false, false, av | bv}, w};
    case ExprOp::BitAnd: return Evaluated{Value{false, false, av & bv}, w};
    default:
      throw std::logic_error("unhandled expression operator");
  }
}

}  // namespace

Value eval_expr(const Expr& e, const EvalEnv& env) {
  return eval_rec(e, env).value;
}

std::string render_literal(Word v, int width) {
  if (width % 4 == 0) {
    static const char* hex = "0123456789abcdef";
    std::string out = "#x";
    for (int nib = width / 4 - 1; nib >= 0; --nib)
      out += hex[(v >> (nib * 4)) & 0xF];
    return out;
  }
  std::string out = "#b";
  for (int bit = width - 1; bit >= 0; --bit)
    out += ((v >> bit) & 1) ? '1' : '0';
  return out;
}

namespace {

const char* smt_op_name(ExprOp op) {
  switch (op) {
    case ExprOp::And: return "and";
    case ExprOp::Or: return "or";
    case ExprOp::Not: return "not";
    case ExprOp::Implies: return "=>";
    case ExprOp::Eq: return "=";
    case ExprOp::Ult: return "bvult";
    case ExprOp::Ule: return "bvule";
    case ExprOp::Ugt: return "bvugt";
    case ExprOp::Uge: return "bvuge";
    case ExprOp::Slt: return "bvslt";
    case ExprOp::Sle: return "bvsle";
    case ExprOp::Sgt: return "bvsgt";
    case ExprOp::Sge: return "bvsge";
    case ExprOp::Add: return "bvadd";
    case ExprOp::Sub: return "bvsub";
    case ExprOp::Mul: return "bvmul";
    case ExprOp::UDiv: return "bvudiv";
    case ExprOp::Shl: return "bvshl";
    case ExprOp::BitOr: return "bvor";
    case ExprOp::BitAnd: return "bvand";
    default: return nullptr;
  }
}

std::string render_read(const Expr& e, const TermEnv& env) {
  const StateSchema& schema = *env.schema;
  const unsigned w = schema.config().word_width;
  const FieldInfo* f = schema.find(e.path);
  if (!f) throw std::logic_error("render of unknown field " + e.path.str());
  const auto& cell_term =
      e.snap == Snapshot::Old ? env.old_cell : env.new_cell;
  if (!cell_term) throw std::logic_error("new-state read with no new map");
  if (f->arity == 0) return cell_term(f->base);

  // Constant indices collapse to the addressed cell (or the 0 default).
  bool all_const = true;
  std::vector<Word> const_idx;
  for (const auto& a : e.args) {
    if (a->op == ExprOp::WordLit) {
      const_idx.push_back(a->value);
    } else {
      all_const = false;
      break;
    }
  }
  if (all_const && const_idx.size() == f->arity) {
    auto cell = schema.cell_index(*f, const_idx);
    return cell ? cell_term(*cell) : render_literal(0, static_cast<int>(w));
  }

  std::vector<std::string> idx_terms;
  idx_terms.reserve(e.args.size());
  for (const auto& a : e.args) idx_terms.push_back(render_term(*a, env));

  // Nested ite chain over the (small) index domain, defaulting to 0.
  std::function<std::string(unsigned, std::vector<Word>&)> build =
      [&](unsigned depth, std::vector<Word>& prefix) -> std::string {
    if (depth == f->arity) {
      auto cell = schema.cell_index(*f, prefix);
      return cell_term(*cell);
    }
    std::string out = render_literal(0, static_cast<int>(w));
    for (Word i = f->dims[depth]; i-- > 0;) {
      prefix.push_back(i);
      std::string hit = build(depth + 1, prefix);
      prefix.pop_back();
      out = "(ite (= " + idx_terms[depth] + " " +
            render_literal(i, static_cast<int>(w)) + ") " + hit + " " + out +
            ")";
    }
    return out;
  };
  std::vector<Word> prefix;
  return build(0, prefix);
}

}  // namespace

std::string render_term(const Expr& e, const TermEnv& env) {
  switch (e.op) {
    case ExprOp::BoolLit:
      return e.bval ? "true" : "false";
    case ExprOp::WordLit:
      return render_literal(e.value, e.width);
    case ExprOp::BitVecVal:
      throw std::logic_error("BitVecVal must be pinned before rendering");
    case ExprOp::Param:
      return env.param(e.name);
    case ExprOp::ConstRef: {
      auto v = env.constants->find(e.name);
      if (!v) throw std::logic_error("unbound constant: " + e.name);
      return render_literal(*v,
                            static_cast<int>(env.schema->config().word_width));
    }
    case ExprOp::FreeName:
      throw std::logic_error("untypechecked free name: " + e.name);
    case ExprOp::Read:
      return render_read(e, env);
    case ExprOp::Ne: {
      std::string a = render_term(*e.args.at(0), env);
      std::string b = render_term(*e.args.at(1), env);
      return "(not (= " + a + " " + b + "))";
    }
    default: {
      const char* op = smt_op_name(e.op);
      if (!op) throw std::logic_error("unhandled operator in render_term");
      std::string out = "(";
      out += op;
      for (const auto& a : e.args) {
        out += " ";
        out += render_term(*a, env);
      }
      out += ")";
      return out;
    }
  }
}

namespace {

// Surface precedence, loosest to tightest. Used to minimize parentheses.
int precedence(ExprOp op) {
  switch (op) {
    case ExprOp::Eq: case ExprOp::Ne: case ExprOp::Slt: case ExprOp::Sgt:
      return 1;
    case ExprOp::BitOr: return 2;
    case ExprOp::BitAnd: return 3;
    case ExprOp::Shl: return 4;
    case ExprOp::Add: case ExprOp::Sub: return 5;
    case ExprOp::Mul: return 6;
    default: return 7;
  }
}

const char* surface_op(ExprOp op) {
  switch (op) {
    case ExprOp::Eq: return "==";
    case ExprOp::Ne: return "!=";
    case ExprOp::Slt: return "<";
    case ExprOp::Sgt: return ">";
    case ExprOp::BitOr: return "|";
    case ExprOp::BitAnd: return "&";
    case ExprOp::Shl: return "<<";
    case ExprOp::Add: return "+";
    case ExprOp::Sub: return "-";
    case ExprOp::Mul: return "*";
    default: return nullptr;
  }
}

std::string to_source(const Expr& e, int parent_prec) {
  auto call = [&](const char* fn) {
    std::string out = fn;
    out += "(";
    for (std::size_t i = 0; i < e.args.size(); ++i) {
      if (i) out += ", ";
      out += to_source(*e.args[i], 0);
    }
    return out + ")";
  };
  switch (e.op) {
    case ExprOp::BoolLit: return e.bval ? "True" : "False";
    case ExprOp::WordLit: return std::to_string(e.value);
    case ExprOp::BitVecVal:
      return "z3.BitVecVal(" + to_source(*e.args.at(0), 0) + ", " +
             std::to_string(e.width) + ")";
    case ExprOp::Param: return e.name;
    case ExprOp::ConstRef: return "dt." + e.name;
    case ExprOp::FreeName: return e.name;
    case ExprOp::Read: {
      std::string base = e.snap == Snapshot::Old ? "old" : "new";
      if (e.path.field.empty()) return base + "." + e.path.root;
      std::string out = base + "." + e.path.root + "[" +
                        to_source(*e.args.at(0), 0) + "]." + e.path.field;
      if (e.args.size() == 2) {
        const char open = e.bracket_read ? '[' : '(';
        const char close = e.bracket_read ? ']' : ')';
        out += open + to_source(*e.args.at(1), 0) + close;
      }
      return out;
    }
    case ExprOp::And: return call("z3.And");
    case ExprOp::Or: return call("z3.Or");
    case ExprOp::Not: return call("z3.Not");
    case ExprOp::Implies: return call("z3.Implies");
    case ExprOp::Ult: return call("z3.ULT");
    case ExprOp::Ule: return call("z3.ULE");
    case ExprOp::Ugt: return call("z3.UGT");
    case ExprOp::Uge: return call("z3.UGE");
    case ExprOp::UDiv: return call("z3.UDiv");
    case ExprOp::Sle: return call("z3.__sle");  // not surface-reachable
    case ExprOp::Sge: return call("z3.__sge");  // not surface-reachable
    default: {
      const char* op = surface_op(e.op);
      if (!op) throw std::logic_error("unprintable operator");
      int prec = precedence(e.op);
      std::string out = to_source(*e.args.at(0), prec) + " " + op + " " +
                        to_source(*e.args.at(1), prec + 1);
      if (prec < parent_prec) return "(" + out + ")";
      return out;
    }
  }
}

}  // namespace

std::string expr_to_source(const Expr& e) { return to_source(e, 0); }

}  // namespace specforge
