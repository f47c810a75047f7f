// Copyright (c) SpecForge contributors.
// SPDX-License-Identifier: Apache-2.0
#include <filesystem>
#include <fstream>
#include <sstream>

#include "specforge/verifier.hpp"

namespace specforge {

std::string verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Verified: return "Verified";
    case Verdict::Counterexample: return "Counterexample";
    case Verdict::SpecFaulted: return "SpecFaulted";
  }
  return "?";
}

std::string Witness::describe(const StateSchema& schema,
                              std::span<const CParam> params) const {
  std::ostringstream out;
  out << "args:";
  for (std::size_t i = 0; i < args.size(); ++i) {
    out << " ";
    if (i < params.size()) out << params[i].name << "=";
    out << "0x" << std::hex << args[i] << std::dec;
  }
  out << "; impl status " << impl_outcome.status << "; spec guard "
      << (spec_truth ? "true" : "false");
  if (impl_outcome.status == 0 && spec_truth) {
    for (std::size_t c = 0; c < initial.size(); ++c)
      if (impl_outcome.post.cell(c) != spec_post.cell(c)) {
        out << "; first differing cell " << schema.cell_name(c) << ": impl 0x"
            << std::hex << impl_outcome.post.cell(c) << " vs spec 0x"
            << spec_post.cell(c) << std::dec;
        break;
      }
  }
  return out.str();
}

std::string emit_smtlib(const EquivQuery& q) {
  std::ostringstream out;
  out << "(set-option :produce-models true)\n";
  out << "(set-logic QF_BV)\n";
  for (const auto& [name, width] : q.symbols)
    out << "(declare-const " << name << " (_ BitVec " << width << "))\n";
  for (const auto& a : q.asserts) out << "(assert " << a << ")\n";
  out << "(check-sat)\n";
  out << "(get-model)\n";
  return out.str();
}

namespace {

std::string arg_symbol(const std::string& name) { return "arg_" + name; }

struct QueryParts {
  TermEnv env;
  std::vector<std::pair<std::string, unsigned>> symbols;
  std::string wellformed;
  std::vector<std::string> cell_names;
};

QueryParts make_parts(const StateSchema& schema,
                      const ConstantTable& constants,
                      std::span<const CParam> params) {
  QueryParts parts;
  const unsigned w = schema.config().word_width;
  parts.cell_names.resize(schema.cell_count());
  for (std::size_t i = 0; i < schema.cell_count(); ++i) {
    parts.cell_names[i] = schema.cell_name(i);
    parts.symbols.emplace_back(parts.cell_names[i], w);
  }
  for (const auto& p : params) parts.symbols.emplace_back(arg_symbol(p.name), w);

  parts.env.schema = &schema;
  parts.env.constants = &constants;
  auto names = parts.cell_names;  // copy captured by value below
  parts.env.old_cell = [names](std::size_t i) { return names[i]; };
  parts.env.param = [](const std::string& n) { return arg_symbol(n); };

  const FieldInfo* cur = schema.find(FieldPath{"current", ""});
  parts.wellformed = "(bvult " + schema.cell_name(cur->base) + " " +
                     render_literal(schema.config().nproc,
                                    static_cast<int>(w)) +
                     ")";
  return parts;
}

/// Symbolic success guard and per-cell post terms for an implementation
/// behavior (success path only; error paths are the identity).
struct SymbolicImpl {
  std::string success;
  std::vector<std::string> cell_posts;
};

SymbolicImpl encode_behavior(const ImplBehavior& b, const TermEnv& base_env) {
  const StateSchema& schema = *base_env.schema;
  SymbolicImpl out;
  const BehaviorPath& success = b.paths.back();
  out.success = render_term(*success.guard, base_env);

  std::vector<std::string> cur(schema.cell_count());
  for (std::size_t i = 0; i < schema.cell_count(); ++i)
    cur[i] = base_env.old_cell(i);
  TermEnv env = base_env;
  env.new_cell = [&cur](std::size_t i) { return cur[i]; };

  const int w = static_cast<int>(schema.config().word_width);
  for (const auto& u : success.updates) {
    const FieldInfo* f = schema.find(u.path);
    std::vector<std::string> idx_terms;
    bool all_const = true;
    std::vector<Word> const_idx;
    for (const auto& ie : u.indices) {
      idx_terms.push_back(render_term(*ie, env));
      if (ie->op == ExprOp::WordLit) const_idx.push_back(ie->value);
      else all_const = false;
    }
    std::string rhs = render_term(*u.rhs, env);
    if (all_const) {
      auto cell = schema.cell_index(*f, const_idx);
      if (cell) cur[*cell] = rhs;
      continue;  // constant out-of-domain write: off the modeled state
    }
    for (std::size_t off = 0; off < f->span; ++off) {
      Word coords[2] = {0, 0};
      if (f->arity == 2) {
        coords[0] = static_cast<Word>(off / f->dims[1]);
        coords[1] = static_cast<Word>(off % f->dims[1]);
      } else {
        coords[0] = static_cast<Word>(off);
      }
      std::string match;
      for (unsigned d = 0; d < f->arity; ++d) {
        std::string eq =
            "(= " + idx_terms[d] + " " + render_literal(coords[d], w) + ")";
        match = match.empty() ? eq : "(and " + match + " " + eq + ")";
      }
      cur[f->base + off] =
          "(ite " + match + " " + rhs + " " + cur[f->base + off] + ")";
    }
  }

  out.cell_posts.resize(schema.cell_count());
  for (std::size_t i = 0; i < schema.cell_count(); ++i) {
    if (cur[i] == base_env.old_cell(i))
      out.cell_posts[i] = cur[i];
    else
      out.cell_posts[i] =
          "(ite " + out.success + " " + cur[i] + " " + base_env.old_cell(i) +
          ")";
  }
  return out;
}

}  // namespace

EquivQuery build_equiv_query(const ImplBehavior& b, const TypedSpec& spec,
                             const StateSchema& schema,
                             const ConstantTable& constants) {
  QueryParts parts = make_parts(schema, constants, b.params);
  SymbolicImpl impl = encode_behavior(b, parts.env);
  SymbolicSpec sym = encode_spec(spec, parts.env);

  std::string success_mismatch =
      "(xor " + impl.success + " " + sym.guard + ")";
  std::string any_cell_differs;
  for (std::size_t i = 0; i < schema.cell_count(); ++i) {
    if (impl.cell_posts[i] == sym.cell_posts[i]) continue;  // identical terms
    std::string differs =
        "(not (= " + impl.cell_posts[i] + " " + sym.cell_posts[i] + "))";
    any_cell_differs = any_cell_differs.empty()
                           ? differs
                           : "(or " + any_cell_differs + " " + differs + ")";
  }
  std::string mismatch = success_mismatch;
  if (!any_cell_differs.empty())
    mismatch = "(or " + success_mismatch + " (and " + impl.success + " " +
               sym.guard + " " + any_cell_differs + "))";

  EquivQuery q;
  q.symbols = parts.symbols;
  q.asserts.push_back(parts.wellformed);
  q.asserts.push_back(mismatch);
  return q;
}

smt::SmtResult Verifier::solve(const std::string& script,
                               const std::string& tag) {
  if (!solver_.dump_dir.empty()) {
    std::filesystem::create_directories(solver_.dump_dir);
    std::string name = tag + "-" + std::to_string(query_counter_++) + ".smt2";
    std::ofstream out(std::filesystem::path(solver_.dump_dir) / name);
    out << script;
  }
  if (solver_.command.empty()) return smt::solve_script(script);
  return smt::run_external_solver(solver_.command, script,
                                  solver_.timeout_seconds, solver_.dump_dir);
}

namespace {

KernelState state_from_model(const std::map<std::string, Word>& model,
                             const StateSchema& schema) {
  KernelState s(schema);
  for (std::size_t i = 0; i < schema.cell_count(); ++i) {
    auto it = model.find(schema.cell_name(i));
    s.set_cell(i, it == model.end() ? 0 : schema.config().truncate(it->second));
  }
  return s;
}

std::vector<Word> args_from_model(const std::map<std::string, Word>& model,
                                  std::span<const CParam> params,
                                  const KernelConfig& config) {
  std::vector<Word> args;
  for (const auto& p : params) {
    auto it = model.find(arg_symbol(p.name));
    args.push_back(it == model.end() ? 0 : config.truncate(it->second));
  }
  return args;
}

}  // namespace

VerifyOutcome Verifier::check_equiv(const ImplBehavior& b,
                                    const TypedSpec& spec) {
  VerifyOutcome out;
  if (spec.ast.params.size() != b.params.size()) {
    out.verdict = Verdict::SpecFaulted;
    out.fault = SpecFault{FaultKind::TypeSortError,
                          "specification takes " +
                              std::to_string(spec.ast.params.size()) +
                              " argument(s), " + b.name + " takes " +
                              std::to_string(b.params.size()),
                          0, 0};
    return out;
  }

  QueryParts parts = make_parts(schema_, constants_, b.params);
  SymbolicSpec sym = encode_spec(spec, parts.env);

  // Domain safety first: a write that can go out of domain under the
  // guard is a dynamic spec fault, mirrored here so the SMT and
  // differential backends classify such specs identically.
  if (!sym.domain_obligations.empty()) {
    std::string any = sym.domain_obligations.size() == 1
                          ? sym.domain_obligations[0]
                          : [&] {
                              std::string o = "(or";
                              for (const auto& t : sym.domain_obligations)
                                o += " " + t;
                              return o + ")";
                            }();
    EquivQuery dq;
    dq.symbols = parts.symbols;
    dq.asserts.push_back(parts.wellformed);
    dq.asserts.push_back(any);
    smt::SmtResult r = solve(emit_smtlib(dq), b.name + "-domain");
    if (r.status == smt::SatStatus::Unknown)
      throw smt::SolverError("solver returned unknown for " + b.name);
    if (r.status == smt::SatStatus::Sat) {
      out.verdict = Verdict::SpecFaulted;
      out.fault = SpecFault{
          FaultKind::DomainError,
          "a state write can index out of domain when the pre-condition "
          "holds",
          0, 0};
      return out;
    }
  }

  EquivQuery q = build_equiv_query(b, spec, schema_, constants_);
  smt::SmtResult r = solve(emit_smtlib(q), b.name + "-equiv");
  if (r.status == smt::SatStatus::Unknown)
    throw smt::SolverError("solver returned unknown for " + b.name);
  if (r.status == smt::SatStatus::Unsat) {
    out.verdict = Verdict::Verified;
    return out;
  }

  Witness w;
  w.initial = state_from_model(r.model, schema_);
  w.args = args_from_model(r.model, b.params, schema_.config());
  w.impl_outcome = concretize(b, schema_, constants_, w.initial, w.args);
  SpecEval se = eval_spec(spec, schema_, constants_, w.initial, w.args);
  if (se.fault) {
    // The model drove the spec into a dynamic domain fault the obligation
    // check should have caught.
    throw std::logic_error(
        "witness replay faulted in eval_spec; domain obligations are "
        "incomplete for " + b.name);
  }
  w.spec_truth = se.truth;
  w.spec_post = se.post;
  bool impl_success = w.impl_outcome.status == 0;
  bool diverges =
      impl_success != w.spec_truth ||
      (impl_success && w.spec_truth && !(w.impl_outcome.post == w.spec_post));
  if (!diverges)
    throw std::logic_error(
        "SMT counterexample does not replay for " + b.name +
        "; the symbolic encoding disagrees with concrete evaluation");
  out.verdict = Verdict::Counterexample;
  out.witness = std::move(w);
  return out;
}

KernelState Verifier::random_state(std::mt19937_64& rng) const {
  KernelState s(schema_);
  for (std::size_t i = 0; i < schema_.cell_count(); ++i) {
    // 3/4 small values so enum guards and ownership checks are reachable,
    // 1/4 full-width noise.
    Word r = rng();
    Word v = (r & 3) == 3 ? rng() : (rng() & 7);
    s.set_cell(i, schema_.config().truncate(v));
  }
  const FieldInfo* cur = schema_.find(FieldPath{"current", ""});
  s.set_cell(cur->base, rng() % schema_.config().nproc);  // well-formedness
  return s;
}

std::vector<Word> Verifier::random_args(std::span<const CParam> params,
                                        std::mt19937_64& rng) const {
  const KernelConfig& cfg = schema_.config();
  std::vector<Word> args;
  for (const auto& p : params) {
    bool in_range = (rng() & 1) == 0;
    Word domain = 0;
    if (p.type_name == "pid_t") domain = cfg.nproc;
    else if (p.type_name == "pn_t") domain = cfg.npage;
    else if (p.type_name == "fd_t") domain = cfg.nofile;
    else if (p.name == "index" || p.name == "idx") domain = cfg.page_words;
    if (in_range && domain)
      args.push_back(rng() % domain);
    else if (in_range)
      args.push_back(rng() & 0xFF);  // small but unconstrained role
    else
      args.push_back(cfg.truncate(rng()));
  }
  return args;
}

VerifyOutcome Verifier::differential_check(const ImplBehavior& b,
                                           const TypedSpec& spec,
                                           std::size_t samples,
                                           std::uint64_t seed) {
  VerifyOutcome out;
  if (spec.ast.params.size() != b.params.size()) {
    out.verdict = Verdict::SpecFaulted;
    out.fault = SpecFault{FaultKind::TypeSortError,
                          "specification arity mismatch", 0, 0};
    return out;
  }
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < samples; ++i) {
    KernelState s = random_state(rng);
    std::vector<Word> args = random_args(b.params, rng);
    ConcreteOutcome impl = concretize(b, schema_, constants_, s, args);
    SpecEval se = eval_spec(spec, schema_, constants_, s, args);
    if (se.fault) {
      out.verdict = Verdict::SpecFaulted;
      out.fault = se.fault;
      return out;
    }
    bool impl_success = impl.status == 0;
    bool diverges = impl_success != se.truth ||
                    (impl_success && se.truth && !(impl.post == se.post));
    if (diverges) {
      Witness w;
      w.initial = std::move(s);
      w.args = std::move(args);
      w.impl_outcome = std::move(impl);
      w.spec_truth = se.truth;
      w.spec_post = std::move(se.post);
      out.verdict = Verdict::Counterexample;
      out.witness = std::move(w);
      return out;
    }
  }
  out.verdict = Verdict::Verified;
  return out;
}

TaskVerdict judge_task(const std::string& task_id,
                       const std::string& gen_spec_text,
                       std::span<const ImplBehavior> variants,
                       std::span<const Verdict> oracle_pattern,
                       Verifier& verifier, const ApiInventory& inventory) {
  TaskVerdict out;
  out.task_id = task_id;
  out.oracle_pattern.assign(oracle_pattern.begin(), oracle_pattern.end());

  auto parsed = parse_spec(gen_spec_text);
  if (!parsed.ok()) {
    out.fault = parsed.fault;
    return out;
  }
  auto checked = typecheck_spec(*parsed.ast, verifier.schema(),
                                verifier.constants(), inventory);
  if (!checked.ok()) {
    out.fault = checked.fault;
    return out;
  }
  for (const auto& variant : variants) {
    VerifyOutcome vo = verifier.check_equiv(variant, *checked.spec);
    out.pattern.push_back(vo.verdict);
    out.witnesses.push_back(
        vo.witness ? vo.witness->describe(verifier.schema(), variant.params)
                   : std::string());
    if (vo.verdict == Verdict::SpecFaulted) {
      out.fault = vo.fault;
      return out;
    }
  }
  out.pass = out.pattern.size() == out.oracle_pattern.size() &&
             std::equal(out.pattern.begin(), out.pattern.end(),
                        out.oracle_pattern.begin());
  return out;
}

}  // namespace specforge
