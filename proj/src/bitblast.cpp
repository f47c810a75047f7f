// Copyright (c) SpecForge contributors.
// SPDX-License-Identifier: Apache-2.0
//
// QF_BV bit blasting with structural hashing. Gates fold constants and
// dedupe structurally identical subcircuits, so the equal subterms that
// equivalence queries repeat on both sides collapse to the same literals.
#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>
#include <tuple>

#include "specforge/smt.hpp"

namespace specforge::smt {

namespace {

struct Sexp {
  bool is_atom = true;
  std::string atom;
  std::vector<Sexp> items;
};

struct SexpError {
  std::string message;
};

class SexpReader {
 public:
  explicit SexpReader(std::string_view text) : text_(text) {}

  bool at_end() {
    skip_ws();
    return pos_ >= text_.size();
  }

  Sexp read() {
    skip_ws();
    if (pos_ >= text_.size()) throw SexpError{"unexpected end of input"};
    char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      Sexp s;
      s.is_atom = false;
      for (;;) {
        skip_ws();
        if (pos_ >= text_.size()) throw SexpError{"unbalanced '('"};
        if (text_[pos_] == ')') {
          ++pos_;
          return s;
        }
        s.items.push_back(read());
      }
    }
    if (c == ')') throw SexpError{"unexpected ')'"};
    if (c == '"') {
      std::size_t j = pos_ + 1;
      while (j < text_.size() && text_[j] != '"') ++j;
      Sexp s;
      s.atom = std::string(text_.substr(pos_, j + 1 - pos_));
      pos_ = j + 1;
      return s;
    }
    std::size_t j = pos_;
    while (j < text_.size() && !std::isspace(static_cast<unsigned char>(text_[j])) &&
           text_[j] != '(' && text_[j] != ')' && text_[j] != ';')
      ++j;
    Sexp s;
    s.atom = std::string(text_.substr(pos_, j - pos_));
    pos_ = j;
    return s;
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == ';') {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

bool parse_bv_literal(const Sexp& s, Word& value, unsigned& width) {
  if (s.is_atom) {
    const std::string& a = s.atom;
    if (a.size() > 2 && a[0] == '#' && a[1] == 'x') {
      value = 0;
      for (std::size_t i = 2; i < a.size(); ++i) {
        char c = static_cast<char>(std::tolower(a[i]));
        int d = c >= 'a' ? c - 'a' + 10 : c - '0';
        value = (value << 4) | static_cast<Word>(d);
      }
      width = static_cast<unsigned>(4 * (a.size() - 2));
      return true;
    }
    if (a.size() > 2 && a[0] == '#' && a[1] == 'b') {
      value = 0;
      for (std::size_t i = 2; i < a.size(); ++i)
        value = (value << 1) | static_cast<Word>(a[i] == '1');
      width = static_cast<unsigned>(a.size() - 2);
      return true;
    }
    return false;
  }
  // (_ bvN w)
  if (s.items.size() == 3 && s.items[0].is_atom && s.items[0].atom == "_" &&
      s.items[1].is_atom && s.items[1].atom.rfind("bv", 0) == 0) {
    value = std::stoull(s.items[1].atom.substr(2));
    width = static_cast<unsigned>(std::stoul(s.items[2].atom));
    if (width < 64) value &= (Word{1} << width) - 1;
    return true;
  }
  return false;
}

// ---- gate construction with structural hashing -----------------------

class Gates {
 public:
  explicit Gates(SatSolver& sat) : sat_(sat) {}

  int t() const { return sat_.true_lit(); }
  int f() const { return sat_.false_lit(); }

  int and2(int a, int b) {
    if (a == f() || b == f()) return f();
    if (a == t()) return b;
    if (b == t()) return a;
    if (a == b) return a;
    if (a == -b) return f();
    if (a > b) std::swap(a, b);
    auto key = std::make_tuple(1, a, b, 0);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    int g = sat_.new_var();
    sat_.add_clause({-g, a});
    sat_.add_clause({-g, b});
    sat_.add_clause({g, -a, -b});
    cache_.emplace(key, g);
    return g;
  }

  int or2(int a, int b) { return -and2(-a, -b); }

  int xor2(int a, int b) {
    bool flip = false;
    if (a < 0) { a = -a; flip = !flip; }
    if (b < 0) { b = -b; flip = !flip; }
    int base;
    if (a == t()) base = -b;
    else if (b == t()) base = -a;
    else if (a == b) base = f();
    else {
      if (a > b) std::swap(a, b);
      auto key = std::make_tuple(2, a, b, 0);
      auto it = cache_.find(key);
      if (it != cache_.end()) {
        base = it->second;
      } else {
        int g = sat_.new_var();
        sat_.add_clause({-g, a, b});
        sat_.add_clause({-g, -a, -b});
        sat_.add_clause({g, -a, b});
        sat_.add_clause({g, a, -b});
        cache_.emplace(key, g);
        base = g;
      }
    }
    return flip ? -base : base;
  }

  int iff2(int a, int b) { return -xor2(a, b); }

  int ite(int s, int a, int b) {
    if (s == t()) return a;
    if (s == f()) return b;
    if (a == b) return a;
    if (s < 0) { s = -s; std::swap(a, b); }
    if (a == t()) return or2(s, b);
    if (a == f()) return and2(-s, b);
    if (b == t()) return or2(-s, a);
    if (b == f()) return and2(s, a);
    if (a == -b) return xor2(s, b);
    auto key = std::make_tuple(3, s, a, b);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    int g = sat_.new_var();
    sat_.add_clause({-g, -s, a});
    sat_.add_clause({-g, s, b});
    sat_.add_clause({g, -s, -a});
    sat_.add_clause({g, s, -b});
    sat_.add_clause({-g, a, b});
    sat_.add_clause({g, -a, -b});
    cache_.emplace(key, g);
    return g;
  }

  int maj3(int a, int b, int c) {
    if (a == t()) return or2(b, c);
    if (a == f()) return and2(b, c);
    if (b == t()) return or2(a, c);
    if (b == f()) return and2(a, c);
    if (c == t()) return or2(a, b);
    if (c == f()) return and2(a, b);
    if (a == b) return a;
    if (a == c) return a;
    if (b == c) return b;
    if (a == -b) return c;
    if (a == -c) return b;
    if (b == -c) return a;
    int v[3] = {a, b, c};
    std::sort(v, v + 3);
    auto key = std::make_tuple(4, v[0], v[1], v[2]);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    int g = sat_.new_var();
    sat_.add_clause({-g, v[0], v[1]});
    sat_.add_clause({-g, v[0], v[2]});
    sat_.add_clause({-g, v[1], v[2]});
    sat_.add_clause({g, -v[0], -v[1]});
    sat_.add_clause({g, -v[0], -v[2]});
    sat_.add_clause({g, -v[1], -v[2]});
    cache_.emplace(key, g);
    return g;
  }

 private:
  SatSolver& sat_;
  std::map<std::tuple<int, int, int, int>, int> cache_;
};

// ---- bitvector circuits ----------------------------------------------

struct BV {
  std::vector<int> bits;  // LSB first
  unsigned width() const { return static_cast<unsigned>(bits.size()); }
};

class Blaster {
 public:
  Blaster() : gates_(sat_) {}

  SatSolver& sat() { return sat_; }
  Gates& g() { return gates_; }

  BV bv_const(Word v, unsigned w) {
    BV out;
    out.bits.reserve(w);
    for (unsigned i = 0; i < w; ++i)
      out.bits.push_back(((v >> i) & 1) ? gates_.t() : gates_.f());
    return out;
  }

  BV bv_var(unsigned w) {
    BV out;
    out.bits.reserve(w);
    for (unsigned i = 0; i < w; ++i) out.bits.push_back(sat_.new_var());
    return out;
  }

  std::optional<Word> const_value(const BV& a) const {
    Word v = 0;
    for (unsigned i = 0; i < a.width(); ++i) {
      if (a.bits[i] == 1) v |= Word{1} << i;
      else if (a.bits[i] != -1) return std::nullopt;
    }
    return v;
  }

  BV bv_not(const BV& a) {
    BV out = a;
    for (auto& b : out.bits) b = -b;
    return out;
  }

  BV bv_bin(const BV& a, const BV& b, int (Gates::*op)(int, int)) {
    BV out;
    out.bits.reserve(a.width());
    for (unsigned i = 0; i < a.width(); ++i)
      out.bits.push_back((gates_.*op)(a.bits[i], b.bits[i]));
    return out;
  }

  BV add(const BV& a, const BV& b, int carry_in) {
    BV out;
    out.bits.reserve(a.width());
    int carry = carry_in;
    for (unsigned i = 0; i < a.width(); ++i) {
      int s = gates_.xor2(gates_.xor2(a.bits[i], b.bits[i]), carry);
      carry = gates_.maj3(a.bits[i], b.bits[i], carry);
      out.bits.push_back(s);
    }
    return out;
  }

  BV sub(const BV& a, const BV& b) { return add(a, bv_not(b), gates_.t()); }

  BV neg(const BV& a) {
    return add(bv_const(0, a.width()), bv_not(a), gates_.t());
  }

  BV shift_const(const BV& a, long amount, bool left) {
    unsigned w = a.width();
    BV out = bv_const(0, w);
    for (unsigned i = 0; i < w; ++i) {
      long src = left ? static_cast<long>(i) - amount
                      : static_cast<long>(i) + amount;
      if (src >= 0 && src < static_cast<long>(w))
        out.bits[i] = a.bits[static_cast<std::size_t>(src)];
    }
    return out;
  }

  BV mux(int s, const BV& a, const BV& b) {
    BV out;
    out.bits.reserve(a.width());
    for (unsigned i = 0; i < a.width(); ++i)
      out.bits.push_back(gates_.ite(s, a.bits[i], b.bits[i]));
    return out;
  }

  BV mul(const BV& a0, const BV& b0) {
    const BV* a = &a0;
    const BV* b = &b0;
    // Prefer the operand with more constant bits as the multiplier.
    auto const_bits = [&](const BV& x) {
      int n = 0;
      for (int bit : x.bits)
        if (bit == 1 || bit == -1) ++n;
      return n;
    };
    if (const_bits(a0) > const_bits(b0)) std::swap(a, b);
    unsigned w = a->width();
    BV acc = bv_const(0, w);
    for (unsigned i = 0; i < w; ++i) {
      int sel = b->bits[i];
      if (sel == -1) continue;
      BV shifted = shift_const(*a, static_cast<long>(i), true);
      BV addend = shifted;
      if (sel != 1)
        for (auto& bit : addend.bits) bit = gates_.and2(bit, sel);
      acc = add(acc, addend, gates_.f());
    }
    return acc;
  }

  int ult(const BV& a, const BV& b) {
    int lt = gates_.f();
    for (unsigned i = 0; i < a.width(); ++i) {
      int bit_lt = gates_.and2(-a.bits[i], b.bits[i]);
      int bit_eq = gates_.iff2(a.bits[i], b.bits[i]);
      lt = gates_.or2(bit_lt, gates_.and2(bit_eq, lt));
    }
    return lt;
  }

  int slt(const BV& a, const BV& b) {
    BV a2 = a, b2 = b;
    a2.bits.back() = -a2.bits.back();
    b2.bits.back() = -b2.bits.back();
    return ult(a2, b2);
  }

  int eq(const BV& a, const BV& b) {
    int acc = gates_.t();
    for (unsigned i = 0; i < a.width(); ++i)
      acc = gates_.and2(acc, gates_.iff2(a.bits[i], b.bits[i]));
    return acc;
  }

  // Restoring division; SMT-LIB semantics for a zero divisor.
  void udiv_urem(const BV& n, const BV& d, BV& q_out, BV& r_out) {
    unsigned w = n.width();
    if (auto dv = const_value(d)) {
      if (*dv == 0) {
        q_out = bv_const(~Word{0}, w);
        r_out = n;
        return;
      }
      if ((*dv & (*dv - 1)) == 0) {  // power of two
        unsigned k = 0;
        while ((Word{1} << k) != *dv) ++k;
        q_out = shift_const(n, k, false);
        r_out = n;
        for (unsigned i = k; i < w; ++i) r_out.bits[i] = gates_.f();
        return;
      }
    }
    BV r = bv_const(0, w + 1);
    BV dext = d;
    dext.bits.push_back(gates_.f());
    BV q = bv_const(0, w);
    for (unsigned i = w; i-- > 0;) {
      // r = (r << 1) | n[i]
      for (unsigned j = w; j >= 1; --j) r.bits[j] = r.bits[j - 1];
      r.bits[0] = n.bits[i];
      int ge = -ult(r, dext);
      q.bits[i] = ge;
      r = mux(ge, sub(r, dext), r);
    }
    r.bits.pop_back();
    if (const_value(d)) {
      q_out = q;
      r_out = r;
      return;
    }
    int dz = eq(d, bv_const(0, w));
    q_out = mux(dz, bv_const(~Word{0}, w), q);
    r_out = mux(dz, n, r);
  }

  BV shift_var(const BV& a, const BV& sh, bool left) {
    unsigned w = a.width();
    if (auto sv = const_value(sh)) {
      if (*sv >= w) return bv_const(0, w);
      return shift_const(a, static_cast<long>(*sv), left);
    }
    BV cur = a;
    for (unsigned k = 0; (Word{1} << k) < w; ++k)
      cur = mux(sh.bits[k], shift_const(cur, 1L << k, left), cur);
    int in_range = ult(sh, bv_const(w, sh.width()));
    return mux(in_range, cur, bv_const(0, w));
  }

 private:
  SatSolver sat_;
  Gates gates_{sat_};
};

// ---- script interpretation -------------------------------------------

struct SymbolDecl {
  std::string name;
  bool is_bool = false;
  unsigned width = 0;
};

struct TermRef {
  bool is_bool = false;
  int lit = 0;
  BV bv;
};

class ScriptRunner {
 public:
  SatStatus run(const std::string& script) {
    SexpReader reader(script);
    while (!reader.at_end()) {
      Sexp cmd = reader.read();
      if (cmd.is_atom || cmd.items.empty() || !cmd.items[0].is_atom)
        throw SolverError("malformed SMT-LIB command");
      const std::string& head = cmd.items[0].atom;
      if (head == "set-option" || head == "set-logic" || head == "set-info" ||
          head == "get-model" || head == "exit" || head == "echo")
        continue;
      if (head == "declare-const" || head == "declare-fun") {
        declare(cmd);
      } else if (head == "assert") {
        TermRef t = eval(cmd.items.at(1));
        if (!t.is_bool) throw SolverError("assert needs a boolean term");
        blaster_.sat().add_clause({t.lit});
      } else if (head == "check-sat") {
        if (!checked_) {
          status_ = blaster_.sat().solve();
          checked_ = true;
        }
      } else {
        throw SolverError("unsupported SMT-LIB command: " + head);
      }
    }
    if (!checked_) throw SolverError("script has no (check-sat)");
    return status_;
  }

  const std::vector<SymbolDecl>& decls() const { return decls_; }

  std::map<std::string, Word> model() {
    std::map<std::string, Word> m;
    if (status_ != SatStatus::Sat) return m;
    SatSolver& sat = blaster_.sat();
    for (const auto& d : decls_) {
      const TermRef& t = env_.at(d.name);
      if (d.is_bool) {
        m[d.name] = sat.lit_value(t.lit) ? 1 : 0;
      } else {
        Word v = 0;
        for (unsigned i = 0; i < d.width; ++i)
          if (sat.lit_value(t.bv.bits[i])) v |= Word{1} << i;
        m[d.name] = v;
      }
    }
    return m;
  }

 private:
  void declare(const Sexp& cmd) {
    const std::string& name = cmd.items.at(1).atom;
    const Sexp& sort =
        cmd.items[0].atom == "declare-const" ? cmd.items.at(2) : cmd.items.at(3);
    SymbolDecl d;
    d.name = name;
    TermRef ref;
    if (sort.is_atom && sort.atom == "Bool") {
      d.is_bool = true;
      ref.is_bool = true;
      ref.lit = blaster_.sat().new_var();
    } else if (!sort.is_atom && sort.items.size() == 3 &&
               sort.items[1].atom == "BitVec") {
      d.width = static_cast<unsigned>(std::stoul(sort.items[2].atom));
      ref.bv = blaster_.bv_var(d.width);
    } else {
      throw SolverError("unsupported sort for " + name);
    }
    decls_.push_back(d);
    env_.emplace(name, std::move(ref));
  }

  TermRef bool_ref(int lit) {
    TermRef t;
    t.is_bool = true;
    t.lit = lit;
    return t;
  }
  TermRef bv_ref(BV bv) {
    TermRef t;
    t.bv = std::move(bv);
    return t;
  }

  TermRef eval(const Sexp& s) {
    Word lv;
    unsigned lw;
    if (parse_bv_literal(s, lv, lw)) return bv_ref(blaster_.bv_const(lv, lw));
    if (s.is_atom) {
      if (s.atom == "true") return bool_ref(blaster_.g().t());
      if (s.atom == "false") return bool_ref(blaster_.g().f());
      auto it = env_.find(s.atom);
      if (it == env_.end()) throw SolverError("unknown symbol: " + s.atom);
      return it->second;
    }
    if (s.items.empty() || !s.items[0].is_atom)
      throw SolverError("malformed term");
    const std::string& op = s.items[0].atom;
    auto arg = [&](std::size_t i) { return eval(s.items.at(i)); };
    auto bool_arg = [&](std::size_t i) {
      TermRef t = arg(i);
      if (!t.is_bool) throw SolverError(op + " expects Bool");
      return t.lit;
    };
    auto bv_arg = [&](std::size_t i) {
      TermRef t = arg(i);
      if (t.is_bool) throw SolverError(op + " expects BitVec");
      return t.bv;
    };
    Gates& g = blaster_.g();
    if (op == "and") {
      int acc = g.t();
      for (std::size_t i = 1; i < s.items.size(); ++i)
        acc = g.and2(acc, bool_arg(i));
      return bool_ref(acc);
    }
    if (op == "or") {
      int acc = g.f();
      for (std::size_t i = 1; i < s.items.size(); ++i)
        acc = g.or2(acc, bool_arg(i));
      return bool_ref(acc);
    }
    if (op == "not") return bool_ref(-bool_arg(1));
    if (op == "=>") {
      int acc = bool_arg(s.items.size() - 1);
      for (std::size_t i = s.items.size() - 1; i-- > 1;)
        acc = g.or2(-bool_arg(i), acc);
      return bool_ref(acc);
    }
    if (op == "xor") {
      int acc = g.f();
      for (std::size_t i = 1; i < s.items.size(); ++i)
        acc = g.xor2(acc, bool_arg(i));
      return bool_ref(acc);
    }
    if (op == "=" || op == "distinct") {
      TermRef first = arg(1);
      int acc = g.t();
      std::vector<TermRef> rest;
      rest.push_back(first);
      for (std::size_t i = 2; i < s.items.size(); ++i) rest.push_back(arg(i));
      if (op == "=") {
        for (std::size_t i = 1; i < rest.size(); ++i) {
          int e = rest[i].is_bool
                      ? g.iff2(rest[i - 1].lit, rest[i].lit)
                      : blaster_.eq(rest[i - 1].bv, rest[i].bv);
          acc = g.and2(acc, e);
        }
        return bool_ref(acc);
      }
      for (std::size_t i = 0; i < rest.size(); ++i)
        for (std::size_t j = i + 1; j < rest.size(); ++j) {
          int e = rest[i].is_bool ? g.iff2(rest[i].lit, rest[j].lit)
                                  : blaster_.eq(rest[i].bv, rest[j].bv);
          acc = g.and2(acc, -e);
        }
      return bool_ref(acc);
    }
    if (op == "ite") {
      int c = bool_arg(1);
      TermRef a = arg(2);
      TermRef b = arg(3);
      if (a.is_bool != b.is_bool) throw SolverError("ite branch sorts differ");
      if (a.is_bool) return bool_ref(g.ite(c, a.lit, b.lit));
      return bv_ref(blaster_.mux(c, a.bv, b.bv));
    }
    if (op == "bvnot") return bv_ref(blaster_.bv_not(bv_arg(1)));
    if (op == "bvneg") return bv_ref(blaster_.neg(bv_arg(1)));

    BV a = bv_arg(1);
    BV b = bv_arg(2);
    if (a.width() != b.width())
      throw SolverError(op + " operand widths differ");
    if (op == "bvand") return bv_ref(blaster_.bv_bin(a, b, &Gates::and2));
    if (op == "bvor") return bv_ref(blaster_.bv_bin(a, b, &Gates::or2));
    if (op == "bvxor") return bv_ref(blaster_.bv_bin(a, b, &Gates::xor2));
    if (op == "bvadd") return bv_ref(blaster_.add(a, b, g.f()));
    if (op == "bvsub") return bv_ref(blaster_.sub(a, b));
    if (op == "bvmul") return bv_ref(blaster_.mul(a, b));
    if (op == "bvudiv" || op == "bvurem") {
      BV q, r;
      blaster_.udiv_urem(a, b, q, r);
      return bv_ref(op == "bvudiv" ? q : r);
    }
    if (op == "bvshl") return bv_ref(blaster_.shift_var(a, b, true));
    if (op == "bvlshr") return bv_ref(blaster_.shift_var(a, b, false));
    if (op == "bvult") return bool_ref(blaster_.ult(a, b));
    if (op == "bvule") return bool_ref(-blaster_.ult(b, a));
    if (op == "bvugt") return bool_ref(blaster_.ult(b, a));
    if (op == "bvuge") return bool_ref(-blaster_.ult(a, b));
    if (op == "bvslt") return bool_ref(blaster_.slt(a, b));
    if (op == "bvsle") return bool_ref(-blaster_.slt(b, a));
    if (op == "bvsgt") return bool_ref(blaster_.slt(b, a));
    if (op == "bvsge") return bool_ref(-blaster_.slt(a, b));
    throw SolverError("unsupported operator: " + op);
  }

  Blaster blaster_;
  std::map<std::string, TermRef> env_;
  std::vector<SymbolDecl> decls_;
  SatStatus status_ = SatStatus::Unknown;
  bool checked_ = false;
};

}  // namespace

SmtResult solve_script(const std::string& script) {
  try {
    ScriptRunner runner;
    SmtResult out;
    out.status = runner.run(script);
    out.model = runner.model();
    return out;
  } catch (const SexpError& e) {
    throw SolverError("SMT-LIB parse error: " + e.message);
  }
}

std::string render_response(const std::string& script) {
  ScriptRunner runner;
  SatStatus status;
  try {
    status = runner.run(script);
  } catch (const SexpError& e) {
    return "(error \"" + e.message + "\")\n";
  }
  std::ostringstream out;
  if (status == SatStatus::Unsat) {
    out << "unsat\n";
    if (script.find("(get-model)") != std::string::npos)
      out << "(error \"model is not available\")\n";
    return out.str();
  }
  out << "sat\n";
  if (script.find("(get-model)") == std::string::npos) return out.str();
  auto model = runner.model();
  out << "(\n";
  for (const auto& d : runner.decls()) {
    Word v = model.count(d.name) ? model[d.name] : 0;
    if (d.is_bool) {
      out << "  (define-fun " << d.name << " () Bool "
          << (v ? "true" : "false") << ")\n";
    } else {
      out << "  (define-fun " << d.name << " () (_ BitVec " << d.width
          << ") ";
      if (d.width % 4 == 0) {
        static const char* hex = "0123456789abcdef";
        out << "#x";
        for (int nib = static_cast<int>(d.width) / 4 - 1; nib >= 0; --nib)
          out << hex[(v >> (nib * 4)) & 0xF];
      } else {
        out << "#b";
        for (int bit = static_cast<int>(d.width) - 1; bit >= 0; --bit)
          out << (((v >> bit) & 1) ? '1' : '0');
      }
      out << ")\n";
    }
  }
  out << ")\n";
  return out.str();
}

// ---- concrete term evaluation ------------------------------------------

namespace {

TermValue eval_term_rec(const Sexp& s, const TermSymbols& sym) {
  Word lv;
  unsigned lw;
  auto word = [](Word v, unsigned w) {
    TermValue t;
    t.w = w >= 64 ? v : (v & ((Word{1} << w) - 1));
    t.width = w;
    return t;
  };
  auto boolean = [](bool b) {
    TermValue t;
    t.is_bool = true;
    t.b = b;
    return t;
  };
  if (parse_bv_literal(s, lv, lw)) return word(lv, lw);
  if (s.is_atom) {
    if (s.atom == "true") return boolean(true);
    if (s.atom == "false") return boolean(false);
    auto it = sym.values.find(s.atom);
    if (it == sym.values.end())
      throw SolverError("eval_term: unknown symbol " + s.atom);
    if (it->second.second == 0) return boolean(it->second.first != 0);
    return word(it->second.first, it->second.second);
  }
  const std::string& op = s.items.at(0).atom;
  auto arg = [&](std::size_t i) { return eval_term_rec(s.items.at(i), sym); };
  if (op == "and") {
    bool acc = true;
    for (std::size_t i = 1; i < s.items.size(); ++i) acc = arg(i).b && acc;
    return boolean(acc);
  }
  if (op == "or") {
    bool acc = false;
    for (std::size_t i = 1; i < s.items.size(); ++i) acc = arg(i).b || acc;
    return boolean(acc);
  }
  if (op == "not") return boolean(!arg(1).b);
  if (op == "=>") {
    bool acc = arg(s.items.size() - 1).b;
    for (std::size_t i = s.items.size() - 1; i-- > 1;) acc = !arg(i).b || acc;
    return boolean(acc);
  }
  if (op == "xor") {
    bool acc = false;
    for (std::size_t i = 1; i < s.items.size(); ++i) acc = acc != arg(i).b;
    return boolean(acc);
  }
  if (op == "=") {
    TermValue a = arg(1), b = arg(2);
    return boolean(a.is_bool ? a.b == b.b : a.w == b.w);
  }
  if (op == "distinct") {
    TermValue a = arg(1), b = arg(2);
    return boolean(a.is_bool ? a.b != b.b : a.w != b.w);
  }
  if (op == "ite") {
    return arg(1).b ? arg(2) : arg(3);
  }
  if (op == "bvnot") {
    TermValue a = arg(1);
    return word(~a.w, a.width);
  }
  if (op == "bvneg") {
    TermValue a = arg(1);
    return word(~a.w + 1, a.width);
  }
  TermValue a = arg(1), b = arg(2);
  unsigned w = a.width;
  auto sext = [w](Word v) -> std::int64_t {
    if (w >= 64) return static_cast<std::int64_t>(v);
    Word sign = Word{1} << (w - 1);
    if (v & sign) return static_cast<std::int64_t>(v | ~((sign << 1) - 1));
    return static_cast<std::int64_t>(v);
  };
  if (op == "bvadd") return word(a.w + b.w, w);
  if (op == "bvsub") return word(a.w - b.w, w);
  if (op == "bvmul") return word(a.w * b.w, w);
  if (op == "bvudiv")
    return word(b.w == 0 ? ~Word{0} : a.w / b.w, w);
  if (op == "bvurem") return word(b.w == 0 ? a.w : a.w % b.w, w);
  if (op == "bvand") return word(a.w & b.w, w);
  if (op == "bvor") return word(a.w | b.w, w);
  if (op == "bvxor") return word(a.w ^ b.w, w);
  if (op == "bvshl") return word(b.w >= w ? 0 : a.w << b.w, w);
  if (op == "bvlshr") return word(b.w >= w ? 0 : a.w >> b.w, w);
  if (op == "bvult") return boolean(a.w < b.w);
  if (op == "bvule") return boolean(a.w <= b.w);
  if (op == "bvugt") return boolean(a.w > b.w);
  if (op == "bvuge") return boolean(a.w >= b.w);
  if (op == "bvslt") return boolean(sext(a.w) < sext(b.w));
  if (op == "bvsle") return boolean(sext(a.w) <= sext(b.w));
  if (op == "bvsgt") return boolean(sext(a.w) > sext(b.w));
  if (op == "bvsge") return boolean(sext(a.w) >= sext(b.w));
  throw SolverError("eval_term: unsupported operator " + op);
}

}  // namespace

TermValue eval_term(std::string_view term, const TermSymbols& symbols) {
  SexpReader reader(term);
  Sexp s = reader.read();
  return eval_term_rec(s, symbols);
}

struct ParsedTerm::Impl {
  Sexp sexp;
};

ParsedTerm::ParsedTerm(std::string_view term) : impl_(new Impl) {
  SexpReader reader(term);
  impl_->sexp = reader.read();
}
ParsedTerm::ParsedTerm(ParsedTerm&&) noexcept = default;
ParsedTerm& ParsedTerm::operator=(ParsedTerm&&) noexcept = default;
ParsedTerm::~ParsedTerm() = default;

TermValue ParsedTerm::eval(const TermSymbols& symbols) const {
  return eval_term_rec(impl_->sexp, symbols);
}

}  // namespace specforge::smt
