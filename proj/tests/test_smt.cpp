// Copyright (c) SpecForge contributors.
// SPDX-License-Identifier: Apache-2.0
#include <random>
#include <sstream>

#include "doctest.h"
#include "specforge/smt.hpp"

using namespace specforge;
using namespace specforge::smt;

namespace {

std::string decl2(const char* a = "a", const char* b = "b") {
  std::ostringstream s;
  s << "(set-logic QF_BV)\n(declare-const " << a
    << " (_ BitVec 64))\n(declare-const " << b << " (_ BitVec 64))\n";
  return s.str();
}

std::string hex64(Word v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "#x%016llx",
                static_cast<unsigned long long>(v));
  return buf;
}

// Solves for c = op(a, b) with pinned operands and returns the model c.
Word circuit_value(const std::string& op, Word a, Word b) {
  std::ostringstream s;
  s << decl2() << "(declare-const c (_ BitVec 64))\n";
  s << "(assert (= a " << hex64(a) << "))\n";
  s << "(assert (= b " << hex64(b) << "))\n";
  s << "(assert (= c (" << op << " a b)))\n(check-sat)\n(get-model)\n";
  SmtResult r = solve_script(s.str());
  REQUIRE(r.status == SatStatus::Sat);
  return r.model.at("c");
}

bool predicate_value(const std::string& op, Word a, Word b) {
  std::ostringstream s;
  s << decl2();
  s << "(assert (= a " << hex64(a) << "))\n";
  s << "(assert (= b " << hex64(b) << "))\n";
  s << "(assert (" << op << " a b))\n(check-sat)\n";
  SmtResult r = solve_script(s.str());
  return r.status == SatStatus::Sat;
}

}  // namespace

TEST_CASE("sat basics") {
  CHECK(solve_script("(declare-const p Bool)\n(assert p)\n(check-sat)\n")
            .status == SatStatus::Sat);
  CHECK(solve_script(
            "(declare-const p Bool)\n(assert p)\n(assert (not p))\n"
            "(check-sat)\n")
            .status == SatStatus::Unsat);
  CHECK_THROWS_AS(solve_script("(assert true)\n"), SolverError);
}

TEST_CASE("bitvector circuits match native 64-bit arithmetic") {
  std::mt19937_64 rng(2024);
  const Word specials[] = {0,
                           1,
                           2,
                           0xFFFFFFFFFFFFFFFFull,
                           0x8000000000000000ull,
                           0x7FFFFFFFFFFFFFFFull,
                           4096};
  std::vector<std::pair<Word, Word>> cases;
  for (Word a : specials)
    for (Word b : specials) cases.emplace_back(a, b);
  for (int i = 0; i < 12; ++i) cases.emplace_back(rng(), rng());
  for (int i = 0; i < 4; ++i) cases.emplace_back(rng(), rng() & 0x7F);

  for (auto [a, b] : cases) {
    CAPTURE(a);
    CAPTURE(b);
    CHECK(circuit_value("bvadd", a, b) == a + b);
    CHECK(circuit_value("bvsub", a, b) == a - b);
    CHECK(circuit_value("bvand", a, b) == (a & b));
    CHECK(circuit_value("bvor", a, b) == (a | b));
    CHECK(circuit_value("bvxor", a, b) == (a ^ b));
    CHECK(circuit_value("bvshl", a, b) == (b >= 64 ? 0 : a << b));
    CHECK(circuit_value("bvlshr", a, b) == (b >= 64 ? 0 : a >> b));
    CHECK(predicate_value("bvult", a, b) == (a < b));
    CHECK(predicate_value("bvule", a, b) == (a <= b));
    CHECK(predicate_value("bvslt", a, b) ==
          (static_cast<std::int64_t>(a) < static_cast<std::int64_t>(b)));
    CHECK(predicate_value("bvsge", a, b) ==
          (static_cast<std::int64_t>(a) >= static_cast<std::int64_t>(b)));
  }
}

TEST_CASE("multiplication and division circuits") {
  std::mt19937_64 rng(77);
  for (int i = 0; i < 10; ++i) {
    Word a = rng(), b = rng();
    CHECK(circuit_value("bvmul", a, b) == a * b);
  }
  // Division: SMT-LIB fixes x/0 = all ones, x%0 = x.
  for (Word d : {Word{0}, Word{1}, Word{3}, Word{4096}, Word{0xFFFF}}) {
    Word n = rng();
    CAPTURE(n);
    CAPTURE(d);
    CHECK(circuit_value("bvudiv", n, d) == (d == 0 ? ~Word{0} : n / d));
    CHECK(circuit_value("bvurem", n, d) == (d == 0 ? n : n % d));
  }
}

TEST_CASE("algebraic identities are unsat to refute") {
  // Commutativity of addition over all inputs.
  std::string s = decl2() +
                  "(assert (not (= (bvadd a b) (bvadd b a))))\n(check-sat)\n";
  CHECK(solve_script(s).status == SatStatus::Unsat);
  // Shift-as-multiply: a * 4096 = a << 12.
  std::string s2 =
      "(set-logic QF_BV)\n(declare-const a (_ BitVec 64))\n"
      "(assert (not (= (bvmul a #x0000000000001000) "
      "(bvshl a #x000000000000000c))))\n(check-sat)\n";
  CHECK(solve_script(s2).status == SatStatus::Unsat);
  // De Morgan on the boolean layer.
  std::string s3 =
      "(declare-const p Bool)\n(declare-const q Bool)\n"
      "(assert (not (= (not (and p q)) (or (not p) (not q)))))\n"
      "(check-sat)\n";
  CHECK(solve_script(s3).status == SatStatus::Unsat);
}

TEST_CASE("models satisfy the asserted constraints") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 20; ++i) {
    Word bound = rng() | 1;
    std::ostringstream s;
    s << decl2() << "(assert (bvult a b))\n(assert (bvule b " << hex64(bound)
      << "))\n(check-sat)\n(get-model)\n";
    SmtResult r = solve_script(s.str());
    REQUIRE(r.status == SatStatus::Sat);
    Word a = r.model.at("a"), b = r.model.at("b");
    CHECK(a < b);
    CHECK(b <= bound);
  }
}

TEST_CASE("smaller widths") {
  std::string s =
      "(set-logic QF_BV)\n(declare-const x (_ BitVec 8))\n"
      "(assert (= (bvadd x #xff) #x00))\n(check-sat)\n(get-model)\n";
  SmtResult r = solve_script(s);
  REQUIRE(r.status == SatStatus::Sat);
  CHECK(r.model.at("x") == 1);
}

TEST_CASE("render_response mimics the solver wire format") {
  std::string sat_script =
      "(declare-const x (_ BitVec 4))\n(assert (= x #x7))\n(check-sat)\n"
      "(get-model)\n";
  std::string out = render_response(sat_script);
  CHECK(out.find("sat\n") == 0);
  CHECK(out.find("(define-fun x () (_ BitVec 4) #x7)") != std::string::npos);

  std::string unsat_script =
      "(declare-const p Bool)\n(assert p)\n(assert (not p))\n(check-sat)\n"
      "(get-model)\n";
  std::string out2 = render_response(unsat_script);
  CHECK(out2.find("unsat\n") == 0);
  CHECK(out2.find("model is not available") != std::string::npos);
}

TEST_CASE("external solver driver round-trips through specforge-smt") {
  std::vector<std::string> argv{SPECFORGE_SMT_BIN};
  std::string sat_script =
      "(set-option :produce-models true)\n(set-logic QF_BV)\n"
      "(declare-const x (_ BitVec 64))\n(declare-const y (_ BitVec 64))\n"
      "(assert (= (bvadd x y) #x0000000000000100))\n"
      "(assert (bvult x #x0000000000000010))\n(check-sat)\n(get-model)\n";
  SmtResult r = run_external_solver(argv, sat_script, 30);
  REQUIRE(r.status == SatStatus::Sat);
  CHECK(r.model.at("x") + r.model.at("y") == 0x100);
  CHECK(r.model.at("x") < 0x10);

  std::string unsat_script =
      "(declare-const p Bool)\n(assert p)\n(assert (not p))\n(check-sat)\n"
      "(get-model)\n";
  CHECK(run_external_solver(argv, unsat_script, 30).status ==
        SatStatus::Unsat);

  CHECK_THROWS_AS(
      run_external_solver({"/nonexistent/solver"}, sat_script, 5),
      SolverError);
}

TEST_CASE("term evaluator") {
  TermSymbols sym;
  sym.values["a"] = {10, 64};
  sym.values["b"] = {3, 64};
  sym.values["p"] = {1, 0};
  CHECK(eval_term("(bvadd a b)", sym).w == 13);
  CHECK(eval_term("(bvudiv a #x0000000000000000)", sym).w == ~Word{0});
  CHECK(eval_term("(ite p a b)", sym).w == 10);
  CHECK(eval_term("(bvslt #xffffffffffffffff #x0000000000000000)", sym).b);
  CHECK(eval_term("(=> p (bvult b a))", sym).b);
}

TEST_CASE("CDCL agrees with brute force on random small instances") {
  std::mt19937_64 rng(987654321);
  int sat_count = 0, unsat_count = 0;
  for (int round = 0; round < 300; ++round) {
    int nvars = 3 + static_cast<int>(rng() % 12);   // 3..14
    int nclauses = 2 + static_cast<int>(rng() % 56);  // 2..57
    std::vector<std::vector<int>> clauses;
    for (int c = 0; c < nclauses; ++c) {
      int len = 1 + static_cast<int>(rng() % 4);
      std::vector<int> cl;
      for (int l = 0; l < len; ++l) {
        int var = 1 + static_cast<int>(rng() % nvars);
        cl.push_back((rng() & 1) ? var : -var);
      }
      clauses.push_back(std::move(cl));
    }

    // Brute force over all assignments.
    bool brute_sat = false;
    for (std::uint32_t m = 0; m < (1u << nvars) && !brute_sat; ++m) {
      bool all = true;
      for (const auto& cl : clauses) {
        bool any = false;
        for (int lit : cl) {
          int v = lit > 0 ? lit : -lit;
          bool val = (m >> (v - 1)) & 1;
          any = any || (lit > 0 ? val : !val);
        }
        if (!any) {
          all = false;
          break;
        }
      }
      brute_sat = all;
    }

    // The solver's reserved true-literal occupies variable 1, so shift
    // the instance by one.
    SatSolver solver;
    std::vector<int> ids(static_cast<std::size_t>(nvars) + 1, 0);
    for (int v = 1; v <= nvars; ++v) ids[static_cast<std::size_t>(v)] =
        solver.new_var();
    for (const auto& cl : clauses) {
      std::vector<int> mapped;
      for (int lit : cl)
        mapped.push_back(lit > 0 ? ids[static_cast<std::size_t>(lit)]
                                 : -ids[static_cast<std::size_t>(-lit)]);
      solver.add_clause(std::move(mapped));
    }
    SatStatus got = solver.okay() ? solver.solve() : SatStatus::Unsat;
    CAPTURE(round);
    REQUIRE(got == (brute_sat ? SatStatus::Sat : SatStatus::Unsat));
    if (brute_sat) {
      ++sat_count;
      // The reported model satisfies every clause.
      for (const auto& cl : clauses) {
        bool any = false;
        for (int lit : cl) {
          int mapped = lit > 0 ? ids[static_cast<std::size_t>(lit)]
                               : -ids[static_cast<std::size_t>(-lit)];
          any = any || solver.lit_value(mapped);
        }
        CHECK(any);
      }
    } else {
      ++unsat_count;
    }
  }
  // The mix exercises both answers.
  CHECK(sat_count > 30);
  CHECK(unsat_count > 30);
}
