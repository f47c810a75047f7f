// Copyright (c) SpecForge contributors.
// SPDX-License-Identifier: Apache-2.0
//
// specforge-smt: a minimal SMT-LIB 2 QF_BV solver speaking the same
// file/stdin contract as any external solver. Reads the script from the
// path argument (or stdin), prints sat/unsat and a define-fun model.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "specforge/smt.hpp"

int main(int argc, char** argv) {
  std::string script;
  if (argc > 1 && (std::string(argv[1]) == "--help" ||
                   std::string(argv[1]) == "-h")) {
    std::printf(
        "usage: specforge-smt [script.smt2|-]\n"
        "Reads an SMT-LIB 2 QF_BV script from the given file (or stdin)\n"
        "and prints sat/unsat plus a define-fun model block.\n");
    return 0;
  }
  if (argc > 1 && std::string(argv[1]) != "-") {
    std::ifstream in(argv[1]);
    if (!in) {
      std::cerr << "specforge-smt: cannot open " << argv[1] << "\n";
      return 2;
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    script = buf.str();
  } else {
    std::ostringstream buf;
    buf << std::cin.rdbuf();
    script = buf.str();
  }
  try {
    std::cout << specforge::smt::render_response(script);
  } catch (const specforge::smt::SolverError& e) {
    std::cout << "(error \"" << e.what() << "\")\n";
    return 1;
  }
  return 0;
}
