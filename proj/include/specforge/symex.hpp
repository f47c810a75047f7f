// Copyright (c) SpecForge contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "specforge/cfront.hpp"
#include "specforge/expr.hpp"

namespace specforge {

/// One guarded execution path of an implementation. Guards are expressed
/// over the function pre-state and arguments; error paths carry no
/// updates (an error return leaves the state untouched).
struct BehaviorPath {
  ExprPtr guard;
  Word status = 0;          // 0 = success, else errno value
  std::string errname;      // "" on the success path
  std::vector<IRUpdate> updates;
};

/// The implementation behavior g: a complete, mutually exclusive set of
/// guarded paths (prefix-negation construction guarantees both).
struct ImplBehavior {
  std::string name;
  std::vector<CParam> params;
  std::vector<BehaviorPath> paths;
};

struct ConcreteOutcome {
  Word status = 0;
  KernelState post;
};

/// Symbolic execution of a loop-free IR: checks c1..cn yield n error
/// paths {~c1..~c(i-1), ci} plus one success path carrying the updates.
ImplBehavior execute(const IRFunction& ir);

/// Concrete replay: evaluates path guards in order, takes the unique true
/// path, applies its updates sequentially. Out-of-domain writes are
/// no-ops (the encoding uses the same rule). Throws std::logic_error if
/// no guard is true, which the path construction makes impossible.
ConcreteOutcome concretize(const ImplBehavior& b, const StateSchema& schema,
                           const ConstantTable& constants,
                           const KernelState& s, std::span<const Word> args);

std::string behavior_to_json(const ImplBehavior& b);

}  // namespace specforge
