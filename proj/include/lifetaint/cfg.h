/*
 * Copyright The lifetaint Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "lifetaint/app_ir.h"

namespace lifetaint {

struct BasicBlock {
  int id = 0;
  int begin = 0; // first instruction index
  int end = 0; // one past the last instruction
  std::vector<int> successors; // fallthrough first, then branch target
  std::vector<int> predecessors;
};

struct Cfg {
  std::vector<BasicBlock> blocks;
  int entry = 0;
  // idom[b] is the immediate dominator of b; idom[entry] == entry and -1
  // marks unreachable blocks.
  std::vector<int> idom;
  std::vector<std::pair<int, int>> removed_back_edges;
  std::vector<std::pair<int, int>> added_exit_edges;
  bool irreducible = false;

  std::vector<std::pair<int, int>> edges() const;
  bool has_edge(int from, int to) const;
  bool dominates(int a, int b) const;
  bool reachable(int b) const { return idom[b] != -1; }
};

Cfg build_cfg(const MethodDef& method);

// Cooper/Harvey/Kennedy iterative dominators. Called by build_cfg; exposed
// for graphs assembled by hand.
std::vector<int> compute_idom(const std::vector<BasicBlock>& blocks,
                              int entry);

// Recomputes predecessor lists from successor lists.
void rebuild_predecessors(std::vector<BasicBlock>& blocks);

Cfg remove_back_edges(const Cfg& cfg);

// Reachable blocks in reverse post order. Throws std::logic_error if a
// cycle is found.
std::vector<int> reverse_post_order(const Cfg& cfg);

bool has_cycle(const Cfg& cfg);

std::string to_dot(const Cfg& cfg, const std::string& name);

} // namespace lifetaint
