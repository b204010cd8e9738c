/*
 * Copyright The lifetaint Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "lifetaint/cfg.h"

#include <algorithm>
#include <set>
#include <sstream>
#include <stdexcept>

#include <spdlog/spdlog.h>

namespace lifetaint {

namespace {

// Iterative DFS post order over blocks reachable from `entry`. Successors
// are visited in edge order.
std::vector<int> post_order(const std::vector<BasicBlock>& blocks,
                            int entry) {
  std::vector<int> order;
  if (blocks.empty()) {
    return order;
  }
  std::vector<char> seen(blocks.size(), 0);
  std::vector<std::pair<int, size_t>> stack{{entry, 0}};
  seen[entry] = 1;
  while (!stack.empty()) {
    auto& [b, next] = stack.back();
    const auto& succ = blocks[b].successors;
    if (next < succ.size()) {
      int s = succ[next++];
      if (!seen[s]) {
        seen[s] = 1;
        stack.push_back({s, 0});
      }
      continue;
    }
    order.push_back(b);
    stack.pop_back();
  }
  return order;
}

void remove_edge(std::vector<BasicBlock>& blocks, int from, int to) {
  auto& succ = blocks[from].successors;
  succ.erase(std::remove(succ.begin(), succ.end(), to), succ.end());
}

bool reaches(const std::vector<BasicBlock>& blocks, int from, int to) {
  std::vector<char> seen(blocks.size(), 0);
  std::vector<int> work{from};
  seen[from] = 1;
  while (!work.empty()) {
    int b = work.back();
    work.pop_back();
    if (b == to) {
      return true;
    }
    for (int s : blocks[b].successors) {
      if (!seen[s]) {
        seen[s] = 1;
        work.push_back(s);
      }
    }
  }
  return false;
}

// Edges u->v whose target is on the DFS stack when explored from `root`.
void dfs_back_edges(const std::vector<BasicBlock>& blocks, int root,
                    std::vector<char>& color,
                    std::vector<std::pair<int, int>>& out) {
  std::vector<std::pair<int, size_t>> stack{{root, 0}};
  color[root] = 1;
  while (!stack.empty()) {
    auto& [b, next] = stack.back();
    const auto& succ = blocks[b].successors;
    if (next < succ.size()) {
      int s = succ[next++];
      if (color[s] == 1) {
        out.emplace_back(b, s);
      } else if (color[s] == 0) {
        color[s] = 1;
        stack.push_back({s, 0});
      }
      continue;
    }
    color[b] = 2;
    stack.pop_back();
  }
}

} // namespace

std::vector<std::pair<int, int>> Cfg::edges() const {
  std::vector<std::pair<int, int>> out;
  for (const auto& b : blocks) {
    for (int s : b.successors) {
      out.emplace_back(b.id, s);
    }
  }
  return out;
}

bool Cfg::has_edge(int from, int to) const {
  const auto& succ = blocks[from].successors;
  return std::find(succ.begin(), succ.end(), to) != succ.end();
}

bool Cfg::dominates(int a, int b) const {
  if (!reachable(b) || !reachable(a)) {
    return false;
  }
  for (int x = b;; x = idom[x]) {
    if (x == a) {
      return true;
    }
    if (x == entry) {
      return false;
    }
  }
}

void rebuild_predecessors(std::vector<BasicBlock>& blocks) {
  for (auto& b : blocks) {
    b.predecessors.clear();
  }
  for (const auto& b : blocks) {
    for (int s : b.successors) {
      auto& preds = blocks[s].predecessors;
      if (std::find(preds.begin(), preds.end(), b.id) == preds.end()) {
        preds.push_back(b.id);
      }
    }
  }
}

std::vector<int> compute_idom(const std::vector<BasicBlock>& blocks,
                              int entry) {
  std::vector<int> idom(blocks.size(), -1);
  if (blocks.empty()) {
    return idom;
  }
  auto po = post_order(blocks, entry);
  std::vector<int> po_num(blocks.size(), -1);
  for (size_t i = 0; i < po.size(); ++i) {
    po_num[po[i]] = static_cast<int>(i);
  }
  idom[entry] = entry;
  auto intersect = [&](int a, int b) {
    while (a != b) {
      while (po_num[a] < po_num[b]) {
        a = idom[a];
      }
      while (po_num[b] < po_num[a]) {
        b = idom[b];
      }
    }
    return a;
  };
  bool changed = true;
  while (changed) {
    changed = false;
    for (auto it = po.rbegin(); it != po.rend(); ++it) {
      int b = *it;
      if (b == entry) {
        continue;
      }
      int new_idom = -1;
      for (int p : blocks[b].predecessors) {
        if (po_num[p] < 0 || idom[p] == -1) {
          continue;
        }
        new_idom = new_idom == -1 ? p : intersect(p, new_idom);
      }
      if (new_idom != idom[b]) {
        idom[b] = new_idom;
        changed = true;
      }
    }
  }
  return idom;
}

Cfg build_cfg(const MethodDef& method) {
  Cfg cfg;
  const int n = static_cast<int>(method.instructions.size());
  if (n == 0) {
    cfg.blocks.push_back(BasicBlock{0, 0, 0, {}, {}});
    cfg.idom = {0};
    return cfg;
  }
  std::set<int> leaders{0};
  for (int i = 0; i < n; ++i) {
    const auto& ins = method.instructions[i];
    if (is_branch(ins.op)) {
      leaders.insert(method.labels.at(ins.symbol));
    }
    if (ends_block(ins.op) && i + 1 < n) {
      leaders.insert(i + 1);
    }
  }
  std::vector<int> block_of(n, 0);
  std::vector<int> starts(leaders.begin(), leaders.end());
  for (size_t k = 0; k < starts.size(); ++k) {
    BasicBlock b;
    b.id = static_cast<int>(k);
    b.begin = starts[k];
    b.end = k + 1 < starts.size() ? starts[k + 1] : n;
    for (int i = b.begin; i < b.end; ++i) {
      block_of[i] = b.id;
    }
    cfg.blocks.push_back(b);
  }
  for (auto& b : cfg.blocks) {
    const auto& last = method.instructions[b.end - 1];
    auto add = [&](int target) {
      if (std::find(b.successors.begin(), b.successors.end(), target) ==
          b.successors.end()) {
        b.successors.push_back(target);
      }
    };
    switch (last.op) {
      case Opcode::IfGoto:
        if (b.end < n) {
          add(block_of[b.end]);
        }
        add(block_of[method.labels.at(last.symbol)]);
        break;
      case Opcode::Goto:
        add(block_of[method.labels.at(last.symbol)]);
        break;
      case Opcode::Return:
      case Opcode::ReturnVoid:
        break;
      default:
        if (b.end < n) {
          add(block_of[b.end]);
        }
        break;
    }
  }
  rebuild_predecessors(cfg.blocks);
  cfg.idom = compute_idom(cfg.blocks, cfg.entry);
  return cfg;
}

Cfg remove_back_edges(const Cfg& in) {
  Cfg cfg = in;
  cfg.removed_back_edges.clear();
  cfg.added_exit_edges.clear();
  std::vector<std::pair<int, int>> natural;
  for (const auto& [u, v] : in.edges()) {
    if (in.reachable(u) && in.dominates(v, u)) {
      natural.emplace_back(u, v);
    }
  }
  for (const auto& [u, v] : natural) {
    remove_edge(cfg.blocks, u, v);
  }
  cfg.removed_back_edges = natural;

  // Whatever cycles remain are irreducible; fall back to DFS edges.
  std::vector<std::pair<int, int>> leftover;
  std::vector<char> color(cfg.blocks.size(), 0);
  if (!cfg.blocks.empty()) {
    dfs_back_edges(cfg.blocks, cfg.entry, color, leftover);
  }
  for (size_t b = 0; b < cfg.blocks.size(); ++b) {
    if (color[b] == 0) {
      dfs_back_edges(cfg.blocks, static_cast<int>(b), color, leftover);
    }
  }
  if (!leftover.empty()) {
    cfg.irreducible = true;
    spdlog::warn("irreducible control flow: removing {} extra edge(s) by "
                 "DFS order",
                 leftover.size());
    for (const auto& [u, v] : leftover) {
      remove_edge(cfg.blocks, u, v);
      cfg.removed_back_edges.emplace_back(u, v);
    }
  }

  // Connect the end of each loop body to the loop exits so the exit block
  // also sees what the body computed.
  for (const auto& [tail, header] : natural) {
    std::set<int> body{header, tail};
    std::vector<int> work{tail};
    while (!work.empty()) {
      int b = work.back();
      work.pop_back();
      if (b == header) {
        continue;
      }
      for (int p : in.blocks[b].predecessors) {
        if (body.insert(p).second) {
          work.push_back(p);
        }
      }
    }
    for (int exit : in.blocks[header].successors) {
      if (body.count(exit) || cfg.has_edge(tail, exit)) {
        continue;
      }
      if (reaches(cfg.blocks, exit, tail)) {
        continue;
      }
      cfg.blocks[tail].successors.push_back(exit);
      cfg.added_exit_edges.emplace_back(tail, exit);
    }
  }
  rebuild_predecessors(cfg.blocks);
  cfg.idom = compute_idom(cfg.blocks, cfg.entry);
  return cfg;
}

std::vector<int> reverse_post_order(const Cfg& cfg) {
  std::vector<int> order;
  if (cfg.blocks.empty()) {
    return order;
  }
  std::vector<char> color(cfg.blocks.size(), 0);
  std::vector<std::pair<int, size_t>> stack{{cfg.entry, 0}};
  color[cfg.entry] = 1;
  while (!stack.empty()) {
    auto& [b, next] = stack.back();
    const auto& succ = cfg.blocks[b].successors;
    if (next < succ.size()) {
      int s = succ[next++];
      if (color[s] == 1) {
        throw std::logic_error("reverse_post_order: cycle through block " +
                               std::to_string(s));
      }
      if (color[s] == 0) {
        color[s] = 1;
        stack.push_back({s, 0});
      }
      continue;
    }
    color[b] = 2;
    order.push_back(b);
    stack.pop_back();
  }
  std::reverse(order.begin(), order.end());
  return order;
}

bool has_cycle(const Cfg& cfg) {
  std::vector<char> color(cfg.blocks.size(), 0);
  std::vector<std::pair<int, int>> back;
  for (size_t b = 0; b < cfg.blocks.size(); ++b) {
    if (color[b] == 0) {
      dfs_back_edges(cfg.blocks, static_cast<int>(b), color, back);
    }
  }
  return !back.empty();
}

std::string to_dot(const Cfg& cfg, const std::string& name) {
  std::ostringstream out;
  out << "digraph \"" << name << "\" {\n";
  out << "  node [shape=box];\n";
  for (const auto& b : cfg.blocks) {
    out << "  b" << b.id << " [label=\"b" << b.id << " [" << b.begin << ","
        << b.end << ")\"];\n";
  }
  for (const auto& b : cfg.blocks) {
    for (int s : b.successors) {
      out << "  b" << b.id << " -> b" << s;
      for (const auto& e : cfg.added_exit_edges) {
        if (e.first == b.id && e.second == s) {
          out << " [style=dashed]";
        }
      }
      out << ";\n";
    }
  }
  for (const auto& [u, v] : cfg.removed_back_edges) {
    out << "  b" << u << " -> b" << v << " [style=dotted, color=gray];\n";
  }
  out << "}\n";
  return out.str();
}

} // namespace lifetaint
