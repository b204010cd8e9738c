/*
 * Copyright The lifetaint Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#include <algorithm>
#include <filesystem>
#include <random>
#include <set>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

#include "lifetaint/cfg.h"
#include "test_support.h"

namespace lifetaint {
namespace {

using testing::corpus_app;

std::vector<BasicBlock> make_blocks(
    const std::vector<std::vector<int>>& succ) {
  std::vector<BasicBlock> blocks(succ.size());
  for (size_t i = 0; i < succ.size(); ++i) {
    blocks[i].id = static_cast<int>(i);
    blocks[i].successors = succ[i];
  }
  rebuild_predecessors(blocks);
  return blocks;
}

Cfg make_cfg(const std::vector<std::vector<int>>& succ) {
  Cfg cfg;
  cfg.blocks = make_blocks(succ);
  cfg.entry = 0;
  cfg.idom = compute_idom(cfg.blocks, 0);
  return cfg;
}

std::vector<std::vector<int>> random_graph(std::mt19937& rng, int n) {
  std::uniform_int_distribution<int> pick(0, n - 1);
  std::uniform_int_distribution<int> degree(0, 2);
  std::vector<std::vector<int>> succ(n);
  for (int b = 0; b < n; ++b) {
    int d = degree(rng);
    std::set<int> targets;
    for (int k = 0; k < d; ++k) {
      targets.insert(pick(rng));
    }
    succ[b].assign(targets.begin(), targets.end());
  }
  return succ;
}

// Blocks reachable from `from` when `removed` is deleted from the graph.
std::set<int> reach(const std::vector<std::vector<int>>& succ, int from,
                    int removed) {
  std::set<int> seen;
  if (from == removed) {
    return seen;
  }
  std::vector<int> work{from};
  seen.insert(from);
  while (!work.empty()) {
    int b = work.back();
    work.pop_back();
    for (int s : succ[b]) {
      if (s != removed && seen.insert(s).second) {
        work.push_back(s);
      }
    }
  }
  return seen;
}

std::set<int> reach_in(const Cfg& cfg) {
  std::vector<std::vector<int>> succ;
  for (const auto& b : cfg.blocks) {
    succ.push_back(b.successors);
  }
  return reach(succ, cfg.entry, -1);
}

// RPO is a valid topological order of the reachable subgraph.
void expect_valid_rpo(const Cfg& cfg, const std::vector<int>& rpo) {
  std::vector<int> pos(cfg.blocks.size(), -1);
  for (size_t i = 0; i < rpo.size(); ++i) {
    ASSERT_EQ(pos[rpo[i]], -1) << "block listed twice";
    pos[rpo[i]] = static_cast<int>(i);
  }
  auto reachable = reach_in(cfg);
  EXPECT_EQ(std::set<int>(rpo.begin(), rpo.end()), reachable);
  if (!rpo.empty()) {
    EXPECT_EQ(rpo.front(), cfg.entry);
  }
  for (const auto& [u, v] : cfg.edges()) {
    if (pos[u] >= 0) {
      EXPECT_LT(pos[u], pos[v]) << u << "->" << v;
    }
  }
}

TEST(Dominators, MatchBruteForceOnRandomGraphs) {
  std::mt19937 rng(20240611);
  for (int trial = 0; trial < 300; ++trial) {
    int n = 1 + trial % 10;
    auto succ = random_graph(rng, n);
    auto cfg = make_cfg(succ);
    auto reachable = reach(succ, 0, -1);
    for (int b = 0; b < n; ++b) {
      if (!reachable.count(b)) {
        EXPECT_EQ(cfg.idom[b], -1);
        continue;
      }
      // a dominates b iff b is unreachable once a is deleted.
      std::set<int> strict;
      for (int a = 0; a < n; ++a) {
        bool dom = a == b || !reach(succ, 0, a).count(b);
        EXPECT_EQ(cfg.dominates(a, b), dom) << a << " dom " << b;
        if (dom && a != b) {
          strict.insert(a);
        }
      }
      if (b == 0) {
        EXPECT_EQ(cfg.idom[b], 0);
        continue;
      }
      // The immediate dominator is the strict dominator closest to b,
      // i.e. the one every other strict dominator dominates.
      int idom = -1;
      for (int a : strict) {
        bool closest = true;
        for (int c : strict) {
          closest = closest && (c == a || !reach(succ, 0, c).count(a));
        }
        if (closest) {
          idom = a;
        }
      }
      EXPECT_EQ(cfg.idom[b], idom) << "block " << b;
    }
  }
}

TEST(BackEdges, RemovalYieldsDagPreservingReachability) {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 300; ++trial) {
    int n = 1 + trial % 10;
    auto cfg = make_cfg(random_graph(rng, n));
    auto dag = remove_back_edges(cfg);
    EXPECT_FALSE(has_cycle(dag));
    EXPECT_EQ(reach_in(dag), reach_in(cfg));
    for (const auto& [u, v] : dag.removed_back_edges) {
      EXPECT_TRUE(cfg.has_edge(u, v));
      EXPECT_FALSE(dag.has_edge(u, v));
    }
    expect_valid_rpo(dag, reverse_post_order(dag));
  }
}

TEST(BackEdges, ReverseOrderRejectsCycles) {
  auto cfg = make_cfg({{1}, {2}, {1}});
  EXPECT_TRUE(has_cycle(cfg));
  EXPECT_THROW(reverse_post_order(cfg), std::logic_error);
}

TEST(BackEdges, IrreducibleGraphFallsBackToDfs) {
  // 0 branches into both nodes of the 1<->2 cycle.
  auto cfg = make_cfg({{1, 2}, {2}, {1}});
  auto dag = remove_back_edges(cfg);
  EXPECT_TRUE(dag.irreducible);
  EXPECT_FALSE(has_cycle(dag));
  EXPECT_EQ(dag.removed_back_edges.size(), 1u);
}

TEST(BuildCfg, DiamondHasNoBackEdges) {
  auto app = corpus_app("merge_paths");
  const auto* m = app.resolve_method("MergeActivity.onCreate/1");
  ASSERT_NE(m, nullptr);
  auto cfg = build_cfg(*m);
  // [0..4] branch, [5..6] clean store, [7..9] join.
  ASSERT_EQ(cfg.blocks.size(), 3u);
  EXPECT_TRUE(cfg.has_edge(0, 1));
  EXPECT_TRUE(cfg.has_edge(0, 2));
  EXPECT_TRUE(cfg.has_edge(1, 2));
  EXPECT_EQ(cfg.blocks[0].successors.front(), 1) << "fallthrough first";
  EXPECT_EQ(cfg.idom[2], 0);
  auto dag = remove_back_edges(cfg);
  EXPECT_TRUE(dag.removed_back_edges.empty());
  EXPECT_EQ(reverse_post_order(dag), (std::vector<int>{0, 1, 2}));
}

TEST(BuildCfg, SingleLoopLosesItsBackEdgeAndGainsAnExitEdge) {
  auto app = corpus_app("loops");
  const auto* m = app.resolve_method("LoopActivity.onCreate/1");
  ASSERT_NE(m, nullptr);
  auto cfg = build_cfg(*m);
  EXPECT_TRUE(has_cycle(cfg));
  auto dag = remove_back_edges(cfg);
  ASSERT_EQ(dag.removed_back_edges.size(), 1u);
  auto [tail, header] = dag.removed_back_edges.front();
  EXPECT_EQ(dag.blocks[header].begin, m->labels.at("head"));
  EXPECT_EQ(dag.blocks[tail].begin, m->labels.at("body"));
  ASSERT_EQ(dag.added_exit_edges.size(), 1u);
  EXPECT_EQ(dag.added_exit_edges.front().first, tail);
  EXPECT_FALSE(has_cycle(dag));
}

TEST(BuildCfg, NestedLoopsLoseBothBackEdges) {
  auto app = corpus_app("loops");
  const auto* m = app.resolve_method("LoopActivity.onPause/0");
  ASSERT_NE(m, nullptr);
  auto dag = remove_back_edges(build_cfg(*m));
  EXPECT_EQ(dag.removed_back_edges.size(), 2u);
  EXPECT_FALSE(dag.irreducible);
  EXPECT_FALSE(has_cycle(dag));
  std::set<int> headers;
  for (const auto& [tail, header] : dag.removed_back_edges) {
    headers.insert(dag.blocks[header].begin);
  }
  EXPECT_EQ(headers, (std::set<int>{m->labels.at("outer_head"),
                                    m->labels.at("inner_head")}));
}

TEST(BuildCfg, UnreachableBlocksAreSkipped) {
  auto app = corpus_app("motivating_example");
  const auto* m = app.resolve_method("MainActivity.onBtnClicked/1");
  ASSERT_NE(m, nullptr);
  auto cfg = build_cfg(*m);
  for (const auto& b : cfg.blocks) {
    EXPECT_TRUE(cfg.reachable(b.id));
  }
  auto dead = parse_app(R"({"app_id": "d", "classes": [{"name": "A",
      "methods": [{"sig": "m/0", "instructions": [
        ["GOTO", "end"], ["RETURN_VOID"], ["RETURN_VOID"]],
        "labels": {"end": 2}}]}]})");
  auto dcfg = remove_back_edges(build_cfg(dead.classes[0].methods[0]));
  EXPECT_EQ(dcfg.blocks.size(), 3u);
  EXPECT_FALSE(dcfg.reachable(1));
  EXPECT_EQ(reverse_post_order(dcfg), (std::vector<int>{0, 2}));
}

TEST(Corpus, EveryMethodBecomesAcyclicWithValidOrder) {
  size_t methods = 0;
  for (const auto& e :
       std::filesystem::directory_iterator(testing::data_path("corpus"))) {
    auto app = load_app(e.path().string());
    for (const auto& cls : app.classes) {
      for (const auto& m : cls.methods) {
        SCOPED_TRACE(m.signature());
        auto cfg = build_cfg(m);
        // Blocks partition the instructions.
        int covered = 0;
        for (const auto& b : cfg.blocks) {
          EXPECT_EQ(b.begin, covered);
          EXPECT_LT(b.begin, b.end);
          covered = b.end;
        }
        EXPECT_EQ(covered, static_cast<int>(m.instructions.size()));
        auto dag = remove_back_edges(cfg);
        EXPECT_FALSE(has_cycle(dag));
        expect_valid_rpo(dag, reverse_post_order(dag));
        ++methods;
      }
    }
  }
  EXPECT_GT(methods, 40u);
}

TEST(Dot, RendersEveryEdge) {
  auto app = corpus_app("loops");
  auto dag = remove_back_edges(
      build_cfg(*app.resolve_method("LoopActivity.onCreate/1")));
  auto dot = to_dot(dag, "onCreate");
  EXPECT_EQ(dot.rfind("digraph", 0), 0u);
  for (const auto& [u, v] : dag.edges()) {
    EXPECT_NE(dot.find("b" + std::to_string(u) + " -> b" + std::to_string(v)),
              std::string::npos)
        << dot;
  }
}

} // namespace
} // namespace lifetaint
