#pragma once

// Binary trace reduction. The trace is split in halves recursively; leaf
// rules may swap an adjacent pair, inner rules may swap the two halves
// wholesale. A swap needs three things: the annotation thread entering the
// range must match the comparison thread of the second half, the halves must
// be independent (disjoint threads, no conflicting statement pairs), and the
// whole-trace context switch count must not grow. Every decision is recorded
// in a derivation tree that can be replayed and checked independently.

#include "bintrc/connectivity.hpp"

#include <cassert>
#include <optional>
#include <string>
#include <vector>

namespace bintrc {

enum class RuleKind { Base0, Base1, Base2, SSwap, SNoSwap };

inline const char* rule_name(RuleKind r) {
  switch (r) {
  case RuleKind::Base0: return "base0";
  case RuleKind::Base1: return "base1";
  case RuleKind::Base2: return "base2";
  case RuleKind::SSwap: return "S-swap";
  case RuleKind::SNoSwap: return "S-noswap";
  }
  return "?";
}

inline std::optional<RuleKind> parse_rule_name(const std::string& s) {
  if (s == "base0") return RuleKind::Base0;
  if (s == "base1") return RuleKind::Base1;
  if (s == "base2") return RuleKind::Base2;
  if (s == "S-swap") return RuleKind::SSwap;
  if (s == "S-noswap") return RuleKind::SNoSwap;
  return std::nullopt;
}

// One rule application over [lo, hi]. witness_t2 is the annotation thread
// entering the range, witness_t1 the thread it was compared against. Leaf
// rules have no children; split rules have exactly two.
struct DerivationNode {
  RuleKind rule{};
  int lo = 0;
  int hi = 0;
  ThreadId witness_t2 = 0;
  ThreadId witness_t1 = 0;
  std::vector<DerivationNode> children;

  friend bool operator==(const DerivationNode&, const DerivationNode&) = default;
};

struct ReduceOptions {
  // Variant swap condition: compare the incoming annotation against the
  // thread of the second half's first statement instead of the t1 of its
  // final annotation. Off by default.
  bool swap_condition_first_stmt = false;
};

struct ReductionResult {
  AnnotatedTrace before;
  AnnotatedTrace after;
  std::vector<DerivationNode> rounds; // one root per pass
  int cs_before = 0;
  int cs_after = 0;
  int swaps_applied = 0;
  int swaps_rejected_by_guard = 0; // condition held, blocks not independent
  int swaps_rejected_by_cs = 0;    // swap would have raised the switch count
  // Half swaps whose spliced annotation did not extend the incoming run;
  // harmless, tracked to show how often the single-pair rule shape breaks.
  int merged_start_mismatches = 0;
};

namespace detail {

inline int cs_of(const std::vector<StatementRef>& order) {
  int cs = 0;
  for (size_t i = 1; i < order.size(); ++i)
    cs += order[i].thread != order[i - 1].thread ? 1 : 0;
  return cs;
}

struct ReduceCtx {
  const Program& prog;
  std::vector<StatementRef> order;
  std::vector<Annotation> joins;
  ReduceOptions opt;
  ReductionResult* res = nullptr; // null while replaying a derivation
};

inline void refresh_joins(ReduceCtx& ctx) {
  ctx.joins = annotate(ctx.prog, Trace{ctx.order}).joins;
}

struct Decision {
  RuleKind rule{};
  ThreadId witness_t2 = 0;
  ThreadId witness_t1 = 0;
  bool apply = false;
};

// Adjacent pair [lo, lo+1]: swap when the incoming annotation thread matches
// the pair's final annotation thread and the statements are independent.
// Independence subsumes the different-runs requirement: an independent pair
// is cross-thread and non-conflicting, hence never connected.
inline Decision decide_pair(ReduceCtx& ctx, int lo, int hi) {
  const Annotation q0 = ctx.joins[lo - 1];
  const ThreadId t1 = ctx.joins[hi].t1;
  Decision d{RuleKind::Base1, q0.t2, t1, false};
  if (q0.t2 == t1) {
    if (blocks_independent(ctx.prog, Trace{ctx.order}, PosRange{lo, lo}, PosRange{hi, hi})) {
      assert(ctx.joins[hi].s1 == hi);
      d.rule = RuleKind::Base2;
      d.apply = true;
    } else if (ctx.res) {
      ++ctx.res->swaps_rejected_by_guard;
    }
  }
  return d;
}

inline void apply_pair(ReduceCtx& ctx, int lo, int hi) {
  const Annotation q0 = ctx.joins[lo - 1];
  std::swap(ctx.order[lo - 1], ctx.order[hi - 1]);
  refresh_joins(ctx);
  if (ctx.res) ++ctx.res->swaps_applied;
  // The conditions force the moved statement to continue the incoming run:
  // its thread equals th(lo-1) and, by faithfulness, it is that thread's
  // next statement.
  assert(ctx.joins[lo].s1 == q0.s1);
  (void)q0;
}

// Halves [lo, mid] and [mid+1, hi], both already reduced. Swap wholesale when
// the incoming annotation thread matches the comparison thread, the halves
// are independent, and the rearranged trace has no more switches than now.
inline Decision decide_split(ReduceCtx& ctx, int lo, int mid, int hi) {
  const Annotation q0 = ctx.joins[lo - 1];
  const ThreadId t1 = ctx.opt.swap_condition_first_stmt ? ctx.order[mid].thread
                                                        : ctx.joins[hi].t1;
  Decision d{RuleKind::SNoSwap, q0.t2, t1, false};
  if (q0.t2 != t1) return d;
  if (!blocks_independent(ctx.prog, Trace{ctx.order}, PosRange{lo, mid},
                          PosRange{mid + 1, hi})) {
    if (ctx.res) ++ctx.res->swaps_rejected_by_guard;
    return d;
  }
  std::vector<StatementRef> candidate = ctx.order;
  std::rotate(candidate.begin() + (lo - 1), candidate.begin() + mid,
              candidate.begin() + hi);
  if (cs_of(candidate) > cs_of(ctx.order)) {
    if (ctx.res) ++ctx.res->swaps_rejected_by_cs;
    return d;
  }
  d.rule = RuleKind::SSwap;
  d.apply = true;
  return d;
}

inline void apply_split(ReduceCtx& ctx, int lo, int mid, int hi) {
  const Annotation q0 = ctx.joins[lo - 1];
  std::rotate(ctx.order.begin() + (lo - 1), ctx.order.begin() + mid,
              ctx.order.begin() + hi);
  refresh_joins(ctx);
  if (ctx.res) {
    ++ctx.res->swaps_applied;
    if (ctx.joins[lo].s1 != q0.s1) ++ctx.res->merged_start_mismatches;
  }
}

inline int split_point(int lo, int hi) {
  const int mu = hi - lo + 1;
  const int v = (mu + 1) / 2; // first half takes the ceiling
  return lo + v - 1;
}

inline DerivationNode reduce_range(ReduceCtx& ctx, int lo, int hi) {
  const int mu = hi - lo + 1;
  if (mu == 1) {
    const Annotation q0 = ctx.joins[lo - 1];
    return DerivationNode{RuleKind::Base0, lo, hi, q0.t2, ctx.joins[lo].t1, {}};
  }
  if (mu == 2) {
    Decision d = decide_pair(ctx, lo, hi);
    if (d.apply) apply_pair(ctx, lo, hi);
    return DerivationNode{d.rule, lo, hi, d.witness_t2, d.witness_t1, {}};
  }
  const int mid = split_point(lo, hi);
  DerivationNode node{RuleKind::SNoSwap, lo, hi, 0, 0, {}};
  node.children.push_back(reduce_range(ctx, lo, mid));
  node.children.push_back(reduce_range(ctx, mid + 1, hi));
  Decision d = decide_split(ctx, lo, mid, hi);
  if (d.apply) apply_split(ctx, lo, mid, hi);
  node.rule = d.rule;
  node.witness_t2 = d.witness_t2;
  node.witness_t1 = d.witness_t1;
  return node;
}

} // namespace detail

// One full pass over the trace. Accepts a bare trace (empty joins) or a
// consistently annotated one; stored annotations that disagree with the
// trace fault.
inline ReductionResult reduce(const Program& p, const AnnotatedTrace& at,
                              const ReduceOptions& opt = {}) {
  AnnotatedTrace fresh = annotate(p, at.trace);
  if (!at.joins.empty() && at.joins != fresh.joins) {
    int where = 0;
    for (size_t u = 0; u < fresh.joins.size(); ++u)
      if (u >= at.joins.size() || !(at.joins[u] == fresh.joins[u])) {
        where = static_cast<int>(u);
        break;
      }
    throw Fault(FaultKind::AnnotationMismatch, "stored annotations disagree with trace",
                where, 0);
  }
  ReductionResult res;
  res.before = fresh;
  res.cs_before = context_switch_count(fresh.trace);
  detail::ReduceCtx ctx{p, fresh.trace.order, fresh.joins, opt, &res};
  if (!ctx.order.empty())
    res.rounds.push_back(detail::reduce_range(ctx, 1, static_cast<int>(ctx.order.size())));
  res.after = AnnotatedTrace{Trace{std::move(ctx.order)}, std::move(ctx.joins)};
  res.cs_after = context_switch_count(res.after.trace);
  return res;
}

// Repeats passes until the switch count stops falling or max_rounds is hit.
// Rounds that applied no swap are dropped; a swap-bearing round is always
// kept so the recorded derivation matches the returned trace.
inline ReductionResult reduce_to_fixpoint(const Program& p, const AnnotatedTrace& at,
                                          int max_rounds, const ReduceOptions& opt = {}) {
  if (max_rounds < 1)
    throw Fault(FaultKind::InvalidSpec, "fixpoint rounds must be positive", max_rounds, 0);
  ReductionResult total;
  total.before = annotate(p, at.trace);
  if (!at.joins.empty() && at.joins != total.before.joins)
    throw Fault(FaultKind::AnnotationMismatch, "stored annotations disagree with trace", 0,
                0);
  total.cs_before = context_switch_count(total.before.trace);
  total.after = total.before;
  total.cs_after = total.cs_before;
  for (int round = 1; round <= max_rounds; ++round) {
    ReductionResult pass = reduce(p, total.after, opt);
    total.swaps_rejected_by_guard += pass.swaps_rejected_by_guard;
    total.swaps_rejected_by_cs += pass.swaps_rejected_by_cs;
    if (pass.swaps_applied == 0) break;
    total.swaps_applied += pass.swaps_applied;
    total.merged_start_mismatches += pass.merged_start_mismatches;
    for (DerivationNode& r : pass.rounds) total.rounds.push_back(std::move(r));
    const bool improved = pass.cs_after < pass.cs_before;
    total.after = std::move(pass.after);
    total.cs_after = pass.cs_after;
    if (!improved) break;
  }
  return total;
}

namespace detail {

inline void check_replay(const DerivationNode& node, RuleKind rule, ThreadId wt2,
                         ThreadId wt1, size_t child_count) {
  if (node.rule != rule)
    throw Fault(FaultKind::DerivationMismatch,
                std::string("expected ") + rule_name(rule) + " at this range, log says " +
                    rule_name(node.rule),
                node.lo, node.hi);
  if (node.witness_t2 != wt2 || node.witness_t1 != wt1)
    throw Fault(FaultKind::DerivationMismatch, "witness threads disagree", node.lo,
                node.hi);
  if (node.children.size() != child_count)
    throw Fault(FaultKind::DerivationMismatch, "child count disagrees", node.lo, node.hi);
}

inline void replay_node(ReduceCtx& ctx, const DerivationNode& node, int lo, int hi) {
  if (node.lo != lo || node.hi != hi)
    throw Fault(FaultKind::DerivationMismatch, "node range disagrees", node.lo, node.hi);
  const int mu = hi - lo + 1;
  if (mu == 1) {
    const Annotation q0 = ctx.joins[lo - 1];
    check_replay(node, RuleKind::Base0, q0.t2, ctx.joins[lo].t1, 0);
    return;
  }
  if (mu == 2) {
    Decision d = decide_pair(ctx, lo, hi);
    check_replay(node, d.rule, d.witness_t2, d.witness_t1, 0);
    if (d.apply) apply_pair(ctx, lo, hi);
    return;
  }
  const int mid = split_point(lo, hi);
  if (node.children.size() != 2)
    throw Fault(FaultKind::DerivationMismatch, "child count disagrees", node.lo, node.hi);
  replay_node(ctx, node.children[0], lo, mid);
  replay_node(ctx, node.children[1], mid + 1, hi);
  Decision d = decide_split(ctx, lo, mid, hi);
  check_replay(node, d.rule, d.witness_t2, d.witness_t1, 2);
  if (d.apply) apply_split(ctx, lo, mid, hi);
}

} // namespace detail

// Re-derives every rule application from the trace itself and faults on the
// first disagreement with the log. Returns the transformed trace.
inline Trace replay_derivation(const Program& p, const Trace& before,
                               const std::vector<DerivationNode>& rounds,
                               const ReduceOptions& opt = {}) {
  AnnotatedTrace at = annotate(p, before);
  detail::ReduceCtx ctx{p, at.trace.order, at.joins, opt, nullptr};
  const int n = before.length();
  for (const DerivationNode& root : rounds) {
    if (n == 0 || root.lo != 1 || root.hi != n)
      throw Fault(FaultKind::DerivationMismatch, "root range does not cover the trace",
                  root.lo, root.hi);
    detail::replay_node(ctx, root, 1, n);
  }
  return Trace{std::move(ctx.order)};
}

struct OracleResult {
  int min_cs = 0;
  Trace witness;
  long long explored = 0; // schedules touched by the search
};

namespace detail {

struct OracleCtx {
  const Program& prog;
  const Trace& tr;
  std::vector<std::vector<int>> thread_positions; // ascending, per thread
  std::vector<std::vector<int>> preds;            // conflicting earlier positions
  std::vector<char> emitted;
  std::vector<int> next; // per-thread cursor into thread_positions
  std::vector<StatementRef> current;
  int best_cs = 0;
  std::vector<StatementRef> best_order;
  long long explored = 0;
};

inline void oracle_dfs(OracleCtx& ctx, int emitted_count, ThreadId last, int cur_cs) {
  ++ctx.explored;
  if (cur_cs >= ctx.best_cs) return; // cannot strictly improve
  const int n = ctx.tr.length();
  if (emitted_count == n) {
    ctx.best_cs = cur_cs;
    ctx.best_order = ctx.current;
    return;
  }
  const int tcount = static_cast<int>(ctx.thread_positions.size()) - 1;
  for (ThreadId t = 1; t <= tcount; ++t) {
    const auto& positions = ctx.thread_positions[t];
    if (ctx.next[t] >= static_cast<int>(positions.size())) continue;
    const int pos = positions[ctx.next[t]];
    bool ready = true;
    for (int dep : ctx.preds[pos])
      if (!ctx.emitted[dep]) {
        ready = false;
        break;
      }
    if (!ready) continue;
    ctx.emitted[pos] = 1;
    ++ctx.next[t];
    ctx.current.push_back(ctx.tr.order[pos - 1]);
    oracle_dfs(ctx, emitted_count + 1, t,
               cur_cs + (emitted_count > 0 && last != t ? 1 : 0));
    ctx.current.pop_back();
    --ctx.next[t];
    ctx.emitted[pos] = 0;
  }
}

} // namespace detail

// Exhaustive minimum over all faithful interleavings that keep every
// conflicting cross-thread pair in its original order. Branch and bound on
// the running switch count; threads tried in ascending id order, so the
// witness is deterministic.
inline OracleResult oracle_min_cs(const Program& p, const Trace& tr, int limit = 10) {
  const int n = tr.length();
  if (n > limit)
    throw Fault(FaultKind::InstanceTooLarge, "trace too long for exhaustive search", n,
                limit);
  detail::OracleCtx ctx{p, tr, {}, {}, {}, {}, {}, 0, {}, 0};
  ctx.thread_positions.resize(thread_count(p) + 1);
  ctx.preds.resize(n + 1);
  ctx.emitted.assign(n + 1, 0);
  ctx.next.assign(thread_count(p) + 1, 0);
  for (int u = 1; u <= n; ++u) ctx.thread_positions[thread_at(tr, u)].push_back(u);
  for (int u = 1; u <= n; ++u)
    for (int v = u + 1; v <= n; ++v)
      if (detail::conflicting_stmts(statement_at(p, tr, u), statement_at(p, tr, v)))
        ctx.preds[v].push_back(u);
  ctx.best_cs = context_switch_count(tr);
  ctx.best_order = tr.order;
  ctx.current.reserve(n);
  detail::oracle_dfs(ctx, 0, 0, 0);
  return OracleResult{ctx.best_cs, Trace{std::move(ctx.best_order)}, ctx.explored};
}

} // namespace bintrc
