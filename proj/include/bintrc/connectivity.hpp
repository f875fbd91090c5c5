#pragma once

// Connectivity between trace positions and the annotation fold built on it.
// Statements connect when one is ordered after the other by thread placement,
// by a synchronization pairing, or by touching the same global through a
// publishing operation. Annotations summarize maximal connected runs.

#include "bintrc/trace.hpp"

#include <algorithm>
#include <set>

namespace bintrc {

namespace detail {

// Order-sensitive connectivity on raw statements, a taken as the earlier one.
// Three clauses:
//   same thread, directly consecutive;
//   synchronization pairs: release before require and duplicate before ready
//   and end before initiate (same thread), set1 before set0 (same global,
//   any threads);
//   cross-thread memory pairs on one global where at least one side is a
//   share: localize/share, share/localize, share/share.
inline int connect_stmts(const Statement& a, const Statement& b) {
  if (a.owner == b.owner) {
    if (b.index == a.index + 1) return 1;
    if (a.kind == StatementKind::Release && b.kind == StatementKind::Require) return 1;
    if (a.kind == StatementKind::Duplicate && b.kind == StatementKind::Ready) return 1;
    if (a.kind == StatementKind::End && b.kind == StatementKind::Initiate) return 1;
  }
  if (a.kind == StatementKind::Set1 && b.kind == StatementKind::Set0 &&
      a.global == b.global)
    return 1;
  if (a.owner != b.owner && !a.global.empty() && a.global == b.global) {
    if (a.kind == StatementKind::Localize && b.kind == StatementKind::Share) return 1;
    if (a.kind == StatementKind::Share &&
        (b.kind == StatementKind::Localize || b.kind == StatementKind::Share))
      return 1;
  }
  return 0;
}

// Symmetric conflict relation between statements of different threads: true
// when swapping adjacent occurrences could change the final state. Same-global
// pairs conflict when either side writes the global through share or set1;
// localize only reads, set0 only touches the watch set, and set1/set1 both
// write the same constant, so those combinations commute. Lock traffic
// commutes because lock lists are compared as multisets.
inline bool conflicting_stmts(const Statement& a, const Statement& b) {
  if (a.owner == b.owner) return false;
  if (a.global.empty() || a.global != b.global) return false;
  auto writes = [](const Statement& s) {
    return s.kind == StatementKind::Share || s.kind == StatementKind::Set1;
  };
  auto reads_value = [](const Statement& s) { return s.kind == StatementKind::Localize; };
  if (a.kind == StatementKind::Set1 && b.kind == StatementKind::Set1) return false;
  if (writes(a) && (writes(b) || reads_value(b))) return true;
  if (writes(b) && reads_value(a)) return true;
  // set0 against set1 in either order: the watch decides whether the 1 lands.
  if ((a.kind == StatementKind::Set0 && b.kind == StatementKind::Set1) ||
      (a.kind == StatementKind::Set1 && b.kind == StatementKind::Set0))
    return true;
  return false;
}

} // namespace detail

// connect(a, b) with a the earlier statement; both must belong to the program.
inline int connect(const Program& p, const Statement& a, const Statement& b) {
  require_member(p, a);
  require_member(p, b);
  return detail::connect_stmts(a, b);
}

// Join annotation of one position: (s1, s2) span the connected run ending
// here, (t1, t2) are the threads at the run's ends. For every position u,
// s2 == u and t2 == thread at u.
struct Annotation {
  int s1 = 0;
  int s2 = 0;
  ThreadId t1 = 0;
  ThreadId t2 = 0;

  friend bool operator==(const Annotation&, const Annotation&) = default;
};

// joins has length + 1 entries; joins[0] is the zero annotation standing for
// "nothing before the trace", joins[u] annotates position u.
struct AnnotatedTrace {
  Trace trace;
  std::vector<Annotation> joins;

  int length() const { return trace.length(); }
};

// Left-to-right fold: an unconnected position starts a fresh run (u,u,th,th);
// a connected one extends the previous run, keeping its start.
inline AnnotatedTrace annotate(const Program& p, const Trace& tr) {
  AnnotatedTrace at{tr, {}};
  const int n = tr.length();
  at.joins.resize(n + 1);
  at.joins[0] = Annotation{};
  for (int u = 1; u <= n; ++u) {
    ThreadId th = tr.order[u - 1].thread;
    if (u > 1 &&
        detail::connect_stmts(statement_at(p, tr, u - 1), statement_at(p, tr, u)) == 1) {
      const Annotation& prev = at.joins[u - 1];
      at.joins[u] = Annotation{prev.s1, u, prev.t1, th};
    } else {
      at.joins[u] = Annotation{u, u, th, th};
    }
  }
  return at;
}

// A maximal connected run of positions.
struct Segment {
  int start = 0;
  int end = 0;
  ThreadId start_thread = 0;
  ThreadId end_thread = 0;

  friend bool operator==(const Segment&, const Segment&) = default;
};

using SegmentList = std::vector<Segment>;

inline SegmentList segments_of(const AnnotatedTrace& at) {
  SegmentList out;
  for (int u = 1; u <= at.length(); ++u) {
    const Annotation& j = at.joins[u];
    if (j.s1 == u)
      out.push_back(Segment{u, u, j.t1, j.t2});
    else {
      out.back().end = u;
      out.back().end_thread = j.t2;
    }
  }
  return out;
}

// Closed position range [lo, hi].
struct PosRange {
  int lo = 0;
  int hi = 0;

  int size() const { return hi - lo + 1; }
};

// True when the two adjacent blocks may be exchanged without changing any
// thread's internal order or the final state: thread sets disjoint and no
// cross-block statement pair conflicts. a must lie entirely before b.
inline bool blocks_independent(const Program& p, const Trace& tr, PosRange a, PosRange b) {
  const int n = tr.length();
  auto check_bounds = [&](PosRange r) {
    if (r.lo < 1 || r.hi > n)
      throw Fault(FaultKind::PositionOutOfRange, "block outside trace", r.lo, r.hi);
    if (r.lo > r.hi)
      throw Fault(FaultKind::RangeOutOfOrder, "block bounds reversed", r.lo, r.hi);
  };
  check_bounds(a);
  check_bounds(b);
  if (b.lo <= a.hi) {
    if (a.lo <= b.hi)
      throw Fault(FaultKind::RangeOverlap, "blocks overlap", a.hi, b.lo);
    throw Fault(FaultKind::RangeOutOfOrder, "second block precedes first", a.lo, b.lo);
  }
  std::set<ThreadId> in_a;
  for (int u = a.lo; u <= a.hi; ++u) in_a.insert(thread_at(tr, u));
  for (int u = b.lo; u <= b.hi; ++u)
    if (in_a.count(thread_at(tr, u))) return false;
  for (int x = a.lo; x <= a.hi; ++x)
    for (int y = b.lo; y <= b.hi; ++y)
      if (detail::conflicting_stmts(statement_at(p, tr, x), statement_at(p, tr, y)))
        return false;
  return true;
}

} // namespace bintrc
