#pragma once

// Core vocabulary: statements, per-thread programs, and traces (interleavings
// given as references into the program). A trace is "faithful" when it lists
// every statement exactly once and respects each thread's internal order.

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace bintrc {

using ThreadId = int; // 1-based

enum class StatementKind {
  Localize, // copy a global into a thread-local
  Share,    // publish a thread-local to a global
  Require,  // announce interest in the lock
  Release,  // retract the most recent announcement
  Duplicate, // spawn a copy of the executing thread (dynamic mode)
  Initiate,
  Ready,
  End,
  Set1, // write 1 to a global unless it is watched
  Set0, // put a global under watch
};

inline constexpr int statement_kind_count = 10;

const char* kind_name(StatementKind k);

struct Statement {
  StatementKind kind{};
  ThreadId owner = 0; // thread that contains the statement
  int index = 0;      // 1-based position within that thread
  std::string local;  // Localize/Share only
  std::string global; // Localize/Share/Set1/Set0 only

  static Statement localize(std::string local, std::string global);
  static Statement share(std::string local, std::string global);
  static Statement require();
  static Statement release();
  static Statement duplicate();
  static Statement initiate();
  static Statement ready();
  static Statement end();
  static Statement set1(std::string global);
  static Statement set0(std::string global);

  // Owner and index are placement, not identity: two statements are the same
  // operation iff kind and operands agree.
  bool same_operation(const Statement& other) const {
    return kind == other.kind && local == other.local && global == other.global;
  }

  friend bool operator==(const Statement&, const Statement&) = default;
};

struct Thread {
  std::vector<Statement> statements;

  friend bool operator==(const Thread&, const Thread&) = default;
};

struct Program {
  std::vector<Thread> threads;

  friend bool operator==(const Program&, const Program&) = default;
};

// Reference to one statement: thread id + 1-based index within the thread.
struct StatementRef {
  ThreadId thread = 0;
  int index = 0;

  friend auto operator<=>(const StatementRef&, const StatementRef&) = default;
};

// An interleaving of the whole program. order is 1-based through the API:
// position u lives at order[u - 1].
struct Trace {
  std::vector<StatementRef> order;

  int length() const { return static_cast<int>(order.size()); }

  friend bool operator==(const Trace&, const Trace&) = default;
};

enum class FaultKind {
  LengthMismatch,
  DuplicateStatement,
  MissingStatement,
  OrderViolation,
  PositionOutOfRange,
  ForeignStatement,
  RangeOverlap,
  RangeOutOfOrder,
  AnnotationMismatch,
  DerivationMismatch,
  InstanceTooLarge,
  UnboundVariable,
  InvalidSpec,
  SyntaxError,
  SemanticError,
  VersionUnsupported,
  OracleRefused,
};

const char* fault_kind_name(FaultKind k);

// Single failure type for the whole library. a/b carry the positions, ranges
// or counts that triggered the fault; meaning depends on the kind.
class Fault : public std::runtime_error {
public:
  Fault(FaultKind kind, const std::string& message, int a = 0, int b = 0)
      : std::runtime_error(std::string(fault_kind_name(kind)) + ": " + message),
        kind_(kind), a_(a), b_(b) {}

  FaultKind kind() const { return kind_; }
  int a() const { return a_; }
  int b() const { return b_; }

private:
  FaultKind kind_;
  int a_;
  int b_;
};

inline const char* kind_name(StatementKind k) {
  switch (k) {
  case StatementKind::Localize: return "localize";
  case StatementKind::Share: return "share";
  case StatementKind::Require: return "require";
  case StatementKind::Release: return "release";
  case StatementKind::Duplicate: return "duplicate";
  case StatementKind::Initiate: return "initiate";
  case StatementKind::Ready: return "ready";
  case StatementKind::End: return "end";
  case StatementKind::Set1: return "set1";
  case StatementKind::Set0: return "set0";
  }
  return "?";
}

inline const char* fault_kind_name(FaultKind k) {
  switch (k) {
  case FaultKind::LengthMismatch: return "length mismatch";
  case FaultKind::DuplicateStatement: return "duplicate statement";
  case FaultKind::MissingStatement: return "missing statement";
  case FaultKind::OrderViolation: return "order violation";
  case FaultKind::PositionOutOfRange: return "position out of range";
  case FaultKind::ForeignStatement: return "foreign statement";
  case FaultKind::RangeOverlap: return "range overlap";
  case FaultKind::RangeOutOfOrder: return "range out of order";
  case FaultKind::AnnotationMismatch: return "annotation mismatch";
  case FaultKind::DerivationMismatch: return "derivation mismatch";
  case FaultKind::InstanceTooLarge: return "instance too large";
  case FaultKind::UnboundVariable: return "unbound variable";
  case FaultKind::InvalidSpec: return "invalid spec";
  case FaultKind::SyntaxError: return "syntax error";
  case FaultKind::SemanticError: return "semantic error";
  case FaultKind::VersionUnsupported: return "version unsupported";
  case FaultKind::OracleRefused: return "oracle refused";
  }
  return "?";
}

inline Statement Statement::localize(std::string local, std::string global) {
  return {StatementKind::Localize, 0, 0, std::move(local), std::move(global)};
}
inline Statement Statement::share(std::string local, std::string global) {
  return {StatementKind::Share, 0, 0, std::move(local), std::move(global)};
}
inline Statement Statement::require() { return {StatementKind::Require, 0, 0, {}, {}}; }
inline Statement Statement::release() { return {StatementKind::Release, 0, 0, {}, {}}; }
inline Statement Statement::duplicate() { return {StatementKind::Duplicate, 0, 0, {}, {}}; }
inline Statement Statement::initiate() { return {StatementKind::Initiate, 0, 0, {}, {}}; }
inline Statement Statement::ready() { return {StatementKind::Ready, 0, 0, {}, {}}; }
inline Statement Statement::end() { return {StatementKind::End, 0, 0, {}, {}}; }
inline Statement Statement::set1(std::string global) {
  return {StatementKind::Set1, 0, 0, {}, std::move(global)};
}
inline Statement Statement::set0(std::string global) {
  return {StatementKind::Set0, 0, 0, {}, std::move(global)};
}

inline bool takes_operands(StatementKind k) {
  return k == StatementKind::Localize || k == StatementKind::Share ||
         k == StatementKind::Set1 || k == StatementKind::Set0;
}
inline bool takes_local(StatementKind k) {
  return k == StatementKind::Localize || k == StatementKind::Share;
}

inline int thread_count(const Program& p) { return static_cast<int>(p.threads.size()); }

inline int statement_count(const Program& p) {
  int n = 0;
  for (const Thread& t : p.threads) n += static_cast<int>(t.statements.size());
  return n;
}

// Checks owner/index placement and operand arity. Builders and the parser
// call this; hand-assembled programs should too.
inline void validate_program(const Program& p) {
  for (int t = 1; t <= thread_count(p); ++t) {
    const auto& stmts = p.threads[t - 1].statements;
    for (int i = 1; i <= static_cast<int>(stmts.size()); ++i) {
      const Statement& s = stmts[i - 1];
      if (s.owner != t || s.index != i)
        throw Fault(FaultKind::SemanticError,
                    "statement placement disagrees with owner/index", t, i);
      bool wantLocal = takes_local(s.kind);
      bool wantGlobal = takes_operands(s.kind);
      if (wantLocal != !s.local.empty() || wantGlobal != !s.global.empty())
        throw Fault(FaultKind::SemanticError,
                    std::string("operand arity wrong for ") + kind_name(s.kind), t, i);
    }
  }
}

// Assembles a program from per-thread statement lists, assigning owner and
// index by placement.
inline Program make_program(std::vector<std::vector<Statement>> threads) {
  Program p;
  p.threads.reserve(threads.size());
  for (int t = 1; t <= static_cast<int>(threads.size()); ++t) {
    Thread th;
    th.statements = std::move(threads[t - 1]);
    for (int i = 1; i <= static_cast<int>(th.statements.size()); ++i) {
      th.statements[i - 1].owner = t;
      th.statements[i - 1].index = i;
    }
    p.threads.push_back(std::move(th));
  }
  validate_program(p);
  return p;
}

inline const Statement& statement_at(const Program& p, StatementRef ref) {
  if (ref.thread < 1 || ref.thread > thread_count(p))
    throw Fault(FaultKind::ForeignStatement, "no such thread", ref.thread, ref.index);
  const auto& stmts = p.threads[ref.thread - 1].statements;
  if (ref.index < 1 || ref.index > static_cast<int>(stmts.size()))
    throw Fault(FaultKind::ForeignStatement, "no such statement", ref.thread, ref.index);
  return stmts[ref.index - 1];
}

// Membership check for a statement value that claims a placement: the program
// must hold the same operation at (owner, index).
inline void require_member(const Program& p, const Statement& s) {
  const Statement& stored = statement_at(p, StatementRef{s.owner, s.index});
  if (!stored.same_operation(s))
    throw Fault(FaultKind::ForeignStatement, "statement disagrees with program content",
                s.owner, s.index);
}

// Faithfulness: |order| == statement count, every statement referenced
// exactly once, and per-thread indices appear in increasing order. Throws the
// first violation found scanning left to right; returns the trace on success.
inline Trace validate_faithful(const Program& p, std::vector<StatementRef> order) {
  const int n = statement_count(p);
  if (static_cast<int>(order.size()) != n)
    throw Fault(FaultKind::LengthMismatch, "trace length differs from statement count",
                static_cast<int>(order.size()), n);
  std::vector<int> last_index(thread_count(p) + 1, 0);
  for (int u = 1; u <= n; ++u) {
    StatementRef ref = order[u - 1];
    statement_at(p, ref); // bounds check, throws ForeignStatement
    int& last = last_index[ref.thread];
    if (ref.index <= last) {
      // Indices seen for this thread so far are exactly 1..last, so either
      // this exact reference already appeared or a later-indexed one did.
      // Faults name the two trace positions that witness the problem.
      for (int v = 1; v < u; ++v)
        if (order[v - 1] == ref)
          throw Fault(FaultKind::DuplicateStatement, "statement listed twice", v, u);
      for (int v = 1; v < u; ++v)
        if (order[v - 1].thread == ref.thread && order[v - 1].index > ref.index)
          throw Fault(FaultKind::OrderViolation, "thread order not respected", v, u);
    }
    if (ref.index != last + 1) {
      // The thread's next-due statement is not this one. If it shows up
      // later the trace is out of order; if it never does, it is missing.
      for (int v = u + 1; v <= n; ++v)
        if (order[v - 1].thread == ref.thread && order[v - 1].index == last + 1)
          throw Fault(FaultKind::OrderViolation, "thread order not respected", u, v);
      throw Fault(FaultKind::MissingStatement, "statement never scheduled", ref.thread,
                  last + 1);
    }
    last = ref.index;
  }
  for (int t = 1; t <= thread_count(p); ++t)
    if (last_index[t] != static_cast<int>(p.threads[t - 1].statements.size()))
      throw Fault(FaultKind::MissingStatement, "thread tail never scheduled", t,
                  last_index[t] + 1);
  return Trace{std::move(order)};
}

// One thread after another, program order: always faithful.
inline Trace identity_trace(const Program& p) {
  Trace tr;
  tr.order.reserve(statement_count(p));
  for (int t = 1; t <= thread_count(p); ++t)
    for (int i = 1; i <= static_cast<int>(p.threads[t - 1].statements.size()); ++i)
      tr.order.push_back({t, i});
  return tr;
}

inline ThreadId thread_at(const Trace& tr, int u) {
  if (u < 1 || u > tr.length())
    throw Fault(FaultKind::PositionOutOfRange, "trace position", u, tr.length());
  return tr.order[u - 1].thread;
}

// 1 when positions u and v are held by different threads, else 0.
inline int diff(const Trace& tr, int u, int v) {
  return thread_at(tr, u) == thread_at(tr, v) ? 0 : 1;
}

inline int context_switch_count(const Trace& tr) {
  int cs = 0;
  for (int u = 1; u + 1 <= tr.length(); ++u) cs += diff(tr, u, u + 1);
  return cs;
}

inline const Statement& statement_at(const Program& p, const Trace& tr, int u) {
  if (u < 1 || u > tr.length())
    throw Fault(FaultKind::PositionOutOfRange, "trace position", u, tr.length());
  return statement_at(p, tr.order[u - 1]);
}

} // namespace bintrc
