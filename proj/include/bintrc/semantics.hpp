#pragma once

// Interpreter for traces. State is (gamma, L, W): a variable store that also
// carries the step counter tc, the lock-requester list (most recent first),
// and the watched-global set. Every statement bumps tc exactly once.

#include "bintrc/trace.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace bintrc {

// thread == 0 names a global; otherwise a thread-local.
struct VarKey {
  ThreadId thread = 0;
  std::string name;

  friend auto operator<=>(const VarKey&, const VarKey&) = default;
};

inline VarKey global_var(std::string name) { return {0, std::move(name)}; }
inline VarKey local_var(ThreadId t, std::string name) { return {t, std::move(name)}; }

// Step counter lives inside gamma so state equality covers it for free. The
// name is reserved: parser and generator refuse programs that use it.
inline const VarKey tc_key{0, "tc"};

struct TraceState {
  std::map<VarKey, long long> gamma;
  std::vector<ThreadId> lock_requesters; // most recent first
  std::set<std::string> watched;
};

inline TraceState initial_state() {
  TraceState s;
  s.gamma[tc_key] = 0;
  return s;
}

enum class SemanticsMode { Replay, Dynamic };

struct SemanticsOptions {
  SemanticsMode mode = SemanticsMode::Replay;
  // Reads of unbound variables fault instead of defaulting to 0.
  bool strict_vars = false;
  // Dynamic-mode duplicate budget; a thread that copies itself would
  // otherwise extend the trace forever.
  int max_spawned_threads = 4096;
  std::vector<std::string>* diagnostics = nullptr;
};

inline std::string render_var(const VarKey& k) {
  if (k.thread == 0) return k.name;
  return k.name + "^" + std::to_string(k.thread);
}

namespace detail {

// Lenient reads return 0 without binding the key, so a run's gamma domain is
// exactly the set of keys written.
inline long long read_var(const TraceState& st, const VarKey& k, bool strict) {
  auto it = st.gamma.find(k);
  if (it != st.gamma.end()) return it->second;
  if (strict)
    throw Fault(FaultKind::UnboundVariable, render_var(k) + " read before any write",
                k.thread, 0);
  return 0;
}

} // namespace detail

struct StepOutcome {
  TraceState state;
  // Set when a dynamic-mode duplicate asks for a copy of its thread.
  std::optional<ThreadId> spawn_request;
};

inline StepOutcome step(const Program& p, const Statement& s, const TraceState& before,
                        const SemanticsOptions& opts = {}) {
  require_member(p, s);
  StepOutcome out{before, std::nullopt};
  TraceState& st = out.state;
  const ThreadId i = s.owner;
  switch (s.kind) {
  case StatementKind::Localize:
    st.gamma[local_var(i, s.local)] =
        detail::read_var(before, global_var(s.global), opts.strict_vars);
    break;
  case StatementKind::Share:
    st.gamma[global_var(s.global)] =
        detail::read_var(before, local_var(i, s.local), opts.strict_vars);
    break;
  case StatementKind::Require:
    st.lock_requesters.insert(st.lock_requesters.begin(), i);
    break;
  case StatementKind::Release: {
    auto it = std::find(st.lock_requesters.begin(), st.lock_requesters.end(), i);
    if (it != st.lock_requesters.end())
      st.lock_requesters.erase(it);
    else if (opts.diagnostics)
      opts.diagnostics->push_back("thread " + std::to_string(i) +
                                  ": release without pending require");
    break;
  }
  case StatementKind::Duplicate:
    if (opts.mode == SemanticsMode::Dynamic) out.spawn_request = i;
    break;
  case StatementKind::Initiate:
  case StatementKind::Ready:
  case StatementKind::End:
    break;
  case StatementKind::Set1:
    if (!st.watched.count(s.global)) st.gamma[global_var(s.global)] = 1;
    break;
  case StatementKind::Set0:
    st.watched.insert(s.global);
    break;
  }
  st.gamma[tc_key] += 1;
  return out;
}

using StepObserver = std::function<void(int position, const Statement&, const TraceState& after)>;

struct RunOutcome {
  TraceState state;
  // Dynamic mode may extend both; Replay returns them unchanged.
  Program program;
  Trace trace;
  std::vector<std::string> diagnostics;
};

// A thread duplication: the full statement list of src joins the program
// under a fresh id, and its references are appended to the trace in thread
// order (one faithful completion among the many the rule permits). Note a
// copy of a duplicating thread duplicates again when executed, so dynamic
// runs of such programs grow until the spawn budget stops them.
inline void extend_with_duplicate(Program& p, Trace& tr, ThreadId src) {
  const ThreadId fresh = thread_count(p) + 1;
  Thread copy = p.threads[src - 1];
  for (int k = 1; k <= static_cast<int>(copy.statements.size()); ++k) {
    copy.statements[k - 1].owner = fresh;
    copy.statements[k - 1].index = k;
  }
  const int copied = static_cast<int>(copy.statements.size());
  p.threads.push_back(std::move(copy));
  for (int k = 1; k <= copied; ++k) tr.order.push_back({fresh, k});
}

inline RunOutcome run(const Program& p, const Trace& tr, TraceState initial,
                      SemanticsOptions opts = {}, const StepObserver& observe = {}) {
  RunOutcome out{std::move(initial), p, tr, {}};
  if (!opts.diagnostics) opts.diagnostics = &out.diagnostics;
  int spawned = 0;
  for (int u = 1; u <= out.trace.length(); ++u) {
    // Copy: a spawn below reallocates the thread table.
    const Statement s = statement_at(out.program, out.trace, u);
    StepOutcome so = step(out.program, s, out.state, opts);
    out.state = std::move(so.state);
    if (so.spawn_request) {
      if (++spawned > opts.max_spawned_threads)
        throw Fault(FaultKind::InstanceTooLarge, "duplicate budget exhausted", spawned,
                    opts.max_spawned_threads);
      extend_with_duplicate(out.program, out.trace, *so.spawn_request);
    }
    if (observe) observe(u, s, out.state);
  }
  return out;
}

// gamma as maps (domains and values, tc included), W as sets, L as multisets
// unless the exact request order is demanded.
inline bool states_equivalent(const TraceState& a, const TraceState& b,
                              bool strict_lock_order = false) {
  if (a.gamma != b.gamma || a.watched != b.watched) return false;
  if (strict_lock_order) return a.lock_requesters == b.lock_requesters;
  std::vector<ThreadId> la = a.lock_requesters, lb = b.lock_requesters;
  std::sort(la.begin(), la.end());
  std::sort(lb.begin(), lb.end());
  return la == lb;
}

// One line per executed statement, keys in lexicographic render order:
//   #<tc> <thread>:<kind> | gamma={...} L=[...] W={...}
inline std::string dump_line(const Statement& s, const TraceState& after) {
  std::vector<std::pair<std::string, long long>> vars;
  vars.reserve(after.gamma.size());
  for (const auto& [k, v] : after.gamma) vars.emplace_back(render_var(k), v);
  std::sort(vars.begin(), vars.end());
  std::ostringstream os;
  os << "#" << detail::read_var(after, tc_key, false) << " " << s.owner << ":"
     << kind_name(s.kind) << " | gamma={";
  for (size_t i = 0; i < vars.size(); ++i)
    os << (i ? "," : "") << vars[i].first << "=" << vars[i].second;
  os << "} L=[";
  for (size_t i = 0; i < after.lock_requesters.size(); ++i)
    os << (i ? "," : "") << after.lock_requesters[i];
  os << "] W={";
  bool first = true;
  for (const std::string& g : after.watched) {
    os << (first ? "" : ",") << g;
    first = false;
  }
  os << "}";
  return os.str();
}

} // namespace bintrc
