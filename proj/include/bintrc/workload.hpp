#pragma once

// Random programs, random faithful schedules, and the fixed benchmark suite.
// Everything is deterministic in the seed: raw mt19937_64 draws are mapped
// with plain modulo / 53-bit scaling, never std::uniform_*_distribution,
// whose output differs across standard libraries.

#include "bintrc/trace.hpp"

#include <array>
#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace bintrc {

struct Rng {
  std::mt19937_64 eng;

  explicit Rng(std::uint64_t seed) : eng(seed) {}

  std::uint64_t next() { return eng(); }

  // Uniform-ish in [0, n); modulo bias is irrelevant at workload sizes.
  int below(int n) { return n <= 0 ? 0 : static_cast<int>(next() % static_cast<std::uint64_t>(n)); }

  int in_range(int lo, int hi) { return lo + below(hi - lo + 1); }

  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  bool chance(double prob) { return unit() < prob; }
};

inline constexpr std::array<double, statement_kind_count> default_kind_weights{
    3.0, // localize
    3.0, // share
    1.0, // require
    1.0, // release
    0.0, // duplicate: only for dynamic-mode testing
    0.5, // initiate
    0.5, // ready
    0.5, // end
    1.0, // set1
    1.0, // set0
};

struct GenSpec {
  int thread_count = 2;
  int min_per_thread = 2;
  int max_per_thread = 8;
  int global_pool = 4;
  int local_pool = 2; // per thread
  std::array<double, statement_kind_count> kind_weights = default_kind_weights;
  double switch_bias = 0.5;
  std::uint64_t seed = 0;
};

inline void validate_genspec(const GenSpec& spec) {
  if (spec.thread_count < 1 || spec.thread_count > 16)
    throw Fault(FaultKind::InvalidSpec, "thread count outside 1..16", spec.thread_count, 0);
  if (spec.min_per_thread < 1 || spec.min_per_thread > spec.max_per_thread)
    throw Fault(FaultKind::InvalidSpec, "statements-per-thread range empty",
                spec.min_per_thread, spec.max_per_thread);
  if (spec.global_pool < 1 || spec.local_pool < 1)
    throw Fault(FaultKind::InvalidSpec, "name pools must be positive", spec.global_pool,
                spec.local_pool);
  double total = 0;
  for (double w : spec.kind_weights) {
    if (w < 0) throw Fault(FaultKind::InvalidSpec, "negative statement weight", 0, 0);
    total += w;
  }
  if (total <= 0) throw Fault(FaultKind::InvalidSpec, "all statement weights zero", 0, 0);
  if (spec.switch_bias < 0.0 || spec.switch_bias > 1.0)
    throw Fault(FaultKind::InvalidSpec, "switch bias outside [0,1]", 0, 0);
}

namespace detail {

inline std::string global_name(int i) { return "g" + std::to_string(i + 1); }
inline std::string local_name(int i) { return "l" + std::to_string(i + 1); }

inline StatementKind pick_kind(Rng& rng, const std::array<double, statement_kind_count>& w) {
  double total = 0;
  for (double x : w) total += x;
  double r = rng.unit() * total;
  for (int k = 0; k < statement_kind_count; ++k) {
    if (r < w[k]) return static_cast<StatementKind>(k);
    r -= w[k];
  }
  return StatementKind::Localize; // floating point leftovers land here
}

} // namespace detail

// Deterministic in spec.seed. Post-pass: a set0 on a global nobody ever
// set1s is rewritten into the missing set1, so watch sets always have a
// write they can suppress.
inline Program gen_program(const GenSpec& spec) {
  validate_genspec(spec);
  Rng rng(spec.seed);
  std::vector<std::vector<Statement>> threads(spec.thread_count);
  for (int t = 0; t < spec.thread_count; ++t) {
    const int count = rng.in_range(spec.min_per_thread, spec.max_per_thread);
    threads[t].reserve(count);
    for (int i = 0; i < count; ++i) {
      const StatementKind kind = detail::pick_kind(rng, spec.kind_weights);
      switch (kind) {
      case StatementKind::Localize:
        threads[t].push_back(Statement::localize(detail::local_name(rng.below(spec.local_pool)),
                                                 detail::global_name(rng.below(spec.global_pool))));
        break;
      case StatementKind::Share:
        threads[t].push_back(Statement::share(detail::local_name(rng.below(spec.local_pool)),
                                              detail::global_name(rng.below(spec.global_pool))));
        break;
      case StatementKind::Set1:
        threads[t].push_back(Statement::set1(detail::global_name(rng.below(spec.global_pool))));
        break;
      case StatementKind::Set0:
        threads[t].push_back(Statement::set0(detail::global_name(rng.below(spec.global_pool))));
        break;
      case StatementKind::Require: threads[t].push_back(Statement::require()); break;
      case StatementKind::Release: threads[t].push_back(Statement::release()); break;
      case StatementKind::Duplicate: threads[t].push_back(Statement::duplicate()); break;
      case StatementKind::Initiate: threads[t].push_back(Statement::initiate()); break;
      case StatementKind::Ready: threads[t].push_back(Statement::ready()); break;
      case StatementKind::End: threads[t].push_back(Statement::end()); break;
      }
    }
  }
  std::set<std::string> has_set1;
  for (auto& th : threads)
    for (Statement& s : th)
      if (s.kind == StatementKind::Set1) has_set1.insert(s.global);
  for (auto& th : threads)
    for (Statement& s : th)
      if (s.kind == StatementKind::Set0 && !has_set1.count(s.global)) {
        s.kind = StatementKind::Set1;
        has_set1.insert(s.global);
      }
  return make_program(std::move(threads));
}

// Random faithful schedule. After each step the scheduler keeps the current
// thread with probability 1 - bias (forced off it only when exhausted).
inline Trace gen_trace(const Program& p, double switch_bias, std::uint64_t seed) {
  if (switch_bias < 0.0 || switch_bias > 1.0)
    throw Fault(FaultKind::InvalidSpec, "switch bias outside [0,1]", 0, 0);
  Rng rng(seed);
  const int tc = thread_count(p);
  std::vector<int> remaining(tc + 1);
  int left = 0;
  for (int t = 1; t <= tc; ++t) {
    remaining[t] = static_cast<int>(p.threads[t - 1].statements.size());
    left += remaining[t];
  }
  std::vector<StatementRef> order;
  order.reserve(left);
  auto pick_live = [&](ThreadId avoid) -> ThreadId {
    std::vector<ThreadId> live;
    for (int t = 1; t <= tc; ++t)
      if (remaining[t] > 0 && t != avoid) live.push_back(t);
    if (live.empty()) return avoid;
    return live[rng.below(static_cast<int>(live.size()))];
  };
  ThreadId current = pick_live(0);
  while (left > 0) {
    const int idx = static_cast<int>(p.threads[current - 1].statements.size()) -
                    remaining[current] + 1;
    order.push_back(StatementRef{current, idx});
    --remaining[current];
    --left;
    if (left == 0) break;
    if (remaining[current] == 0)
      current = pick_live(current);
    else if (rng.chance(switch_bias)) {
      ThreadId other = pick_live(current);
      if (other != current) current = other;
    }
  }
  return validate_faithful(p, std::move(order));
}

// Deterministic schedule: pattern lists the owning thread of every position
// in order; statements are consumed in thread order. The pattern must cover
// the whole program, or faithfulness validation rejects it.
inline Trace scripted_trace(const Program& p, const std::vector<ThreadId>& pattern) {
  std::vector<int> next(thread_count(p) + 1, 1);
  std::vector<StatementRef> order;
  order.reserve(pattern.size());
  for (ThreadId t : pattern) {
    if (t < 1 || t > thread_count(p))
      throw Fault(FaultKind::PositionOutOfRange, "pattern names a missing thread", t, 0);
    order.push_back({t, next[t]++});
  }
  return validate_faithful(p, std::move(order));
}

struct BenchmarkInstance {
  std::string name;
  Program program;
  Trace trace;
};

// Hand-built two-thread fixture: one memory-publishing thread, one
// signaling thread, scheduled with three switches.
inline Program handoff_program() {
  return make_program({
      {Statement::localize("x", "a"), Statement::share("x", "b"), Statement::require(),
       Statement::release()},
      {Statement::localize("y", "c"), Statement::set1("d"), Statement::share("y", "c"),
       Statement::set0("d"), Statement::end()},
  });
}

inline Trace handoff_trace(const Program& p) {
  return validate_faithful(p, {{1, 1}, {1, 2}, {2, 1}, {2, 2}, {2, 3}, {1, 3}, {1, 4},
                               {2, 4}, {2, 5}});
}

// Dining-table analogue, 6 threads: each philosopher cycles through the
// shared lock and its own plate. Neighbor pairs alternate statement by
// statement in sections of 32 positions, the switch-heavy schedule the
// reduction exists to clean up.
inline Program philo_program() {
  auto philosopher = [](int id, int cycles) {
    std::vector<Statement> v;
    const std::string plate = "plate" + std::to_string(id);
    for (int c = 0; c < cycles; ++c) {
      v.push_back(Statement::require());
      v.push_back(Statement::localize("h", plate));
      v.push_back(Statement::share("h", plate));
      v.push_back(Statement::release());
    }
    return v;
  };
  return make_program({philosopher(1, 8), philosopher(2, 8), philosopher(3, 4),
                       philosopher(4, 4), philosopher(5, 4), philosopher(6, 4)});
}

inline Trace philo_trace(const Program& p) {
  std::vector<ThreadId> pat;
  auto pingpong = [&](ThreadId a, ThreadId b, int k) {
    for (int i = 0; i < k; ++i) {
      pat.push_back(a);
      pat.push_back(b);
    }
  };
  pingpong(1, 2, 16);
  pingpong(3, 4, 16);
  pingpong(5, 6, 16);
  pingpong(1, 2, 16);
  return scripted_trace(p, pat);
}

// Download-manager analogue, 3 threads: each worker raises its flag,
// publishes its status, and clears the flag. The manager (thread 1)
// ping-pongs with each worker in turn.
inline Program webdow_program() {
  auto downloader = [](int id, int cycles) {
    std::vector<Statement> v;
    const std::string flag = "flag" + std::to_string(id);
    const std::string status = "status" + std::to_string(id);
    for (int c = 0; c < cycles; ++c) {
      v.push_back(Statement::set1(flag));
      v.push_back(Statement::localize("b", status));
      v.push_back(Statement::share("b", status));
      v.push_back(Statement::set0(flag));
    }
    return v;
  };
  return make_program({downloader(1, 8), downloader(2, 4), downloader(3, 4)});
}

inline Trace webdow_trace(const Program& p) {
  std::vector<ThreadId> pat;
  auto pingpong = [&](ThreadId a, ThreadId b, int k) {
    for (int i = 0; i < k; ++i) {
      pat.push_back(a);
      pat.push_back(b);
    }
  };
  pingpong(1, 2, 16);
  pingpong(1, 3, 16);
  return scripted_trace(p, pat);
}

// Fork/join merge-sort skeleton, 18 threads: a main thread, an input
// reader, an output writer, a 7-node merger tree, and 8 leaf sorters. Built
// by hand because the tree wiring is the point and the generator tops out
// at 16 threads.
inline Program merge_program() {
  std::vector<std::vector<Statement>> threads;
  // 1: main forks the tree and awaits the root result.
  threads.push_back({Statement::initiate(), Statement::duplicate(),
                     Statement::localize("r", "m4"), Statement::end()});
  // 2: reader publishes the input buffer.
  threads.push_back({Statement::initiate(), Statement::share("i", "input"),
                     Statement::ready(), Statement::end()});
  // 3: writer drains the root result.
  threads.push_back({Statement::initiate(), Statement::localize("o", "m4"),
                     Statement::share("o", "output"), Statement::ready(),
                     Statement::end()});
  // 4..10: mergers; node j combines children 2j-3 and 2j-2 into m<j>.
  auto feed = [](int k) {
    return (k <= 10 ? "m" : "s") + std::to_string(k);
  };
  for (int j = 4; j <= 10; ++j)
    threads.push_back({Statement::initiate(), Statement::duplicate(),
                       Statement::localize("a", feed(2 * j - 3)),
                       Statement::localize("b", feed(2 * j - 2)),
                       Statement::share("a", "m" + std::to_string(j)),
                       Statement::ready(), Statement::end()});
  // 11..18: leaf sorters read the input and publish their chunk.
  for (int k = 11; k <= 18; ++k)
    threads.push_back({Statement::initiate(), Statement::localize("a", "input"),
                       Statement::share("a", "s" + std::to_string(k)),
                       Statement::ready(), Statement::end()});
  return make_program(std::move(threads));
}

// Bump when any canned instance changes shape or seed.
inline int suite_version() { return 1; }

// Desk-scale analogues of the usual concurrency workloads: lock cycles,
// fork/join fan-out, shared-bound updates, flag signaling. Shapes and thread
// counts are the point; sizes are kept small enough for exhaustive checks.
inline std::vector<BenchmarkInstance> benchmark_suite() {
  std::vector<BenchmarkInstance> out;
  {
    Program p = handoff_program();
    Trace t = handoff_trace(p);
    out.push_back({"handoff", std::move(p), std::move(t)});
  }
  auto add = [&](const std::string& name, GenSpec spec, double bias, std::uint64_t trace_seed) {
    Program p = gen_program(spec);
    Trace t = gen_trace(p, bias, trace_seed);
    out.push_back({name, std::move(p), std::move(t)});
  };
  {
    Program p = philo_program();
    Trace t = philo_trace(p);
    out.push_back({"philo", std::move(p), std::move(t)});
  }
  {
    Program p = merge_program();
    Trace t = gen_trace(p, 0.7, 202);
    out.push_back({"merge", std::move(p), std::move(t)});
  }
  {
    GenSpec tsp;
    tsp.thread_count = 5;
    tsp.min_per_thread = 14;
    tsp.max_per_thread = 18;
    tsp.global_pool = 2;
    tsp.local_pool = 2;
    tsp.kind_weights = {3, 3, 0, 0, 0, 0, 0, 0, 0, 0};
    tsp.seed = 301;
    add("tsp", tsp, 0.6, 302);
  }
  {
    Program p = webdow_program();
    Trace t = webdow_trace(p);
    out.push_back({"webdow", std::move(p), std::move(t)});
  }
  return out;
}

} // namespace bintrc
