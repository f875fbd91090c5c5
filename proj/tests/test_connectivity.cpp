#include "bintrc/connectivity.hpp"
#include "bintrc/workload.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace bintrc;

TEST_CASE("connect clauses") {
  Program p = make_program({
      {Statement::set1("g"), Statement::localize("l", "g"), Statement::release(),
       Statement::set0("h"), Statement::require()},
      {Statement::set0("g"), Statement::localize("m", "g"), Statement::share("m", "g"),
       Statement::require()},
  });
  const auto& a = p.threads[0].statements;
  const auto& b = p.threads[1].statements;

  SECTION("synchronization pairs") {
    CHECK(connect(p, a[0], b[0]) == 1); // set1 then set0, same global, cross thread
    CHECK(connect(p, a[0], a[3]) == 0); // set1 g then set0 h: different globals
    CHECK(connect(p, a[2], a[4]) == 1); // release then require, same thread, with a gap
    CHECK(connect(p, a[2], b[3]) == 0); // release then require of another thread
  }
  SECTION("memory pairs need a publishing side") {
    CHECK(connect(p, a[1], b[1]) == 0); // two localizes of g: both read
    CHECK(connect(p, a[1], b[2]) == 1); // localize then cross-thread share
    CHECK(connect(p, b[2], a[1]) == 1); // share then cross-thread localize
  }
  SECTION("thread succession") {
    CHECK(connect(p, a[0], a[1]) == 1);
    CHECK(connect(p, a[1], a[0]) == 0); // order matters
    CHECK(connect(p, a[0], a[2]) == 0); // not consecutive, no pairing
  }
  SECTION("statements must belong to the program") {
    Statement ghost = Statement::set1("g");
    ghost.owner = 7;
    ghost.index = 1;
    CHECK_THROWS_AS(connect(p, ghost, a[0]), Fault);
    Statement impostor = Statement::set1("zzz");
    impostor.owner = 1;
    impostor.index = 1; // the program holds set1 g there
    try {
      connect(p, impostor, a[1]);
      FAIL("expected a foreign statement fault");
    } catch (const Fault& f) {
      CHECK(f.kind() == FaultKind::ForeignStatement);
    }
  }
}

TEST_CASE("fork and join pairings connect within a thread") {
  Program p = make_program({
      {Statement::duplicate(), Statement::set1("g"), Statement::ready()},
      {Statement::end(), Statement::set1("g"), Statement::initiate()},
  });
  const auto& a = p.threads[0].statements;
  const auto& b = p.threads[1].statements;
  CHECK(connect(p, a[0], a[2]) == 1); // duplicate then ready
  CHECK(connect(p, b[0], b[2]) == 1); // end then initiate
  CHECK(connect(p, a[0], b[2]) == 0); // cross-thread fork/join pairs do not connect
}

TEST_CASE("annotation of the two-thread fixture") {
  Program p = handoff_program();
  Trace t = handoff_trace(p);
  AnnotatedTrace at = annotate(p, t);
  REQUIRE(at.joins.size() == 10);
  CHECK(at.joins[0] == Annotation{0, 0, 0, 0});
  const std::vector<int> starts{1, 3, 6, 8};
  for (int u = 1; u <= 9; ++u) {
    const Annotation& j = at.joins[u];
    CHECK(j.s2 == u);
    CHECK(j.t2 == thread_at(t, u));
    const bool is_start =
        std::find(starts.begin(), starts.end(), u) != starts.end();
    CHECK((j.s1 == u) == is_start);
  }
  CHECK(segments_of(at) ==
        SegmentList{{1, 2, 1, 1}, {3, 5, 2, 2}, {6, 7, 1, 1}, {8, 9, 2, 2}});
}

TEST_CASE("single statement trace annotates as its own segment") {
  Program p = make_program({{Statement::require()}});
  AnnotatedTrace at = annotate(p, identity_trace(p));
  REQUIRE(at.joins.size() == 2);
  CHECK(at.joins[0] == Annotation{0, 0, 0, 0});
  CHECK(at.joins[1] == Annotation{1, 1, 1, 1});
}

TEST_CASE("release/require chain extends a segment past a lock handoff") {
  Program p = make_program({
      {Statement::release(), Statement::require()},
      {Statement::require()},
  });
  Trace t = validate_faithful(p, {{1, 1}, {1, 2}, {2, 1}});
  AnnotatedTrace at = annotate(p, t);
  CHECK(segments_of(at) == SegmentList{{1, 2, 1, 1}, {3, 3, 2, 2}});
}

TEST_CASE("segment extremes") {
  SECTION("fully connected single thread") {
    Program p = make_program({{Statement::require(), Statement::release(),
                               Statement::require(), Statement::release()}});
    AnnotatedTrace at = annotate(p, identity_trace(p));
    CHECK(segments_of(at) == SegmentList{{1, 4, 1, 1}});
  }
  SECTION("fully unconnected alternation") {
    Program p = make_program({
        {Statement::initiate(), Statement::initiate()},
        {Statement::ready(), Statement::ready()},
    });
    Trace t = validate_faithful(p, {{1, 1}, {2, 1}, {1, 2}, {2, 2}});
    AnnotatedTrace at = annotate(p, t);
    CHECK(segments_of(at) ==
          SegmentList{{1, 1, 1, 1}, {2, 2, 2, 2}, {3, 3, 1, 1}, {4, 4, 2, 2}});
  }
}

TEST_CASE("annotation invariants over random traces") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    GenSpec spec;
    spec.thread_count = 2 + static_cast<int>(seed % 4);
    spec.min_per_thread = 1;
    spec.max_per_thread = 8;
    spec.global_pool = 3;
    spec.seed = seed;
    Program p = gen_program(spec);
    Trace t = gen_trace(p, 0.7, seed * 31 + 5);
    AnnotatedTrace at = annotate(p, t);
    // Re-annotation is deterministic.
    CHECK(annotate(p, t).joins == at.joins);
    SegmentList segs = segments_of(at);
    // Segments tile 1..N without gaps.
    int expected_start = 1;
    for (const Segment& s : segs) {
      CHECK(s.start == expected_start);
      CHECK(s.end >= s.start);
      CHECK(s.start_thread == thread_at(t, s.start));
      CHECK(s.end_thread == thread_at(t, s.end));
      expected_start = s.end + 1;
    }
    CHECK(expected_start == t.length() + 1);
    for (int u = 2; u <= t.length(); ++u) {
      const int c = connect(p, statement_at(p, t, u - 1), statement_at(p, t, u));
      CHECK((at.joins[u].s1 == u) == (c == 0));
      // Same-segment cross-thread neighbors owe their link to a
      // synchronization or memory pairing.
      if (at.joins[u].s1 != u && thread_at(t, u) != thread_at(t, u - 1)) CHECK(c == 1);
    }
  }
}

TEST_CASE("block independence") {
  Program p = handoff_program();
  Trace t = handoff_trace(p);
  SECTION("disjoint threads, disjoint globals") {
    CHECK(blocks_independent(p, t, {6, 7}, {8, 9}));
  }
  SECTION("shared thread") { CHECK_FALSE(blocks_independent(p, t, {1, 2}, {6, 7})); }
  SECTION("conflicting memory pair") {
    Program q = make_program({
        {Statement::share("l", "g")},
        {Statement::localize("m", "g")},
    });
    Trace qt = identity_trace(q);
    CHECK_FALSE(blocks_independent(q, qt, {1, 1}, {2, 2}));
  }
  SECTION("range validation") {
    auto kind_of = [](auto fn) {
      try {
        fn();
      } catch (const Fault& f) {
        return f.kind();
      }
      return FaultKind::InvalidSpec;
    };
    CHECK(kind_of([&] { blocks_independent(p, t, {1, 3}, {2, 4}); }) ==
          FaultKind::RangeOverlap);
    CHECK(kind_of([&] { blocks_independent(p, t, {5, 6}, {1, 2}); }) ==
          FaultKind::RangeOutOfOrder);
    CHECK(kind_of([&] { blocks_independent(p, t, {0, 1}, {2, 3}); }) ==
          FaultKind::PositionOutOfRange);
    CHECK(kind_of([&] { blocks_independent(p, t, {3, 2}, {4, 5}); }) ==
          FaultKind::RangeOutOfOrder);
  }
}

TEST_CASE("independent blocks swap into a faithful trace") {
  Rng rng(7);
  int checked = 0;
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    GenSpec spec;
    spec.thread_count = 2 + static_cast<int>(seed % 5);
    spec.min_per_thread = 1;
    spec.max_per_thread = 6;
    spec.seed = seed;
    Program p = gen_program(spec);
    Trace t = gen_trace(p, 0.8, seed * 13 + 3);
    const int n = t.length();
    if (n < 2) continue;
    const int mid = 1 + rng.below(n - 1);       // A = [lo..mid]
    const int lo = 1 + rng.below(mid);          // B = [mid+1..hi]
    const int hi = mid + 1 + rng.below(n - mid);
    if (!blocks_independent(p, t, {lo, mid}, {mid + 1, hi})) continue;
    std::vector<StatementRef> swapped = t.order;
    std::rotate(swapped.begin() + (lo - 1), swapped.begin() + mid, swapped.begin() + hi);
    REQUIRE_NOTHROW(validate_faithful(p, swapped));
    ++checked;
  }
  CHECK(checked > 0);
}
