#include "bintrc/io.hpp"
#include "bintrc/workload.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>

using namespace bintrc;

namespace {

TraceDocument handoff_doc() {
  TraceDocument doc;
  doc.program = handoff_program();
  doc.trace = handoff_trace(doc.program);
  return doc;
}

} // namespace

TEST_CASE("program digest is fnv1a of the program section") {
  // Empty body hashes to the offset basis.
  CHECK(program_digest(make_program({})) == "cbf29ce484222325");
  Program p = handoff_program();
  CHECK(program_digest(p).size() == 16);
  CHECK(program_digest(p) == program_digest(handoff_program()));
  Program q = make_program({{Statement::set1("a")}});
  CHECK(program_digest(p) != program_digest(q));
}

TEST_CASE("the fixture document parses back to the fixture") {
  std::string text = serialize(handoff_doc());
  TraceDocument doc = parse_document(text);
  CHECK(thread_count(doc.program) == 2);
  CHECK(statement_count(doc.program) == 9);
  CHECK(doc.trace.length() == 9);
  CHECK(doc.program == handoff_program());
  CHECK(doc.trace == handoff_trace(doc.program));
  CHECK_FALSE(doc.annotations.has_value());
  CHECK_FALSE(doc.derivation.has_value());
}

TEST_CASE("serialize then parse is the identity, byte for byte") {
  TraceDocument doc = handoff_doc();
  SECTION("bare") {}
  SECTION("with annotations") {
    doc.annotations = annotate(doc.program, doc.trace).joins;
  }
  SECTION("with derivation") {
    ReductionResult res = reduce(doc.program, annotate(doc.program, doc.trace));
    doc.annotations = res.after.joins;
    doc.trace = res.after.trace;
    doc.derivation = res.rounds;
  }
  const std::string once = serialize(doc);
  TraceDocument parsed = parse_document(once);
  CHECK(parsed == doc);
  CHECK(serialize(parsed) == once);
}

TEST_CASE("trace lines wrap at sixteen tokens") {
  Program p = philo_program();
  TraceDocument doc;
  doc.program = p;
  doc.trace = philo_trace(p);
  const std::string text = serialize(doc);
  CHECK(parse_document(text) == doc);
  // 128 refs at 16 per line.
  size_t trace_at = text.find("trace:\n");
  REQUIRE(trace_at != std::string::npos);
  const std::string section = text.substr(trace_at + 7);
  CHECK(std::count(section.begin(), section.end(), '\n') == 8);
}

TEST_CASE("documents fault with positions") {
  const std::string good = serialize(handoff_doc());

  auto expect_fault = [](std::string text, FaultKind kind) {
    try {
      parse_document(text);
      FAIL("expected parse fault");
    } catch (const Fault& f) {
      CHECK(f.kind() == kind);
    }
  };

  SECTION("unsupported version") {
    std::string text = good;
    text.replace(text.find("trcdoc 1"), 8, "trcdoc 2");
    expect_fault(text, FaultKind::VersionUnsupported);
  }
  SECTION("missing header") { expect_fault("", FaultKind::SyntaxError); }
  SECTION("garbled header") { expect_fault("trcdoc one\n", FaultKind::SyntaxError); }
  SECTION("digest must be sixteen hex digits") {
    std::string text = good;
    text.replace(text.find("digest "), 23, "digest 123\n");
    expect_fault(text, FaultKind::SyntaxError);
  }
  SECTION("digest mismatch") {
    std::string text = good;
    const size_t at = text.find("digest ") + 7;
    text[at] = text[at] == '0' ? '1' : '0';
    expect_fault(text, FaultKind::SemanticError);
  }
  SECTION("unknown statement kind") {
    std::string text = good;
    text.replace(text.find("require"), 7, "acquire");
    expect_fault(text, FaultKind::SyntaxError);
  }
  SECTION("wrong operand count") {
    std::string text = good;
    text.replace(text.find("set1 d"), 6, "set1 d e");
    expect_fault(text, FaultKind::SyntaxError);
  }
  SECTION("tc is reserved") {
    std::string text = good;
    text.replace(text.find("set1 d"), 6, "set1 tc");
    expect_fault(text, FaultKind::SemanticError);
  }
  SECTION("thread headers count up") {
    std::string text = good;
    text.replace(text.find("thread 2:"), 9, "thread 3:");
    expect_fault(text, FaultKind::SemanticError);
  }
  SECTION("malformed trace token") {
    std::string text = good;
    text.replace(text.find("t1#1"), 4, "t1@1");
    expect_fault(text, FaultKind::SyntaxError);
  }
  SECTION("trace must stay faithful") {
    std::string text = good;
    // Thread 1's first two statements arrive reversed.
    text.replace(text.find("t1#1 t1#2"), 9, "t1#2 t1#1");
    expect_fault(text, FaultKind::SemanticError);
  }
  SECTION("empty trace on a nonempty program") {
    std::string text = good;
    const size_t at = text.find("trace:\n");
    text = text.substr(0, at + 7);
    try {
      parse_document(text);
      FAIL("expected length mismatch surfaced");
    } catch (const Fault& f) {
      CHECK(f.kind() == FaultKind::SemanticError);
      CHECK(std::string(f.what()).find("length") != std::string::npos);
    }
  }
  SECTION("annotations must match the trace") {
    TraceDocument doc = handoff_doc();
    doc.annotations = annotate(doc.program, doc.trace).joins;
    (*doc.annotations)[4].t1 = 9;
    expect_fault(serialize(doc), FaultKind::SemanticError);
  }
  SECTION("annotation arity") {
    TraceDocument doc = handoff_doc();
    doc.annotations = annotate(doc.program, doc.trace).joins;
    std::string text = serialize(doc);
    text.replace(text.find("3,5,2,2"), 7, "3,5,2");
    expect_fault(text, FaultKind::SyntaxError);
  }
  SECTION("derivation indentation is two spaces per level") {
    TraceDocument doc = handoff_doc();
    ReductionResult res = reduce(doc.program, annotate(doc.program, doc.trace));
    doc.trace = res.after.trace;
    doc.derivation = res.rounds;
    std::string text = serialize(doc);
    text.replace(text.find("  S-noswap 1..5"), 2, "   ");
    expect_fault(text, FaultKind::SyntaxError);
  }
  SECTION("derivation must not deepen abruptly") {
    std::string text = good;
    text += "derivation:\n  base0 1..1 witness=0,1\n";
    expect_fault(text, FaultKind::SyntaxError);
  }
}

TEST_CASE("derivation section carries the log format") {
  TraceDocument doc = handoff_doc();
  ReductionResult res = reduce(doc.program, annotate(doc.program, doc.trace));
  doc.trace = res.after.trace;
  doc.derivation = res.rounds;
  const std::string text = serialize(doc);
  CHECK(text.find("derivation:\nS-noswap 1..9 witness=0,1\n"
                  "  S-noswap 1..5 witness=0,2\n") != std::string::npos);
  CHECK(text.find("  S-swap 6..9 witness=2,2\n"
                  "    base1 6..7 witness=2,1\n"
                  "    base1 8..9 witness=1,2\n") != std::string::npos);
  TraceDocument parsed = parse_document(text);
  REQUIRE(parsed.derivation.has_value());
  CHECK(*parsed.derivation == res.rounds);
}

TEST_CASE("reduction percent formula") {
  CHECK(reduction_percent_of(0, 0) == 0.0);
  CHECK(reduction_percent_of(4, 3) == 25.0);
  CHECK(reduction_percent_of(3, 2) == Catch::Approx(100.0 / 3.0));
}

TEST_CASE("pipeline on the fixture: monotonicity and equivalence both hold") {
  Program p = handoff_program();
  Trace t = handoff_trace(p);
  PipelineOptions opt;
  opt.with_oracle = true;
  PipelineOutcome out = simplify_pipeline("handoff", p, t, opt);
  CHECK(out.report.cs_before == 3);
  CHECK(out.report.cs_after == 2);
  CHECK(out.report.reduction_percent == Catch::Approx(100.0 / 3.0));
  CHECK(out.monotone_ok);
  CHECK(out.equivalent_ok);
  CHECK(out.ok());
  REQUIRE(out.report.oracle_min_cs.has_value());
  CHECK(*out.report.oracle_min_cs == 1);
  CHECK(out.report.thread_count == 2);
  CHECK(out.report.swaps_rejected_by_guard == 1);
}

TEST_CASE("pipeline refuses the oracle above the limit") {
  Program p = philo_program();
  Trace t = philo_trace(p);
  PipelineOptions opt;
  opt.with_oracle = true;
  try {
    simplify_pipeline("philo", p, t, opt);
    FAIL("expected refusal");
  } catch (const Fault& f) {
    CHECK(f.kind() == FaultKind::OracleRefused);
  }
  opt.with_oracle = false;
  opt.fixpoint_rounds = 10;
  PipelineOutcome out = simplify_pipeline("philo", p, t, opt);
  CHECK(out.ok());
  CHECK(out.report.reduction_percent >= 40.0);
  CHECK_FALSE(out.report.oracle_min_cs.has_value());
}

TEST_CASE("report table lists every column and the average") {
  Report a;
  a.name = "handoff";
  a.thread_count = 2;
  a.cs_before = 3;
  a.cs_after = 2;
  a.reduction_percent = reduction_percent_of(3, 2);
  a.oracle_min_cs = 1;
  a.swaps_rejected_by_guard = 1;
  Report b;
  b.name = "philo";
  b.thread_count = 6;
  b.cs_before = 127;
  b.cs_after = 67;
  b.reduction_percent = reduction_percent_of(127, 67);
  const std::string table = report_table({a, b});
  for (const char* col :
       {"name", "threads", "cs_before", "cs_after", "reduction", "analysis_ms",
        "transform_ms", "sem_before_ms", "sem_after_ms", "oracle", "guard_rejects"})
    CHECK(table.find(col) != std::string::npos);
  CHECK(table.find("handoff") != std::string::npos);
  CHECK(table.find("33.3%") != std::string::npos);
  CHECK(table.find("47.2%") != std::string::npos);
  // handoff's row carries the oracle value, philo's a dash.
  const size_t fig_row = table.find("\nhandoff");
  const size_t philo_row = table.find("\nphilo");
  REQUIRE(fig_row != std::string::npos);
  REQUIRE(philo_row != std::string::npos);
  CHECK(table.substr(fig_row, philo_row - fig_row).find("-") == std::string::npos);
  CHECK(table.substr(philo_row).find("-") != std::string::npos);
  CHECK(table.find("average reduction: 40.3% over 2 instance(s)") != std::string::npos);
  CHECK(report_table({}).find("average") == std::string::npos);
}
