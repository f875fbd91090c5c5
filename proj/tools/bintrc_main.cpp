// Command-line front end: document I/O plus the library's analyze, reduce,
// replay, and workload entry points. Exit codes: 0 success, 1 a check the
// command exists to enforce failed (simplify's monotonicity/equivalence,
// check's certificate), 2 input or environment faults.

#include <CLI11.hpp>
#include <json.hpp>

#include <bintrc/bintrc.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

using nlohmann::ordered_json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream body;
  body << in.rdbuf();
  return body.str();
}

void write_file(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << body;
}

std::string instance_name(const std::string& path) {
  return std::filesystem::path(path).stem().string();
}

ordered_json report_json(const bintrc::Report& r) {
  ordered_json j;
  j["name"] = r.name;
  j["threadCount"] = r.thread_count;
  j["csBefore"] = r.cs_before;
  j["csAfter"] = r.cs_after;
  j["reductionPercent"] = r.reduction_percent;
  j["analysisTimeMs"] = r.analysis_ms;
  j["transformTimeMs"] = r.transform_ms;
  j["semanticsBeforeMs"] = r.semantics_before_ms;
  j["semanticsAfterMs"] = r.semantics_after_ms;
  j["oracleMinCs"] = r.oracle_min_cs ? ordered_json(*r.oracle_min_cs) : ordered_json(nullptr);
  j["swapsRejectedByGuard"] = r.swaps_rejected_by_guard;
  return j;
}

int count_nodes(const std::vector<bintrc::DerivationNode>& nodes) {
  int c = 0;
  for (const auto& n : nodes) c += 1 + count_nodes(n.children);
  return c;
}

struct SimplifyArgs {
  std::string input;
  std::string out;
  std::string format = "text";
  bintrc::PipelineOptions opt;
};

int cmd_simplify(const SimplifyArgs& a) {
  const bintrc::TraceDocument doc = bintrc::parse_document(read_file(a.input));
  const auto out =
      bintrc::simplify_pipeline(instance_name(a.input), doc.program, doc.trace, a.opt);

  if (!a.out.empty()) {
    bintrc::TraceDocument reduced;
    reduced.program = doc.program;
    reduced.trace = out.reduction.after.trace;
    reduced.annotations = out.reduction.after.joins;
    reduced.derivation = out.reduction.rounds;
    write_file(a.out, bintrc::serialize(reduced));
  }

  if (a.format == "json") {
    std::cout << report_json(out.report).dump(2) << "\n";
  } else {
    std::cout << bintrc::report_table({out.report});
    if (out.report.oracle_min_cs)
      std::cout << "oracle gap: " << out.report.cs_after - *out.report.oracle_min_cs
                << " switch(es) above the minimum\n";
    std::cout << "monotone: " << (out.monotone_ok ? "ok" : "VIOLATED")
              << "  equivalent: " << (out.equivalent_ok ? "ok" : "VIOLATED") << "\n";
  }
  return out.ok() ? 0 : 1;
}

struct AnalyzeArgs {
  std::string input;
  std::string out;
};

int cmd_analyze(const AnalyzeArgs& a) {
  bintrc::TraceDocument doc = bintrc::parse_document(read_file(a.input));
  const bintrc::AnnotatedTrace at = bintrc::annotate(doc.program, doc.trace);
  const bintrc::SegmentList segs = bintrc::segments_of(at);

  std::cout << "positions " << at.length() << ", switches "
            << bintrc::context_switch_count(doc.trace) << ", runs " << segs.size() << "\n";
  for (const bintrc::Segment& s : segs) {
    std::cout << "  [" << s.start << ".." << s.end << "] thread " << s.start_thread;
    if (s.end_thread != s.start_thread) std::cout << " -> " << s.end_thread;
    std::cout << "\n";
  }

  if (!a.out.empty()) {
    doc.annotations = at.joins;
    write_file(a.out, bintrc::serialize(doc));
  }
  return 0;
}

struct RunArgs {
  std::string input;
  std::string mode = "replay";
  bool dump = false;
  bool strict_vars = false;
  int spawn_budget = 4096;
};

int cmd_run(const RunArgs& a) {
  const bintrc::TraceDocument doc = bintrc::parse_document(read_file(a.input));
  bintrc::SemanticsOptions sem;
  sem.mode = a.mode == "dynamic" ? bintrc::SemanticsMode::Dynamic
                                 : bintrc::SemanticsMode::Replay;
  sem.strict_vars = a.strict_vars;
  sem.max_spawned_threads = a.spawn_budget;

  bintrc::StepObserver observe;
  if (a.dump)
    observe = [](int, const bintrc::Statement& s, const bintrc::TraceState& after) {
      std::cout << bintrc::dump_line(s, after) << "\n";
    };

  const auto out = bintrc::run(doc.program, doc.trace, bintrc::initial_state(), sem, observe);
  for (const std::string& d : out.diagnostics) std::cerr << "diagnostic: " << d << "\n";
  std::cout << "executed " << out.trace.length() << " statement(s), switches "
            << bintrc::context_switch_count(out.trace) << ", diagnostics "
            << out.diagnostics.size() << "\n";
  return 0;
}

struct CheckArgs {
  std::string before;
  std::string after;
  bintrc::ReduceOptions opt;
};

int cmd_check(const CheckArgs& a) {
  const bintrc::TraceDocument before = bintrc::parse_document(read_file(a.before));
  const bintrc::TraceDocument after = bintrc::parse_document(read_file(a.after));

  if (bintrc::program_digest(before.program) != bintrc::program_digest(after.program)) {
    std::cerr << "check failed: program digests differ\n";
    return 1;
  }
  if (!after.derivation) {
    std::cerr << "check failed: after document carries no derivation\n";
    return 1;
  }
  bintrc::Trace replayed;
  try {
    replayed =
        bintrc::replay_derivation(before.program, before.trace, *after.derivation, a.opt);
  } catch (const bintrc::Fault& f) {
    if (f.kind() != bintrc::FaultKind::DerivationMismatch) throw;
    std::cerr << "check failed: " << f.what() << "\n";
    return 1;
  }
  if (!(replayed == after.trace)) {
    std::cerr << "check failed: replayed trace differs from the after document\n";
    return 1;
  }
  std::cout << "certificate verified: " << count_nodes(*after.derivation)
            << " node(s), switches " << bintrc::context_switch_count(before.trace) << " -> "
            << bintrc::context_switch_count(after.trace) << "\n";
  return 0;
}

struct GenArgs {
  std::string bench;
  std::string out;
  std::string out_dir = ".";
  bintrc::GenSpec spec;
  double bias = 0.5;
  std::uint64_t trace_seed = 1;
};

void emit_document(const bintrc::Program& p, const bintrc::Trace& t,
                   const std::string& out) {
  bintrc::TraceDocument doc;
  doc.program = p;
  doc.trace = t;
  if (out.empty())
    std::cout << bintrc::serialize(doc);
  else
    write_file(out, bintrc::serialize(doc));
}

int cmd_gen(const GenArgs& a) {
  if (!a.bench.empty()) {
    const auto suite = bintrc::benchmark_suite();
    if (a.bench == "all") {
      for (const auto& inst : suite) {
        const auto path = std::filesystem::path(a.out_dir) / (inst.name + ".trc");
        emit_document(inst.program, inst.trace, path.string());
        std::cout << path.string() << "\n";
      }
      return 0;
    }
    for (const auto& inst : suite)
      if (inst.name == a.bench) {
        emit_document(inst.program, inst.trace, a.out);
        return 0;
      }
    std::cerr << "error: no benchmark named '" << a.bench << "'\n";
    return 2;
  }
  const bintrc::Program p = bintrc::gen_program(a.spec);
  const bintrc::Trace t = bintrc::gen_trace(p, a.bias, a.trace_seed);
  emit_document(p, t, a.out);
  return 0;
}

struct ReportArgs {
  std::string format = "text";
  bintrc::PipelineOptions opt;
  bool oracle = false;
};

int cmd_report(const ReportArgs& a) {
  std::vector<bintrc::Report> rows;
  bool all_ok = true;
  for (const auto& inst : bintrc::benchmark_suite()) {
    bintrc::PipelineOptions opt = a.opt;
    // Oversized instances keep a dash in the oracle column instead of
    // refusing the whole table.
    opt.with_oracle =
        a.oracle && bintrc::statement_count(inst.program) <= a.opt.oracle_limit;
    const auto out = bintrc::simplify_pipeline(inst.name, inst.program, inst.trace, opt);
    all_ok = all_ok && out.ok();
    rows.push_back(out.report);
  }
  if (a.format == "json") {
    ordered_json j;
    j["suiteVersion"] = bintrc::suite_version();
    j["instances"] = ordered_json::array();
    double sum = 0.0;
    for (const auto& r : rows) {
      j["instances"].push_back(report_json(r));
      sum += r.reduction_percent;
    }
    j["averageReductionPercent"] = rows.empty() ? 0.0 : sum / rows.size();
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << bintrc::report_table(rows);
  }
  return all_ok ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"annotate, reduce, replay, and certify concurrent traces"};
  app.require_subcommand(1);
  int rc = 0;

  SimplifyArgs sa;
  auto* simplify = app.add_subcommand("simplify", "reduce a trace and certify the result");
  simplify->add_option("input", sa.input, "trace document")->required();
  simplify->add_option("--out", sa.out, "write the reduced document here");
  simplify->add_option("--fixpoint", sa.opt.fixpoint_rounds, "max reduction passes")
      ->check(CLI::PositiveNumber);
  simplify->add_flag("--oracle", sa.opt.with_oracle, "compare against the exhaustive minimum");
  simplify->add_option("--oracle-limit", sa.opt.oracle_limit,
                       "statement cap for the exhaustive search");
  simplify->add_flag("--strict-vars", sa.opt.strict_vars, "fault on unbound reads");
  simplify->add_flag("--strict-locklist", sa.opt.strict_lock_order,
                     "equivalence compares lock requester order");
  simplify->add_flag("--s-first-stmt", sa.opt.reduce_options.swap_condition_first_stmt,
                     "variant swap condition: first statement's thread");
  simplify->add_option("--format", sa.format, "text or json")
      ->check(CLI::IsMember({"text", "json"}));
  simplify->callback([&] { rc = cmd_simplify(sa); });

  AnalyzeArgs aa;
  auto* analyze = app.add_subcommand("analyze", "annotate a trace and list its runs");
  analyze->add_option("input", aa.input, "trace document")->required();
  analyze->add_option("--out", aa.out, "write the annotated document here");
  analyze->callback([&] { rc = cmd_analyze(aa); });

  RunArgs ra;
  auto* run = app.add_subcommand("run", "execute a trace under the operational semantics");
  run->add_option("input", ra.input, "trace document")->required();
  run->add_option("--mode", ra.mode, "replay or dynamic duplication")
      ->check(CLI::IsMember({"replay", "dynamic"}));
  run->add_flag("--dump", ra.dump, "print one state line per statement");
  run->add_flag("--strict-vars", ra.strict_vars, "fault on unbound reads");
  run->add_option("--spawn-budget", ra.spawn_budget, "dynamic-mode duplicate cap")
      ->check(CLI::PositiveNumber);
  run->callback([&] { rc = cmd_run(ra); });

  CheckArgs ca;
  auto* check = app.add_subcommand("check", "replay a derivation against its documents");
  check->add_option("before", ca.before, "input trace document")->required();
  check->add_option("after", ca.after, "reduced document with a derivation")->required();
  check->add_flag("--s-first-stmt", ca.opt.swap_condition_first_stmt,
                  "variant swap condition: first statement's thread");
  check->callback([&] { rc = cmd_check(ca); });

  GenArgs ga;
  auto* gen = app.add_subcommand("gen", "emit a generated or benchmark trace document");
  gen->add_option("--bench", ga.bench, "benchmark instance name, or 'all'");
  gen->add_option("--out", ga.out, "output file (default stdout)");
  gen->add_option("--out-dir", ga.out_dir, "directory for --bench all");
  gen->add_option("--threads", ga.spec.thread_count, "thread count");
  gen->add_option("--stmts-min", ga.spec.min_per_thread, "min statements per thread");
  gen->add_option("--stmts-max", ga.spec.max_per_thread, "max statements per thread");
  gen->add_option("--globals", ga.spec.global_pool, "global variable pool");
  gen->add_option("--locals", ga.spec.local_pool, "local variable pool per thread");
  gen->add_option("--bias", ga.bias, "schedule switch bias in [0,1]");
  gen->add_option("--seed", ga.spec.seed, "program seed");
  gen->add_option("--trace-seed", ga.trace_seed, "schedule seed");
  gen->callback([&] { rc = cmd_gen(ga); });

  ReportArgs pa;
  auto* report = app.add_subcommand("report", "run the benchmark suite and tabulate");
  report->add_option("--fixpoint", pa.opt.fixpoint_rounds, "max reduction passes")
      ->check(CLI::PositiveNumber);
  report->add_flag("--oracle", pa.oracle, "exhaustive minimum where small enough");
  report->add_option("--oracle-limit", pa.opt.oracle_limit,
                     "statement cap for the exhaustive search");
  report->add_flag("--s-first-stmt", pa.opt.reduce_options.swap_condition_first_stmt,
                   "variant swap condition: first statement's thread");
  report->add_option("--format", pa.format, "text or json")
      ->check(CLI::IsMember({"text", "json"}));
  report->callback([&] { rc = cmd_report(pa); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const bintrc::Fault& f) {
    std::cerr << "error: " << f.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return rc;
}
