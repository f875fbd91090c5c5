#pragma once

// Document format, before/after report, and the simplification pipeline.
// The format is line-oriented and hand-editable:
//
//   trcdoc 1
//   digest cbf29ce484222325
//   program:
//   thread 1:
//   localize x a
//   require
//   thread 2:
//   set1 d
//   trace:
//   t1#1 t2#1 t1#2
//   annotations:        (optional, one s1,s2,t1,t2 line per entry)
//   derivation:         (optional, two-space indent per tree level)
//
// The digest covers the program section body, pinning a trace to the program
// it was recorded from.

#include "bintrc/connectivity.hpp"
#include "bintrc/reduce.hpp"
#include "bintrc/semantics.hpp"

#include <charconv>
#include <chrono>
#include <cstdint>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace bintrc {

struct TraceDocument {
  int version = 1;
  Program program;
  Trace trace;
  std::optional<std::vector<Annotation>> annotations;
  std::optional<std::vector<DerivationNode>> derivation;

  friend bool operator==(const TraceDocument&, const TraceDocument&) = default;
};

namespace detail {

inline void write_statement_line(std::string& out, const Statement& s) {
  out += kind_name(s.kind);
  if (takes_local(s.kind)) {
    out += ' ';
    out += s.local;
  }
  if (takes_operands(s.kind)) {
    out += ' ';
    out += s.global;
  }
  out += '\n';
}

inline std::string program_section_body(const Program& p) {
  std::string out;
  for (int t = 1; t <= thread_count(p); ++t) {
    out += "thread " + std::to_string(t) + ":\n";
    for (const Statement& s : p.threads[t - 1].statements) write_statement_line(out, s);
  }
  return out;
}

inline void write_derivation_node(std::string& out, const DerivationNode& n, int depth) {
  out.append(static_cast<size_t>(2) * depth, ' ');
  out += rule_name(n.rule);
  out += ' ';
  out += std::to_string(n.lo) + ".." + std::to_string(n.hi);
  out += " witness=" + std::to_string(n.witness_t2) + "," + std::to_string(n.witness_t1);
  out += '\n';
  for (const DerivationNode& c : n.children) write_derivation_node(out, c, depth + 1);
}

} // namespace detail

// FNV-1a over the canonical program section body.
inline std::string program_digest(const Program& p) {
  const std::string body = detail::program_section_body(p);
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : body) {
    h ^= c;
    h *= 1099511628211ull;
  }
  const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = digits[h & 0xf];
    h >>= 4;
  }
  return out;
}

inline std::string serialize(const TraceDocument& doc) {
  std::string out = "trcdoc " + std::to_string(doc.version) + "\n";
  out += "digest " + program_digest(doc.program) + "\n";
  out += "program:\n";
  out += detail::program_section_body(doc.program);
  out += "trace:\n";
  const int n = doc.trace.length();
  for (int u = 1; u <= n; ++u) {
    const StatementRef r = doc.trace.order[u - 1];
    out += "t" + std::to_string(r.thread) + "#" + std::to_string(r.index);
    out += (u % 16 == 0 || u == n) ? '\n' : ' ';
  }
  if (doc.annotations) {
    out += "annotations:\n";
    for (const Annotation& a : *doc.annotations)
      out += std::to_string(a.s1) + "," + std::to_string(a.s2) + "," +
             std::to_string(a.t1) + "," + std::to_string(a.t2) + "\n";
  }
  if (doc.derivation) {
    out += "derivation:\n";
    for (const DerivationNode& r : *doc.derivation) detail::write_derivation_node(out, r, 0);
  }
  return out;
}

namespace detail {

struct LineReader {
  std::vector<std::string> lines;
  int pos = 0;

  static LineReader split(const std::string& text) {
    LineReader r;
    std::string cur;
    for (char c : text) {
      if (c == '\n') {
        r.lines.push_back(cur);
        cur.clear();
      } else {
        cur += c;
      }
    }
    if (!cur.empty()) r.lines.push_back(cur);
    return r;
  }

  bool done() const { return pos >= static_cast<int>(lines.size()); }
  const std::string& peek() const { return lines[pos]; }
  int lineno() const { return pos + 1; }
  std::string take() { return lines[pos++]; }
};

[[noreturn]] inline void syntax_fault(int line, int col, const std::string& expected) {
  throw Fault(FaultKind::SyntaxError,
              "line " + std::to_string(line) + ": expected " + expected, line, col);
}

inline std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ' ' || c == '\t') {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

inline bool parse_int(const std::string& tok, int& out) {
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  auto [end, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && end == last;
}

inline bool valid_identifier(const std::string& s) {
  auto alpha = [](char c) {
    return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_';
  };
  if (s.empty() || !alpha(s[0])) return false;
  for (size_t i = 1; i < s.size(); ++i)
    if (!alpha(s[i]) && !(s[i] >= '0' && s[i] <= '9')) return false;
  return true;
}

inline Statement parse_statement_line(const std::vector<std::string>& toks, int lineno) {
  StatementKind kind{};
  bool known = false;
  for (int k = 0; k < statement_kind_count; ++k)
    if (toks[0] == kind_name(static_cast<StatementKind>(k))) {
      kind = static_cast<StatementKind>(k);
      known = true;
      break;
    }
  if (!known) syntax_fault(lineno, 1, "statement kind");
  const size_t want = takes_local(kind) ? 3 : takes_operands(kind) ? 2 : 1;
  if (toks.size() != want)
    syntax_fault(lineno, 1, std::string(kind_name(kind)) + " with " +
                                std::to_string(want - 1) + " operand(s)");
  for (size_t i = 1; i < toks.size(); ++i) {
    if (!valid_identifier(toks[i]))
      syntax_fault(lineno, static_cast<int>(i) + 1, "identifier operand");
    if (toks[i] == "tc")
      throw Fault(FaultKind::SemanticError, "'tc' is a reserved name", lineno,
                  static_cast<int>(i) + 1);
  }
  Statement s;
  s.kind = kind;
  if (takes_local(kind)) s.local = toks[1];
  if (takes_operands(kind)) s.global = toks.back();
  return s;
}

inline StatementRef parse_trace_token(const std::string& tok, int lineno, int col) {
  const auto hash = tok.find('#');
  StatementRef ref;
  if (tok.size() < 4 || tok[0] != 't' || hash == std::string::npos || hash < 2 ||
      hash + 1 >= tok.size() || !parse_int(tok.substr(1, hash - 1), ref.thread) ||
      !parse_int(tok.substr(hash + 1), ref.index) || ref.thread < 1 || ref.index < 1)
    syntax_fault(lineno, col, "trace token 't<i>#<j>'");
  return ref;
}

inline std::vector<int> parse_csv_ints(const std::string& line, size_t count, int lineno,
                                       const std::string& what) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  parts.push_back(cur);
  std::vector<int> out;
  if (parts.size() != count) syntax_fault(lineno, 1, what);
  for (const std::string& part : parts) {
    int v = 0;
    if (!parse_int(part, v)) syntax_fault(lineno, 1, what);
    out.push_back(v);
  }
  return out;
}

struct DerivationLine {
  int depth = 0;
  DerivationNode node; // children left empty here
  int lineno = 0;
};

inline DerivationLine parse_derivation_line(const std::string& line, int lineno) {
  size_t indent = 0;
  while (indent < line.size() && line[indent] == ' ') ++indent;
  if (indent % 2 != 0) syntax_fault(lineno, 1, "two-space indentation");
  DerivationLine out;
  out.depth = static_cast<int>(indent / 2);
  out.lineno = lineno;
  const auto toks = split_ws(line.substr(indent));
  if (toks.size() != 3) syntax_fault(lineno, 1, "'<rule> <lo>..<hi> witness=<t2>,<t1>'");
  const auto rule = parse_rule_name(toks[0]);
  if (!rule) syntax_fault(lineno, 1, "rule name");
  out.node.rule = *rule;
  const auto dots = toks[1].find("..");
  if (dots == std::string::npos || !parse_int(toks[1].substr(0, dots), out.node.lo) ||
      !parse_int(toks[1].substr(dots + 2), out.node.hi))
    syntax_fault(lineno, 1, "range '<lo>..<hi>'");
  if (toks[2].rfind("witness=", 0) != 0) syntax_fault(lineno, 1, "'witness=<t2>,<t1>'");
  const auto w = parse_csv_ints(toks[2].substr(8), 2, lineno, "'witness=<t2>,<t1>'");
  out.node.witness_t2 = w[0];
  out.node.witness_t1 = w[1];
  return out;
}

inline std::vector<DerivationNode> build_derivation(const std::vector<DerivationLine>& lines,
                                                    size_t& at, int depth) {
  std::vector<DerivationNode> out;
  while (at < lines.size() && lines[at].depth == depth) {
    DerivationNode node = lines[at].node;
    ++at;
    node.children = build_derivation(lines, at, depth + 1);
    out.push_back(std::move(node));
  }
  if (at < lines.size() && lines[at].depth > depth)
    syntax_fault(lines[at].lineno, 1, "indentation matching a parent rule");
  return out;
}

} // namespace detail

inline TraceDocument parse_document(const std::string& text) {
  detail::LineReader in = detail::LineReader::split(text);
  TraceDocument doc;
  if (in.done()) detail::syntax_fault(1, 1, "'trcdoc <version>'");
  {
    const auto toks = detail::split_ws(in.peek());
    int v = 0;
    if (toks.size() != 2 || toks[0] != "trcdoc" || !detail::parse_int(toks[1], v))
      detail::syntax_fault(in.lineno(), 1, "'trcdoc <version>'");
    if (v != 1)
      throw Fault(FaultKind::VersionUnsupported, "document version " + toks[1], v, 1);
    doc.version = v;
    in.take();
  }
  std::string declared_digest;
  {
    if (in.done()) detail::syntax_fault(in.lineno(), 1, "'digest <16 hex digits>'");
    const auto toks = detail::split_ws(in.peek());
    auto hex = [](const std::string& s) {
      if (s.size() != 16) return false;
      for (char c : s)
        if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) return false;
      return true;
    };
    if (toks.size() != 2 || toks[0] != "digest" || !hex(toks[1]))
      detail::syntax_fault(in.lineno(), 1, "'digest <16 hex digits>'");
    declared_digest = toks[1];
    in.take();
  }
  if (in.done() || in.peek() != "program:")
    detail::syntax_fault(in.lineno(), 1, "'program:'");
  in.take();
  std::vector<std::vector<Statement>> threads;
  while (!in.done() && in.peek() != "trace:") {
    const std::string& line = in.peek();
    const auto toks = detail::split_ws(line);
    if (toks.empty()) detail::syntax_fault(in.lineno(), 1, "statement or 'trace:'");
    if (toks[0] == "thread") {
      int t = 0;
      if (toks.size() != 2 || toks[1].size() < 2 || toks[1].back() != ':' ||
          !detail::parse_int(toks[1].substr(0, toks[1].size() - 1), t))
        detail::syntax_fault(in.lineno(), 1, "'thread <i>:'");
      if (t != static_cast<int>(threads.size()) + 1)
        throw Fault(FaultKind::SemanticError, "thread headers must count up from 1",
                    in.lineno(), t);
      threads.emplace_back();
      in.take();
      continue;
    }
    if (!line.empty() && line.back() == ':')
      detail::syntax_fault(in.lineno(), 1, "'trace:'");
    if (threads.empty())
      detail::syntax_fault(in.lineno(), 1, "'thread 1:' before any statement");
    threads.back().push_back(detail::parse_statement_line(toks, in.lineno()));
    in.take();
  }
  if (in.done()) detail::syntax_fault(in.lineno(), 1, "'trace:'");
  in.take();
  std::vector<StatementRef> order;
  while (!in.done() && in.peek() != "annotations:" && in.peek() != "derivation:") {
    const int lineno = in.lineno();
    const auto toks = detail::split_ws(in.take());
    if (toks.empty()) detail::syntax_fault(lineno, 1, "trace token 't<i>#<j>'");
    for (size_t i = 0; i < toks.size(); ++i)
      order.push_back(detail::parse_trace_token(toks[i], lineno, static_cast<int>(i) + 1));
  }
  std::optional<std::vector<Annotation>> annotations;
  if (!in.done() && in.peek() == "annotations:") {
    in.take();
    std::vector<Annotation> joins;
    while (!in.done() && in.peek() != "derivation:") {
      const int lineno = in.lineno();
      const auto v = detail::parse_csv_ints(in.take(), 4, lineno, "'s1,s2,t1,t2'");
      joins.push_back(Annotation{v[0], v[1], v[2], v[3]});
    }
    annotations = std::move(joins);
  }
  if (!in.done() && in.peek() == "derivation:") {
    in.take();
    std::vector<detail::DerivationLine> dlines;
    while (!in.done()) {
      const int lineno = in.lineno();
      dlines.push_back(detail::parse_derivation_line(in.take(), lineno));
    }
    size_t at = 0;
    doc.derivation = detail::build_derivation(dlines, at, 0);
  }
  if (!in.done()) detail::syntax_fault(in.lineno(), 1, "end of document");

  doc.program = make_program(std::move(threads));
  if (program_digest(doc.program) != declared_digest)
    throw Fault(FaultKind::SemanticError, "digest does not match the program section", 2,
                1);
  try {
    doc.trace = validate_faithful(doc.program, std::move(order));
  } catch (const Fault& f) {
    throw Fault(FaultKind::SemanticError, std::string("trace section: ") + f.what(),
                f.a(), f.b());
  }
  if (annotations) {
    const AnnotatedTrace computed = annotate(doc.program, doc.trace);
    if (*annotations != computed.joins)
      throw Fault(FaultKind::SemanticError,
                  "annotations disagree with the trace's connectivity", 0, 0);
    doc.annotations = std::move(annotations);
  }
  return doc;
}

struct Report {
  std::string name;
  int thread_count = 0;
  int cs_before = 0;
  int cs_after = 0;
  double reduction_percent = 0.0;
  double analysis_ms = 0.0;
  double transform_ms = 0.0;
  double semantics_before_ms = 0.0;
  double semantics_after_ms = 0.0;
  std::optional<int> oracle_min_cs;
  int swaps_rejected_by_guard = 0;
};

inline double reduction_percent_of(int before, int after) {
  return before > 0 ? 100.0 * (before - after) / before : 0.0;
}

struct PipelineOptions {
  int fixpoint_rounds = 1;
  bool with_oracle = false;
  int oracle_limit = 10;
  bool strict_vars = false;
  bool strict_lock_order = false;
  ReduceOptions reduce_options;
};

struct PipelineOutcome {
  Report report;
  ReductionResult reduction;
  TraceState state_before;
  TraceState state_after;
  std::optional<OracleResult> oracle;
  bool monotone_ok = false;   // switch count did not grow
  bool equivalent_ok = false; // final states match

  bool ok() const { return monotone_ok && equivalent_ok; }
};

// The six phases in order: switch count of the input, annotation, semantics
// of the input, reduction, switch count of the output, semantics of the
// output. The two checks gate the tool's exit code.
inline PipelineOutcome simplify_pipeline(const std::string& name, const Program& p,
                                         const Trace& tr, const PipelineOptions& opt = {}) {
  using clock = std::chrono::steady_clock;
  auto ms = [](clock::time_point a, clock::time_point b) {
    return std::chrono::duration<double, std::milli>(b - a).count();
  };
  PipelineOutcome out;
  out.report.name = name;
  out.report.thread_count = thread_count(p);
  out.report.cs_before = context_switch_count(tr);

  auto t0 = clock::now();
  const AnnotatedTrace annotated = annotate(p, tr);
  auto t1 = clock::now();
  out.report.analysis_ms = ms(t0, t1);

  SemanticsOptions sem;
  sem.strict_vars = opt.strict_vars;
  t0 = clock::now();
  out.state_before = run(p, tr, initial_state(), sem).state;
  t1 = clock::now();
  out.report.semantics_before_ms = ms(t0, t1);

  t0 = clock::now();
  out.reduction = opt.fixpoint_rounds == 1
                      ? reduce(p, annotated, opt.reduce_options)
                      : reduce_to_fixpoint(p, annotated, opt.fixpoint_rounds,
                                           opt.reduce_options);
  t1 = clock::now();
  out.report.transform_ms = ms(t0, t1);

  out.report.cs_after = out.reduction.cs_after;
  out.report.reduction_percent =
      reduction_percent_of(out.report.cs_before, out.report.cs_after);
  out.report.swaps_rejected_by_guard = out.reduction.swaps_rejected_by_guard;

  t0 = clock::now();
  out.state_after = run(p, out.reduction.after.trace, initial_state(), sem).state;
  t1 = clock::now();
  out.report.semantics_after_ms = ms(t0, t1);

  out.monotone_ok = out.report.cs_after <= out.report.cs_before;
  out.equivalent_ok =
      states_equivalent(out.state_before, out.state_after, opt.strict_lock_order);

  if (opt.with_oracle) {
    const int n = statement_count(p);
    if (n > opt.oracle_limit)
      throw Fault(FaultKind::OracleRefused,
                  "exhaustive search refused above the limit; raise --oracle-limit", n,
                  opt.oracle_limit);
    out.oracle = oracle_min_cs(p, tr, opt.oracle_limit);
    out.report.oracle_min_cs = out.oracle->min_cs;
  }
  return out;
}

// Fixed-width text table plus the arithmetic mean of the per-row reduction
// percentages.
inline std::string report_table(const std::vector<Report>& rows) {
  size_t name_w = 4;
  for (const Report& r : rows) name_w = std::max(name_w, r.name.size());
  std::ostringstream os;
  os << std::left << std::setw(static_cast<int>(name_w) + 2) << "name" << std::right
     << std::setw(8) << "threads" << std::setw(10) << "cs_before" << std::setw(9)
     << "cs_after" << std::setw(11) << "reduction" << std::setw(12) << "analysis_ms"
     << std::setw(13) << "transform_ms" << std::setw(14) << "sem_before_ms"
     << std::setw(13) << "sem_after_ms" << std::setw(7) << "oracle" << std::setw(14)
     << "guard_rejects" << "\n";
  double percent_sum = 0.0;
  for (const Report& r : rows) {
    os << std::left << std::setw(static_cast<int>(name_w) + 2) << r.name << std::right
       << std::setw(8) << r.thread_count << std::setw(10) << r.cs_before << std::setw(9)
       << r.cs_after << std::setw(10) << std::fixed << std::setprecision(1)
       << r.reduction_percent << "%" << std::setw(12) << std::setprecision(2)
       << r.analysis_ms << std::setw(13) << r.transform_ms << std::setw(14)
       << r.semantics_before_ms << std::setw(13) << r.semantics_after_ms;
    if (r.oracle_min_cs)
      os << std::setw(7) << *r.oracle_min_cs;
    else
      os << std::setw(7) << "-";
    os << std::setw(14) << r.swaps_rejected_by_guard << "\n";
    percent_sum += r.reduction_percent;
  }
  if (!rows.empty())
    os << std::setprecision(1) << "average reduction: " << percent_sum / rows.size()
       << "% over " << rows.size() << " instance(s)\n";
  return os.str();
}

} // namespace bintrc
