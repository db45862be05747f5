#pragma once

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "bisim.hpp"
#include "chart.hpp"
#include "lee.hpp"
#include "semantics.hpp"
#include "serialize.hpp"
#include "syntax.hpp"
#include "verify.hpp"

namespace loopchart {

template <class Label>
ojson trace_json(const BasicChart<Label>& c, const EliminationTrace& trace) {
  ojson steps = ojson::array();
  for (const auto& s : trace) {
    ojson js;
    js["vertex"] = s.vertex;
    js["entry_set"] = ojson::array();
    for (std::size_t t : s.entry_set) js["entry_set"].push_back(detail::transition_json<Label>(c.transition(t)));
    steps.push_back(std::move(js));
  }
  return steps;
}

/// Resolves (from, label, to) triples back to transition indices of `c`.
template <class Label>
EliminationTrace trace_from_json(const BasicChart<Label>& c, const ojson& j) {
  using detail::member;
  using detail::schema_fail;
  if (!j.is_array()) schema_fail("", "expected an array of steps");
  EliminationTrace trace;
  for (std::size_t k = 0; k < j.size(); ++k) {
    std::string p = "/" + std::to_string(k);
    EliminationStep step{static_cast<VertexId>(detail::as_index(member(j[k], p, "vertex"), p + "/vertex")), {}};
    const auto& es = member(j[k], p, "entry_set");
    if (!es.is_array()) schema_fail(p + "/entry_set", "expected an array");
    for (std::size_t i = 0; i < es.size(); ++i) {
      std::string q = p + "/entry_set/" + std::to_string(i);
      auto from = detail::as_index(member(es[i], q, "from"), q + "/from");
      auto to = detail::as_index(member(es[i], q, "to"), q + "/to");
      const auto& label = member(es[i], q, "label");
      std::optional<std::size_t> found;
      for (std::size_t t = 0; t < c.transitions().size(); ++t) {
        const auto& tr = c.transition(t);
        if (tr.from == from && tr.to == to && label == label_text(tr.label)) found = t;
      }
      if (!found) schema_fail(q, "no such transition");
      step.entry_set.push_back(*found);
    }
    trace.push_back(std::move(step));
  }
  return trace;
}

inline ojson to_json_value(const WitnessReport& r) {
  ojson j;
  j["valid"] = r.valid();
  j["violations"] = ojson::array();
  for (const auto& v : r.violations) {
    ojson jv;
    jv["condition"] = to_string(v.condition);
    jv["vertex"] = v.vertex ? ojson(*v.vertex) : ojson(nullptr);
    jv["level"] = v.level;
    jv["detail"] = v.detail;
    j["violations"].push_back(std::move(jv));
  }
  return j;
}

namespace cli {

enum class Format { text, json, dot };

inline constexpr int exit_ok = 0;
inline constexpr int exit_fails = 1;
inline constexpr int exit_usage = 2;

/// Thrown for requests that are well-formed but unsupported (e.g. DOT for a report).
class UsageError : public Error {
 public:
  using Error::Error;
};

inline bool is_file(const std::string& arg) {
  std::error_code ec;
  return std::filesystem::is_regular_file(arg, ec);
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

/// A chart from a JSON file, or the chart interpretation of an expression.
inline Chart load_chart(const std::string& arg) {
  if (is_file(arg)) return from_json<Chart>(read_file(arg));
  return chart_of(parse_star_expr(arg));
}

inline OneChart load_onechart(const std::string& arg) {
  if (is_file(arg)) return from_json<OneChart>(read_file(arg));
  return onechart_of(parse_star_expr(arg));
}

class Runner {
 public:
  Runner(std::ostream& out, std::ostream& err) : out_(out), err_(err) {}

  int run(std::vector<std::string> args) {
    CLI::App app{"Process semantics of star expressions, LEE and LLEE-witness checks", "loopchart"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string format = "text";
    app.add_option("--format", format, "Output format")->check(CLI::IsMember({"text", "json", "dot"}));

    std::string a, b, property = "all", alphabet = "a,b";
    bool labeled = false, reach = false, use_onechart = false;
    std::size_t max_size = 6, random_count = 500, random_min = 7, random_max = 12;
    std::uint64_t seed = 1;

    auto* chart = app.add_subcommand("chart", "Chart interpretation of EXPR");
    chart->add_option("EXPR", a)->required();
    auto* onechart = app.add_subcommand("onechart", "1-chart interpretation of EXPR");
    onechart->add_option("EXPR", a)->required();
    onechart->add_flag("--labeled", labeled, "Attach entry/body markings");
    auto* induced = app.add_subcommand("induced", "Induced chart of the 1-chart interpretation");
    induced->add_option("EXPR", a)->required();
    induced->add_flag("--reachable", reach, "Drop vertices unreachable from the start");
    auto* coll = app.add_subcommand("collapse", "Bisimulation collapse");
    coll->add_option("INPUT", a, "Expression or chart JSON file")->required();
    auto* lee = app.add_subcommand("lee", "Decide loop existence and elimination");
    lee->add_option("INPUT", a, "Expression or chart JSON file")->required();
    lee->add_flag("--onechart", use_onechart, "Analyse the 1-chart interpretation (or a 1-chart file)");
    auto* llee = app.add_subcommand("llee-check", "Validate an entry/body labeling");
    llee->add_option("FILE", a, "Labeled chart JSON")->required();
    auto* bis = app.add_subcommand("bisim", "Decide bisimilarity of two charts");
    bis->add_option("A", a)->required();
    bis->add_option("B", b)->required();
    auto* ver = app.add_subcommand("verify", "Check P1 (functional bisimulation) and P2 (LLEE-witness)");
    ver->add_option("EXPR", a)->required();
    ver->add_option("--property", property)->check(CLI::IsMember({"p1", "p2", "all"}));
    auto* corp = app.add_subcommand("corpus", "Verify properties over enumerated and sampled expressions");
    corp->add_option("--alphabet", alphabet, "Comma-separated actions");
    corp->add_option("--max-size", max_size, "Exhaustive part: all terms up to this size");
    corp->add_option("--property", property)->check(CLI::IsMember({"p1", "p2", "all"}));
    corp->add_option("--random", random_count, "Number of sampled terms");
    corp->add_option("--random-min-size", random_min);
    corp->add_option("--random-max-size", random_max);
    corp->add_option("--seed", seed);

    std::vector<std::string> argv = std::move(args);
    std::reverse(argv.begin(), argv.end());
    try {
      app.parse(argv);
    } catch (const CLI::ParseError& e) {
      int code = app.exit(e, out_, err_);
      return code == 0 ? exit_ok : exit_usage;
    }
    fmt_ = format == "json" ? Format::json : format == "dot" ? Format::dot : Format::text;

    try {
      if (*chart) return emit_chart(chart_of(parse_star_expr(a)));
      if (*onechart) {
        if (labeled) return emit_chart(labeled_onechart_of(parse_star_expr(a)));
        return emit_chart(onechart_of(parse_star_expr(a)));
      }
      if (*induced) {
        auto c = induced_of(onechart_of(parse_star_expr(a)));
        return emit_chart(reach ? reachable(c) : c);
      }
      if (*coll) return do_collapse(load_chart(a));
      if (*lee) return use_onechart ? do_lee(load_onechart(a)) : do_lee(load_chart(a));
      if (*llee) return do_llee(labeling_from_json<StepLabel>(read_file(a)));
      if (*bis) return do_bisim(load_chart(a), load_chart(b));
      if (*ver) return do_verify({parse_star_expr(a)}, property, true);
      if (*corp) {
        CorpusOptions o;
        o.alphabet.clear();
        std::stringstream ss(alphabet);
        for (std::string tok; std::getline(ss, tok, ',');)
          if (!tok.empty()) o.alphabet.emplace_back(tok);
        if (o.alphabet.empty()) throw UsageError("empty alphabet");
        if (max_size < 1) throw UsageError("--max-size must be at least 1");
        if (random_count > 0 && (random_min < 1 || random_min > random_max))
          throw UsageError("need 1 <= --random-min-size <= --random-max-size");
        o.max_size = max_size;
        o.random_count = random_count;
        o.random_min_size = random_min;
        o.random_max_size = random_max;
        o.seed = seed;
        auto corpus = build_corpus(o);
        err_ << "corpus: " << corpus.size() << " expressions\n";
        return do_verify(corpus, property, false);
      }
    } catch (const ParseError& e) {
      err_ << "error: " << e.what() << "\n";
      return exit_usage;
    } catch (const SchemaError& e) {
      err_ << "error: schema: " << e.what() << "\n";
      return exit_usage;
    } catch (const UsageError& e) {
      err_ << "error: " << e.what() << "\n";
      return exit_usage;
    } catch (const std::invalid_argument& e) {
      err_ << "error: " << e.what() << "\n";
      return exit_usage;
    } catch (const Error& e) {
      err_ << "error: " << e.what() << "\n";
      return exit_usage;
    }
    return exit_usage;
  }

 private:
  template <class X>
  int emit_chart(const X& c) {
    switch (fmt_) {
      case Format::json: out_ << to_json(c) << "\n"; break;
      case Format::dot: out_ << to_dot(c); break;
      case Format::text: out_ << to_text(c); break;
    }
    return exit_ok;
  }

  void no_dot(const char* what) {
    if (fmt_ == Format::dot) throw UsageError(std::string("--format dot is not available for ") + what);
  }

  int do_collapse(const Chart& c) {
    auto [q, map] = collapse(c);
    if (fmt_ != Format::json) return emit_chart(q);
    std::vector<std::pair<VertexId, VertexId>> pairs;
    for (VertexId v = 0; v < map.size(); ++v)
      if (map[v]) pairs.emplace_back(v, *map[v]);
    ojson j = to_json_value(q);
    j["quotient"] = pairs_json(pairs);
    out_ << j.dump() << "\n";
    return exit_ok;
  }

  template <class Label>
  int do_lee(const BasicChart<Label>& c) {
    no_dot("lee");
    auto r = decide_lee(c, lee_budget_from_env());
    if (fmt_ == Format::json) {
      ojson j;
      j["holds"] = r.holds;
      j["nodes"] = r.nodes;
      j["trace"] = r.trace ? trace_json(c, *r.trace) : ojson(nullptr);
      if (r.trace) j["recording"] = to_json_value(recording_labeling(c, *r.trace));
      out_ << j.dump() << "\n";
    } else {
      out_ << "LEE: " << (r.holds ? "holds" : "fails") << "\n";
      if (r.trace)
        for (std::size_t k = 0; k < r.trace->size(); ++k) {
          const auto& s = (*r.trace)[k];
          out_ << "  step " << k + 1 << ": vertex " << s.vertex << ", entries";
          for (std::size_t t : s.entry_set) {
            const auto& tr = c.transition(t);
            out_ << " " << tr.from << "-" << label_text(tr.label) << "->" << tr.to;
          }
          out_ << "\n";
        }
    }
    return r.holds ? exit_ok : exit_fails;
  }

  int do_llee(const OneChartLabeling& l) {
    no_dot("llee-check");
    auto w = validate_llee(l);
    auto alt = validate_llee_alt(l);
    bool valid = w.valid() && alt.valid();
    if (fmt_ == Format::json) {
      ojson j;
      j["valid"] = valid;
      j["validate_llee"] = to_json_value(w);
      j["validate_llee_alt"] = to_json_value(alt);
      out_ << j.dump() << "\n";
    } else {
      out_ << "LLEE-witness: " << (valid ? "valid" : "invalid") << "\n";
      for (const auto* r : {&w, &alt})
        for (const auto& v : r->violations) out_ << "  " << to_string(v.condition) << ": " << v.detail << "\n";
      if (w.valid() != alt.valid()) out_ << "  validators disagree\n";
    }
    return valid ? exit_ok : exit_fails;
  }

  int do_bisim(const Chart& x, const Chart& y) {
    no_dot("bisim");
    auto r = bisimilar(x, y);
    if (fmt_ == Format::json) {
      ojson j;
      j["bisimilar"] = r.has_value();
      j["relation"] = r ? pairs_json(*r) : ojson(nullptr);
      out_ << j.dump() << "\n";
    } else {
      out_ << (r ? "bisimilar" : "not bisimilar") << "\n";
    }
    return r ? exit_ok : exit_fails;
  }

  int do_verify(const std::vector<StarExpr>& exprs, const std::string& property, bool single) {
    no_dot(single ? "verify" : "corpus");
    bool p1 = property != "p2", p2 = property != "p1";
    std::size_t pass1 = 0, pass2 = 0;
    std::vector<VerifyReport> shown;
    for (const auto& e : exprs) {
      for (int k = 0; k < 2; ++k) {
        if (k == 0 && !p1) continue;
        if (k == 1 && !p2) continue;
        auto rep = k == 0 ? verify_p1(e) : verify_p2(e);
        (k == 0 ? pass1 : pass2) += rep.passed;
        if (single || !rep.passed) shown.push_back(std::move(rep));
      }
    }
    bool ok = (!p1 || pass1 == exprs.size()) && (!p2 || pass2 == exprs.size());
    if (fmt_ == Format::json) {
      ojson reports = ojson::array();
      for (const auto& r : shown) reports.push_back(to_json_value(r));
      if (single) {
        out_ << reports.dump() << "\n";
      } else {
        ojson j;
        j["expressions"] = exprs.size();
        j["P1"] = p1 ? ojson(pass1) : ojson(nullptr);
        j["P2"] = p2 ? ojson(pass2) : ojson(nullptr);
        j["passed"] = ok;
        j["failures"] = std::move(reports);
        out_ << j.dump() << "\n";
      }
    } else {
      for (const auto& r : shown) {
        out_ << to_string(r.property) << " " << (r.passed ? "pass" : "FAIL") << "  " << r.expression;
        if (single) {
          out_ << "  (1-chart vertices " << r.statistics.onechart_vertices << ", 1-transitions "
               << r.statistics.one_transitions;
          if (r.statistics.entries) out_ << ", entries " << *r.statistics.entries;
          if (r.statistics.induced_vertices) out_ << ", induced vertices " << *r.statistics.induced_vertices;
          out_ << ")";
        }
        if (r.failure) out_ << "\n    " << *r.failure;
        out_ << "\n";
      }
      if (!single) {
        if (p1) out_ << "P1: " << pass1 << "/" << exprs.size() << " pass\n";
        if (p2) out_ << "P2: " << pass2 << "/" << exprs.size() << " pass\n";
      }
    }
    return ok ? exit_ok : exit_fails;
  }

  std::ostream& out_;
  std::ostream& err_;
  Format fmt_ = Format::text;
};

}  // namespace cli

/// Runs the command line (without the program name); returns the exit code.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
  return cli::Runner(out, err).run(args);
}

}  // namespace loopchart
