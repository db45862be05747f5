// One line per acceptance criterion; exit status 1 if any fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#include "common.hpp"

using namespace loopchart;
using fixtures::transition_of;
using fixtures::vertex_of;

namespace {

struct Outcome {
  bool ok = true;
  std::string note;
  std::vector<std::string> problems;
  void fail(std::string why) {
    ok = false;
    if (problems.size() < 5) problems.push_back(std::move(why));
  }
  void expect(bool cond, const std::string& why) {
    if (!cond) fail(why);
  }
};

const std::vector<StarExpr>& corpus() {
  static const auto c = build_corpus();
  return c;
}

template <class Label>
std::size_t empty_steps(const BasicChart<Label>& c) {
  std::size_t k = 0;
  for (const auto& t : c.transitions()) k += is_empty_step(t.label);
  return k;
}

std::string counts(const std::string& name, std::size_t v, std::size_t t, std::size_t term) {
  std::ostringstream s;
  s << name << " " << v << "/" << t << "/" << term;
  return s.str();
}

Outcome ac1() {
  Outcome o;
  auto check = [&](const std::string& name, auto c, std::size_t v, std::size_t t, std::size_t term,
                   std::size_t ones) {
    std::string got = counts(name, c.vertex_count(), c.transitions().size(), c.terminating_count());
    o.expect(got == counts(name, v, t, term), got);
    o.expect(empty_steps(c) == ones, name + " has " + std::to_string(empty_steps(c)) + " empty steps");
  };
  check("C(g0)", chart_of(fixtures::g0()), 3, 5, 0, 0);
  check("C(e)", chart_of(fixtures::e()), 3, 6, 3, 0);
  check("C(f)", chart_of(fixtures::f()), 5, 15, 0, 0);
  check("C1(e)", onechart_of(fixtures::e()), 5, 9, 1, 4);
  check("C1(f)", onechart_of(fixtures::f()), 5, 9, 0, 3);
  o.note = "five fixture charts";
  return o;
}

Outcome ac2() {
  Outcome o;
  double worst = 0;
  auto verdict = [&](const std::string& name, const Chart& c, bool want) {
    auto t0 = std::chrono::steady_clock::now();
    bool got = decide_lee(c).holds;
    double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    worst = std::max(worst, s);
    o.expect(got == want, name + (want ? " should satisfy LEE" : " should not satisfy LEE"));
    o.expect(s < 1.0, name + " took " + std::to_string(s) + " s");
  };
  verdict("C(g0)", chart_of(fixtures::g0()), true);
  verdict("C(e)", chart_of(fixtures::e()), false);
  verdict("C(f)", chart_of(fixtures::f()), false);
  verdict("ne1", fixtures::ne1(), false);
  verdict("ne2", fixtures::ne2(), false);
  char buf[64];
  std::snprintf(buf, sizeof buf, "slowest verdict %.3f s", worst);
  o.note = buf;
  return o;
}

std::vector<ChartLabeling> recorded_runs() {
  auto c = chart_of(fixtures::g0());
  auto g0 = *vertex_of(c, fixtures::g0_text), g1 = *vertex_of(c, "(1." + fixtures::g_text + ").0"),
       g2 = *vertex_of(c, "((1.(b + b.a))." + fixtures::g_text + ").0");
  auto cc = *transition_of(c, g1, "c", g0), b1 = *transition_of(c, g2, "b", g1), b0 = *transition_of(c, g2, "b", g0),
       a12 = *transition_of(c, g1, "a", g2);
  return {recording_labeling(c, {{g1, {cc}}, {g2, {b1}}, {g2, {b0}}}),
          recording_labeling(c, {{g1, {a12}}, {g1, {cc}}}), recording_labeling(c, {{g1, {a12, cc}}})};
}

Outcome ac3() {
  Outcome o;
  auto runs = recorded_runs();
  const std::vector<std::vector<unsigned>> want_levels{{1, 2, 3}, {1, 2}, {1, 1}};
  for (std::size_t k = 0; k < runs.size(); ++k) {
    std::vector<unsigned> lv;
    for (auto m : runs[k].marking)
      if (m.is_entry()) lv.push_back(m.level());
    std::sort(lv.begin(), lv.end());
    o.expect(lv == want_levels[k], "run " + std::to_string(k + 1) + " has unexpected entry levels");
    o.expect(validate_llee(runs[k]).valid(), "run " + std::to_string(k + 1) + " rejected by validate_llee");
    o.expect(validate_llee_alt(runs[k]).valid(), "run " + std::to_string(k + 1) + " rejected by validate_llee_alt");
  }
  o.note = "three recorded runs";
  return o;
}

Outcome ac4() {
  Outcome o;
  std::size_t n = 0;
  for (const auto& x : corpus()) {
    auto r = verify_p2(x);
    bool w = false, a = false;
    try {
      auto l = labeled_onechart_of(x);
      w = validate_llee(l).valid();
      a = validate_llee_alt(l).valid();
    } catch (const AmbiguousMarking& e) {
      o.fail(render(x) + ": " + e.what());
      continue;
    }
    o.expect(w == a, render(x) + ": validators disagree");
    o.expect(r.passed, render(x) + ": " + r.failure.value_or("?"));
    n += r.passed;
  }
  o.note = std::to_string(n) + "/" + std::to_string(corpus().size()) + " pass";
  return o;
}

Outcome ac5() {
  Outcome o;
  std::size_t n = 0;
  for (const auto& x : corpus()) {
    auto r = verify_p1(x);
    o.expect(r.passed, render(x) + ": " + r.failure.value_or("?"));
    n += r.passed;
  }
  auto r = bisimilar(reachable(induced_of(onechart_of(fixtures::e()))), chart_of(fixtures::e()));
  o.expect(r.has_value(), "induced chart of C1(e) not bisimilar to C(e)");
  o.note = std::to_string(n) + "/" + std::to_string(corpus().size()) + " pass";
  return o;
}

Outcome ac6() {
  Outcome o;
  std::vector<Chart> charts;
  for (const auto& x : corpus()) {
    auto c = chart_of(x);
    if (c.vertex_count() <= 40) charts.push_back(std::move(c));
  }
  auto agree = [&](const Chart& x, const Chart& y) {
    auto oracle = naive_bisim_oracle(x, y, 80);
    bool start = std::find(oracle.begin(), oracle.end(), std::make_pair(x.start(), y.start())) != oracle.end();
    return bisimilar(x, y).has_value() == start;
  };
  std::size_t pairs = 0, bisim = 0;
  for (const auto& c : charts) {
    o.expect(agree(c, c), "self pair disagrees");
    ++pairs;
  }
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<std::size_t> pick(0, charts.size() - 1);
  // half uniformly, half between charts of equal size so bisimilar pairs show up
  for (int k = 0; k < 200; ++k) {
    const Chart& x = charts[pick(rng)];
    const Chart* y = &charts[pick(rng)];
    if (k % 2)
      for (int tries = 0; tries < 200 && y->vertex_count() != x.vertex_count(); ++tries) y = &charts[pick(rng)];
    o.expect(agree(x, *y), "sampled pair disagrees");
    bisim += bisimilar(x, *y).has_value();
    ++pairs;
  }
  o.note = std::to_string(pairs) + " pairs over " + std::to_string(charts.size()) + " charts, " +
           std::to_string(bisim) + " sampled pairs bisimilar";
  return o;
}

Outcome ac7() {
  Outcome o;
  auto q = collapse(chart_of(fixtures::e()));
  o.expect(q.chart.vertex_count() == 1, "collapse of C(e) has " + std::to_string(q.chart.vertex_count()) + " vertices");
  o.expect(q.chart.vertex_count() == 1 && q.chart.terminating(0), "collapsed vertex not terminating");
  o.expect(q.chart.transitions().size() == 2 && transition_of(q.chart, 0, "a", 0) && transition_of(q.chart, 0, "b", 0),
           "expected self-loops a and b");
  std::vector<std::pair<std::string, Chart>> same{{"C(g0)", chart_of(fixtures::g0())},
                                                  {"C(f)", chart_of(fixtures::f())},
                                                  {"ne1", fixtures::ne1()},
                                                  {"ne2", fixtures::ne2()}};
  for (const auto& [name, c] : same) {
    auto k = collapse(c);
    bool iso = k.chart.vertex_count() == c.vertex_count() && k.chart.transitions().size() == c.transitions().size();
    std::vector<char> hit(k.chart.vertex_count(), 0);
    for (const auto& m : k.map) {
      if (!m || hit[*m]) iso = false;
      else hit[*m] = 1;
    }
    iso = iso && check_functional_bisim(c, k.chart, k.map).ok();
    o.expect(iso, name + " is not its own collapse");
  }
  o.note = "C(e) to one vertex; four fixtures unchanged";
  return o;
}

bool body_cycle(const OneChartLabeling& l) {
  const auto& c = l.base;
  std::vector<std::size_t> indeg(c.vertex_count(), 0);
  for (std::size_t t = 0; t < c.transitions().size(); ++t)
    if (l.marking[t].is_body()) ++indeg[c.transition(t).to];
  std::vector<VertexId> ready;
  for (VertexId v = 0; v < c.vertex_count(); ++v)
    if (!indeg[v]) ready.push_back(v);
  std::size_t done = 0;
  while (!ready.empty()) {
    VertexId v = ready.back();
    ready.pop_back();
    ++done;
    for (std::size_t t : c.out(v))
      if (l.marking[t].is_body() && --indeg[c.transition(t).to] == 0) ready.push_back(c.transition(t).to);
  }
  return done != c.vertex_count();
}

Outcome ac8() {
  Outcome o;
  std::size_t steps = 0, entries = 0;
  for (const auto& x : corpus()) {
    auto g = generate_labeled_onechart(x);
    std::vector<Normedness> norm;
    for (const auto& s : g.states) norm.push_back(fixtures::naive_normedness(s));
    for (std::size_t t = 0; t < g.chart.transitions().size(); ++t) {
      const auto& tr = g.chart.transition(t);
      const auto& src = g.states[tr.from];
      const auto& dst = g.states[tr.to];
      Marking m = g.markings[t];
      ++steps;
      if (tr.label.is_empty()) o.expect(m.is_body(), "(a) " + render(src) + ": empty step marked entry");
      if (m.is_entry()) {
        ++entries;
        if (auto why = fixtures::entry_shape_violation(src, tr.label, dst, m.level())) o.fail("(b) " + *why);
      }
      o.expect(star_height(dst) <= star_height(src), "(d) " + render(src) + " -> " + render(dst));
    }
    o.expect(!body_cycle(Labeling<StepLabel>(g.chart, g.markings)), "(c) body cycle in " + render(x));
    for (VertexId v = 0; v < g.states.size(); ++v) {
      bool to_normed = false;
      for (std::size_t t : g.chart.out(v)) to_normed |= norm[g.chart.transition(t).to].normed;
      o.expect(norm[v].normed_plus == to_normed, "(e) " + render(g.states[v]));
      o.expect(normedness(g.states[v]) == norm[v], "normedness mismatch at " + render(g.states[v]));
    }
  }
  o.note = std::to_string(steps) + " transitions, " + std::to_string(entries) + " entries";
  return o;
}

Outcome ac9() {
  Outcome o;
  std::size_t n = 0;
  for (const auto& x : corpus()) {
    o.expect(parse_star_expr(render(x)) == x, "parse/render " + render(x));
    auto c = chart_of(x);
    o.expect(from_json<Chart>(to_json(c)) == c, "chart JSON " + render(x));
    auto l = labeled_onechart_of(x);
    auto back = labeling_from_json<StepLabel>(to_json(l));
    o.expect(back == l && to_json(back) == to_json(l), "labeled 1-chart JSON " + render(x));
    for (VertexId v = 0; v < l.base.vertex_count(); ++v) {
      auto s = parse_stacked_expr(*l.base.annotation(v));
      o.expect(render(s) == *l.base.annotation(v), "stacked parse/render " + *l.base.annotation(v));
    }
    ++n;
  }
  for (const auto& c : {fixtures::ne1(), fixtures::ne2()}) {
    o.expect(from_json<Chart>(to_json(c)) == c, "fixture JSON");
    o.expect(to_json(from_json<Chart>(to_json(c))) == to_json(c), "fixture JSON bytes");
  }
  for (const auto& r : recorded_runs()) o.expect(labeling_from_json<Action>(to_json(r)) == r, "recording JSON");
  o.note = std::to_string(n) + " expressions plus fixtures";
  return o;
}

Outcome ac10() {
  Outcome o;
  std::size_t accepted = 0;
  auto consider = [&](const auto& l, const std::string& name) {
    if (!validate_llee(l).valid()) return;
    ++accepted;
    o.expect(decide_lee(strip(l)).holds, name + ": witness accepted but LEE fails");
  };
  for (const auto& r : recorded_runs()) consider(r, "recorded run");
  for (const auto& x : corpus()) consider(labeled_onechart_of(x), render(x));
  auto ne = fixtures::ne1();
  consider(ChartLabeling(ne, std::vector<Marking>(ne.transitions().size(), Marking::body())), "ne1 all body");
  o.note = std::to_string(accepted) + " accepted labelings";
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"fixture exactness", ac1},     {"LEE verdicts", ac2},          {"witness fixtures", ac3},
      {"P2 on corpus", ac4},          {"P1 on corpus", ac5},          {"oracle agreement", ac6},
      {"collapse", ac7},              {"structural laws", ac8},       {"round trips", ac9},
      {"witness implies LEE", ac10}};
  std::cout << "corpus: " << corpus().size() << " expressions\n";
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    auto t0 = std::chrono::steady_clock::now();
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.fail(std::string("exception: ") + e.what());
    }
    double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2fs", s);
    std::cout << (o.ok ? "[PASS] " : "[FAIL] ") << "AC" << i + 1 << " " << criteria[i].first << ": " << o.note << " ("
              << buf << ")\n";
    for (const auto& p : o.problems) std::cout << "         " << p << "\n";
    failed += !o.ok;
  }
  std::cout << (failed ? std::to_string(failed) + " criteria failed\n" : "all criteria pass\n");
  return failed ? 1 : 0;
}
