#include <gtest/gtest.h>

#include <json.hpp>

#include "common.hpp"

using namespace loopchart;
using fixtures::vertex_of;

namespace {

const std::string e_star = "(a*.b*)*";

Chart chart_of_a() {
  Chart c(2, 0);
  c.set_terminating(1);
  c.add_transition(0, Action("a"), 1);
  return c;
}

std::string schema_pointer(const std::string& text, bool labeled = false) {
  try {
    if (labeled)
      labeling_from_json<StepLabel>(text);
    else
      from_json<OneChart>(text);
  } catch (const SchemaError& e) {
    return e.pointer();
  }
  return "<accepted>";
}

}  // namespace

TEST(Chart, TransitionsAreASet) {
  Chart c(2, 0);
  EXPECT_EQ(c.add_transition(0, Action("a"), 1), 0u);
  EXPECT_EQ(c.add_transition(0, Action("b"), 1), 1u);
  EXPECT_EQ(c.add_transition(0, Action("a"), 1), 0u);
  EXPECT_EQ(c.transitions().size(), 2u);
  EXPECT_EQ(c.alphabet().size(), 2u);
  EXPECT_THROW(c.add_transition(0, Action("a"), 5), UnknownVertex);
}

TEST(Chart, EqualityIgnoresTransitionOrder) {
  Chart x(2, 0), y(2, 0);
  x.add_transition(0, Action("a"), 1);
  x.add_transition(1, Action("b"), 0);
  y.add_transition(1, Action("b"), 0);
  y.add_transition(0, Action("a"), 1);
  EXPECT_EQ(x, y);
  y.set_terminating(1);
  EXPECT_NE(x, y);
}

TEST(Induced, StarOfStars) {
  auto u = onechart_of(fixtures::e());
  auto c = induced_of(u);
  EXPECT_EQ(c.vertex_count(), 5u);
  EXPECT_EQ(c.terminating_count(), 5u);
  auto e = *vertex_of(c, e_star), E1p = *vertex_of(c, "1 @ a*.b* @ " + e_star),
       E2p = *vertex_of(c, "1 @ b* @ " + e_star), E1 = *vertex_of(c, "a*.b* @ " + e_star),
       E2 = *vertex_of(c, "b* @ " + e_star);
  Chart want(5, c.start());
  for (VertexId v = 0; v < 5; ++v) want.set_terminating(v), want.set_annotation(v, *c.annotation(v));
  for (VertexId v : {e, E1p, E2p, E1, E2}) {
    want.add_transition(v, Action("a"), E1p);
    want.add_transition(v, Action("b"), E2p);
  }
  EXPECT_EQ(c, want);
  // E1 and E2 are only entered by empty steps
  auto r = reachable(c);
  EXPECT_EQ(r.vertex_count(), 3u);
  EXPECT_FALSE(vertex_of(r, "a*.b* @ " + e_star));
  EXPECT_FALSE(vertex_of(r, "b* @ " + e_star));
}

TEST(Induced, NoEmptyStepsIsIdentity) {
  auto c = chart_of(fixtures::g0());
  EXPECT_EQ(induced_of(as_onechart(c)), c);
  auto twice = induced_of(as_onechart(induced_of(onechart_of(fixtures::f()))));
  EXPECT_EQ(twice, induced_of(onechart_of(fixtures::f())));
}

TEST(Induced, ThreeBranchesIsIsomorphicToPlainChart) {
  auto r = reachable(induced_of(onechart_of(fixtures::f())));
  auto c = chart_of(fixtures::f());
  EXPECT_EQ(r.vertex_count(), c.vertex_count());
  EXPECT_EQ(r.transitions().size(), c.transitions().size());
  EXPECT_EQ(r.terminating_count(), c.terminating_count());
  EXPECT_TRUE(bisimilar(r, c));
}

TEST(Induced, EmptyCycles) {
  OneChart u(3, 0);
  u.add_transition(0, StepLabel::empty(), 1);
  u.add_transition(1, StepLabel::empty(), 0);
  u.add_transition(1, StepLabel(Action("a")), 2);
  u.set_terminating(0);
  auto c = induced_of(u);
  EXPECT_TRUE(c.terminating(0));
  EXPECT_TRUE(c.terminating(1));
  EXPECT_FALSE(c.terminating(2));
  EXPECT_EQ(c.transitions().size(), 2u);
  EXPECT_TRUE(fixtures::transition_of(c, 0, "a", 2));
  EXPECT_TRUE(fixtures::transition_of(c, 1, "a", 2));
}

TEST(Reachable, DropsIsolatedVertex) {
  Chart c = chart_of_a();
  c.add_vertex(true);
  auto r = reachable(c);
  EXPECT_EQ(r, chart_of_a());
  EXPECT_EQ(reachable(r), r);
  auto g = chart_of(fixtures::g0());
  EXPECT_EQ(reachable(g), g);
}

TEST(Rooted, Examples) {
  auto g = chart_of(fixtures::g0());
  auto g1 = *vertex_of(g, "(1." + fixtures::g_text + ").0");
  EXPECT_EQ(rooted_subchart(g, g1).vertex_count(), 3u);
  EXPECT_EQ(rooted_subchart(g, g.start()), g);

  auto f = chart_of(fixtures::f());
  auto sink = *vertex_of(f, "((1.0).(" + fixtures::b0_text + ")*).0");
  auto s = rooted_subchart(f, sink);
  EXPECT_EQ(s.vertex_count(), 1u);
  EXPECT_TRUE(s.transitions().empty());
  EXPECT_THROW(rooted_subchart(f, 99), UnknownVertex);
}

TEST(InfinitePath, Examples) {
  EXPECT_TRUE(has_infinite_path(chart_of(fixtures::g0())));
  EXPECT_FALSE(has_infinite_path(chart_of_a()));
  Chart path(3, 0);
  path.add_transition(0, Action("a"), 1);
  path.add_transition(1, Action("a"), 2);
  EXPECT_FALSE(has_infinite_path(path));
  // unreachable cycle does not count
  Chart c = chart_of_a();
  auto v = c.add_vertex();
  c.add_transition(v, Action("a"), v);
  EXPECT_FALSE(has_infinite_path(c));
  c.add_transition(1, Action("b"), v);
  EXPECT_TRUE(has_infinite_path(c));
}

TEST(Json, SmallestChart) {
  EXPECT_EQ(to_json(chart_of_a()),
            R"({"alphabet":["a"],"start":0,"vertices":[{"id":0,"terminating":false},{"id":1,"terminating":true}],"transitions":[{"from":0,"label":"a","to":1}]})");
  EXPECT_EQ(from_json<Chart>(to_json(chart_of_a())), chart_of_a());
}

TEST(Json, EmptyStepAndMarking) {
  auto l = labeled_onechart_of(fixtures::e());
  auto j = nlohmann::json::parse(to_json(l));
  int empties = 0, entries = 0;
  for (const auto& t : j["transitions"]) {
    if (t.contains("kind")) {
      EXPECT_EQ(t["kind"], "empty");
      EXPECT_EQ(t["label"], "1");
      EXPECT_EQ(t["marking"], 0);
      ++empties;
    }
    if (t["marking"] != 0) ++entries;
  }
  EXPECT_EQ(empties, 4);
  EXPECT_EQ(entries, 4);
  auto back = labeling_from_json<StepLabel>(to_json(l));
  EXPECT_EQ(back, l);
  EXPECT_EQ(back.base, l.base);
  for (VertexId v = 0; v < back.base.vertex_count(); ++v) EXPECT_EQ(back.base.annotation(v), l.base.annotation(v));
}

TEST(Json, RoundTripsFixtures) {
  for (const auto& c : {fixtures::ne1(), fixtures::ne2(), chart_of(fixtures::g0()), chart_of(fixtures::f())}) {
    EXPECT_EQ(from_json<Chart>(to_json(c)), c);
    EXPECT_EQ(to_json(from_json<Chart>(to_json(c))), to_json(c));
  }
  auto u = onechart_of(fixtures::f());
  EXPECT_EQ(from_json<OneChart>(to_json(u)), u);
}

TEST(Json, SchemaErrors) {
  const std::string ok =
      R"({"alphabet":["a"],"start":0,"vertices":[{"id":0,"terminating":false},{"id":1,"terminating":true}],"transitions":[{"from":0,"label":"a","to":1}]})";
  EXPECT_EQ(schema_pointer(ok), "<accepted>");
  EXPECT_EQ(schema_pointer("{"), "/");
  EXPECT_EQ(schema_pointer("[]"), "/");
  EXPECT_EQ(schema_pointer(R"({"start":0,"vertices":[],"transitions":[]})"), "/");
  EXPECT_EQ(schema_pointer(R"({"alphabet":["a","1"],"start":0,"vertices":[{"id":0,"terminating":false}],"transitions":[]})"),
            "/alphabet/1");
  EXPECT_EQ(schema_pointer(R"({"alphabet":[],"start":3,"vertices":[{"id":0,"terminating":false}],"transitions":[]})"),
            "/start");
  EXPECT_EQ(schema_pointer(R"({"alphabet":[],"start":0,"vertices":[{"id":1,"terminating":false}],"transitions":[]})"),
            "/vertices/0/id");
  EXPECT_EQ(schema_pointer(R"({"alphabet":[],"start":0,"vertices":[{"id":0,"terminating":1}],"transitions":[]})"),
            "/vertices/0/terminating");
  EXPECT_EQ(
      schema_pointer(
          R"({"alphabet":["a"],"start":0,"vertices":[{"id":0,"terminating":false}],"transitions":[{"from":0,"label":"b","to":0}]})"),
      "/transitions/0/label");
  EXPECT_EQ(
      schema_pointer(
          R"({"alphabet":["a"],"start":0,"vertices":[{"id":0,"terminating":false}],"transitions":[{"from":0,"label":"a","to":2}]})"),
      "/transitions/0/to");
  EXPECT_EQ(
      schema_pointer(
          R"({"alphabet":["a"],"start":0,"vertices":[{"id":0,"terminating":false}],"transitions":[{"from":0,"label":"a","to":0},{"from":0,"label":"a","to":0}]})"),
      "/transitions/1");
  EXPECT_EQ(
      schema_pointer(
          R"({"alphabet":[],"start":0,"vertices":[{"id":0,"terminating":false}],"transitions":[{"from":0,"label":"a","kind":"empty","to":0}]})"),
      "/transitions/0/label");
  EXPECT_EQ(
      schema_pointer(
          R"({"alphabet":[],"start":0,"vertices":[{"id":0,"terminating":false}],"transitions":[{"from":0,"label":"1","kind":"empty","to":0}]})",
          true),
      "/transitions/0");
  // empty steps belong to 1-charts only
  EXPECT_THROW(
      from_json<Chart>(
          R"({"alphabet":[],"start":0,"vertices":[{"id":0,"terminating":false}],"transitions":[{"from":0,"label":"1","kind":"empty","to":0}]})"),
      SchemaError);
}

TEST(Dot, Conventions) {
  auto d = to_dot(chart_of_a());
  EXPECT_NE(d.find("__start [shape=point]"), std::string::npos);
  EXPECT_NE(d.find("__start -> v0"), std::string::npos);
  EXPECT_NE(d.find("v1 [label=\"1\", shape=doublecircle]"), std::string::npos);
  EXPECT_NE(d.find("v0 -> v1 [label=\"a\"]"), std::string::npos);
  EXPECT_EQ(to_dot(chart_of_a()), d);

  auto l = labeled_onechart_of(fixtures::e());
  auto ld = to_dot(l);
  EXPECT_NE(ld.find("label=\"a [2]\""), std::string::npos);
  EXPECT_NE(ld.find("label=\"b [2]\""), std::string::npos);
  EXPECT_NE(ld.find("label=\"1\", style=dotted"), std::string::npos);

  auto nd = to_dot(fixtures::ne1());
  std::size_t rings = 0;
  for (std::size_t p = nd.find("doublecircle"); p != std::string::npos; p = nd.find("doublecircle", p + 1)) ++rings;
  EXPECT_EQ(rings, 2u);
}

TEST(Text, ListsMarkings) {
  auto s = to_text(labeled_onechart_of(fixtures::e()));
  EXPECT_NE(s.find("[2]"), std::string::npos);
  EXPECT_NE(s.find("bo"), std::string::npos);
}
