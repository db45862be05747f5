#pragma once

#include <algorithm>
#include <cstddef>
#include <deque>
#include <string>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include "chart.hpp"
#include "errors.hpp"
#include "syntax.hpp"

namespace loopchart {

inline constexpr std::size_t default_vertex_cap = 100000;

template <class Label, class State>
struct Step {
  Label label;
  Marking marking;
  State target;
  friend bool operator==(const Step&, const Step&) = default;
};

/// A generated chart together with the expression behind each vertex.
template <class Label, class State>
struct Generated {
  BasicChart<Label> chart;
  std::vector<State> states;
  std::vector<Marking> markings;  // per transition
};

namespace detail {

template <class Label, class State, class Hash, class Steps, class Term>
Generated<Label, State> explore(const State& start, Steps&& steps, Term&& term, std::size_t cap) {
  Generated<Label, State> g{BasicChart<Label>(1, 0), {start}, {}};
  std::unordered_map<State, VertexId, Hash> index{{start, 0}};
  g.chart.set_terminating(0, term(start));
  g.chart.set_annotation(0, render(start));
  for (std::size_t i = 0; i < g.states.size(); ++i) {
    State cur = g.states[i];
    for (auto& s : steps(cur)) {
      auto [it, fresh] = index.try_emplace(s.target, static_cast<VertexId>(g.states.size()));
      if (fresh) {
        if (g.states.size() >= cap)
          throw StateExplosion("chart exceeds " + std::to_string(cap) + " vertices");
        VertexId v = g.chart.add_vertex(term(s.target));
        g.chart.set_annotation(v, render(s.target));
        g.states.push_back(s.target);
      }
      std::size_t t = g.chart.add_transition(static_cast<VertexId>(i), s.label, it->second);
      if (t == g.markings.size()) g.markings.push_back(s.marking);
    }
  }
  return g;
}

template <class S>
void sort_unique(std::vector<S>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

inline void star_steps_into(const StarExpr& e, std::vector<std::pair<Action, StarExpr>>& out) {
  using K = StarExpr::Kind;
  switch (e.kind()) {
    case K::zero:
    case K::one: return;
    case K::action: out.emplace_back(e.action(), StarExpr::one()); return;
    case K::sum:
      star_steps_into(e.left(), out);
      star_steps_into(e.right(), out);
      return;
    case K::product: {
      std::vector<std::pair<Action, StarExpr>> l;
      star_steps_into(e.left(), l);
      for (auto& [a, t] : l) out.emplace_back(std::move(a), StarExpr::product(t, e.right()));
      if (e.left().terminates()) star_steps_into(e.right(), out);
      return;
    }
    case K::star: {
      std::vector<std::pair<Action, StarExpr>> b;
      star_steps_into(e.body(), b);
      for (auto& [a, t] : b) out.emplace_back(std::move(a), StarExpr::product(t, e));
      return;
    }
  }
}

using StackedStep = std::pair<StepLabel, StackedExpr>;

inline void plain_stacked_steps_into(const StarExpr& e, std::vector<StackedStep>& out) {
  using K = StarExpr::Kind;
  switch (e.kind()) {
    case K::zero:
    case K::one: return;
    case K::action: out.emplace_back(StepLabel(e.action()), StackedExpr::plain(StarExpr::one())); return;
    case K::sum:
      plain_stacked_steps_into(e.left(), out);
      plain_stacked_steps_into(e.right(), out);
      return;
    case K::product: {
      std::vector<StackedStep> l;
      plain_stacked_steps_into(e.left(), l);
      for (auto& [a, t] : l) out.emplace_back(std::move(a), StackedExpr::product(t, e.right()));
      if (e.left().terminates()) plain_stacked_steps_into(e.right(), out);
      return;
    }
    case K::star: {
      std::vector<StackedStep> b;
      plain_stacked_steps_into(e.body(), b);
      for (auto& [a, t] : b) out.emplace_back(std::move(a), StackedExpr::stack(t, e));
      return;
    }
  }
}

inline void stacked_steps_into(const StackedExpr& e, std::vector<StackedStep>& out) {
  switch (e.kind()) {
    case StackedExpr::Kind::plain: plain_stacked_steps_into(e.expr(), out); return;
    case StackedExpr::Kind::product: {
      std::vector<StackedStep> h;
      stacked_steps_into(e.head(), h);
      for (auto& [a, t] : h) out.emplace_back(std::move(a), StackedExpr::product(t, e.tail()));
      return;
    }
    case StackedExpr::Kind::stack: {
      std::vector<StackedStep> h;
      stacked_steps_into(e.head(), h);
      for (auto& [a, t] : h) out.emplace_back(std::move(a), StackedExpr::stack(t, e.tail()));
      if (e.head().is_plain() && e.head().expr().terminates())
        out.emplace_back(StepLabel::empty(), StackedExpr::plain(e.tail()));
      return;
    }
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Plain semantics

inline bool terminates_star(const StarExpr& e) noexcept { return e.terminates(); }

/// Sorted, duplicate-free.
inline std::vector<std::pair<Action, StarExpr>> steps_star(const StarExpr& e) {
  std::vector<std::pair<Action, StarExpr>> out;
  detail::star_steps_into(e, out);
  detail::sort_unique(out);
  return out;
}

inline Generated<Action, StarExpr> generate_chart(const StarExpr& e,
                                                  std::size_t cap = default_vertex_cap) {
  return detail::explore<Action, StarExpr, StarExprHash>(
      e,
      [](const StarExpr& s) {
        std::vector<Step<Action, StarExpr>> r;
        for (auto& [a, t] : steps_star(s)) r.push_back({a, Marking::body(), t});
        return r;
      },
      [](const StarExpr& s) { return s.terminates(); }, cap);
}

inline Chart chart_of(const StarExpr& e, std::size_t cap = default_vertex_cap) {
  return generate_chart(e, cap).chart;
}

// ---------------------------------------------------------------------------
// Stacked semantics

/// Only plain expressions terminate.
inline bool terminates_stacked(const StackedExpr& e) noexcept {
  return e.is_plain() && e.expr().terminates();
}

inline std::vector<std::pair<StepLabel, StackedExpr>> steps_stacked(const StackedExpr& e) {
  std::vector<std::pair<StepLabel, StackedExpr>> out;
  detail::stacked_steps_into(e, out);
  detail::sort_unique(out);
  return out;
}

inline Generated<StepLabel, StackedExpr> generate_onechart(const StackedExpr& e,
                                                           std::size_t cap = default_vertex_cap) {
  return detail::explore<StepLabel, StackedExpr, StackedExprHash>(
      e,
      [](const StackedExpr& s) {
        std::vector<Step<StepLabel, StackedExpr>> r;
        for (auto& [a, t] : steps_stacked(s)) r.push_back({a, Marking::body(), t});
        return r;
      },
      terminates_stacked, cap);
}

inline OneChart onechart_of(const StarExpr& e, std::size_t cap = default_vertex_cap) {
  return generate_onechart(StackedExpr::plain(e), cap).chart;
}

struct Normedness {
  bool normed = false;
  bool normed_plus = false;
  friend bool operator==(const Normedness&, const Normedness&) = default;
};

/// Normedness of every vertex of a 1-chart, by backward reachability.
inline std::vector<Normedness> normedness_all(const OneChart& u) {
  const std::size_t n = u.vertex_count();
  std::vector<std::vector<VertexId>> pred(n);
  for (const auto& t : u.transitions()) pred[t.to].push_back(t.from);
  auto close_backward = [&](std::vector<char> mark) {
    std::vector<VertexId> work;
    for (VertexId v = 0; v < n; ++v)
      if (mark[v]) work.push_back(v);
    while (!work.empty()) {
      VertexId v = work.back();
      work.pop_back();
      for (VertexId p : pred[v])
        if (!mark[p]) mark[p] = 1, work.push_back(p);
    }
    return mark;
  };
  std::vector<char> term(n, 0);
  for (VertexId v = 0; v < n; ++v) term[v] = u.terminating(v);
  auto normed = close_backward(term);
  // a positive induced path ends with a proper step into a normed vertex, then anything
  std::vector<char> seed(n, 0);
  for (const auto& t : u.transitions())
    if (!t.label.is_empty() && normed[t.to]) seed[t.from] = 1;
  auto plus = close_backward(seed);
  std::vector<Normedness> r(n);
  for (VertexId v = 0; v < n; ++v) r[v] = {normed[v] != 0, plus[v] != 0};
  return r;
}

inline Normedness normedness(const StackedExpr& e, std::size_t cap = default_vertex_cap) {
  return normedness_all(generate_onechart(e, cap).chart)[0];
}

/// Memoized normed⁺ test for plain expressions.
class NormedPlusCache {
 public:
  explicit NormedPlusCache(std::size_t cap = default_vertex_cap) : cap_(cap) {}

  bool operator()(const StarExpr& e) {
    auto it = memo_.find(e);
    if (it != memo_.end()) return it->second;
    bool r = normedness(StackedExpr::plain(e), cap_).normed_plus;
    memo_.emplace(e, r);
    return r;
  }

 private:
  std::size_t cap_;
  std::unordered_map<StarExpr, bool, StarExprHash> memo_;
};

using LabeledStep = Step<StepLabel, StackedExpr>;

namespace detail {

inline void plain_labeled_into(const StarExpr& e, NormedPlusCache& np, std::vector<LabeledStep>& out) {
  using K = StarExpr::Kind;
  switch (e.kind()) {
    case K::zero:
    case K::one: return;
    case K::action:
      out.push_back({StepLabel(e.action()), Marking::body(), StackedExpr::plain(StarExpr::one())});
      return;
    case K::sum: {
      std::vector<LabeledStep> s;
      plain_labeled_into(e.left(), np, s);
      plain_labeled_into(e.right(), np, s);
      for (auto& st : s) out.push_back({std::move(st.label), Marking::body(), std::move(st.target)});
      return;
    }
    case K::product: {
      std::vector<LabeledStep> l;
      plain_labeled_into(e.left(), np, l);
      for (auto& st : l)
        out.push_back({std::move(st.label), st.marking, StackedExpr::product(st.target, e.right())});
      if (e.left().terminates()) {
        std::vector<LabeledStep> r;
        plain_labeled_into(e.right(), np, r);
        for (auto& st : r) out.push_back({std::move(st.label), Marking::body(), std::move(st.target)});
      }
      return;
    }
    case K::star: {
      std::vector<LabeledStep> b;
      plain_labeled_into(e.body(), np, b);
      if (b.empty()) return;
      Marking m = np(e.body()) ? Marking::entry(e.height()) : Marking::body();
      for (auto& st : b) out.push_back({std::move(st.label), m, StackedExpr::stack(st.target, e)});
      return;
    }
  }
}

inline void labeled_into(const StackedExpr& e, NormedPlusCache& np, std::vector<LabeledStep>& out) {
  switch (e.kind()) {
    case StackedExpr::Kind::plain: plain_labeled_into(e.expr(), np, out); return;
    case StackedExpr::Kind::product: {
      std::vector<LabeledStep> h;
      labeled_into(e.head(), np, h);
      for (auto& st : h)
        out.push_back({std::move(st.label), st.marking, StackedExpr::product(st.target, e.tail())});
      return;
    }
    case StackedExpr::Kind::stack: {
      std::vector<LabeledStep> h;
      labeled_into(e.head(), np, h);
      for (auto& st : h)
        out.push_back({std::move(st.label), st.marking, StackedExpr::stack(st.target, e.tail())});
      if (e.head().is_plain() && e.head().expr().terminates())
        out.push_back({StepLabel::empty(), Marking::body(), StackedExpr::plain(e.tail())});
      return;
    }
  }
}

}  // namespace detail

/// Marked steps, sorted by (label, target); throws AmbiguousMarking on conflicting derivations.
inline std::vector<LabeledStep> labeled_steps_stacked(const StackedExpr& e, NormedPlusCache& np) {
  std::vector<LabeledStep> out;
  detail::labeled_into(e, np, out);
  std::sort(out.begin(), out.end(), [](const LabeledStep& x, const LabeledStep& y) {
    return std::tie(x.label, x.target, x.marking) < std::tie(y.label, y.target, y.marking);
  });
  out.erase(std::unique(out.begin(), out.end()), out.end());
  for (std::size_t i = 1; i < out.size(); ++i)
    if (out[i].label == out[i - 1].label && out[i].target == out[i - 1].target)
      throw AmbiguousMarking("step " + render(e) + " -" + out[i].label.text() + "-> " +
                             render(out[i].target) + " has markings " +
                             std::to_string(out[i - 1].marking.level()) + " and " +
                             std::to_string(out[i].marking.level()));
  return out;
}

inline std::vector<LabeledStep> labeled_steps_stacked(const StackedExpr& e) {
  NormedPlusCache np;
  return labeled_steps_stacked(e, np);
}

inline Generated<StepLabel, StackedExpr> generate_labeled_onechart(
    const StarExpr& e, std::size_t cap = default_vertex_cap) {
  NormedPlusCache np(cap);
  return detail::explore<StepLabel, StackedExpr, StackedExprHash>(
      StackedExpr::plain(e), [&np](const StackedExpr& s) { return labeled_steps_stacked(s, np); },
      terminates_stacked, cap);
}

inline OneChartLabeling labeled_onechart_of(const StarExpr& e, std::size_t cap = default_vertex_cap) {
  auto g = generate_labeled_onechart(e, cap);
  return OneChartLabeling(std::move(g.chart), std::move(g.markings));
}

}  // namespace loopchart
