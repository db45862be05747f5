#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "syntax.hpp"

namespace loopchart {

using VertexId = std::uint32_t;

/// Transition label of a 1-chart: an action or the empty step `1`.
class StepLabel {
 public:
  explicit StepLabel(Action a) : act_(std::move(a)) {}
  static StepLabel empty() { return StepLabel(); }

  bool is_empty() const noexcept { return !act_.has_value(); }
  const Action& action() const { return act_.value(); }
  std::string text() const { return act_ ? act_->name() : std::string("1"); }

  friend bool operator==(const StepLabel&, const StepLabel&) = default;
  friend auto operator<=>(const StepLabel&, const StepLabel&) = default;

 private:
  StepLabel() = default;
  std::optional<Action> act_;
};

inline bool is_empty_step(const Action&) noexcept { return false; }
inline bool is_empty_step(const StepLabel& l) noexcept { return l.is_empty(); }
inline const std::string& label_text(const Action& a) noexcept { return a.name(); }
inline std::string label_text(const StepLabel& l) { return l.text(); }

/// Body (level 0) or Entry(level) with level >= 1.
class Marking {
 public:
  static constexpr Marking body() noexcept { return Marking(0); }
  static Marking entry(unsigned level) {
    if (level == 0) throw std::invalid_argument("entry level must be positive");
    return Marking(level);
  }
  /// 0 encodes body.
  static Marking from_level(unsigned level) noexcept { return Marking(level); }

  bool is_body() const noexcept { return level_ == 0; }
  bool is_entry() const noexcept { return level_ != 0; }
  unsigned level() const noexcept { return level_; }

  friend bool operator==(const Marking&, const Marking&) = default;
  friend auto operator<=>(const Marking&, const Marking&) = default;

 private:
  constexpr explicit Marking(unsigned level) noexcept : level_(level) {}
  unsigned level_;
};

/// Finite rooted transition system with termination flags.
template <class Label>
class BasicChart {
 public:
  using label_type = Label;

  struct Transition {
    VertexId from;
    Label label;
    VertexId to;
    friend bool operator==(const Transition&, const Transition&) = default;
    friend auto operator<=>(const Transition&, const Transition&) = default;
  };

  BasicChart() : BasicChart(1) {}
  explicit BasicChart(std::size_t vertices, VertexId start = 0)
      : start_(start), terminating_(vertices, 0), annotations_(vertices), out_(vertices) {
    if (vertices == 0) throw std::invalid_argument("a chart needs at least one vertex");
    check(start);
  }

  VertexId add_vertex(bool terminating = false) {
    terminating_.push_back(terminating ? 1 : 0);
    annotations_.emplace_back();
    out_.emplace_back();
    return static_cast<VertexId>(terminating_.size() - 1);
  }

  /// Returns the index of the transition; adding an existing triple is a no-op.
  std::size_t add_transition(VertexId from, Label label, VertexId to) {
    check(from);
    check(to);
    for (std::size_t t : out_[from])
      if (transitions_[t].to == to && transitions_[t].label == label) return t;
    if constexpr (std::is_same_v<Label, Action>) {
      alphabet_.insert(label);
    } else {
      if (!label.is_empty()) alphabet_.insert(label.action());
    }
    transitions_.push_back({from, std::move(label), to});
    out_[from].push_back(transitions_.size() - 1);
    return transitions_.size() - 1;
  }

  void add_action(Action a) { alphabet_.insert(std::move(a)); }
  void set_start(VertexId v) { check(v), start_ = v; }
  void set_terminating(VertexId v, bool t = true) { check(v), terminating_[v] = t ? 1 : 0; }
  void set_annotation(VertexId v, std::string text) { check(v), annotations_[v] = std::move(text); }

  std::size_t vertex_count() const noexcept { return terminating_.size(); }
  VertexId start() const noexcept { return start_; }
  bool contains(std::size_t v) const noexcept { return v < terminating_.size(); }
  bool terminating(VertexId v) const { return check(v), terminating_[v] != 0; }
  const std::optional<std::string>& annotation(VertexId v) const { return check(v), annotations_[v]; }
  const std::set<Action>& alphabet() const noexcept { return alphabet_; }
  const std::vector<Transition>& transitions() const noexcept { return transitions_; }
  const Transition& transition(std::size_t t) const { return transitions_.at(t); }
  /// Indices of transitions leaving v, in insertion order.
  const std::vector<std::size_t>& out(VertexId v) const { return check(v), out_[v]; }

  std::size_t terminating_count() const noexcept {
    return static_cast<std::size_t>(std::count(terminating_.begin(), terminating_.end(), 1));
  }

  /// Equality as mathematical objects: the transition set is compared irrespective of order.
  friend bool operator==(const BasicChart& x, const BasicChart& y) {
    if (x.start_ != y.start_ || x.terminating_ != y.terminating_ ||
        x.annotations_ != y.annotations_ || x.alphabet_ != y.alphabet_ ||
        x.transitions_.size() != y.transitions_.size())
      return false;
    auto a = x.transitions_, b = y.transitions_;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    return a == b;
  }

 private:
  void check(std::size_t v) const {
    if (v >= terminating_.size()) throw UnknownVertex(v);
  }

  VertexId start_;
  std::vector<char> terminating_;
  std::vector<std::optional<std::string>> annotations_;
  std::set<Action> alphabet_;
  std::vector<Transition> transitions_;
  std::vector<std::vector<std::size_t>> out_;
};

using Chart = BasicChart<Action>;
using OneChart = BasicChart<StepLabel>;

/// A chart or 1-chart with one marking per transition (indexed like `base.transitions()`).
template <class Label>
struct Labeling {
  BasicChart<Label> base;
  std::vector<Marking> marking;

  Labeling() = default;
  Labeling(BasicChart<Label> c, std::vector<Marking> m) : base(std::move(c)), marking(std::move(m)) {
    if (marking.size() != base.transitions().size())
      throw std::invalid_argument("labeling must mark every transition exactly once");
  }

  friend bool operator==(const Labeling& x, const Labeling& y) {
    if (!(x.base == y.base)) return false;
    using Key = std::pair<typename BasicChart<Label>::Transition, Marking>;
    auto keyed = [](const Labeling& l) {
      std::vector<Key> k;
      for (std::size_t t = 0; t < l.marking.size(); ++t) k.emplace_back(l.base.transition(t), l.marking[t]);
      std::sort(k.begin(), k.end());
      return k;
    };
    return keyed(x) == keyed(y);
  }
};

using ChartLabeling = Labeling<Action>;
using OneChartLabeling = Labeling<StepLabel>;

template <class Label>
const BasicChart<Label>& strip(const Labeling<Label>& l) noexcept {
  return l.base;
}

/// Views a chart as a 1-chart without empty steps.
inline OneChart as_onechart(const Chart& c) {
  OneChart u(c.vertex_count(), c.start());
  for (const auto& a : c.alphabet()) u.add_action(a);
  for (VertexId v = 0; v < c.vertex_count(); ++v) {
    u.set_terminating(v, c.terminating(v));
    if (c.annotation(v)) u.set_annotation(v, *c.annotation(v));
  }
  for (const auto& t : c.transitions()) u.add_transition(t.from, StepLabel(t.label), t.to);
  return u;
}

/// Vertices reachable from `from`; optionally only over transitions with `usable[t]` set.
template <class Label>
std::vector<char> reachable_set(const BasicChart<Label>& c, VertexId from,
                                const std::vector<char>* usable = nullptr) {
  std::vector<char> seen(c.vertex_count(), 0);
  std::vector<VertexId> stack{from};
  seen.at(from) = 1;
  while (!stack.empty()) {
    VertexId v = stack.back();
    stack.pop_back();
    for (std::size_t t : c.out(v)) {
      if (usable && !(*usable)[t]) continue;
      VertexId w = c.transition(t).to;
      if (!seen[w]) seen[w] = 1, stack.push_back(w);
    }
  }
  return seen;
}

/// Keeps the marked vertices (renumbered in increasing original order) and the transitions
/// among them. Returns the chart and the original id of each new vertex.
template <class Label>
std::pair<BasicChart<Label>, std::vector<VertexId>> restrict_chart(
    const BasicChart<Label>& c, const std::vector<char>& keep, VertexId new_start,
    const std::vector<char>* usable = nullptr) {
  std::vector<VertexId> old_of, new_of(c.vertex_count(), 0);
  for (VertexId v = 0; v < c.vertex_count(); ++v)
    if (keep[v]) new_of[v] = static_cast<VertexId>(old_of.size()), old_of.push_back(v);
  if (!keep.at(new_start)) throw std::invalid_argument("start vertex not kept");
  BasicChart<Label> r(old_of.size(), new_of[new_start]);
  for (const auto& a : c.alphabet()) r.add_action(a);
  for (VertexId n = 0; n < old_of.size(); ++n) {
    r.set_terminating(n, c.terminating(old_of[n]));
    if (c.annotation(old_of[n])) r.set_annotation(n, *c.annotation(old_of[n]));
  }
  for (std::size_t t = 0; t < c.transitions().size(); ++t) {
    const auto& tr = c.transition(t);
    if (usable && !(*usable)[t]) continue;
    if (keep[tr.from] && keep[tr.to]) r.add_transition(new_of[tr.from], tr.label, new_of[tr.to]);
  }
  return {std::move(r), std::move(old_of)};
}

template <class Label>
std::pair<BasicChart<Label>, std::vector<VertexId>> reachable_with_map(const BasicChart<Label>& c) {
  return restrict_chart(c, reachable_set(c, c.start()), c.start());
}

/// Restriction to the vertices reachable from the start.
template <class Label>
BasicChart<Label> reachable(const BasicChart<Label>& c) {
  return reachable_with_map(c).first;
}

/// The subchart generated by v, rooted at v.
template <class Label>
BasicChart<Label> rooted_subchart(const BasicChart<Label>& c, VertexId v) {
  if (!c.contains(v)) throw UnknownVertex(v);
  return restrict_chart(c, reachable_set(c, v), v).first;
}

/// Proper transitions after any number of empty steps; termination through empty steps.
inline Chart induced_of(const OneChart& u) {
  Chart c(u.vertex_count(), u.start());
  for (const auto& a : u.alphabet()) c.add_action(a);
  std::vector<char> empty_only(u.transitions().size(), 0);
  for (std::size_t t = 0; t < u.transitions().size(); ++t) empty_only[t] = u.transition(t).label.is_empty();
  for (VertexId v = 0; v < u.vertex_count(); ++v) {
    if (u.annotation(v)) c.set_annotation(v, *u.annotation(v));
    auto closure = reachable_set(u, v, &empty_only);
    for (VertexId w = 0; w < u.vertex_count(); ++w) {
      if (!closure[w]) continue;
      if (u.terminating(w)) c.set_terminating(v);
      for (std::size_t t : u.out(w)) {
        const auto& tr = u.transition(t);
        if (!tr.label.is_empty()) c.add_transition(v, tr.label.action(), tr.to);
      }
    }
  }
  return c;
}

/// True iff a cycle is reachable from the start.
template <class Label>
bool has_infinite_path(const BasicChart<Label>& c) {
  // iterative three-colour DFS
  std::vector<char> colour(c.vertex_count(), 0);
  std::vector<std::pair<VertexId, std::size_t>> stack{{c.start(), 0}};
  colour[c.start()] = 1;
  while (!stack.empty()) {
    auto& [v, i] = stack.back();
    const auto& out = c.out(v);
    if (i == out.size()) {
      colour[v] = 2;
      stack.pop_back();
      continue;
    }
    VertexId w = c.transition(out[i++]).to;
    if (colour[w] == 1) return true;
    if (colour[w] == 0) colour[w] = 1, stack.emplace_back(w, 0);
  }
  return false;
}

}  // namespace loopchart
