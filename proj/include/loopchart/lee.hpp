#pragma once

#include <algorithm>
#include <cstdlib>
#include <deque>
#include <optional>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "chart.hpp"
#include "errors.hpp"

namespace loopchart {

enum class LoopCondition { L1, L2, L3 };

inline const char* to_string(LoopCondition c) noexcept {
  switch (c) {
    case LoopCondition::L1: return "L1";
    case LoopCondition::L2: return "L2";
    case LoopCondition::L3: return "L3";
  }
  return "?";
}

struct LoopViolation {
  LoopCondition condition;
  std::optional<VertexId> vertex;  // on a start-avoiding cycle (L2) or terminating (L3)
  std::string detail;
};

struct LoopCheck {
  std::vector<LoopViolation> violations;
  bool ok() const noexcept { return violations.empty(); }
  explicit operator bool() const noexcept { return ok(); }
  bool violates(LoopCondition c) const {
    return std::any_of(violations.begin(), violations.end(),
                       [c](const LoopViolation& v) { return v.condition == c; });
  }
};

class NotALoopSubchart : public Error {
 public:
  explicit NotALoopSubchart(LoopCheck check)
      : Error(describe(check)), check_(std::move(check)) {}
  const LoopCheck& check() const noexcept { return check_; }

 private:
  static std::string describe(const LoopCheck& c) {
    std::string s = "not a loop subchart:";
    for (const auto& v : c.violations) s += std::string(" ") + to_string(v.condition);
    return s;
  }
  LoopCheck check_;
};

namespace detail {

/// A vertex on a cycle that avoids `avoid`, among vertices reachable from the targets of
/// `avoid`'s transitions without passing through `avoid`.
template <class Label>
std::optional<VertexId> cycle_avoiding(const BasicChart<Label>& c, VertexId avoid) {
  std::vector<char> colour(c.vertex_count(), 0);
  colour[avoid] = 2;
  for (std::size_t t0 : c.out(avoid)) {
    VertexId root = c.transition(t0).to;
    if (colour[root]) continue;
    std::vector<std::pair<VertexId, std::size_t>> stack{{root, 0}};
    colour[root] = 1;
    while (!stack.empty()) {
      auto& [v, i] = stack.back();
      const auto& out = c.out(v);
      if (i == out.size()) {
        colour[v] = 2;
        stack.pop_back();
        continue;
      }
      VertexId w = c.transition(out[i++]).to;
      if (colour[w] == 1) return w;
      if (colour[w] == 0) colour[w] = 1, stack.emplace_back(w, 0);
    }
  }
  return std::nullopt;
}

}  // namespace detail

/// L1: an infinite path from the start; L2: every infinite path returns to the start;
/// L3: only the start may terminate.
template <class Label>
LoopCheck check_loop_chart(const BasicChart<Label>& c) {
  LoopCheck r;
  if (!has_infinite_path(c)) r.violations.push_back({LoopCondition::L1, std::nullopt, "no infinite path"});
  if (auto w = detail::cycle_avoiding(c, c.start()))
    r.violations.push_back({LoopCondition::L2, w, "cycle avoiding the start through vertex " + std::to_string(*w)});
  for (VertexId v = 0; v < c.vertex_count(); ++v)
    if (v != c.start() && c.terminating(v))
      r.violations.push_back({LoopCondition::L3, v, "vertex " + std::to_string(v) + " terminates"});
  return r;
}

/// One elimination: loop-entry transitions (indices into the original chart) from `vertex`.
struct EliminationStep {
  VertexId vertex;
  std::vector<std::size_t> entry_set;
  friend bool operator==(const EliminationStep&, const EliminationStep&) = default;
};

using EliminationTrace = std::vector<EliminationStep>;

namespace detail {

inline std::vector<char> all_usable(std::size_t m) { return std::vector<char>(m, 1); }

/// Transitions of the subchart generated by U at v: U itself, then everything leaving the
/// vertices met before returning to v.
template <class Label>
std::pair<std::vector<char>, std::vector<char>> loop_region(const BasicChart<Label>& c, VertexId v,
                                                            const std::vector<std::size_t>& entry,
                                                            const std::vector<char>& usable) {
  std::vector<char> verts(c.vertex_count(), 0), trans(c.transitions().size(), 0);
  verts[v] = 1;
  std::vector<VertexId> work;
  for (std::size_t t : entry) {
    trans[t] = 1;
    VertexId w = c.transition(t).to;
    if (!verts[w]) verts[w] = 1, work.push_back(w);
  }
  while (!work.empty()) {
    VertexId x = work.back();
    work.pop_back();
    for (std::size_t t : c.out(x)) {
      if (!usable[t]) continue;
      trans[t] = 1;
      VertexId w = c.transition(t).to;
      if (!verts[w]) verts[w] = 1, work.push_back(w);
    }
  }
  return {std::move(verts), std::move(trans)};
}

template <class Label>
void check_entry_set(const BasicChart<Label>& c, VertexId v, const std::vector<std::size_t>& entry) {
  if (!c.contains(v)) throw UnknownVertex(v);
  if (entry.empty()) throw EmptyEntrySet();
  for (std::size_t t : entry)
    if (t >= c.transitions().size() || c.transition(t).from != v)
      throw std::invalid_argument("entry transition " + std::to_string(t) + " does not leave vertex " +
                                  std::to_string(v));
}

template <class Label>
BasicChart<Label> loop_subchart_over(const BasicChart<Label>& c, VertexId v,
                                     const std::vector<std::size_t>& entry, const std::vector<char>& usable) {
  auto [verts, trans] = loop_region(c, v, entry, usable);
  return restrict_chart(c, verts, v, &trans).first;
}

}  // namespace detail

/// The v-rooted subchart of paths that start with a transition in U and stop on returning to v.
template <class Label>
BasicChart<Label> loop_subchart_generated(const BasicChart<Label>& c, VertexId v,
                                          const std::vector<std::size_t>& entry) {
  detail::check_entry_set(c, v, entry);
  return detail::loop_subchart_over(c, v, entry, detail::all_usable(c.transitions().size()));
}

/// Removes U (after checking it generates a loop subchart) and drops what became unreachable.
template <class Label>
BasicChart<Label> eliminate_loop(const BasicChart<Label>& c, VertexId v, const std::vector<std::size_t>& entry) {
  auto check = check_loop_chart(loop_subchart_generated(c, v, entry));
  if (!check.ok()) throw NotALoopSubchart(std::move(check));
  auto usable = detail::all_usable(c.transitions().size());
  for (std::size_t t : entry) usable[t] = 0;
  return restrict_chart(c, reachable_set(c, c.start(), &usable), c.start(), &usable).first;
}

namespace detail {

/// The chart with a subset of its transitions still present; only transitions whose source is
/// reachable are kept alive.
template <class Label>
class Residual {
 public:
  explicit Residual(const BasicChart<Label>& c) : c_(c), alive_(c.transitions().size(), 1) { gc(); }

  const std::vector<char>& alive() const noexcept { return alive_; }
  const std::vector<char>& live_vertices() const noexcept { return reach_; }
  bool has_cycle() const { return cycle_from_start(); }

  void remove(const std::vector<std::size_t>& ts) {
    for (std::size_t t : ts) alive_[t] = 0;
    gc();
  }

  /// Alive transitions out of v that lie on a cycle through v and on their own generate a
  /// loop subchart. Every valid entry set of returning transitions is a subset of these.
  std::vector<std::size_t> valid_entries(VertexId v) const {
    std::vector<std::size_t> r;
    if (!reach_[v]) return r;
    auto back = reaches(v);
    for (std::size_t t : c_.out(v)) {
      if (!alive_[t] || !back[c_.transition(t).to]) continue;
      if (region_is_loop(v, {t})) r.push_back(t);
    }
    return r;
  }

  /// Loop test on the region itself: no termination and no cycle away from v. A path back
  /// to v exists whenever the entries were chosen on cycles through v.
  bool region_is_loop(VertexId v, const std::vector<std::size_t>& entry) const {
    auto [verts, trans] = loop_region(c_, v, entry, alive_);
    bool returns = false;
    for (std::size_t t = 0; t < trans.size(); ++t)
      if (trans[t] && c_.transition(t).to == v) returns = true;
    if (!returns) return false;
    for (VertexId x = 0; x < c_.vertex_count(); ++x)
      if (verts[x] && x != v && c_.terminating(x)) return false;
    // cycle among region vertices other than v
    std::vector<int> indeg(c_.vertex_count(), 0);
    std::size_t count = 0;
    for (std::size_t t = 0; t < trans.size(); ++t) {
      const auto& tr = c_.transition(t);
      if (trans[t] && tr.from != v && tr.to != v) ++indeg[tr.to];
    }
    std::vector<VertexId> ready;
    for (VertexId x = 0; x < c_.vertex_count(); ++x)
      if (verts[x] && x != v && indeg[x] == 0) ready.push_back(x);
    while (!ready.empty()) {
      VertexId x = ready.back();
      ready.pop_back();
      ++count;
      for (std::size_t t : c_.out(x)) {
        if (!trans[t]) continue;
        VertexId w = c_.transition(t).to;
        if (w != v && --indeg[w] == 0) ready.push_back(w);
      }
    }
    std::size_t region = 0;
    for (VertexId x = 0; x < c_.vertex_count(); ++x) region += verts[x] && x != v;
    return count == region;
  }

  std::string key() const { return std::string(alive_.begin(), alive_.end()); }

 private:
  void gc() {
    reach_ = reachable_set(c_, c_.start(), &alive_);
    for (std::size_t t = 0; t < alive_.size(); ++t)
      if (!reach_[c_.transition(t).from]) alive_[t] = 0;
  }

  std::vector<char> reaches(VertexId v) const {
    std::vector<std::vector<VertexId>> pred(c_.vertex_count());
    for (std::size_t t = 0; t < alive_.size(); ++t)
      if (alive_[t]) pred[c_.transition(t).to].push_back(c_.transition(t).from);
    std::vector<char> seen(c_.vertex_count(), 0);
    std::vector<VertexId> work{v};
    seen[v] = 1;
    while (!work.empty()) {
      VertexId x = work.back();
      work.pop_back();
      for (VertexId p : pred[x])
        if (!seen[p]) seen[p] = 1, work.push_back(p);
    }
    return seen;
  }

  bool cycle_from_start() const {
    std::vector<char> colour(c_.vertex_count(), 0);
    std::vector<std::pair<VertexId, std::size_t>> stack{{c_.start(), 0}};
    colour[c_.start()] = 1;
    while (!stack.empty()) {
      auto& [v, i] = stack.back();
      const auto& out = c_.out(v);
      if (i == out.size()) {
        colour[v] = 2;
        stack.pop_back();
        continue;
      }
      std::size_t t = out[i++];
      if (!alive_[t]) continue;
      VertexId w = c_.transition(t).to;
      if (colour[w] == 1) return true;
      if (colour[w] == 0) colour[w] = 1, stack.emplace_back(w, 0);
    }
    return false;
  }

  const BasicChart<Label>& c_;
  std::vector<char> alive_;
  std::vector<char> reach_;
};

/// Nonempty subsets of `set`, largest first; within a size, lexicographic by position.
inline std::vector<std::vector<std::size_t>> subsets_largest_first(const std::vector<std::size_t>& set) {
  std::vector<std::vector<std::size_t>> r;
  const std::size_t k = set.size();
  for (std::size_t size = k; size >= 1; --size) {
    std::vector<char> pick(k, 0);
    std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(size), 1);
    do {
      std::vector<std::size_t> s;
      for (std::size_t i = 0; i < k; ++i)
        if (pick[i]) s.push_back(set[i]);
      r.push_back(std::move(s));
    } while (std::prev_permutation(pick.begin(), pick.end()));
  }
  return r;
}

}  // namespace detail

inline constexpr std::size_t default_lee_budget = 200000;

/// Budget from LOOPCHART_BUDGET if set and valid, else the default.
inline std::size_t lee_budget_from_env() {
  if (const char* s = std::getenv("LOOPCHART_BUDGET")) {
    char* end = nullptr;
    unsigned long long v = std::strtoull(s, &end, 10);
    if (end != s && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return default_lee_budget;
}

struct LeeResult {
  bool holds = false;
  std::optional<EliminationTrace> trace;
  std::size_t nodes = 0;  // search states expanded
};

/// Complete backtracking search for an elimination sequence ending without infinite paths.
template <class Label>
LeeResult decide_lee(const BasicChart<Label>& c, std::size_t budget = default_lee_budget) {
  using Res = detail::Residual<Label>;
  LeeResult result;
  std::unordered_set<std::string> failed;
  EliminationTrace trace;

  auto search = [&](auto&& self, const Res& r) -> bool {
    if (!r.has_cycle()) return true;
    auto key = r.key();
    if (failed.count(key)) return false;
    if (++result.nodes > budget) throw SearchBudgetExceeded(budget);

    std::vector<std::pair<VertexId, std::vector<std::size_t>>> maximal;
    for (VertexId v = 0; v < c.vertex_count(); ++v)
      if (auto u = r.valid_entries(v); !u.empty()) maximal.emplace_back(v, std::move(u));

    auto attempt = [&](VertexId v, const std::vector<std::size_t>& u) {
      Res next = r;
      next.remove(u);
      trace.push_back({v, u});
      if (self(self, next)) return true;
      trace.pop_back();
      return false;
    };
    for (const auto& [v, u] : maximal)
      if (attempt(v, u)) return true;
    for (const auto& [v, u] : maximal) {
      auto subsets = detail::subsets_largest_first(u);
      for (std::size_t i = 1; i < subsets.size(); ++i)
        if (attempt(v, subsets[i])) return true;
    }
    failed.insert(std::move(key));
    return false;
  };

  result.holds = search(search, Res(c));
  if (result.holds) result.trace = std::move(trace);
  return result;
}

namespace detail {

template <class Label>
std::pair<std::vector<Marking>, Residual<Label>> replay(const BasicChart<Label>& c, const EliminationTrace& t) {
  Residual<Label> r(c);
  std::vector<Marking> marking(c.transitions().size(), Marking::body());
  for (std::size_t k = 0; k < t.size(); ++k) {
    const auto& step = t[k];
    if (!c.contains(step.vertex)) throw TraceReplayError(k, "unknown vertex " + std::to_string(step.vertex));
    if (!r.live_vertices()[step.vertex])
      throw TraceReplayError(k, "vertex " + std::to_string(step.vertex) + " was eliminated");
    if (step.entry_set.empty()) throw TraceReplayError(k, "empty entry set");
    for (std::size_t tr : step.entry_set) {
      if (tr >= c.transitions().size() || c.transition(tr).from != step.vertex)
        throw TraceReplayError(k, "transition " + std::to_string(tr) + " does not leave the step vertex");
      if (!r.alive()[tr]) throw TraceReplayError(k, "transition " + std::to_string(tr) + " already removed");
    }
    auto check = check_loop_chart(loop_subchart_over(c, step.vertex, step.entry_set, r.alive()));
    if (!check.ok()) throw TraceReplayError(k, NotALoopSubchart(check).what());
    for (std::size_t tr : step.entry_set) marking[tr] = Marking::entry(static_cast<unsigned>(k + 1));
    r.remove(step.entry_set);
  }
  return {std::move(marking), std::move(r)};
}

}  // namespace detail

/// Marks the transitions removed at step k with Entry(k), all others Body.
template <class Label>
Labeling<Label> recording_labeling(const BasicChart<Label>& c, const EliminationTrace& t) {
  return Labeling<Label>(c, detail::replay(c, t).first);
}

/// The chart left after replaying the trace, restricted to its reachable part.
template <class Label>
BasicChart<Label> replay_trace(const BasicChart<Label>& c, const EliminationTrace& t) {
  auto [marking, r] = detail::replay(c, t);
  return restrict_chart(c, r.live_vertices(), c.start(), &r.alive()).first;
}

// ---------------------------------------------------------------------------
// Witness validation

enum class WitnessCondition { W1, W2, W3, LLEE1, LLEE2, LLEE3, LLEE4 };

inline const char* to_string(WitnessCondition c) noexcept {
  switch (c) {
    case WitnessCondition::W1: return "W1";
    case WitnessCondition::W2: return "W2";
    case WitnessCondition::W3: return "W3";
    case WitnessCondition::LLEE1: return "LLEE1";
    case WitnessCondition::LLEE2: return "LLEE2";
    case WitnessCondition::LLEE3: return "LLEE3";
    case WitnessCondition::LLEE4: return "LLEE4";
  }
  return "?";
}

struct WitnessViolation {
  WitnessCondition condition;
  std::optional<VertexId> vertex;
  unsigned level = 0;  // the entry identifier's level, when there is one
  std::string detail;
};

struct WitnessReport {
  std::vector<WitnessViolation> violations;
  bool valid() const noexcept { return violations.empty(); }
};

/// All (v, n) with an Entry(n) transition leaving v, sorted.
template <class Label>
std::vector<std::pair<VertexId, unsigned>> entries_of(const Labeling<Label>& l) {
  std::vector<std::pair<VertexId, unsigned>> r;
  for (std::size_t t = 0; t < l.marking.size(); ++t)
    if (l.marking[t].is_entry()) r.emplace_back(l.base.transition(t).from, l.marking[t].level());
  std::sort(r.begin(), r.end());
  r.erase(std::unique(r.begin(), r.end()), r.end());
  return r;
}

namespace detail {

template <class Label>
std::vector<std::pair<VertexId, unsigned>> reachable_entries(const Labeling<Label>& l, const std::vector<char>& reach) {
  auto all = entries_of(l);
  std::erase_if(all, [&](const auto& e) { return !reach[e.first]; });
  return all;
}

}  // namespace detail

/// W1 body steps terminate, W2 each entry identifier generates a loop chart, W3 layering;
/// on the reachable part.
template <class Label>
WitnessReport validate_llee(const Labeling<Label>& l) {
  const auto& c = l.base;
  WitnessReport rep;
  auto reach = reachable_set(c, c.start());

  // W1: DFS for a cycle of body transitions
  {
    std::vector<char> colour(c.vertex_count(), 0);
    for (VertexId root = 0; root < c.vertex_count() && rep.valid(); ++root) {
      if (!reach[root] || colour[root]) continue;
      std::vector<std::pair<VertexId, std::size_t>> stack{{root, 0}};
      colour[root] = 1;
      while (!stack.empty()) {
        auto& [v, i] = stack.back();
        const auto& out = c.out(v);
        if (i == out.size()) {
          colour[v] = 2;
          stack.pop_back();
          continue;
        }
        std::size_t t = out[i++];
        if (!l.marking[t].is_body()) continue;
        VertexId w = c.transition(t).to;
        if (colour[w] == 1) {
          rep.violations.push_back({WitnessCondition::W1, w, 0, "body-step cycle through vertex " + std::to_string(w)});
          break;
        }
        if (colour[w] == 0) colour[w] = 1, stack.emplace_back(w, 0);
      }
    }
  }

  for (auto [v, n] : detail::reachable_entries(l, reach)) {
    // C_{v,n}: level-n entries from v, then body transitions until v is met again
    std::vector<char> trans(c.transitions().size(), 0), verts(c.vertex_count(), 0);
    verts[v] = 1;
    std::deque<VertexId> work;
    for (std::size_t t : c.out(v))
      if (l.marking[t].is_entry() && l.marking[t].level() == n) {
        trans[t] = 1;
        VertexId w = c.transition(t).to;
        if (!verts[w]) verts[w] = 1, work.push_back(w);
      }
    while (!work.empty()) {
      VertexId x = work.front();
      work.pop_front();
      for (std::size_t t : c.out(x)) {
        if (l.marking[t].is_entry()) {
          if (l.marking[t].level() >= n)
            rep.violations.push_back({WitnessCondition::W3, x, n,
                                      "entry of level " + std::to_string(l.marking[t].level()) + " inside C(" +
                                          std::to_string(v) + "," + std::to_string(n) + ")"});
          continue;
        }
        trans[t] = 1;
        VertexId w = c.transition(t).to;
        if (!verts[w]) verts[w] = 1, work.push_back(w);
      }
    }
    auto sub = restrict_chart(c, verts, v, &trans).first;
    auto check = check_loop_chart(sub);
    if (!check.ok()) {
      std::string what;
      for (const auto& lv : check.violations) what += std::string(what.empty() ? "" : ", ") + to_string(lv.condition);
      rep.violations.push_back({WitnessCondition::W2, v, n, "C(" + std::to_string(v) + "," + std::to_string(n) + ") violates " + what});
    }
  }
  return rep;
}

/// The four conditions phrased with paths that avoid the entry's source as target.
template <class Label>
WitnessReport validate_llee_alt(const Labeling<Label>& l) {
  const auto& c = l.base;
  const std::size_t n = c.vertex_count();
  WitnessReport rep;
  auto reach = reachable_set(c, c.start());
  auto body = [&](std::size_t t) { return l.marking[t].is_body(); };

  // LLEE-2: topological sort of the body-step graph
  {
    std::vector<std::size_t> indeg(n, 0);
    std::size_t total = 0, done = 0;
    for (std::size_t t = 0; t < c.transitions().size(); ++t)
      if (body(t) && reach[c.transition(t).from]) ++indeg[c.transition(t).to];
    std::vector<VertexId> ready;
    for (VertexId v = 0; v < n; ++v)
      if (reach[v]) {
        ++total;
        if (indeg[v] == 0) ready.push_back(v);
      }
    while (!ready.empty()) {
      VertexId v = ready.back();
      ready.pop_back();
      ++done;
      for (std::size_t t : c.out(v))
        if (body(t) && --indeg[c.transition(t).to] == 0) ready.push_back(c.transition(t).to);
    }
    if (done != total) {
      VertexId stuck = 0;
      for (VertexId v = 0; v < n; ++v)
        if (reach[v] && indeg[v] > 0) { stuck = v; break; }
      rep.violations.push_back({WitnessCondition::LLEE2, stuck, 0, "body steps do not terminate from vertex " + std::to_string(stuck)});
    }
  }

  for (auto [e, lvl] : detail::reachable_entries(l, reach)) {
    std::vector<VertexId> firsts;
    for (std::size_t t : c.out(e))
      if (l.marking[t].level() == lvl) firsts.push_back(c.transition(t).to);

    // LLEE-1: some level-lvl entry is followed by body steps back to e
    bool back = false;
    for (VertexId f : firsts) {
      std::vector<char> seen(n, 0);
      std::vector<VertexId> work{f};
      seen[f] = 1;
      while (!work.empty() && !back) {
        VertexId x = work.back();
        work.pop_back();
        if (x == e) back = true;
        for (std::size_t t : c.out(x))
          if (body(t) && !seen[c.transition(t).to]) seen[c.transition(t).to] = 1, work.push_back(c.transition(t).to);
      }
      if (back) break;
    }
    if (!back)
      rep.violations.push_back({WitnessCondition::LLEE1, e, lvl, "no body path returns to vertex " + std::to_string(e)});

    // LLEE-3/4: vertices after the entry and body steps that avoid e as their target
    std::vector<char> inside(n, 0);
    std::vector<VertexId> work;
    for (VertexId f : firsts)
      if (f != e && !inside[f]) inside[f] = 1, work.push_back(f);
    while (!work.empty()) {
      VertexId x = work.back();
      work.pop_back();
      for (std::size_t t : c.out(x)) {
        VertexId w = c.transition(t).to;
        if (body(t) && w != e && !inside[w]) inside[w] = 1, work.push_back(w);
      }
    }
    for (VertexId x = 0; x < n; ++x) {
      if (!inside[x]) continue;
      if (c.terminating(x))
        rep.violations.push_back({WitnessCondition::LLEE3, x, lvl, "terminating vertex " + std::to_string(x) + " inside the loop of (" + std::to_string(e) + "," + std::to_string(lvl) + ")"});
      for (std::size_t t : c.out(x))
        if (l.marking[t].is_entry() && l.marking[t].level() >= lvl)
          rep.violations.push_back({WitnessCondition::LLEE4, x, lvl, "entry of level " + std::to_string(l.marking[t].level()) + " from vertex " + std::to_string(x)});
    }
  }
  return rep;
}

}  // namespace loopchart
