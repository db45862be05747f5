#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "chart.hpp"
#include "errors.hpp"

namespace loopchart {

/// Pairs (vertex of the left chart, vertex of the right chart).
using Relation = std::vector<std::pair<VertexId, VertexId>>;
/// Original vertex to collapsed vertex; empty for vertices not reachable from the start.
using QuotientMap = std::vector<std::optional<VertexId>>;

enum class BisimClause { start, termination, forth, back };

inline const char* to_string(BisimClause c) noexcept {
  switch (c) {
    case BisimClause::start: return "start";
    case BisimClause::termination: return "termination";
    case BisimClause::forth: return "forth";
    case BisimClause::back: return "back";
  }
  return "?";
}

struct BisimViolation {
  BisimClause clause;
  std::pair<VertexId, VertexId> pair;
  std::optional<Action> action;  // the unmatched step for forth/back
};

struct BisimCheck {
  std::optional<BisimViolation> violation;
  bool ok() const noexcept { return !violation; }
  explicit operator bool() const noexcept { return ok(); }
};

/// Checks R against both charts. With `require_start` false this is the plain LTS notion.
inline BisimCheck check_relation_bisim(const Chart& c1, const Chart& c2, const Relation& r,
                                       bool require_start = true) {
  const std::size_t n1 = c1.vertex_count(), n2 = c2.vertex_count();
  for (auto [p, q] : r) {
    if (!c1.contains(p)) throw UnknownVertex(p);
    if (!c2.contains(q)) throw UnknownVertex(q);
  }
  std::vector<char> in(n1 * n2, 0);
  for (auto [p, q] : r) in[std::size_t(p) * n2 + q] = 1;
  auto related = [&](VertexId p, VertexId q) { return in[std::size_t(p) * n2 + q] != 0; };

  if (require_start && !related(c1.start(), c2.start()))
    return {BisimViolation{BisimClause::start, {c1.start(), c2.start()}, std::nullopt}};

  for (auto [p, q] : r) {
    if (c1.terminating(p) != c2.terminating(q))
      return {BisimViolation{BisimClause::termination, {p, q}, std::nullopt}};
    for (std::size_t t : c1.out(p)) {
      const auto& tr = c1.transition(t);
      bool matched = std::any_of(c2.out(q).begin(), c2.out(q).end(), [&](std::size_t u) {
        const auto& ur = c2.transition(u);
        return ur.label == tr.label && related(tr.to, ur.to);
      });
      if (!matched) return {BisimViolation{BisimClause::forth, {p, q}, tr.label}};
    }
    for (std::size_t u : c2.out(q)) {
      const auto& ur = c2.transition(u);
      bool matched = std::any_of(c1.out(p).begin(), c1.out(p).end(), [&](std::size_t t) {
        const auto& tr = c1.transition(t);
        return ur.label == tr.label && related(tr.to, ur.to);
      });
      if (!matched) return {BisimViolation{BisimClause::back, {p, q}, ur.label}};
    }
  }
  return {};
}

/// Checks the graph of a partial function (index = vertex of c1).
inline BisimCheck check_functional_bisim(const Chart& c1, const Chart& c2,
                                         const std::vector<std::optional<VertexId>>& f) {
  if (f.size() > c1.vertex_count()) throw UnknownVertex(f.size() - 1);
  Relation r;
  for (VertexId v = 0; v < f.size(); ++v)
    if (f[v]) r.emplace_back(v, *f[v]);
  return check_relation_bisim(c1, c2, r);
}

namespace detail {

/// Coarsest stable partition of the disjoint union of the given charts. Returns the block of
/// every vertex; vertices of chart k are offset by the sizes of charts before it.
inline std::vector<std::size_t> coarsest_partition(const std::vector<const Chart*>& charts) {
  std::vector<std::size_t> offset;
  std::size_t n = 0;
  for (const Chart* c : charts) offset.push_back(n), n += c->vertex_count();

  // predecessor lists per action, on the union
  std::map<Action, std::vector<std::vector<std::size_t>>> pred;
  std::vector<char> term(n, 0);
  for (std::size_t k = 0; k < charts.size(); ++k) {
    const Chart& c = *charts[k];
    for (VertexId v = 0; v < c.vertex_count(); ++v) term[offset[k] + v] = c.terminating(v);
    for (const auto& t : c.transitions()) {
      auto& lists = pred[t.label];
      if (lists.empty()) lists.resize(n);
      lists[offset[k] + t.to].push_back(offset[k] + t.from);
    }
  }

  std::vector<std::size_t> block(n);
  std::vector<std::vector<std::size_t>> members(2);
  for (std::size_t v = 0; v < n; ++v) block[v] = term[v] ? 1 : 0, members[block[v]].push_back(v);
  if (members[1].empty()) members.pop_back();
  else if (members[0].empty()) {
    members.erase(members.begin());
    std::fill(block.begin(), block.end(), 0);
  }

  std::vector<std::size_t> queue;
  for (std::size_t b = 0; b < members.size(); ++b) queue.push_back(b);
  std::vector<char> hit(n, 0);
  while (!queue.empty()) {
    std::size_t splitter = queue.back();
    queue.pop_back();
    for (auto& [action, lists] : pred) {
      std::vector<std::size_t> touched;
      for (std::size_t w : members[splitter])
        for (std::size_t p : lists[w])
          if (!hit[p]) hit[p] = 1, touched.push_back(p);
      std::vector<std::size_t> blocks;
      for (std::size_t p : touched) blocks.push_back(block[p]);
      std::sort(blocks.begin(), blocks.end());
      blocks.erase(std::unique(blocks.begin(), blocks.end()), blocks.end());
      for (std::size_t b : blocks) {
        std::vector<std::size_t> in, out;
        for (std::size_t v : members[b]) (hit[v] ? in : out).push_back(v);
        if (out.empty()) continue;
        std::size_t fresh = members.size();
        for (std::size_t v : in) block[v] = fresh;
        members[b] = std::move(out);
        members.push_back(std::move(in));
        queue.push_back(b);
        queue.push_back(fresh);
      }
      for (std::size_t p : touched) hit[p] = 0;
    }
  }
  return block;
}

}  // namespace detail

/// A bisimulation relating the start vertices, or nothing if the charts are not bisimilar.
inline std::optional<Relation> bisimilar(const Chart& c1, const Chart& c2) {
  auto block = detail::coarsest_partition({&c1, &c2});
  const std::size_t n1 = c1.vertex_count();
  if (block[c1.start()] != block[n1 + c2.start()]) return std::nullopt;
  Relation r;
  for (VertexId p = 0; p < n1; ++p)
    for (VertexId q = 0; q < c2.vertex_count(); ++q)
      if (block[p] == block[n1 + q]) r.emplace_back(p, q);
  return r;
}

struct Collapse {
  Chart chart;
  QuotientMap map;
};

/// Quotient of the reachable part by bisimilarity; collapsed vertices are numbered in BFS order.
inline Collapse collapse(const Chart& c) {
  auto block = detail::coarsest_partition({&c});
  auto reach = reachable_set(c, c.start());

  std::vector<std::optional<VertexId>> of_block(c.vertex_count());
  std::vector<VertexId> rep;
  std::vector<VertexId> bfs{c.start()};
  std::vector<char> seen(c.vertex_count(), 0);
  seen[c.start()] = 1;
  for (std::size_t i = 0; i < bfs.size(); ++i) {
    VertexId v = bfs[i];
    if (!of_block[block[v]]) of_block[block[v]] = static_cast<VertexId>(rep.size()), rep.push_back(v);
    for (std::size_t t : c.out(v)) {
      VertexId w = c.transition(t).to;
      if (!seen[w]) seen[w] = 1, bfs.push_back(w);
    }
  }

  Chart q(rep.size(), 0);
  for (const auto& a : c.alphabet()) q.add_action(a);
  for (VertexId k = 0; k < rep.size(); ++k) {
    q.set_terminating(k, c.terminating(rep[k]));
    if (c.annotation(rep[k])) q.set_annotation(k, *c.annotation(rep[k]));
  }
  for (const auto& t : c.transitions())
    if (reach[t.from]) q.add_transition(*of_block[block[t.from]], t.label, *of_block[block[t.to]]);

  QuotientMap m(c.vertex_count());
  for (VertexId v = 0; v < c.vertex_count(); ++v)
    if (reach[v]) m[v] = of_block[block[v]];
  return {std::move(q), std::move(m)};
}

inline constexpr std::size_t default_oracle_cap = 60;

/// Greatest bisimulation between the charts (not necessarily relating the starts), by pruning
/// the full relation until it is stable.
inline Relation naive_bisim_oracle(const Chart& c1, const Chart& c2, std::size_t cap = default_oracle_cap) {
  const std::size_t n1 = c1.vertex_count(), n2 = c2.vertex_count();
  if (n1 + n2 > cap) throw CapExceeded(n1 + n2, cap);
  std::vector<std::vector<char>> rel(n1, std::vector<char>(n2, 0));
  for (VertexId p = 0; p < n1; ++p)
    for (VertexId q = 0; q < n2; ++q) rel[p][q] = c1.terminating(p) == c2.terminating(q);

  auto simulated = [](const Chart& a, VertexId p, const Chart& b, VertexId q, auto&& related) {
    for (std::size_t i : a.out(p)) {
      const auto& ta = a.transition(i);
      bool found = false;
      for (std::size_t j : b.out(q)) {
        const auto& tb = b.transition(j);
        if (tb.label == ta.label && related(ta.to, tb.to)) found = true;
      }
      if (!found) return false;
    }
    return true;
  };

  for (bool changed = true; changed;) {
    changed = false;
    for (VertexId p = 0; p < n1; ++p)
      for (VertexId q = 0; q < n2; ++q) {
        if (!rel[p][q]) continue;
        bool ok = simulated(c1, p, c2, q, [&](VertexId x, VertexId y) { return rel[x][y] != 0; }) &&
                  simulated(c2, q, c1, p, [&](VertexId y, VertexId x) { return rel[x][y] != 0; });
        if (!ok) rel[p][q] = 0, changed = true;
      }
  }
  Relation r;
  for (VertexId p = 0; p < n1; ++p)
    for (VertexId q = 0; q < n2; ++q)
      if (rel[p][q]) r.emplace_back(p, q);
  return r;
}

/// Relational composition, for chaining functional bisimulations.
inline Relation compose(const Relation& r, const Relation& s) {
  Relation out;
  for (auto [p, q] : r)
    for (auto [q2, w] : s)
      if (q == q2) out.emplace_back(p, w);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace loopchart
