#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "bisim.hpp"
#include "chart.hpp"
#include "lee.hpp"
#include "semantics.hpp"
#include "serialize.hpp"
#include "syntax.hpp"

namespace loopchart {

enum class Property { P1, P2 };

inline const char* to_string(Property p) noexcept { return p == Property::P1 ? "P1" : "P2"; }

struct VerifyStatistics {
  std::size_t onechart_vertices = 0;
  std::size_t one_transitions = 0;
  std::optional<std::size_t> entries;           // entry identifiers of the labeled 1-chart
  std::optional<std::size_t> induced_vertices;  // reachable part of the induced chart
  friend bool operator==(const VerifyStatistics&, const VerifyStatistics&) = default;
};

struct VerifyReport {
  std::string expression;
  Property property = Property::P1;
  bool passed = false;
  VerifyStatistics statistics;
  std::optional<std::string> failure;
  friend bool operator==(const VerifyReport&, const VerifyReport&) = default;
};

namespace detail {

template <class Label>
std::size_t count_empty_steps(const BasicChart<Label>& c) {
  std::size_t k = 0;
  for (const auto& t : c.transitions()) k += is_empty_step(t.label);
  return k;
}

inline std::string describe(const BisimCheck& check, const Chart& left, const Chart& right) {
  const auto& v = *check.violation;
  auto name = [](const Chart& c, VertexId x) {
    return c.annotation(x) ? *c.annotation(x) : std::to_string(x);
  };
  std::string s = std::string(to_string(v.clause)) + " fails at (" + name(left, v.pair.first) + ", " +
                  name(right, v.pair.second) + ")";
  if (v.action) s += " on " + v.action->name();
  return s;
}

}  // namespace detail

/// Projection of the reachable induced chart of the 1-chart interpretation onto the chart
/// interpretation is a functional bisimulation.
inline VerifyReport verify_p1(const StarExpr& e, std::size_t cap = default_vertex_cap) {
  VerifyReport rep{render(e), Property::P1, false, {}, std::nullopt};
  auto plain = generate_chart(e, cap);
  auto stacked = generate_onechart(StackedExpr::plain(e), cap);
  rep.statistics.onechart_vertices = stacked.chart.vertex_count();
  rep.statistics.one_transitions = detail::count_empty_steps(stacked.chart);

  auto [induced, old_of] = reachable_with_map(induced_of(stacked.chart));
  rep.statistics.induced_vertices = induced.vertex_count();

  std::unordered_map<StarExpr, VertexId, StarExprHash> index;
  for (VertexId v = 0; v < plain.states.size(); ++v) index.emplace(plain.states[v], v);
  std::vector<std::optional<VertexId>> f(induced.vertex_count());
  for (VertexId v = 0; v < induced.vertex_count(); ++v) {
    auto it = index.find(project(stacked.states[old_of[v]]));
    if (it == index.end()) {
      rep.failure = "projection of " + render(stacked.states[old_of[v]]) + " is not a vertex of the chart";
      return rep;
    }
    f[v] = it->second;
  }
  auto check = check_functional_bisim(induced, plain.chart, f);
  if (!check.ok()) {
    rep.failure = detail::describe(check, induced, plain.chart);
    return rep;
  }
  rep.passed = true;
  return rep;
}

/// The labeled 1-chart interpretation passes both witness validators.
inline VerifyReport verify_p2(const StarExpr& e, std::size_t cap = default_vertex_cap) {
  VerifyReport rep{render(e), Property::P2, false, {}, std::nullopt};
  OneChartLabeling l;
  try {
    l = labeled_onechart_of(e, cap);
  } catch (const AmbiguousMarking& ex) {
    rep.failure = std::string("ambiguous marking: ") + ex.what();
    return rep;
  }
  rep.statistics.onechart_vertices = l.base.vertex_count();
  rep.statistics.one_transitions = detail::count_empty_steps(l.base);
  rep.statistics.entries = entries_of(l).size();

  auto w = validate_llee(l);
  auto alt = validate_llee_alt(l);
  if (w.valid() && alt.valid()) {
    rep.passed = true;
    return rep;
  }
  std::string s;
  for (const auto& v : w.violations) s += (s.empty() ? "" : "; ") + std::string(to_string(v.condition)) + ": " + v.detail;
  for (const auto& v : alt.violations) s += (s.empty() ? "" : "; ") + std::string(to_string(v.condition)) + ": " + v.detail;
  if (w.valid() != alt.valid()) s = "validators disagree; " + s;
  rep.failure = s;
  return rep;
}

inline ojson to_json_value(const VerifyReport& r) {
  ojson j;
  j["expression"] = r.expression;
  j["property"] = to_string(r.property);
  j["passed"] = r.passed;
  ojson s;
  s["onechart_vertices"] = r.statistics.onechart_vertices;
  s["one_transitions"] = r.statistics.one_transitions;
  s["entries"] = r.statistics.entries ? ojson(*r.statistics.entries) : ojson(nullptr);
  s["induced_vertices"] = r.statistics.induced_vertices ? ojson(*r.statistics.induced_vertices) : ojson(nullptr);
  j["statistics"] = std::move(s);
  if (r.failure) j["failure"] = *r.failure;
  return j;
}

inline VerifyReport report_from_json_value(const ojson& j) {
  using detail::member;
  using detail::schema_fail;
  if (!j.is_object()) schema_fail("", "expected an object");
  VerifyReport r;
  const auto& e = member(j, "", "expression");
  if (!e.is_string()) schema_fail("/expression", "expected a string");
  r.expression = e.get<std::string>();
  const auto& p = member(j, "", "property");
  if (p != "P1" && p != "P2") schema_fail("/property", "expected \"P1\" or \"P2\"");
  r.property = p == "P1" ? Property::P1 : Property::P2;
  const auto& ok = member(j, "", "passed");
  if (!ok.is_boolean()) schema_fail("/passed", "expected a boolean");
  r.passed = ok.get<bool>();
  const auto& s = member(j, "", "statistics");
  if (!s.is_object()) schema_fail("/statistics", "expected an object");
  r.statistics.onechart_vertices = detail::as_index(member(s, "/statistics", "onechart_vertices"), "/statistics/onechart_vertices");
  r.statistics.one_transitions = detail::as_index(member(s, "/statistics", "one_transitions"), "/statistics/one_transitions");
  auto optional_index = [&](const char* key) -> std::optional<std::size_t> {
    const auto& v = member(s, "/statistics", key);
    if (v.is_null()) return std::nullopt;
    return detail::as_index(v, std::string("/statistics/") + key);
  };
  r.statistics.entries = optional_index("entries");
  r.statistics.induced_vertices = optional_index("induced_vertices");
  if (auto f = j.find("failure"); f != j.end()) {
    if (!f->is_string()) schema_fail("/failure", "expected a string");
    r.failure = f->get<std::string>();
  }
  if (r.passed == r.failure.has_value()) schema_fail("/passed", "passed must hold exactly when failure is absent");
  return r;
}

// ---------------------------------------------------------------------------
// Corpus

/// Enumerates terms by AST size. Within a size: constants and actions, then stars, sums and
/// products, each ordered by the sizes of their operands.
class ExprEnumerator {
 public:
  explicit ExprEnumerator(std::vector<Action> alphabet) : alphabet_(std::move(alphabet)) {
    std::sort(alphabet_.begin(), alphabet_.end());
    alphabet_.erase(std::unique(alphabet_.begin(), alphabet_.end()), alphabet_.end());
  }

  const std::vector<StarExpr>& of_size(std::size_t n) {
    while (by_size_.size() <= n) grow();
    return by_size_[n];
  }

 private:
  void grow() {
    std::size_t n = by_size_.size();
    std::vector<StarExpr> level;
    if (n == 1) {
      level.push_back(StarExpr::zero());
      level.push_back(StarExpr::one());
      for (const auto& a : alphabet_) level.push_back(StarExpr::act(a));
    } else if (n >= 2) {
      for (const auto& e : by_size_[n - 1]) level.push_back(StarExpr::star(e));
      for (int op = 0; op < 2; ++op)
        for (std::size_t i = 1; i + 1 < n; ++i)
          for (const auto& l : by_size_[i])
            for (const auto& r : by_size_[n - 1 - i])
              level.push_back(op == 0 ? StarExpr::sum(l, r) : StarExpr::product(l, r));
    }
    by_size_.push_back(std::move(level));
  }

  std::vector<Action> alphabet_;
  std::vector<std::vector<StarExpr>> by_size_;
};

/// All terms with at most max_size nodes, smallest first.
inline std::vector<StarExpr> enumerate_exprs(const std::vector<Action>& alphabet, std::size_t max_size) {
  ExprEnumerator en(alphabet);
  std::vector<StarExpr> r;
  for (std::size_t n = 1; n <= max_size; ++n) {
    const auto& level = en.of_size(n);
    r.insert(r.end(), level.begin(), level.end());
  }
  return r;
}

/// Number of terms of exactly each size 0..max_size (index 0 is 0).
inline std::vector<std::uint64_t> term_counts(std::size_t alphabet_size, std::size_t max_size) {
  std::vector<std::uint64_t> t(max_size + 1, 0);
  constexpr auto top = std::numeric_limits<std::uint64_t>::max();
  if (max_size >= 1) t[1] = 2 + alphabet_size;
  for (std::size_t n = 2; n <= max_size; ++n) {
    unsigned __int128 acc = t[n - 1];
    for (std::size_t i = 1; i + 1 < n; ++i) acc += 2 * static_cast<unsigned __int128>(t[i]) * t[n - 1 - i];
    if (acc > top) throw std::overflow_error("term count overflows at size " + std::to_string(n));
    t[n] = static_cast<std::uint64_t>(acc);
  }
  return t;
}

/// A term drawn uniformly among those of exactly `size` nodes.
template <class Rng>
StarExpr random_expr(const std::vector<Action>& alphabet, std::size_t size, Rng& rng,
                     const std::vector<std::uint64_t>& counts) {
  auto below = [&rng](std::uint64_t bound) { return std::uniform_int_distribution<std::uint64_t>(0, bound - 1)(rng); };
  if (size == 1) {
    auto k = below(2 + alphabet.size());
    if (k == 0) return StarExpr::zero();
    if (k == 1) return StarExpr::one();
    return StarExpr::act(alphabet[k - 2]);
  }
  std::uint64_t pick = below(counts[size]);
  if (pick < counts[size - 1]) return StarExpr::star(random_expr(alphabet, size - 1, rng, counts));
  pick -= counts[size - 1];
  for (int op = 0; op < 2; ++op)
    for (std::size_t i = 1; i + 1 < size; ++i) {
      std::uint64_t w = counts[i] * counts[size - 1 - i];
      if (pick < w) {
        auto l = random_expr(alphabet, i, rng, counts);
        auto r = random_expr(alphabet, size - 1 - i, rng, counts);
        return op == 0 ? StarExpr::sum(l, r) : StarExpr::product(l, r);
      }
      pick -= w;
    }
  throw std::logic_error("random_expr: inconsistent counts");
}

/// `count` terms, sizes uniform in [min_size, max_size], each uniform within its size.
inline std::vector<StarExpr> sample_exprs(std::vector<Action> alphabet, std::size_t count, std::size_t min_size,
                                          std::size_t max_size, std::uint64_t seed) {
  std::sort(alphabet.begin(), alphabet.end());
  std::mt19937_64 rng(seed);
  auto counts = term_counts(alphabet.size(), max_size);
  std::uniform_int_distribution<std::size_t> size_dist(min_size, max_size);
  std::vector<StarExpr> r;
  for (std::size_t k = 0; k < count; ++k) r.push_back(random_expr(alphabet, size_dist(rng), rng, counts));
  return r;
}

struct CorpusOptions {
  std::vector<Action> alphabet{Action("a"), Action("b")};
  std::size_t max_size = 6;
  std::size_t random_count = 500;
  std::size_t random_min_size = 7;
  std::size_t random_max_size = 12;
  std::uint64_t seed = 1;
};

/// Exhaustive part followed by the seeded random part.
inline std::vector<StarExpr> build_corpus(const CorpusOptions& o = {}) {
  auto r = enumerate_exprs(o.alphabet, o.max_size);
  if (o.random_count > 0) {
    auto s = sample_exprs(o.alphabet, o.random_count, o.random_min_size, o.random_max_size, o.seed);
    r.insert(r.end(), s.begin(), s.end());
  }
  return r;
}

}  // namespace loopchart
