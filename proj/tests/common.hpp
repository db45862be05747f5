#pragma once

#include <loopchart/loopchart.hpp>

#include <algorithm>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fixtures {

using namespace loopchart;

inline const std::string g_text = "(c.a + a.(b + b.a))*";
inline const std::string g0_text = "((1.a).(c.a + a.(b + b.a))*).0";
inline const std::string e_text = "(a*.b*)*";
inline const std::string b0_text = "a1.(1 + b1.0) + (a2.(1 + b2.0) + a3.(1 + b3.0))";
inline const std::string f_text = "(a1.(1 + b1.0) + (a2.(1 + b2.0) + a3.(1 + b3.0)))*.0";

inline StarExpr g0() { return parse_star_expr(g0_text); }
inline StarExpr e() { return parse_star_expr(e_text); }
inline StarExpr f() { return parse_star_expr(f_text); }

inline std::string read(const std::string& name) {
  std::ifstream in(std::string(LOOPCHART_FIXTURE_DIR) + "/" + name);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline Chart ne1() { return from_json<Chart>(read("ne1.json")); }
inline Chart ne2() { return from_json<Chart>(read("ne2.json")); }

/// Vertex whose annotation is the rendering of `text` parsed as a stacked expression.
template <class Label>
std::optional<VertexId> vertex_of(const BasicChart<Label>& c, const std::string& text) {
  std::string want = render(parse_stacked_expr(text));
  for (VertexId v = 0; v < c.vertex_count(); ++v)
    if (c.annotation(v) && *c.annotation(v) == want) return v;
  return std::nullopt;
}

template <class Label>
std::optional<std::size_t> transition_of(const BasicChart<Label>& c, VertexId from, const std::string& label,
                                         VertexId to) {
  for (std::size_t t = 0; t < c.transitions().size(); ++t) {
    const auto& tr = c.transition(t);
    if (tr.from == from && tr.to == to && label_text(tr.label) == label) return t;
  }
  return std::nullopt;
}

/// Checks that an Entry(n) step from `src` comes from the star at the end of the left spine
/// of src's innermost plain part, with n the star's height, and that `dst` stacks a
/// derivative of the star's body onto it in the same context.
inline std::optional<std::string> entry_shape_violation(const StackedExpr& src, const StepLabel& label,
                                                        const StackedExpr& dst, unsigned level) {
  auto [ctx, core] = decompose(src);
  std::vector<StarExpr> tails;
  StarExpr x = core;
  while (x.is(StarExpr::Kind::product)) tails.push_back(x.right()), x = x.left();
  if (!x.is(StarExpr::Kind::star)) return "left spine of " + render(core) + " does not end in a star";
  if (level != star_height(x.body()) + 1)
    return "level " + std::to_string(level) + " but star height of body is " + std::to_string(star_height(x.body()));
  AppCxt inner = AppCxt::hole();
  for (auto it = tails.rbegin(); it != tails.rend(); ++it) inner = inner.wrap_product(*it);
  for (const auto& layer : ctx.layers())
    inner = layer.op == AppCxt::Op::product ? inner.wrap_product(layer.tail) : inner.wrap_stack(layer.tail);
  for (const auto& [l, d] : steps_stacked(StackedExpr::plain(x.body())))
    if (l == label && fill(inner, StackedExpr::stack(d, x)) == dst) return std::nullopt;
  return "target " + render(dst) + " is not a stacked derivative of " + render(x);
}

/// Normedness straight from the definitions, by search over (state, seen a proper step).
inline Normedness naive_normedness(const StackedExpr& start) {
  Normedness r;
  std::vector<std::pair<StackedExpr, bool>> work{{start, false}};
  std::vector<std::pair<StackedExpr, bool>> seen{{start, false}};
  while (!work.empty()) {
    auto [s, positive] = work.back();
    work.pop_back();
    if (terminates_stacked(s)) {
      r.normed = true;
      if (positive) r.normed_plus = true;
    }
    for (const auto& [l, t] : steps_stacked(s)) {
      std::pair<StackedExpr, bool> next{t, positive || !l.is_empty()};
      if (std::find(seen.begin(), seen.end(), next) == seen.end()) seen.push_back(next), work.push_back(next);
    }
  }
  return r;
}

}  // namespace fixtures
