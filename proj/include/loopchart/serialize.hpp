#pragma once

#include <json.hpp>

#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <type_traits>
#include <vector>

#include "chart.hpp"
#include "errors.hpp"

namespace loopchart {

using ojson = nlohmann::ordered_json;

namespace detail {

template <class Label>
ojson transition_json(const typename BasicChart<Label>::Transition& t) {
  ojson j;
  j["from"] = t.from;
  j["label"] = label_text(t.label);
  if (is_empty_step(t.label)) j["kind"] = "empty";
  j["to"] = t.to;
  return j;
}

template <class Label>
ojson chart_json(const BasicChart<Label>& c, const std::vector<Marking>* marking) {
  ojson j;
  j["alphabet"] = ojson::array();
  for (const auto& a : c.alphabet()) j["alphabet"].push_back(a.name());
  j["start"] = c.start();
  j["vertices"] = ojson::array();
  for (VertexId v = 0; v < c.vertex_count(); ++v) {
    ojson jv;
    jv["id"] = v;
    jv["terminating"] = c.terminating(v);
    if (c.annotation(v)) jv["annotation"] = *c.annotation(v);
    j["vertices"].push_back(std::move(jv));
  }
  j["transitions"] = ojson::array();
  for (std::size_t t = 0; t < c.transitions().size(); ++t) {
    ojson jt = transition_json<Label>(c.transition(t));
    if (marking) jt["marking"] = (*marking)[t].level();
    j["transitions"].push_back(std::move(jt));
  }
  return j;
}

[[noreturn]] inline void schema_fail(const std::string& ptr, const std::string& why) {
  throw SchemaError(ptr.empty() ? "/" : ptr, why);
}

inline const ojson& member(const ojson& obj, const std::string& ptr, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) schema_fail(ptr, std::string("missing member '") + key + "'");
  return *it;
}

inline std::uint64_t as_index(const ojson& j, const std::string& ptr) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0))
    schema_fail(ptr, "expected a non-negative integer");
  return j.get<std::uint64_t>();
}

template <class Label>
std::pair<BasicChart<Label>, std::vector<Marking>> chart_from(const ojson& j, bool want_marking) {
  if (!j.is_object()) schema_fail("", "expected an object");

  const ojson& alpha = member(j, "", "alphabet");
  if (!alpha.is_array()) schema_fail("/alphabet", "expected an array");
  std::set<Action> alphabet;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    std::string p = "/alphabet/" + std::to_string(i);
    if (!alpha[i].is_string() || !Action::is_valid(alpha[i].get<std::string>()))
      schema_fail(p, "expected an action name");
    if (!alphabet.insert(Action(alpha[i].get<std::string>())).second) schema_fail(p, "duplicate action");
  }

  const ojson& verts = member(j, "", "vertices");
  if (!verts.is_array() || verts.empty()) schema_fail("/vertices", "expected a non-empty array");
  const std::size_t n = verts.size();
  std::vector<char> seen(n, 0), term(n, 0);
  std::vector<std::optional<std::string>> notes(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::string p = "/vertices/" + std::to_string(i);
    if (!verts[i].is_object()) schema_fail(p, "expected an object");
    auto id = as_index(member(verts[i], p, "id"), p + "/id");
    if (id >= n) schema_fail(p + "/id", "vertex ids must be 0.." + std::to_string(n - 1));
    if (seen[id]) schema_fail(p + "/id", "duplicate vertex id");
    seen[id] = 1;
    const ojson& t = member(verts[i], p, "terminating");
    if (!t.is_boolean()) schema_fail(p + "/terminating", "expected a boolean");
    term[id] = t.get<bool>();
    if (auto a = verts[i].find("annotation"); a != verts[i].end()) {
      if (!a->is_string()) schema_fail(p + "/annotation", "expected a string");
      notes[id] = a->get<std::string>();
    }
  }

  auto start = as_index(member(j, "", "start"), "/start");
  if (start >= n) schema_fail("/start", "unknown vertex");

  BasicChart<Label> c(n, static_cast<VertexId>(start));
  for (const auto& a : alphabet) c.add_action(a);
  for (VertexId v = 0; v < n; ++v) {
    c.set_terminating(v, term[v]);
    if (notes[v]) c.set_annotation(v, *notes[v]);
  }

  std::vector<Marking> marks;
  const ojson& trans = member(j, "", "transitions");
  if (!trans.is_array()) schema_fail("/transitions", "expected an array");
  for (std::size_t i = 0; i < trans.size(); ++i) {
    std::string p = "/transitions/" + std::to_string(i);
    const ojson& jt = trans[i];
    if (!jt.is_object()) schema_fail(p, "expected an object");
    auto from = as_index(member(jt, p, "from"), p + "/from");
    auto to = as_index(member(jt, p, "to"), p + "/to");
    if (from >= n) schema_fail(p + "/from", "unknown vertex");
    if (to >= n) schema_fail(p + "/to", "unknown vertex");
    const ojson& jl = member(jt, p, "label");
    if (!jl.is_string()) schema_fail(p + "/label", "expected a string");
    std::string text = jl.get<std::string>();
    bool empty = false;
    if (auto k = jt.find("kind"); k != jt.end()) {
      if (!k->is_string() || k->get<std::string>() != "empty")
        schema_fail(p + "/kind", "only \"empty\" is allowed");
      if (text != "1") schema_fail(p + "/label", "empty steps are labelled \"1\"");
      if constexpr (std::is_same_v<Label, Action>)
        schema_fail(p + "/kind", "empty steps are not allowed in a chart");
      empty = true;
    }
    std::optional<Label> label;
    if (empty) {
      if constexpr (std::is_same_v<Label, StepLabel>) label = StepLabel::empty();
    } else {
      if (!Action::is_valid(text)) schema_fail(p + "/label", "expected an action name");
      Action a(text);
      if (!alphabet.count(a)) schema_fail(p + "/label", "label not in alphabet");
      if constexpr (std::is_same_v<Label, Action>) label = a;
      else label = StepLabel(a);
    }
    std::size_t before = c.transitions().size();
    c.add_transition(static_cast<VertexId>(from), *label, static_cast<VertexId>(to));
    if (c.transitions().size() == before) schema_fail(p, "duplicate transition");
    if (want_marking) {
      auto level = as_index(member(jt, p, "marking"), p + "/marking");
      marks.push_back(Marking::from_level(static_cast<unsigned>(level)));
    }
  }
  return {std::move(c), std::move(marks)};
}

inline ojson parse_text(const std::string& text) {
  try {
    return ojson::parse(text);
  } catch (const ojson::parse_error& e) {
    schema_fail("", std::string("malformed JSON: ") + e.what());
  }
}

}  // namespace detail

template <class Label>
ojson to_json_value(const BasicChart<Label>& c) {
  return detail::chart_json(c, nullptr);
}

template <class Label>
ojson to_json_value(const Labeling<Label>& l) {
  return detail::chart_json(l.base, &l.marking);
}

template <class Label>
std::string to_json(const BasicChart<Label>& c) {
  return to_json_value(c).dump();
}

template <class Label>
std::string to_json(const Labeling<Label>& l) {
  return to_json_value(l).dump();
}

template <class ChartT>
ChartT chart_from_json_value(const ojson& j) {
  return detail::chart_from<typename ChartT::label_type>(j, false).first;
}

template <class Label>
Labeling<Label> labeling_from_json_value(const ojson& j) {
  auto [c, m] = detail::chart_from<Label>(j, true);
  return Labeling<Label>(std::move(c), std::move(m));
}

/// `from_json<Chart>(text)` or `from_json<OneChart>(text)`.
template <class ChartT>
ChartT from_json(const std::string& text) {
  return chart_from_json_value<ChartT>(detail::parse_text(text));
}

template <class Label>
Labeling<Label> labeling_from_json(const std::string& text) {
  return labeling_from_json_value<Label>(detail::parse_text(text));
}

/// Pairs as JSON arrays of two-element arrays.
inline ojson pairs_json(const std::vector<std::pair<VertexId, VertexId>>& pairs) {
  ojson j = ojson::array();
  for (auto [p, q] : pairs) j.push_back(ojson::array({p, q}));
  return j;
}

inline std::vector<std::pair<VertexId, VertexId>> pairs_from_json(const ojson& j) {
  if (!j.is_array()) detail::schema_fail("", "expected an array of pairs");
  std::vector<std::pair<VertexId, VertexId>> r;
  for (std::size_t i = 0; i < j.size(); ++i) {
    std::string p = "/" + std::to_string(i);
    if (!j[i].is_array() || j[i].size() != 2) detail::schema_fail(p, "expected a pair");
    r.emplace_back(static_cast<VertexId>(detail::as_index(j[i][0], p + "/0")),
                   static_cast<VertexId>(detail::as_index(j[i][1], p + "/1")));
  }
  return r;
}

// ---------------------------------------------------------------------------
// DOT

struct DotOptions {
  bool annotations = true;
  std::string name = "chart";
};

namespace detail {

inline std::string dot_quote(const std::string& s) {
  std::string r = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') r += '\\';
    r += c;
  }
  return r + '"';
}

template <class Label>
std::string dot_of(const BasicChart<Label>& c, const std::vector<Marking>* marking, const DotOptions& opt) {
  std::ostringstream os;
  os << "digraph " << dot_quote(opt.name) << " {\n";
  os << "  node [shape=circle];\n";
  os << "  __start [shape=point];\n";
  os << "  __start -> v" << c.start() << ";\n";
  for (VertexId v = 0; v < c.vertex_count(); ++v) {
    std::string label = opt.annotations && c.annotation(v) ? *c.annotation(v) : std::to_string(v);
    os << "  v" << v << " [label=" << dot_quote(label);
    if (c.terminating(v)) os << ", shape=doublecircle";
    os << "];\n";
  }
  for (std::size_t t = 0; t < c.transitions().size(); ++t) {
    const auto& tr = c.transition(t);
    std::string label = label_text(tr.label);
    if (marking && (*marking)[t].is_entry()) label += " [" + std::to_string((*marking)[t].level()) + "]";
    os << "  v" << tr.from << " -> v" << tr.to << " [label=" << dot_quote(label);
    if (is_empty_step(tr.label)) os << ", style=dotted";
    os << "];\n";
  }
  os << "}\n";
  return os.str();
}

template <class Label>
std::string text_of(const BasicChart<Label>& c, const std::vector<Marking>* marking) {
  std::ostringstream os;
  os << "vertices " << c.vertex_count() << ", transitions " << c.transitions().size() << ", start "
     << c.start() << "\n";
  for (VertexId v = 0; v < c.vertex_count(); ++v) {
    os << "  " << v << (c.terminating(v) ? " (terminating)" : "");
    if (c.annotation(v)) os << "  " << *c.annotation(v);
    os << "\n";
  }
  for (std::size_t t = 0; t < c.transitions().size(); ++t) {
    const auto& tr = c.transition(t);
    os << "  " << tr.from << " -" << label_text(tr.label) << "-> " << tr.to;
    if (marking) {
      if ((*marking)[t].is_entry()) os << "  [" << (*marking)[t].level() << "]";
      else os << "  bo";
    }
    os << "\n";
  }
  return os.str();
}

}  // namespace detail

template <class Label>
std::string to_dot(const BasicChart<Label>& c, const DotOptions& opt = {}) {
  return detail::dot_of(c, nullptr, opt);
}

template <class Label>
std::string to_dot(const Labeling<Label>& l, const DotOptions& opt = {}) {
  return detail::dot_of(l.base, &l.marking, opt);
}

template <class Label>
std::string to_text(const BasicChart<Label>& c) {
  return detail::text_of(c, nullptr);
}

template <class Label>
std::string to_text(const Labeling<Label>& l) {
  return detail::text_of(l.base, &l.marking);
}

}  // namespace loopchart
