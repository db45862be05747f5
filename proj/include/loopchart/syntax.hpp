#pragma once

#include <algorithm>
#include <cctype>
#include <compare>
#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace loopchart {

namespace detail {
inline std::size_t hash_mix(std::size_t seed, std::size_t v) noexcept {
  return seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}
}  // namespace detail

/// An action name: letters followed by optional digits (`a`, `b2`).
class Action {
 public:
  explicit Action(std::string name) : name_(std::move(name)) {
    if (!is_valid(name_)) throw std::invalid_argument("invalid action name '" + name_ + "'");
  }

  static bool is_valid(std::string_view s) noexcept {
    std::size_t i = 0;
    while (i < s.size() && std::isalpha(static_cast<unsigned char>(s[i]))) ++i;
    if (i == 0) return false;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
    return i == s.size();
  }

  const std::string& name() const noexcept { return name_; }

  friend bool operator==(const Action&, const Action&) = default;
  friend auto operator<=>(const Action&, const Action&) = default;

 private:
  std::string name_;
};

inline std::ostream& operator<<(std::ostream& os, const Action& a) { return os << a.name(); }

/// Immutable star expression; subterms are shared.
class StarExpr {
 public:
  enum class Kind : std::uint8_t { zero, one, action, sum, product, star };

  static StarExpr zero() { return make(Kind::zero, {}, {}, {}); }
  static StarExpr one() { return make(Kind::one, {}, {}, {}); }
  static StarExpr act(Action a) { return make(Kind::action, a.name(), {}, {}); }
  static StarExpr act(std::string name) { return act(Action(std::move(name))); }
  static StarExpr sum(StarExpr l, StarExpr r) { return make(Kind::sum, {}, std::move(l), std::move(r)); }
  static StarExpr product(StarExpr l, StarExpr r) {
    return make(Kind::product, {}, std::move(l), std::move(r));
  }
  static StarExpr star(StarExpr body) { return make(Kind::star, {}, std::move(body), {}); }

  Kind kind() const noexcept;
  bool is(Kind k) const noexcept { return kind() == k; }
  Action action() const { return Action(action_name()); }
  const std::string& action_name() const noexcept;
  const StarExpr& left() const noexcept;
  const StarExpr& right() const noexcept;
  const StarExpr& body() const noexcept { return left(); }

  std::size_t hash() const noexcept;
  /// Number of AST nodes.
  std::size_t size() const noexcept;
  unsigned height() const noexcept;
  bool terminates() const noexcept;

  friend bool operator==(const StarExpr& x, const StarExpr& y) noexcept;
  friend std::strong_ordering operator<=>(const StarExpr& x, const StarExpr& y) noexcept;

 private:
  friend class StackedExpr;
  struct Node;
  StarExpr() = default;
  explicit StarExpr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  static StarExpr make(Kind k, std::string name, StarExpr l, StarExpr r);

  std::shared_ptr<const Node> node_;
};

struct StarExpr::Node {
  Kind kind;
  std::string name;
  StarExpr l, r;
  std::size_t hash = 0;
  std::size_t size = 1;
  unsigned height = 0;
  bool terminates = false;
};

inline StarExpr::Kind StarExpr::kind() const noexcept { return node_->kind; }
inline const std::string& StarExpr::action_name() const noexcept { return node_->name; }
inline const StarExpr& StarExpr::left() const noexcept { return node_->l; }
inline const StarExpr& StarExpr::right() const noexcept { return node_->r; }
inline std::size_t StarExpr::hash() const noexcept { return node_->hash; }
inline std::size_t StarExpr::size() const noexcept { return node_->size; }
inline unsigned StarExpr::height() const noexcept { return node_->height; }
inline bool StarExpr::terminates() const noexcept { return node_->terminates; }

inline bool operator==(const StarExpr& x, const StarExpr& y) noexcept {
  if (x.node_ == y.node_) return true;
  if (x.node_->hash != y.node_->hash || x.node_->kind != y.node_->kind ||
      x.node_->size != y.node_->size)
    return false;
  switch (x.kind()) {
    case StarExpr::Kind::zero:
    case StarExpr::Kind::one: return true;
    case StarExpr::Kind::action: return x.node_->name == y.node_->name;
    case StarExpr::Kind::star: return x.body() == y.body();
    default: return x.left() == y.left() && x.right() == y.right();
  }
}

inline std::strong_ordering operator<=>(const StarExpr& x, const StarExpr& y) noexcept {
  if (x.node_ == y.node_) return std::strong_ordering::equal;
  if (auto c = x.kind() <=> y.kind(); c != 0) return c;
  switch (x.kind()) {
    case StarExpr::Kind::zero:
    case StarExpr::Kind::one: return std::strong_ordering::equal;
    case StarExpr::Kind::action: return x.node_->name <=> y.node_->name;
    case StarExpr::Kind::star: return x.body() <=> y.body();
    default:
      if (auto c = x.left() <=> y.left(); c != 0) return c;
      return x.right() <=> y.right();
  }
}

inline StarExpr StarExpr::make(Kind k, std::string name, StarExpr l, StarExpr r) {
  auto n = std::make_shared<Node>();
  n->kind = k;
  n->name = std::move(name);
  n->hash = detail::hash_mix(static_cast<std::size_t>(k) * 131, std::hash<std::string>{}(n->name));
  switch (k) {
    case Kind::zero: break;
    case Kind::one: n->terminates = true; break;
    case Kind::action: break;
    case Kind::star:
      n->size = 1 + l.size();
      n->height = 1 + l.height();
      n->terminates = true;
      n->hash = detail::hash_mix(n->hash, l.hash());
      break;
    case Kind::sum:
    case Kind::product:
      n->size = 1 + l.size() + r.size();
      n->height = std::max(l.height(), r.height());
      n->terminates = k == Kind::sum ? (l.terminates() || r.terminates())
                                     : (l.terminates() && r.terminates());
      n->hash = detail::hash_mix(detail::hash_mix(n->hash, l.hash()), r.hash());
      break;
  }
  n->l = std::move(l);
  n->r = std::move(r);
  return StarExpr(std::move(n));
}

/// A star expression under layers of `·` and the stacked product (rendered `@`).
///
/// A product whose head is plain is stored as the plain product, so each value has one
/// representation.
class StackedExpr {
 public:
  enum class Kind : std::uint8_t { plain, product, stack };

  static StackedExpr plain(StarExpr e) { return make(Kind::plain, std::move(e), {}); }

  static StackedExpr product(StackedExpr head, StarExpr tail) {
    if (head.is_plain()) return plain(StarExpr::product(head.expr(), std::move(tail)));
    return make(Kind::product, std::move(tail), std::move(head));
  }

  static StackedExpr stack(StackedExpr head, StarExpr tail) {
    if (!tail.is(StarExpr::Kind::star))
      throw std::invalid_argument("stacked product needs a starred right operand");
    return make(Kind::stack, std::move(tail), std::move(head));
  }

  Kind kind() const noexcept;
  bool is_plain() const noexcept { return kind() == Kind::plain; }
  /// The plain expression (plain) or the right operand (product, stack).
  const StarExpr& expr() const noexcept;
  const StarExpr& tail() const noexcept { return expr(); }
  const StackedExpr& head() const noexcept;

  std::size_t hash() const noexcept;
  unsigned height() const noexcept;

  friend bool operator==(const StackedExpr& x, const StackedExpr& y) noexcept;
  friend std::strong_ordering operator<=>(const StackedExpr& x, const StackedExpr& y) noexcept;

 private:
  struct Node;
  StackedExpr() = default;
  explicit StackedExpr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  static StackedExpr make(Kind k, StarExpr e, StackedExpr head);

  std::shared_ptr<const Node> node_;
};

struct StackedExpr::Node {
  Kind kind;
  StarExpr expr;
  StackedExpr head;
  std::size_t hash = 0;
  unsigned height = 0;
};

inline StackedExpr::Kind StackedExpr::kind() const noexcept { return node_->kind; }
inline const StarExpr& StackedExpr::expr() const noexcept { return node_->expr; }
inline const StackedExpr& StackedExpr::head() const noexcept { return node_->head; }
inline std::size_t StackedExpr::hash() const noexcept { return node_->hash; }
inline unsigned StackedExpr::height() const noexcept { return node_->height; }

inline bool operator==(const StackedExpr& x, const StackedExpr& y) noexcept {
  if (x.node_ == y.node_) return true;
  if (x.node_->hash != y.node_->hash || x.kind() != y.kind()) return false;
  if (!(x.expr() == y.expr())) return false;
  return x.is_plain() || x.head() == y.head();
}

inline std::strong_ordering operator<=>(const StackedExpr& x, const StackedExpr& y) noexcept {
  if (x.node_ == y.node_) return std::strong_ordering::equal;
  if (auto c = x.kind() <=> y.kind(); c != 0) return c;
  if (!x.is_plain())
    if (auto c = x.head() <=> y.head(); c != 0) return c;
  return x.expr() <=> y.expr();
}

inline StackedExpr StackedExpr::make(Kind k, StarExpr e, StackedExpr head) {
  auto n = std::make_shared<Node>();
  n->kind = k;
  n->hash = detail::hash_mix(0x51ed + static_cast<std::size_t>(k), e.hash());
  n->height = e.height();
  if (k != Kind::plain) {
    n->hash = detail::hash_mix(n->hash, head.hash());
    n->height = std::max(n->height, head.height());
  }
  n->expr = std::move(e);
  n->head = std::move(head);
  return StackedExpr(std::move(n));
}

struct StarExprHash {
  std::size_t operator()(const StarExpr& e) const noexcept { return e.hash(); }
};
struct StackedExprHash {
  std::size_t operator()(const StackedExpr& e) const noexcept { return e.hash(); }
};

inline unsigned star_height(const StarExpr& e) noexcept { return e.height(); }
inline unsigned star_height(const StackedExpr& e) noexcept { return e.height(); }

/// Reads every stacked product as an ordinary product.
inline StarExpr project(const StackedExpr& e) {
  if (e.is_plain()) return e.expr();
  return StarExpr::product(project(e.head()), e.tail());
}

/// Applicative context: a hole under product and stack layers.
class AppCxt {
 public:
  enum class Op : std::uint8_t { product, stack };
  struct Layer {
    Op op;
    StarExpr tail;
    friend bool operator==(const Layer&, const Layer&) = default;
  };

  static AppCxt hole() { return {}; }
  AppCxt wrap_product(StarExpr tail) const { return wrapped(Op::product, std::move(tail)); }
  AppCxt wrap_stack(StarExpr tail) const {
    if (!tail.is(StarExpr::Kind::star))
      throw std::invalid_argument("stack layer needs a starred operand");
    return wrapped(Op::stack, std::move(tail));
  }

  bool is_hole() const noexcept { return layers_.empty(); }
  /// Innermost layer first.
  const std::vector<Layer>& layers() const noexcept { return layers_; }

  friend bool operator==(const AppCxt&, const AppCxt&) = default;

 private:
  AppCxt wrapped(Op op, StarExpr tail) const {
    AppCxt c = *this;
    c.layers_.push_back({op, std::move(tail)});
    return c;
  }
  std::vector<Layer> layers_;
};

inline StackedExpr fill(const AppCxt& c, StackedExpr e) {
  for (const auto& layer : c.layers())
    e = layer.op == AppCxt::Op::product ? StackedExpr::product(std::move(e), layer.tail)
                                        : StackedExpr::stack(std::move(e), layer.tail);
  return e;
}

inline std::pair<AppCxt, StarExpr> decompose(const StackedExpr& e) {
  std::vector<AppCxt::Layer> outer_first;
  const StackedExpr* cur = &e;
  while (!cur->is_plain()) {
    outer_first.push_back({cur->kind() == StackedExpr::Kind::product ? AppCxt::Op::product
                                                                     : AppCxt::Op::stack,
                           cur->tail()});
    cur = &cur->head();
  }
  AppCxt c;
  for (auto it = outer_first.rbegin(); it != outer_first.rend(); ++it)
    c = it->op == AppCxt::Op::product ? c.wrap_product(it->tail) : c.wrap_stack(it->tail);
  return {std::move(c), cur->expr()};
}

// ---------------------------------------------------------------------------
// Rendering

namespace detail {
enum prec : int { p_sum = 1, p_prod = 2, p_star = 3, p_atom = 4 };

inline void render_into(std::string& out, const StarExpr& e, int min_prec) {
  using K = StarExpr::Kind;
  int p = e.is(K::sum) ? p_sum : e.is(K::product) ? p_prod : e.is(K::star) ? p_star : p_atom;
  bool paren = p < min_prec;
  if (paren) out += '(';
  switch (e.kind()) {
    case K::zero: out += '0'; break;
    case K::one: out += '1'; break;
    case K::action: out += e.action_name(); break;
    case K::sum:
      render_into(out, e.left(), p_sum);
      out += " + ";
      render_into(out, e.right(), p_prod);
      break;
    case K::product:
      render_into(out, e.left(), p_prod);
      out += '.';
      render_into(out, e.right(), p_star);
      break;
    case K::star:
      render_into(out, e.body(), p_star);
      out += '*';
      break;
  }
  if (paren) out += ')';
}

inline void render_into(std::string& out, const StackedExpr& e) {
  switch (e.kind()) {
    case StackedExpr::Kind::plain: render_into(out, e.expr(), p_prod); return;
    case StackedExpr::Kind::product:
      render_into(out, e.head());
      out += '.';
      render_into(out, e.tail(), p_star);
      return;
    case StackedExpr::Kind::stack:
      render_into(out, e.head());
      out += " @ ";
      render_into(out, e.tail(), p_star);
      return;
  }
}
}  // namespace detail

inline std::string render(const StarExpr& e) {
  std::string out;
  detail::render_into(out, e, detail::p_sum);
  return out;
}

inline std::string render(const StackedExpr& e) {
  if (e.is_plain()) return render(e.expr());
  std::string out;
  detail::render_into(out, e);
  return out;
}

inline std::ostream& operator<<(std::ostream& os, const StarExpr& e) { return os << render(e); }
inline std::ostream& operator<<(std::ostream& os, const StackedExpr& e) { return os << render(e); }

// ---------------------------------------------------------------------------
// Parsing

namespace detail {

class Parser {
 public:
  explicit Parser(std::string_view text, bool allow_stack) : s_(text), allow_stack_(allow_stack) {}

  StackedExpr parse_all() {
    StackedExpr e = parse_sum();
    skip_ws();
    if (pos_ != s_.size()) fail(allow_stack_ ? std::vector<std::string>{"+", ".", "@", "*", "end of input"}
                                             : std::vector<std::string>{"+", ".", "*", "end of input"});
    return e;
  }

 private:
  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  [[noreturn]] void fail(std::vector<std::string> expected) const { fail_at(pos_, std::move(expected)); }

  [[noreturn]] void fail_at(std::size_t at, std::vector<std::string> expected,
                            const std::string& note = {}) const {
    std::string found = at < s_.size() ? "'" + std::string(1, s_[at]) + "'" : "end of input";
    std::string msg = "parse error at offset " + std::to_string(at) + ": ";
    if (!note.empty()) {
      msg += note;
    } else {
      msg += "expected ";
      for (std::size_t i = 0; i < expected.size(); ++i) msg += (i ? ", " : "") + expected[i];
      msg += ", found " + found;
    }
    throw ParseError(at, std::move(expected), msg);
  }

  StarExpr need_plain(const StackedExpr& e, std::size_t at) const {
    if (!e.is_plain()) fail_at(at, {"star expression"}, "stacked operand not allowed here");
    return e.expr();
  }

  StackedExpr parse_sum() {
    skip_ws();
    std::size_t at = pos_;
    StackedExpr acc = parse_prod();
    for (;;) {
      skip_ws();
      if (pos_ >= s_.size() || s_[pos_] != '+') return acc;
      ++pos_;
      skip_ws();
      std::size_t rat = pos_;
      StackedExpr rhs = parse_prod();
      acc = StackedExpr::plain(StarExpr::sum(need_plain(acc, at), need_plain(rhs, rat)));
    }
  }

  StackedExpr parse_prod() {
    StackedExpr acc = parse_star();
    for (;;) {
      skip_ws();
      if (pos_ >= s_.size()) return acc;
      char c = s_[pos_];
      if (c != '.' && !(allow_stack_ && c == '@')) return acc;
      ++pos_;
      skip_ws();
      std::size_t rat = pos_;
      StarExpr rhs = need_plain(parse_star(), rat);
      if (c == '.') {
        acc = StackedExpr::product(std::move(acc), std::move(rhs));
      } else {
        if (!rhs.is(StarExpr::Kind::star))
          fail_at(rat, {"starred expression"}, "right operand of '@' must be starred");
        acc = StackedExpr::stack(std::move(acc), std::move(rhs));
      }
    }
  }

  StackedExpr parse_star() {
    std::size_t at = pos_;
    StackedExpr e = parse_atom();
    for (;;) {
      skip_ws();
      if (pos_ >= s_.size() || s_[pos_] != '*') return e;
      ++pos_;
      e = StackedExpr::plain(StarExpr::star(need_plain(e, at)));
    }
  }

  StackedExpr parse_atom() {
    skip_ws();
    static const std::vector<std::string> atom_start{"0", "1", "identifier", "("};
    if (pos_ >= s_.size()) fail(atom_start);
    char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      StackedExpr e = parse_sum();
      skip_ws();
      if (pos_ >= s_.size() || s_[pos_] != ')')
        fail(allow_stack_ ? std::vector<std::string>{"+", ".", "@", "*", ")"}
                          : std::vector<std::string>{"+", ".", "*", ")"});
      ++pos_;
      return e;
    }
    if (c == '0' || c == '1') {
      std::size_t at = pos_++;
      if (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_])))
        fail_at(at, atom_start, "malformed literal");
      return StackedExpr::plain(c == '0' ? StarExpr::zero() : StarExpr::one());
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t start = pos_;
      while (pos_ < s_.size() && std::isalpha(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      if (pos_ < s_.size() && std::isalpha(static_cast<unsigned char>(s_[pos_])))
        fail_at(start, {"identifier"}, "identifier letters must precede digits");
      return StackedExpr::plain(StarExpr::act(std::string(s_.substr(start, pos_ - start))));
    }
    fail(atom_start);
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  bool allow_stack_;
};

}  // namespace detail

/// Precedence `*` > `.` > `+`; both infix operators are left-associative.
inline StarExpr parse_star_expr(std::string_view text) {
  return detail::Parser(text, false).parse_all().expr();
}

/// Same grammar, with `@` for the stacked product at the level of `.`.
inline StackedExpr parse_stacked_expr(std::string_view text) {
  return detail::Parser(text, true).parse_all();
}

}  // namespace loopchart
