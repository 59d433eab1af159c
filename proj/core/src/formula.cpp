#include <algorithm>
#include <cctype>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "ddlab/definability.hpp"
#include "ddlab/errors.hpp"

namespace ddlab {

// ----------------------------------------------------------- equality types

EqualityType::EqualityType(unsigned arity, PointSet params, std::vector<std::uint32_t> block_of,
                           std::vector<std::optional<Point>> block_value)
    : arity_(arity),
      params_(std::move(params)),
      block_of_(std::move(block_of)),
      block_value_(std::move(block_value)) {
  if (block_of_.size() != arity_) throw std::invalid_argument("block_of length differs from arity");
  std::uint32_t next = 0;
  for (std::uint32_t b : block_of_) {
    if (b > next) throw std::invalid_argument("blocks must be numbered by first occurrence");
    if (b == next) ++next;
  }
  if (block_value_.size() != next) throw std::invalid_argument("one value slot per block");
  std::set<Point> used;
  for (const auto& v : block_value_) {
    if (!v) continue;
    if (!contains(params_, *v)) throw std::invalid_argument("block value is not a parameter");
    if (!used.insert(*v).second) throw std::invalid_argument("two blocks share one parameter");
  }
}

EqualityType EqualityType::of(std::span<const Point> tuple, const PointSet& params) {
  std::vector<std::uint32_t> block_of(tuple.size());
  std::vector<Point> first;
  std::vector<std::optional<Point>> value;
  for (std::size_t i = 0; i < tuple.size(); ++i) {
    const auto it = std::find(first.begin(), first.end(), tuple[i]);
    if (it != first.end()) {
      block_of[i] = static_cast<std::uint32_t>(it - first.begin());
      continue;
    }
    block_of[i] = static_cast<std::uint32_t>(first.size());
    first.push_back(tuple[i]);
    value.push_back(contains(params, tuple[i]) ? std::optional<Point>(tuple[i]) : std::nullopt);
  }
  return EqualityType(static_cast<unsigned>(tuple.size()), params, std::move(block_of),
                      std::move(value));
}

std::size_t EqualityType::fresh_blocks() const {
  return static_cast<std::size_t>(std::count(block_value_.begin(), block_value_.end(), std::nullopt));
}

bool EqualityType::realizable(std::size_t ground_size) const {
  if (!params_.empty() && params_.back() >= ground_size) return false;
  return params_.size() <= ground_size && ground_size - params_.size() >= fresh_blocks();
}

Tuple EqualityType::representative(std::size_t ground_size) const {
  if (!realizable(ground_size)) throw std::invalid_argument("equality type is not realizable");
  std::vector<Point> labels(block_value_.size());
  Point candidate = 0;
  for (std::size_t b = 0; b < block_value_.size(); ++b) {
    if (block_value_[b]) {
      labels[b] = *block_value_[b];
      continue;
    }
    while (contains(params_, candidate)) ++candidate;
    labels[b] = candidate++;
  }
  Tuple t(arity_);
  for (unsigned i = 0; i < arity_; ++i) t[i] = labels[block_of_[i]];
  return t;
}

std::vector<EqualityType> enumerate_equality_types(unsigned arity, const PointSet& params,
                                                   std::size_t ground_size) {
  std::vector<EqualityType> out;
  std::vector<std::uint32_t> block_of(arity);
  std::vector<std::optional<Point>> value;
  std::vector<bool> used(params.size(), false);
  std::function<void(unsigned)> rec = [&](unsigned pos) {
    if (pos == arity) {
      EqualityType t(arity, params, block_of, value);
      if (t.realizable(ground_size)) out.push_back(std::move(t));
      return;
    }
    const auto blocks = static_cast<std::uint32_t>(value.size());
    for (std::uint32_t b = 0; b < blocks; ++b) {
      block_of[pos] = b;
      rec(pos + 1);
    }
    block_of[pos] = blocks;
    value.push_back(std::nullopt);
    rec(pos + 1);
    for (std::size_t p = 0; p < params.size(); ++p) {
      if (used[p]) continue;
      used[p] = true;
      value.back() = params[p];
      rec(pos + 1);
      used[p] = false;
    }
    value.pop_back();
  };
  rec(0);
  std::sort(out.begin(), out.end());
  return out;
}

// ----------------------------------------------------------------- formulas

FormulaNode FormulaNode::atom(Term a, Term b) {
  FormulaNode n;
  n.kind = Kind::atom;
  n.lhs = std::min(a, b);
  n.rhs = std::max(a, b);
  return n;
}

FormulaNode FormulaNode::negation(FormulaNode inner) {
  FormulaNode n;
  n.kind = Kind::negation;
  n.children.push_back(std::move(inner));
  return n;
}

FormulaNode FormulaNode::conjunction(std::vector<FormulaNode> parts) {
  FormulaNode n;
  n.kind = Kind::conjunction;
  n.children = std::move(parts);
  return n;
}

FormulaNode FormulaNode::disjunction(std::vector<FormulaNode> parts) {
  FormulaNode n;
  n.kind = Kind::disjunction;
  n.children = std::move(parts);
  return n;
}

bool operator==(const FormulaNode& a, const FormulaNode& b) {
  if (a.kind != b.kind) return false;
  if (a.kind == FormulaNode::Kind::atom) return a.lhs == b.lhs && a.rhs == b.rhs;
  return a.children == b.children;
}

namespace {

Point term_value(const Term& t, std::span<const Point> tuple) {
  if (t.is_constant) return t.index;
  if (t.index >= tuple.size()) throw ArityMismatch("variable index beyond the tuple length");
  return tuple[t.index];
}

bool eval_node(const FormulaNode& n, std::span<const Point> tuple) {
  switch (n.kind) {
    case FormulaNode::Kind::atom:
      return term_value(n.lhs, tuple) == term_value(n.rhs, tuple);
    case FormulaNode::Kind::negation:
      return !eval_node(n.children.front(), tuple);
    case FormulaNode::Kind::conjunction:
      for (const auto& c : n.children) {
        if (!eval_node(c, tuple)) return false;
      }
      return true;
    case FormulaNode::Kind::disjunction:
      for (const auto& c : n.children) {
        if (eval_node(c, tuple)) return true;
      }
      return false;
  }
  return false;
}

void collect_constants(const FormulaNode& n, std::set<Point>& out) {
  if (n.kind == FormulaNode::Kind::atom) {
    if (n.lhs.is_constant) out.insert(n.lhs.index);
    if (n.rhs.is_constant) out.insert(n.rhs.index);
    return;
  }
  for (const auto& c : n.children) collect_constants(c, out);
}

FormulaNode map_terms(const FormulaNode& n, const std::function<Term(Term)>& fn) {
  if (n.kind == FormulaNode::Kind::atom) return FormulaNode::atom(fn(n.lhs), fn(n.rhs));
  FormulaNode out;
  out.kind = n.kind;
  out.children.reserve(n.children.size());
  for (const auto& c : n.children) out.children.push_back(map_terms(c, fn));
  return out;
}

// Literal order: by atom terms, positive before negative.
using LiteralKey = std::tuple<Term, Term, bool>;

LiteralKey literal_key(const FormulaNode& lit) {
  if (lit.kind == FormulaNode::Kind::atom) return {lit.lhs, lit.rhs, false};
  const auto& a = lit.children.front();
  return {a.lhs, a.rhs, true};
}

FormulaNode type_conjunction(const EqualityType& type) {
  std::vector<FormulaNode> lits;
  const auto& block = type.block_of();
  const auto& value = type.block_value();
  const unsigned k = type.arity();
  for (unsigned i = 0; i < k; ++i) {
    for (unsigned j = i + 1; j < k; ++j) {
      FormulaNode a = FormulaNode::atom(Term::variable(i), Term::variable(j));
      lits.push_back(block[i] == block[j] ? a : FormulaNode::negation(a));
    }
    for (Point e : type.params()) {
      FormulaNode a = FormulaNode::atom(Term::variable(i), Term::constant(e));
      lits.push_back(value[block[i]] == e ? a : FormulaNode::negation(a));
    }
  }
  std::sort(lits.begin(), lits.end(), [](const FormulaNode& x, const FormulaNode& y) {
    return literal_key(x) < literal_key(y);
  });
  return FormulaNode::conjunction(std::move(lits));
}

Formula canonical_from_types(unsigned arity, const PointSet& params,
                             const std::vector<EqualityType>& types) {
  std::vector<FormulaNode> disjuncts;
  disjuncts.reserve(types.size());
  for (const auto& t : types) disjuncts.push_back(type_conjunction(t));
  auto keys = [](const FormulaNode& c) {
    std::vector<LiteralKey> out;
    for (const auto& l : c.children) out.push_back(literal_key(l));
    return out;
  };
  std::sort(disjuncts.begin(), disjuncts.end(),
            [&](const FormulaNode& a, const FormulaNode& b) { return keys(a) < keys(b); });
  Formula f;
  f.arity = arity;
  f.parameters = params;
  f.body = FormulaNode::disjunction(std::move(disjuncts));
  f.canonical = true;
  return f;
}

Point least_outside(const PointSet& e, std::size_t ground_size) {
  for (Point p = 0; p < ground_size; ++p) {
    if (!contains(e, p)) return p;
  }
  return static_cast<Point>(ground_size);
}

FormulaNode assemble_node(const Relation& r, const PointSet& e) {
  if (r.arity() == 0) {
    return r.contains_index(0) ? FormulaNode::verum() : FormulaNode::falsum();
  }
  auto shift = [](Term t) {
    if (!t.is_constant) ++t.index;
    return t;
  };
  std::vector<FormulaNode> parts;
  for (Point c : e) {
    FormulaNode phi = map_terms(assemble_node(r.section(c), e), shift);
    parts.push_back(FormulaNode::conjunction(
        {FormulaNode::atom(Term::variable(0), Term::constant(c)), std::move(phi)}));
  }
  const Point a0 = least_outside(e, r.ground_size());
  if (a0 < r.ground_size()) {
    // psi is built with a0 as an extra parameter, which x1 then replaces.
    FormulaNode psi = map_terms(assemble_node(r.section(a0), with_point(e, a0)), [&](Term t) {
      if (t.is_constant && t.index == a0) return Term::variable(0);
      return shift(t);
    });
    std::vector<FormulaNode> negs;
    for (Point c : e) {
      negs.push_back(FormulaNode::negation(FormulaNode::atom(Term::variable(0), Term::constant(c))));
    }
    parts.push_back(
        FormulaNode::conjunction({FormulaNode::conjunction(std::move(negs)), std::move(psi)}));
  }
  return FormulaNode::disjunction(std::move(parts));
}

void check_subset_of_ground(const PointSet& e, std::size_t n) {
  if (!e.empty() && e.back() >= n) throw std::invalid_argument("parameter outside the ground set");
}

}  // namespace

bool evaluate(const Formula& f, std::span<const Point> t) {
  if (t.size() != f.arity) {
    throw ArityMismatch("tuple of length " + std::to_string(t.size()) + " for a formula of arity " +
                        std::to_string(f.arity));
  }
  return eval_node(f.body, t);
}

Formula canonicalize(const Formula& f, std::size_t ground_size) {
  check_subset_of_ground(f.parameters, ground_size);
  std::set<Point> used;
  collect_constants(f.body, used);
  for (Point c : used) {
    if (!contains(f.parameters, c)) {
      throw UnknownConstant("constant c" + std::to_string(c) + " is not a declared parameter");
    }
  }
  std::vector<EqualityType> satisfied;
  for (auto& type : enumerate_equality_types(f.arity, f.parameters, ground_size)) {
    if (evaluate(f, type.representative(ground_size))) satisfied.push_back(std::move(type));
  }
  return canonical_from_types(f.arity, f.parameters, satisfied);
}

Formula assemble_formula(const Relation& r, const PointSet& e) {
  check_subset_of_ground(e, r.ground_size());
  Formula f;
  f.arity = r.arity();
  f.parameters = e;
  f.body = assemble_node(r, e);
  return f;
}

Formula synthesize_formula(const Relation& r, const PointSet& e) {
  check_subset_of_ground(e, r.ground_size());
  if (const auto moved = moving_transposition(r, e)) {
    throw NotASupport("transposition (" + std::to_string(moved->first) + " " +
                      std::to_string(moved->second) + ") fixes E but moves R");
  }
  const std::size_t n = r.ground_size();
  std::vector<EqualityType> types;
  for (auto& type : enumerate_equality_types(r.arity(), e, n)) {
    if (r.contains(type.representative(n))) types.push_back(std::move(type));
  }
  Formula f = canonical_from_types(r.arity(), e, types);

  for (std::size_t i = 0; i < r.tuple_space(); ++i) {
    if (evaluate(f, r.decode(i)) != r.contains_index(i)) {
      throw InvariantViolation("synthesized formula disagrees with R on a tuple");
    }
  }
  if (canonicalize(assemble_formula(r, e), n) != f) {
    throw InvariantViolation("recursive assembly is not equivalent to the type formula");
  }
  return f;
}

Formula relabel(const Formula& f, std::span<const Point> sigma) {
  auto image = [&](Point p) {
    if (p >= sigma.size()) throw std::invalid_argument("permutation does not cover a constant");
    return sigma[p];
  };
  Formula out;
  out.arity = f.arity;
  for (Point p : f.parameters) out.parameters.push_back(image(p));
  out.parameters = make_point_set(std::move(out.parameters));
  out.body = map_terms(f.body, [&](Term t) {
    if (t.is_constant) t.index = image(t.index);
    return t;
  });
  return out;
}

// ---------------------------------------------------------- print and parse

namespace {

void print_term(std::ostream& os, const Term& t) {
  if (t.is_constant) {
    os << 'c' << t.index;
  } else {
    os << 'x' << (t.index + 1);
  }
}

void print_node(std::ostream& os, const FormulaNode& n) {
  switch (n.kind) {
    case FormulaNode::Kind::atom:
      os << "(= ";
      print_term(os, n.lhs);
      os << ' ';
      print_term(os, n.rhs);
      os << ')';
      return;
    case FormulaNode::Kind::negation:
      os << "(not ";
      print_node(os, n.children.front());
      os << ')';
      return;
    case FormulaNode::Kind::conjunction:
    case FormulaNode::Kind::disjunction:
      os << (n.kind == FormulaNode::Kind::conjunction ? "(and" : "(or");
      for (const auto& c : n.children) {
        os << ' ';
        print_node(os, c);
      }
      os << ')';
      return;
  }
}

class Parser {
 public:
  Parser(std::string_view text, unsigned arity, const PointSet& params)
      : text_(text), arity_(arity), params_(params) {}

  FormulaNode parse_all() {
    FormulaNode n = formula();
    skip_space();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return n;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const { throw SyntaxError(what, pos_); }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  void expect(char c) {
    skip_space();
    if (pos_ >= text_.size() || text_[pos_] != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  bool peek(char c) {
    skip_space();
    return pos_ < text_.size() && text_[pos_] == c;
  }

  std::string_view symbol() {
    skip_space();
    const std::size_t start = pos_;
    while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_])) &&
           text_[pos_] != '(' && text_[pos_] != ')') {
      ++pos_;
    }
    if (start == pos_) fail("expected a symbol");
    return text_.substr(start, pos_ - start);
  }

  Term term() {
    const std::size_t start = (skip_space(), pos_);
    const std::string_view s = symbol();
    const auto digits = s.substr(1);
    const bool numeric = !digits.empty() && std::all_of(digits.begin(), digits.end(), [](char c) {
      return std::isdigit(static_cast<unsigned char>(c));
    });
    if (!numeric || digits.size() > 9 || (s[0] != 'x' && s[0] != 'c')) {
      pos_ = start;
      fail("unknown token '" + std::string(s) + "'");
    }
    const auto value = static_cast<Point>(std::stoul(std::string(digits)));
    if (s[0] == 'x') {
      if (value < 1 || value > arity_) {
        pos_ = start;
        fail("variable '" + std::string(s) + "' outside x1..x" + std::to_string(arity_));
      }
      return Term::variable(value - 1);
    }
    if (!contains(params_, value)) {
      throw UnknownConstant("constant '" + std::string(s) + "' is not a declared parameter");
    }
    return Term::constant(value);
  }

  FormulaNode formula() {
    expect('(');
    const std::size_t head_pos = (skip_space(), pos_);
    const std::string_view head = symbol();
    FormulaNode out;
    if (head == "=") {
      Term a = term();
      Term b = term();
      out = FormulaNode::atom(a, b);
    } else if (head == "not") {
      out = FormulaNode::negation(formula());
    } else if (head == "and" || head == "or") {
      std::vector<FormulaNode> parts;
      while (!peek(')')) {
        if (pos_ >= text_.size()) fail("unterminated formula");
        parts.push_back(formula());
      }
      out = head == "and" ? FormulaNode::conjunction(std::move(parts))
                          : FormulaNode::disjunction(std::move(parts));
    } else {
      pos_ = head_pos;
      fail("unknown connective '" + std::string(head) + "'");
    }
    expect(')');
    return out;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  unsigned arity_;
  const PointSet& params_;
};

}  // namespace

std::string print_formula(const FormulaNode& node) {
  std::ostringstream os;
  print_node(os, node);
  return os.str();
}

std::string print_formula(const Formula& f) { return print_formula(f.body); }

Formula parse_formula(std::string_view text, unsigned arity, const PointSet& parameters) {
  Formula f;
  f.arity = arity;
  f.parameters = parameters;
  f.body = Parser(text, arity, parameters).parse_all();
  return f;
}

// ------------------------------------------------------ partitions, gadgets

std::string to_string(PartitionCase c) {
  return c == PartitionCase::single_block ? "single-block" : "all-singletons";
}

bool is_equivalence(const Relation& r) {
  if (r.arity() != 2) return false;
  const auto n = static_cast<Point>(r.ground_size());
  auto has = [&](Point a, Point b) { return r.contains_index(std::size_t{a} * n + b); };
  for (Point a = 0; a < n; ++a) {
    if (!has(a, a)) return false;
    for (Point b = 0; b < n; ++b) {
      if (has(a, b) != has(b, a)) return false;
      if (!has(a, b)) continue;
      for (Point c = 0; c < n; ++c) {
        if (has(b, c) && !has(a, c)) return false;
      }
    }
  }
  return true;
}

Relation equivalence_from_partition(std::size_t ground_size, const Partition& blocks) {
  Relation r(ground_size, 2);
  for (const auto& block : blocks) {
    for (Point a : block) {
      for (Point b : block) r.insert(std::vector<Point>{a, b});
    }
  }
  if (!is_equivalence(r)) throw std::invalid_argument("blocks do not partition the ground set");
  return r;
}

std::vector<Partition> all_set_partitions(std::size_t ground_size) {
  std::vector<Partition> out;
  Partition current;
  std::function<void(Point)> rec = [&](Point p) {
    if (p == ground_size) {
      out.push_back(current);
      return;
    }
    // Indexing, not references: the recursion may reallocate `current`.
    for (std::size_t b = 0; b < current.size(); ++b) {
      current[b].push_back(p);
      rec(p + 1);
      current[b].pop_back();
    }
    current.push_back({p});
    rec(p + 1);
    current.pop_back();
  };
  rec(0);
  return out;
}

PartitionCase analyze_definable_partition(const Relation& r, const PointSet& e) {
  if (!is_equivalence(r)) throw NotEquivalence("relation is not an equivalence relation");
  if (!is_support(r, e)) throw NotASupport("E does not support the equivalence relation");
  const auto n = static_cast<Point>(r.ground_size());
  PointSet outside;
  for (Point p = 0; p < n; ++p) {
    if (!contains(e, p)) outside.push_back(p);
  }
  auto related = [&](Point a, Point b) { return r.contains_index(std::size_t{a} * n + b); };
  if (outside.empty()) return PartitionCase::all_singletons;
  if (outside.size() == 1) {
    for (Point p = 0; p < n; ++p) {
      if (p != outside[0] && related(outside[0], p)) return PartitionCase::single_block;
    }
    return PartitionCase::all_singletons;
  }
  bool any_related = false;
  bool any_apart = false;
  for (std::size_t i = 0; i < outside.size(); ++i) {
    for (std::size_t j = i + 1; j < outside.size(); ++j) {
      (related(outside[i], outside[j]) ? any_related : any_apart) = true;
    }
  }
  if (any_related && any_apart) {
    throw DichotomyViolated("A - E is neither inside one class nor split into singletons");
  }
  return any_related ? PartitionCase::single_block : PartitionCase::all_singletons;
}

Partition sigma_classes(std::size_t ground_size, const PointSet& e,
                        const std::vector<PointSet>& family) {
  check_subset_of_ground(e, ground_size);
  std::map<std::vector<bool>, PointSet> by_signature;
  Partition out;
  for (Point a = 0; a < ground_size; ++a) {
    if (contains(e, a)) {
      out.push_back({a});
      continue;
    }
    std::vector<bool> signature;
    signature.reserve(family.size());
    for (const auto& s : family) signature.push_back(contains(s, a));
    by_signature[signature].push_back(a);
  }
  for (auto& [sig, cls] : by_signature) out.push_back(std::move(cls));
  std::sort(out.begin(), out.end());
  return out;
}

std::optional<std::pair<Point, Point>> nonunion_witness(const Partition& classes,
                                                        const PointSet& t) {
  std::optional<std::pair<Point, Point>> best;
  for (const auto& cls : classes) {
    for (Point c : cls) {
      if (!contains(t, c)) continue;
      for (Point d : cls) {
        if (contains(t, d)) continue;
        const std::pair<Point, Point> candidate{c, d};
        if (!best || candidate < *best) best = candidate;
      }
    }
  }
  return best;
}

bool verify_transposition_witness(const PointSet& e, const std::vector<PointSet>& family,
                                  const PointSet& t, Point c, Point d) {
  if (c == d || contains(e, c) || contains(e, d)) return false;
  for (const auto& s : family) {
    if (contains(s, c) != contains(s, d)) return false;
  }
  return contains(t, c) != contains(t, d);
}

}  // namespace ddlab
