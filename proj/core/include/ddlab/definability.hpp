#pragma once

// Relations on a finite ground set {0..N-1} under the symmetric group:
// supports, the recursive support construction with majority in place of
// cofiniteness, and quantifier-free equality-formula synthesis.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "ddlab/pregeometry.hpp"

namespace ddlab {

using Tuple = std::vector<Point>;

inline constexpr std::size_t kMaxTupleSpace = std::size_t{1} << 22;

// A k-ary relation stored as a membership bitmap over A^k in base-N
// lexicographic order (first coordinate most significant). Arity 0 is
// permitted internally: the only tuple is the empty one.
class Relation {
 public:
  Relation(std::size_t ground_size, unsigned arity);

  static Relation from_tuples(std::size_t ground_size, unsigned arity,
                              const std::vector<Tuple>& tuples);
  static Relation full(std::size_t ground_size, unsigned arity);
  static Relation from_mask(std::size_t ground_size, unsigned arity, std::uint64_t mask);

  std::size_t ground_size() const noexcept { return n_; }
  unsigned arity() const noexcept { return k_; }
  std::size_t tuple_space() const noexcept { return member_.size(); }
  std::size_t size() const noexcept { return count_; }

  bool contains(std::span<const Point> t) const;
  bool contains_index(std::size_t index) const { return member_[index]; }
  void insert(std::span<const Point> t);

  std::size_t encode(std::span<const Point> t) const;
  Tuple decode(std::size_t index) const;

  std::vector<Tuple> tuples() const;

  // {(a_1..a_{k-1}) | (a, a_1..a_{k-1}) in R}
  Relation section(Point a) const;

  // sigma . R for a permutation given as an image table.
  Relation permuted(std::span<const Point> sigma) const;
  bool invariant_under_swap(Point c, Point d) const;

  friend bool operator==(const Relation&, const Relation&) = default;

 private:
  std::size_t n_;
  unsigned k_;
  std::vector<bool> member_;
  std::size_t count_ = 0;
};

Relation relation_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Relation& r);

// ---------------------------------------------------------------- supports

// Some transposition of two points outside E that moves R, if any. The
// permutations fixing E pointwise are generated by such transpositions.
std::optional<std::pair<Point, Point>> moving_transposition(const Relation& r, const PointSet& e);
bool is_support(const Relation& r, const PointSet& e);

struct MinimalSupport {
  PointSet support;
  bool ambiguous = false;           // several minimum-size supports exist
  std::size_t minimum_candidates = 1;
};

MinimalSupport minimal_support(const Relation& r);

struct SupportChain {
  Point element = 0;
  std::vector<PointSet> stages;  // F_{b,0} = {b} up to the fixed point F_b

  const PointSet& fixed_point() const { return stages.back(); }
  std::size_t stabilization_index() const { return stages.size() - 1; }
};

// Intermediate objects of one recursion step at arity >= 2.
struct SupportDecomposition {
  std::vector<PointSet> section_supports;  // E_{R_a} for each a
  std::vector<SupportChain> chains;
  std::size_t majority_size = 0;           // m
  PointSet majority_block;                 // B = {b : |F_b| = m}
  Partition blocks;                        // {F_b & B} plus singletons outside B
  PointSet singleton_points;               // C
  PointSet majority_class;                 // D
};

struct RecursiveSupport {
  PointSet support;
  std::optional<SupportDecomposition> step;  // absent for arity 1
};

// Finite adaptation of the recursive construction: "finite" means at most
// N/2 and the unique cofinite objects become strict majorities. Throws
// MajorityTie when no strict majority exists.
RecursiveSupport support_recursive(const Relation& r);

// ----------------------------------------------------------- equality types

// Complete quantifier-free description of a tuple relative to parameters:
// which positions coincide and which equal which parameter. Blocks are
// numbered by first occurrence.
class EqualityType {
 public:
  EqualityType(unsigned arity, PointSet params, std::vector<std::uint32_t> block_of,
               std::vector<std::optional<Point>> block_value);

  static EqualityType of(std::span<const Point> tuple, const PointSet& params);

  unsigned arity() const noexcept { return arity_; }
  const PointSet& params() const noexcept { return params_; }
  const std::vector<std::uint32_t>& block_of() const noexcept { return block_of_; }
  const std::vector<std::optional<Point>>& block_value() const noexcept { return block_value_; }

  std::size_t fresh_blocks() const;
  bool realizable(std::size_t ground_size) const;
  // Fresh blocks take the least labels outside params, in block order.
  Tuple representative(std::size_t ground_size) const;

  friend bool operator==(const EqualityType&, const EqualityType&) = default;
  friend auto operator<=>(const EqualityType&, const EqualityType&) = default;

 private:
  unsigned arity_;
  PointSet params_;
  std::vector<std::uint32_t> block_of_;
  std::vector<std::optional<Point>> block_value_;
};

std::vector<EqualityType> enumerate_equality_types(unsigned arity, const PointSet& params,
                                                   std::size_t ground_size);

// ----------------------------------------------------------------- formulas

struct Term {
  bool is_constant = false;
  Point index = 0;  // variable position (0-based) or ground label

  static Term variable(Point position) { return {false, position}; }
  static Term constant(Point label) { return {true, label}; }

  friend bool operator==(const Term&, const Term&) = default;
  friend auto operator<=>(const Term&, const Term&) = default;
};

struct FormulaNode {
  enum class Kind { atom, negation, conjunction, disjunction };

  Kind kind = Kind::disjunction;
  Term lhs;
  Term rhs;
  std::vector<FormulaNode> children;

  static FormulaNode atom(Term a, Term b);  // orders the two terms
  static FormulaNode negation(FormulaNode inner);
  static FormulaNode conjunction(std::vector<FormulaNode> parts);
  static FormulaNode disjunction(std::vector<FormulaNode> parts);
  static FormulaNode verum() { return conjunction({}); }
  static FormulaNode falsum() { return disjunction({}); }

  friend bool operator==(const FormulaNode&, const FormulaNode&);
};

struct Formula {
  unsigned arity = 0;
  PointSet parameters;
  FormulaNode body;
  bool canonical = false;

  // Structural equality; the canonical flag is bookkeeping only.
  friend bool operator==(const Formula& a, const Formula& b) {
    return a.arity == b.arity && a.parameters == b.parameters && a.body == b.body;
  }
};

// Throws ArityMismatch when |t| differs from the formula's arity.
bool evaluate(const Formula& f, std::span<const Point> t);

// DNF whose disjuncts are the realizable complete equality types (over the
// formula's parameters) satisfying f, each written as its full literal list,
// literals and disjuncts sorted.
Formula canonicalize(const Formula& f, std::size_t ground_size);

// Formula built with the same shape as the recursive support construction:
// OR_e (x1 = e AND phi_e) OR (AND_e not(x1 = e) AND psi).
Formula assemble_formula(const Relation& r, const PointSet& e);

// Canonical formula with parameters E defining R, verified against every
// tuple of A^k and against the recursive assembly. Throws NotASupport.
Formula synthesize_formula(const Relation& r, const PointSet& e);

// Applies a ground permutation to the constants and parameters.
Formula relabel(const Formula& f, std::span<const Point> sigma);

std::string print_formula(const Formula& f);
std::string print_formula(const FormulaNode& node);
// Constants must be among `parameters`; variables among x1..x_arity.
Formula parse_formula(std::string_view text, unsigned arity, const PointSet& parameters);

// ------------------------------------------------------ partitions, gadgets

enum class PartitionCase { single_block, all_singletons };

std::string to_string(PartitionCase c);

// Classifies how an equivalence relation with support E splits A - E.
PartitionCase analyze_definable_partition(const Relation& r, const PointSet& e);

bool is_equivalence(const Relation& r);
Relation equivalence_from_partition(std::size_t ground_size, const Partition& blocks);
std::vector<Partition> all_set_partitions(std::size_t ground_size);

// a ~ b iff a = b in E, or a, b outside E with the same membership in every
// S_i. Classes are sorted by their least element.
Partition sigma_classes(std::size_t ground_size, const PointSet& e,
                        const std::vector<PointSet>& family);

// Least (c, d) in one class with c in T and d not in T.
std::optional<std::pair<Point, Point>> nonunion_witness(const Partition& classes,
                                                        const PointSet& t);

// The transposition (c d) fixes E pointwise, every S_i setwise, and moves T.
bool verify_transposition_witness(const PointSet& e, const std::vector<PointSet>& family,
                                  const PointSet& t, Point c, Point d);

}  // namespace ddlab
