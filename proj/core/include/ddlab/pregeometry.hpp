#pragma once

// Closure operators on finite ground sets {0..N-1} and bounded checkers for
// the pregeometry axioms.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace ddlab {

using Point = std::uint32_t;

// Sorted, duplicate-free list of ground labels.
using PointSet = std::vector<Point>;

PointSet make_point_set(std::vector<Point> points);
bool is_subset(const PointSet& a, const PointSet& b);
bool contains(const PointSet& s, Point p);
PointSet set_union(const PointSet& a, const PointSet& b);
PointSet set_difference(const PointSet& a, const PointSet& b);
PointSet set_intersection(const PointSet& a, const PointSet& b);
PointSet with_point(const PointSet& s, Point p);
PointSet without_point(const PointSet& s, Point p);

// Calls fn on every subset of {0..n-1} with |S| <= max_size, ordered by size
// and then lexicographically. Enumeration stops early if fn returns false.
void for_each_subset_up_to(std::size_t n, std::size_t max_size,
                           const std::function<bool(const PointSet&)>& fn);
void for_each_subset_of_size(std::span<const Point> universe, std::size_t size,
                             const std::function<bool(const PointSet&)>& fn);

enum class GeometryKind { linear, affine, degenerate, identity, custom };

std::string to_string(GeometryKind kind);
GeometryKind geometry_kind_from_string(const std::string& name);

using Partition = std::vector<PointSet>;

class ClosureOperator {
 public:
  using Fn = std::function<PointSet(const PointSet&)>;

  ClosureOperator(std::size_t ground_size, GeometryKind kind, Fn fn, unsigned dim = 0);

  // Ground F2^d; points are the d-bit vector values.
  static ClosureOperator linear(unsigned dim);
  static ClosureOperator affine(unsigned dim);
  // Blocks must partition {0..N-1}; N is the total number of labels.
  static ClosureOperator degenerate(const Partition& blocks);
  static ClosureOperator identity(std::size_t ground_size);
  static ClosureOperator custom(std::size_t ground_size, Fn fn);

  PointSet operator()(const PointSet& s) const;
  PointSet closure(const PointSet& s) const { return (*this)(s); }
  bool is_closed(const PointSet& s) const { return closure(s) == s; }

  std::size_t ground_size() const noexcept { return ground_size_; }
  GeometryKind kind() const noexcept { return kind_; }
  // Vector dimension for linear and affine operators, 0 otherwise.
  unsigned dim() const noexcept { return dim_; }
  PointSet ground() const;

 private:
  std::size_t ground_size_;
  GeometryKind kind_;
  Fn fn_;
  unsigned dim_;
};

// Affine hull over F2: closes under a+b+c for members a, b, c.
PointSet affine_hull(const PointSet& s);

Partition partition_from_json(const nlohmann::json& j);

enum class CheckStatus { pass, fail, bounded_pass };

std::string to_string(CheckStatus status);

struct AxiomReport {
  std::string axiom;
  nlohmann::json bound;
  CheckStatus status = CheckStatus::pass;
  std::size_t instances = 0;
  std::size_t violations = 0;
  std::vector<nlohmann::json> counterexamples;  // first few, in enumeration order

  bool ok() const { return status != CheckStatus::fail; }
};

nlohmann::json to_json(const AxiomReport& report);

inline constexpr std::size_t kMaxReportedCounterexamples = 16;
inline constexpr std::size_t kDefaultSearchBudget = 50'000'000;

// Extensivity, idempotence and monotonicity over all S, T with |S|,|T| <= s.
AxiomReport check_closure_axioms(const ClosureOperator& op, std::size_t max_subset);

// a in cl(S+b) <-> b in cl(S+a) for |S| <= s and a, b outside cl(S).
AxiomReport check_exchange(const ClosureOperator& op, std::size_t max_subset);

// Local homogeneity for closed S <= T with |T| <= t, extension clause checked
// only for closed U >= T with |U| <= u. Never reports plain PASS.
AxiomReport check_local_homogeneity(const ClosureOperator& op, std::size_t max_closed,
                                    std::size_t max_extension,
                                    std::size_t search_budget = kDefaultSearchBudget);

// Definitional test: a not in cl(T + (S - a)) for all a in S. The incremental
// test along S's order is evaluated too; disagreement raises
// InvariantViolation.
bool is_independent(const ClosureOperator& op, const PointSet& s, const PointSet& over = {});
bool is_independent_incremental(const ClosureOperator& op, const PointSet& s,
                                const PointSet& over = {});

// Size of a maximal independent subset built greedily (well defined in a
// pregeometry).
std::size_t closure_rank(const ClosureOperator& op, const PointSet& s);

enum class SampleMode { exhaustive, sample };

struct CardinalityReport {
  std::size_t k = 0;
  SampleMode mode = SampleMode::exhaustive;
  std::size_t independent_sets = 0;
  std::optional<std::size_t> common_value;  // empty when a mismatch was found
  std::vector<nlohmann::json> counterexamples;

  bool ok() const { return common_value.has_value(); }
};

nlohmann::json to_json(const CardinalityReport& report);

// All (exhaustive) or `samples` random (sample) independent k-sets must have
// closures of equal size. Throws NoIndependentSet when none is found.
CardinalityReport verify_closure_cardinality(const ClosureOperator& op, std::size_t k,
                                             SampleMode mode = SampleMode::exhaustive,
                                             std::size_t samples = 1000,
                                             std::uint64_t seed = 0x5eed);

nlohmann::json points_to_json(const ClosureOperator& op, const PointSet& s);
PointSet points_from_json(const ClosureOperator& op, const nlohmann::json& j);

}  // namespace ddlab
