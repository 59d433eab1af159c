#pragma once

// Non-injective surjections on finite subsets: the linear map on subsets of
// F2^d that strips maximum subspaces, and its generalization to any
// non-degenerate pregeometry.

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "ddlab/gf2.hpp"
#include "ddlab/pregeometry.hpp"

namespace ddlab {

// ------------------------------------------------------------------ linear

// Every subspace W contained in S with |W| maximal. Empty when 0 is not in S.
std::vector<VecSet> maximum_subspaces_within(const VecSet& s);

// S minus the union of all maximum subspaces inside S when 0 is in S,
// otherwise S with 0 added.
VecSet f_linear(const VecSet& s);

struct LinearPreimage {
  VecSet target{1};
  VecSet preimage{1};
  VecSet u_span{1};                // empty on the 0-in-T branch
  std::vector<Vector> generators;  // u_0..u_n
};

bool preimage_linear_admissible(const VecSet& t);

// Builds S with f_linear(S) = T and verifies it before returning.
LinearPreimage construct_preimage_linear(const VecSet& t);
VecSet preimage_linear(const VecSet& t);

// Holds an eagerly enumerated subspace list so f_linear can be recomputed by
// brute force over the list.
class LinearSurjection {
 public:
  explicit LinearSurjection(unsigned dim, std::optional<std::size_t> max_card = std::nullopt);

  unsigned dim() const noexcept { return dim_; }
  const std::vector<Subspace>& subspaces() const noexcept { return subspaces_; }
  bool cache_complete() const noexcept { return complete_; }

  VecSet apply(const VecSet& s) const { return f_linear(s); }
  // Same map evaluated by filtering the cached list; raises CacheIncomplete
  // when a larger uncached subspace might fit inside S.
  VecSet apply_by_enumeration(const VecSet& s) const;

 private:
  unsigned dim_;
  std::vector<Subspace> subspaces_;
  bool complete_;
};

using VecSetPair = std::pair<VecSet, VecSet>;

// Distinct S1 != S2 with f_linear(S1) = f_linear(S2): pairs of subspaces
// first, then an exhaustive scan of all subsets when d <= 4.
std::vector<VecSetPair> noninjectivity_witnesses_linear(unsigned dim, std::size_t count);

// ----------------------------------------------------------------- general

struct NondegeneracyWitness {
  PointSet e;
  std::size_t property_checks = 0;  // independent |E|-sets checked for non-degeneracy
};

inline constexpr std::size_t kDefaultSubsetBudget = std::size_t{1} << 24;

// Smallest, then lexicographically least, non-empty E with
// cl(E) != union of cl({a}). Throws Degenerate when there is none.
NondegeneracyWitness find_minimal_nondegenerate(const ClosureOperator& op,
                                                std::size_t subset_budget = kDefaultSubsetBudget);

struct GeneralPreimage {
  PointSet target;
  PointSet preimage;
  PointSet u;       // cl(D + {a_0..a_n}); empty on the trivial branch
  PointSet points;  // a_0..a_n
  bool trivial_branch = false;
  // Both checks only apply off the trivial branch.
  bool intermediate_holds = false;  // cl(D + T) meets U exactly in cl(D)
  bool unique_maximum = false;      // U is the only maximum qualifying W
};

using PointSetPair = std::pair<PointSet, PointSet>;

class GeneralSurjection {
 public:
  // generator_bound limits the rank above cl(D) up to which closed supersets
  // of D are cached; nullopt grows the cache until it is complete.
  explicit GeneralSurjection(ClosureOperator op,
                             std::optional<std::size_t> generator_bound = std::nullopt);

  const ClosureOperator& op() const noexcept { return op_; }
  const PointSet& witness() const noexcept { return e_; }
  const PointSet& d() const noexcept { return d_; }
  const PointSet& closure_of_d() const noexcept { return cl_d_; }
  const std::vector<PointSet>& closed_cache() const noexcept { return cache_; }
  bool cache_complete() const noexcept { return complete_; }

  PointSet apply(const PointSet& s) const;
  std::vector<PointSet> maximal_qualifying(const PointSet& s) const;

  bool admissible(const PointSet& t) const;
  GeneralPreimage preimage(const PointSet& t) const;

  std::vector<PointSetPair> noninjectivity_witnesses(std::size_t count) const;

  nlohmann::json describe() const;

 private:
  ClosureOperator op_;
  PointSet e_;
  PointSet d_;
  PointSet cl_d_;
  std::vector<PointSet> cache_;
  std::vector<std::size_t> level_;  // generators above cl(D) for each cache entry
  std::size_t top_level_ = 0;
  bool complete_ = false;
  std::size_t ground_rank_ = 0;
};

}  // namespace ddlab
