#pragma once

// Group actions: orbits of the pointwise stabilizer of span(E) in GL(d,2),
// the invariant-set dichotomy, and equivariance harnesses.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ddlab/definability.hpp"
#include "ddlab/dualdd.hpp"
#include "ddlab/gf2.hpp"

namespace ddlab {

inline constexpr std::uint64_t kDefaultSeed = 20240611;

// A map fixing span(E) pointwise and sending u to v.
struct MovingMap {
  Vector u;
  Vector v;
  LinearMap map;
};

bool verify_moving_map(const VecSet& e, const MovingMap& w);

struct OrbitPartition {
  unsigned dim = 0;
  VecSet e{1};
  std::vector<VecSet> blocks;       // span(E) singletons first, then the rest
  std::vector<MovingMap> witnesses;  // consecutive pairs of the large block
};

OrbitPartition stabilizer_orbits(const VecSet& e);
nlohmann::json to_json(const OrbitPartition& p);

enum class DichotomyCase { subset_of_span, complement_subset_of_span, not_invariant };

std::string to_string(DichotomyCase c);

struct DichotomyReport {
  DichotomyCase result = DichotomyCase::subset_of_span;
  std::optional<MovingMap> witness;  // u in B, v outside B, present when not invariant
};

DichotomyReport check_dichotomy(const VecSet& b, const VecSet& e);
nlohmann::json to_json(const DichotomyReport& r);

struct EquivarianceReport {
  std::string check;
  nlohmann::json params;
  std::size_t trials = 0;
  std::size_t failures = 0;
  std::vector<nlohmann::json> witnesses;  // first few failures
};

nlohmann::json to_json(const EquivarianceReport& r);

// Trial i draws from a generator seeded by (seed, i) alone.
std::mt19937_64 trial_rng(std::uint64_t seed, std::uint64_t trial);

EquivarianceReport check_equivariance_linear(unsigned dim, std::size_t trials,
                                             std::uint64_t seed = kDefaultSeed);
// Every invertible map against every S with |S| <= max_card (d <= 4).
EquivarianceReport check_equivariance_linear_exhaustive(unsigned dim, std::size_t max_card);

// Linear or affine instances only. Permutations are x -> M(x - p) + p with M
// invertible and fixing span(D - p) pointwise, p the least point of D (0 for
// linear instances).
EquivarianceReport check_equivariance_general(const GeneralSurjection& inst, std::size_t trials,
                                              std::uint64_t seed = kDefaultSeed);

// Random relations built as unions of equality types over a random E with
// |E| <= max_params. Each trial checks that synthesis is unchanged by a
// permutation fixing E and covariant under an arbitrary permutation.
// Synthesized formulas are appended to `produced` when given.
EquivarianceReport check_synthesis_equivariance(std::size_t ground_size, unsigned arity,
                                                std::size_t trials,
                                                std::uint64_t seed = kDefaultSeed,
                                                std::size_t max_params = 2,
                                                std::vector<Formula>* produced = nullptr);

}  // namespace ddlab
