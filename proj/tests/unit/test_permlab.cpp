#include <gtest/gtest.h>

#include <numeric>

#include "ddlab/errors.hpp"
#include "ddlab/permlab.hpp"
#include "generators.hpp"

using namespace ddlab;
using ddlab::testing::rng_for;

namespace {

// Orbits of the maps in GL(d,2) fixing every vector of span(E), by
// union-find over all group elements.
std::vector<VecSet> brute_orbits(const VecSet& e, const std::vector<LinearMap>& group) {
  const unsigned d = e.dim();
  const std::size_t n = std::size_t{1} << d;
  const std::vector<Bits> fixed = materialize_span(rref_basis(e.members()));
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& m : group) {
    bool fixes = true;
    for (Bits x : fixed) fixes = fixes && m.apply(x) == x;
    if (!fixes) continue;
    for (Bits x = 0; x < n; ++x) parent[find(x)] = find(m.apply(x));
  }
  std::vector<std::vector<Bits>> by_root(n);
  for (Bits x = 0; x < n; ++x) by_root[find(x)].push_back(x);
  std::vector<VecSet> out;
  for (auto& members : by_root) {
    if (!members.empty()) out.emplace_back(d, std::move(members));
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<VecSet> sorted_blocks(const OrbitPartition& p) {
  std::vector<VecSet> b = p.blocks;
  std::sort(b.begin(), b.end());
  return b;
}

}  // namespace

TEST(Orbits, Examples) {
  const auto empty = stabilizer_orbits(VecSet(2));
  ASSERT_EQ(empty.blocks.size(), 2u);
  EXPECT_EQ(empty.blocks[0], VecSet(2, {0}));
  EXPECT_EQ(empty.blocks[1], VecSet(2, {0b01, 0b10, 0b11}));
  EXPECT_EQ(empty.witnesses.size(), 2u);

  const auto line = stabilizer_orbits(VecSet(2, {0b01}));
  ASSERT_EQ(line.blocks.size(), 3u);
  EXPECT_EQ(line.blocks[0], VecSet(2, {0}));
  EXPECT_EQ(line.blocks[1], VecSet(2, {0b01}));
  EXPECT_EQ(line.blocks[2], VecSet(2, {0b10, 0b11}));

  const auto full = stabilizer_orbits(VecSet(3, {1, 2, 4}));
  EXPECT_EQ(full.blocks.size(), 8u);
  EXPECT_TRUE(full.witnesses.empty());
  for (const auto& b : full.blocks) EXPECT_EQ(b.size(), 1u);
}

TEST(Orbits, MatchGroupEnumerationForLowDimensions) {
  for (unsigned d = 1; d <= 4; ++d) {
    const auto group = all_invertible_maps(d);
    const std::size_t max_e = d == 4 ? 1 : 2;
    for_each_subset_up_to(std::size_t{1} << d, max_e, [&](const PointSet& points) {
      const VecSet e(d, std::vector<Bits>(points.begin(), points.end()));
      const OrbitPartition p = stabilizer_orbits(e);
      EXPECT_EQ(sorted_blocks(p), brute_orbits(e, group)) << "d=" << d;
      for (const auto& w : p.witnesses) EXPECT_TRUE(verify_moving_map(e, w));
      return true;
    });
  }
}

TEST(Orbits, WitnessesVerifyOnRandomSets) {
  for (std::uint64_t i = 0; i < 60; ++i) {
    auto rng = rng_for(51, i);
    const unsigned d = 2 + static_cast<unsigned>(rng() % 5);
    const VecSet e = ddlab::testing::random_small_vecset(d, 3, rng);
    const OrbitPartition p = stabilizer_orbits(e);
    std::size_t covered = 0;
    for (const auto& b : p.blocks) covered += b.size();
    EXPECT_EQ(covered, std::size_t{1} << d);
    EXPECT_EQ(p.blocks.size(), (std::size_t{1} << rank(e)) + (rank(e) < d ? 1 : 0));
    for (const auto& w : p.witnesses) ASSERT_TRUE(verify_moving_map(e, w));
  }
}

TEST(Dichotomy, Examples) {
  EXPECT_EQ(check_dichotomy(VecSet(3, {0}), VecSet(3)).result, DichotomyCase::subset_of_span);
  const auto nonzero = check_dichotomy(VecSet::full(3).minus(VecSet(3, {0})), VecSet(3));
  EXPECT_EQ(nonzero.result, DichotomyCase::complement_subset_of_span);
  EXPECT_FALSE(nonzero.witness.has_value());

  const auto moved = check_dichotomy(VecSet(2, {0b01}), VecSet(2));
  EXPECT_EQ(moved.result, DichotomyCase::not_invariant);
  ASSERT_TRUE(moved.witness.has_value());
  EXPECT_EQ(moved.witness->u.bits(), 0b01u);
  EXPECT_EQ(moved.witness->v.bits(), 0b10u);
  EXPECT_EQ(moved.witness->map.apply(Bits{0b01}), 0b10u);
  EXPECT_EQ(to_json(moved).at("result"), "not-invariant");
  EXPECT_THROW(check_dichotomy(VecSet(2), VecSet(3)), std::invalid_argument);
}

TEST(Dichotomy, EveryInvariantSetFallsIntoOneCase) {
  for (unsigned d = 1; d <= 4; ++d) {
    for_each_subset_up_to(std::size_t{1} << d, 2, [&](const PointSet& points) {
      const VecSet e(d, std::vector<Bits>(points.begin(), points.end()));
      const auto blocks = stabilizer_orbits(e).blocks;
      for (std::uint64_t pick = 0; pick < (std::uint64_t{1} << blocks.size()); ++pick) {
        VecSet b(d);
        for (std::size_t i = 0; i < blocks.size(); ++i) {
          if ((pick >> i) & 1u) b = b.united(blocks[i]);
        }
        const auto r = check_dichotomy(b, e);
        EXPECT_NE(r.result, DichotomyCase::not_invariant);
      }
      return true;
    });
  }
}

TEST(Dichotomy, NonInvariantWitnessesMoveBOut) {
  for (std::uint64_t i = 0; i < 200; ++i) {
    auto rng = rng_for(52, i);
    const unsigned d = 2 + static_cast<unsigned>(rng() % 4);
    const VecSet e = ddlab::testing::random_small_vecset(d, 2, rng);
    const VecSet b = ddlab::testing::random_vecset(d, rng);
    const auto r = check_dichotomy(b, e);
    if (r.result != DichotomyCase::not_invariant) continue;
    ASSERT_TRUE(verify_moving_map(e, *r.witness));
    EXPECT_TRUE(b.contains(r.witness->u.bits()));
    EXPECT_FALSE(b.contains(r.witness->v.bits()));
  }
}

TEST(Equivariance, LinearRandomAndExhaustive) {
  const auto random = check_equivariance_linear(3, 1000);
  EXPECT_EQ(random.trials, 1000u);
  EXPECT_EQ(random.failures, 0u);
  const auto full = check_equivariance_linear_exhaustive(2, 3);
  EXPECT_EQ(full.trials, 6u * (1u + 4u + 6u + 4u));
  EXPECT_EQ(full.failures, 0u);
  EXPECT_THROW(check_equivariance_linear(11, 1), std::invalid_argument);
}

TEST(Equivariance, IdentityMapIsTriviallyEquivariant) {
  const LinearMap id = LinearMap::identity(4);
  for (std::uint64_t i = 0; i < 50; ++i) {
    auto rng = rng_for(53, i);
    const VecSet s = ddlab::testing::random_vecset(4, rng);
    EXPECT_EQ(f_linear(id.apply(s)), id.apply(f_linear(s)));
  }
}

TEST(Equivariance, SameSeedSameReport) {
  EXPECT_EQ(to_json(check_equivariance_linear(4, 50, 9)), to_json(check_equivariance_linear(4, 50, 9)));
  EXPECT_EQ(to_json(check_equivariance_linear(4, 50, 9)).at("params").at("seed"), 9);
}

TEST(Equivariance, GeneralInstances) {
  const auto linear = check_equivariance_general(GeneralSurjection(ClosureOperator::linear(3)), 500);
  EXPECT_EQ(linear.trials, 500u);
  EXPECT_EQ(linear.failures, 0u);
  const auto affine = check_equivariance_general(GeneralSurjection(ClosureOperator::affine(3)), 200);
  EXPECT_EQ(affine.trials, 200u);
  EXPECT_EQ(affine.failures, 0u);
  EXPECT_THROW(check_equivariance_general(
                   GeneralSurjection(ClosureOperator::custom(8, [](const PointSet& s) {
                     return ClosureOperator::linear(3)(s);
                   })),
                   1),
               std::invalid_argument);
}

TEST(Equivariance, Synthesis) {
  std::vector<Formula> produced;
  const auto r = check_synthesis_equivariance(5, 2, 200, kDefaultSeed, 2, &produced);
  EXPECT_EQ(r.trials, 200u);
  EXPECT_EQ(r.failures, 0u);
  EXPECT_EQ(produced.size(), 200u);
}
