#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "ddlab/dualdd.hpp"
#include "ddlab/errors.hpp"
#include "generators.hpp"

using namespace ddlab;
using ddlab::testing::rng_for;

namespace {

// Subspaces of F2^d found by testing every 0-containing subset for closure
// under addition. Each is a bitmask over the 2^d vectors.
std::vector<std::uint64_t> brute_subspaces(unsigned d) {
  const unsigned space = 1u << d;
  std::vector<std::uint64_t> out;
  for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << space); mask += 2) {
    bool closed = true;
    for (unsigned a = 0; a < space && closed; ++a) {
      if (!((mask >> a) & 1u)) continue;
      for (unsigned b = a + 1; b < space && closed; ++b) {
        if (((mask >> b) & 1u) && !((mask >> (a ^ b)) & 1u)) closed = false;
      }
    }
    if (closed) out.push_back(mask);
  }
  return out;
}

std::uint64_t mask_of(const VecSet& s) {
  std::uint64_t m = 0;
  for (Bits v : s) m |= std::uint64_t{1} << v;
  return m;
}

VecSet from_mask(unsigned d, std::uint64_t m) {
  std::vector<Bits> out;
  for (Bits v = 0; v < (Bits{1} << d); ++v) {
    if ((m >> v) & 1u) out.push_back(v);
  }
  return VecSet(d, std::move(out));
}

// Direct evaluation of the linear map from the subspace list.
VecSet f_linear_oracle(const VecSet& s, const std::vector<std::uint64_t>& subs) {
  const unsigned d = s.dim();
  const std::uint64_t sm = mask_of(s);
  if (!(sm & 1u)) return from_mask(d, sm | 1u);
  int best = -1;
  std::uint64_t strip = 0;
  for (std::uint64_t w : subs) {
    if ((w & sm) != w) continue;
    const int c = __builtin_popcountll(w);
    if (c > best) {
      best = c;
      strip = 0;
    }
    if (c == best) strip |= w;
  }
  return from_mask(d, sm & ~strip);
}

// For S avoiding 0: strip every maximum subspace W with W - {0} inside S.
VecSet punctured_oracle(const VecSet& s, const std::vector<std::uint64_t>& subs) {
  const std::uint64_t sm = mask_of(s);
  int best = -1;
  std::uint64_t strip = 0;
  for (std::uint64_t w : subs) {
    const std::uint64_t punctured = w & ~std::uint64_t{1};
    if ((punctured & sm) != punctured) continue;
    const int c = __builtin_popcountll(w);
    if (c > best) {
      best = c;
      strip = 0;
    }
    if (c == best) strip |= punctured;
  }
  return from_mask(s.dim(), sm & ~strip);
}

PointSet as_points(const VecSet& s) { return PointSet(s.begin(), s.end()); }

}  // namespace

TEST(FLinear, Examples) {
  EXPECT_EQ(f_linear(VecSet(3, {0})), VecSet(3));
  EXPECT_EQ(f_linear(VecSet(3, {0b001})), VecSet(3, {0, 0b001}));
  EXPECT_EQ(f_linear(VecSet(2, {0, 0b01, 0b10})), VecSet(2));
  EXPECT_EQ(f_linear(VecSet(3)), VecSet(3, {0}));
}

TEST(FLinear, MaximumSubspacesOfThreePointSet) {
  const auto subs = maximum_subspaces_within(VecSet(2, {0, 0b01, 0b10}));
  ASSERT_EQ(subs.size(), 2u);
  EXPECT_EQ(subs[0], VecSet(2, {0, 0b01}));
  EXPECT_EQ(subs[1], VecSet(2, {0, 0b10}));
  EXPECT_TRUE(maximum_subspaces_within(VecSet(2, {0b01})).empty());
}

TEST(FLinear, EverySubspaceMapsToEmpty) {
  for (unsigned d = 1; d <= 4; ++d) {
    for (const auto& w : enumerate_subspaces(d)) EXPECT_TRUE(f_linear(w.members).empty());
  }
}

TEST(FLinear, MatchesDirectEvaluationExhaustivelyInDimensionThree) {
  const auto subs = brute_subspaces(3);
  for (std::uint64_t m = 0; m < 256; ++m) {
    const VecSet s = from_mask(3, m);
    ASSERT_EQ(f_linear(s), f_linear_oracle(s, subs)) << m;
  }
}

TEST(FLinear, MatchesDirectEvaluationOnRandomSetsInDimensionFour) {
  const auto subs = brute_subspaces(4);
  ASSERT_EQ(subs.size(), 67u);
  for (std::uint64_t i = 0; i < 2000; ++i) {
    auto rng = rng_for(31, i);
    const VecSet s = ddlab::testing::random_vecset(4, rng, 1 + rng() % 3);
    ASSERT_EQ(f_linear(s), f_linear_oracle(s, subs));
  }
}

TEST(FLinear, EnumerationPathAgrees) {
  const LinearSurjection inst(4);
  EXPECT_TRUE(inst.cache_complete());
  EXPECT_EQ(inst.subspaces().size(), 67u);
  for (std::uint64_t i = 0; i < 500; ++i) {
    auto rng = rng_for(32, i);
    const VecSet s = ddlab::testing::random_vecset(4, rng);
    EXPECT_EQ(inst.apply_by_enumeration(s), inst.apply(s));
  }
}

TEST(FLinear, TruncatedCacheRefusesToGuess) {
  const LinearSurjection inst(3, 2);
  EXPECT_FALSE(inst.cache_complete());
  EXPECT_EQ(inst.apply_by_enumeration(VecSet(3, {0, 1})), VecSet(3));
  EXPECT_THROW(inst.apply_by_enumeration(VecSet::full(3)), CacheIncomplete);
}

TEST(PreimageLinear, ConstructiveBranchExample) {
  const LinearPreimage p = construct_preimage_linear(VecSet(3, {0b001}));
  EXPECT_EQ(p.preimage, VecSet(3, {0b000, 0b001, 0b010, 0b100, 0b110}));
  ASSERT_EQ(p.generators.size(), 2u);
  EXPECT_EQ(p.generators[0].bits(), 0b010u);
  EXPECT_EQ(p.generators[1].bits(), 0b100u);
  EXPECT_EQ(f_linear(p.preimage), VecSet(3, {0b001}));
}

TEST(PreimageLinear, ZeroInTarget) {
  EXPECT_EQ(preimage_linear(VecSet(2, {0, 0b11})), VecSet(2, {0b11}));
  EXPECT_TRUE(preimage_linear_admissible(VecSet(2, {0, 0b11})));
}

TEST(PreimageLinear, TooLittleRoom) {
  const VecSet t(3, {0b001, 0b010});
  EXPECT_FALSE(preimage_linear_admissible(t));
  EXPECT_THROW(preimage_linear(t), DimensionExhausted);
}

TEST(PreimageLinear, RandomAdmissibleTargetsAndCardinalityIdentity) {
  std::size_t constructed = 0;
  for (std::uint64_t i = 0; i < 400; ++i) {
    auto rng = rng_for(33, i);
    const unsigned d = 3 + static_cast<unsigned>(rng() % 6);
    const VecSet t = ddlab::testing::random_small_vecset(d, 3, rng).minus(VecSet(d, {0}));
    if (!preimage_linear_admissible(t)) {
      EXPECT_THROW(preimage_linear(t), DimensionExhausted);
      continue;
    }
    const LinearPreimage p = construct_preimage_linear(t);
    ASSERT_EQ(f_linear(p.preimage), t);
    const std::size_t n = t.size();
    EXPECT_EQ(p.generators.size(), n + 1);
    EXPECT_EQ(p.u_span.size(), std::size_t{1} << (n + 1));
    EXPECT_LT(n + 1, p.u_span.size());
    EXPECT_EQ(p.preimage, t.united(p.u_span));
    ++constructed;
  }
  EXPECT_GT(constructed, 100u);
}

TEST(CollisionsLinear, SmallestPairInDimensionTwo) {
  const auto pairs = noninjectivity_witnesses_linear(2, 1);
  ASSERT_EQ(pairs.size(), 1u);
  EXPECT_EQ(pairs[0].first, VecSet(2, {0}));
  EXPECT_EQ(pairs[0].second, VecSet(2, {0, 0b01}));
}

TEST(CollisionsLinear, DimensionOneHasOnlyOnePair) {
  const auto one = noninjectivity_witnesses_linear(1, 1);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0].first, VecSet(1, {0}));
  EXPECT_EQ(one[0].second, VecSet(1, {0, 1}));
  EXPECT_THROW(noninjectivity_witnesses_linear(1, 2), InsufficientWitnesses);
}

TEST(CollisionsLinear, PairsAreDistinctAndCollide) {
  for (unsigned d = 2; d <= 6; ++d) {
    const auto pairs = noninjectivity_witnesses_linear(d, 25);
    ASSERT_EQ(pairs.size(), 25u);
    std::set<VecSetPair> seen;
    for (const auto& [a, b] : pairs) {
      EXPECT_NE(a, b);
      EXPECT_EQ(f_linear(a), f_linear(b));
      EXPECT_TRUE(seen.insert({a, b}).second);
    }
  }
}

TEST(Nondegenerate, MinimalWitnessSizes) {
  EXPECT_EQ(find_minimal_nondegenerate(ClosureOperator::linear(3)).e, (PointSet{1, 2}));
  EXPECT_EQ(find_minimal_nondegenerate(ClosureOperator::affine(3)).e, (PointSet{0, 1, 2}));
  EXPECT_THROW(find_minimal_nondegenerate(ClosureOperator::identity(5)), Degenerate);
  EXPECT_THROW(find_minimal_nondegenerate(ClosureOperator::degenerate({{0, 1}, {2, 3, 4}})),
               Degenerate);
}

TEST(FGeneral, LinearFourExamples) {
  const GeneralSurjection inst(ClosureOperator::linear(4));
  EXPECT_TRUE(inst.d().empty());
  EXPECT_EQ(inst.closure_of_d(), PointSet{0});
  // {0000, 0001} meets cl(D), so the second case leaves it alone.
  EXPECT_EQ(inst.apply({0, 1}), (PointSet{0, 1}));
  EXPECT_EQ(inst.apply({1}), PointSet{});
  EXPECT_EQ(inst.apply({0, 0b1100}), (PointSet{0, 0b1100}));
  EXPECT_EQ(inst.apply({1, 2, 3}), PointSet{});
}

TEST(FGeneral, CollisionsOnLinearThree) {
  const GeneralSurjection inst(ClosureOperator::linear(3));
  const auto pairs = inst.noninjectivity_witnesses(1);
  ASSERT_EQ(pairs.size(), 1u);
  EXPECT_NE(pairs[0].first, pairs[0].second);
  EXPECT_TRUE(inst.apply(pairs[0].first).empty());
  EXPECT_TRUE(inst.apply(pairs[0].second).empty());
  const auto more = inst.noninjectivity_witnesses(10);
  for (const auto& [a, b] : more) EXPECT_EQ(inst.apply(a), inst.apply(b));
}

TEST(FGeneral, SpecializesToPuncturedSubspacesOnLinearThree) {
  const GeneralSurjection inst(ClosureOperator::linear(3));
  const auto subs = brute_subspaces(3);
  std::size_t checked = 0;
  for_each_subset_up_to(8, 4, [&](const PointSet& points) {
    if (contains(points, 0)) return true;
    const VecSet s(3, std::vector<Bits>(points.begin(), points.end()));
    EXPECT_EQ(inst.apply(points), as_points(punctured_oracle(s, subs)));
    ++checked;
    return true;
  });
  EXPECT_EQ(checked, 1u + 7u + 21u + 35u + 35u);
}

TEST(FGeneral, TruncatedCacheRaises) {
  const GeneralSurjection inst(ClosureOperator::linear(4), 1);
  EXPECT_FALSE(inst.cache_complete());
  EXPECT_EQ(inst.apply({0}), PointSet{0});
  PointSet nonzero;
  for (Point p = 1; p < 16; ++p) nonzero.push_back(p);
  EXPECT_THROW(inst.apply(nonzero), CacheIncomplete);
}

TEST(PreimageGeneral, LinearFourExamples) {
  const GeneralSurjection inst(ClosureOperator::linear(4));
  const GeneralPreimage p = inst.preimage({1});
  EXPECT_FALSE(p.trivial_branch);
  EXPECT_EQ(inst.apply(p.preimage), PointSet{1});
  EXPECT_TRUE(p.intermediate_holds);
  EXPECT_TRUE(p.unique_maximum);
  EXPECT_EQ(p.preimage, set_union({1}, set_difference(p.u, inst.closure_of_d())));

  const GeneralPreimage z = inst.preimage({0});
  EXPECT_TRUE(z.trivial_branch);
  EXPECT_EQ(z.preimage, PointSet{0});
  EXPECT_FALSE(z.intermediate_holds);
  EXPECT_FALSE(z.unique_maximum);
}

TEST(PreimageGeneral, AffineFourSinglePoints) {
  const GeneralSurjection inst(ClosureOperator::affine(4));
  EXPECT_EQ(inst.witness().size(), 3u);
  EXPECT_EQ(inst.d().size(), 1u);
  std::size_t built = 0;
  for (Point x = 0; x < 16; ++x) {
    if (contains(inst.closure_of_d(), x)) continue;
    const GeneralPreimage p = inst.preimage({x});
    EXPECT_EQ(inst.apply(p.preimage), PointSet{x});
    EXPECT_TRUE(p.intermediate_holds && p.unique_maximum);
    ++built;
  }
  EXPECT_EQ(built, 15u);
}

TEST(PreimageGeneral, AdmissibilityDecidesConstructibility) {
  for (const auto& op : {ClosureOperator::linear(4), ClosureOperator::affine(4)}) {
    const GeneralSurjection inst(op);
    for_each_subset_up_to(16, 2, [&](const PointSet& t) {
      if (inst.admissible(t)) {
        const GeneralPreimage p = inst.preimage(t);
        EXPECT_EQ(inst.apply(p.preimage), t);
        EXPECT_TRUE(p.trivial_branch || (p.intermediate_holds && p.unique_maximum));
      } else {
        EXPECT_THROW(inst.preimage(t), GroundExhausted);
      }
      return true;
    });
  }
}

TEST(PreimageGeneral, DescribeListsInstance) {
  const GeneralSurjection inst(ClosureOperator::affine(3));
  const auto j = inst.describe();
  EXPECT_EQ(j.at("E").size(), 3u);
  EXPECT_EQ(j.at("D").size(), 1u);
  EXPECT_EQ(j.at("cache_complete"), true);
}
