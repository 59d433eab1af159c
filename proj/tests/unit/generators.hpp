#pragma once

// Seeded generators shared by the property tests.

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

#include "ddlab/definability.hpp"
#include "ddlab/gf2.hpp"
#include "ddlab/pregeometry.hpp"

namespace ddlab::testing {

inline std::mt19937_64 rng_for(std::uint64_t test_seed, std::uint64_t case_index) {
  std::seed_seq seq{static_cast<std::uint32_t>(test_seed), static_cast<std::uint32_t>(case_index)};
  return std::mt19937_64(seq);
}

inline VecSet random_vecset(unsigned dim, std::mt19937_64& rng, unsigned keep_one_in = 2) {
  std::vector<Bits> members;
  for (Bits v = 0; v < (Bits{1} << dim); ++v) {
    if (rng() % keep_one_in == 0) members.push_back(v);
  }
  return VecSet(dim, std::move(members));
}

inline VecSet random_small_vecset(unsigned dim, std::size_t max_size, std::mt19937_64& rng) {
  std::vector<Bits> members;
  const std::size_t size = rng() % (max_size + 1);
  for (std::size_t i = 0; i < size; ++i) members.push_back(static_cast<Bits>(rng() % (Bits{1} << dim)));
  return VecSet(dim, std::move(members));
}

inline PointSet random_points(std::size_t n, std::mt19937_64& rng, unsigned keep_one_in = 2) {
  PointSet out;
  for (Point p = 0; p < n; ++p) {
    if (rng() % keep_one_in == 0) out.push_back(p);
  }
  return out;
}

inline Relation random_relation(std::size_t n, unsigned k, std::mt19937_64& rng) {
  Relation r(n, k);
  for (std::size_t i = 0; i < r.tuple_space(); ++i) {
    if (rng() & 1u) r.insert(r.decode(i));
  }
  return r;
}

inline std::vector<Point> random_permutation(std::size_t n, std::mt19937_64& rng) {
  std::vector<Point> p(n);
  for (Point i = 0; i < n; ++i) p[i] = i;
  std::shuffle(p.begin(), p.end(), rng);
  return p;
}

// Every subset of {0..n-1} as a sorted point list.
inline std::vector<PointSet> all_subsets(std::size_t n) {
  std::vector<PointSet> out;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    PointSet s;
    for (Point p = 0; p < n; ++p) {
      if ((mask >> p) & 1u) s.push_back(p);
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace ddlab::testing
