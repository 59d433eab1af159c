#include "ddlab/dualdd.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <stdexcept>

#include "ddlab/errors.hpp"

namespace ddlab {

// ------------------------------------------------------------------ linear

namespace {

struct Candidate {
  std::vector<Bits> members;
  Bits pivots = 0;  // pivot bits of the rref basis
  int top = -1;     // highest pivot
};

int high_bit(Bits v) { return 31 - __builtin_clz(v); }

// Grows subspaces inside S one dimension at a time. A subspace with rref
// basis b_1..b_r (descending pivots) is only generated from span(b_2..b_r)
// by adding b_1, so each one appears exactly once per level.
std::vector<VecSet> maximum_subspaces_impl(const VecSet& s) {
  std::vector<Candidate> level{Candidate{{0}, 0, -1}};
  for (;;) {
    std::vector<Candidate> next;
    for (const Candidate& w : level) {
      for (Bits v : s.members()) {
        if (v == 0 || high_bit(v) <= w.top || (v & w.pivots)) continue;
        bool fits = true;
        for (Bits x : w.members) {
          if (!s.contains(x ^ v)) {
            fits = false;
            break;
          }
        }
        if (!fits) continue;
        Candidate grown{w.members, w.pivots | (Bits{1} << high_bit(v)), high_bit(v)};
        for (Bits x : w.members) grown.members.push_back(x ^ v);
        next.push_back(std::move(grown));
      }
    }
    if (next.empty()) break;
    level = std::move(next);
  }

  std::vector<VecSet> out;
  out.reserve(level.size());
  for (Candidate& w : level) out.emplace_back(s.dim(), std::move(w.members));
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

std::vector<VecSet> maximum_subspaces_within(const VecSet& s) {
  if (!s.contains_zero()) return {};
  return maximum_subspaces_impl(s);
}

VecSet f_linear(const VecSet& s) {
  if (!s.contains_zero()) {
    VecSet out = s;
    out.insert(0);
    return out;
  }
  VecSet covered(s.dim());
  for (const VecSet& w : maximum_subspaces_within(s)) covered = covered.united(w);
  return s.minus(covered);
}

bool preimage_linear_admissible(const VecSet& t) {
  if (t.contains_zero()) return true;
  return rank(t) + t.size() + 1 <= t.dim();
}

LinearPreimage construct_preimage_linear(const VecSet& t) {
  LinearPreimage out;
  out.target = t;
  out.u_span = VecSet(t.dim());
  if (t.contains_zero()) {
    out.preimage = t;
    out.preimage.erase(0);
  } else {
    const std::size_t n = t.size();
    out.generators = extend_independent(t, n + 1);
    std::vector<Bits> gens;
    for (const Vector& u : out.generators) gens.push_back(u.bits());
    out.u_span = span(VecSet(t.dim(), gens)).members;

    const VecSet meet = span(t).members.intersected(out.u_span);
    if (meet != VecSet(t.dim(), {0})) {
      throw IntermediateAssertFailed("span(T) and U meet outside {0}");
    }
    VecSet t_with_zero = t;
    t_with_zero.insert(0);
    if (!(t_with_zero.size() == n + 1 && n + 1 < out.u_span.size() &&
          out.u_span.size() == (std::size_t{1} << (n + 1)))) {
      throw IntermediateAssertFailed("|T + 0| = n+1 < 2^(n+1) = |U| does not hold");
    }
    out.preimage = t.united(out.u_span);
  }
  if (f_linear(out.preimage) != t) {
    throw IntermediateAssertFailed("constructed preimage does not map back to T");
  }
  return out;
}

VecSet preimage_linear(const VecSet& t) { return construct_preimage_linear(t).preimage; }

LinearSurjection::LinearSurjection(unsigned dim, std::optional<std::size_t> max_card)
    : dim_(dim),
      subspaces_(enumerate_subspaces(dim, max_card)),
      complete_(!max_card || *max_card >= (std::size_t{1} << dim)) {}

VecSet LinearSurjection::apply_by_enumeration(const VecSet& s) const {
  if (s.dim() != dim_) throw std::invalid_argument("dimension mismatch");
  if (!s.contains_zero()) {
    VecSet out = s;
    out.insert(0);
    return out;
  }
  std::size_t best = 0;
  for (const Subspace& w : subspaces_) {
    if (w.cardinality() >= best && w.members.is_subset_of(s)) best = w.cardinality();
  }
  const std::size_t top = subspaces_.empty() ? 0 : subspaces_.back().cardinality();
  if (!complete_ && best == top && s.size() >= 2 * top) {
    throw CacheIncomplete("a subspace larger than the cached bound may lie inside S");
  }
  VecSet covered(dim_);
  for (const Subspace& w : subspaces_) {
    if (w.cardinality() == best && w.members.is_subset_of(s)) covered = covered.united(w.members);
  }
  return s.minus(covered);
}

std::vector<VecSetPair> noninjectivity_witnesses_linear(unsigned dim, std::size_t count) {
  if (count == 0) throw std::invalid_argument("count must be positive");
  std::vector<VecSetPair> out;
  std::set<VecSetPair> seen;

  // Every subspace maps to the empty set, so any two of them collide.
  std::size_t card = 2;
  std::vector<Subspace> subspaces;
  for (;;) {
    subspaces = enumerate_subspaces(dim, card);
    const std::size_t m = subspaces.size();
    const bool all = card >= (std::size_t{1} << dim);
    if (m * (m - 1) / 2 >= count || all) break;
    card *= 2;
  }
  for (std::size_t i = 0; i < subspaces.size() && out.size() < count; ++i) {
    for (std::size_t j = i + 1; j < subspaces.size() && out.size() < count; ++j) {
      VecSetPair p{subspaces[i].members, subspaces[j].members};
      seen.insert(p);
      out.push_back(std::move(p));
    }
  }

  if (out.size() < count && dim <= 4) {
    const std::size_t n = std::size_t{1} << dim;
    std::map<VecSet, std::vector<VecSet>> by_image;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
      std::vector<Bits> vs;
      for (std::size_t i = 0; i < n; ++i) {
        if ((mask >> i) & 1u) vs.push_back(static_cast<Bits>(i));
      }
      VecSet s(dim, std::move(vs));
      by_image[f_linear(s)].push_back(std::move(s));
    }
    std::vector<VecSetPair> extra;
    for (auto& [image, sources] : by_image) {
      std::sort(sources.begin(), sources.end());
      for (std::size_t i = 0; i < sources.size(); ++i) {
        for (std::size_t j = i + 1; j < sources.size(); ++j) {
          VecSetPair p{sources[i], sources[j]};
          if (!seen.count(p)) extra.push_back(std::move(p));
        }
      }
    }
    std::sort(extra.begin(), extra.end());
    for (auto& p : extra) {
      if (out.size() == count) break;
      out.push_back(std::move(p));
    }
  }

  if (out.size() < count) {
    throw InsufficientWitnesses("only " + std::to_string(out.size()) +
                                " collision pairs exist for d = " + std::to_string(dim));
  }
  for (const auto& [a, b] : out) {
    if (a == b || f_linear(a) != f_linear(b)) {
      throw InvariantViolation("collision pair failed re-evaluation");
    }
  }
  return out;
}

// ----------------------------------------------------------------- general

NondegeneracyWitness find_minimal_nondegenerate(const ClosureOperator& op,
                                                std::size_t subset_budget) {
  const PointSet ground = op.ground();
  std::vector<PointSet> point_closure(op.ground_size());
  for (Point p : ground) point_closure[p] = op({p});

  auto union_of_points = [&](const PointSet& x) {
    PointSet u;
    for (Point p : x) u = set_union(u, point_closure[p]);
    return u;
  };

  std::optional<PointSet> found;
  std::size_t visited = 0;
  for (std::size_t k = 1; k <= ground.size() && !found; ++k) {
    for_each_subset_of_size(ground, k, [&](const PointSet& e) {
      if (++visited > subset_budget) {
        throw SearchBudgetExceeded("no non-degenerate witness within " +
                                   std::to_string(subset_budget) + " subsets");
      }
      if (op(e) != union_of_points(e)) {
        found = e;
        return false;
      }
      return true;
    });
  }
  if (!found) throw Degenerate("cl(S) equals the union of point closures for every S");

  NondegeneracyWitness w;
  w.e = *found;
  if (!is_independent(op, w.e)) {
    throw InvariantViolation("minimal non-degenerate set is not independent");
  }

  // Every independent set of the same size must be non-degenerate too.
  auto check = [&](const PointSet& x) {
    if (!is_independent(op, x)) return;
    ++w.property_checks;
    if (op(x) == union_of_points(x)) {
      throw InvariantViolation("independent set of minimal size is degenerate");
    }
  };
  std::uint64_t combos = 1;
  for (std::size_t i = 0; i < w.e.size(); ++i) {
    combos = combos * (ground.size() - i) / (i + 1);
  }
  if (combos <= 20000) {
    for_each_subset_of_size(ground, w.e.size(), [&](const PointSet& x) {
      check(x);
      return true;
    });
  } else {
    std::mt19937_64 rng(0xe5);
    std::vector<Point> pool = ground;
    for (int draw = 0; draw < 2000; ++draw) {
      for (std::size_t i = 0; i < w.e.size(); ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
        std::swap(pool[i], pool[pick(rng)]);
      }
      check(make_point_set(std::vector<Point>(pool.begin(), pool.begin() + w.e.size())));
    }
  }
  return w;
}

GeneralSurjection::GeneralSurjection(ClosureOperator op, std::optional<std::size_t> generator_bound)
    : op_(std::move(op)) {
  e_ = find_minimal_nondegenerate(op_).e;
  if (e_.size() < 2) throw InvariantViolation("minimal non-degenerate set has fewer than 2 points");
  d_.assign(e_.begin(), e_.end() - 2);
  cl_d_ = op_(d_);
  ground_rank_ = closure_rank(op_, op_.ground());

  // Closed supersets of D, one generator at a time: every closed W containing
  // D is cl(D + Y) for an independent Y of size rank(W) - rank(D).
  std::set<PointSet> seen{cl_d_};
  std::vector<PointSet> frontier{cl_d_};
  std::vector<std::pair<PointSet, std::size_t>> entries{{cl_d_, 0}};
  std::size_t level = 0;
  for (;;) {
    if (generator_bound && level == *generator_bound) {
      complete_ = std::all_of(frontier.begin(), frontier.end(),
                              [&](const PointSet& w) { return w.size() == op_.ground_size(); });
      break;
    }
    std::vector<PointSet> next;
    for (const PointSet& w : frontier) {
      for (Point p = 0; p < op_.ground_size(); ++p) {
        if (contains(w, p)) continue;
        PointSet c = op_(with_point(w, p));
        if (seen.insert(c).second) next.push_back(std::move(c));
      }
    }
    if (next.empty()) {
      complete_ = true;
      break;
    }
    ++level;
    for (const PointSet& c : next) entries.emplace_back(c, level);
    frontier = std::move(next);
  }
  top_level_ = level;
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    if (a.first.size() != b.first.size()) return a.first.size() < b.first.size();
    return a.first < b.first;
  });
  for (auto& [w, l] : entries) {
    cache_.push_back(std::move(w));
    level_.push_back(l);
  }
}

std::vector<PointSet> GeneralSurjection::maximal_qualifying(const PointSet& s) const {
  const PointSet allowed = set_union(s, cl_d_);
  std::size_t best = 0;
  bool touches_top = false;
  for (std::size_t i = 0; i < cache_.size(); ++i) {
    if (!is_subset(cache_[i], allowed)) continue;
    best = std::max(best, cache_[i].size());
    if (level_[i] == top_level_) touches_top = true;
  }
  if (!complete_ && touches_top) {
    throw CacheIncomplete("a qualifying closed set reaches the generator bound " +
                          std::to_string(top_level_));
  }
  std::vector<PointSet> out;
  for (const PointSet& w : cache_) {
    if (w.size() == best && is_subset(w, allowed)) out.push_back(w);
  }
  return out;
}

PointSet GeneralSurjection::apply(const PointSet& s) const {
  if (!set_intersection(s, cl_d_).empty()) return s;
  PointSet covered;
  for (const PointSet& w : maximal_qualifying(s)) covered = set_union(covered, w);
  return set_difference(s, covered);
}

bool GeneralSurjection::admissible(const PointSet& t) const {
  if (!set_intersection(t, cl_d_).empty()) return true;
  return closure_rank(op_, set_union(d_, t)) + t.size() + 1 <= ground_rank_;
}

GeneralPreimage GeneralSurjection::preimage(const PointSet& t) const {
  GeneralPreimage out;
  out.target = t;
  if (!set_intersection(t, cl_d_).empty()) {
    out.trivial_branch = true;
    out.preimage = t;
  } else {
    const std::size_t n = t.size();
    PointSet base = set_union(d_, t);
    for (std::size_t j = 0; j <= n; ++j) {
      const PointSet closed = op_(set_union(base, out.points));
      Point p = 0;
      while (p < op_.ground_size() && contains(closed, p)) ++p;
      if (p == op_.ground_size()) {
        throw GroundExhausted("no point outside cl(D + T + a_0..a_" + std::to_string(j) + ")");
      }
      out.points = with_point(out.points, p);
    }
    out.u = op_(set_union(d_, out.points));
    if (set_intersection(op_(base), out.u) != cl_d_) {
      throw IntermediateAssertFailed("cl(D + T) meets U outside cl(D)");
    }
    out.intermediate_holds = true;
    out.preimage = set_union(t, set_difference(out.u, cl_d_));
    const std::vector<PointSet> maximal = maximal_qualifying(out.preimage);
    if (maximal.size() != 1 || maximal.front() != out.u) {
      throw IntermediateAssertFailed("U is not the unique maximum qualifying closed set");
    }
    out.unique_maximum = true;
  }
  if (apply(out.preimage) != t) {
    throw IntermediateAssertFailed("constructed preimage does not map back to T");
  }
  return out;
}

std::vector<PointSetPair> GeneralSurjection::noninjectivity_witnesses(std::size_t count) const {
  if (count == 0) throw std::invalid_argument("count must be positive");
  // W - cl(D) maps to the empty set for every cached W; skip cl(D) itself and
  // entries at an incomplete top level.
  std::vector<PointSet> sources;
  for (std::size_t i = 0; i < cache_.size(); ++i) {
    if (cache_[i] == cl_d_) continue;
    if (!complete_ && level_[i] == top_level_) continue;
    sources.push_back(set_difference(cache_[i], cl_d_));
  }
  std::vector<PointSetPair> out;
  for (std::size_t i = 0; i < sources.size() && out.size() < count; ++i) {
    for (std::size_t j = i + 1; j < sources.size() && out.size() < count; ++j) {
      if (apply(sources[i]) != apply(sources[j])) {
        throw InvariantViolation("collision pair failed re-evaluation");
      }
      out.emplace_back(sources[i], sources[j]);
    }
  }
  if (out.size() < count) {
    throw InsufficientWitnesses("only " + std::to_string(out.size()) +
                                " collision pairs available from the closed-set cache");
  }
  return out;
}

nlohmann::json GeneralSurjection::describe() const {
  return {{"geometry", to_string(op_.kind())},
          {"ground", op_.ground_size()},
          {"E", points_to_json(op_, e_)},
          {"D", points_to_json(op_, d_)},
          {"cl(D)", points_to_json(op_, cl_d_)},
          {"cached_closed_sets", cache_.size()},
          {"cache_complete", complete_}};
}

}  // namespace ddlab
