#include <algorithm>
#include <map>
#include <numeric>
#include <stdexcept>

#include "ddlab/definability.hpp"
#include "ddlab/errors.hpp"

namespace ddlab {

namespace {

std::size_t checked_power(std::size_t base, unsigned exponent) {
  std::size_t out = 1;
  for (unsigned i = 0; i < exponent; ++i) {
    if (out > kMaxTupleSpace / base) {
      throw std::invalid_argument("tuple space N^k exceeds the supported size");
    }
    out *= base;
  }
  return out;
}

}  // namespace

Relation::Relation(std::size_t ground_size, unsigned arity) : n_(ground_size), k_(arity) {
  if (ground_size == 0) throw std::invalid_argument("ground set must be non-empty");
  member_.assign(checked_power(ground_size, arity), false);
}

Relation Relation::from_tuples(std::size_t ground_size, unsigned arity,
                               const std::vector<Tuple>& tuples) {
  Relation r(ground_size, arity);
  for (const Tuple& t : tuples) r.insert(t);
  return r;
}

Relation Relation::full(std::size_t ground_size, unsigned arity) {
  Relation r(ground_size, arity);
  r.member_.assign(r.member_.size(), true);
  r.count_ = r.member_.size();
  return r;
}

Relation Relation::from_mask(std::size_t ground_size, unsigned arity, std::uint64_t mask) {
  Relation r(ground_size, arity);
  if (r.member_.size() > 64) throw std::invalid_argument("mask form needs N^k <= 64");
  for (std::size_t i = 0; i < r.member_.size(); ++i) {
    if ((mask >> i) & 1u) {
      r.member_[i] = true;
      ++r.count_;
    }
  }
  return r;
}

std::size_t Relation::encode(std::span<const Point> t) const {
  if (t.size() != k_) {
    throw ArityMismatch("tuple of length " + std::to_string(t.size()) + " for arity " +
                        std::to_string(k_));
  }
  std::size_t index = 0;
  for (Point p : t) {
    if (p >= n_) throw std::invalid_argument("tuple entry outside the ground set");
    index = index * n_ + p;
  }
  return index;
}

Tuple Relation::decode(std::size_t index) const {
  Tuple t(k_);
  for (unsigned i = k_; i-- > 0;) {
    t[i] = static_cast<Point>(index % n_);
    index /= n_;
  }
  return t;
}

bool Relation::contains(std::span<const Point> t) const { return member_[encode(t)]; }

void Relation::insert(std::span<const Point> t) {
  auto ref = member_[encode(t)];
  if (!ref) {
    ref = true;
    ++count_;
  }
}

std::vector<Tuple> Relation::tuples() const {
  std::vector<Tuple> out;
  out.reserve(count_);
  for (std::size_t i = 0; i < member_.size(); ++i) {
    if (member_[i]) out.push_back(decode(i));
  }
  return out;
}

Relation Relation::section(Point a) const {
  if (k_ == 0) throw std::invalid_argument("a 0-ary relation has no sections");
  if (a >= n_) throw std::invalid_argument("section point outside the ground set");
  Relation out(n_, k_ - 1);
  const std::size_t stride = out.member_.size();
  for (std::size_t j = 0; j < stride; ++j) {
    if (member_[a * stride + j]) {
      out.member_[j] = true;
      ++out.count_;
    }
  }
  return out;
}

Relation Relation::permuted(std::span<const Point> sigma) const {
  if (sigma.size() != n_) throw std::invalid_argument("permutation size differs from N");
  Relation out(n_, k_);
  Tuple image(k_);
  for (std::size_t i = 0; i < member_.size(); ++i) {
    if (!member_[i]) continue;
    const Tuple t = decode(i);
    for (unsigned j = 0; j < k_; ++j) image[j] = sigma[t[j]];
    out.insert(image);
  }
  return out;
}

bool Relation::invariant_under_swap(Point c, Point d) const {
  if (c == d) return true;
  Tuple t(k_);
  for (std::size_t i = 0; i < member_.size(); ++i) {
    if (!member_[i]) continue;
    std::size_t rest = i;
    bool moved = false;
    for (unsigned j = k_; j-- > 0;) {
      Point p = static_cast<Point>(rest % n_);
      rest /= n_;
      if (p == c) {
        p = d;
        moved = true;
      } else if (p == d) {
        p = c;
        moved = true;
      }
      t[j] = p;
    }
    if (moved && !member_[encode(t)]) return false;
  }
  return true;
}

Relation relation_from_json(const nlohmann::json& j) {
  const auto n = j.at("n").get<std::size_t>();
  const auto k = j.at("k").get<unsigned>();
  if (k < 1) throw std::invalid_argument("relation arity must be at least 1");
  std::vector<Tuple> tuples;
  for (const auto& t : j.at("tuples")) {
    Tuple tuple = t.get<Tuple>();
    if (tuple.size() != k) throw ArityMismatch("tuple length differs from k");
    tuples.push_back(std::move(tuple));
  }
  return Relation::from_tuples(n, k, tuples);
}

nlohmann::json to_json(const Relation& r) {
  return {{"n", r.ground_size()}, {"k", r.arity()}, {"tuples", r.tuples()}};
}

// ---------------------------------------------------------------- supports

std::optional<std::pair<Point, Point>> moving_transposition(const Relation& r, const PointSet& e) {
  PointSet outside;
  for (Point p = 0; p < r.ground_size(); ++p) {
    if (!contains(e, p)) outside.push_back(p);
  }
  // Adjacent transpositions of the complement generate its symmetric group.
  for (std::size_t i = 0; i + 1 < outside.size(); ++i) {
    if (!r.invariant_under_swap(outside[i], outside[i + 1])) {
      return std::make_pair(outside[i], outside[i + 1]);
    }
  }
  return std::nullopt;
}

bool is_support(const Relation& r, const PointSet& e) { return !moving_transposition(r, e); }

MinimalSupport minimal_support(const Relation& r) {
  if (r.ground_size() < 2) throw std::invalid_argument("minimal_support needs N >= 2");
  const PointSet ground = [&] {
    PointSet g(r.ground_size());
    std::iota(g.begin(), g.end(), Point{0});
    return g;
  }();
  std::vector<PointSet> found;
  for (std::size_t size = 0; size <= ground.size() && found.empty(); ++size) {
    for_each_subset_of_size(ground, size, [&](const PointSet& e) {
      if (is_support(r, e)) found.push_back(e);
      return true;
    });
  }
  MinimalSupport out;
  out.support = found.front();
  out.minimum_candidates = found.size();
  out.ambiguous = found.size() > 1;
  // Two minimum supports whose union leaves room outside would make their
  // intersection a strictly smaller support.
  for (std::size_t i = 0; i < found.size(); ++i) {
    for (std::size_t j = i + 1; j < found.size(); ++j) {
      const PointSet u = set_union(found[i], found[j]);
      if (r.ground_size() - u.size() >= 2) {
        const bool smaller = is_support(r, set_intersection(found[i], found[j]));
        throw InvariantViolation(std::string("distinct minimum supports with room outside; ") +
                                 "intersection " + (smaller ? "is" : "is not") + " a support");
      }
    }
  }
  return out;
}

// ------------------------------------------------------ recursive support

namespace {

bool strict_majority(std::size_t count, std::size_t n) { return 2 * count > n; }

PointSet recursive_support(const Relation& r, SupportDecomposition* trace) {
  const std::size_t n = r.ground_size();
  PointSet ground(n);
  std::iota(ground.begin(), ground.end(), Point{0});

  if (r.arity() == 1) {
    PointSet members;
    for (Point a = 0; a < n; ++a) {
      if (r.contains_index(a)) members.push_back(a);
    }
    return 2 * members.size() <= n ? members : set_difference(ground, members);
  }

  std::vector<Relation> sections;
  std::vector<PointSet> section_support(n);
  sections.reserve(n);
  for (Point a = 0; a < n; ++a) {
    sections.push_back(r.section(a));
    section_support[a] = recursive_support(sections.back(), nullptr);
  }

  std::vector<SupportChain> chains(n);
  for (Point b = 0; b < n; ++b) {
    chains[b].element = b;
    chains[b].stages.push_back({b});
    for (;;) {
      const PointSet& current = chains[b].stages.back();
      PointSet next = current;
      for (Point a : current) next = set_union(next, section_support[a]);
      if (next == current) break;
      chains[b].stages.push_back(std::move(next));
    }
  }

  std::map<std::size_t, std::size_t> by_size;
  for (const auto& c : chains) ++by_size[c.fixed_point().size()];
  std::optional<std::size_t> m;
  for (const auto& [size, count] : by_size) {
    if (strict_majority(count, n)) m = size;
  }
  if (!m) throw MajorityTie("no chain size is shared by a strict majority of points");

  PointSet b_set;
  for (Point b = 0; b < n; ++b) {
    if (chains[b].fixed_point().size() == *m) b_set.push_back(b);
  }

  Partition blocks;
  for (Point b : b_set) {
    PointSet block = set_intersection(chains[b].fixed_point(), b_set);
    if (std::find(blocks.begin(), blocks.end(), block) == blocks.end()) {
      blocks.push_back(std::move(block));
    }
  }
  for (Point b : set_difference(ground, b_set)) blocks.push_back({b});
  std::vector<int> owner(n, -1);
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    for (Point p : blocks[i]) {
      if (owner[p] != -1) throw PartitionViolation("blocks F_b & B overlap without coinciding");
      owner[p] = static_cast<int>(i);
    }
  }
  if (std::find(owner.begin(), owner.end(), -1) != owner.end()) {
    throw PartitionViolation("blocks do not cover the ground set");
  }
  std::sort(blocks.begin(), blocks.end());

  PointSet c_set;
  for (Point b : b_set) {
    if (set_intersection(chains[b].fixed_point(), b_set) == PointSet{b}) c_set.push_back(b);
  }

  const PointSet outside_b = set_difference(ground, b_set);
  std::map<std::vector<EqualityType>, PointSet> classes;
  Tuple extended(r.arity());
  for (Point a : c_set) {
    if (!is_subset(section_support[a], with_point(outside_b, a))) {
      throw InvariantViolation("section support escapes (A - B) + {a}");
    }
    std::vector<EqualityType> fingerprint;
    const Relation& ra = sections[a];
    for (std::size_t i = 0; i < ra.tuple_space(); ++i) {
      if (!ra.contains_index(i)) continue;
      const Tuple t = ra.decode(i);
      extended[0] = a;
      std::copy(t.begin(), t.end(), extended.begin() + 1);
      fingerprint.push_back(EqualityType::of(extended, outside_b));
    }
    std::sort(fingerprint.begin(), fingerprint.end());
    fingerprint.erase(std::unique(fingerprint.begin(), fingerprint.end()), fingerprint.end());
    classes[std::move(fingerprint)].push_back(a);
  }
  std::optional<PointSet> d_set;
  for (auto& [fp, members] : classes) {
    if (strict_majority(members.size(), n)) d_set = members;
  }
  if (!d_set) throw MajorityTie("no fingerprint class holds a strict majority of points");

  PointSet support;
  for (Point b : set_difference(ground, *d_set)) {
    support = set_union(support, chains[b].fixed_point());
  }
  if (!is_support(r, support)) {
    throw InvariantViolation("recursively constructed set is not a support");
  }

  if (trace) {
    trace->section_supports = std::move(section_support);
    trace->chains = std::move(chains);
    trace->majority_size = *m;
    trace->majority_block = std::move(b_set);
    trace->blocks = std::move(blocks);
    trace->singleton_points = std::move(c_set);
    trace->majority_class = std::move(*d_set);
  }
  return support;
}

}  // namespace

RecursiveSupport support_recursive(const Relation& r) {
  if (r.ground_size() < 4) throw std::invalid_argument("support_recursive needs N >= 4");
  if (r.arity() < 1) throw std::invalid_argument("support_recursive needs arity >= 1");
  RecursiveSupport out;
  if (r.arity() == 1) {
    out.support = recursive_support(r, nullptr);
  } else {
    SupportDecomposition step;
    out.support = recursive_support(r, &step);
    out.step = std::move(step);
  }
  return out;
}

}  // namespace ddlab
