#include "ddlab/pregeometry.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>
#include <unordered_map>

#include "ddlab/errors.hpp"
#include "ddlab/gf2.hpp"

namespace ddlab {

// ------------------------------------------------------------ set helpers

PointSet make_point_set(std::vector<Point> points) {
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());
  return points;
}

bool is_subset(const PointSet& a, const PointSet& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

bool contains(const PointSet& s, Point p) { return std::binary_search(s.begin(), s.end(), p); }

PointSet set_union(const PointSet& a, const PointSet& b) {
  PointSet out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

PointSet set_difference(const PointSet& a, const PointSet& b) {
  PointSet out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

PointSet set_intersection(const PointSet& a, const PointSet& b) {
  PointSet out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

PointSet with_point(const PointSet& s, Point p) {
  PointSet out = s;
  auto it = std::lower_bound(out.begin(), out.end(), p);
  if (it == out.end() || *it != p) out.insert(it, p);
  return out;
}

PointSet without_point(const PointSet& s, Point p) {
  PointSet out = s;
  auto it = std::lower_bound(out.begin(), out.end(), p);
  if (it != out.end() && *it == p) out.erase(it);
  return out;
}

void for_each_subset_of_size(std::span<const Point> universe, std::size_t size,
                             const std::function<bool(const PointSet&)>& fn) {
  const std::size_t n = universe.size();
  if (size > n) return;
  std::vector<std::size_t> idx(size);
  std::iota(idx.begin(), idx.end(), 0);
  PointSet current(size);
  for (;;) {
    for (std::size_t i = 0; i < size; ++i) current[i] = universe[idx[i]];
    if (!fn(current)) return;
    std::size_t i = size;
    while (i > 0 && idx[i - 1] == n - size + i - 1) --i;
    if (i == 0) return;
    ++idx[i - 1];
    for (std::size_t j = i; j < size; ++j) idx[j] = idx[j - 1] + 1;
  }
}

void for_each_subset_up_to(std::size_t n, std::size_t max_size,
                           const std::function<bool(const PointSet&)>& fn) {
  PointSet universe(n);
  std::iota(universe.begin(), universe.end(), Point{0});
  bool keep_going = true;
  for (std::size_t size = 0; size <= std::min(n, max_size) && keep_going; ++size) {
    for_each_subset_of_size(universe, size, [&](const PointSet& s) {
      keep_going = fn(s);
      return keep_going;
    });
  }
}

// -------------------------------------------------------- operators

std::string to_string(GeometryKind kind) {
  switch (kind) {
    case GeometryKind::linear: return "linear";
    case GeometryKind::affine: return "affine";
    case GeometryKind::degenerate: return "degenerate";
    case GeometryKind::identity: return "identity";
    case GeometryKind::custom: return "custom";
  }
  return "custom";
}

GeometryKind geometry_kind_from_string(const std::string& name) {
  if (name == "linear") return GeometryKind::linear;
  if (name == "affine") return GeometryKind::affine;
  if (name == "degenerate") return GeometryKind::degenerate;
  if (name == "identity") return GeometryKind::identity;
  throw std::invalid_argument("unknown geometry: " + name);
}

ClosureOperator::ClosureOperator(std::size_t ground_size, GeometryKind kind, Fn fn, unsigned dim)
    : ground_size_(ground_size), kind_(kind), fn_(std::move(fn)), dim_(dim) {
  if (ground_size == 0) throw std::invalid_argument("ground set must be non-empty");
}

PointSet ClosureOperator::operator()(const PointSet& s) const {
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] >= ground_size_ || (i > 0 && s[i - 1] >= s[i])) {
      throw std::invalid_argument("closure input must be a sorted subset of the ground set");
    }
  }
  PointSet out = make_point_set(fn_(s));
  if (!out.empty() && out.back() >= ground_size_) {
    throw InvariantViolation("closure left the ground set");
  }
  return out;
}

PointSet ClosureOperator::ground() const {
  PointSet g(ground_size_);
  std::iota(g.begin(), g.end(), Point{0});
  return g;
}

ClosureOperator ClosureOperator::linear(unsigned dim) {
  if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("dimension must be in [1, 24]");
  return ClosureOperator(
      std::size_t{1} << dim, GeometryKind::linear,
      [](const PointSet& s) {
        std::vector<Bits> bits(s.begin(), s.end());
        std::vector<Bits> members = materialize_span(rref_basis(bits));
        return PointSet(members.begin(), members.end());
      },
      dim);
}

PointSet affine_hull(const PointSet& s) {
  PointSet hull = s;
  for (;;) {
    std::vector<Point> fresh;
    const std::size_t n = hull.size();
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        for (std::size_t k = j + 1; k < n; ++k) {
          const Point v = hull[i] ^ hull[j] ^ hull[k];
          if (!contains(hull, v)) fresh.push_back(v);
        }
      }
    }
    if (fresh.empty()) return hull;
    hull = set_union(hull, make_point_set(std::move(fresh)));
  }
}

ClosureOperator ClosureOperator::affine(unsigned dim) {
  if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("dimension must be in [1, 24]");
  return ClosureOperator(std::size_t{1} << dim, GeometryKind::affine, affine_hull, dim);
}

ClosureOperator ClosureOperator::degenerate(const Partition& blocks) {
  std::size_t n = 0;
  for (const auto& b : blocks) n += b.size();
  std::vector<std::size_t> block_of(n, n);
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (blocks[i].empty()) throw std::invalid_argument("partition blocks must be non-empty");
    for (Point p : blocks[i]) {
      if (p >= n || block_of[p] != n) {
        throw std::invalid_argument("blocks must partition the labels 0..N-1");
      }
      block_of[p] = i;
    }
  }
  Partition normalized;
  for (const auto& b : blocks) normalized.push_back(make_point_set(b));
  return ClosureOperator(n, GeometryKind::degenerate,
                         [normalized, block_of](const PointSet& s) {
                           PointSet out;
                           for (Point p : s) out = set_union(out, normalized[block_of[p]]);
                           return out;
                         });
}

ClosureOperator ClosureOperator::identity(std::size_t ground_size) {
  return ClosureOperator(ground_size, GeometryKind::identity,
                         [](const PointSet& s) { return s; });
}

ClosureOperator ClosureOperator::custom(std::size_t ground_size, Fn fn) {
  return ClosureOperator(ground_size, GeometryKind::custom, std::move(fn));
}

Partition partition_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw std::invalid_argument("partition must be a JSON array of arrays");
  Partition blocks;
  for (const auto& block : j) {
    if (!block.is_array()) throw std::invalid_argument("partition block must be an array");
    blocks.push_back(make_point_set(block.get<std::vector<Point>>()));
  }
  return blocks;
}

nlohmann::json points_to_json(const ClosureOperator& op, const PointSet& s) {
  nlohmann::json arr = nlohmann::json::array();
  const bool vectors = op.kind() == GeometryKind::linear || op.kind() == GeometryKind::affine;
  for (Point p : s) {
    if (vectors) {
      arr.push_back(to_bit_string(p, op.dim()));
    } else {
      arr.push_back(p);
    }
  }
  return arr;
}

PointSet points_from_json(const ClosureOperator& op, const nlohmann::json& j) {
  if (!j.is_array()) throw std::invalid_argument("expected a JSON array of points");
  std::vector<Point> pts;
  for (const auto& item : j) {
    if (item.is_string()) {
      pts.push_back(parse_vector(item.get<std::string>(), op.dim()).bits());
    } else {
      pts.push_back(item.get<Point>());
    }
  }
  PointSet s = make_point_set(std::move(pts));
  if (!s.empty() && s.back() >= op.ground_size()) {
    throw std::invalid_argument("point outside the ground set");
  }
  return s;
}

// ----------------------------------------------------------- reports

std::string to_string(CheckStatus status) {
  switch (status) {
    case CheckStatus::pass: return "PASS";
    case CheckStatus::fail: return "FAIL";
    case CheckStatus::bounded_pass: return "BOUNDED-PASS";
  }
  return "FAIL";
}

nlohmann::json to_json(const AxiomReport& report) {
  return nlohmann::json{{"axiom", report.axiom},
                        {"bound", report.bound},
                        {"status", to_string(report.status)},
                        {"instances", report.instances},
                        {"violations", report.violations},
                        {"counterexamples", report.counterexamples}};
}

namespace {

void record(AxiomReport& report, nlohmann::json witness) {
  ++report.violations;
  if (report.counterexamples.size() < kMaxReportedCounterexamples) {
    report.counterexamples.push_back(std::move(witness));
  }
}

class ClosureMemo {
 public:
  explicit ClosureMemo(const ClosureOperator& op) : op_(op) {}

  const PointSet& operator()(const PointSet& s) {
    auto it = cache_.find(s);
    if (it == cache_.end()) it = cache_.emplace(s, op_(s)).first;
    return it->second;
  }

 private:
  const ClosureOperator& op_;
  std::map<PointSet, PointSet> cache_;
};

}  // namespace

AxiomReport check_closure_axioms(const ClosureOperator& op, std::size_t max_subset) {
  if (max_subset > op.ground_size()) throw std::invalid_argument("bound exceeds ground size");
  AxiomReport report;
  report.axiom = "closure";
  report.bound = {{"max_subset", max_subset}};
  ClosureMemo cl(op);

  for_each_subset_up_to(op.ground_size(), max_subset, [&](const PointSet& s) {
    ++report.instances;
    const PointSet c = cl(s);
    if (!is_subset(s, c)) {
      record(report, {{"property", "extensivity"},
                      {"S", points_to_json(op, s)},
                      {"cl(S)", points_to_json(op, c)}});
    }
    const PointSet cc = op(c);
    if (cc != c) {
      record(report, {{"property", "idempotence"},
                      {"S", points_to_json(op, s)},
                      {"cl(S)", points_to_json(op, c)},
                      {"cl(cl(S))", points_to_json(op, cc)}});
    }
    return true;
  });

  for_each_subset_up_to(op.ground_size(), max_subset, [&](const PointSet& t) {
    const PointSet& ct = cl(t);
    const std::size_t subsets = std::size_t{1} << t.size();
    for (std::size_t mask = 0; mask + 1 < subsets; ++mask) {
      PointSet s;
      for (std::size_t i = 0; i < t.size(); ++i) {
        if ((mask >> i) & 1u) s.push_back(t[i]);
      }
      ++report.instances;
      if (!is_subset(cl(s), ct)) {
        record(report, {{"property", "monotonicity"},
                        {"S", points_to_json(op, s)},
                        {"T", points_to_json(op, t)}});
      }
    }
    return true;
  });

  report.status = report.violations == 0 ? CheckStatus::pass : CheckStatus::fail;
  return report;
}

AxiomReport check_exchange(const ClosureOperator& op, std::size_t max_subset) {
  if (max_subset > op.ground_size()) throw std::invalid_argument("bound exceeds ground size");
  AxiomReport report;
  report.axiom = "exchange";
  report.bound = {{"max_subset", max_subset}};
  const PointSet ground = op.ground();

  for_each_subset_up_to(op.ground_size(), max_subset, [&](const PointSet& s) {
    const PointSet outside = set_difference(ground, op(s));
    std::vector<PointSet> extended;
    extended.reserve(outside.size());
    for (Point x : outside) extended.push_back(op(with_point(s, x)));
    for (std::size_t i = 0; i < outside.size(); ++i) {
      for (std::size_t j = i + 1; j < outside.size(); ++j) {
        ++report.instances;
        const Point a = outside[i];
        const Point b = outside[j];
        const bool a_in_sb = contains(extended[j], a);
        const bool b_in_sa = contains(extended[i], b);
        if (a_in_sb != b_in_sa) {
          record(report, {{"S", points_to_json(op, s)},
                          {"a", points_to_json(op, {a})[0]},
                          {"b", points_to_json(op, {b})[0]},
                          {"a_in_cl(S+b)", a_in_sb},
                          {"b_in_cl(S+a)", b_in_sa}});
        }
      }
    }
    return true;
  });

  report.status = report.violations == 0 ? CheckStatus::pass : CheckStatus::fail;
  return report;
}

// ------------------------------------------------------ local homogeneity

namespace {

using Mask = std::uint64_t;

// A closed set together with its closed subsets, encoded as bit masks over
// the set's own (sorted) local indices.
struct LocalFamily {
  PointSet points;
  std::vector<Mask> closed;                  // sorted
  std::vector<std::vector<Mask>> by_top;     // closed masks grouped by highest index

  std::size_t index_of(Point p) const {
    return static_cast<std::size_t>(std::lower_bound(points.begin(), points.end(), p) -
                                    points.begin());
  }
};

LocalFamily make_family(const PointSet& points, const std::vector<PointSet>& all_closed) {
  LocalFamily fam;
  fam.points = points;
  fam.by_top.resize(points.size());
  for (const PointSet& x : all_closed) {
    if (x.size() > points.size() || !is_subset(x, points)) continue;
    Mask m = 0;
    for (Point p : x) m |= Mask{1} << fam.index_of(p);
    fam.closed.push_back(m);
    if (m != 0) fam.by_top[static_cast<std::size_t>(63 - __builtin_clzll(m))].push_back(m);
  }
  std::sort(fam.closed.begin(), fam.closed.end());
  return fam;
}

class PermutationSearch {
 public:
  PermutationSearch(const LocalFamily& fam, std::size_t& budget, nlohmann::json instance)
      : fam_(fam), budget_(budget), instance_(std::move(instance)) {}

  // Enumerates permutations of fam.points that map closed subsets to closed
  // subsets and agree with `fixed` (local index -> local image, or -1).
  // Stops when visit returns true; returns whether it stopped early.
  bool run(const std::vector<int>& fixed, const std::function<bool(const std::vector<int>&)>& visit) {
    const std::size_t n = fam_.points.size();
    image_.assign(n, -1);
    used_.assign(n, false);
    for (std::size_t i = 0; i < n; ++i) {
      if (fixed[i] >= 0) {
        if (used_[static_cast<std::size_t>(fixed[i])]) return false;
        used_[static_cast<std::size_t>(fixed[i])] = true;
      }
    }
    fixed_ = &fixed;
    visit_ = &visit;
    return descend(0);
  }

 private:
  bool consistent(std::size_t top) const {
    for (Mask m : fam_.by_top[top]) {
      Mask img = 0;
      for (Mask rest = m; rest != 0; rest &= rest - 1) {
        img |= Mask{1} << image_[static_cast<std::size_t>(__builtin_ctzll(rest))];
      }
      if (!std::binary_search(fam_.closed.begin(), fam_.closed.end(), img)) return false;
    }
    return true;
  }

  bool descend(std::size_t i) {
    if (i == fam_.points.size()) return (*visit_)(image_);
    if (budget_ == 0) {
      throw SearchBudgetExceeded("permutation search budget exhausted at instance " +
                                 instance_.dump());
    }
    --budget_;
    const int forced = (*fixed_)[i];
    if (forced >= 0) {
      image_[i] = forced;
      if (consistent(i) && descend(i + 1)) return true;
      image_[i] = -1;
      return false;
    }
    for (std::size_t j = 0; j < fam_.points.size(); ++j) {
      if (used_[j]) continue;
      used_[j] = true;
      image_[i] = static_cast<int>(j);
      if (consistent(i) && descend(i + 1)) return true;
      image_[i] = -1;
      used_[j] = false;
    }
    return false;
  }

  const LocalFamily& fam_;
  std::size_t& budget_;
  nlohmann::json instance_;
  std::vector<int> image_;
  std::vector<bool> used_;
  const std::vector<int>* fixed_ = nullptr;
  const std::function<bool(const std::vector<int>&)>* visit_ = nullptr;
};

// Every closed set of size <= max_size, by closing one point at a time from
// cl(empty); each closed X is cl of a chain of closed subsets of X.
std::vector<PointSet> closed_sets_up_to(const ClosureOperator& op, std::size_t max_size) {
  std::set<PointSet> seen;
  std::vector<PointSet> frontier;
  const PointSet base = op({});
  if (base.size() <= max_size) {
    seen.insert(base);
    frontier.push_back(base);
  }
  while (!frontier.empty()) {
    std::vector<PointSet> next;
    for (const PointSet& w : frontier) {
      for (Point p = 0; p < op.ground_size(); ++p) {
        if (contains(w, p)) continue;
        PointSet c = op(with_point(w, p));
        if (c.size() <= max_size && seen.insert(c).second) next.push_back(std::move(c));
      }
    }
    frontier = std::move(next);
  }
  std::vector<PointSet> out(seen.begin(), seen.end());
  std::stable_sort(out.begin(), out.end(),
                   [](const PointSet& a, const PointSet& b) { return a.size() < b.size(); });
  return out;
}

}  // namespace

AxiomReport check_local_homogeneity(const ClosureOperator& op, std::size_t max_closed,
                                    std::size_t max_extension, std::size_t search_budget) {
  if (max_closed > max_extension || max_extension > op.ground_size()) {
    throw std::invalid_argument("local homogeneity bounds need t <= u <= N");
  }
  if (max_extension > 64) throw std::invalid_argument("extension bound is limited to 64 points");
  AxiomReport report;
  report.axiom = "local_homogeneity";
  report.bound = {{"max_closed", max_closed}, {"max_extension", max_extension}};

  const std::vector<PointSet> closed = closed_sets_up_to(op, max_extension);
  std::size_t budget = search_budget;

  for (const PointSet& t : closed) {
    if (t.size() > max_closed) continue;
    const LocalFamily t_family = make_family(t, closed);
    std::vector<LocalFamily> extensions;
    for (const PointSet& u : closed) {
      if (u.size() > t.size() && is_subset(t, u)) extensions.push_back(make_family(u, closed));
    }
    for (const PointSet& s : closed) {
      if (s.size() > t.size() || !is_subset(s, t)) continue;
      const PointSet movable = set_difference(t, s);
      for (Point a : movable) {
        for (Point b : movable) {
          if (a == b) continue;  // the identity is a witness
          ++report.instances;
          nlohmann::json instance = {{"S", points_to_json(op, s)},
                                     {"T", points_to_json(op, t)},
                                     {"a", points_to_json(op, {a})[0]},
                                     {"b", points_to_json(op, {b})[0]}};
          std::vector<int> fixed(t.size(), -1);
          for (Point p : s) {
            fixed[t_family.index_of(p)] = static_cast<int>(t_family.index_of(p));
          }
          fixed[t_family.index_of(a)] = static_cast<int>(t_family.index_of(b));

          bool found_candidate = false;
          std::optional<PointSet> blocking;
          PermutationSearch on_t(t_family, budget, instance);
          const bool ok = on_t.run(fixed, [&](const std::vector<int>& pi) {
            found_candidate = true;
            for (const LocalFamily& u_family : extensions) {
              std::vector<int> pinned(u_family.points.size(), -1);
              for (std::size_t i = 0; i < t.size(); ++i) {
                pinned[u_family.index_of(t[i])] = static_cast<int>(
                    u_family.index_of(t[static_cast<std::size_t>(pi[i])]));
              }
              PermutationSearch on_u(u_family, budget, instance);
              if (!on_u.run(pinned, [](const std::vector<int>&) { return true; })) {
                if (!blocking) blocking = u_family.points;
                return false;
              }
            }
            return true;
          });
          if (!ok) {
            instance["reason"] = found_candidate
                                     ? "no cl-preserving permutation of T extends to every U"
                                     : "no cl-preserving permutation of T fixes S and maps a to b";
            if (blocking) instance["U"] = points_to_json(op, *blocking);
            record(report, std::move(instance));
          }
        }
      }
    }
  }

  report.status = report.violations == 0 ? CheckStatus::bounded_pass : CheckStatus::fail;
  return report;
}

// --------------------------------------------------------- independence

bool is_independent_incremental(const ClosureOperator& op, const PointSet& s,
                                const PointSet& over) {
  PointSet prefix = over;
  for (Point a : s) {
    if (contains(op(prefix), a)) return false;
    prefix = with_point(prefix, a);
  }
  return true;
}

bool is_independent(const ClosureOperator& op, const PointSet& s, const PointSet& over) {
  bool definitional = true;
  for (Point a : s) {
    if (contains(op(set_union(over, without_point(s, a))), a)) {
      definitional = false;
      break;
    }
  }
  if (definitional != is_independent_incremental(op, s, over)) {
    throw InvariantViolation("definitional and incremental independence tests disagree");
  }
  return definitional;
}

std::size_t closure_rank(const ClosureOperator& op, const PointSet& s) {
  PointSet basis;
  PointSet closure = op({});
  for (Point p : s) {
    if (contains(closure, p)) continue;
    basis = with_point(basis, p);
    closure = op(basis);
  }
  return basis.size();
}

nlohmann::json to_json(const CardinalityReport& report) {
  nlohmann::json j = {{"k", report.k},
                      {"mode", report.mode == SampleMode::exhaustive ? "exhaustive" : "sample"},
                      {"independent_sets", report.independent_sets},
                      {"status", report.ok() ? "PASS" : "FAIL"},
                      {"counterexamples", report.counterexamples}};
  j["common_value"] = report.common_value ? nlohmann::json(*report.common_value) : nlohmann::json();
  return j;
}

CardinalityReport verify_closure_cardinality(const ClosureOperator& op, std::size_t k,
                                             SampleMode mode, std::size_t samples,
                                             std::uint64_t seed) {
  if (k > op.ground_size()) throw std::invalid_argument("k exceeds ground size");
  CardinalityReport report;
  report.k = k;
  report.mode = mode;
  std::optional<std::size_t> value;
  PointSet first;
  bool mismatch = false;

  auto consider = [&](const PointSet& s) {
    if (!is_independent(op, s)) return;
    ++report.independent_sets;
    const std::size_t size = op(s).size();
    if (!value) {
      value = size;
      first = s;
    } else if (size != *value) {
      mismatch = true;
      if (report.counterexamples.size() < kMaxReportedCounterexamples) {
        report.counterexamples.push_back({{"S", points_to_json(op, first)},
                                          {"T", points_to_json(op, s)},
                                          {"|cl(S)|", *value},
                                          {"|cl(T)|", size}});
      }
    }
  };

  const PointSet ground = op.ground();
  if (mode == SampleMode::exhaustive) {
    for_each_subset_of_size(ground, k, [&](const PointSet& s) {
      consider(s);
      return true;
    });
  } else {
    std::mt19937_64 rng(seed);
    std::vector<Point> pool = ground;
    for (std::size_t draw = 0; draw < samples; ++draw) {
      for (std::size_t i = 0; i < k; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
        std::swap(pool[i], pool[pick(rng)]);
      }
      consider(make_point_set(std::vector<Point>(pool.begin(), pool.begin() + k)));
    }
  }
  if (report.independent_sets == 0) {
    throw NoIndependentSet("no independent set of size " + std::to_string(k) + " found");
  }
  if (!mismatch) report.common_value = value;
  return report;
}

}  // namespace ddlab
