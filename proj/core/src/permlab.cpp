#include "ddlab/permlab.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "ddlab/errors.hpp"

namespace ddlab {

namespace {

constexpr std::size_t kMaxWitnesses = 8;

nlohmann::json map_to_json(const LinearMap& m) {
  nlohmann::json cols = nlohmann::json::array();
  for (Bits c : m.columns()) cols.push_back(to_bit_string(c, m.dim()));
  return cols;
}

VecSet random_subset(unsigned dim, std::mt19937_64& rng) {
  std::vector<Bits> members;
  for (Bits v = 0; v < (Bits{1} << dim); ++v) {
    if (rng() & 1u) members.push_back(v);
  }
  return VecSet(dim, std::move(members));
}

}  // namespace

bool verify_moving_map(const VecSet& e, const MovingMap& w) {
  if (!w.map.is_invertible() || w.map.apply(w.u) != w.v) return false;
  for (Bits x : materialize_span(rref_basis(e.members()))) {
    if (w.map.apply(x) != x) return false;
  }
  return true;
}

OrbitPartition stabilizer_orbits(const VecSet& e) {
  const unsigned d = e.dim();
  if (d < 1) throw std::invalid_argument("stabilizer_orbits needs d >= 1");
  OrbitPartition out;
  out.dim = d;
  out.e = e;
  const VecSet fixed(d, materialize_span(rref_basis(e.members())));
  for (Bits x : fixed) out.blocks.push_back(VecSet(d, {x}));
  const VecSet rest = VecSet::full(d).minus(fixed);
  if (!rest.empty()) {
    out.blocks.push_back(rest);
    const auto m = rest.members();
    for (std::size_t i = 0; i + 1 < m.size(); ++i) {
      const Vector u(m[i], d);
      const Vector v(m[i + 1], d);
      out.witnesses.push_back({u, v, fixing_linear_map(e, u, v)});
    }
  }
  return out;
}

nlohmann::json to_json(const OrbitPartition& p) {
  nlohmann::json blocks = nlohmann::json::array();
  for (const auto& b : p.blocks) blocks.push_back(bit_strings(b));
  nlohmann::json witnesses = nlohmann::json::array();
  for (const auto& w : p.witnesses) {
    witnesses.push_back({{"u", to_string(w.u)}, {"v", to_string(w.v)}, {"map", map_to_json(w.map)}});
  }
  return {{"dim", p.dim}, {"e", bit_strings(p.e)}, {"blocks", blocks}, {"witnesses", witnesses}};
}

std::string to_string(DichotomyCase c) {
  switch (c) {
    case DichotomyCase::subset_of_span:
      return "subset-of-span";
    case DichotomyCase::complement_subset_of_span:
      return "complement-subset-of-span";
    case DichotomyCase::not_invariant:
      return "not-invariant";
  }
  return "unknown";
}

DichotomyReport check_dichotomy(const VecSet& b, const VecSet& e) {
  if (b.dim() != e.dim()) throw std::invalid_argument("B and E differ in dimension");
  const unsigned d = e.dim();
  const std::vector<Bits> basis = rref_basis(e.members());
  std::optional<Bits> inside;
  std::optional<Bits> outside;
  for (Bits x = 0; x < (Bits{1} << d); ++x) {
    if (in_span(basis, x)) continue;
    auto& slot = b.contains(x) ? inside : outside;
    if (!slot) slot = x;
    if (inside && outside) break;
  }
  DichotomyReport out;
  if (inside && outside) {
    out.result = DichotomyCase::not_invariant;
    const Vector u(*inside, d);
    const Vector v(*outside, d);
    out.witness = MovingMap{u, v, fixing_linear_map(e, u, v)};
  } else if (!inside) {
    out.result = DichotomyCase::subset_of_span;
  } else {
    out.result = DichotomyCase::complement_subset_of_span;
  }
  return out;
}

nlohmann::json to_json(const DichotomyReport& r) {
  nlohmann::json j = {{"result", to_string(r.result)}};
  if (r.witness) {
    j["witness"] = {{"u", to_string(r.witness->u)},
                    {"v", to_string(r.witness->v)},
                    {"map", map_to_json(r.witness->map)}};
  }
  return j;
}

nlohmann::json to_json(const EquivarianceReport& r) {
  return {{"check", r.check},
          {"params", r.params},
          {"trials", r.trials},
          {"failures", r.failures},
          {"witnesses", r.witnesses}};
}

std::mt19937_64 trial_rng(std::uint64_t seed, std::uint64_t trial) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(trial), static_cast<std::uint32_t>(trial >> 32)};
  return std::mt19937_64(seq);
}

EquivarianceReport check_equivariance_linear(unsigned dim, std::size_t trials,
                                             std::uint64_t seed) {
  if (dim < 1 || dim > 10) throw std::invalid_argument("linear equivariance needs 1 <= d <= 10");
  EquivarianceReport out;
  out.check = "equivariance-linear";
  out.params = {{"dim", dim}, {"seed", seed}};
  for (std::size_t i = 0; i < trials; ++i) {
    auto rng = trial_rng(seed, i);
    const LinearMap pi = random_invertible(dim, rng);
    const VecSet s = random_subset(dim, rng);
    ++out.trials;
    if (f_linear(pi.apply(s)) != pi.apply(f_linear(s))) {
      ++out.failures;
      if (out.witnesses.size() < kMaxWitnesses) {
        out.witnesses.push_back({{"trial", i}, {"s", bit_strings(s)}, {"map", map_to_json(pi)}});
      }
    }
  }
  return out;
}

EquivarianceReport check_equivariance_linear_exhaustive(unsigned dim, std::size_t max_card) {
  EquivarianceReport out;
  out.check = "equivariance-linear-exhaustive";
  out.params = {{"dim", dim}, {"max_card", max_card}};
  const std::vector<LinearMap> maps = all_invertible_maps(dim);
  const std::size_t n = std::size_t{1} << dim;
  for_each_subset_up_to(n, max_card, [&](const PointSet& points) {
    const VecSet s(dim, std::vector<Bits>(points.begin(), points.end()));
    const VecSet fs = f_linear(s);
    for (const auto& pi : maps) {
      ++out.trials;
      if (f_linear(pi.apply(s)) != pi.apply(fs)) {
        ++out.failures;
        if (out.witnesses.size() < kMaxWitnesses) {
          out.witnesses.push_back({{"s", bit_strings(s)}, {"map", map_to_json(pi)}});
        }
      }
    }
    return true;
  });
  return out;
}

EquivarianceReport check_equivariance_general(const GeneralSurjection& inst, std::size_t trials,
                                              std::uint64_t seed) {
  const ClosureOperator& op = inst.op();
  if (op.kind() != GeometryKind::linear && op.kind() != GeometryKind::affine) {
    throw std::invalid_argument("general equivariance needs a linear or affine instance");
  }
  const unsigned d = op.dim();
  const Bits p = op.kind() == GeometryKind::affine && !inst.d().empty() ? inst.d().front() : 0;
  std::vector<Bits> shifted;
  for (Point x : inst.d()) shifted.push_back(x ^ p);
  const std::vector<Bits> fixed_basis = rref_basis(shifted);
  std::vector<Bits> domain = fixed_basis;
  for (const Vector& v : extend_independent(VecSet(d, fixed_basis), d - fixed_basis.size())) {
    domain.push_back(v.bits());
  }

  EquivarianceReport out;
  out.check = "equivariance-general";
  out.params = {{"geometry", to_string(op.kind())}, {"dim", d}, {"seed", seed}};
  const Bits mask = (Bits{1} << d) - 1;
  for (std::size_t i = 0; i < trials; ++i) {
    auto rng = trial_rng(seed, i);
    std::optional<LinearMap> m;
    while (!m) {
      std::vector<Bits> images = fixed_basis;
      while (images.size() < d) images.push_back(static_cast<Bits>(rng()) & mask);
      LinearMap candidate = LinearMap::from_basis_images(domain, images, d);
      if (candidate.is_invertible()) m = std::move(candidate);
    }
    auto pi = [&](Point x) { return static_cast<Point>(m->apply(x ^ p) ^ p); };
    auto image = [&](const PointSet& s) {
      PointSet out_set;
      for (Point x : s) out_set.push_back(pi(x));
      return make_point_set(std::move(out_set));
    };
    PointSet s;
    for (Point x = 0; x < op.ground_size(); ++x) {
      if (rng() & 1u) s.push_back(x);
    }
    ++out.trials;
    if (inst.apply(image(s)) != image(inst.apply(s))) {
      ++out.failures;
      if (out.witnesses.size() < kMaxWitnesses) {
        out.witnesses.push_back(
            {{"trial", i}, {"s", points_to_json(op, s)}, {"map", map_to_json(*m)}});
      }
    }
  }
  return out;
}

EquivarianceReport check_synthesis_equivariance(std::size_t ground_size, unsigned arity,
                                                std::size_t trials, std::uint64_t seed,
                                                std::size_t max_params,
                                                std::vector<Formula>* produced) {
  EquivarianceReport out;
  out.check = "equivariance-synthesis";
  out.params = {{"n", ground_size}, {"k", arity}, {"seed", seed}, {"max_params", max_params}};
  const std::size_t n = ground_size;
  for (std::size_t i = 0; i < trials; ++i) {
    auto rng = trial_rng(seed, i);
    std::vector<Point> labels(n);
    std::iota(labels.begin(), labels.end(), Point{0});
    std::shuffle(labels.begin(), labels.end(), rng);
    const std::size_t params = rng() % (std::min(max_params, n) + 1);
    const PointSet e = make_point_set({labels.begin(), labels.begin() + params});

    const auto types = enumerate_equality_types(arity, e, n);
    std::vector<EqualityType> chosen;
    for (const auto& t : types) {
      if (rng() & 1u) chosen.push_back(t);
    }
    Relation r(n, arity);
    for (std::size_t idx = 0; idx < r.tuple_space(); ++idx) {
      const Tuple t = r.decode(idx);
      if (std::binary_search(chosen.begin(), chosen.end(), EqualityType::of(t, e))) r.insert(t);
    }

    // One permutation fixing E pointwise and one arbitrary permutation.
    std::vector<Point> outside;
    for (Point p = 0; p < n; ++p) {
      if (!contains(e, p)) outside.push_back(p);
    }
    std::vector<Point> moved = outside;
    std::shuffle(moved.begin(), moved.end(), rng);
    std::vector<Point> fixing(n);
    std::iota(fixing.begin(), fixing.end(), Point{0});
    for (std::size_t j = 0; j < outside.size(); ++j) fixing[outside[j]] = moved[j];
    std::vector<Point> sigma(n);
    std::iota(sigma.begin(), sigma.end(), Point{0});
    std::shuffle(sigma.begin(), sigma.end(), rng);

    ++out.trials;
    std::string problem;
    try {
      const Formula f = synthesize_formula(r, e);
      if (produced) produced->push_back(f);
      if (synthesize_formula(r.permuted(fixing), e) != f) {
        problem = "formula changed under a permutation fixing E";
      } else {
        std::vector<Point> sigma_e;
        for (Point p : e) sigma_e.push_back(sigma[p]);
        const Formula moved_f = synthesize_formula(r.permuted(sigma), make_point_set(sigma_e));
        if (moved_f != canonicalize(relabel(f, sigma), n)) {
          problem = "synthesis is not covariant under relabeling";
        }
      }
    } catch (const Error& err) {
      problem = err.what();
    }
    if (!problem.empty()) {
      ++out.failures;
      if (out.witnesses.size() < kMaxWitnesses) {
        out.witnesses.push_back({{"trial", i}, {"relation", to_json(r)}, {"e", e},
                                 {"problem", problem}});
      }
    }
  }
  return out;
}

}  // namespace ddlab
