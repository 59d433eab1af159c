#include "ddlab/gf2.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>
#include <utility>

#include "ddlab/errors.hpp"

namespace ddlab {

namespace {

void check_dim(unsigned dim) {
  if (dim < 1 || dim > kMaxDim) {
    throw std::invalid_argument("dimension must be in [1, 24], got " + std::to_string(dim));
  }
}

Bits space_size(unsigned dim) { return Bits{1} << dim; }

unsigned pivot_of(Bits v) { return static_cast<unsigned>(std::bit_width(v)) - 1; }

// Gauss-Jordan on (x_i, y_i) pairs until x_i is the standard basis; the
// resulting y column j is the image of e_j under the map x_i -> y_i.
std::vector<Bits> solve_columns(std::vector<Bits> xs, std::vector<Bits> ys, unsigned dim) {
  for (unsigned j = 0; j < dim; ++j) {
    std::size_t pivot = j;
    while (pivot < dim && ((xs[pivot] >> j) & 1u) == 0) ++pivot;
    if (pivot == dim) throw std::invalid_argument("domain vectors do not form a basis");
    std::swap(xs[j], xs[pivot]);
    std::swap(ys[j], ys[pivot]);
    for (unsigned i = 0; i < dim; ++i) {
      if (i != j && ((xs[i] >> j) & 1u)) {
        xs[i] ^= xs[j];
        ys[i] ^= ys[j];
      }
    }
  }
  return ys;
}

}  // namespace

// ---------------------------------------------------------------- Vector

Vector::Vector(Bits bits, unsigned dim) : bits_(bits), dim_(dim) {
  check_dim(dim);
  if (bits >= space_size(dim)) {
    throw std::invalid_argument("vector bits exceed dimension " + std::to_string(dim));
  }
}

Vector operator+(Vector a, Vector b) {
  if (a.dim_ != b.dim_) throw std::invalid_argument("dimension mismatch in vector sum");
  return Vector(a.bits_ ^ b.bits_, a.dim_);
}

// ---------------------------------------------------------------- VecSet

VecSet::VecSet(unsigned dim) : dim_(dim) { check_dim(dim); }

VecSet::VecSet(unsigned dim, std::vector<Bits> members) : dim_(dim), members_(std::move(members)) {
  check_dim(dim);
  std::sort(members_.begin(), members_.end());
  members_.erase(std::unique(members_.begin(), members_.end()), members_.end());
  if (!members_.empty() && members_.back() >= space_size(dim)) {
    throw std::invalid_argument("vector bits exceed dimension " + std::to_string(dim));
  }
}

VecSet::VecSet(unsigned dim, std::initializer_list<Bits> members)
    : VecSet(dim, std::vector<Bits>(members)) {}

VecSet VecSet::full(unsigned dim) {
  check_dim(dim);
  std::vector<Bits> all(space_size(dim));
  for (Bits v = 0; v < space_size(dim); ++v) all[v] = v;
  return VecSet(dim, std::move(all));
}

bool VecSet::contains(Bits v) const {
  return std::binary_search(members_.begin(), members_.end(), v);
}

bool VecSet::contains(Vector v) const { return v.dim() == dim_ && contains(v.bits()); }

bool VecSet::is_subset_of(const VecSet& other) const {
  return std::includes(other.members_.begin(), other.members_.end(), members_.begin(),
                       members_.end());
}

void VecSet::insert(Bits v) {
  if (v >= space_size(dim_)) throw std::invalid_argument("vector bits exceed dimension");
  auto it = std::lower_bound(members_.begin(), members_.end(), v);
  if (it == members_.end() || *it != v) members_.insert(it, v);
}

void VecSet::erase(Bits v) {
  auto it = std::lower_bound(members_.begin(), members_.end(), v);
  if (it != members_.end() && *it == v) members_.erase(it);
}

VecSet VecSet::united(const VecSet& other) const {
  std::vector<Bits> out;
  std::set_union(members_.begin(), members_.end(), other.members_.begin(), other.members_.end(),
                 std::back_inserter(out));
  return VecSet(dim_, std::move(out));
}

VecSet VecSet::minus(const VecSet& other) const {
  std::vector<Bits> out;
  std::set_difference(members_.begin(), members_.end(), other.members_.begin(),
                      other.members_.end(), std::back_inserter(out));
  return VecSet(dim_, std::move(out));
}

VecSet VecSet::intersected(const VecSet& other) const {
  std::vector<Bits> out;
  std::set_intersection(members_.begin(), members_.end(), other.members_.begin(),
                        other.members_.end(), std::back_inserter(out));
  return VecSet(dim_, std::move(out));
}

// ------------------------------------------------------------- LinearMap

LinearMap::LinearMap(unsigned dim, std::vector<Bits> columns)
    : dim_(dim), columns_(std::move(columns)) {
  check_dim(dim);
  if (columns_.size() != dim) throw std::invalid_argument("a linear map needs d columns");
  for (Bits c : columns_) {
    if (c >= space_size(dim)) throw std::invalid_argument("column exceeds dimension");
  }
}

LinearMap LinearMap::identity(unsigned dim) {
  check_dim(dim);
  std::vector<Bits> cols(dim);
  for (unsigned i = 0; i < dim; ++i) cols[i] = Bits{1} << i;
  return LinearMap(dim, std::move(cols));
}

LinearMap LinearMap::from_basis_images(std::span<const Bits> domain_basis,
                                       std::span<const Bits> images, unsigned dim) {
  check_dim(dim);
  if (domain_basis.size() != dim || images.size() != dim) {
    throw std::invalid_argument("basis and images must both have d entries");
  }
  std::vector<Bits> xs(domain_basis.begin(), domain_basis.end());
  std::vector<Bits> ys(images.begin(), images.end());
  return LinearMap(dim, solve_columns(std::move(xs), std::move(ys), dim));
}

Bits LinearMap::apply(Bits v) const {
  Bits out = 0;
  while (v != 0) {
    out ^= columns_[static_cast<unsigned>(std::countr_zero(v))];
    v &= v - 1;
  }
  return out;
}

Vector LinearMap::apply(Vector v) const {
  if (v.dim() != dim_) throw std::invalid_argument("dimension mismatch applying map");
  return Vector(apply(v.bits()), dim_);
}

VecSet LinearMap::apply(const VecSet& s) const {
  if (s.dim() != dim_) throw std::invalid_argument("dimension mismatch applying map");
  std::vector<Bits> out;
  out.reserve(s.size());
  for (Bits v : s) out.push_back(apply(v));
  return VecSet(dim_, std::move(out));
}

std::size_t LinearMap::rank() const { return ddlab::rank(columns_); }

LinearMap LinearMap::compose(const LinearMap& inner) const {
  if (inner.dim_ != dim_) throw std::invalid_argument("dimension mismatch composing maps");
  std::vector<Bits> cols(dim_);
  for (unsigned i = 0; i < dim_; ++i) cols[i] = apply(inner.columns_[i]);
  return LinearMap(dim_, std::move(cols));
}

LinearMap LinearMap::inverse() const {
  if (!is_invertible()) throw std::invalid_argument("map is not invertible");
  std::vector<Bits> standard(dim_);
  for (unsigned i = 0; i < dim_; ++i) standard[i] = Bits{1} << i;
  return LinearMap(dim_, solve_columns(columns_, std::move(standard), dim_));
}

// ------------------------------------------------------------ elimination

std::vector<Bits> rref_basis(std::span<const Bits> vectors) {
  std::vector<Bits> rows;
  for (Bits v : vectors) {
    for (Bits r : rows) {
      if ((v >> pivot_of(r)) & 1u) v ^= r;
    }
    if (v == 0) continue;
    // Keep rows sorted by descending pivot so later reductions see them in
    // the right order.
    auto it = std::find_if(rows.begin(), rows.end(), [&](Bits r) { return r < v; });
    rows.insert(it, v);
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const unsigned p = pivot_of(rows[i]);
    for (std::size_t j = 0; j < rows.size(); ++j) {
      if (j != i && ((rows[j] >> p) & 1u)) rows[j] ^= rows[i];
    }
  }
  return rows;
}

std::size_t rank(std::span<const Bits> vectors) { return rref_basis(vectors).size(); }

std::size_t rank(const VecSet& s) { return rank(s.members()); }

Bits reduce(std::span<const Bits> rref, Bits v) {
  for (Bits r : rref) {
    if ((v >> pivot_of(r)) & 1u) v ^= r;
  }
  return v;
}

bool in_span(std::span<const Bits> rref, Bits v) { return reduce(rref, v) == 0; }

std::vector<Bits> materialize_span(std::span<const Bits> basis) {
  std::vector<Bits> out;
  out.reserve(std::size_t{1} << basis.size());
  out.push_back(0);
  for (Bits b : basis) {
    const std::size_t n = out.size();
    for (std::size_t i = 0; i < n; ++i) out.push_back(out[i] ^ b);
  }
  std::sort(out.begin(), out.end());
  return out;
}

Subspace span(const VecSet& vs) {
  Subspace s;
  s.dim = vs.dim();
  s.basis = rref_basis(vs.members());
  s.members = VecSet(vs.dim(), materialize_span(s.basis));
  return s;
}

std::vector<Vector> extend_independent(const VecSet& avoid, std::size_t count) {
  const unsigned dim = avoid.dim();
  std::vector<Bits> basis = rref_basis(avoid.members());
  if (basis.size() + count > dim) {
    throw DimensionExhausted("rank " + std::to_string(basis.size()) + " + " +
                             std::to_string(count) + " exceeds dimension " +
                             std::to_string(dim));
  }
  std::vector<Vector> out;
  out.reserve(count);
  for (std::size_t j = 0; j < count; ++j) {
    Bits v = 1;
    while (in_span(basis, v)) ++v;
    out.emplace_back(v, dim);
    basis.push_back(v);
    basis = rref_basis(basis);
  }
  return out;
}

// --------------------------------------------------------- enumeration

std::uint64_t gaussian_binomial(unsigned n, unsigned k) {
  if (k > n) return 0;
  // Pascal-type recurrence [n,k] = [n-1,k-1] + 2^k [n-1,k], saturating.
  std::vector<unsigned __int128> row(k + 1, 0);
  row[0] = 1;
  constexpr unsigned __int128 kSat = ~static_cast<std::uint64_t>(0);
  for (unsigned m = 1; m <= n; ++m) {
    for (unsigned j = std::min(m, k); j >= 1; --j) {
      unsigned __int128 v = row[j - 1] + (static_cast<unsigned __int128>(1) << j) * row[j];
      row[j] = v > kSat ? kSat : v;
    }
  }
  return static_cast<std::uint64_t>(row[k]);
}

std::uint64_t count_subspaces(unsigned dim, std::optional<std::size_t> max_card) {
  check_dim(dim);
  std::uint64_t total = 0;
  for (unsigned r = 0; r <= dim; ++r) {
    if (max_card && (std::uint64_t{1} << r) > *max_card) break;
    const std::uint64_t g = gaussian_binomial(dim, r);
    total = (total > ~std::uint64_t{0} - g) ? ~std::uint64_t{0} : total + g;
  }
  return total;
}

namespace {

// Emits every rref basis of rank r whose pivots are given, filling the free
// (non-pivot, below-pivot) coordinates of each row in turn.
void fill_rows(unsigned row, const std::vector<unsigned>& pivots, std::vector<Bits>& basis,
               std::vector<Subspace>& out, unsigned dim) {
  if (row == pivots.size()) {
    Subspace s;
    s.dim = dim;
    s.basis = basis;
    s.members = VecSet(dim, materialize_span(basis));
    out.push_back(std::move(s));
    return;
  }
  std::vector<unsigned> free;
  for (unsigned q = 0; q < pivots[row]; ++q) {
    if (std::find(pivots.begin(), pivots.end(), q) == pivots.end()) free.push_back(q);
  }
  const std::size_t combos = std::size_t{1} << free.size();
  for (std::size_t mask = 0; mask < combos; ++mask) {
    Bits v = Bits{1} << pivots[row];
    for (std::size_t i = 0; i < free.size(); ++i) {
      if ((mask >> i) & 1u) v |= Bits{1} << free[i];
    }
    basis[row] = v;
    fill_rows(row + 1, pivots, basis, out, dim);
  }
}

void choose_pivots(unsigned rank, unsigned next_max, std::vector<unsigned>& pivots,
                   std::vector<Subspace>& out, unsigned dim) {
  if (pivots.size() == rank) {
    std::vector<Bits> basis(rank);
    fill_rows(0, pivots, basis, out, dim);
    return;
  }
  for (unsigned p = next_max; p-- > 0;) {
    if (p + 1 < rank - pivots.size()) break;
    pivots.push_back(p);
    choose_pivots(rank, p, pivots, out, dim);
    pivots.pop_back();
  }
}

}  // namespace

std::vector<Subspace> enumerate_subspaces(unsigned dim, std::optional<std::size_t> max_card,
                                          std::size_t cap) {
  check_dim(dim);
  if (!max_card && dim > kMaxUnboundedEnumerationDim) {
    throw std::invalid_argument("unbounded subspace enumeration requires d <= 12");
  }
  const std::uint64_t expected = count_subspaces(dim, max_card);
  if (expected > cap) {
    throw BudgetExceeded(std::to_string(expected) + " subspaces exceed the cap of " +
                         std::to_string(cap));
  }
  std::vector<Subspace> out;
  out.reserve(static_cast<std::size_t>(expected));
  for (unsigned r = 0; r <= dim; ++r) {
    if (max_card && (std::uint64_t{1} << r) > *max_card) break;
    std::vector<unsigned> pivots;
    choose_pivots(r, dim, pivots, out, dim);
  }
  std::sort(out.begin(), out.end(), [](const Subspace& a, const Subspace& b) {
    if (a.cardinality() != b.cardinality()) return a.cardinality() < b.cardinality();
    return a.members < b.members;
  });
  return out;
}

// ----------------------------------------------------------- group maps

LinearMap fixing_linear_map(const VecSet& e, Vector u, Vector v) {
  const unsigned dim = e.dim();
  if (u.dim() != dim || v.dim() != dim) {
    throw std::invalid_argument("dimension mismatch in fixing_linear_map");
  }
  const std::vector<Bits> fixed = rref_basis(e.members());
  if (in_span(fixed, u.bits())) throw PointInSpan(to_string(u) + " lies in span(E)");
  if (in_span(fixed, v.bits())) throw PointInSpan(to_string(v) + " lies in span(E)");

  auto complete = [&](Bits moved) {
    std::vector<Bits> basis = fixed;
    basis.push_back(moved);
    std::vector<Bits> reduced = rref_basis(basis);
    for (Bits w = 1; basis.size() < dim; ++w) {
      if (!in_span(reduced, w)) {
        basis.push_back(w);
        reduced = rref_basis(basis);
      }
    }
    return basis;
  };
  const std::vector<Bits> domain = complete(u.bits());
  const std::vector<Bits> codomain = complete(v.bits());
  LinearMap m = LinearMap::from_basis_images(domain, codomain, dim);
  if (!m.is_invertible() || m.apply(u.bits()) != v.bits()) {
    throw InvariantViolation("fixing_linear_map produced an invalid map");
  }
  return m;
}

LinearMap random_invertible(unsigned dim, std::mt19937_64& rng) {
  check_dim(dim);
  std::uniform_int_distribution<Bits> coord(0, space_size(dim) - 1);
  for (;;) {
    std::vector<Bits> cols(dim);
    for (auto& c : cols) c = coord(rng);
    if (rank(cols) == dim) return LinearMap(dim, std::move(cols));
  }
}

std::vector<LinearMap> all_invertible_maps(unsigned dim) {
  check_dim(dim);
  if (dim > 4) throw std::invalid_argument("GL(d,2) enumeration is limited to d <= 4");
  std::vector<LinearMap> out;
  const std::uint64_t total = std::uint64_t{1} << (dim * dim);
  for (std::uint64_t code = 0; code < total; ++code) {
    std::vector<Bits> cols(dim);
    for (unsigned i = 0; i < dim; ++i) {
      cols[i] = static_cast<Bits>((code >> (i * dim)) & (space_size(dim) - 1));
    }
    if (rank(cols) == dim) out.emplace_back(dim, std::move(cols));
  }
  return out;
}

// ------------------------------------------------------- serialization

std::string to_bit_string(Bits v, unsigned dim) {
  std::string s(dim, '0');
  for (unsigned i = 0; i < dim; ++i) {
    if ((v >> i) & 1u) s[i] = '1';
  }
  return s;
}

std::string to_string(Vector v) { return to_bit_string(v.bits(), v.dim()); }

Vector parse_vector(std::string_view text) {
  if (text.empty() || text.size() > kMaxDim) {
    throw std::invalid_argument("vector string must have 1..24 characters");
  }
  Bits bits = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '1') {
      bits |= Bits{1} << i;
    } else if (text[i] != '0') {
      throw std::invalid_argument("vector string may only contain 0 and 1: " + std::string(text));
    }
  }
  return Vector(bits, static_cast<unsigned>(text.size()));
}

Vector parse_vector(std::string_view text, unsigned dim) {
  Vector v = parse_vector(text);
  if (v.dim() != dim) {
    throw std::invalid_argument("vector " + std::string(text) + " does not have dimension " +
                                std::to_string(dim));
  }
  return v;
}

nlohmann::json bit_strings(const VecSet& s) {
  nlohmann::json arr = nlohmann::json::array();
  for (Bits v : s) arr.push_back(to_bit_string(v, s.dim()));
  return arr;
}

nlohmann::json to_json(const VecSet& s) {
  return nlohmann::json{{"dim", s.dim()}, {"members", bit_strings(s)}};
}

VecSet vecset_from_strings(const nlohmann::json& array, unsigned dim) {
  if (!array.is_array()) throw std::invalid_argument("expected a JSON array of bit strings");
  std::vector<Bits> members;
  for (const auto& item : array) {
    members.push_back(parse_vector(item.get<std::string>(), dim).bits());
  }
  return VecSet(dim, std::move(members));
}

VecSet vecset_from_json(const nlohmann::json& j) {
  return vecset_from_strings(j.at("members"), j.at("dim").get<unsigned>());
}

}  // namespace ddlab
