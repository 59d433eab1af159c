#pragma once

// Exact linear algebra over F2 on d-bit vectors (d <= 24).
//
// A vector is a d-bit integer: coordinate i is bit i. Every deterministic
// choice made here (pivots, least vectors, basis completion) uses ascending
// integer order so constructions are reproducible.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace ddlab {

using Bits = std::uint32_t;

inline constexpr unsigned kMaxDim = 24;
inline constexpr unsigned kMaxUnboundedEnumerationDim = 12;
inline constexpr std::size_t kDefaultSubspaceCap = std::size_t{1} << 21;

class Vector {
 public:
  Vector(Bits bits, unsigned dim);

  Bits bits() const noexcept { return bits_; }
  unsigned dim() const noexcept { return dim_; }
  bool is_zero() const noexcept { return bits_ == 0; }
  bool coordinate(unsigned i) const noexcept { return (bits_ >> i) & 1u; }

  friend Vector operator+(Vector a, Vector b);
  friend bool operator==(Vector a, Vector b) = default;
  friend auto operator<=>(Vector a, Vector b) = default;

 private:
  Bits bits_;
  unsigned dim_;
};

// Finite set of vectors of a common dimension, stored sorted and unique.
class VecSet {
 public:
  explicit VecSet(unsigned dim);
  VecSet(unsigned dim, std::vector<Bits> members);
  VecSet(unsigned dim, std::initializer_list<Bits> members);

  static VecSet full(unsigned dim);

  unsigned dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return members_.size(); }
  bool empty() const noexcept { return members_.empty(); }
  bool contains(Bits v) const;
  bool contains(Vector v) const;
  bool contains_zero() const { return !members_.empty() && members_.front() == 0; }
  bool is_subset_of(const VecSet& other) const;

  void insert(Bits v);
  void erase(Bits v);

  std::span<const Bits> members() const noexcept { return members_; }
  auto begin() const noexcept { return members_.begin(); }
  auto end() const noexcept { return members_.end(); }

  VecSet united(const VecSet& other) const;
  VecSet minus(const VecSet& other) const;
  VecSet intersected(const VecSet& other) const;

  friend bool operator==(const VecSet&, const VecSet&) = default;
  friend auto operator<=>(const VecSet&, const VecSet&) = default;

 private:
  unsigned dim_;
  std::vector<Bits> members_;
};

struct Subspace {
  unsigned dim = 0;
  std::vector<Bits> basis;  // reduced row-echelon, descending pivots
  VecSet members{1};

  std::size_t rank() const noexcept { return basis.size(); }
  std::size_t cardinality() const noexcept { return members.size(); }
};

// d x d matrix over F2 given by the images of the standard basis vectors.
class LinearMap {
 public:
  LinearMap(unsigned dim, std::vector<Bits> columns);

  static LinearMap identity(unsigned dim);

  // The unique map sending domain_basis[i] to images[i]; domain_basis must be
  // a basis of F2^d.
  static LinearMap from_basis_images(std::span<const Bits> domain_basis,
                                     std::span<const Bits> images,
                                     unsigned dim);

  unsigned dim() const noexcept { return dim_; }
  std::span<const Bits> columns() const noexcept { return columns_; }

  Bits apply(Bits v) const;
  Vector apply(Vector v) const;
  VecSet apply(const VecSet& s) const;

  std::size_t rank() const;
  bool is_invertible() const { return rank() == dim_; }
  LinearMap compose(const LinearMap& inner) const;  // this after inner
  LinearMap inverse() const;

  friend bool operator==(const LinearMap&, const LinearMap&) = default;

 private:
  unsigned dim_;
  std::vector<Bits> columns_;
};

// Reduced row-echelon basis (pivot = highest set bit, sorted by descending
// pivot, every pivot bit cleared in all other rows).
std::vector<Bits> rref_basis(std::span<const Bits> vectors);
std::size_t rank(std::span<const Bits> vectors);
std::size_t rank(const VecSet& s);

// Reduces v against an rref basis; zero iff v lies in the span.
Bits reduce(std::span<const Bits> rref, Bits v);
bool in_span(std::span<const Bits> rref, Bits v);

std::vector<Bits> materialize_span(std::span<const Bits> basis);

Subspace span(const VecSet& vs);

// u_0..u_{count-1} with u_j the least vector outside span(avoid, u_0..u_{j-1}).
std::vector<Vector> extend_independent(const VecSet& avoid, std::size_t count);

// Number of k-dimensional subspaces of F2^n.
std::uint64_t gaussian_binomial(unsigned n, unsigned k);

std::uint64_t count_subspaces(unsigned dim, std::optional<std::size_t> max_card);

// All subspaces of F2^d with at most max_card members, sorted by
// (cardinality, member list).
std::vector<Subspace> enumerate_subspaces(unsigned dim,
                                          std::optional<std::size_t> max_card = std::nullopt,
                                          std::size_t cap = kDefaultSubspaceCap);

// Invertible map fixing span(E) pointwise with u -> v.
LinearMap fixing_linear_map(const VecSet& e, Vector u, Vector v);

LinearMap random_invertible(unsigned dim, std::mt19937_64& rng);

// Every invertible d x d matrix over F2, in ascending column order (d <= 4).
std::vector<LinearMap> all_invertible_maps(unsigned dim);

// Serialization: coordinate 0 is the leftmost character.
std::string to_string(Vector v);
std::string to_bit_string(Bits v, unsigned dim);
Vector parse_vector(std::string_view text);
Vector parse_vector(std::string_view text, unsigned dim);

nlohmann::json to_json(const VecSet& s);
nlohmann::json bit_strings(const VecSet& s);
VecSet vecset_from_json(const nlohmann::json& j);
VecSet vecset_from_strings(const nlohmann::json& array, unsigned dim);

}  // namespace ddlab
