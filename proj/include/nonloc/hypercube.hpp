// Coordinate model of the n-dimensional grid Z_{d_0} x ... x Z_{d_{n-1}}:
// its outermost layer, Cartesian blocks and their projections.
//
// Tuples are always enumerated row-major with party 0 most significant.
#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace nonloc {

using Dims = std::vector<int>;
using Coord = std::vector<int>;

inline std::string party_name(std::size_t p) {
  return p < 26 ? std::string(1, static_cast<char>('A' + p)) : "P" + std::to_string(p);
}

inline std::string coord_str(const Coord& c) {
  std::string s = "(";
  for (std::size_t i = 0; i < c.size(); ++i) s += (i ? "," : "") + std::to_string(c[i]);
  return s + ")";
}

inline long long grid_volume(const Dims& dims) {
  long long v = 1;
  for (int d : dims) v *= d;
  return v;
}

/// Calls fn(coord) for every tuple of the grid in lexicographic order.
template <class Fn>
void for_each_coord(const Dims& dims, Fn&& fn) {
  if (dims.empty()) return;
  for (int d : dims)
    if (d <= 0) return;
  Coord c(dims.size(), 0);
  while (true) {
    fn(static_cast<const Coord&>(c));
    std::size_t k = dims.size();
    while (k > 0) {
      --k;
      if (++c[k] < dims[k]) break;
      c[k] = 0;
      if (k == 0) return;
    }
  }
}

/// Row-major rank of a coordinate.
inline std::size_t linear_index(const Dims& dims, const Coord& c) {
  std::size_t idx = 0;
  for (std::size_t k = 0; k < dims.size(); ++k)
    idx = idx * static_cast<std::size_t>(dims[k]) + static_cast<std::size_t>(c[k]);
  return idx;
}

inline bool in_outer_layer(const Dims& dims, const Coord& c) {
  for (std::size_t k = 0; k < dims.size(); ++k)
    if (c[k] == 0 || c[k] == dims[k] - 1) return true;
  return false;
}

/// All tuples with some coordinate extremal (0 or d_X - 1).
inline std::vector<Coord> outer_layer(const Dims& dims) {
  if (dims.size() < 2) throw std::domain_error("outer_layer: need at least two parties");
  std::vector<Coord> out;
  for_each_coord(dims, [&](const Coord& c) {
    if (in_outer_layer(dims, c)) out.push_back(c);
  });
  return out;
}

/// prod d_X - prod (d_X - 2)
inline long long size_formula(const Dims& dims) {
  long long full = 1, inner = 1;
  for (int d : dims) {
    full *= d;
    inner *= (d - 2);
  }
  return full - inner;
}

class PartyRole {
 public:
  enum class Kind { Fixed, Eta, Xi };

  static PartyRole fixed(int k) { return PartyRole(Kind::Fixed, k); }
  static PartyRole eta() { return PartyRole(Kind::Eta, 0); }
  static PartyRole xi() { return PartyRole(Kind::Xi, 0); }

  Kind kind() const { return kind_; }
  bool is_family() const { return kind_ != Kind::Fixed; }
  /// Basis index of a Fixed role.
  int basis_index() const { return k_; }

  /// Number of states the role ranges over in dimension d.
  int range(int d) const { return is_family() ? d - 1 : 1; }

  std::vector<int> support(int d) const {
    std::vector<int> s;
    switch (kind_) {
      case Kind::Fixed: s.push_back(k_); break;
      case Kind::Eta:
        for (int t = 0; t <= d - 2; ++t) s.push_back(t);
        break;
      case Kind::Xi:
        for (int t = 1; t <= d - 1; ++t) s.push_back(t);
        break;
    }
    return s;
  }

  bool contains(int d, int x) const {
    switch (kind_) {
      case Kind::Fixed: return x == k_;
      case Kind::Eta: return x >= 0 && x <= d - 2;
      case Kind::Xi: return x >= 1 && x <= d - 1;
    }
    return false;
  }

  std::string str() const {
    switch (kind_) {
      case Kind::Fixed: return std::to_string(k_);
      case Kind::Eta: return "eta";
      case Kind::Xi: return "xi";
    }
    return "?";
  }

  static PartyRole parse(const std::string& s) {
    if (s == "eta") return eta();
    if (s == "xi") return xi();
    std::size_t used = 0;
    int k = -1;
    try {
      k = std::stoi(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != s.size() || k < 0) throw std::domain_error("unknown party role: " + s);
    return fixed(k);
  }

  bool operator==(const PartyRole&) const = default;

 private:
  PartyRole(Kind kind, int k) : kind_(kind), k_(k) {}
  Kind kind_;
  int k_;
};

/// A Cartesian cell of the grid together with the per-party roles that
/// generate its product states.
struct Block {
  std::string id;
  std::vector<PartyRole> roles;
  Dims dims;

  Block(std::string id_, std::vector<PartyRole> roles_, Dims dims_)
      : id(std::move(id_)), roles(std::move(roles_)), dims(std::move(dims_)) {
    if (roles.size() != dims.size())
      throw std::domain_error("Block " + id + ": roles/dims length mismatch");
    for (std::size_t p = 0; p < roles.size(); ++p) {
      const auto& r = roles[p];
      if (r.is_family() && dims[p] < 3)
        throw std::domain_error("Block " + id + ": eta/xi role needs d >= 3 on party " +
                                party_name(p));
      if (!r.is_family() && (r.basis_index() < 0 || r.basis_index() >= dims[p]))
        throw std::domain_error("Block " + id + ": fixed index out of range on party " +
                                party_name(p));
    }
  }

  std::size_t party_count() const { return roles.size(); }

  long long state_count() const {
    long long n = 1;
    for (std::size_t p = 0; p < roles.size(); ++p) n *= roles[p].range(dims[p]);
    return n;
  }

  bool contains(const Coord& c) const {
    if (c.size() != roles.size()) return false;
    for (std::size_t p = 0; p < roles.size(); ++p)
      if (!roles[p].contains(dims[p], c[p])) return false;
    return true;
  }

  /// Parties carrying an eta/xi role, in party order.
  std::vector<std::size_t> family_parties() const {
    std::vector<std::size_t> out;
    for (std::size_t p = 0; p < roles.size(); ++p)
      if (roles[p].is_family()) out.push_back(p);
    return out;
  }

  bool operator==(const Block&) const = default;
};

namespace detail {
inline std::vector<Coord> cartesian(const std::vector<std::vector<int>>& axes) {
  std::vector<Coord> out;
  Dims extents;
  for (const auto& a : axes) extents.push_back(static_cast<int>(a.size()));
  for_each_coord(extents, [&](const Coord& pos) {
    Coord c(axes.size());
    for (std::size_t k = 0; k < axes.size(); ++k) c[k] = axes[k][static_cast<std::size_t>(pos[k])];
    out.push_back(std::move(c));
  });
  return out;
}
}  // namespace detail

/// The block's Cartesian cell, lexicographic.
inline std::vector<Coord> support(const Block& b) {
  std::vector<std::vector<int>> axes;
  for (std::size_t p = 0; p < b.roles.size(); ++p) axes.push_back(b.roles[p].support(b.dims[p]));
  return detail::cartesian(axes);
}

/// support(b) with `party` dropped; natural order of the remaining parties.
inline std::vector<Coord> projection_support(const Block& b, std::size_t party) {
  if (party >= b.party_count()) throw std::domain_error("projection_support: invalid party");
  std::vector<std::vector<int>> axes;
  for (std::size_t p = 0; p < b.roles.size(); ++p)
    if (p != party) axes.push_back(b.roles[p].support(b.dims[p]));
  return detail::cartesian(axes);
}

struct DecompositionVerdict {
  enum class Kind { Ok, Overlap, Gap, Excess };
  Kind kind = Kind::Ok;
  std::string first_block;
  std::string second_block;
  Coord tuple;

  bool ok() const { return kind == Kind::Ok; }

  std::string str() const {
    switch (kind) {
      case Kind::Ok: return "ok";
      case Kind::Overlap:
        return "overlap(" + first_block + "," + second_block + "," + coord_str(tuple) + ")";
      case Kind::Gap: return "gap(" + coord_str(tuple) + ")";
      case Kind::Excess: return "excess(" + first_block + "," + coord_str(tuple) + ")";
    }
    return "?";
  }
};

/// Checks that block supports partition outer_layer(dims). Failures are
/// reported in the order overlap, excess, gap; each at its lexicographically
/// first tuple.
inline DecompositionVerdict verify_decomposition(const std::vector<Block>& blocks,
                                                 const Dims& dims) {
  for (const auto& b : blocks)
    if (b.party_count() != dims.size())
      throw std::domain_error("verify_decomposition: block " + b.id + " has wrong party count");

  DecompositionVerdict v;
  // Tuples outside the grid are excess regardless of position.
  for (const auto& b : blocks)
    for (const auto& c : support(b))
      for (std::size_t k = 0; k < dims.size(); ++k)
        if (c[k] >= dims[k]) {
          v.kind = DecompositionVerdict::Kind::Excess;
          v.first_block = b.id;
          v.tuple = c;
          return v;
        }

  std::optional<DecompositionVerdict> excess, gap;
  bool overlap_found = false;
  for_each_coord(dims, [&](const Coord& c) {
    if (overlap_found) return;
    const Block* first = nullptr;
    for (const auto& b : blocks) {
      if (!b.contains(c)) continue;
      if (first) {
        v.kind = DecompositionVerdict::Kind::Overlap;
        v.first_block = first->id;
        v.second_block = b.id;
        v.tuple = c;
        overlap_found = true;
        return;
      }
      first = &b;
    }
    const bool outer = in_outer_layer(dims, c);
    if (first && !outer && !excess) {
      excess = DecompositionVerdict{DecompositionVerdict::Kind::Excess, first->id, {}, c};
    } else if (!first && outer && !gap) {
      gap = DecompositionVerdict{DecompositionVerdict::Kind::Gap, {}, {}, c};
    }
  });
  if (overlap_found) return v;
  if (excess) return *excess;
  if (gap) return *gap;
  return {};
}

}  // namespace nonloc
