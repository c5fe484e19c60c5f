// The three hypercube-layer product-set families (3, 4 and 5 parties) and
// the family/projection accessors that the certification engines consume.
#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nonloc/hypercube.hpp"
#include "nonloc/states.hpp"

namespace nonloc {

/// An orthogonal product set together with the blocks that generated it.
struct OPS {
  std::string name;
  Dims dims;
  std::vector<Block> blocks;
  std::vector<ProductState> states;

  std::size_t party_count() const { return dims.size(); }

  const Block* find_block(const std::string& id) const {
    for (const auto& b : blocks)
      if (b.id == id) return &b;
    return nullptr;
  }
};

/// The complement factors of a block's states at one fixed ket on `fixed_party`.
struct Family {
  std::string block_id;
  std::size_t fixed_party = 0;
  Ket fixed_ket;
  /// Restrictions to all parties but fixed_party, natural party order.
  std::vector<ProductState> members;
  /// Position of each member's source state in OPS::states.
  std::vector<std::size_t> state_indices;
  /// Complement tuples, natural party order.
  std::vector<Coord> span_support;
};

namespace detail {

// Role tokens: e = eta, x = xi, 0 = |0>, L = |d-1>.
struct BlockPattern {
  std::string_view id;
  std::string_view roles;
};

inline PartyRole role_from_token(char t, int d) {
  switch (t) {
    case 'e': return PartyRole::eta();
    case 'x': return PartyRole::xi();
    case '0': return PartyRole::fixed(0);
    case 'L': return PartyRole::fixed(d - 1);
  }
  throw std::logic_error("bad role token");
}

inline Ket role_ket(const PartyRole& r, int d, int s) {
  switch (r.kind()) {
    case PartyRole::Kind::Eta: return eta(s, d);
    case PartyRole::Kind::Xi: return xi(s, d);
    case PartyRole::Kind::Fixed: return Ket::basis(d, r.basis_index());
  }
  throw std::logic_error("bad role");
}

inline void require_dims(const Dims& dims, std::size_t n, const char* what) {
  if (dims.size() != n)
    throw std::domain_error(std::string(what) + ": expected " + std::to_string(n) +
                            " dimensions, got " + std::to_string(dims.size()));
  for (int d : dims)
    if (d < 3)
      throw std::domain_error(std::string(what) + ": every local dimension must be >= 3, got " +
                              std::to_string(d));
}

// clang-format off
inline constexpr BlockPattern kTripartite[] = {
    {"C1", "x0e"}, {"C2", "xeL"}, {"C3", "Lxe"}, {"C4", "LLL"},
    {"D1", "eLx"}, {"D2", "ex0"}, {"D3", "0ex"}, {"D4", "000"},
};

inline constexpr BlockPattern kFourpartite[] = {
    {"C1", "xe0x"}, {"C2", "xLee"}, {"C3", "xxxL"}, {"C4", "xL0L"},
    {"C5", "Lexe"}, {"C6", "Le00"}, {"C7", "L0xL"}, {"C8", "LLLe"},
    {"D1", "exLe"}, {"D2", "e0xx"}, {"D3", "eee0"}, {"D4", "e0L0"},
    {"D5", "0xex"}, {"D6", "0xLL"}, {"D7", "0Le0"}, {"D8", "000x"},
};

inline constexpr BlockPattern kFivepartite[] = {
    {"C1",  "xLexe"}, {"C2",  "xe0xe"}, {"C3",  "xexLe"}, {"C4",  "xexe0"},
    {"C5",  "xLLe0"}, {"C6",  "xLe00"}, {"C7",  "xLLLe"}, {"C8",  "xe000"},
    {"C9",  "Lexex"}, {"C10", "LLLLL"}, {"C11", "LexLL"}, {"C12", "Le00x"},
    {"C13", "Le0xL"}, {"C14", "LLexL"}, {"C15", "LLe0x"}, {"C16", "LLLex"},
    {"D1",  "e0xex"}, {"D2",  "exLex"}, {"D3",  "exe0x"}, {"D4",  "exexL"},
    {"D5",  "e00xL"}, {"D6",  "e0xLL"}, {"D7",  "e000x"}, {"D8",  "exLLL"},
    {"D9",  "0xexe"}, {"D10", "00000"}, {"D11", "0xe00"}, {"D12", "0xLLe"},
    {"D13", "0xLe0"}, {"D14", "00xe0"}, {"D15", "00xLe"}, {"D16", "000xe"},
};
// clang-format on

template <std::size_t N>
std::vector<Block> blocks_from_patterns(const BlockPattern (&patterns)[N], const Dims& dims) {
  std::vector<Block> blocks;
  blocks.reserve(N);
  for (const auto& pat : patterns) {
    std::vector<PartyRole> roles;
    for (std::size_t p = 0; p < dims.size(); ++p) roles.push_back(role_from_token(pat.roles[p], dims[p]));
    blocks.emplace_back(std::string(pat.id), std::move(roles), dims);
  }
  return blocks;
}

inline std::string dims_str(const Dims& dims) {
  std::string s;
  for (std::size_t i = 0; i < dims.size(); ++i) s += (i ? "," : "") + std::to_string(dims[i]);
  return s;
}

}  // namespace detail

/// States of one block, family indices enumerated lexicographically.
inline std::vector<ProductState> block_states(const Block& b) {
  const auto fam = b.family_parties();
  Dims extents;
  for (auto p : fam) extents.push_back(b.dims[p] - 1);
  std::vector<ProductState> out;
  auto emit = [&](const Coord& idx) {
    std::vector<Ket> kets;
    std::size_t f = 0;
    for (std::size_t p = 0; p < b.party_count(); ++p) {
      const int s = b.roles[p].is_family() ? idx[f++] : 0;
      kets.push_back(detail::role_ket(b.roles[p], b.dims[p], s));
    }
    out.emplace_back(std::move(kets), StateLabel{b.id, idx});
  };
  if (fam.empty())
    emit({});
  else
    for_each_coord(extents, emit);
  return out;
}

/// Builds the OPS of a block list: states in block order, then index order.
inline OPS ops_from_blocks(std::string name, Dims dims, std::vector<Block> blocks) {
  OPS ops{std::move(name), std::move(dims), std::move(blocks), {}};
  for (const auto& b : ops.blocks)
    for (auto& s : block_states(b)) ops.states.push_back(std::move(s));
  return ops;
}

inline OPS tripartite(int dA, int dB, int dC) {
  Dims dims{dA, dB, dC};
  detail::require_dims(dims, 3, "tripartite");
  return ops_from_blocks("tripartite(" + detail::dims_str(dims) + ")", dims,
                         detail::blocks_from_patterns(detail::kTripartite, dims));
}

/// Index ranges follow the eta/xi roles of each ket expression.
inline OPS fourpartite(int dA, int dB, int dC, int dD) {
  Dims dims{dA, dB, dC, dD};
  detail::require_dims(dims, 4, "fourpartite");
  return ops_from_blocks("fourpartite(" + detail::dims_str(dims) + ")", dims,
                         detail::blocks_from_patterns(detail::kFourpartite, dims));
}

inline OPS fivepartite(int dA, int dB, int dC, int dD, int dE) {
  Dims dims{dA, dB, dC, dD, dE};
  detail::require_dims(dims, 5, "fivepartite");
  return ops_from_blocks("fivepartite(" + detail::dims_str(dims) + ")", dims,
                         detail::blocks_from_patterns(detail::kFivepartite, dims));
}

/// Dispatches on the number of dimensions (3, 4 or 5).
inline OPS construct(const Dims& dims) {
  switch (dims.size()) {
    case 3: return tripartite(dims[0], dims[1], dims[2]);
    case 4: return fourpartite(dims[0], dims[1], dims[2], dims[3]);
    case 5: return fivepartite(dims[0], dims[1], dims[2], dims[3], dims[4]);
  }
  throw std::domain_error("construct: only 3, 4 or 5 parties are supported, got " +
                          std::to_string(dims.size()));
}

/// Which shipped family (if any) the blocks of `ops` reproduce.
inline std::string shipped_kind(const OPS& ops) {
  if (ops.blocks.empty()) return {};
  const Dims& bd = ops.blocks.front().dims;
  for (const auto& b : ops.blocks)
    if (b.dims != bd) return {};
  try {
    const auto ref = construct(bd);
    if (ref.blocks == ops.blocks) return ref.name.substr(0, ref.name.find('('));
  } catch (const std::domain_error&) {
  }
  return {};
}

/// Blocks whose printed index ranges disagree with their ket expression. The
/// generated states always follow the ket expression.
inline std::map<std::string, std::string> range_notes(const OPS& ops) {
  std::map<std::string, std::string> notes;
  if (shipped_kind(ops) == "fourpartite") {
    notes["C3"] = "printed range Z_{dA-1} x Z_{dB-1} x Z_{dD-1}; xi roles sit on A,B,C so Z_{dC-1} is used for the third index";
    notes["D3"] = "printed range Z_{dA-1} x Z_{dB-1} x Z_{dD-1}; eta roles sit on A,B,C so Z_{dC-1} is used for the third index";
  }
  return notes;
}

/// The full computational product basis, one singleton block per state.
inline OPS computational_basis(const Dims& dims) {
  std::vector<Block> blocks;
  for_each_coord(dims, [&](const Coord& c) {
    std::vector<PartyRole> roles;
    std::string id = "P";
    for (int x : c) {
      roles.push_back(PartyRole::fixed(x));
      id += std::to_string(x);
    }
    blocks.emplace_back(id, std::move(roles), dims);
  });
  return ops_from_blocks("basis(" + detail::dims_str(dims) + ")", dims, std::move(blocks));
}

/// Zero-pads every ket into a larger local space; blocks keep their dims.
inline OPS embed(const OPS& ops, const Dims& new_dims) {
  if (new_dims.size() != ops.dims.size()) throw std::domain_error("embed: party count mismatch");
  for (std::size_t p = 0; p < new_dims.size(); ++p)
    if (new_dims[p] < ops.dims[p]) throw std::domain_error("embed: cannot shrink a party");
  OPS out{ops.name + "@" + detail::dims_str(new_dims), new_dims, ops.blocks, {}};
  for (const auto& s : ops.states) {
    std::vector<Ket> kets;
    for (std::size_t p = 0; p < s.party_count(); ++p) kets.push_back(s.party(p).padded(new_dims[p]));
    out.states.emplace_back(std::move(kets), s.label());
  }
  return out;
}

/// Relabels parties: new party perm[i] is old party i.
inline OPS permute_parties(const OPS& ops, const std::vector<std::size_t>& perm) {
  const std::size_t n = ops.party_count();
  if (perm.size() != n) throw std::domain_error("permute_parties: wrong permutation length");
  std::vector<std::size_t> check = perm;
  std::sort(check.begin(), check.end());
  for (std::size_t i = 0; i < n; ++i)
    if (check[i] != i) throw std::domain_error("permute_parties: not a permutation");

  Dims dims(n);
  for (std::size_t i = 0; i < n; ++i) dims[perm[i]] = ops.dims[i];
  OPS out{ops.name + "#perm", dims, {}, {}};
  for (const auto& b : ops.blocks) {
    std::vector<PartyRole> roles(n, PartyRole::fixed(0));
    Dims bd(n);
    for (std::size_t i = 0; i < n; ++i) {
      roles[perm[i]] = b.roles[i];
      bd[perm[i]] = b.dims[i];
    }
    out.blocks.emplace_back(b.id, std::move(roles), std::move(bd));
  }
  for (const auto& s : ops.states) {
    std::vector<Ket> kets(n, Ket::basis(2, 0));
    for (std::size_t i = 0; i < n; ++i) kets[perm[i]] = s.party(i);
    std::optional<StateLabel> label;
    if (s.label()) {
      // Re-order the family indices to follow the new party order.
      const Block* b = ops.find_block(s.label()->block);
      if (b) {
        const auto fam = b->family_parties();
        std::vector<std::pair<std::size_t, int>> moved;
        for (std::size_t f = 0; f < fam.size(); ++f) moved.emplace_back(perm[fam[f]], s.label()->index[f]);
        std::sort(moved.begin(), moved.end());
        StateLabel l{b->id, {}};
        for (const auto& m : moved) l.index.push_back(m.second);
        label = l;
      } else {
        label = s.label();
      }
    }
    out.states.emplace_back(std::move(kets), std::move(label));
  }
  return out;
}

/// Cyclic relabeling A -> B -> ... -> A, applied `shift` times.
inline OPS rotate_parties(const OPS& ops, std::size_t shift = 1) {
  const std::size_t n = ops.party_count();
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = (i + shift) % n;
  return permute_parties(ops, perm);
}

inline OPS remove_state(const OPS& ops, std::size_t index) {
  if (index >= ops.states.size()) throw std::domain_error("remove_state: index out of range");
  OPS out = ops;
  out.name += "-" + std::to_string(index);
  out.states.erase(out.states.begin() + static_cast<std::ptrdiff_t>(index));
  return out;
}

/// Drops `party` from a product state.
inline ProductState restrict_away(const ProductState& s, std::size_t party) {
  std::vector<Ket> kets;
  for (std::size_t p = 0; p < s.party_count(); ++p)
    if (p != party) kets.push_back(s.party(p));
  return ProductState(std::move(kets), s.label());
}

/// Fixes `party` of block `block_id` at family index `family_index` (ignored
/// for a fixed role) and collects the complement factors.
inline Family family(const OPS& ops, const std::string& block_id, std::size_t party,
                     int family_index) {
  const Block* b = ops.find_block(block_id);
  if (!b) throw std::domain_error("family: unknown block " + block_id);
  if (party >= ops.party_count()) throw std::domain_error("family: invalid party");
  const PartyRole& role = b->roles[party];
  const int d = b->dims[party];

  std::optional<std::size_t> slot;
  if (role.is_family()) {
    if (family_index < 0 || family_index > d - 2)
      throw std::domain_error("family: index " + std::to_string(family_index) + " out of range for block " +
                              block_id);
    const auto fam = b->family_parties();
    slot = static_cast<std::size_t>(std::find(fam.begin(), fam.end(), party) - fam.begin());
  }

  Family f{block_id, party, detail::role_ket(role, d, role.is_family() ? family_index : 0).padded(ops.dims[party]),
           {}, {}, projection_support(*b, party)};
  for (std::size_t i = 0; i < ops.states.size(); ++i) {
    const auto& s = ops.states[i];
    if (!s.label() || s.label()->block != block_id) continue;
    if (slot && s.label()->index.at(*slot) != family_index) continue;
    f.members.push_back(restrict_away(s, party));
    f.state_indices.push_back(i);
  }
  return f;
}

}  // namespace nonloc
