// Text grids of an OPS: for one excluded party, a row per coordinate of that
// party and a column per complement tuple (measuring-group order), each cell
// holding the id of the block covering the full coordinate or "." if none.
#pragma once

#include <algorithm>
#include <sstream>
#include <string>
#include <vector>

#include "nonloc/constructions.hpp"
#include "nonloc/povm_checker.hpp"

namespace nonloc {

inline std::string tuple_label(const Coord& c, const Dims& dims) {
  const bool compact = std::all_of(dims.begin(), dims.end(), [](int d) { return d <= 10; });
  std::string s;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (!compact && i) s += ',';
    s += std::to_string(c[i]);
  }
  return s;
}

inline std::string grid_report(const OPS& ops, std::size_t excluded) {
  const auto g = measuring_group(ops.dims, excluded);
  const int rows = ops.dims[excluded];
  std::vector<std::string> col_labels;
  std::vector<std::vector<std::string>> cells(static_cast<std::size_t>(rows));
  std::size_t width = 1;
  for (const auto& b : ops.blocks) width = std::max(width, b.id.size());

  for (std::size_t j = 0; j < g.joint_dim; ++j) {
    const Coord t = g.joint_tuple(j);
    col_labels.push_back(tuple_label(t, g.member_dims));
    width = std::max(width, col_labels.back().size());
    for (int r = 0; r < rows; ++r) {
      Coord full(ops.dims.size());
      full[excluded] = r;
      for (std::size_t k = 0; k < g.parties.size(); ++k) full[g.parties[k]] = t[k];
      std::string cell = ".";
      for (const auto& b : ops.blocks)
        if (b.contains(full)) {
          cell = b.id;
          break;
        }
      cells[static_cast<std::size_t>(r)].push_back(cell);
    }
  }

  const std::string row_head = party_name(excluded) + "=";
  const std::size_t lead = row_head.size() + std::to_string(rows - 1).size();
  auto pad = [](const std::string& s, std::size_t w) { return s + std::string(w > s.size() ? w - s.size() : 0, ' '); };

  std::ostringstream os;
  os << party_name(excluded) << " | " << g.name() << "  (" << rows << " x " << g.joint_dim << ")\n";
  os << pad("", lead);
  for (const auto& l : col_labels) os << ' ' << pad(l, width);
  os << '\n';
  for (int r = 0; r < rows; ++r) {
    os << pad(row_head + std::to_string(r), lead);
    for (const auto& c : cells[static_cast<std::size_t>(r)]) os << ' ' << pad(c, width);
    os << '\n';
  }
  return os.str();
}

/// Every bipartition grid followed by the range notes of the construction.
inline std::string full_report(const OPS& ops) {
  std::ostringstream os;
  os << ops.name << ": " << ops.states.size() << " states, " << ops.blocks.size() << " blocks\n";
  for (std::size_t p = 0; p < ops.dims.size(); ++p) os << '\n' << grid_report(ops, p);
  const auto notes = range_notes(ops);
  if (!notes.empty()) {
    os << "\nnotes\n";
    for (const auto& [id, text] : notes) os << "  " << id << ": " << text << '\n';
  }
  return os.str();
}

}  // namespace nonloc
