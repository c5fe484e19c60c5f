// Brute-force triviality certifier for orthogonality-preserving POVMs.
//
// For a measuring group G (all parties but one, the "excluded" party) every
// POVM element E on G must satisfy <Phi_G|E|Psi_G> = 0 for each pair of
// distinct OPS states whose excluded factors overlap. E is parametrized as a
// Hermitian n_M x n_M matrix by n_M^2 real unknowns P[r][c]:
//   E_rr = P[r][r],  E_rc = P[r][c] + i P[c][r]  (r < c),  E_cr = conj(E_rc).
// The group is trivial iff the real solution space is spanned by E = I.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nonloc/constructions.hpp"
#include "nonloc/sparse_rank.hpp"
#include "nonloc/states.hpp"

namespace nonloc {

/// The joint measurer: every party but `excluded`, in cyclic order starting
/// after the excluded one.
struct MeasuringGroup {
  std::vector<std::size_t> parties;
  std::size_t excluded = 0;
  /// Local dimensions of `parties`, in group order.
  Dims member_dims;
  std::size_t joint_dim = 0;

  std::string name() const {
    std::string s;
    for (auto p : parties) s += party_name(p);
    return s;
  }

  /// Maps a complement tuple given in natural party order to group order.
  Coord to_group_order(const Coord& natural) const {
    const auto p = excluded;
    Coord g;
    g.reserve(natural.size());
    for (std::size_t i = p; i < natural.size(); ++i) g.push_back(natural[i]);
    for (std::size_t i = 0; i < p; ++i) g.push_back(natural[i]);
    return g;
  }

  std::size_t joint_index(const Coord& group_tuple) const { return linear_index(member_dims, group_tuple); }

  Coord joint_tuple(std::size_t index) const {
    Coord c(member_dims.size());
    for (std::size_t k = member_dims.size(); k-- > 0;) {
      c[k] = static_cast<int>(index % static_cast<std::size_t>(member_dims[k]));
      index /= static_cast<std::size_t>(member_dims[k]);
    }
    return c;
  }
};

inline MeasuringGroup measuring_group(const Dims& dims, std::size_t excluded) {
  const std::size_t n = dims.size();
  if (n < 3) throw std::domain_error("measuring_group: need at least three parties");
  if (excluded >= n) throw std::domain_error("measuring_group: invalid excluded party");
  MeasuringGroup g;
  g.excluded = excluded;
  g.joint_dim = 1;
  for (std::size_t k = 1; k < n; ++k) {
    const auto p = (excluded + k) % n;
    g.parties.push_back(p);
    g.member_dims.push_back(dims[p]);
    g.joint_dim *= static_cast<std::size_t>(dims[p]);
  }
  return g;
}

/// The n groups, ordered by excluded party.
inline std::vector<MeasuringGroup> measuring_groups(const Dims& dims) {
  std::vector<MeasuringGroup> out;
  for (std::size_t p = 0; p < dims.size(); ++p) out.push_back(measuring_group(dims, p));
  return out;
}

using SparseVector = std::vector<std::pair<std::size_t, complex>>;

/// Kronecker product of the group parties' kets (group order), nonzeros only.
inline SparseVector group_vector(const ProductState& s, const MeasuringGroup& g) {
  SparseVector v{{0, complex{1.0, 0.0}}};
  for (auto p : g.parties) {
    const Ket& k = s.party(p);
    SparseVector next;
    for (const auto& [idx, amp] : v)
      for (int t = 0; t < k.dim(); ++t)
        if (k[t] != complex{})
          next.emplace_back(idx * static_cast<std::size_t>(k.dim()) + static_cast<std::size_t>(t), amp * k[t]);
    v = std::move(next);
  }
  return v;
}

enum class Parametrization {
  Hermitian,  ///< n_M^2 real unknowns; authoritative.
  General,    ///< 2 n_M^2 real unknowns (real and imaginary part of every entry); diagnostics.
};

struct ConstraintSystem {
  std::size_t n_m = 0;
  Parametrization param = Parametrization::Hermitian;
  std::size_t unknowns = 0;
  std::vector<SparseRow> rows;
  /// Source state pair of each row and whether it is the real (false) or imaginary (true) part.
  struct Source {
    std::size_t first, second;
    bool imaginary;
  };
  std::vector<Source> sources;
};

namespace detail {

// Accumulates the complex linear form sum coeff * E_{uv} into real and
// imaginary rows under the chosen parametrization.
class FormAccumulator {
 public:
  FormAccumulator(std::size_t n, Parametrization param) : n_(n), param_(param) {}

  void add(std::size_t u, std::size_t v, complex c) {
    const std::size_t uv = u * n_ + v, vu = v * n_ + u;
    if (param_ == Parametrization::General) {
      push(uv, c);
      push(n_ * n_ + uv, complex{0.0, 1.0} * c);
      return;
    }
    if (u == v) {
      push(uv, c);
    } else if (u < v) {  // E_uv = P[u][v] + i P[v][u]
      push(uv, c);
      push(vu, complex{0.0, 1.0} * c);
    } else {  // E_uv = P[v][u] - i P[u][v]
      push(vu, c);
      push(uv, complex{0.0, -1.0} * c);
    }
  }

  std::pair<SparseRow, SparseRow> rows() const {
    SparseRow re, im;
    for (const auto& [k, c] : terms_) {
      if (c.real() != 0.0) re.emplace_back(static_cast<std::uint32_t>(k), c.real());
      if (c.imag() != 0.0) im.emplace_back(static_cast<std::uint32_t>(k), c.imag());
    }
    return {std::move(re), std::move(im)};
  }

 private:
  void push(std::size_t k, complex c) { terms_[k] += c; }
  std::size_t n_;
  Parametrization param_;
  std::map<std::size_t, complex> terms_;
};

}  // namespace detail

/// One complex constraint (two real rows) per unordered pair of states whose
/// excluded factors have |<.|.>| >= zero_tol.
inline ConstraintSystem assemble(const OPS& ops, const MeasuringGroup& g, const TolerancePolicy& policy = {},
                                 Parametrization param = Parametrization::Hermitian) {
  for (const auto& s : ops.states)
    if (s.party_count() != ops.party_count() || s.dims() != ops.dims)
      throw std::domain_error("assemble: state structure does not match OPS dims");
  ConstraintSystem cs;
  cs.n_m = g.joint_dim;
  cs.param = param;
  cs.unknowns = (param == Parametrization::Hermitian ? 1 : 2) * g.joint_dim * g.joint_dim;

  std::vector<SparseVector> vecs;
  vecs.reserve(ops.states.size());
  for (const auto& s : ops.states) vecs.push_back(group_vector(s, g));

  for (std::size_t i = 0; i < ops.states.size(); ++i) {
    for (std::size_t j = i + 1; j < ops.states.size(); ++j) {
      const complex w = inner(ops.states[i].party(g.excluded), ops.states[j].party(g.excluded));
      if (is_zero(w, policy)) continue;
      detail::FormAccumulator acc(g.joint_dim, param);
      for (const auto& [u, a] : vecs[i])
        for (const auto& [v, b] : vecs[j]) acc.add(u, v, std::conj(a) * b);
      auto [re, im] = acc.rows();
      if (!re.empty()) {
        cs.rows.push_back(std::move(re));
        cs.sources.push_back({i, j, false});
      }
      if (!im.empty()) {
        cs.rows.push_back(std::move(im));
        cs.sources.push_back({i, j, true});
      }
    }
  }
  return cs;
}

/// Largest |row . identity|; zero up to rounding for any genuine OPS.
inline double identity_residual(const ConstraintSystem& cs) {
  double worst = 0.0;
  for (const auto& r : cs.rows) {
    double acc = 0.0;
    for (const auto& [c, v] : r)
      if (c < cs.n_m * cs.n_m && c / cs.n_m == c % cs.n_m) acc += v;
    worst = std::max(worst, std::abs(acc));
  }
  return worst;
}

/// Largest |row . x| over the system.
inline double residual(const ConstraintSystem& cs, const std::vector<double>& x) {
  double worst = 0.0;
  for (const auto& r : cs.rows) {
    double acc = 0.0;
    for (const auto& [c, v] : r) acc += v * x[c];
    worst = std::max(worst, std::abs(acc));
  }
  return worst;
}

struct EliminationOptions {
  std::size_t max_nnz = 64'000'000;
  /// Stop as soon as rank reaches unknowns - 1 (the identity always survives).
  bool stop_at_corank_one = false;
};

/// Feeds the rows (sparsest first) into a SparseEliminator.
inline SparseEliminator eliminate(const ConstraintSystem& cs, const TolerancePolicy& policy,
                                  const EliminationOptions& opts = {}) {
  double scale = 0.0;
  for (const auto& r : cs.rows) scale = std::max(scale, row_norm(r));
  if (scale == 0.0) scale = 1.0;
  SparseEliminator elim(cs.unknowns, scale, policy.rank_tol, opts.max_nnz);
  std::vector<std::size_t> order(cs.rows.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return cs.rows[a].size() < cs.rows[b].size(); });
  const std::size_t floor_nullity = cs.param == Parametrization::Hermitian ? 1 : 2;
  for (auto i : order) {
    if (opts.stop_at_corank_one && cs.unknowns >= floor_nullity && elim.rank() + floor_nullity >= cs.unknowns) break;
    elim.add_row(cs.rows[i]);
  }
  return elim;
}

/// Real dimension of the solution space, n_M^2 - rank for the Hermitian form.
inline std::size_t nullity(const ConstraintSystem& cs, const TolerancePolicy& policy = {},
                           const EliminationOptions& opts = {}) {
  return cs.unknowns - eliminate(cs, policy, opts).rank();
}

/// Independent dense route: singular values of the full constraint matrix,
/// rank = #{sigma > rank_tol * sigma_max}.
inline std::size_t dense_nullity(const ConstraintSystem& cs, const TolerancePolicy& policy = {}) {
  if (cs.rows.empty()) return cs.unknowns;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(cs.rows.size()),
                                            static_cast<Eigen::Index>(cs.unknowns));
  for (std::size_t i = 0; i < cs.rows.size(); ++i)
    for (const auto& [c, v] : cs.rows[i]) a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = v;
  Eigen::VectorXd sv;
  if (a.rows() > a.cols()) {
    // Orthogonal reduction to a square triangle first; singular values are preserved.
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
    Eigen::MatrixXd r = qr.matrixQR().topRows(a.cols()).triangularView<Eigen::Upper>();
    sv = Eigen::BDCSVD<Eigen::MatrixXd>(r).singularValues();
  } else {
    sv = Eigen::BDCSVD<Eigen::MatrixXd>(a).singularValues();
  }
  const double cut = policy.rank_tol * (sv.size() ? sv(0) : 0.0);
  std::size_t rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > cut) ++rank;
  return cs.unknowns - rank;
}

/// Row-major n x n complex matrix.
struct HermitianMatrix {
  std::size_t n = 0;
  std::vector<complex> entries;
  complex at(std::size_t r, std::size_t c) const { return entries[r * n + c]; }
};

inline HermitianMatrix hermitian_from_params(std::size_t n, const std::vector<double>& p) {
  HermitianMatrix m{n, std::vector<complex>(n * n)};
  for (std::size_t r = 0; r < n; ++r) {
    m.entries[r * n + r] = p[r * n + r];
    for (std::size_t c = r + 1; c < n; ++c) {
      const complex e{p[r * n + c], p[c * n + r]};
      m.entries[r * n + c] = e;
      m.entries[c * n + r] = std::conj(e);
    }
  }
  return m;
}

struct TrivialityVerdict {
  MeasuringGroup group;
  std::size_t nullity = 0;
  bool trivial = false;
  /// Hermitian solution orthogonal to the identity, present iff !trivial.
  std::optional<HermitianMatrix> witness;
  /// Dense singular-value cross-check, computed when n_M <= dense_limit.
  std::optional<std::size_t> dense_nullity;
  std::size_t rows = 0;
  double identity_residual = 0.0;
};

struct BruteOptions {
  std::size_t max_nnz = 64'000'000;
  /// Largest joint dimension for which the dense cross-check runs.
  std::size_t dense_limit = 32;
  bool dense_crosscheck = true;
  Parametrization param = Parametrization::Hermitian;
};

namespace detail {
// Projects every free-column null vector against the identity direction and
// keeps the one with the largest remainder.
inline std::optional<HermitianMatrix> witness_from(const SparseEliminator& elim, std::size_t n) {
  std::vector<double> best;
  double best_norm = 0.0;
  for (auto f : elim.free_columns()) {
    auto x = elim.null_vector(f);
    double dot = 0.0;
    for (std::size_t u = 0; u < n; ++u) dot += x[u * n + u];
    const double coef = dot / static_cast<double>(n);
    for (std::size_t u = 0; u < n; ++u) x[u * n + u] -= coef;
    double norm = 0.0;
    for (double v : x) norm = std::max(norm, std::abs(v));
    if (norm > best_norm + 1e-12) {
      best_norm = norm;
      best = std::move(x);
    }
  }
  if (best.empty()) return std::nullopt;
  for (auto& v : best) v /= best_norm;
  return hermitian_from_params(n, best);
}
}  // namespace detail

/// Assembles, eliminates and decides triviality for one group.
inline TrivialityVerdict check_group(const OPS& ops, const MeasuringGroup& g, const TolerancePolicy& policy = {},
                                     const BruteOptions& opts = {}) {
  const auto cs = assemble(ops, g, policy, opts.param);
  TrivialityVerdict v;
  v.group = g;
  v.rows = cs.rows.size();
  v.identity_residual = identity_residual(cs);
  const std::size_t trivial_nullity = opts.param == Parametrization::Hermitian ? 1 : 2;
  const auto elim = eliminate(cs, policy, {opts.max_nnz, false});
  v.nullity = cs.unknowns - elim.rank();
  v.trivial = v.nullity == trivial_nullity;
  if (!v.trivial && opts.param == Parametrization::Hermitian) v.witness = detail::witness_from(elim, g.joint_dim);
  if (opts.dense_crosscheck && g.joint_dim <= opts.dense_limit) v.dense_nullity = dense_nullity(cs, policy);
  return v;
}

struct BruteCertification {
  std::vector<TrivialityVerdict> verdicts;
  bool overall = false;
};

inline BruteCertification certify(const OPS& ops, const TolerancePolicy& policy = {}, const BruteOptions& opts = {}) {
  BruteCertification out;
  out.overall = true;
  for (const auto& g : measuring_groups(ops.dims)) {
    out.verdicts.push_back(check_group(ops, g, policy, opts));
    out.overall = out.overall && out.verdicts.back().trivial;
  }
  return out;
}

}  // namespace nonloc
