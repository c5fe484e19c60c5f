// Independent reference computations for the test suites. Nothing here
// reuses the library's assembly or elimination code.
#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "nonloc/constructions.hpp"

namespace oracle {

using cd = std::complex<double>;

/// Explicit Kronecker expansion over `parties` (in the given order).
inline Eigen::VectorXcd expand(const nonloc::ProductState& s, const std::vector<std::size_t>& parties) {
  Eigen::VectorXcd v(1);
  v(0) = 1.0;
  for (auto p : parties) {
    const auto& k = s.party(p);
    Eigen::VectorXcd next(v.size() * k.dim());
    for (Eigen::Index i = 0; i < v.size(); ++i)
      for (int t = 0; t < k.dim(); ++t) next(i * k.dim() + t) = v(i) * k[t];
    v = std::move(next);
  }
  return v;
}

inline Eigen::VectorXcd expand(const nonloc::ProductState& s) {
  std::vector<std::size_t> all(s.party_count());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return expand(s, all);
}

/// Real dimension of {Hermitian E : <a_i|E|a_j> = 0 for every pair whose
/// excluded kets overlap}, from a dense SVD over the basis
/// {|r><r|, |r><c|+|c><r|, i|r><c|-i|c><r|}.
inline std::size_t hermitian_nullity(const nonloc::OPS& ops, std::size_t excluded, double zero_tol = 1e-9,
                                     double rank_tol = 1e-8) {
  const std::size_t np = ops.party_count();
  std::vector<std::size_t> group;
  for (std::size_t k = 1; k < np; ++k) group.push_back((excluded + k) % np);
  std::vector<Eigen::VectorXcd> vecs;
  for (const auto& s : ops.states) vecs.push_back(expand(s, group));
  const Eigen::Index n = vecs.empty() ? 1 : vecs.front().size();

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < ops.states.size(); ++i)
    for (std::size_t j = i + 1; j < ops.states.size(); ++j)
      if (std::abs(nonloc::inner(ops.states[i].party(excluded), ops.states[j].party(excluded))) >= zero_tol)
        pairs.emplace_back(i, j);

  Eigen::MatrixXd m(static_cast<Eigen::Index>(2 * pairs.size()), n * n);
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto& a = vecs[pairs[k].first];
    const auto& b = vecs[pairs[k].second];
    Eigen::Index col = 0;
    for (Eigen::Index r = 0; r < n; ++r)
      for (Eigen::Index c = r; c < n; ++c) {
        if (r == c) {
          const cd v = std::conj(a(r)) * b(r);
          m(2 * k, col) = v.real();
          m(2 * k + 1, col) = v.imag();
          ++col;
        } else {
          const cd re = std::conj(a(r)) * b(c) + std::conj(a(c)) * b(r);
          const cd im = cd(0, 1) * (std::conj(a(r)) * b(c) - std::conj(a(c)) * b(r));
          m(2 * k, col) = re.real();
          m(2 * k + 1, col) = re.imag();
          m(2 * k, col + 1) = im.real();
          m(2 * k + 1, col + 1) = im.imag();
          col += 2;
        }
      }
  }
  if (m.rows() == 0) return static_cast<std::size_t>(n * n);
  Eigen::BDCSVD<Eigen::MatrixXd> svd(m);
  const auto& sv = svd.singularValues();
  std::size_t rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) rank += sv(i) > rank_tol * sv(0);
  return static_cast<std::size_t>(n * n) - rank;
}

}  // namespace oracle
