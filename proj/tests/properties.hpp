// Randomized property checks shared by the unit suites and the acceptance
// harness. Every check takes its seed explicitly.
#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "nonloc/constructions.hpp"
#include "nonloc/povm_checker.hpp"
#include "oracles.hpp"

namespace props {

struct Result {
  bool ok = true;
  std::size_t cases = 0;
  std::string detail;

  void fail(const std::string& why) {
    if (ok) detail = why;
    ok = false;
  }
};

inline nonloc::Ket random_ket(std::mt19937& rng, int dim) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<nonloc::complex> a(static_cast<std::size_t>(dim));
  for (auto& z : a) z = {n(rng), n(rng)};
  return nonloc::Ket(std::move(a));
}

inline nonloc::ProductState random_state(std::mt19937& rng, const std::vector<int>& dims) {
  std::vector<nonloc::Ket> k;
  for (int d : dims) k.push_back(random_ket(rng, d));
  return nonloc::ProductState(std::move(k));
}

inline std::vector<int> random_dims(std::mt19937& rng, int n_lo, int n_hi, int d_lo, int d_hi) {
  std::uniform_int_distribution<int> n(n_lo, n_hi), d(d_lo, d_hi);
  std::vector<int> dims(static_cast<std::size_t>(n(rng)));
  for (auto& x : dims) x = d(rng);
  return dims;
}

/// Multiplies one ket of every state by a random unit phase.
inline nonloc::OPS rephase(const nonloc::OPS& ops, std::mt19937& rng) {
  std::uniform_real_distribution<double> th(0.0, 2.0 * std::numbers::pi);
  std::uniform_int_distribution<std::size_t> party(0, ops.party_count() - 1);
  nonloc::OPS out = ops;
  for (auto& s : out.states) {
    const auto p = party(rng);
    s = s.with_party(p, s.party(p).scaled(std::polar(1.0, th(rng))));
  }
  return out;
}

inline nonloc::OPS random_shipped(std::mt19937& rng) {
  std::uniform_int_distribution<int> kind(0, 3);
  switch (kind(rng)) {
    case 0: return nonloc::construct(random_dims(rng, 3, 3, 3, 5));
    case 1: return nonloc::construct(random_dims(rng, 3, 3, 3, 4));
    case 2: return nonloc::construct({3, 3, 3, 3});
    default: return nonloc::computational_basis(random_dims(rng, 3, 3, 2, 3));
  }
}

/// <eta_s|eta_t> = <xi_s|xi_t> = (d-1) delta_st.
inline Result eta_xi_orthogonality(unsigned seed, std::size_t trials) {
  Result r;
  std::mt19937 rng(seed);
  std::uniform_int_distribution<int> dd(3, 16);
  for (std::size_t k = 0; k < trials; ++k) {
    const int d = dd(rng);
    std::uniform_int_distribution<int> ss(0, d - 2);
    const int s = ss(rng), t = ss(rng);
    for (auto fam : {&nonloc::eta, &nonloc::xi}) {
      const auto v = nonloc::inner(fam(s, d), fam(t, d));
      const double expect = s == t ? d - 1.0 : 0.0;
      ++r.cases;
      if (std::abs(v - nonloc::complex(expect, 0.0)) > 1e-12) {
        std::ostringstream os;
        os << "d=" << d << " s=" << s << " t=" << t << " inner=" << v;
        r.fail(os.str());
      }
    }
  }
  return r;
}

/// <a|b> == conj(<b|a>) on random product states.
inline Result conjugate_symmetry(unsigned seed, std::size_t trials) {
  Result r;
  std::mt19937 rng(seed);
  for (std::size_t k = 0; k < trials; ++k) {
    const auto dims = random_dims(rng, 2, 5, 2, 5);
    const auto a = random_state(rng, dims), b = random_state(rng, dims);
    const auto ab = nonloc::product_inner(a, b), ba = nonloc::product_inner(b, a);
    ++r.cases;
    if (std::abs(ab - std::conj(ba)) > 1e-12 * (1.0 + std::abs(ab))) r.fail("asymmetric pair at trial " + std::to_string(k));
  }
  return r;
}

/// product_inner equals the inner product of the expanded tensors.
inline Result kronecker_oracle(unsigned seed, std::size_t trials) {
  Result r;
  std::mt19937 rng(seed);
  for (std::size_t k = 0; k < trials; ++k) {
    const auto dims = random_dims(rng, 1, 3, 2, 4);
    const auto a = random_state(rng, dims), b = random_state(rng, dims);
    const auto lib = nonloc::product_inner(a, b);
    const auto ref = oracle::expand(a).dot(oracle::expand(b));
    ++r.cases;
    if (std::abs(lib - ref) > 1e-12 * (1.0 + std::abs(ref))) r.fail("mismatch at trial " + std::to_string(k));
  }
  return r;
}

/// E = I solves every assembled system (shipped sets, rephased, permuted).
inline Result identity_feasibility(unsigned seed, std::size_t trials) {
  Result r;
  std::mt19937 rng(seed);
  for (std::size_t k = 0; k < trials; ++k) {
    auto ops = rephase(random_shipped(rng), rng);
    std::vector<std::size_t> perm(ops.party_count());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    ops = nonloc::permute_parties(ops, perm);
    for (const auto& g : nonloc::measuring_groups(ops.dims))
      for (auto param : {nonloc::Parametrization::Hermitian, nonloc::Parametrization::General}) {
        const auto cs = nonloc::assemble(ops, g, {}, param);
        ++r.cases;
        const double res = nonloc::identity_residual(cs);
        if (!(res < 1e-10)) r.fail(ops.name + " group " + g.name() + " residual " + std::to_string(res));
      }
  }
  return r;
}

/// Random unit phases on the kets leave every nullity unchanged.
inline Result phase_invariance(unsigned seed, std::size_t trials) {
  Result r;
  std::mt19937 rng(seed);
  const std::vector<nonloc::OPS> bases = {nonloc::tripartite(3, 3, 3), nonloc::tripartite(3, 4, 3),
                                          nonloc::computational_basis({3, 3, 3}),
                                          nonloc::embed(nonloc::tripartite(3, 3, 3), {4, 3, 3})};
  std::vector<std::vector<std::size_t>> reference;
  for (const auto& ops : bases) {
    std::vector<std::size_t> n;
    for (const auto& g : nonloc::measuring_groups(ops.dims)) n.push_back(nonloc::nullity(nonloc::assemble(ops, g)));
    reference.push_back(std::move(n));
  }
  std::uniform_int_distribution<std::size_t> pick(0, bases.size() - 1);
  for (std::size_t k = 0; k < trials; ++k) {
    const auto b = pick(rng);
    const auto ops = rephase(bases[b], rng);
    const auto groups = nonloc::measuring_groups(ops.dims);
    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
      const auto nl = nonloc::nullity(nonloc::assemble(ops, groups[gi]));
      ++r.cases;
      if (nl != reference[b][gi])
        r.fail(ops.name + " group " + groups[gi].name() + ": nullity " + std::to_string(nl) + " vs " +
               std::to_string(reference[b][gi]));
    }
  }
  return r;
}

}  // namespace props
