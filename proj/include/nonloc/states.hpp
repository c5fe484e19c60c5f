// Single-party kets, the eta/xi Fourier families and multipartite product
// states. States are never normalized; every zero test runs on raw inner
// products against an absolute tolerance.
#pragma once

#include <cmath>
#include <complex>
#include <cstdlib>
#include <numbers>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace nonloc {

using complex = std::complex<double>;

/// Zero and rank thresholds shared by every numerical decision.
struct TolerancePolicy {
  double zero_tol = 1e-9;
  /// Relative to the largest pivot / singular value.
  double rank_tol = 1e-8;

  void validate() const {
    if (!(zero_tol > 0.0 && zero_tol < 1.0))
      throw std::domain_error("zero_tol must lie in (0, 1)");
    if (!(rank_tol > 0.0 && rank_tol < 1.0))
      throw std::domain_error("rank_tol must lie in (0, 1)");
  }

  /// Defaults, with NONLOC_TOL (if set) overriding zero_tol.
  static TolerancePolicy from_env() {
    TolerancePolicy p;
    if (const char* env = std::getenv("NONLOC_TOL"); env && *env) {
      char* end = nullptr;
      const double v = std::strtod(env, &end);
      if (end == env || *end != '\0')
        throw std::domain_error(std::string("NONLOC_TOL is not a number: ") + env);
      p.zero_tol = v;
    }
    p.validate();
    return p;
  }
};

inline bool is_zero(complex z, const TolerancePolicy& policy = {}) {
  return std::abs(z) < policy.zero_tol;
}

/// w_n^k = exp(2 pi i k / n), with k reduced mod n before evaluation.
inline complex root_of_unity(long long k, long long n) {
  if (n <= 0) throw std::domain_error("root_of_unity: order must be positive");
  k %= n;
  if (k < 0) k += n;
  if (k == 0) return {1.0, 0.0};
  // Exact values at the quarter turns keep the common d = 3, 5 cases noise-free.
  if (4 * k == n) return {0.0, 1.0};
  if (2 * k == n) return {-1.0, 0.0};
  if (4 * k == 3 * n) return {0.0, -1.0};
  const double angle = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
  return {std::cos(angle), std::sin(angle)};
}

class Ket {
 public:
  explicit Ket(std::vector<complex> amplitudes) : amps_(std::move(amplitudes)) {
    if (amps_.empty()) throw std::domain_error("Ket: dimension must be positive");
    bool any = false;
    for (const auto& a : amps_) any = any || a != complex{};
    if (!any) throw std::domain_error("Ket: all amplitudes are zero");
  }

  static Ket basis(int dim, int k) {
    if (dim <= 0 || k < 0 || k >= dim)
      throw std::domain_error("Ket::basis: index " + std::to_string(k) +
                              " out of range for dimension " + std::to_string(dim));
    std::vector<complex> a(static_cast<std::size_t>(dim));
    a[static_cast<std::size_t>(k)] = 1.0;
    return Ket(std::move(a));
  }

  int dim() const { return static_cast<int>(amps_.size()); }
  std::span<const complex> amplitudes() const { return amps_; }
  complex operator[](int i) const { return amps_[static_cast<std::size_t>(i)]; }

  /// Basis indices whose amplitude modulus reaches zero_tol.
  std::vector<int> support(const TolerancePolicy& policy = {}) const {
    std::vector<int> s;
    for (int i = 0; i < dim(); ++i)
      if (!is_zero(amps_[static_cast<std::size_t>(i)], policy)) s.push_back(i);
    return s;
  }

  Ket scaled(complex factor) const {
    std::vector<complex> a = amps_;
    for (auto& x : a) x *= factor;
    return Ket(std::move(a));
  }

  /// Zero-extends the ket into a larger space.
  Ket padded(int new_dim) const {
    if (new_dim < dim()) throw std::domain_error("Ket::padded: cannot shrink");
    std::vector<complex> a = amps_;
    a.resize(static_cast<std::size_t>(new_dim));
    return Ket(std::move(a));
  }

 private:
  std::vector<complex> amps_;
};

namespace detail {
inline Ket fourier_family(int s, int d, int offset, const char* name) {
  if (d < 3) throw std::domain_error(std::string(name) + ": dimension must be >= 3");
  if (s < 0 || s > d - 2)
    throw std::domain_error(std::string(name) + ": index " + std::to_string(s) +
                            " outside [0, " + std::to_string(d - 2) + "]");
  std::vector<complex> a(static_cast<std::size_t>(d));
  for (int t = 0; t <= d - 2; ++t)
    a[static_cast<std::size_t>(t + offset)] =
        root_of_unity(static_cast<long long>(s) * t, d - 1);
  return Ket(std::move(a));
}
}  // namespace detail

/// |eta_s> = sum_{t=0}^{d-2} w_{d-1}^{st} |t>
inline Ket eta(int s, int d) { return detail::fourier_family(s, d, 0, "eta"); }

/// |xi_s> = sum_{t=0}^{d-2} w_{d-1}^{st} |t+1>
inline Ket xi(int s, int d) { return detail::fourier_family(s, d, 1, "xi"); }

/// <a|b>, conjugate-linear in the first slot.
inline complex inner(const Ket& a, const Ket& b) {
  if (a.dim() != b.dim())
    throw std::domain_error("inner: dimension mismatch (" + std::to_string(a.dim()) + " vs " +
                            std::to_string(b.dim()) + ")");
  complex acc{};
  for (int t = 0; t < a.dim(); ++t) acc += std::conj(a[t]) * b[t];
  return acc;
}

/// Which block a state came from, plus its eta/xi indices in party order.
struct StateLabel {
  std::string block;
  std::vector<int> index;

  std::string str() const {
    std::ostringstream os;
    os << block << '[';
    for (std::size_t i = 0; i < index.size(); ++i) os << (i ? "," : "") << index[i];
    os << ']';
    return os.str();
  }

  static StateLabel parse(const std::string& text) {
    const auto open = text.find('[');
    if (open == std::string::npos || text.back() != ']')
      throw std::domain_error("malformed state label: " + text);
    StateLabel l;
    l.block = text.substr(0, open);
    const std::string body = text.substr(open + 1, text.size() - open - 2);
    std::istringstream is(body);
    std::string item;
    while (std::getline(is, item, ',')) {
      std::size_t used = 0;
      const int v = std::stoi(item, &used);
      if (used != item.size()) throw std::domain_error("malformed state label: " + text);
      l.index.push_back(v);
    }
    return l;
  }

  bool operator==(const StateLabel&) const = default;
};

class ProductState {
 public:
  explicit ProductState(std::vector<Ket> parties, std::optional<StateLabel> label = std::nullopt)
      : parties_(std::move(parties)), label_(std::move(label)) {
    if (parties_.empty()) throw std::domain_error("ProductState: no parties");
    for (const auto& k : parties_)
      if (k.dim() < 2) throw std::domain_error("ProductState: every party needs dim >= 2");
  }

  std::size_t party_count() const { return parties_.size(); }
  const Ket& party(std::size_t i) const { return parties_.at(i); }
  std::span<const Ket> parties() const { return parties_; }
  const std::optional<StateLabel>& label() const { return label_; }

  std::vector<int> dims() const {
    std::vector<int> d;
    d.reserve(parties_.size());
    for (const auto& k : parties_) d.push_back(k.dim());
    return d;
  }

  /// Same state with party i's ket replaced.
  ProductState with_party(std::size_t i, Ket k) const {
    auto p = parties_;
    p.at(i) = std::move(k);
    return ProductState(std::move(p), label_);
  }

 private:
  std::vector<Ket> parties_;
  std::optional<StateLabel> label_;
};

/// prod_k <a_k|b_k>.
inline complex product_inner(const ProductState& a, const ProductState& b) {
  if (a.party_count() != b.party_count())
    throw std::domain_error("product_inner: party count mismatch");
  complex acc{1.0, 0.0};
  for (std::size_t k = 0; k < a.party_count(); ++k) acc *= inner(a.party(k), b.party(k));
  return acc;
}

}  // namespace nonloc
