#pragma once

#include "kdm/errors.hpp"
#include "kdm/scalar.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace kdm {

using idx = std::uint64_t;

template <class S>
using Sparse = std::vector<std::pair<idx, S>>;
template <class S>
using Dense = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <class S>
using DVec = Eigen::Matrix<S, Eigen::Dynamic, 1>;

inline constexpr std::size_t kDenseCutoff = 8192;
inline constexpr double kDefaultTol = 1e-9;

// sort by index, merge duplicates, drop zeros
template <class S>
void canon(Sparse<S>& v) {
  if (v.size() < 2) {
    if (v.size() == 1 && scalar_traits<S>::is_zero(v[0].second)) v.clear();
    return;
  }
  std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::size_t w = 0;
  for (std::size_t r = 0; r < v.size();) {
    idx i = v[r].first;
    S acc = v[r].second;
    for (++r; r < v.size() && v[r].first == i; ++r) acc += v[r].second;
    if (!scalar_traits<S>::is_zero(acc)) v[w++] = {i, std::move(acc)};
  }
  v.resize(w);
}

template <class S>
Sparse<S> unit_vec(idx i, S c = S(1)) {
  return Sparse<S>{{i, std::move(c)}};
}

template <class S>
void axpy(Sparse<S>& out, const S& a, const Sparse<S>& x) {
  for (const auto& [i, c] : x) out.emplace_back(i, a * c);
}

template <class S>
Sparse<S> scaled(const Sparse<S>& x, const S& a) {
  Sparse<S> r;
  r.reserve(x.size());
  for (const auto& [i, c] : x) r.emplace_back(i, a * c);
  return r;
}

template <class S>
Sparse<S> add(Sparse<S> a, const Sparse<S>& b, const S& cb = S(1)) {
  axpy(a, cb, b);
  canon(a);
  return a;
}

template <class S>
double max_abs(const Sparse<S>& v) {
  double m = 0;
  for (const auto& p : v) m = std::max(m, scalar_traits<S>::mag(p.second));
  return m;
}

template <class S>
double sparse_dist(const Sparse<S>& a, const Sparse<S>& b) {
  Sparse<S> d = add(a, b, S(-1));
  return max_abs(d);
}

template <class S>
DVec<S> to_dense(const Sparse<S>& v, std::size_t n) {
  DVec<S> d = DVec<S>::Constant(Eigen::Index(n), S(0));
  for (const auto& [i, c] : v) d(Eigen::Index(i)) += c;
  return d;
}

template <class S>
Sparse<S> to_sparse(const DVec<S>& d) {
  Sparse<S> v;
  for (Eigen::Index i = 0; i < d.size(); ++i)
    if (!scalar_traits<S>::is_zero(d(i))) v.emplace_back(idx(i), d(i));
  return v;
}

// Vector over a labelled finite-dimensional space.
template <class S>
struct Vec {
  std::string space;
  DVec<S> coeffs;
  std::size_t dim() const { return std::size_t(coeffs.size()); }
};

// Matrix-free linear operator. Composition and sums are lazy.
template <class S>
class LinOp {
 public:
  using Fn = std::function<Sparse<S>(const Sparse<S>&)>;

  LinOp() = default;
  LinOp(std::string dom, std::size_t ndom, std::string cod, std::size_t ncod, Fn f)
      : dom_(std::move(dom)), cod_(std::move(cod)), ndom_(ndom), ncod_(ncod),
        fn_(std::make_shared<Fn>(std::move(f))) {}

  static LinOp from_basis(std::string dom, std::size_t ndom, std::string cod, std::size_t ncod,
                          std::function<Sparse<S>(idx)> col) {
    return LinOp(std::move(dom), ndom, std::move(cod), ncod,
                 [col = std::move(col)](const Sparse<S>& v) {
                   Sparse<S> out;
                   for (const auto& [i, c] : v) axpy(out, c, col(i));
                   canon(out);
                   return out;
                 });
  }
  static LinOp identity(const std::string& space, std::size_t n) {
    return LinOp(space, n, space, n, [](const Sparse<S>& v) { return v; });
  }
  static LinOp zero(const std::string& space, std::size_t n) {
    return LinOp(space, n, space, n, [](const Sparse<S>&) { return Sparse<S>{}; });
  }
  static LinOp from_dense(const std::string& dom, const std::string& cod, const Dense<S>& m) {
    auto mp = std::make_shared<Dense<S>>(m);
    return from_basis(dom, std::size_t(m.cols()), cod, std::size_t(m.rows()), [mp](idx j) {
      Sparse<S> c;
      for (Eigen::Index i = 0; i < mp->rows(); ++i)
        if (!scalar_traits<S>::is_zero((*mp)(i, Eigen::Index(j)))) c.emplace_back(idx(i), (*mp)(i, Eigen::Index(j)));
      return c;
    });
  }

  Sparse<S> operator()(const Sparse<S>& v) const { return (*fn_)(v); }
  Sparse<S> column(idx i) const { return (*fn_)(unit_vec<S>(i)); }

  const std::string& domain() const { return dom_; }
  const std::string& codomain() const { return cod_; }
  std::size_t dim_domain() const { return ndom_; }
  std::size_t dim_codomain() const { return ncod_; }
  bool valid() const { return bool(fn_); }

 private:
  std::string dom_, cod_;
  std::size_t ndom_ = 0, ncod_ = 0;
  std::shared_ptr<const Fn> fn_;
};

// a ∘ b
template <class S>
LinOp<S> compose(const LinOp<S>& a, const LinOp<S>& b) {
  if (a.domain() != b.codomain() || a.dim_domain() != b.dim_codomain())
    throw DomainError("compose: " + a.domain() + " vs " + b.codomain());
  return LinOp<S>(b.domain(), b.dim_domain(), a.codomain(), a.dim_codomain(),
                  [a, b](const Sparse<S>& v) { return a(b(v)); });
}

template <class S>
LinOp<S> operator*(const LinOp<S>& a, const LinOp<S>& b) {
  return compose(a, b);
}

// left-to-right list [A1, A2, ..., An] gives A1 ∘ A2 ∘ ... ∘ An
template <class S>
LinOp<S> chain(const std::vector<LinOp<S>>& ops) {
  if (ops.empty()) throw DomainError("chain: empty");
  LinOp<S> r = ops.back();
  for (std::size_t k = ops.size() - 1; k-- > 0;) r = compose(ops[k], r);
  return r;
}

template <class S>
LinOp<S> linear_combination(const std::vector<std::pair<S, LinOp<S>>>& terms, const std::string& space,
                            std::size_t n) {
  for (const auto& t : terms)
    if (t.second.domain() != space || t.second.codomain() != space) throw DomainError("sum: space mismatch");
  return LinOp<S>(space, n, space, n, [terms](const Sparse<S>& v) {
    Sparse<S> out;
    for (const auto& [c, op] : terms) axpy(out, c, op(v));
    canon(out);
    return out;
  });
}

template <class S>
Vec<S> apply(const LinOp<S>& op, const Vec<S>& v) {
  if (v.space != op.domain() || v.dim() != op.dim_domain())
    throw DomainError("apply: vector in '" + v.space + "' (dim " + std::to_string(v.dim()) +
                      ") but operator domain is '" + op.domain() + "' (dim " +
                      std::to_string(op.dim_domain()) + ")");
  return Vec<S>{op.codomain(), to_dense(op(to_sparse(v.coeffs)), op.dim_codomain())};
}

template <class S>
Dense<S> materialize(const LinOp<S>& op, std::size_t cutoff = kDenseCutoff) {
  if (op.dim_domain() > cutoff || op.dim_codomain() > cutoff)
    throw CapacityError("materialize: dimension " + std::to_string(op.dim_domain()) + " over cutoff " +
                        std::to_string(cutoff));
  Dense<S> m = Dense<S>::Constant(Eigen::Index(op.dim_codomain()), Eigen::Index(op.dim_domain()), S(0));
  for (idx j = 0; j < op.dim_domain(); ++j)
    for (const auto& [i, c] : op.column(j)) m(Eigen::Index(i), Eigen::Index(j)) += c;
  return m;
}

struct Comparison {
  bool equal = true;
  double max_deviation = 0;
  bool sampled = false;
  std::size_t checked = 0;
};

// Compare two operators column by column. Above `full_cutoff` columns, a seeded
// sample of `samples` basis states is used instead.
template <class S>
Comparison op_compare(const LinOp<S>& a, const LinOp<S>& b, double tol = kDefaultTol,
                      std::size_t full_cutoff = 4096, std::size_t samples = 64, std::uint64_t seed = 7) {
  if (a.domain() != b.domain() || a.codomain() != b.codomain() || a.dim_domain() != b.dim_domain())
    throw DomainError("op_equal: space mismatch");
  Comparison r;
  auto check = [&](idx j) {
    double d = sparse_dist(a.column(j), b.column(j));
    r.max_deviation = std::max(r.max_deviation, d);
    ++r.checked;
  };
  std::size_t n = a.dim_domain();
  if (n <= full_cutoff) {
    for (idx j = 0; j < n; ++j) check(j);
  } else {
    r.sampled = true;
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<idx> dist(0, n - 1);
    for (std::size_t k = 0; k < samples; ++k) check(dist(rng));
  }
  r.equal = r.max_deviation <= tol;
  return r;
}

template <class S>
bool op_equal(const LinOp<S>& a, const LinOp<S>& b, double tol = kDefaultTol) {
  return op_compare(a, b, tol).equal;
}

// Row reduction in place; returns pivot columns. Entries with magnitude <= tol count as zero.
template <class S>
std::vector<Eigen::Index> rref(Dense<S>& m, double tol, Eigen::Index ncols = -1) {
  if (ncols < 0) ncols = m.cols();
  std::vector<Eigen::Index> piv;
  Eigen::Index row = 0;
  for (Eigen::Index col = 0; col < ncols && row < m.rows(); ++col) {
    Eigen::Index best = -1;
    double bm = tol;
    for (Eigen::Index r = row; r < m.rows(); ++r) {
      double mg = scalar_traits<S>::mag(m(r, col));
      if (scalar_traits<S>::exact ? !scalar_traits<S>::is_zero(m(r, col)) && (best < 0 || mg > bm) : mg > bm) {
        best = r;
        bm = mg;
      }
    }
    if (best < 0) continue;
    if (best != row) m.row(best).swap(m.row(row));
    S p = m(row, col);
    for (Eigen::Index c = col; c < m.cols(); ++c) m(row, c) /= p;
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      if (r == row || scalar_traits<S>::is_zero(m(r, col))) continue;
      S f = m(r, col);
      for (Eigen::Index c = col; c < m.cols(); ++c) m(r, c) -= f * m(row, c);
    }
    piv.push_back(col);
    ++row;
  }
  return piv;
}

template <class S>
std::size_t rank_dense(const Dense<S>& m, double tol = kDefaultTol) {
  if constexpr (scalar_traits<S>::exact) {
    Dense<S> w = m;
    return rref(w, 0.0).size();
  } else {
    Eigen::MatrixXcd w(m.rows(), m.cols());
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) w(i, j) = scalar_traits<S>::to_cd(m(i, j));
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(w);
    std::size_t r = 0;
    for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
      if (svd.singularValues()(i) > tol) ++r;
    return r;
  }
}

template <class S>
std::size_t rank(const LinOp<S>& op, double tol = kDefaultTol, std::size_t cutoff = kDenseCutoff) {
  if (op.domain() != op.codomain()) throw DomainError("rank: operator must be an endomorphism");
  return rank_dense(materialize(op, cutoff), tol);
}

template <class S>
struct AffineSolution {
  std::optional<DVec<S>> particular;  // set when the system has a right-hand side
  std::vector<DVec<S>> basis;         // basis of the homogeneous solution space
};

// Solve the stacked system A_k x = b_k. All A_k share a domain.
template <class S>
AffineSolution<S> solve_linear(const std::vector<std::pair<LinOp<S>, Vec<S>>>& system, double tol = kDefaultTol) {
  if (system.empty()) throw DomainError("solve_linear: empty system");
  const auto& dom = system.front().first.domain();
  std::size_t n = system.front().first.dim_domain();
  std::size_t rows = 0;
  bool affine = false;
  for (const auto& [A, b] : system) {
    if (A.domain() != dom || A.dim_domain() != n) throw DomainError("solve_linear: domain mismatch");
    if (b.space != A.codomain() || b.dim() != A.dim_codomain()) throw DomainError("solve_linear: rhs mismatch");
    rows += A.dim_codomain();
    for (Eigen::Index i = 0; i < b.coeffs.size(); ++i)
      if (!scalar_traits<S>::is_zero(b.coeffs(i))) affine = true;
  }
  Dense<S> m = Dense<S>::Constant(Eigen::Index(rows), Eigen::Index(n + 1), S(0));
  Eigen::Index r0 = 0;
  for (const auto& [A, b] : system) {
    Dense<S> a = materialize(A);
    m.block(r0, 0, a.rows(), a.cols()) = a;
    m.block(r0, Eigen::Index(n), a.rows(), 1) = b.coeffs;
    r0 += a.rows();
  }
  double ptol = scalar_traits<S>::exact ? 0.0 : tol;
  auto piv = rref(m, ptol, Eigen::Index(n));
  for (Eigen::Index r = Eigen::Index(piv.size()); r < m.rows(); ++r)
    if (scalar_traits<S>::mag(m(r, Eigen::Index(n))) > ptol && !scalar_traits<S>::is_zero(m(r, Eigen::Index(n))))
      throw NoSolution("solve_linear: inconsistent system");
  AffineSolution<S> sol;
  std::vector<bool> is_piv(n, false);
  for (auto c : piv) is_piv[std::size_t(c)] = true;
  if (affine) {
    DVec<S> x = DVec<S>::Constant(Eigen::Index(n), S(0));
    for (std::size_t k = 0; k < piv.size(); ++k) x(piv[k]) = m(Eigen::Index(k), Eigen::Index(n));
    sol.particular = x;
  }
  for (std::size_t f = 0; f < n; ++f) {
    if (is_piv[f]) continue;
    DVec<S> x = DVec<S>::Constant(Eigen::Index(n), S(0));
    x(Eigen::Index(f)) = S(1);
    for (std::size_t k = 0; k < piv.size(); ++k) x(piv[k]) = -m(Eigen::Index(k), Eigen::Index(f));
    sol.basis.push_back(x);
  }
  return sol;
}

}  // namespace kdm
