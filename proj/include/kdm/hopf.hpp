#pragma once

#include "kdm/linalg.hpp"

#include <map>
#include <numeric>
#include <optional>
#include <type_traits>
#include <string>
#include <vector>

namespace kdm {

// Associative unital algebra given by structure constants on a basis.
template <class S>
struct Algebra {
  std::string name;
  std::size_t n = 0;
  std::vector<std::string> basis;
  std::vector<Sparse<S>> mult;  // mult[i*n+j] = e_i e_j
  Sparse<S> unit;
  std::size_t dim() const { return n; }
};

template <class S>
struct HopfAlgebra : Algebra<S> {
  std::vector<Sparse<S>> comult;  // comult[i] over n*n, index a*n+b
  std::vector<S> counit;
  std::vector<Sparse<S>> antipode;
  std::vector<Sparse<S>> antipode_inv;  // filled by finalize(); empty if S is singular
  std::optional<Sparse<S>> R;           // universal R-matrix over n*n
};

// ---------------------------------------------------------------- elements

template <class S>
Sparse<S> basis_elem(idx i) {
  return unit_vec<S>(i);
}

template <class S>
Sparse<S> mul(const Algebra<S>& A, const Sparse<S>& x, const Sparse<S>& y) {
  Sparse<S> out;
  for (const auto& [i, a] : x)
    for (const auto& [j, b] : y) axpy(out, a * b, A.mult[i * A.n + j]);
  canon(out);
  return out;
}

template <class S>
Sparse<S> linmap(const std::vector<Sparse<S>>& m, const Sparse<S>& x) {
  Sparse<S> out;
  for (const auto& [i, a] : x) axpy(out, a, m[i]);
  canon(out);
  return out;
}

template <class S>
Sparse<S> comul(const HopfAlgebra<S>& H, const Sparse<S>& x) {
  return linmap(H.comult, x);
}
template <class S>
Sparse<S> antipode(const HopfAlgebra<S>& H, const Sparse<S>& x) {
  return linmap(H.antipode, x);
}
template <class S>
Sparse<S> antipode_inv(const HopfAlgebra<S>& H, const Sparse<S>& x) {
  if (H.antipode_inv.empty()) throw StructureError(H.name + ": antipode not invertible");
  return linmap(H.antipode_inv, x);
}
template <class S>
S counit(const HopfAlgebra<S>& H, const Sparse<S>& x) {
  S r(0);
  for (const auto& [i, a] : x) r += a * H.counit[i];
  return r;
}

inline idx ipow(idx n, std::size_t k) {
  idx r = 1;
  while (k--) r *= n;
  return r;
}

// Apply a per-leg linear map (given on basis vectors) to leg `leg` of a k-leg tensor.
template <class S, class F>
Sparse<S> map_leg(const Sparse<S>& x, std::size_t n, std::size_t k, std::size_t leg, F&& f) {
  idx stride = ipow(n, k - 1 - leg);
  Sparse<S> out;
  for (const auto& [i, a] : x) {
    idx d = (i / stride) % n;
    idx base = i - d * stride;
    for (const auto& [r, c] : f(d)) out.emplace_back(base + r * stride, a * c);
  }
  canon(out);
  return out;
}

// Replace leg `leg` (of k legs, dim n) by the two legs of a map idx -> Sparse over n*m.
template <class S, class F>
Sparse<S> split_leg(const Sparse<S>& x, std::size_t n, std::size_t k, std::size_t leg, F&& f) {
  idx lo = ipow(n, k - 1 - leg);
  Sparse<S> out;
  for (const auto& [i, a] : x) {
    idx hi = i / (lo * n), d = (i / lo) % n, rest = i % lo;
    for (const auto& [r, c] : f(d)) out.emplace_back((hi * n * n + r) * lo + rest, a * c);
  }
  canon(out);
  return out;
}

// Contract leg `leg` with a functional given on basis vectors.
template <class S, class F>
Sparse<S> contract_leg(const Sparse<S>& x, std::size_t n, std::size_t k, std::size_t leg, F&& f) {
  idx lo = ipow(n, k - 1 - leg);
  Sparse<S> out;
  for (const auto& [i, a] : x) {
    idx hi = i / (lo * n), d = (i / lo) % n, rest = i % lo;
    S c = f(d);
    if (!scalar_traits<S>::is_zero(c)) out.emplace_back(hi * lo + rest, a * c);
  }
  canon(out);
  return out;
}

// Permute legs: output leg p is input leg perm[p].
template <class S>
Sparse<S> permute_legs(const Sparse<S>& x, std::size_t n, const std::vector<std::size_t>& perm) {
  std::size_t k = perm.size();
  std::vector<idx> digits(k);
  Sparse<S> out;
  out.reserve(x.size());
  for (const auto& [i, a] : x) {
    idx t = i;
    for (std::size_t l = k; l-- > 0;) {
      digits[l] = t % n;
      t /= n;
    }
    idx o = 0;
    for (std::size_t p = 0; p < k; ++p) o = o * n + digits[perm[p]];
    out.emplace_back(o, a);
  }
  canon(out);
  return out;
}

template <class S>
Sparse<S> tensor(const Sparse<S>& x, const Sparse<S>& y, idx ny) {
  Sparse<S> out;
  out.reserve(x.size() * y.size());
  for (const auto& [i, a] : x)
    for (const auto& [j, b] : y) out.emplace_back(i * ny + j, a * b);
  canon(out);
  return out;
}

// Legwise product in A^{⊗k}.
template <class S>
Sparse<S> mul_k(const Algebra<S>& A, std::size_t k, const Sparse<S>& x, const Sparse<S>& y) {
  const idx n = A.n;
  Sparse<S> out;
  std::vector<idx> dx(k), dy(k);
  for (const auto& [i, a] : x) {
    idx t = i;
    for (std::size_t l = k; l-- > 0;) { dx[l] = t % n; t /= n; }
    for (const auto& [j, b] : y) {
      idx u = j;
      for (std::size_t l = k; l-- > 0;) { dy[l] = u % n; u /= n; }
      Sparse<S> acc{{0, a * b}};
      for (std::size_t l = 0; l < k; ++l) {
        const auto& m = A.mult[dx[l] * n + dy[l]];
        Sparse<S> nxt;
        nxt.reserve(acc.size() * m.size());
        for (const auto& [p, c] : acc)
          for (const auto& [q, d] : m) nxt.emplace_back(p * n + q, c * d);
        acc.swap(nxt);
        if (acc.empty()) break;
      }
      out.insert(out.end(), acc.begin(), acc.end());
    }
  }
  canon(out);
  return out;
}

template <class S>
Sparse<S> unit_k(const Algebra<S>& A, std::size_t k) {
  Sparse<S> u{{0, S(1)}};
  for (std::size_t l = 0; l < k; ++l) u = tensor(u, A.unit, A.n);
  return u;
}

// Δ^{(k-1)} : H -> H^{⊗k}
template <class S>
Sparse<S> iterated_comul(const HopfAlgebra<S>& H, const Sparse<S>& x, std::size_t k) {
  Sparse<S> r = x;
  for (std::size_t legs = 1; legs < k; ++legs)
    r = split_leg(r, H.n, legs, legs - 1, [&](idx d) -> const Sparse<S>& { return H.comult[d]; });
  return r;
}

// ---------------------------------------------------------------- finalize

template <class S>
Dense<S> as_matrix(const std::vector<Sparse<S>>& cols, std::size_t n) {
  Dense<S> m = Dense<S>::Constant(Eigen::Index(n), Eigen::Index(cols.size()), S(0));
  for (std::size_t j = 0; j < cols.size(); ++j)
    for (const auto& [i, c] : cols[j]) m(Eigen::Index(i), Eigen::Index(j)) += c;
  return m;
}

template <class S>
std::optional<Dense<S>> invert(const Dense<S>& m) {
  const Eigen::Index n = m.rows();
  Dense<S> aug(n, 2 * n);
  aug.leftCols(n) = m;
  aug.rightCols(n) = Dense<S>::Identity(n, n);
  auto piv = rref(aug, scalar_traits<S>::exact ? 0.0 : 1e-11, n);
  if (Eigen::Index(piv.size()) != n) return std::nullopt;
  return Dense<S>(aug.rightCols(n));
}

template <class S>
std::vector<Sparse<S>> columns(const Dense<S>& m) {
  std::vector<Sparse<S>> c(std::size_t(m.cols()));
  for (Eigen::Index j = 0; j < m.cols(); ++j) c[std::size_t(j)] = to_sparse<S>(m.col(j));
  return c;
}

template <class S>
void finalize(HopfAlgebra<S>& H) {
  for (auto& v : H.mult) canon(v);
  for (auto& v : H.comult) canon(v);
  for (auto& v : H.antipode) canon(v);
  canon(H.unit);
  if (H.R) canon(*H.R);
  auto inv = invert(as_matrix(H.antipode, H.n));
  H.antipode_inv = inv ? columns(*inv) : std::vector<Sparse<S>>{};
}

// ---------------------------------------------------------------- constructors

// Group algebra from a multiplication table of indices.
template <class S>
HopfAlgebra<S> group_algebra(const std::string& name, const std::vector<std::vector<int>>& table,
                             std::vector<std::string> labels = {}) {
  const std::size_t n = table.size();
  HopfAlgebra<S> H;
  H.name = name;
  H.n = n;
  if (labels.empty())
    for (std::size_t g = 0; g < n; ++g) labels.push_back("g" + std::to_string(g));
  H.basis = labels;
  H.mult.resize(n * n);
  int e = -1;
  for (std::size_t g = 0; g < n; ++g) {
    if (table[g].size() != n) throw StructureError("group table is not square");
    bool is_e = true;
    for (std::size_t h = 0; h < n; ++h) {
      if (table[g][h] < 0 || std::size_t(table[g][h]) >= n) throw StructureError("group table entry out of range");
      H.mult[g * n + h] = unit_vec<S>(idx(table[g][h]));
      if (table[g][h] != int(h)) is_e = false;
    }
    if (is_e) e = int(g);
  }
  if (e < 0) throw StructureError("group table has no identity");
  H.unit = unit_vec<S>(idx(e));
  H.comult.resize(n);
  H.antipode.resize(n);
  H.counit.assign(n, S(1));
  for (std::size_t g = 0; g < n; ++g) {
    H.comult[g] = unit_vec<S>(idx(g * n + g));
    int inv = -1;
    for (std::size_t h = 0; h < n; ++h)
      if (table[g][h] == e) inv = int(h);
    if (inv < 0) throw StructureError("group table: element without inverse");
    H.antipode[g] = unit_vec<S>(idx(inv));
  }
  finalize(H);
  return H;
}

inline std::vector<std::vector<int>> cyclic_table(int n) {
  std::vector<std::vector<int>> t(std::size_t(n), std::vector<int>(std::size_t(n), 0));
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) t[std::size_t(a)][std::size_t(b)] = (a + b) % n;
  return t;
}

inline std::vector<std::vector<int>> klein_table() {
  std::vector<std::vector<int>> t(4, std::vector<int>(4));
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) t[std::size_t(a)][std::size_t(b)] = a ^ b;
  return t;
}

// S3 as permutations of {0,1,2}; element order: e, (01), (12), (02), (012), (021)
inline std::vector<std::vector<int>> s3_table() {
  const int perms[6][3] = {{0, 1, 2}, {1, 0, 2}, {0, 2, 1}, {2, 1, 0}, {1, 2, 0}, {2, 0, 1}};
  auto find = [&](const int p[3]) {
    for (int k = 0; k < 6; ++k)
      if (perms[k][0] == p[0] && perms[k][1] == p[1] && perms[k][2] == p[2]) return k;
    return -1;
  };
  std::vector<std::vector<int>> t(6, std::vector<int>(6));
  for (int a = 0; a < 6; ++a)
    for (int b = 0; b < 6; ++b) {
      int c[3];
      for (int x = 0; x < 3; ++x) c[x] = perms[a][perms[b][x]];  // a∘b
      t[std::size_t(a)][std::size_t(b)] = find(c);
    }
  return t;
}

template <class S>
HopfAlgebra<S> named_group_algebra(const std::string& g) {
  if (g == "Z2") return group_algebra<S>("C[Z2]", cyclic_table(2), {"e", "g"});
  if (g == "Z4") return group_algebra<S>("C[Z4]", cyclic_table(4), {"e", "g", "g2", "g3"});
  if (g == "Z2xZ2") return group_algebra<S>("C[Z2xZ2]", klein_table(), {"e", "a", "b", "ab"});
  if (g == "S3") return group_algebra<S>("C[S3]", s3_table(), {"e", "(01)", "(12)", "(02)", "(012)", "(021)"});
  throw StructureError("unknown group '" + g + "'");
}

// ---------------------------------------------------------------- duality and variants

// Dual Hopf algebra on the dual basis.
template <class S>
HopfAlgebra<S> dual(const HopfAlgebra<S>& H) {
  const std::size_t n = H.n;
  HopfAlgebra<S> D;
  D.name = H.name + "*";
  D.n = n;
  for (const auto& b : H.basis) D.basis.push_back("d(" + b + ")");
  D.mult.assign(n * n, {});
  D.comult.assign(n, {});
  D.antipode.assign(n, {});
  D.counit.assign(n, S(0));
  for (std::size_t k = 0; k < n; ++k)
    for (const auto& [ij, c] : H.comult[k]) D.mult[ij].emplace_back(k, c);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (const auto& [k, c] : H.mult[i * n + j]) D.comult[k].emplace_back(i * n + j, c);
  for (std::size_t k = 0; k < n; ++k) {
    if (!scalar_traits<S>::is_zero(H.counit[k])) D.unit.emplace_back(k, H.counit[k]);
    for (const auto& [i, c] : H.antipode[k]) D.antipode[i].emplace_back(k, c);
  }
  for (const auto& [i, c] : H.unit) D.counit[i] += c;
  finalize(D);
  return D;
}

template <class S>
HopfAlgebra<S> opposite(const HopfAlgebra<S>& H) {
  if (H.antipode_inv.empty()) throw StructureError(H.name + ": antipode not invertible");
  HopfAlgebra<S> O = H;
  O.name = H.name + "^op";
  for (std::size_t i = 0; i < H.n; ++i)
    for (std::size_t j = 0; j < H.n; ++j) O.mult[i * H.n + j] = H.mult[j * H.n + i];
  O.antipode = H.antipode_inv;
  if (H.R) O.R = permute_legs(*H.R, H.n, {1, 0});
  finalize(O);
  return O;
}

template <class S>
HopfAlgebra<S> coopposite(const HopfAlgebra<S>& H) {
  if (H.antipode_inv.empty()) throw StructureError(H.name + ": antipode not invertible");
  HopfAlgebra<S> O = H;
  O.name = H.name + "^cop";
  for (std::size_t i = 0; i < H.n; ++i) O.comult[i] = permute_legs(H.comult[i], H.n, {1, 0});
  O.antipode = H.antipode_inv;
  if (H.R) O.R = permute_legs(*H.R, H.n, {1, 0});
  finalize(O);
  return O;
}

template <class S>
HopfAlgebra<S> op_coop(const HopfAlgebra<S>& H) {
  HopfAlgebra<S> O = opposite(coopposite(H));
  O.name = H.name + "^op,cop";
  if (H.R) O.R = H.R;
  return O;
}

template <class S>
struct OpCopVariants {
  HopfAlgebra<S> op, cop, opcop;
};

template <class S>
OpCopVariants<S> op_cop_variants(const HopfAlgebra<S>& H) {
  return {opposite(H), coopposite(H), op_coop(H)};
}

// Componentwise H⊗K, basis index i*nK + j.
template <class S>
HopfAlgebra<S> tensor_hopf(const HopfAlgebra<S>& H, const HopfAlgebra<S>& K) {
  const std::size_t nh = H.n, nk = K.n, n = nh * nk;
  HopfAlgebra<S> T;
  T.name = H.name + "⊗" + K.name;
  T.n = n;
  for (const auto& a : H.basis)
    for (const auto& b : K.basis) T.basis.push_back(a + "⊗" + b);
  T.mult.resize(n * n);
  T.comult.resize(n);
  T.antipode.resize(n);
  T.counit.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t h = i / nk, k = i % nk;
    for (std::size_t j = 0; j < n; ++j) {
      std::size_t h2 = j / nk, k2 = j % nk;
      T.mult[i * n + j] = tensor(H.mult[h * nh + h2], K.mult[k * nk + k2], nk);
    }
    // (h1⊗h2)⊗(k1⊗k2) -> (h1⊗k1)⊗(h2⊗k2)
    Sparse<S> c;
    for (const auto& [a, x] : H.comult[h])
      for (const auto& [b, y] : K.comult[k]) {
        idx h1 = a / nh, h2 = a % nh, k1 = b / nk, k2 = b % nk;
        c.emplace_back((h1 * nk + k1) * n + (h2 * nk + k2), x * y);
      }
    T.comult[i] = c;
    T.antipode[i] = tensor(H.antipode[h], K.antipode[k], nk);
    T.counit[i] = H.counit[h] * K.counit[k];
  }
  T.unit = tensor(H.unit, K.unit, nk);
  finalize(T);
  return T;
}

// ---------------------------------------------------------------- axioms

struct AxiomCheck {
  std::string axiom;
  double max_deviation = 0;
  bool pass = true;
  std::string detail;
};

struct AxiomReport {
  std::string algebra;
  std::vector<AxiomCheck> checks;
  bool ok() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
  double max_deviation() const {
    double m = 0;
    for (const auto& c : checks) m = std::max(m, c.max_deviation);
    return m;
  }
  const AxiomCheck* find(const std::string& a) const {
    for (const auto& c : checks)
      if (c.axiom == a) return &c;
    return nullptr;
  }
};

namespace detail {
struct Tracker {
  AxiomCheck c;
  double tol;
  Tracker(std::string a, double t) : tol(t) { c.axiom = std::move(a); }
  template <class S>
  void cmp(const Sparse<S>& x, const Sparse<S>& y, const std::string& where) {
    double d = sparse_dist(x, y);
    if (d > c.max_deviation) {
      c.max_deviation = d;
      if (d > tol) c.detail = where;
    }
  }
  AxiomCheck done() {
    c.pass = c.max_deviation <= tol;
    return c;
  }
};
}  // namespace detail

template <class S>
Sparse<S> r_inverse(const HopfAlgebra<S>& H) {
  // R^{-1} = (S⊗id)(R)
  return map_leg(*H.R, H.n, 2, 0, [&](idx d) -> const Sparse<S>& { return H.antipode[d]; });
}

template <class S>
AxiomReport check_quasitriangular(const HopfAlgebra<S>& H, double tol = kDefaultTol) {
  AxiomReport rep;
  rep.algebra = H.name;
  if (!H.R) return rep;
  const std::size_t n = H.n;
  const Sparse<S>& R = *H.R;
  Sparse<S> Rinv = r_inverse(H);
  {
    detail::Tracker t("R invertible", tol);
    t.cmp(mul_k(H, 2, R, Rinv), unit_k(H, 2), "R R^-1");
    t.cmp(mul_k(H, 2, Rinv, R), unit_k(H, 2), "R^-1 R");
    rep.checks.push_back(t.done());
  }
  {
    detail::Tracker t("R intertwines Δ and Δ^op", tol);
    for (std::size_t i = 0; i < n; ++i) {
      Sparse<S> d = H.comult[i], dop = permute_legs(d, n, {1, 0});
      t.cmp(mul_k(H, 2, R, d), mul_k(H, 2, dop, R), H.basis[i]);
    }
    rep.checks.push_back(t.done());
  }
  auto emb = [&](const Sparse<S>& x, std::vector<std::size_t> where) {
    // place the two legs of x into legs `where` of a 3-leg tensor, unit elsewhere
    Sparse<S> r = tensor(x, H.unit, n);  // legs (x1, x2, 1)
    std::vector<std::size_t> perm(3);
    std::size_t other = 3 - where[0] - where[1];
    perm[where[0]] = 0;
    perm[where[1]] = 1;
    perm[other] = 2;
    return permute_legs(r, n, perm);
  };
  Sparse<S> R12 = emb(R, {0, 1}), R13 = emb(R, {0, 2}), R23 = emb(R, {1, 2});
  {
    detail::Tracker t("hexagon (Δ⊗id)R = R13 R23", tol);
    Sparse<S> lhs = split_leg(R, n, 2, 0, [&](idx d) -> const Sparse<S>& { return H.comult[d]; });
    t.cmp(lhs, mul_k(H, 3, R13, R23), "R");
    rep.checks.push_back(t.done());
  }
  {
    detail::Tracker t("hexagon (id⊗Δ)R = R13 R12", tol);
    Sparse<S> lhs = split_leg(R, n, 2, 1, [&](idx d) -> const Sparse<S>& { return H.comult[d]; });
    t.cmp(lhs, mul_k(H, 3, R13, R12), "R");
    rep.checks.push_back(t.done());
  }
  {
    detail::Tracker t("QYBE", tol);
    t.cmp(mul_k(H, 3, mul_k(H, 3, R12, R13), R23), mul_k(H, 3, mul_k(H, 3, R23, R13), R12), "R");
    rep.checks.push_back(t.done());
  }
  return rep;
}

template <class S>
AxiomReport check_hopf(const HopfAlgebra<S>& H, double tol = kDefaultTol) {
  AxiomReport rep;
  rep.algebra = H.name;
  const std::size_t n = H.n;
  auto name = [&](std::size_t i) { return i < H.basis.size() ? H.basis[i] : std::to_string(i); };
  auto dims = [&]() {
    detail::Tracker t("dimensions", 0.0);
    bool ok = H.mult.size() == n * n && H.comult.size() == n && H.antipode.size() == n && H.counit.size() == n;
    auto inrange = [&](const Sparse<S>& v, idx lim) {
      for (const auto& p : v)
        if (p.first >= lim) return false;
      return true;
    };
    if (ok) {
      for (const auto& v : H.mult) ok = ok && inrange(v, n);
      for (const auto& v : H.comult) ok = ok && inrange(v, n * n);
      for (const auto& v : H.antipode) ok = ok && inrange(v, n);
      ok = ok && inrange(H.unit, n);
    }
    t.c.max_deviation = ok ? 0 : 1;
    if (!ok) t.c.detail = "structure tensor shapes inconsistent";
    return t.done();
  };
  rep.checks.push_back(dims());
  if (!rep.checks.back().pass) return rep;
  {
    detail::Tracker t("associativity", tol);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const auto& ij = H.mult[i * n + j];
        for (std::size_t k = 0; k < n; ++k) {
          Sparse<S> l = mul(H, ij, basis_elem<S>(k));
          Sparse<S> r = mul(H, basis_elem<S>(i), H.mult[j * n + k]);
          t.cmp(l, r, name(i) + "," + name(j) + "," + name(k));
        }
      }
    rep.checks.push_back(t.done());
  }
  {
    detail::Tracker t("unit", tol);
    for (std::size_t i = 0; i < n; ++i) {
      t.cmp(mul(H, H.unit, basis_elem<S>(i)), basis_elem<S>(i), name(i));
      t.cmp(mul(H, basis_elem<S>(i), H.unit), basis_elem<S>(i), name(i));
    }
    rep.checks.push_back(t.done());
  }
  {
    detail::Tracker t("coassociativity", tol);
    for (std::size_t i = 0; i < n; ++i) {
      auto cf = [&](idx d) -> const Sparse<S>& { return H.comult[d]; };
      t.cmp(split_leg(H.comult[i], n, 2, 0, cf), split_leg(H.comult[i], n, 2, 1, cf), name(i));
    }
    rep.checks.push_back(t.done());
  }
  {
    detail::Tracker t("counit", tol);
    auto ef = [&](idx d) { return H.counit[d]; };
    for (std::size_t i = 0; i < n; ++i) {
      t.cmp(contract_leg(H.comult[i], n, 2, 0, ef), basis_elem<S>(i), name(i));
      t.cmp(contract_leg(H.comult[i], n, 2, 1, ef), basis_elem<S>(i), name(i));
    }
    rep.checks.push_back(t.done());
  }
  {
    detail::Tracker t("bialgebra", tol);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        Sparse<S> l = comul(H, H.mult[i * n + j]);
        Sparse<S> r = mul_k(H, 2, H.comult[i], H.comult[j]);
        t.cmp(l, r, "Δ(" + name(i) + name(j) + ")");
        Sparse<S> el{{0, counit(H, H.mult[i * n + j])}}, er{{0, H.counit[i] * H.counit[j]}};
        canon(el);
        canon(er);
        t.cmp(el, er, "ε(" + name(i) + name(j) + ")");
      }
    t.cmp(comul(H, H.unit), tensor(H.unit, H.unit, n), "Δ(1)");
    Sparse<S> e1{{0, counit(H, H.unit)}};
    t.cmp(e1, unit_vec<S>(0), "ε(1)");
    rep.checks.push_back(t.done());
  }
  {
    detail::Tracker t("antipode", tol);
    for (std::size_t i = 0; i < n; ++i) {
      Sparse<S> l, r;
      for (const auto& [ab, c] : H.comult[i]) {
        idx a = ab / n, b = ab % n;
        axpy(l, c, mul(H, H.antipode[a], basis_elem<S>(b)));
        axpy(r, c, mul(H, basis_elem<S>(a), H.antipode[b]));
      }
      canon(l);
      canon(r);
      Sparse<S> e = scaled(H.unit, H.counit[i]);
      t.cmp(l, e, "S(x1)x2 at " + name(i));
      t.cmp(r, e, "x1S(x2) at " + name(i));
    }
    rep.checks.push_back(t.done());
  }
  if (H.R) {
    auto q = check_quasitriangular(H, tol);
    rep.checks.insert(rep.checks.end(), q.checks.begin(), q.checks.end());
  }
  return rep;
}

template <class S>
bool antipode_involutive(const HopfAlgebra<S>& H, double tol = kDefaultTol) {
  for (std::size_t i = 0; i < H.n; ++i)
    if (sparse_dist(antipode(H, H.antipode[i]), basis_elem<S>(i)) > tol) return false;
  return true;
}

// ---------------------------------------------------------------- Haar integral

template <class S>
struct HaarIntegral {
  Sparse<S> element;
};

template <class S>
LinOp<S> left_mult_op(const Algebra<S>& A, const Sparse<S>& x, const std::string& space) {
  return LinOp<S>::from_basis(space, A.n, space, A.n, [&A, x](idx j) { return mul(A, x, basis_elem<S>(j)); });
}
template <class S>
LinOp<S> right_mult_op(const Algebra<S>& A, const Sparse<S>& x, const std::string& space) {
  return LinOp<S>::from_basis(space, A.n, space, A.n, [&A, x](idx j) { return mul(A, basis_elem<S>(j), x); });
}

// Solves hλ = λh = ε(h)λ; the solution space must be a line with ε ≠ 0 on it.
template <class S>
HaarIntegral<S> haar(const HopfAlgebra<S>& H, double tol = kDefaultTol) {
  const std::string sp = H.name;
  std::vector<std::pair<LinOp<S>, Vec<S>>> sys;
  Vec<S> z{sp, DVec<S>::Constant(Eigen::Index(H.n), S(0))};
  for (std::size_t i = 0; i < H.n; ++i) {
    Sparse<S> e = basis_elem<S>(i);
    S eps = H.counit[i];
    auto L = left_mult_op(H, e, sp), Rm = right_mult_op(H, e, sp);
    auto shift = [eps](const LinOp<S>& m) {
      return LinOp<S>(m.domain(), m.dim_domain(), m.codomain(), m.dim_codomain(),
                      [m, eps](const Sparse<S>& v) { return add(m(v), v, S(-eps)); });
    };
    sys.emplace_back(shift(L), z);
    sys.emplace_back(shift(Rm), z);
  }
  auto sol = solve_linear(sys, tol);
  if (sol.basis.size() != 1)
    throw NotSemisimple(H.name + ": integral space has dimension " + std::to_string(sol.basis.size()));
  Sparse<S> l = to_sparse<S>(sol.basis[0]);
  S e = counit(H, l);
  if (scalar_traits<S>::mag(e) <= tol) throw NotSemisimple(H.name + ": integral has ε = 0");
  return {scaled(l, S(1) / e)};
}

// ---------------------------------------------------------------- Drinfel'd double

// D(H) = H*⊗H, basis index a*n + h (dual index first).
template <class S>
HopfAlgebra<S> drinfeld_double(const HopfAlgebra<S>& H) {
  if (H.antipode_inv.empty()) throw StructureError(H.name + ": antipode not invertible");
  const std::size_t n = H.n, N = n * n;
  const HopfAlgebra<S> Hs = dual(H);
  HopfAlgebra<S> D;
  D.name = "D(" + H.name + ")";
  D.n = N;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t h = 0; h < n; ++h) D.basis.push_back(Hs.basis[a] + "⊗" + H.basis[h]);
  D.mult.resize(N * N);
  D.comult.resize(N);
  D.antipode.resize(N);
  D.counit.resize(N);
  std::vector<Sparse<S>> D2(n);
  for (std::size_t h = 0; h < n; ++h) D2[h] = iterated_comul(H, basis_elem<S>(h), 3);
  // coefficient α^b(x) of x
  auto coef = [](const Sparse<S>& x, idx b) {
    for (const auto& [i, c] : x)
      if (i == b) return c;
    return S(0);
  };
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t h = 0; h < n; ++h)
      for (std::size_t b = 0; b < n; ++b)
        for (std::size_t k = 0; k < n; ++k) {
          // Σ_j α^b(S^{-1}(h3) e_j h1) α^a α^j ⊗ h2 k
          Sparse<S> out;
          for (const auto& [t, c] : D2[h]) {
            idx h1 = t / (n * n), h2 = (t / n) % n, h3 = t % n;
            Sparse<S> sh3 = H.antipode_inv[h3];
            Sparse<S> h2k = H.mult[h2 * n + k];
            for (std::size_t j = 0; j < n; ++j) {
              S w = coef(mul(H, mul(H, sh3, basis_elem<S>(j)), basis_elem<S>(h1)), b);
              if (scalar_traits<S>::is_zero(w)) continue;
              axpy(out, c * w, tensor(Hs.mult[a * n + j], h2k, n));
            }
          }
          canon(out);
          D.mult[(a * n + h) * N + (b * n + k)] = out;
        }
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t h = 0; h < n; ++h) {
      const idx i = a * n + h;
      // Δ(α⊗h) = α2⊗h1 ⊗ α1⊗h2
      Sparse<S> c;
      for (const auto& [xy, u] : Hs.comult[a])
        for (const auto& [pq, v] : H.comult[h]) {
          idx a1 = xy / n, a2 = xy % n, h1 = pq / n, h2 = pq % n;
          c.emplace_back((a2 * n + h1) * N + (a1 * n + h2), u * v);
        }
      D.comult[i] = c;
      D.counit[i] = Hs.counit[a] * H.counit[h];
      // S(α⊗h) = Σ_j α(h3 e_j S^{-1}(h1)) S^{-1}(α^j) ⊗ S(h2)
      Sparse<S> s;
      for (const auto& [t, w] : D2[h]) {
        idx h1 = t / (n * n), h2 = (t / n) % n, h3 = t % n;
        for (std::size_t j = 0; j < n; ++j) {
          S x = coef(mul(H, mul(H, basis_elem<S>(h3), basis_elem<S>(j)), H.antipode_inv[h1]), a);
          if (scalar_traits<S>::is_zero(x)) continue;
          axpy(s, w * x, tensor(Hs.antipode_inv[j], H.antipode[h2], n));
        }
      }
      D.antipode[i] = s;
    }
  D.unit = tensor(Hs.unit, H.unit, n);
  Sparse<S> R;
  for (std::size_t i = 0; i < n; ++i) {
    Sparse<S> x = tensor(Hs.unit, basis_elem<S>(i), n);      // ε⊗a_i
    Sparse<S> y = tensor(basis_elem<S>(i), H.unit, n);       // α_i⊗1
    axpy(R, S(1), tensor(x, y, N));
  }
  D.R = R;
  finalize(D);
  return D;
}

// D(H)* = H⊗H*, basis index h*n + a. Pairs with D(H) index a*n + h by equal index.
template <class S>
HopfAlgebra<S> drinfeld_double_dual(const HopfAlgebra<S>& H) {
  if (H.antipode_inv.empty()) throw StructureError(H.name + ": antipode not invertible");
  const std::size_t n = H.n, N = n * n;
  const HopfAlgebra<S> Hs = dual(H);
  HopfAlgebra<S> D;
  D.name = "D(" + H.name + ")*";
  D.n = N;
  for (std::size_t h = 0; h < n; ++h)
    for (std::size_t a = 0; a < n; ++a) D.basis.push_back(H.basis[h] + "⊗" + Hs.basis[a]);
  D.mult.resize(N * N);
  D.comult.resize(N);
  D.antipode.resize(N);
  D.counit.resize(N);
  for (std::size_t h = 0; h < n; ++h)
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t k = 0; k < n; ++k)
        for (std::size_t b = 0; b < n; ++b)
          D.mult[(h * n + a) * N + (k * n + b)] = tensor(H.mult[k * n + h], Hs.mult[a * n + b], n);
  for (std::size_t h = 0; h < n; ++h)
    for (std::size_t a = 0; a < n; ++a) {
      const idx I = h * n + a;
      // Σ_ij h1 ⊗ α^i a1 α^j ⊗ S(e_j) h2 e_i ⊗ a2
      Sparse<S> c;
      for (const auto& [pq, u] : H.comult[h]) {
        idx h1 = pq / n, h2 = pq % n;
        for (const auto& [xy, v] : Hs.comult[a]) {
          idx a1 = xy / n, a2 = xy % n;
          for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
              Sparse<S> mid = mul(Hs, mul(Hs, basis_elem<S>(i), basis_elem<S>(a1)), basis_elem<S>(j));
              if (mid.empty()) continue;
              Sparse<S> rgt = mul(H, mul(H, H.antipode[j], basis_elem<S>(h2)), basis_elem<S>(i));
              if (rgt.empty()) continue;
              Sparse<S> first = tensor(basis_elem<S>(h1), mid, n);
              Sparse<S> second = tensor(rgt, basis_elem<S>(a2), n);
              axpy(c, u * v, tensor(first, second, N));
            }
        }
      }
      D.comult[I] = c;
      D.counit[I] = H.counit[h] * Hs.counit[a];
      // S(h⊗α) = Σ_ij e_i S^{-1}(h) e_j ⊗ S^{-1}(α^j) S(α) α^i
      Sparse<S> s;
      Sparse<S> Sh = H.antipode_inv[h];
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          Sparse<S> l = mul(H, mul(H, basis_elem<S>(i), Sh), basis_elem<S>(j));
          Sparse<S> r = mul(Hs, mul(Hs, Hs.antipode_inv[j], Hs.antipode[a]), basis_elem<S>(i));
          axpy(s, S(1), tensor(l, r, n));
        }
      D.antipode[I] = s;
    }
  D.unit = tensor(H.unit, Hs.unit, n);
  finalize(D);
  return D;
}

// ---------------------------------------------------------------- twists

template <class S>
struct Twist {
  Sparse<S> F, Finv;  // over n*n
  Sparse<S> Q, Qinv;  // Q = F1 S(F2), Q^{-1} = S(F^{-1}_1) F^{-1}_2
};

// Inverse of x in A^{⊗k} by a dense solve of L_x y = 1.
template <class S>
std::optional<Sparse<S>> invert_element(const Algebra<S>& A, std::size_t k, const Sparse<S>& x) {
  const idx N = ipow(A.n, k);
  if (N > 4096) throw CapacityError("invert_element: dimension " + std::to_string(N));
  Dense<S> L = Dense<S>::Constant(Eigen::Index(N), Eigen::Index(N), S(0));
  for (idx j = 0; j < N; ++j)
    for (const auto& [i, c] : mul_k(A, k, x, unit_vec<S>(j))) L(Eigen::Index(i), Eigen::Index(j)) += c;
  Dense<S> aug(L.rows(), L.cols() + 1);
  aug.leftCols(L.cols()) = L;
  aug.col(L.cols()) = to_dense(unit_k(A, k), N);
  auto piv = rref(aug, scalar_traits<S>::exact ? 0.0 : 1e-11, Eigen::Index(N));
  if (piv.size() != N) return std::nullopt;
  DVec<S> y = aug.col(Eigen::Index(N));
  return to_sparse<S>(y);
}

template <class S>
AxiomReport twist_check(const HopfAlgebra<S>& H, const Sparse<S>& F, const std::optional<std::type_identity_t<Sparse<S>>>& Finv = std::nullopt,
                        double tol = kDefaultTol) {
  AxiomReport rep;
  rep.algebra = H.name;
  const std::size_t n = H.n;
  auto ef = [&](idx d) { return H.counit[d]; };
  {
    detail::Tracker t("counit normalization", tol);
    t.cmp(contract_leg(F, n, 2, 0, ef), H.unit, "(ε⊗id)F");
    t.cmp(contract_leg(F, n, 2, 1, ef), H.unit, "(id⊗ε)F");
    rep.checks.push_back(t.done());
  }
  {
    detail::Tracker t("cocycle", tol);
    auto cf = [&](idx d) -> const Sparse<S>& { return H.comult[d]; };
    Sparse<S> F12 = tensor(F, H.unit, n), F23 = tensor(H.unit, F, n * n);
    Sparse<S> l = mul_k(H, 3, F12, split_leg(F, n, 2, 0, cf));
    Sparse<S> r = mul_k(H, 3, F23, split_leg(F, n, 2, 1, cf));
    t.cmp(l, r, "F12(Δ⊗id)F vs F23(id⊗Δ)F");
    rep.checks.push_back(t.done());
  }
  {
    detail::Tracker t("invertible", tol);
    std::optional<Sparse<S>> inv = Finv;
    if (!inv) inv = invert_element<S>(H, 2, F);
    if (!inv) {
      t.c.max_deviation = 1;
      t.c.detail = "F is singular";
    } else {
      t.cmp(mul_k(H, 2, F, *inv), unit_k(H, 2), "F F^-1");
      t.cmp(mul_k(H, 2, *inv, F), unit_k(H, 2), "F^-1 F");
    }
    rep.checks.push_back(t.done());
  }
  return rep;
}

template <class S>
Twist<S> make_twist(const HopfAlgebra<S>& H, const Sparse<S>& F, std::optional<std::type_identity_t<Sparse<S>>> Finv = std::nullopt,
                    double tol = kDefaultTol) {
  Sparse<S> f = F;
  canon(f);
  if (!Finv) Finv = invert_element<S>(H, 2, f);
  if (!Finv) throw TwistError(H.name + ": twist is not invertible");
  auto rep = twist_check(H, f, Finv, tol);
  if (!rep.ok()) {
    std::string why;
    for (const auto& c : rep.checks)
      if (!c.pass) why += c.axiom + " (dev " + std::to_string(c.max_deviation) + ") ";
    throw TwistError(H.name + ": " + why);
  }
  Twist<S> T;
  T.F = f;
  T.Finv = *Finv;
  canon(T.Finv);
  const std::size_t n = H.n;
  for (const auto& [ij, c] : T.F) axpy(T.Q, c, mul(H, basis_elem<S>(ij / n), H.antipode[ij % n]));
  for (const auto& [ij, c] : T.Finv) axpy(T.Qinv, c, mul(H, H.antipode[ij / n], basis_elem<S>(ij % n)));
  canon(T.Q);
  canon(T.Qinv);
  return T;
}

template <class S>
Twist<S> trivial_twist(const HopfAlgebra<S>& H) {
  Sparse<S> one = tensor(H.unit, H.unit, H.n);
  return make_twist(H, one, one);
}

// H_F: same algebra, Δ_F = F Δ F^{-1}, S_F = Q S Q^{-1}, R^F = F21 R F^{-1}.
template <class S>
HopfAlgebra<S> twist_hopf(const HopfAlgebra<S>& H, const Twist<S>& T) {
  const std::size_t n = H.n;
  HopfAlgebra<S> G = H;
  G.name = H.name + "_F";
  for (std::size_t i = 0; i < n; ++i) {
    G.comult[i] = mul_k(H, 2, mul_k(H, 2, T.F, H.comult[i]), T.Finv);
    G.antipode[i] = mul(H, mul(H, T.Q, H.antipode[i]), T.Qinv);
  }
  if (H.R) G.R = mul_k(H, 2, mul_k(H, 2, permute_legs(T.F, n, {1, 0}), *H.R), T.Finv);
  finalize(G);
  return G;
}

// Projection (id⊗ε_K⊗id⊗ε_K)F of a twist on H⊗K onto H⊗H (left = true) or K⊗K.
template <class S>
Sparse<S> project_twist(const HopfAlgebra<S>& H, const HopfAlgebra<S>& K, const Sparse<S>& F, bool left) {
  const idx nh = H.n, nk = K.n, n = nh * nk;
  Sparse<S> out;
  for (const auto& [ij, c] : F) {
    idx x = ij / n, y = ij % n;
    idx hx = x / nk, kx = x % nk, hy = y / nk, ky = y % nk;
    if (left) {
      S w = c * K.counit[kx] * K.counit[ky];
      if (!scalar_traits<S>::is_zero(w)) out.emplace_back(hx * nh + hy, w);
    } else {
      S w = c * H.counit[hx] * H.counit[hy];
      if (!scalar_traits<S>::is_zero(w)) out.emplace_back(kx * nk + ky, w);
    }
  }
  canon(out);
  return out;
}

// ---------------------------------------------------------------- factorizable example

template <class S>
struct TransparentTwist {
  HopfAlgebra<S> KK;       // K⊗K with R^{(-2)}⊗R^{(1)}⊗R^{(-1)}⊗R^{(2)}
  Twist<S> twist;          // on K⊗K
  HopfAlgebra<S> KK_F;     // (K⊗K)_F with the twisted R-matrix
  std::vector<Sparse<S>> phi;  // φ on the D(K) basis, values in K⊗K
};

// F = 1⊗R2⊗R1⊗1 in (K⊗K)⊗(K⊗K).
template <class S>
std::pair<Sparse<S>, Sparse<S>> transparent_twist_element(const HopfAlgebra<S>& K) {
  if (!K.R) throw StructureError(K.name + ": not quasitriangular");
  const idx n = K.n;
  auto place = [&](const Sparse<S>& r) {
    Sparse<S> out;
    for (const auto& [pq, c] : r) {
      idx p = pq / n, q = pq % n;
      for (const auto& [u, a] : K.unit)
        for (const auto& [v, b] : K.unit) out.emplace_back(((u * n + q) * n + p) * n + v, c * a * b);
    }
    canon(out);
    return out;
  };
  return {place(*K.R), place(r_inverse(K))};
}

// φ: D(K) -> (K⊗K)_F, α⊗h ↦ ⟨α2,R2⟩⟨α1,R3⟩ S(R1) h1 ⊗ R4 h2
template <class S>
std::vector<Sparse<S>> factorizable_phi(const HopfAlgebra<S>& K, const HopfAlgebra<S>& KK) {
  const idx n = K.n;
  const Sparse<S>& R = *K.R;
  std::vector<Sparse<S>> coeff(n);  // coeff[a] = Σ r_pq r_uv (e_u e_q)_a  S(e_p)⊗e_v
  for (const auto& [pq, r1] : R)
    for (const auto& [uv, r2] : R) {
      idx p = pq / n, q = pq % n, u = uv / n, v = uv % n;
      Sparse<S> sv = tensor(K.antipode[p], basis_elem<S>(v), n);
      for (const auto& [a, m] : K.mult[u * n + q]) axpy(coeff[a], r1 * r2 * m, sv);
    }
  for (auto& c : coeff) canon(c);
  std::vector<Sparse<S>> phi(n * n);
  for (idx a = 0; a < n; ++a)
    for (idx h = 0; h < n; ++h) phi[a * n + h] = mul(KK, coeff[a], K.comult[h]);
  return phi;
}

template <class S>
TransparentTwist<S> transparent_twist(const HopfAlgebra<S>& K, double tol = kDefaultTol) {
  TransparentTwist<S> T;
  T.KK = tensor_hopf(K, K);
  const idx n = K.n, N = n * n;
  // K⊗K is quasitriangular with R^{(-2)}⊗R^{(1)}⊗R^{(-1)}⊗R^{(2)}; the twisted algebra carries F21 (that) F^{-1}.
  Sparse<S> Rinv = r_inverse(K);
  Sparse<S> RKK;
  for (const auto& [pq, s] : Rinv)
    for (const auto& [uv, r] : *K.R) {
      idx p = pq / n, q = pq % n, u = uv / n, v = uv % n;
      RKK.emplace_back((q * n + u) * N + (p * n + v), s * r);
    }
  canon(RKK);
  T.KK.R = RKK;
  auto [F, Finv] = transparent_twist_element(K);
  T.twist = make_twist(T.KK, F, Finv, tol);
  T.KK_F = twist_hopf(T.KK, T.twist);
  T.KK_F.name = "(" + K.name + "⊗" + K.name + ")_F";
  T.phi = factorizable_phi(K, T.KK);
  auto rk = rank_dense(as_matrix(T.phi, N), tol);
  if (rk != N) throw NotFactorizable(K.name + ": φ has rank " + std::to_string(rk) + " of " + std::to_string(N));
  return T;
}

// ---------------------------------------------------------------- Heisenberg doubles

enum class HeisenbergVariant { R, RBar };

// Algebra on H⊗H*, basis index h*n + a.
template <class S>
Algebra<S> heisenberg_double(const HopfAlgebra<S>& H, HeisenbergVariant v) {
  const std::size_t n = H.n, N = n * n;
  const HopfAlgebra<S> Hs = dual(H);
  Algebra<S> A;
  A.name = std::string(v == HeisenbergVariant::R ? "H_R(" : "Hbar_R(") + H.name + ")";
  A.n = N;
  for (std::size_t h = 0; h < n; ++h)
    for (std::size_t a = 0; a < n; ++a) A.basis.push_back(H.basis[h] + "⊗" + Hs.basis[a]);
  A.mult.resize(N * N);
  for (std::size_t h = 0; h < n; ++h)
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t k = 0; k < n; ++k)
        for (std::size_t b = 0; b < n; ++b) {
          Sparse<S> out;
          for (const auto& [ij, c] : Hs.comult[a]) {
            idx a1 = ij / n, a2 = ij % n;
            for (const auto& [uv, d] : H.comult[k]) {
              idx k1 = uv / n, k2 = uv % n;
              if (v == HeisenbergVariant::R) {
                // ⟨α1,k2⟩ h k1 ⊗ α2 β
                if (a1 != k2) continue;
                axpy(out, c * d, tensor(H.mult[h * n + k1], Hs.mult[a2 * n + b], n));
              } else {
                // ⟨α1,S(k2)⟩ k1 h ⊗ β α2
                S w(0);
                for (const auto& [s, e] : H.antipode[k2])
                  if (s == a1) w += e;
                if (scalar_traits<S>::is_zero(w)) continue;
                axpy(out, c * d * w, tensor(H.mult[k1 * n + h], Hs.mult[b * n + a2], n));
              }
            }
          }
          canon(out);
          A.mult[(h * n + a) * N + (k * n + b)] = out;
        }
  A.unit = tensor(H.unit, Hs.unit, n);
  return A;
}

// (h⊗α)▷m = ⟨α, m2⟩ h m1, as an n×n matrix per basis element of H⊗H*.
template <class S>
std::vector<Dense<S>> heisenberg_action(const HopfAlgebra<S>& H) {
  const std::size_t n = H.n;
  std::vector<Dense<S>> acts(n * n, Dense<S>::Constant(Eigen::Index(n), Eigen::Index(n), S(0)));
  for (std::size_t h = 0; h < n; ++h)
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t m = 0; m < n; ++m)
        for (const auto& [uv, c] : H.comult[m]) {
          if (uv % n != a) continue;
          for (const auto& [r, d] : H.mult[h * n + uv / n]) acts[h * n + a](Eigen::Index(r), Eigen::Index(m)) += c * d;
        }
  return acts;
}

template <class S>
AxiomReport check_algebra(const Algebra<S>& A, double tol = kDefaultTol) {
  AxiomReport rep;
  rep.algebra = A.name;
  const std::size_t n = A.n;
  detail::Tracker t("associativity", tol);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k)
        t.cmp(mul(A, A.mult[i * n + j], basis_elem<S>(k)), mul(A, basis_elem<S>(i), A.mult[j * n + k]),
              std::to_string(i) + "," + std::to_string(j) + "," + std::to_string(k));
  rep.checks.push_back(t.done());
  detail::Tracker u("unit", tol);
  for (std::size_t i = 0; i < n; ++i) {
    u.cmp(mul(A, A.unit, basis_elem<S>(i)), basis_elem<S>(i), std::to_string(i));
    u.cmp(mul(A, basis_elem<S>(i), A.unit), basis_elem<S>(i), std::to_string(i));
  }
  rep.checks.push_back(u.done());
  return rep;
}

// Product in A⊗B (different algebras per leg), index a*nB + b.
template <class S>
Sparse<S> mul_pair(const Algebra<S>& A, const Algebra<S>& B, const Sparse<S>& x, const Sparse<S>& y) {
  const idx nb = B.n;
  Sparse<S> out;
  for (const auto& [i, a] : x)
    for (const auto& [j, b] : y)
      for (const auto& [p, c] : A.mult[(i / nb) * A.n + j / nb])
        for (const auto& [q, d] : B.mult[(i % nb) * nb + j % nb]) out.emplace_back(p * nb + q, a * b * c * d);
  canon(out);
  return out;
}

// ---------------------------------------------------------------- coregular actions

// A acting on A* (dual basis, same indices as A).
template <class S>
Sparse<S> coreg_left(const HopfAlgebra<S>& A, const Sparse<S>& h, const Sparse<S>& alpha) {
  // h▷α = ⟨α2,h⟩α1 ; e_j▷α^i = Σ_k (e_k e_j)_i α^k
  Sparse<S> out;
  for (const auto& [j, c] : h)
    for (const auto& [i, d] : alpha)
      for (std::size_t k = 0; k < A.n; ++k)
        for (const auto& [r, m] : A.mult[k * A.n + j])
          if (r == i) out.emplace_back(k, c * d * m);
  canon(out);
  return out;
}

template <class S>
Sparse<S> coreg_right(const HopfAlgebra<S>& A, const Sparse<S>& alpha, const Sparse<S>& h) {
  // α◁h = ⟨α1,h⟩α2 ; α^i◁e_j = Σ_l (e_j e_l)_i α^l
  Sparse<S> out;
  for (const auto& [j, c] : h)
    for (const auto& [i, d] : alpha)
      for (std::size_t l = 0; l < A.n; ++l)
        for (const auto& [r, m] : A.mult[j * A.n + l])
          if (r == i) out.emplace_back(l, c * d * m);
  canon(out);
  return out;
}

// h▷'α = α◁S(h)
template <class S>
Sparse<S> coreg_left_s(const HopfAlgebra<S>& A, const Sparse<S>& h, const Sparse<S>& alpha) {
  return coreg_right(A, alpha, antipode(A, h));
}

// Precomputed matrices of the coregular actions, one per basis element of A.
template <class S>
struct CoregularActions {
  std::vector<Dense<S>> left, right, left_s;
};

template <class S>
CoregularActions<S> coregular_actions(const HopfAlgebra<S>& A) {
  CoregularActions<S> C;
  const std::size_t n = A.n;
  for (std::size_t j = 0; j < n; ++j) {
    Dense<S> L = Dense<S>::Constant(Eigen::Index(n), Eigen::Index(n), S(0)), R = L, Ls = L;
    for (std::size_t i = 0; i < n; ++i) {
      for (const auto& [k, c] : coreg_left(A, basis_elem<S>(j), basis_elem<S>(i))) L(Eigen::Index(k), Eigen::Index(i)) += c;
      for (const auto& [k, c] : coreg_right(A, basis_elem<S>(i), basis_elem<S>(j))) R(Eigen::Index(k), Eigen::Index(i)) += c;
      for (const auto& [k, c] : coreg_left_s(A, basis_elem<S>(j), basis_elem<S>(i))) Ls(Eigen::Index(k), Eigen::Index(i)) += c;
    }
    C.left.push_back(L);
    C.right.push_back(R);
    C.left_s.push_back(Ls);
  }
  return C;
}

// Printed Drinfel'd forms, D = D(H) acting on D* = D(H)* (indices as in drinfeld_double/_dual).
// (β⊗k)▷(h⊗α) = ⟨β2⊗k, h2⊗α2⟩ h1 ⊗ β3 α1 S(β1)
template <class S>
Sparse<S> drinfeld_left_printed(const HopfAlgebra<S>& H, idx beta_k, idx h_alpha) {
  const idx n = H.n;
  const HopfAlgebra<S> Hs = dual(H);
  idx beta = beta_k / n, k = beta_k % n, h = h_alpha / n, alpha = h_alpha % n;
  Sparse<S> b3 = iterated_comul(Hs, basis_elem<S>(beta), 3);
  Sparse<S> out;
  for (const auto& [t, c] : b3) {
    idx b1 = t / (n * n), b2 = (t / n) % n, bb3 = t % n;
    for (const auto& [pq, d] : H.comult[h]) {
      idx h1 = pq / n, h2 = pq % n;
      if (b2 != h2) continue;  // ⟨β2, h2⟩
      for (const auto& [xy, e] : Hs.comult[alpha]) {
        idx a1 = xy / n, a2 = xy % n;
        if (a2 != k) continue;  // ⟨α2, k⟩
        Sparse<S> g = mul(Hs, mul(Hs, basis_elem<S>(bb3), basis_elem<S>(a1)), Hs.antipode[b1]);
        axpy(out, c * d * e, tensor(basis_elem<S>(h1), g, n));
      }
    }
  }
  canon(out);
  return out;
}

// (h⊗α)◁(β⊗k) = ⟨β⊗k2, h1⊗α1⟩ S(k3) h2 k1 ⊗ α2
template <class S>
Sparse<S> drinfeld_right_printed(const HopfAlgebra<S>& H, idx h_alpha, idx beta_k) {
  const idx n = H.n;
  const HopfAlgebra<S> Hs = dual(H);
  idx beta = beta_k / n, k = beta_k % n, h = h_alpha / n, alpha = h_alpha % n;
  Sparse<S> k3 = iterated_comul(H, basis_elem<S>(k), 3);
  Sparse<S> out;
  for (const auto& [t, c] : k3) {
    idx k1 = t / (n * n), k2 = (t / n) % n, kk3 = t % n;
    for (const auto& [pq, d] : H.comult[h]) {
      idx h1 = pq / n, h2 = pq % n;
      if (beta != h1) continue;
      for (const auto& [xy, e] : Hs.comult[alpha]) {
        idx a1 = xy / n, a2 = xy % n;
        if (a1 != k2) continue;
        Sparse<S> g = mul(H, mul(H, H.antipode[kk3], basis_elem<S>(h2)), basis_elem<S>(k1));
        axpy(out, c * d * e, tensor(g, basis_elem<S>(a2), n));
      }
    }
  }
  canon(out);
  return out;
}

// Cotwist relations of the Heisenberg doubles against D(H)* and the two
// algebra-map properties of Δ_{D(H)*}, on all basis pairs.
template <class S>
AxiomReport heisenberg_relations(const HopfAlgebra<S>& H, double tol = kDefaultTol) {
  AxiomReport rep;
  rep.algebra = H.name;
  const auto D = drinfeld_double(H);
  const auto Dd = drinfeld_double_dual(H);
  const auto HR = heisenberg_double(H, HeisenbergVariant::R);
  const auto HRb = heisenberg_double(H, HeisenbergVariant::RBar);
  const std::size_t N = D.n;
  const Sparse<S> R = *D.R, Rinv = r_inverse(D);
  auto act = [&](idx x, const Sparse<S>& a) { return coreg_left(D, unit_vec<S>(x), a); };
  detail::Tracker t1("H_R cotwist", tol), t2("Hbar_R cotwist", tol), t3("Δ into Hbar_R⊗H_R", tol),
      t4("Δ of opposite into H_R⊗Hbar_R", tol);
  for (idx a = 0; a < N; ++a)
    for (idx b = 0; b < N; ++b) {
      const auto ea = unit_vec<S>(a), eb = unit_vec<S>(b);
      Sparse<S> l1, l2;
      for (const auto& [xy, c] : R) axpy(l1, c, mul(Dd, act(xy % N, eb), act(xy / N, ea)));
      for (const auto& [xy, c] : Rinv) axpy(l2, c, mul(Dd, act(xy / N, ea), act(xy % N, eb)));
      canon(l1);
      canon(l2);
      const std::string where = std::to_string(a) + "," + std::to_string(b);
      t1.cmp(HR.mult[a * N + b], l1, where);
      t2.cmp(HRb.mult[a * N + b], l2, where);
      t3.cmp(comul(Dd, Dd.mult[a * N + b]), mul_pair(HRb, HR, Dd.comult[a], Dd.comult[b]), where);
      t4.cmp(comul(Dd, Dd.mult[b * N + a]), mul_pair(HR, HRb, Dd.comult[a], Dd.comult[b]), where);
    }
  rep.checks = {t1.done(), t2.done(), t3.done(), t4.done()};
  return rep;
}

}  // namespace kdm
