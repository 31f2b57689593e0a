#pragma once

#include "kdm/hopf.hpp"

#include <unsupported/Eigen/KroneckerProduct>

#include <memory>
#include <random>

namespace kdm {

using MatC = Eigen::MatrixXcd;

// Left module: one carrier matrix per algebra basis element.
struct Module {
  std::shared_ptr<const HopfAlgebra<cd>> H;
  std::size_t dim = 0;
  std::vector<MatC> action;

  MatC rho(const Sparse<cd>& x) const {
    MatC m = MatC::Zero(Eigen::Index(dim), Eigen::Index(dim));
    for (const auto& [i, c] : x) m += c * action[i];
    return m;
  }
};

struct ModuleCheck {
  double unit_dev = 0, mult_dev = 0;
  bool ok(double tol = kDefaultTol) const { return unit_dev <= tol && mult_dev <= tol; }
};

inline ModuleCheck check_module(const Module& M) {
  ModuleCheck r;
  const std::size_t n = M.H->n;
  r.unit_dev = (M.rho(M.H->unit) - MatC::Identity(Eigen::Index(M.dim), Eigen::Index(M.dim))).cwiseAbs().maxCoeff();
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) {
      double d = (M.rho(M.H->mult[a * n + b]) - M.action[a] * M.action[b]).cwiseAbs().maxCoeff();
      r.mult_dev = std::max(r.mult_dev, d);
    }
  return r;
}

inline Module regular_module(std::shared_ptr<const HopfAlgebra<cd>> H) {
  Module M{H, H->n, std::vector<MatC>(H->n)};
  for (std::size_t a = 0; a < H->n; ++a) {
    MatC m = MatC::Zero(Eigen::Index(H->n), Eigen::Index(H->n));
    for (std::size_t j = 0; j < H->n; ++j)
      for (const auto& [i, c] : H->mult[a * H->n + j]) m(Eigen::Index(i), Eigen::Index(j)) += c;
    M.action[a] = m;
  }
  return M;
}

inline Module trivial_module(std::shared_ptr<const HopfAlgebra<cd>> H) {
  Module M{H, 1, {}};
  for (std::size_t a = 0; a < H->n; ++a) M.action.push_back(MatC::Constant(1, 1, H->counit[a]));
  return M;
}

inline void require_same_algebra(const Module& M, const Module& N) {
  if (M.H != N.H && M.H->name != N.H->name) throw DomainError("modules over different algebras");
}

// x ↦ Σ ρ_M(x1)⊗ρ_N(x2) over the coproduct of the algebra given.
inline Module tensor_over(std::shared_ptr<const HopfAlgebra<cd>> H, const Module& M, const Module& N) {
  Module T{H, M.dim * N.dim, {}};
  const std::size_t n = H->n;
  for (std::size_t a = 0; a < n; ++a) {
    MatC m = MatC::Zero(Eigen::Index(T.dim), Eigen::Index(T.dim));
    for (const auto& [ij, c] : H->comult[a])
      m += c * Eigen::kroneckerProduct(M.action[ij / n], N.action[ij % n]).eval();
    T.action.push_back(m);
  }
  return T;
}

inline Module tensor_module(const Module& M, const Module& N) {
  require_same_algebra(M, N);
  return tensor_over(M.H, M, N);
}

// α ↦ α(S(x)▷ ·)
inline Module dual_module(const Module& M) {
  Module D{M.H, M.dim, {}};
  for (std::size_t a = 0; a < M.H->n; ++a) D.action.push_back(M.rho(M.H->antipode[a]).transpose());
  return D;
}

// M⊗_F N as a module over H_F, plus the coherence map (F^{(-1)}▷m)⊗(F^{(-2)}▷n).
struct TwistedTensor {
  Module module;
  MatC coherence;
};

inline TwistedTensor twisted_tensor(const Module& M, const Module& N, const Twist<cd>& F) {
  require_same_algebra(M, N);
  auto HF = std::make_shared<const HopfAlgebra<cd>>(twist_hopf(*M.H, F));
  // the carriers are unchanged; M and N are H_F-modules with the same matrices
  Module MF = M, NF = N;
  MF.H = HF;
  NF.H = HF;
  TwistedTensor r{tensor_over(HF, MF, NF), MatC::Zero(Eigen::Index(M.dim * N.dim), Eigen::Index(M.dim * N.dim))};
  const std::size_t n = M.H->n;
  for (const auto& [ij, c] : F.Finv) r.coherence += c * Eigen::kroneckerProduct(M.action[ij / n], N.action[ij % n]).eval();
  return r;
}

// Basis of Hom_A(N, M) = {X : ρ_M(a) X = X ρ_N(a)} as vec(X) columns.
inline MatC intertwiners(const Module& M, const Module& N, double tol = 1e-8) {
  require_same_algebra(M, N);
  const Eigen::Index m = Eigen::Index(M.dim), k = Eigen::Index(N.dim);
  const Eigen::Index unknowns = m * k;
  MatC gram = MatC::Zero(unknowns, unknowns);
  for (std::size_t a = 0; a < M.H->n; ++a) {
    // vec(ρ_M X - X ρ_N) = (I⊗ρ_M - ρ_N^T⊗I) vec X
    MatC op = Eigen::kroneckerProduct(MatC::Identity(k, k), M.action[a]).eval() -
              Eigen::kroneckerProduct(N.action[a].transpose(), MatC::Identity(m, m)).eval();
    gram += op.adjoint() * op;
  }
  Eigen::SelfAdjointEigenSolver<MatC> es(gram);
  std::vector<Eigen::Index> null;
  for (Eigen::Index i = 0; i < unknowns; ++i)
    if (std::abs(es.eigenvalues()(i)) < tol) null.push_back(i);
  MatC basis(unknowns, Eigen::Index(null.size()));
  for (std::size_t c = 0; c < null.size(); ++c) basis.col(Eigen::Index(c)) = es.eigenvectors().col(null[c]);
  return basis;
}

inline std::size_t intertwiner_dim(const Module& M, const Module& N) { return std::size_t(intertwiners(M, N).cols()); }

struct IrrepTable {
  std::vector<Module> irreps;
  std::vector<Sparse<cd>> central_idempotents;  // e_i with ρ_M(e_i) the i-isotypic projector
  std::uint64_t seed = 0;
  int attempts = 0;

  std::size_t size() const { return irreps.size(); }
  std::vector<std::size_t> dims() const {
    std::vector<std::size_t> d;
    for (const auto& m : irreps) d.push_back(m.dim);
    return d;
  }
  std::vector<std::size_t> multiplicities(const Module& M) const {
    std::vector<std::size_t> r;
    for (const auto& V : irreps) r.push_back(intertwiner_dim(M, V));
    return r;
  }
};

namespace detail {

// Restriction of the regular action to the column span of W (orthonormal columns).
inline Module restrict(const Module& reg, const MatC& W) {
  Module S{reg.H, std::size_t(W.cols()), {}};
  for (const auto& a : reg.action) S.action.push_back(W.adjoint() * a * W);
  return S;
}

inline std::optional<IrrepTable> try_decompose(const Module& reg, std::uint64_t seed) {
  const auto& H = *reg.H;
  const Eigen::Index n = Eigen::Index(H.n);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  // The commutant of the left regular action is spanned by right multiplications.
  std::vector<MatC> right(H.n, MatC::Zero(n, n));
  for (std::size_t b = 0; b < H.n; ++b)
    for (std::size_t j = 0; j < H.n; ++j)
      for (const auto& [i, c] : H.mult[j * H.n + b]) right[b](Eigen::Index(i), Eigen::Index(j)) += c;
  MatC X = MatC::Zero(n, n);
  for (const auto& r : right) X += cd(g(rng), g(rng)) * r;
  MatC Y = X + X.adjoint();
  double comm = 0;
  for (const auto& a : reg.action) comm = std::max(comm, (Y * a - a * Y).cwiseAbs().maxCoeff());
  std::vector<MatC> spaces;
  constexpr double gap = 1e-6;
  if (comm < 1e-9) {
    Eigen::SelfAdjointEigenSolver<MatC> es(Y);
    const auto& ev = es.eigenvalues();
    for (Eigen::Index i = 0; i < n;) {
      Eigen::Index j = i + 1;
      while (j < n && ev(j) - ev(j - 1) < gap) ++j;
      spaces.push_back(es.eigenvectors().middleCols(i, j - i));
      i = j;
    }
  } else {
    // commutant not closed under adjoints: split a generic element instead
    Eigen::ComplexEigenSolver<MatC> es(X);
    std::vector<cd> vals;
    for (Eigen::Index i = 0; i < n; ++i) {
      cd v = es.eigenvalues()(i);
      bool seen = false;
      for (const auto& w : vals) seen = seen || std::abs(v - w) < gap;
      if (!seen) vals.push_back(v);
    }
    for (const auto& v : vals) {
      Eigen::JacobiSVD<MatC> svd(X - v * MatC::Identity(n, n), Eigen::ComputeFullV);
      Eigen::Index k = 0;
      for (Eigen::Index i = 0; i < n; ++i)
        if (svd.singularValues()(i) < 1e-7) ++k;
      if (k == 0) return std::nullopt;
      spaces.push_back(svd.matrixV().rightCols(k));
    }
  }
  Eigen::Index total = 0;
  for (const auto& W : spaces) total += W.cols();
  if (total != n) return std::nullopt;

  IrrepTable T;
  T.seed = seed;
  std::vector<MatC> iso_bases;  // per class, concatenated eigenspaces
  std::vector<std::size_t> copies;
  for (const auto& W : spaces) {
    MatC Q = Eigen::HouseholderQR<MatC>(W).householderQ() * MatC::Identity(n, W.cols());
    Module S = restrict(reg, Q);
    if (!check_module(S).ok(1e-7) || intertwiner_dim(S, S) != 1) return std::nullopt;
    bool placed = false;
    for (std::size_t c = 0; c < T.irreps.size() && !placed; ++c)
      if (T.irreps[c].dim == S.dim && intertwiner_dim(S, T.irreps[c]) == 1) {
        MatC cat(n, iso_bases[c].cols() + Q.cols());
        cat << iso_bases[c], Q;
        iso_bases[c] = cat;
        ++copies[c];
        placed = true;
      }
    if (!placed) {
      T.irreps.push_back(S);
      iso_bases.push_back(Q);
      copies.push_back(1);
    }
  }
  for (std::size_t c = 0; c < T.irreps.size(); ++c)
    if (copies[c] != T.irreps[c].dim) return std::nullopt;
  // 1 = Σ e_i with e_i in the i-isotypic ideal
  MatC B(n, n);
  Eigen::Index col = 0;
  for (const auto& b : iso_bases) {
    B.middleCols(col, b.cols()) = b;
    col += b.cols();
  }
  Eigen::VectorXcd c = B.fullPivLu().solve(to_dense(H.unit, H.n));
  col = 0;
  for (const auto& b : iso_bases) {
    Eigen::VectorXcd e = b * c.segment(col, b.cols());
    col += b.cols();
    Sparse<cd> es;
    for (Eigen::Index i = 0; i < n; ++i)
      if (std::abs(e(i)) > 1e-12) es.emplace_back(idx(i), e(i));
    T.central_idempotents.push_back(es);
  }
  return T;
}

}  // namespace detail

// Irreducible modules of a semisimple algebra from its left regular module.
inline IrrepTable irreducibles(std::shared_ptr<const HopfAlgebra<cd>> H, std::uint64_t seed = 7) {
  if (H->n > 256) throw CapacityError("irreducibles: algebra dimension " + std::to_string(H->n));
  Module reg = regular_module(H);
  for (int attempt = 0; attempt < 8; ++attempt) {
    auto t = detail::try_decompose(reg, seed + std::uint64_t(attempt));
    if (t) {
      t->attempts = attempt + 1;
      // canonical order: by dimension, then by the character on the basis
      std::vector<std::size_t> order(t->irreps.size());
      std::iota(order.begin(), order.end(), 0);
      auto key = [&](std::size_t i) {
        std::vector<double> k{double(t->irreps[i].dim)};
        for (const auto& a : t->irreps[i].action) {
          k.push_back(std::round(a.trace().real() * 1e6));
          k.push_back(std::round(a.trace().imag() * 1e6));
        }
        return k;
      };
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return key(a) < key(b); });
      IrrepTable s;
      s.seed = t->seed;
      s.attempts = t->attempts;
      for (auto i : order) {
        s.irreps.push_back(t->irreps[i]);
        s.central_idempotents.push_back(t->central_idempotents[i]);
      }
      return s;
    }
  }
  throw DecompositionError(H->name + ": no splitting after 8 seeds starting at " + std::to_string(seed));
}

// Projector onto the i-isotypic component of M.
inline LinOp<cd> isotypic_projector(const Module& M, const IrrepTable& T, std::size_t i) {
  if (i >= T.size()) throw DomainError("isotypic_projector: irrep index out of range");
  return LinOp<cd>::from_dense("M", "M", M.rho(T.central_idempotents[i]));
}

// D(H)* as a D(H)-bimodule through the coregular actions, split into d⊗d* blocks.
struct DualDecomposition {
  IrrepTable irreps;                  // of D(H)
  std::vector<MatC> block_bases;      // columns span block d
  MatC change_of_basis;               // concatenated block bases
  std::vector<MatC> block_projectors; // e_d ▷ (·)

  // index of the block containing x, or -1 if x is spread over several
  int block_of(const Eigen::VectorXcd& x, double tol = 1e-9) const {
    for (std::size_t d = 0; d < block_projectors.size(); ++d)
      if ((block_projectors[d] * x - x).cwiseAbs().maxCoeff() <= tol) return int(d);
    return -1;
  }
};

inline DualDecomposition artin_wedderburn_dhdual(const HopfAlgebra<cd>& H, std::uint64_t seed = 7) {
  auto D = std::make_shared<const HopfAlgebra<cd>>(drinfeld_double(H));
  DualDecomposition r;
  r.irreps = irreducibles(D, seed);
  const Eigen::Index N = Eigen::Index(D->n);
  auto C = coregular_actions(*D);
  r.change_of_basis = MatC(N, 0);
  for (const auto& e : r.irreps.central_idempotents) {
    MatC P = MatC::Zero(N, N);
    for (const auto& [i, c] : e) P += c * C.left[i];
    r.block_projectors.push_back(P);
    Eigen::JacobiSVD<MatC> svd(P, Eigen::ComputeThinU);
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < N; ++i)
      if (svd.singularValues()(i) > 1e-8) ++k;
    MatC Bk = svd.matrixU().leftCols(k);
    r.block_bases.push_back(Bk);
    MatC cat(N, r.change_of_basis.cols() + k);
    cat << r.change_of_basis, Bk;
    r.change_of_basis = cat;
  }
  return r;
}

}  // namespace kdm
