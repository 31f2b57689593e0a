#include "doctest.h"
#include "kdm/rep.hpp"

#include <algorithm>

using namespace kdm;

namespace {

std::shared_ptr<const HopfAlgebra<cd>> group(const char* g) {
  return std::make_shared<const HopfAlgebra<cd>>(named_group_algebra<cd>(g));
}

std::vector<std::size_t> sorted(std::vector<std::size_t> v) {
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

TEST_SUITE("rep") {

TEST_CASE("module constructions") {
  auto S3 = group("S3");
  auto reg = regular_module(S3), triv = trivial_module(S3);
  CHECK(check_module(reg).ok());
  CHECK(check_module(triv).ok());
  // trivial ⊗ M has the same matrices as M
  auto tm = tensor_module(triv, reg);
  for (std::size_t a = 0; a < S3->n; ++a) CHECK((tm.action[a] - reg.action[a]).cwiseAbs().maxCoeff() < 1e-12);
  auto dd = dual_module(dual_module(reg));
  for (std::size_t a = 0; a < S3->n; ++a) CHECK((dd.action[a] - reg.action[a]).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(check_module(dual_module(reg)).ok());
  // characters multiply
  auto T = irreducibles(S3);
  for (const auto& M : T.irreps)
    for (const auto& N : T.irreps) {
      auto MN = tensor_module(M, N);
      CHECK(check_module(MN).ok());
      for (std::size_t a = 0; a < S3->n; ++a)
        CHECK(std::abs(MN.action[a].trace() - M.action[a].trace() * N.action[a].trace()) < 1e-9);
    }
  auto Z2 = group("Z2");
  CHECK_THROWS_AS(tensor_module(regular_module(Z2), reg), DomainError);
}

TEST_CASE("irreducible decompositions") {
  auto T2 = irreducibles(group("Z2"));
  CHECK(T2.dims() == std::vector<std::size_t>{1, 1});
  auto T3 = irreducibles(group("S3"));
  CHECK(T3.dims() == std::vector<std::size_t>{1, 1, 2});
  auto D2 = std::make_shared<const HopfAlgebra<cd>>(drinfeld_double(named_group_algebra<cd>("Z2")));
  CHECK(irreducibles(D2).dims() == std::vector<std::size_t>{1, 1, 1, 1});
  auto DS3 = std::make_shared<const HopfAlgebra<cd>>(drinfeld_double(named_group_algebra<cd>("S3")));
  auto TD = irreducibles(DS3);
  std::size_t sq = 0;
  for (auto d : TD.dims()) sq += d * d;
  CHECK(sq == 36);
  CHECK(TD.size() == 8);
  CHECK(sorted(irreducibles(DS3, 1234).dims()) == sorted(TD.dims()));
  for (std::size_t i = 0; i < TD.size(); ++i)
    for (std::size_t j = 0; j < TD.size(); ++j)
      CHECK(intertwiner_dim(TD.irreps[i], TD.irreps[j]) == (i == j ? 1u : 0u));
}

TEST_CASE("isotypic projectors") {
  auto S3 = group("S3");
  auto T = irreducibles(S3);
  auto reg = regular_module(S3);
  MatC sum = MatC::Zero(6, 6);
  std::vector<MatC> P;
  for (std::size_t i = 0; i < T.size(); ++i) P.push_back(materialize(isotypic_projector(reg, T, i)));
  for (std::size_t i = 0; i < T.size(); ++i) {
    sum += P[i];
    for (std::size_t j = 0; j < T.size(); ++j) {
      MatC expect = i == j ? P[i] : MatC::Zero(6, 6);
      CHECK((P[i] * P[j] - expect).cwiseAbs().maxCoeff() < 1e-9);
    }
    for (const auto& a : reg.action) CHECK((P[i] * a - a * P[i]).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(std::abs(P[i].trace().real() - double(T.irreps[i].dim * T.irreps[i].dim)) < 1e-9);
  }
  CHECK((sum - MatC::Identity(6, 6)).cwiseAbs().maxCoeff() < 1e-9);
  auto triv = trivial_module(S3);
  auto m = T.multiplicities(triv);
  for (std::size_t i = 0; i < T.size(); ++i)
    if (m[i] == 1) CHECK(std::abs(materialize(isotypic_projector(triv, T, i))(0, 0) - 1.0) < 1e-12);
}

TEST_CASE("twisted tensor coherence map") {
  auto D = std::make_shared<const HopfAlgebra<cd>>(drinfeld_double(named_group_algebra<cd>("Z2")));
  auto F = make_twist(*D, *D->R, r_inverse(*D));
  auto T = irreducibles(D);
  auto reg = regular_module(D);
  for (const auto& M : {T.irreps[1], reg})
    for (const auto& N : {T.irreps[2], T.irreps[3]}) {
      auto tw = twisted_tensor(M, N, F);
      CHECK(check_module(tw.module).ok());
      auto plain = tensor_module(M, N);
      for (std::size_t a = 0; a < D->n; ++a)
        CHECK((tw.coherence * tw.module.action[a] - plain.action[a] * tw.coherence).cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("Artin-Wedderburn blocks of the dual double") {
  auto Z2 = named_group_algebra<cd>("Z2");
  auto A = artin_wedderburn_dhdual(Z2);
  CHECK(A.block_bases.size() == 4);
  Eigen::Index tot = 0;
  for (const auto& b : A.block_bases) tot += b.cols();
  CHECK(tot == 4);
  auto S3 = named_group_algebra<cd>("S3");
  auto B = artin_wedderburn_dhdual(S3);
  auto D = drinfeld_double(S3);
  auto C = coregular_actions(D);
  tot = 0;
  for (std::size_t d = 0; d < B.block_bases.size(); ++d) {
    const auto& Bk = B.block_bases[d];
    tot += Bk.cols();
    CHECK(std::size_t(Bk.cols()) == B.irreps.irreps[d].dim * B.irreps.irreps[d].dim);
    for (std::size_t x = 0; x < D.n; ++x) {
      MatC l = C.left[x] * Bk, r = C.right[x] * Bk;
      CHECK((B.block_projectors[d] * l - l).cwiseAbs().maxCoeff() < 1e-9);
      CHECK((B.block_projectors[d] * r - r).cwiseAbs().maxCoeff() < 1e-9);
    }
    CHECK(B.block_of(Bk.col(0)) == int(d));
  }
  CHECK(tot == 36);
  CHECK(Eigen::FullPivLU<MatC>(B.change_of_basis).rank() == 36);
}

}  // TEST_SUITE
