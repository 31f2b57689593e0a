#include "doctest.h"
#include "kdm/hopf.hpp"

#include <random>

using namespace kdm;

namespace {

template <class S>
bool tensors_equal(const HopfAlgebra<S>& A, const HopfAlgebra<S>& B, double tol = 1e-12) {
  if (A.n != B.n) return false;
  for (std::size_t i = 0; i < A.n * A.n; ++i)
    if (sparse_dist(A.mult[i], B.mult[i]) > tol) return false;
  for (std::size_t i = 0; i < A.n; ++i) {
    if (sparse_dist(A.comult[i], B.comult[i]) > tol) return false;
    if (sparse_dist(A.antipode[i], B.antipode[i]) > tol) return false;
    if (scalar_traits<S>::mag(A.counit[i] - B.counit[i]) > tol) return false;
  }
  return sparse_dist(A.unit, B.unit) <= tol;
}

template <class S>
S pair(const Sparse<S>& alpha, const Sparse<S>& h) {
  S r(0);
  for (const auto& [i, a] : alpha)
    for (const auto& [j, b] : h)
      if (i == j) r += a * b;
  return r;
}

Sparse<cd> random_elem(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(-1, 1);
  Sparse<cd> v;
  for (std::size_t i = 0; i < n; ++i) v.emplace_back(i, cd(u(rng), u(rng)));
  return v;
}

}  // namespace

TEST_SUITE("hopf") {

TEST_CASE("group algebra axioms, exact") {
  for (auto g : {"Z2", "Z4", "Z2xZ2", "S3"}) {
    auto H = named_group_algebra<QQi>(g);
    auto rep = check_hopf(H);
    CHECK_MESSAGE(rep.ok(), g);
    CHECK(rep.max_deviation() == 0.0);
    CHECK(antipode_involutive(H));
  }
}

TEST_CASE("corrupted antipode is located") {
  auto H = named_group_algebra<QQi>("Z2");
  H.antipode[1] = unit_vec<QQi>(0);
  auto rep = check_hopf(H);
  CHECK_FALSE(rep.ok());
  REQUIRE(rep.find("antipode"));
  CHECK_FALSE(rep.find("antipode")->pass);
  CHECK(rep.find("associativity")->pass);
}

TEST_CASE("dual of group algebras") {
  auto Z2 = named_group_algebra<QQi>("Z2");
  auto F = dual(Z2);
  // pointwise: δ_a δ_b = [a=b] δ_a
  CHECK(mul(F, unit_vec<QQi>(0), unit_vec<QQi>(1)).empty());
  CHECK(sparse_dist(mul(F, unit_vec<QQi>(1), unit_vec<QQi>(1)), unit_vec<QQi>(1)) == 0.0);
  CHECK(sparse_dist(F.unit, Sparse<QQi>{{0, QQi(1)}, {1, QQi(1)}}) == 0.0);

  auto S3 = named_group_algebra<QQi>("S3");
  auto CS3 = dual(S3);
  CHECK(check_hopf(CS3).ok());
  CHECK(tensors_equal(dual(CS3), S3));
}

TEST_CASE("dual pairing on random elements") {
  auto H = named_group_algebra<cd>("S3");
  auto D = drinfeld_double_dual(named_group_algebra<cd>("Z2"));  // a non-cocommutative case
  std::mt19937_64 rng(1);
  for (const HopfAlgebra<cd>* A : {&H, &D}) {
    auto Ad = dual(*A);
    for (int k = 0; k < 5; ++k) {
      auto a = random_elem(rng, A->n), b = random_elem(rng, A->n), h = random_elem(rng, A->n);
      cd lhs = pair(mul(Ad, a, b), h);
      cd rhs = pair(tensor(a, b, A->n), comul(*A, h));
      CHECK(std::abs(lhs - rhs) < 1e-10);
    }
  }
}

TEST_CASE("op and cop variants") {
  auto S3 = named_group_algebra<QQi>("S3");
  auto v = op_cop_variants(S3);
  CHECK(tensors_equal(opposite(v.op), S3));
  CHECK_FALSE(tensors_equal(v.op, S3));
  CHECK(check_hopf(v.op).ok());
  CHECK(check_hopf(v.cop).ok());
  CHECK(check_hopf(v.opcop).ok());
  auto Z2 = named_group_algebra<QQi>("Z2");
  CHECK(tensors_equal(opposite(Z2), Z2));
  auto D = drinfeld_double(named_group_algebra<QQi>("Z2"));
  auto dv = op_cop_variants(D);
  CHECK(check_hopf(dv.op).ok());
  CHECK(check_hopf(dv.cop).ok());
  CHECK(check_hopf(dv.opcop).ok());
}

TEST_CASE("tensor product Hopf algebra") {
  auto Z2 = named_group_algebra<QQi>("Z2");
  auto T = tensor_hopf(Z2, Z2);
  CHECK(T.n == 4);
  CHECK(sparse_dist(T.unit, tensor(Z2.unit, Z2.unit, 2)) == 0.0);
  CHECK(check_hopf(tensor_hopf(Z2, dual(Z2))).ok());
}

TEST_CASE("Haar integrals") {
  auto Z2 = named_group_algebra<QQi>("Z2");
  auto l = haar(Z2).element;
  CHECK(sparse_dist(l, Sparse<QQi>{{0, QQi(rational(1, 2))}, {1, QQi(rational(1, 2))}}) == 0.0);
  for (auto g : {"Z4", "Z2xZ2", "S3"}) {
    auto H = named_group_algebra<QQi>(g);
    Sparse<QQi> avg;
    for (std::size_t i = 0; i < H.n; ++i) avg.emplace_back(i, QQi(rational(1, long(H.n))));
    CHECK(sparse_dist(haar(H).element, avg) == 0.0);
    CHECK(sparse_dist(haar(dual(H)).element, H.unit) == 0.0);  // δ_e
  }
}

TEST_CASE("Drinfel'd double") {
  auto Z2 = named_group_algebra<QQi>("Z2");
  auto D = drinfeld_double(Z2);
  CHECK(D.n == 4);
  CHECK(sparse_dist(comul(D, D.unit), tensor(D.unit, D.unit, 4)) == 0.0);
  CHECK(counit(D, D.unit) == QQi(1));
  auto rep = check_hopf(D);
  CHECK(rep.ok());
  CHECK(rep.find("QYBE"));
  auto DS3 = drinfeld_double(named_group_algebra<QQi>("S3"));
  auto q = check_quasitriangular(DS3);
  CHECK(q.ok());
  CHECK(q.checks.size() == 5);
  CHECK(antipode_involutive(DS3));
}

TEST_CASE("dual of the double") {
  for (auto g : {"Z2", "S3"}) {
    auto H = named_group_algebra<QQi>(g);
    auto Dd = drinfeld_double_dual(H);
    CHECK(check_hopf(Dd).ok());
    CHECK(tensors_equal(Dd, dual(drinfeld_double(H))));
  }
  auto Z2 = named_group_algebra<QQi>("Z2");
  auto Dd = drinfeld_double_dual(Z2);
  // (g⊗δ_e)(g⊗δ_g) = g g ⊗ δ_e δ_g = 0 ; index h*n + a
  CHECK(mul(Dd, unit_vec<QQi>(1 * 2 + 0), unit_vec<QQi>(1 * 2 + 1)).empty());
  CHECK(sparse_dist(Dd.unit, tensor(Z2.unit, dual(Z2).unit, 2)) == 0.0);
}

TEST_CASE("twists") {
  auto D = drinfeld_double(named_group_algebra<QQi>("Z2"));
  auto one = tensor(D.unit, D.unit, D.n);
  CHECK(twist_check(D, one).ok());
  CHECK(twist_check(D, *D.R).ok());
  auto T1 = trivial_twist(D);
  CHECK(tensors_equal(twist_hopf(D, T1), D));

  auto TR = make_twist(D, *D.R, r_inverse(D));
  CHECK(sparse_dist(antipode(D, TR.Q), TR.Q) == 0.0);
  auto DF = twist_hopf(D, TR);
  CHECK(check_hopf(DF).ok());
  CHECK(sparse_dist(haar(DF).element, haar(D).element) == 0.0);
  CHECK(sparse_dist(haar(dual(DF)).element, haar(dual(D)).element) == 0.0);

  // projections of a twist on D⊗D
  auto tt = transparent_twist(D);
  auto FH = project_twist(D, D, tt.twist.F, true), FK = project_twist(D, D, tt.twist.F, false);
  CHECK(twist_check(D, FH).ok());
  CHECK(twist_check(D, FK).ok());

  Sparse<QQi> bad = scaled(one, QQi(2));
  CHECK_FALSE(twist_check(D, bad).ok());
  CHECK_THROWS_AS(make_twist(D, bad), TwistError);
}

TEST_CASE("transparent twist and factorizable isomorphism") {
  auto K = drinfeld_double(named_group_algebra<QQi>("Z2"));
  auto tt = transparent_twist(K);
  auto DK = drinfeld_double(K);
  REQUIRE(DK.n == 16);
  CHECK(rank_dense(as_matrix(tt.phi, 16)) == 16);
  // φ(1) = 1⊗1
  CHECK(sparse_dist(linmap(tt.phi, DK.unit), tt.KK.unit) == 0.0);
  auto rep = check_hopf(tt.KK_F);
  CHECK(rep.ok());
  double alg = 0, coalg = 0;
  for (idx x = 0; x < 16; ++x) {
    for (idx y = 0; y < 16; ++y)
      alg = std::max(alg, sparse_dist(linmap(tt.phi, DK.mult[x * 16 + y]), mul(tt.KK, tt.phi[x], tt.phi[y])));
    Sparse<QQi> l;
    for (const auto& [ab, c] : DK.comult[x]) axpy(l, c, tensor(tt.phi[ab / 16], tt.phi[ab % 16], 16));
    canon(l);
    coalg = std::max(coalg, sparse_dist(l, comul(tt.KK_F, tt.phi[x])));
  }
  CHECK(alg == 0.0);
  CHECK(coalg == 0.0);
  Sparse<QQi> rphi;
  for (const auto& [ab, c] : *DK.R) axpy(rphi, c, tensor(tt.phi[ab / 16], tt.phi[ab % 16], 16));
  canon(rphi);
  CHECK(sparse_dist(rphi, *tt.KK_F.R) == 0.0);
}

TEST_CASE("Heisenberg doubles") {
  auto H = named_group_algebra<QQi>("Z2");
  auto HR = heisenberg_double(H, HeisenbergVariant::R);
  auto HRb = heisenberg_double(H, HeisenbergVariant::RBar);
  CHECK(check_algebra(HR).ok());
  CHECK(check_algebra(HRb).ok());
  auto acts = heisenberg_action(H);
  Dense<QQi> unit_act = Dense<QQi>::Constant(2, 2, QQi(0));
  for (const auto& [i, c] : HR.unit) unit_act += c * acts[i];
  CHECK(unit_act == Dense<QQi>::Identity(2, 2));
  Dense<QQi> span(4, 4);
  for (int k = 0; k < 4; ++k) span.col(k) = acts[std::size_t(k)].reshaped();
  CHECK(rank_dense(span) == 4);
  // action is a representation of H_R
  for (idx x = 0; x < 4; ++x)
    for (idx y = 0; y < 4; ++y) {
      Dense<QQi> prod = Dense<QQi>::Constant(2, 2, QQi(0));
      for (const auto& [i, c] : HR.mult[x * 4 + y]) prod += c * acts[i];
      CHECK(prod == acts[x] * acts[y]);
    }
}

TEST_CASE("coregular actions") {
  auto D = drinfeld_double(named_group_algebra<QQi>("S3"));
  auto Dd = dual(D);
  const std::size_t n = D.n;
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<idx> pick(0, n - 1);
  for (int k = 0; k < 40; ++k) {
    idx h = pick(rng), g = pick(rng), a = pick(rng), b = pick(rng);
    auto eh = unit_vec<QQi>(h), eg = unit_vec<QQi>(g), ea = unit_vec<QQi>(a), eb = unit_vec<QQi>(b);
    CHECK(coreg_left(D, D.unit, ea) == ea);
    CHECK(coreg_right(D, ea, D.unit) == ea);
    CHECK(sparse_dist(coreg_left(D, D.mult[h * n + g], ea), coreg_left(D, eh, coreg_left(D, eg, ea))) == 0.0);
    CHECK(sparse_dist(coreg_right(D, ea, D.mult[h * n + g]), coreg_right(D, coreg_right(D, ea, eh), eg)) == 0.0);
    CHECK(sparse_dist(coreg_left_s(D, D.mult[h * n + g], ea), coreg_left_s(D, eh, coreg_left_s(D, eg, ea))) == 0.0);
    CHECK(sparse_dist(coreg_right(D, coreg_left(D, eh, ea), eg), coreg_left(D, eh, coreg_right(D, ea, eg))) == 0.0);
    // h▷(αβ) = (h1▷α)(h2▷β)
    Sparse<QQi> rhs;
    for (const auto& [pq, c] : D.comult[h])
      axpy(rhs, c, mul(Dd, coreg_left(D, unit_vec<QQi>(pq / n), ea), coreg_left(D, unit_vec<QQi>(pq % n), eb)));
    canon(rhs);
    CHECK(sparse_dist(coreg_left(D, eh, Dd.mult[a * n + b]), rhs) == 0.0);
  }
}

TEST_CASE("printed Drinfel'd forms of the coregular actions") {
  auto H = named_group_algebra<QQi>("Z2");
  auto D = drinfeld_double(H);
  for (idx x = 0; x < 4; ++x)
    for (idx m = 0; m < 4; ++m) {
      CHECK(sparse_dist(drinfeld_left_printed(H, x, m), coreg_left(D, unit_vec<QQi>(x), unit_vec<QQi>(m))) == 0.0);
      CHECK(sparse_dist(drinfeld_right_printed(H, m, x), coreg_right(D, unit_vec<QQi>(m), unit_vec<QQi>(x))) == 0.0);
    }
  auto S3 = named_group_algebra<cd>("S3");
  auto DS3 = drinfeld_double(S3);
  for (idx x = 0; x < 36; x += 5)
    for (idx m = 0; m < 36; m += 7) {
      CHECK(sparse_dist(drinfeld_left_printed(S3, x, m), coreg_left(DS3, unit_vec<cd>(x), unit_vec<cd>(m))) < 1e-12);
      CHECK(sparse_dist(drinfeld_right_printed(S3, m, x), coreg_right(DS3, unit_vec<cd>(m), unit_vec<cd>(x))) < 1e-12);
    }
}



TEST_CASE("Heisenberg cotwist relations") {
  auto rep = heisenberg_relations(named_group_algebra<QQi>("Z2"));
  for (const auto& c : rep.checks) CHECK_MESSAGE(c.pass, c.axiom, " dev ", c.max_deviation);
  auto rep3 = heisenberg_relations(named_group_algebra<cd>("S3"));
  for (const auto& c : rep3.checks) CHECK_MESSAGE(c.pass, c.axiom, " dev ", c.max_deviation);
}
}  // TEST_SUITE
