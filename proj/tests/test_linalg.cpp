#include "doctest.h"
#include "kdm/linalg.hpp"

#include <random>

using namespace kdm;

namespace {

Dense<cd> random_dense(std::mt19937_64& rng, int r, int c) {
  std::uniform_real_distribution<double> u(-1, 1);
  Dense<cd> m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = cd(u(rng), u(rng));
  return m;
}

DVec<cd> random_vec(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(-1, 1);
  DVec<cd> v(n);
  for (int i = 0; i < n; ++i) v(i) = cd(u(rng), u(rng));
  return v;
}

double inf_norm(const DVec<cd>& v) { return v.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_SUITE("linalg") {

TEST_CASE("identity and zero operators") {
  auto I = LinOp<cd>::identity("V", 3);
  auto Z = LinOp<cd>::zero("V", 3);
  Vec<cd> v{"V", DVec<cd>(3)};
  v.coeffs << cd(1, 2), cd(0, 0), cd(-3, 0.5);
  CHECK(inf_norm(kdm::apply(I, v).coeffs - v.coeffs) == 0.0);
  CHECK(inf_norm(kdm::apply(Z, v).coeffs) == 0.0);
  CHECK(op_equal(I, I));
  CHECK_FALSE(op_equal(I, Z));
}

TEST_CASE("apply rejects foreign vectors") {
  auto I = LinOp<cd>::identity("V", 3);
  Vec<cd> w{"W", DVec<cd>::Zero(3)};
  CHECK_THROWS_AS(kdm::apply(I, w), DomainError);
  Vec<cd> short_v{"V", DVec<cd>::Zero(2)};
  CHECK_THROWS_AS(kdm::apply(I, short_v), DomainError);
  CHECK_THROWS_AS(compose(I, LinOp<cd>::identity("W", 3)), DomainError);
}

TEST_CASE("composition matches dense product") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    Dense<cd> A = random_dense(rng, 4, 4), B = random_dense(rng, 4, 4);
    auto a = LinOp<cd>::from_dense("V", "V", A), b = LinOp<cd>::from_dense("V", "V", B);
    Vec<cd> v{"V", random_vec(rng, 4)};
    DVec<cd> oracle = A * (B * v.coeffs);
    CHECK(inf_norm(kdm::apply(compose(a, b), v).coeffs - oracle) < 1e-12);
    CHECK(inf_norm(kdm::apply(a, kdm::apply(b, v)).coeffs - oracle) < 1e-12);
    Dense<cd> prod = materialize(chain<cd>({a, b}));
    CHECK((prod - A * B).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("op_equal agrees with dense comparison") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 6; ++trial) {
    Dense<cd> A = random_dense(rng, 8, 8);
    Dense<cd> B = A;
    if (trial % 2) B(trial % 8, (3 * trial) % 8) += cd(1e-3, 0);
    auto a = LinOp<cd>::from_dense("V", "V", A), b = LinOp<cd>::from_dense("V", "V", B);
    bool oracle = (materialize(a) - materialize(b)).cwiseAbs().maxCoeff() <= 1e-9;
    CHECK(op_equal(a, b, 1e-9) == oracle);
    CHECK(oracle == (trial % 2 == 0));
  }
}

TEST_CASE("linearity on random vectors") {
  std::mt19937_64 rng(3);
  Dense<cd> A = random_dense(rng, 6, 6);
  auto a = LinOp<cd>::from_dense("V", "V", A);
  for (int k = 0; k < 10; ++k) {
    Vec<cd> v{"V", random_vec(rng, 6)}, w{"V", random_vec(rng, 6)};
    cd x(0.3, -1.1), y(2.0, 0.5);
    Vec<cd> s{"V", x * v.coeffs + y * w.coeffs};
    DVec<cd> lhs = kdm::apply(a, s).coeffs;
    DVec<cd> rhs = x * kdm::apply(a, v).coeffs + y * kdm::apply(a, w).coeffs;
    CHECK(inf_norm(lhs - rhs) < 1e-9);
  }
}

TEST_CASE("rank of simple operators") {
  CHECK(rank(LinOp<cd>::identity("V", 5)) == 5);
  CHECK(rank(LinOp<cd>::zero("V", 5)) == 0);
  // (1/2)(I + swap) on C^2 ⊗ C^2; the symmetric subspace has dimension 3
  Dense<cd> P = Dense<cd>::Zero(4, 4);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      P(i * 2 + j, i * 2 + j) += 0.5;
      P(j * 2 + i, i * 2 + j) += 0.5;
    }
  Eigen::SelfAdjointEigenSolver<Dense<cd>> es(P);
  int oracle = 0;
  for (int i = 0; i < 4; ++i) oracle += std::abs(es.eigenvalues()(i) - 1.0) < 1e-9;
  CHECK(oracle == 3);
  CHECK(rank(LinOp<cd>::from_dense("V", "V", P)) == 3);

  Dense<QQi> Pq = Dense<QQi>::Constant(4, 4, QQi(0));
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) Pq(i, j) = scalar_traits<QQi>::from_cd(P(i, j));
  CHECK(rank(LinOp<QQi>::from_dense("V", "V", Pq)) == 3);
}

TEST_CASE("rank is invariant under invertible composition") {
  std::mt19937_64 rng(17);
  Dense<cd> L = random_dense(rng, 6, 3), Rt = random_dense(rng, 3, 6);
  Dense<cd> M = L * Rt;  // rank 3
  auto m = LinOp<cd>::from_dense("V", "V", M);
  CHECK(rank(m) == 3);
  for (int k = 0; k < 3; ++k) {
    Dense<cd> G = random_dense(rng, 6, 6), H = random_dense(rng, 6, 6);
    auto g = LinOp<cd>::from_dense("V", "V", G), h = LinOp<cd>::from_dense("V", "V", H);
    CHECK(rank(chain<cd>({g, m, h})) == 3);
  }
}

TEST_CASE("rank respects the dense cutoff") {
  CHECK_THROWS_AS(rank(LinOp<cd>::identity("V", 20), kDefaultTol, 10), CapacityError);
}

TEST_CASE("solve_linear trivial systems") {
  auto I = LinOp<QQi>::identity("V", 2);
  Vec<QQi> z{"V", DVec<QQi>::Constant(2, QQi(0))};
  // x - x = 0
  auto zero_op = LinOp<QQi>::zero("V", 2);
  auto s1 = solve_linear<QQi>({{zero_op, z}});
  CHECK(s1.basis.size() == 2);
  CHECK_FALSE(s1.particular);
  auto s2 = solve_linear<QQi>({{I, z}});
  CHECK(s2.basis.empty());
  Vec<QQi> one{"V", DVec<QQi>::Constant(2, QQi(1))};
  CHECK_THROWS_AS(solve_linear<QQi>({{zero_op, one}}), NoSolution);
}

TEST_CASE("Haar system for the group algebra of Z2") {
  // basis e, g; left multiplication by g swaps the coordinates.
  Dense<QQi> Lg = Dense<QQi>::Constant(2, 2, QQi(0));
  Lg(1, 0) = QQi(1);
  Lg(0, 1) = QQi(1);
  Dense<QQi> shift = Lg - Dense<QQi>::Identity(2, 2);  // gλ = ε(g)λ
  Dense<QQi> eps(1, 2);
  eps << QQi(1), QQi(1);
  Vec<QQi> z{"V", DVec<QQi>::Constant(2, QQi(0))};
  Vec<QQi> one{"C", DVec<QQi>::Constant(1, QQi(1))};
  auto sol = solve_linear<QQi>({{LinOp<QQi>::from_dense("V", "V", shift), z},
                                {LinOp<QQi>::from_dense("V", "C", eps), one}});
  REQUIRE(sol.particular);
  CHECK(sol.basis.empty());
  // symbolic oracle: λ = a e + b g with b = a and a + b = 1
  for (int a2 = 0; a2 <= 4; ++a2)
    for (int b2 = 0; b2 <= 4; ++b2) {
      bool solves = a2 == b2 && a2 + b2 == 2;
      bool matches = (*sol.particular)(0) == QQi(rational(a2, 2)) && (*sol.particular)(1) == QQi(rational(b2, 2));
      CHECK(solves == matches);
    }
}

TEST_CASE("sampled comparison above the full cutoff") {
  auto I = LinOp<cd>::identity("V", 5000);
  auto c = op_compare(I, I, 1e-9, 4096, 64, 7);
  CHECK(c.sampled);
  CHECK(c.checked == 64);
  CHECK(c.equal);
}

}  // TEST_SUITE
