#include "kdm/checks.hpp"

#include <doctest.h>

#include <fstream>

using namespace kdm;

namespace {

std::shared_ptr<Model> load(const std::string& name) {
  return load_model(std::string(KDM_MODELS_DIR) + "/" + name + ".json");
}

const CheckResult& find(const std::vector<CheckResult>& rs, const std::string& id) {
  for (const auto& r : rs)
    if (r.check_id == id) return r;
  FAIL("missing check " << id);
  return rs.front();
}

// Z2 index of the group unit and of the generator
std::pair<idx, idx> z2_elements(const HopfAlgebra<cd>& H) {
  const idx e = H.unit.front().first;
  return {e, 1 - e};
}

}  // namespace

TEST_SUITE("checks") {

TEST_CASE("toric code vertex and face operators on the square cell") {
  auto M = load("square_cell_z2");
  const auto& g = M->ribbon();
  const auto& H = *M->bulk(0).H;
  const auto [e, x] = z2_elements(H);
  const std::size_t E = g.edges().size();
  auto bit = [&](idx state, std::size_t edge) { return (state / M->stride(edge)) % 2 == x; };

  // A^g at v0 flips the two edges at v0, here e0 and e3
  const std::size_t s = g.parse_site("v0:0");
  auto A = M->vertex_op(s, x);
  for (idx st = 0; st < M->dim(); ++st) {
    idx want = st;
    for (std::size_t edge : {g.edge_index("e0"), g.edge_index("e3")}) {
      const idx cur = (st / M->stride(edge)) % 2;
      const idx flipped = cur == e ? x : e;
      want = want - cur * M->stride(edge) + flipped * M->stride(edge);
    }
    auto col = A.column(st);
    REQUIRE(col.size() == 1);
    CHECK(col[0].first == want);
    CHECK(std::abs(col[0].second - cd(1)) < 1e-12);
  }
  // B^{δ_e} keeps exactly the states of even parity around the square
  auto B = M->face_op(s, e);
  for (idx st = 0; st < M->dim(); ++st) {
    int parity = 0;
    for (std::size_t edge = 0; edge < E; ++edge) parity ^= bit(st, edge);
    auto col = B.column(st);
    if (parity == 0) {
      REQUIRE(col.size() == 1);
      CHECK(col[0].first == st);
    } else {
      CHECK(col.empty());
    }
  }
}

TEST_CASE("protected space of a sphere is one dimensional") {
  for (const auto* m : {"square_cell_z2"}) CHECK(load(m)->protected_dim() == 1);
}

TEST_CASE("integral identity gives h over dim H with normalized integrals") {
  // λ = (1/|G|) Σ g, ∫ = δ_e, Δλ = (1/|G|) Σ g⊗g, so the identity returns h/|G|
  for (const auto* name : {"Z2", "Z2xZ2", "Z4", "S3"}) {
    auto H = named_group_algebra<cd>(name);
    CHECK(haar_removal_deviation(H) == doctest::Approx(1.0 - 1.0 / double(H.n)).epsilon(1e-12));
  }
}

TEST_CASE("hypotheses of the holonomy identities are enforced") {
  auto M = load("square_cell_z2");
  const auto& g = M->ribbon();
  CheckOptions opt;
  Rng rng(1);
  // a right-left path is not a left-right path
  auto o = holonomy_identity(*M, "left-right", {parse_path(g, "e0^-s")}, opt, rng);
  CHECK(o.precondition_failed);
  // both paths start at v0:0, so this is no middle joint
  auto a = parse_path(g, "e1^-s e0^L e0^s"), b = parse_path(g, "e1^L e0^L e0^s");
  CHECK_FALSE(middle_joint(a.word, b.word));
  CHECK(holonomy_identity(*M, "middle-joint", {a, b}, opt, rng).precondition_failed);
  // parallel routes along one edge are no left joint
  auto c = parse_path(g, "e0^R e0^-s"), d = parse_path(g, "e0^-t e0^L e3^t");
  CHECK(holonomy_identity(*M, "left-joint", {c, d}, opt, rng).precondition_failed);
  CHECK_THROWS_AS(holonomy_identity(*M, "no-such", {c}, opt, rng), DomainError);
}

TEST_CASE("braiding check is sensitive to the order of the R-matrix legs") {
  auto M = load("defect_square_z2z2_nontrivial");
  const auto& g = M->ribbon();
  auto rho = parse_path(g, "e1^-L i0^s");
  CheckOptions opt;
  Rng rng(1);
  CHECK(braiding_identity(*M, rho, opt, rng).deviation <= 1e-9);

  // the same right-hand side with the legs exchanged
  const std::size_t s1 = rho.start, s2 = rho.end;
  const auto& D = *M->bulk(M->site_bulk(s1)).D;
  const auto& F = M->site_twist(s2);
  Sparse<cd> RF = mul_k(D, 2, mul_k(D, 2, permute_legs(F.F, D.n, {1, 0}), *D.R), F.Finv);
  auto T = M->transport(rho);
  std::vector<std::pair<cd, LinOp<cd>>> terms;
  for (const auto& [ij, c] : RF)
    terms.emplace_back(c, chain<cd>({T, M->site_op(s1, unit_vec<cd>(ij % D.n)), M->site_op(s2, unit_vec<cd>(ij / D.n))}));
  auto lhs = M->transport(compose(g, inverse(face_path(g, s2)), rho));
  CHECK(op_compare(lhs, linear_combination(terms, M->space(), M->dim()), 1e-9).max_deviation > 0.1);
}

TEST_CASE("pinned instances of the fleet pass") {
  CheckOptions opt;
  for (const auto* m : {"square_cell_z2", "torus_s3"}) {
    auto rs = run_suite(load(m)->spec(), "holonomy-lemma", opt);
    for (const auto& r : rs) CHECK_MESSAGE(r.status != "fail", m << " " << r.check_id << " " << r.detail);
  }
  auto rs = run_suite(load("square_cell_z2")->spec(), "holonomy-lemma", opt);
  for (const auto& r : rs) CHECK_MESSAGE(r.status == "pass", r.check_id);
  for (const auto* s : {"fusion", "associativity", "braiding"}) {
    auto t = run_suite(load("boundary_strip_z2")->spec(), s, opt);
    CHECK(all_passed(t));
    for (const auto& r : t) CHECK(r.status == "pass");
  }
}

TEST_CASE("removal map is onto the model without the defect") {
  auto M = load("defect_square_z2_transparent");
  auto res = M->remove_transparent_defect(0);
  CHECK(res.model->dim() == 16);
  CHECK(res.model->graph().defects.empty());
  MatC R(Eigen::Index(res.model->dim()), Eigen::Index(M->dim()));
  for (idx c = 0; c < M->dim(); ++c) R.col(Eigen::Index(c)) = to_dense(res.map.column(c), res.model->dim());
  CHECK(std::size_t(Eigen::FullPivLU<MatC>(R).rank()) == res.model->dim());
  CheckOptions opt;
  Rng rng(3);
  auto o = removal_intertwiner(*M, 0, opt, rng);
  CHECK_FALSE(o.precondition_failed);
  CHECK(o.deviation <= 1e-9);
  CHECK_FALSE(o.sampled);
}

TEST_CASE("corrupted algebra fails hopf-axioms with the axiom named") {
  auto spec = load("torus_z2")->spec();
  auto H = std::make_shared<HopfAlgebra<cd>>(*spec.algebras.begin()->second);
  H->antipode[0] = scaled(H->antipode[0], cd(2));
  H->name = "broken";
  spec.algebras.begin()->second = H;
  auto rs = run_suite(spec, "hopf-axioms", CheckOptions{});
  const auto& r = find(rs, "hopf.broken.axioms");
  CHECK(r.status == "fail");
  CHECK(r.detail.find("antipode") != std::string::npos);
  CHECK(find(rs, "hopf.broken.dual").status == "skipped");
}

TEST_CASE("suite registry and reports") {
  CHECK(suite_names().back() == "all");
  CHECK_FALSE(suite_needs_model("graph"));
  CHECK(suite_needs_model("braiding"));
  auto spec = load("torus_z2")->spec();
  CHECK_THROWS_AS(run_suite(spec, "nope", CheckOptions{}), UsageError);

  CheckOptions opt;
  auto rs = run_suite(spec, "all", opt);
  CHECK(all_passed(rs));
  CHECK(std::is_sorted(rs.begin(), rs.end(),
                       [](const CheckResult& a, const CheckResult& b) { return a.check_id < b.check_id; }));
  std::set<std::string> ids;
  for (const auto& r : rs) {
    CHECK(ids.insert(r.check_id).second);
    CHECK_FALSE(r.anchor.empty());
  }
  CHECK(find(rs, "protected.rank").detail.find("rank 4") != std::string::npos);
  auto j1 = report_json(spec, "all", opt, rs, false).dump();
  auto j2 = report_json(spec, "all", opt, run_suite(spec, "all", opt), false).dump();
  CHECK(j1 == j2);
  auto j = nlohmann::json::parse(j1);
  CHECK(j["schema"] == kReportSchema);
  CHECK(j["checks"].size() == rs.size());
}

TEST_CASE("pinned instance errors are config errors") {
  auto spec = load("square_cell_z2")->spec();
  spec.instances = {{"reversal", {{"e9^R"}}}};
  Model M(spec);
  CHECK_THROWS_AS(pinned_instances(M, "reversal"), ConfigError);
  CHECK(pinned_instances(M, "left-right").empty());
}

}
