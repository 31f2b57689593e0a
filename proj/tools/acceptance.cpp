#include "kdm/checks.hpp"

#include <chrono>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>

using namespace kdm;

namespace {

const std::string kModels = KDM_MODELS_DIR;
const std::vector<std::string> kFleet{"Z2", "Z2xZ2", "Z4", "S3"};

std::string model_file(const std::string& name) { return kModels + "/" + name + ".json"; }

struct Verdict {
  bool ok = true;
  std::string note;
  void fail(const std::string& why) {
    ok = false;
    note += (note.empty() ? "" : "; ") + why;
  }
  void info(const std::string& s) { note += (note.empty() ? "" : "; ") + s; }
};

std::string fmt(double x) {
  std::ostringstream o;
  o << std::setprecision(3) << x;
  return o.str();
}

void require_axioms(Verdict& v, const std::string& what, const AxiomReport& r) {
  if (!r.ok() || r.max_deviation() > 1e-9) v.fail(what + " dev " + fmt(r.max_deviation()));
}

// every check of a suite passes; skipped ones are allowed only when `allow_skip`
void require_suite(Verdict& v, const std::string& model, const std::string& suite, bool allow_skip,
                   std::vector<CheckResult>* keep = nullptr) {
  auto rs = run_suite(load_spec(model_file(model)), suite, CheckOptions{});
  for (const auto& r : rs) {
    if (r.status == "fail") v.fail(model + " " + r.check_id + (r.detail.empty() ? "" : " (" + r.detail + ")"));
    if (r.status == "skipped" && !allow_skip) v.fail(model + " " + r.check_id + " skipped");
  }
  if (keep) keep->insert(keep->end(), rs.begin(), rs.end());
}

double integral_dev(const HopfAlgebra<cd>& A, const Sparse<cd>& l) {
  double d = std::abs(counit(A, l) - cd(1));
  for (idx i = 0; i < A.n; ++i) {
    auto e = unit_vec<cd>(i);
    d = std::max(d, sparse_dist(mul(A, e, l), scaled(l, A.counit[i])));
    d = std::max(d, sparse_dist(mul(A, l, e), scaled(l, A.counit[i])));
  }
  return d;
}

// twists carried by the fleet models, with their algebras
std::vector<std::pair<std::string, LineTwist>> fleet_twists() {
  std::vector<std::pair<std::string, LineTwist>> out;
  for (const auto* m : {"boundary_strip_z2", "defect_square_z2_transparent", "defect_square_z2z2_nontrivial"}) {
    auto M = load_model(model_file(m));
    for (std::size_t a = 0; a < M->graph().boundaries.size(); ++a)
      out.emplace_back(std::string(m) + "/" + M->graph().boundaries[a].id, M->boundary_twist(a));
    for (std::size_t d = 0; d < M->graph().defects.size(); ++d)
      out.emplace_back(std::string(m) + "/" + M->graph().defects[d].id, M->defect_twist(d));
  }
  return out;
}

Verdict hopf_fleet() {
  Verdict v;
  std::size_t n = 0;
  for (const auto& g : kFleet) {
    auto H = named_group_algebra<cd>(g);
    const std::vector<std::pair<std::string, HopfAlgebra<cd>>> variants{
        {g, H},
        {g + " dual", dual(H)},
        {g + " op", opposite(H)},
        {g + " cop", coopposite(H)},
        {g + " opcop", op_coop(H)},
        {"D(" + g + ")", drinfeld_double(H)},
        {"D(" + g + ")*", drinfeld_double_dual(H)}};
    for (const auto& [name, A] : variants) {
      require_axioms(v, name, check_hopf(A, 1e-9));
      ++n;
    }
  }
  for (const auto& [name, lt] : fleet_twists()) {
    require_axioms(v, name + " twisted", check_hopf(twist_hopf(*lt.algebra, lt.twist), 1e-9));
    ++n;
  }
  v.info(std::to_string(n) + " algebras");
  return v;
}

Verdict haar_fleet() {
  Verdict v;
  for (const auto& g : kFleet) {
    auto H = named_group_algebra<cd>(g);
    const double inv = 1.0 / double(H.n);
    // oracle: uniform average of group elements, and the delta function at the unit
    Sparse<cd> uniform, delta = H.unit;
    for (idx i = 0; i < H.n; ++i) uniform.emplace_back(i, cd(inv));
    const double d1 = sparse_dist(haar(H).element, uniform);
    const double d2 = sparse_dist(haar(dual(H)).element, delta);
    if (d1 > 1e-9) v.fail(g + " lambda dev " + fmt(d1));
    if (d2 > 1e-9) v.fail(g + " integral dev " + fmt(d2));
  }
  for (const auto& [name, lt] : fleet_twists()) {
    const auto& K = *lt.algebra;
    auto KF = twist_hopf(K, lt.twist);
    const double d = std::max(integral_dev(KF, haar(K).element), integral_dev(dual(KF), haar(dual(K)).element));
    if (d > 1e-9) v.fail(name + " twist invariance dev " + fmt(d));
  }
  return v;
}

Verdict quasitriangular() {
  Verdict v;
  for (const auto* g : {"Z2", "S3"})
    require_axioms(v, std::string("D(") + g + ")", check_quasitriangular(drinfeld_double(named_group_algebra<cd>(g)), 1e-9));
  auto M = load_model(model_file("defect_square_z2_transparent"));
  const auto& lt = M->defect_twist(0);
  require_axioms(v, "transparent twist", check_quasitriangular(twist_hopf(*lt.algebra, lt.twist), 1e-9));
  return v;
}

Verdict heisenberg() {
  Verdict v;
  auto H = named_group_algebra<cd>("Z2");
  require_axioms(v, "relations", heisenberg_relations(H, 1e-9));
  const auto acts = heisenberg_action(H);
  const Eigen::Index n = Eigen::Index(H.n);
  MatC span(n * n, Eigen::Index(acts.size()));
  for (std::size_t i = 0; i < acts.size(); ++i)
    span.col(Eigen::Index(i)) = Eigen::Map<const Eigen::VectorXcd>(acts[i].data(), n * n);
  Eigen::FullPivLU<MatC> lu(span);
  lu.setThreshold(1e-9);
  if (lu.rank() != n * n) v.fail("rank " + std::to_string(lu.rank()));
  v.info("rank " + std::to_string(lu.rank()));
  return v;
}

Verdict graph_layer() {
  Verdict v;
  // vertices, edges, faces
  const std::vector<std::tuple<std::string, std::size_t, std::size_t, std::size_t>> shape{
      {"torus_z2", 2, 4, 2},          {"torus_s3", 1, 2, 1},
      {"square_cell_z2", 4, 4, 2},    {"boundary_strip_z2", 5, 8, 5},
      {"defect_square_z2_transparent", 4, 6, 4}, {"defect_square_z2z2_nontrivial", 4, 6, 4}};
  for (const auto& [m, V, E, F] : shape) {
    auto spec = load_spec(model_file(m));
    const auto& g = spec.graph.graph;
    if (g.vertices().size() != V || g.edges().size() != E || g.faces().size() != F)
      v.fail(m + " has " + std::to_string(g.faces().size()) + " faces");
    if (g.thicken().size() != 4 * E) v.fail(m + " thickening");
    if (!validate_defect_graph(spec.graph).ok()) v.fail(m + " does not validate");
  }
  auto g = load_spec(model_file("square_cell_z2")).graph.graph;
  auto tau = parse_path(g, "e0^-L e0^t e1^-R");
  auto omega = parse_path(g, "e0^s e3^R e2^R");
  if (!is_simple(tau) || is_ribbon(tau)) v.fail("tau is not simple-not-ribbon");
  if (joints(tau, omega) != Joint::left) v.fail(std::string("(tau, omega) joint is ") + to_string(joints(tau, omega)));
  return v;
}

Verdict holonomy_lemma() {
  Verdict v;
  require_suite(v, "square_cell_z2", "holonomy-lemma", false);
  return v;
}

Verdict site_representations() {
  Verdict v;
  for (const auto* m : {"square_cell_z2", "boundary_strip_z2", "defect_square_z2_transparent",
                        "defect_square_z2z2_nontrivial"})
    require_suite(v, m, "site-actions", std::string(m).find("defect") == std::string::npos);
  return v;
}

Verdict protected_space() {
  Verdict v;
  for (const auto& [m, expect] : std::vector<std::pair<std::string, std::size_t>>{{"torus_z2", 4}, {"torus_s3", 8}}) {
    auto M = load_model(model_file(m));
    const std::size_t r = M->protected_dim(), irr = M->irreps(0).size();
    v.info(m + " rank " + std::to_string(r) + ", |Irr D(H)| " + std::to_string(irr));
    if (r != expect || irr != expect) v.fail(m + " expected " + std::to_string(expect));
  }
  return v;
}

Verdict transport() {
  Verdict v;
  std::vector<CheckResult> rs;
  for (const auto* m : {"boundary_strip_z2", "defect_square_z2_transparent"})
    for (const auto* s : {"fusion", "associativity", "braiding"})
      require_suite(v, m, s, std::string(m) != "boundary_strip_z2", &rs);
  std::string all;
  for (const auto& r : rs)
    if (r.status != "skipped") all += r.detail + ";";
  for (const auto* k : {"general site", "boundary site", "defect site", "bulk to line"})
    if (all.find(k) == std::string::npos) v.fail(std::string("no instance for ") + k);
  return v;
}

Verdict removal() {
  Verdict v;
  auto M = load_model(model_file("defect_square_z2_transparent"));
  Rng rng(7);
  CheckOptions opt;
  auto o = removal_intertwiner(*M, 0, opt, rng);
  if (o.precondition_failed || o.deviation > opt.tol) v.fail("intertwiner dev " + fmt(o.deviation));
  auto res = M->remove_transparent_defect(0);
  auto after = run_suite(res.model->spec(), "site-actions", opt);
  if (!all_passed(after)) v.fail("site actions after removal");
  for (const auto& g : kFleet) {
    const double d = haar_removal_deviation(named_group_algebra<cd>(g));
    if (d > 1e-9) v.fail("integral identity " + g + " dev " + fmt(d));
  }
  return v;
}

Verdict determinism() {
  Verdict v;
  for (const auto* m : {"square_cell_z2", "defect_square_z2_transparent"}) {
    auto spec = load_spec(model_file(m));
    CheckOptions opt;
    auto a = report_json(spec, "all", opt, run_suite(spec, "all", opt), false).dump();
    auto b = report_json(spec, "all", opt, run_suite(spec, "all", opt), false).dump();
    if (a != b) v.fail(std::string(m) + " reports differ");
  }
  return v;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"Hopf fleet axioms", hopf_fleet},
      {"Haar integrals and twist invariance", haar_fleet},
      {"quasitriangular doubles and twisted R-matrix", quasitriangular},
      {"Heisenberg double", heisenberg},
      {"graph layer", graph_layer},
      {"holonomy identities on square_cell_z2", holonomy_lemma},
      {"site representations", site_representations},
      {"protected space ranks", protected_space},
      {"fusion, associativity and braiding", transport},
      {"transparent defect removal", removal},
      {"deterministic reports", determinism}};
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v.fail(e.what());
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += !v.ok;
    std::cout << (v.ok ? "PASS" : "FAIL") << " " << std::setw(2) << i + 1 << " " << criteria[i].first << " ["
              << std::fixed << std::setprecision(2) << s << "s]" << std::defaultfloat;
    if (!v.note.empty()) std::cout << "  " << v.note;
    std::cout << "\n";
  }
  std::cout << criteria.size() - failed << "/" << criteria.size() << " criteria pass\n";
  return 0;
}
