#include "doctest.h"
#include "kdm/model.hpp"

#include <random>

using namespace kdm;

namespace {

std::string model_path(const std::string& name) { return std::string(KDM_MODELS_DIR) + "/" + name + ".json"; }

std::shared_ptr<Model> load(const std::string& name) { return load_model(model_path(name)); }

Sparse<cd> random_elem(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> N;
  Sparse<cd> x;
  for (idx i = 0; i < n; ++i) x.emplace_back(i, cd(N(rng), N(rng)));
  return x;
}

double dist(const LinOp<cd>& a, const LinOp<cd>& b) { return op_compare(a, b).max_deviation; }

}  // namespace

TEST_SUITE("model") {

TEST_CASE("all fleet models load") {
  for (auto name : {"torus_z2", "torus_s3", "square_cell_z2", "boundary_strip_z2", "defect_square_z2_transparent",
                    "defect_square_z2z2_nontrivial"}) {
    INFO(name);
    auto M = load(name);
    CHECK(M->dim() <= 4096);
  }
}

TEST_CASE("torus protected dimension equals number of irreps of the double") {
  for (auto [name, expect] : {std::pair{"torus_z2", 4}, std::pair{"torus_s3", 8}}) {
    INFO(name);
    auto M = load(name);
    CHECK(M->protected_dim() == std::size_t(expect));
    CHECK(M->irreps(0).size() == std::size_t(expect));
  }
}

TEST_CASE("site action is a module over the double") {
  std::mt19937_64 rng(3);
  for (auto name : {"torus_s3", "square_cell_z2", "boundary_strip_z2", "defect_square_z2z2_nontrivial"}) {
    INFO(name);
    auto M = load(name);
    for (std::size_t s = 0; s < M->ribbon().num_sites(); ++s) {
      if (site_kind(M->graph(), s) == SiteKind::exterior) continue;
      INFO(M->ribbon().site_name(s));
      const auto& D = *M->bulk(M->site_bulk(s)).D;
      auto x = random_elem(D.n, rng), y = random_elem(D.n, rng);
      CHECK(dist(M->site_op(s, mul(D, x, y)), compose(M->site_op(s, x), M->site_op(s, y))) < 1e-8);
      CHECK(dist(M->site_op(s, D.unit), M->identity()) < 1e-9);
    }
  }
}

}  // TEST_SUITE
