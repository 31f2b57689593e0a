#pragma once

#include "kdm/graph.hpp"
#include "kdm/rep.hpp"

#include <Eigen/Sparse>

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

namespace kdm {

using SpMat = Eigen::SparseMatrix<cd>;
using HopfPtr = std::shared_ptr<const HopfAlgebra<cd>>;

// Algebraic data of one bulk region. D has basis a*n+h, Dd basis h*n+a.
struct BulkAlgebra {
  std::string id;
  HopfPtr H, D, Dd;
  Sparse<cd> lambda_D;    // Haar integral of D(H)
  Sparse<cd> integral_D;  // Haar integral of D(H)*
  Sparse<cd> integral_H;  // Haar integral of H*, on the dual basis
  std::size_t n() const { return H->n; }
};

// "trivial" | "transparent" | "r-matrix" | "r-matrix-left" | "r-matrix-right" | "explicit"
struct TwistSpec {
  std::string kind = "trivial";
  Sparse<cd> F;  // explicit terms, index i*N + j
};

struct LineTwist {
  TwistSpec spec;
  HopfPtr algebra;  // D(H_b) for a boundary, D(H_L)⊗D(H_R) for a defect
  Twist<cd> twist;
};

struct ModelSpec {
  std::string name;
  DefectGraph graph;
  std::map<std::string, HopfPtr> algebras;  // keyed by bulk id
  std::map<std::string, nlohmann::json> algebra_src;  // as written in the config
  std::map<std::string, TwistSpec> boundary_twists, defect_twists;
  nlohmann::json instances = nlohmann::json::object();  // pinned path instances for the checks
};

struct RemovalResult;

class Model {
 public:
  explicit Model(ModelSpec spec);

  const ModelSpec& spec() const { return spec_; }
  const std::string& name() const { return spec_.name; }
  const DefectGraph& graph() const { return spec_.graph; }
  const RibbonGraph& ribbon() const { return spec_.graph.graph; }
  const std::string& space() const { return space_; }
  std::size_t dim() const { return dim_; }
  std::size_t edge_dim(std::size_t e) const { return edim_[e]; }
  std::size_t stride(std::size_t e) const { return stride_[e]; }

  std::size_t num_bulks() const { return bulks_.size(); }
  const BulkAlgebra& bulk(std::size_t b) const { return bulks_.at(b); }
  const LineTwist& boundary_twist(std::size_t a) const { return boundary_twists_.at(a); }
  const LineTwist& defect_twist(std::size_t d) const { return defect_twists_.at(d); }
  bool transparent(std::size_t d) const;

  // bulk region of a site; DomainError on the exterior side of a boundary
  std::size_t site_bulk(std::size_t site) const;
  // trivial for bulk and general sites, F_a for boundary sites, projected F_d for defect sites
  const Twist<cd>& site_twist(std::size_t site) const;

  // ---- triangle operators and holonomies
  // local d_e×d_e matrix of Hol_{b,e^η}^β, columns sparse
  std::vector<Sparse<cd>> triangle_local(std::size_t b, const Letter& l, const Sparse<cd>& beta) const;
  LinOp<cd> triangle_op(std::size_t b, const Letter& l, const Sparse<cd>& beta) const;

  // composition order of the letters (leftmost applied last); `first_split`
  // forces the top-level split position
  std::vector<std::size_t> holonomy_order(const ThickPath& p, std::optional<std::size_t> first_split = {}) const;
  LinOp<cd> holonomy(std::size_t b, const ThickPath& p, const Sparse<cd>& beta) const;
  LinOp<cd> holonomy_with_order(std::size_t b, const ThickPath& p, const Sparse<cd>& beta,
                                const std::vector<std::size_t>& order) const;
  // PathError unless p is simple and permissible in b (vertex paths always allowed)
  void check_path(std::size_t b, const ThickPath& p) const;

  // ---- site actions
  LinOp<cd> vertex_op(std::size_t site, idx h) const;
  LinOp<cd> face_op(std::size_t site, idx a) const;
  // BA^x for x in D(H_b)
  LinOp<cd> site_op(std::size_t site, const Sparse<cd>& x) const;
  // BA_{d,(sL,sR)}^x for x in D(H_L)⊗D(H_R), pair k of defect d
  LinOp<cd> pair_op(std::size_t d, std::size_t k, const Sparse<cd>& x) const;
  const std::vector<DefectSitePair>& pairs(std::size_t d) const { return pairs_.at(d); }

  // ---- protected space and excitations
  LinOp<cd> site_projector(std::size_t site) const;
  LinOp<cd> protected_projector() const;
  std::size_t protected_dim() const;
  const IrrepTable& irreps(std::size_t b) const;
  LinOp<cd> excitation_projector(const std::vector<std::pair<std::size_t, Module>>& excitations) const;

  // ---- twisted holonomies and transport
  LinOp<cd> twisted_holonomy(std::size_t b, const ThickPath& p, const Sparse<cd>& beta) const;
  LinOp<cd> transport(const ThickPath& p) const;

  RemovalResult remove_transparent_defect(std::size_t d) const;

  // helpers shared with the checks
  Sparse<cd> apply_local(const Sparse<cd>& v, std::size_t e, const std::vector<Sparse<cd>>& cols) const;
  LinOp<cd> identity() const { return LinOp<cd>::identity(space_, dim_); }

 private:
  struct SiteCache {
    std::size_t bulk = 0;
    std::vector<LinOp<cd>> A, B;  // per H basis, per H* basis
  };

  enum class EdgeCase { plain, left, right, scalar };
  EdgeCase edge_case(std::size_t b, std::size_t e) const;
  std::vector<Sparse<cd>> basic_local(const BulkAlgebra& B, Dir d, idx J) const;
  const std::vector<Sparse<cd>>& cached_local(std::size_t b, const Letter& l, idx J) const;
  Sparse<cd> apply_holonomy(std::size_t b, const std::vector<Letter>& w, const std::vector<std::size_t>& order,
                            const Sparse<cd>& terms, std::size_t k, const Sparse<cd>& v) const;
  const SiteCache& site_cache(std::size_t site) const;
  // c · x ⊗ BA^y terms of F_σ^{-1} at an endpoint; x already acts inside D(H_b)
  struct EndTerm {
    cd c;
    Sparse<cd> x;
    LinOp<cd> op;
  };
  std::vector<EndTerm> end_terms(std::size_t b, std::size_t site, EndSide side) const;

  ModelSpec spec_;
  std::string space_;
  std::size_t dim_ = 1;
  std::vector<std::size_t> edim_, stride_;
  std::vector<BulkAlgebra> bulks_;
  std::vector<LineTwist> boundary_twists_, defect_twists_;
  std::vector<std::vector<DefectSitePair>> pairs_;
  std::vector<Twist<cd>> trivial_;  // per bulk
  std::vector<std::optional<Twist<cd>>> defect_site_twist_;  // per site
  std::vector<std::optional<std::size_t>> site_bulk_;
  std::vector<SiteKind> site_kind_;
  std::size_t materialize_cutoff_ = 65536;

  mutable std::map<std::tuple<std::size_t, std::size_t, int, bool, idx>, std::vector<Sparse<cd>>> local_cache_;
  mutable std::map<std::size_t, SiteCache> site_cache_;
  mutable std::map<std::size_t, IrrepTable> irreps_;
};

struct RemovalResult {
  std::shared_ptr<Model> model;
  LinOp<cd> map;                        // N -> N'
  std::vector<std::size_t> merged_site;  // per site pair of the removed defect, site of the new graph
};

// Operators backed by a sparse matrix.
LinOp<cd> sparse_op(const std::string& space, std::shared_ptr<const SpMat> m);
SpMat to_spmat(const LinOp<cd>& op);

// Model JSON; errors are ConfigError with a JSON pointer.
HopfPtr algebra_from_json(const nlohmann::json& j, const std::string& pointer);
ModelSpec model_spec_from_json(const nlohmann::json& j);
// parse and validate the JSON schema only
ModelSpec load_spec(const std::string& path);
std::shared_ptr<Model> load_model(const std::string& path);
nlohmann::json to_json(const ModelSpec& spec);

}  // namespace kdm
