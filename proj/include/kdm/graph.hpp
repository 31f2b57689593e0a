#pragma once

#include "kdm/errors.hpp"

#include "json.hpp"

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace kdm {

// ---------------------------------------------------------------- ribbon graphs

enum class Dir : std::uint8_t { s, t, L, R };

// A letter e^{±dir} of the thickened graph.
struct Letter {
  std::size_t edge = 0;
  Dir dir = Dir::s;
  bool inv = false;
  bool operator==(const Letter&) const = default;
  Letter inverse() const { return {edge, dir, !inv}; }
};

struct EdgeEnd {
  std::size_t edge = 0;
  bool out = true;  // starting end of the edge
};

struct GVertex {
  std::string id;
  std::vector<EdgeEnd> order;  // counterclockwise
  std::size_t cilium = 0;      // index of the first end in the linear order
};

struct GEdge {
  std::string id;
  std::size_t src = 0, dst = 0;
  std::size_t src_pos = 0, dst_pos = 0;  // positions in the cyclic orders
};

// A site is a corner of a vertex polygon: corner k sits between positions k and k+1.
struct SiteInfo {
  std::size_t vertex = 0, corner = 0, face = 0;
  std::string id;
};

struct Face {
  std::vector<std::size_t> sites;                       // corners in face-path traversal order
  std::vector<std::pair<std::size_t, bool>> walk;       // (edge, forward), maximally-left order
};

struct ThickEdge {
  Letter letter;
  std::size_t src = 0, dst = 0;
};

class RibbonGraph {
 public:
  struct VertexSpec {
    std::string id;
    std::vector<std::string> cyclic_order;  // "<edge>_out" / "<edge>_in"
    std::size_t cilium = 0;
  };
  struct EdgeSpec {
    std::string id, src, dst;
  };

  RibbonGraph() = default;
  RibbonGraph(const std::vector<VertexSpec>& vs, const std::vector<EdgeSpec>& es);

  const std::vector<GVertex>& vertices() const { return vertices_; }
  const std::vector<GEdge>& edges() const { return edges_; }
  const std::vector<Face>& faces() const { return faces_; }
  const std::vector<SiteInfo>& sites() const { return sites_; }
  std::size_t num_sites() const { return sites_.size(); }
  std::size_t degree(std::size_t v) const { return vertices_[v].order.size(); }

  std::size_t vertex_index(const std::string& id) const;
  std::size_t edge_index(const std::string& id) const;
  std::optional<std::size_t> find_edge(const std::string& id) const;

  // corner k (taken mod degree) of vertex v
  std::size_t corner(std::size_t v, long k) const;
  // "v:k" or bare "v" (the ciliated corner)
  std::size_t parse_site(const std::string& s) const;
  const std::string& site_name(std::size_t s) const { return sites_[s].id; }

  std::size_t letter_src(const Letter& l) const;
  std::size_t letter_dst(const Letter& l) const;

  // corners on either side of an edge at its two ends
  std::size_t s_left(std::size_t e) const { return corner(edges_[e].src, long(edges_[e].src_pos)); }
  std::size_t s_right(std::size_t e) const { return corner(edges_[e].src, long(edges_[e].src_pos) - 1); }
  std::size_t t_left(std::size_t e) const { return corner(edges_[e].dst, long(edges_[e].dst_pos) - 1); }
  std::size_t t_right(std::size_t e) const { return corner(edges_[e].dst, long(edges_[e].dst_pos)); }

  std::vector<ThickEdge> thicken() const;
  bool disjoint(std::size_t s1, std::size_t s2) const;

 private:
  std::vector<GVertex> vertices_;
  std::vector<GEdge> edges_;
  std::vector<std::size_t> offset_;
  std::vector<SiteInfo> sites_;
  std::vector<Face> faces_;
  std::map<std::string, std::size_t> vid_, eid_;
};

// ---------------------------------------------------------------- paths

// Word in written order: word.front() is traversed last, word.back() first.
struct ThickPath {
  std::vector<Letter> word;
  std::size_t start = 0, end = 0;
  bool empty() const { return word.empty(); }
  std::size_t size() const { return word.size(); }
};

// Parse "e3^-L e2^t e1^R". Shorthand letters d, dbar, d', dbar' (with optional '-') expand
// to their two-letter forms. Throws PathError for unknown edges or non-composable words.
ThickPath parse_path(const RibbonGraph& g, const std::string& text);
ThickPath make_path(const RibbonGraph& g, std::vector<Letter> word);
std::string to_string(const RibbonGraph& g, const ThickPath& p);
std::string to_string(const RibbonGraph& g, const Letter& l);

std::vector<Letter> reduce(std::vector<Letter> w);
ThickPath inverse(const ThickPath& p);
// a∘b: b is traversed first. Throws PathError unless end(b) == start(a).
ThickPath compose(const RibbonGraph& g, const ThickPath& a, const ThickPath& b);
// sub-word [i, j) in written order as a path
ThickPath subpath(const RibbonGraph& g, const ThickPath& p, std::size_t i, std::size_t j);
bool is_composable(const RibbonGraph& g, const std::vector<Letter>& w);

enum class EndSide { left, right };
enum class SideType { left_right, right_left, left_left, right_right };
EndSide start_side(const ThickPath& p);
EndSide end_side(const ThickPath& p);
SideType side_type(const ThickPath& p);
const char* to_string(SideType t);

bool is_ribbon(const ThickPath& p);
bool non_crossing(const std::vector<Letter>& a, const std::vector<Letter>& b);
bool left_joint(const std::vector<Letter>& a, const std::vector<Letter>& b);
bool right_joint(const std::vector<Letter>& a, const std::vector<Letter>& b);
bool middle_joint(const std::vector<Letter>& a, const std::vector<Letter>& b);
bool is_simple(const ThickPath& p);
// x∘y equals one of e^{±d}, e^{±dbar}, e^{±d'}, e^{±dbar'}
bool is_d_pair(const Letter& x, const Letter& y);

enum class Joint { none_cross, left, right, middle, crossing };
Joint joints(const ThickPath& a, const ThickPath& b);
const char* to_string(Joint j);

ThickPath vertex_path(const RibbonGraph& g, std::size_t site);
ThickPath face_path(const RibbonGraph& g, std::size_t site);

// ---------------------------------------------------------------- defects and boundaries

enum class EdgeKind { bulk, boundary, defect };

struct EdgeRegion {
  EdgeKind kind = EdgeKind::bulk;
  std::size_t index = 0;  // bulk, boundary or defect index
};

struct BulkRegion {
  std::string id;
  std::vector<std::size_t> edges;
};

struct BoundaryLine {
  std::string id;
  std::vector<std::size_t> edges;
  std::size_t bulk = 0;
};

struct DefectLine {
  std::string id;
  std::vector<std::size_t> edges;
  std::size_t left = 0, right = 0;
};

struct ConditionResult {
  std::string name;
  bool pass = true;
  std::string detail;
};

struct ValidationReport {
  std::vector<ConditionResult> conditions;
  bool ok() const;
  const ConditionResult* find(const std::string& name) const;
};

struct DefectSitePair {
  std::size_t vertex = 0, left = 0, right = 0;
};

enum class SiteKind { bulk, boundary, defect, general, exterior };

struct DefectGraph {
  RibbonGraph graph;
  std::vector<BulkRegion> bulks;
  std::vector<BoundaryLine> boundaries;
  std::vector<DefectLine> defects;

  // first region listing the edge; absent if unassigned
  std::optional<EdgeRegion> edge_region(std::size_t e) const;
  std::size_t bulk_index(const std::string& id) const;
  std::size_t defect_index(const std::string& id) const;
  std::size_t boundary_index(const std::string& id) const;
  bool is_line_edge(std::size_t e) const;
};

ValidationReport validate_defect_graph(const DefectGraph& G);
std::vector<DefectSitePair> defect_site_pairs(const DefectGraph& G, std::size_t d);
std::vector<std::size_t> boundary_sites(const DefectGraph& G, std::size_t a);
// bulk region a site lies in; nullopt on the exterior side of a boundary
std::optional<std::size_t> site_region(const DefectGraph& G, std::size_t site);
SiteKind site_kind(const DefectGraph& G, std::size_t site);
const char* to_string(SiteKind k);
// no e^{±s}, e^{±t} over defect or boundary edges
bool is_permissible(const DefectGraph& G, const ThickPath& p);

struct PathClass {
  bool ribbon = false, simple = false;
  std::optional<SideType> side;
  std::optional<bool> permissible;
};
PathClass classify_path(const RibbonGraph& g, const ThickPath& p, const DefectGraph* G = nullptr);

// Graph JSON; errors are ConfigError carrying a JSON pointer.
DefectGraph defect_graph_from_json(const nlohmann::json& j, const std::string& pointer = "");
nlohmann::json to_json(const DefectGraph& G);

}  // namespace kdm
