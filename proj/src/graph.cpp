#include "kdm/graph.hpp"

#include <algorithm>
#include <array>
#include <set>
#include <sstream>

namespace kdm {

namespace {

long mod(long a, long n) { return ((a % n) + n) % n; }

const char* dir_name(Dir d) {
  switch (d) {
    case Dir::s: return "s";
    case Dir::t: return "t";
    case Dir::L: return "L";
    case Dir::R: return "R";
  }
  return "?";
}

// η ∈ {-s, t, -R, L}
bool leftish(const Letter& l) {
  switch (l.dir) {
    case Dir::s: return l.inv;
    case Dir::t: return !l.inv;
    case Dir::R: return l.inv;
    case Dir::L: return !l.inv;
  }
  return false;
}

bool is_side(Dir d) { return d == Dir::L || d == Dir::R; }

unsigned bit(Dir d) { return 1u << unsigned(d); }

unsigned partner(unsigned m) {
  if (m == bit(Dir::s)) return bit(Dir::t);
  if (m == bit(Dir::t)) return bit(Dir::s);
  if (m == bit(Dir::L)) return bit(Dir::R);
  if (m == bit(Dir::R)) return bit(Dir::L);
  return 0;
}

std::vector<Letter> invert_word(const std::vector<Letter>& w) {
  std::vector<Letter> r;
  r.reserve(w.size());
  for (auto it = w.rbegin(); it != w.rend(); ++it) r.push_back(it->inverse());
  return r;
}

// two-letter words of the shorthand letters, written order
std::array<std::vector<Letter>, 8> d_words(std::size_t e) {
  std::vector<Letter> d{{e, Dir::t, false}, {e, Dir::R, false}};
  std::vector<Letter> db{{e, Dir::t, true}, {e, Dir::L, false}};
  std::vector<Letter> dp{{e, Dir::L, false}, {e, Dir::s, false}};
  std::vector<Letter> dbp{{e, Dir::R, false}, {e, Dir::s, true}};
  return {d, invert_word(d), db, invert_word(db), dp, invert_word(dp), dbp, invert_word(dbp)};
}

// symbolic corners of an edge: 0 = sL, 1 = sR, 2 = tL, 3 = tR
int local_src(const Letter& l) {
  static const int src[4] = {1, 3, 0, 1}, dst[4] = {0, 2, 2, 3};
  return l.inv ? dst[int(l.dir)] : src[int(l.dir)];
}
int local_dst(const Letter& l) { return local_src(l.inverse()); }

std::vector<Letter> slice(const std::vector<Letter>& w, std::size_t i, std::size_t j) {
  return std::vector<Letter>(w.begin() + long(i), w.begin() + long(j));
}

bool word_ribbon(const std::vector<Letter>& w) {
  std::map<std::size_t, unsigned> seen;
  for (const auto& l : w) {
    unsigned& m = seen[l.edge];
    if (m & bit(l.dir)) return false;
    m |= bit(l.dir);
  }
  for (const auto& [e, m] : seen) {
    bool side = m & (bit(Dir::L) | bit(Dir::R)), end = m & (bit(Dir::s) | bit(Dir::t));
    if (side && end) return false;
  }
  return true;
}

}  // namespace

// ---------------------------------------------------------------- RibbonGraph

RibbonGraph::RibbonGraph(const std::vector<VertexSpec>& vs, const std::vector<EdgeSpec>& es) {
  for (std::size_t v = 0; v < vs.size(); ++v) {
    if (!vid_.emplace(vs[v].id, v).second) throw ConfigError("duplicate vertex id '" + vs[v].id + "'");
    vertices_.push_back({vs[v].id, {}, vs[v].cilium});
  }
  for (std::size_t e = 0; e < es.size(); ++e) {
    if (!eid_.emplace(es[e].id, e).second) throw ConfigError("duplicate edge id '" + es[e].id + "'");
    auto s = vid_.find(es[e].src), d = vid_.find(es[e].dst);
    if (s == vid_.end() || d == vid_.end()) throw ConfigError("edge '" + es[e].id + "' has an unknown endpoint");
    edges_.push_back({es[e].id, s->second, d->second, 0, 0});
  }
  std::vector<int> placed(2 * edges_.size(), 0);
  for (std::size_t v = 0; v < vs.size(); ++v) {
    const auto& co = vs[v].cyclic_order;
    if (co.empty()) throw ConfigError("vertex '" + vs[v].id + "' has an empty cyclic order");
    for (std::size_t p = 0; p < co.size(); ++p) {
      const std::string& name = co[p];
      auto us = name.rfind('_');
      if (us == std::string::npos) throw ConfigError("malformed edge end '" + name + "' at vertex '" + vs[v].id + "'");
      std::string eid = name.substr(0, us), tag = name.substr(us + 1);
      if (tag != "out" && tag != "in") throw ConfigError("malformed edge end '" + name + "' at vertex '" + vs[v].id + "'");
      auto it = eid_.find(eid);
      if (it == eid_.end()) throw ConfigError("edge end '" + name + "' names an unknown edge");
      std::size_t e = it->second;
      bool out = tag == "out";
      if ((out ? edges_[e].src : edges_[e].dst) != v)
        throw ConfigError("edge end '" + name + "' listed at vertex '" + vs[v].id + "' which is not its endpoint");
      if (placed[2 * e + (out ? 0 : 1)]++) throw ConfigError("edge end '" + name + "' appears twice");
      (out ? edges_[e].src_pos : edges_[e].dst_pos) = p;
      vertices_[v].order.push_back({e, out});
    }
    if (vs[v].cilium >= co.size())
      throw ConfigError("cilium index of vertex '" + vs[v].id + "' is out of range");
  }
  for (std::size_t i = 0; i < placed.size(); ++i)
    if (!placed[i])
      throw ConfigError("edge end '" + edges_[i / 2].id + (i % 2 ? "_in" : "_out") + "' missing from its cyclic order");

  offset_.resize(vertices_.size());
  for (std::size_t v = 0; v < vertices_.size(); ++v) {
    offset_[v] = sites_.size();
    for (std::size_t k = 0; k < degree(v); ++k)
      sites_.push_back({v, k, 0, vertices_[v].id + ":" + std::to_string(k)});
  }

  // faces: corner k leaves through position k+1 and lands on the far end's corner
  std::vector<bool> seen(sites_.size(), false);
  for (std::size_t s0 = 0; s0 < sites_.size(); ++s0) {
    if (seen[s0]) continue;
    Face f;
    std::vector<std::pair<std::size_t, bool>> fwd;
    std::size_t s = s0;
    do {
      seen[s] = true;
      sites_[s].face = faces_.size();
      f.sites.push_back(s);
      const auto& V = vertices_[sites_[s].vertex];
      const EdgeEnd& c = V.order[(sites_[s].corner + 1) % V.order.size()];
      const GEdge& E = edges_[c.edge];
      fwd.emplace_back(c.edge, c.out);
      s = c.out ? corner(E.dst, long(E.dst_pos)) : corner(E.src, long(E.src_pos));
    } while (s != s0);
    for (auto it = fwd.rbegin(); it != fwd.rend(); ++it) f.walk.emplace_back(it->first, !it->second);
    faces_.push_back(std::move(f));
  }
}

std::size_t RibbonGraph::vertex_index(const std::string& id) const {
  auto it = vid_.find(id);
  if (it == vid_.end()) throw DomainError("unknown vertex '" + id + "'");
  return it->second;
}

std::size_t RibbonGraph::edge_index(const std::string& id) const {
  auto it = eid_.find(id);
  if (it == eid_.end()) throw DomainError("unknown edge '" + id + "'");
  return it->second;
}

std::optional<std::size_t> RibbonGraph::find_edge(const std::string& id) const {
  auto it = eid_.find(id);
  if (it == eid_.end()) return std::nullopt;
  return it->second;
}

std::size_t RibbonGraph::corner(std::size_t v, long k) const {
  return offset_[v] + std::size_t(mod(k, long(degree(v))));
}

std::size_t RibbonGraph::parse_site(const std::string& s) const {
  auto c = s.rfind(':');
  if (c == std::string::npos) {
    std::size_t v = vertex_index(s);
    return corner(v, long(vertices_[v].cilium) - 1);
  }
  std::size_t v = vertex_index(s.substr(0, c));
  std::size_t k = 0;
  try {
    k = std::stoul(s.substr(c + 1));
  } catch (const std::exception&) {
    throw DomainError("malformed site '" + s + "'");
  }
  if (k >= degree(v)) throw DomainError("site '" + s + "': corner out of range");
  return corner(v, long(k));
}

std::size_t RibbonGraph::letter_src(const Letter& l) const {
  const int c = local_src(l);
  switch (c) {
    case 0: return s_left(l.edge);
    case 1: return s_right(l.edge);
    case 2: return t_left(l.edge);
    default: return t_right(l.edge);
  }
}

std::size_t RibbonGraph::letter_dst(const Letter& l) const { return letter_src(l.inverse()); }

std::vector<ThickEdge> RibbonGraph::thicken() const {
  std::vector<ThickEdge> out;
  for (std::size_t e = 0; e < edges_.size(); ++e)
    for (Dir d : {Dir::s, Dir::t, Dir::L, Dir::R}) {
      Letter l{e, d, false};
      out.push_back({l, letter_src(l), letter_dst(l)});
    }
  return out;
}

bool RibbonGraph::disjoint(std::size_t s1, std::size_t s2) const {
  return sites_[s1].vertex != sites_[s2].vertex && sites_[s1].face != sites_[s2].face;
}

// ---------------------------------------------------------------- paths

std::vector<Letter> reduce(std::vector<Letter> w) {
  std::vector<Letter> st;
  st.reserve(w.size());
  for (const auto& l : w) {
    if (!st.empty() && st.back() == l.inverse())
      st.pop_back();
    else
      st.push_back(l);
  }
  return st;
}

bool is_composable(const RibbonGraph& g, const std::vector<Letter>& w) {
  for (std::size_t i = 0; i + 1 < w.size(); ++i)
    if (g.letter_dst(w[i + 1]) != g.letter_src(w[i])) return false;
  return true;
}

ThickPath make_path(const RibbonGraph& g, std::vector<Letter> word) {
  if (word.empty()) throw PathError("empty word");
  if (!is_composable(g, word)) throw PathError("word is not composable");
  ThickPath p;
  p.start = g.letter_src(word.back());
  p.end = g.letter_dst(word.front());
  p.word = reduce(std::move(word));
  return p;
}

ThickPath parse_path(const RibbonGraph& g, const std::string& text) {
  std::istringstream in(text);
  std::string tok;
  std::vector<Letter> w;
  while (in >> tok) {
    auto c = tok.rfind('^');
    if (c == std::string::npos) throw PathError("letter '" + tok + "' lacks '^'");
    auto e = g.find_edge(tok.substr(0, c));
    if (!e) throw PathError("letter '" + tok + "' names an unknown edge");
    std::string spec = tok.substr(c + 1);
    bool neg = false;
    if (!spec.empty() && (spec[0] == '-' || spec[0] == '+')) {
      neg = spec[0] == '-';
      spec.erase(0, 1);
    }
    auto single = [&](Dir d) { w.push_back({*e, d, neg}); };
    auto pair = [&](int k) {
      auto words = d_words(*e);
      const auto& x = words[std::size_t(2 * k + (neg ? 1 : 0))];
      w.insert(w.end(), x.begin(), x.end());
    };
    if (spec == "s") single(Dir::s);
    else if (spec == "t") single(Dir::t);
    else if (spec == "L") single(Dir::L);
    else if (spec == "R") single(Dir::R);
    else if (spec == "d") pair(0);
    else if (spec == "dbar") pair(1);
    else if (spec == "d'") pair(2);
    else if (spec == "dbar'") pair(3);
    else throw PathError("letter '" + tok + "' has an unknown type");
  }
  return make_path(g, std::move(w));
}

std::string to_string(const RibbonGraph& g, const Letter& l) {
  return g.edges()[l.edge].id + "^" + (l.inv ? "-" : "") + dir_name(l.dir);
}

std::string to_string(const RibbonGraph& g, const ThickPath& p) {
  std::string s;
  for (const auto& l : p.word) {
    if (!s.empty()) s += ' ';
    s += to_string(g, l);
  }
  return s;
}

ThickPath inverse(const ThickPath& p) {
  ThickPath q;
  q.word = invert_word(p.word);
  q.start = p.end;
  q.end = p.start;
  return q;
}

ThickPath compose(const RibbonGraph& g, const ThickPath& a, const ThickPath& b) {
  if (b.end != a.start)
    throw PathError("cannot compose: " + g.site_name(b.end) + " vs " + g.site_name(a.start));
  ThickPath p;
  p.word = a.word;
  p.word.insert(p.word.end(), b.word.begin(), b.word.end());
  p.word = reduce(std::move(p.word));
  p.start = b.start;
  p.end = a.end;
  return p;
}

ThickPath subpath(const RibbonGraph& g, const ThickPath& p, std::size_t i, std::size_t j) {
  ThickPath q;
  q.word = slice(p.word, i, j);
  if (i == j) {
    q.start = q.end = i < p.size() ? g.letter_dst(p.word[i]) : p.start;
  } else {
    q.start = g.letter_src(p.word[j - 1]);
    q.end = g.letter_dst(p.word[i]);
  }
  return q;
}

EndSide end_side(const ThickPath& p) {
  if (p.empty()) throw PathError("empty path has no endpoint side");
  return leftish(p.word.front()) ? EndSide::left : EndSide::right;
}

EndSide start_side(const ThickPath& p) {
  if (p.empty()) throw PathError("empty path has no endpoint side");
  return leftish(p.word.back()) ? EndSide::right : EndSide::left;
}

SideType side_type(const ThickPath& p) {
  bool sl = start_side(p) == EndSide::left, el = end_side(p) == EndSide::left;
  if (sl) return el ? SideType::left_left : SideType::left_right;
  return el ? SideType::right_left : SideType::right_right;
}

const char* to_string(SideType t) {
  switch (t) {
    case SideType::left_right: return "left-right";
    case SideType::right_left: return "right-left";
    case SideType::left_left: return "left-left";
    case SideType::right_right: return "right-right";
  }
  return "?";
}

bool is_ribbon(const ThickPath& p) { return word_ribbon(p.word); }

bool non_crossing(const std::vector<Letter>& a, const std::vector<Letter>& b) {
  std::map<std::size_t, unsigned> ma, mb;
  for (const auto& l : a) ma[l.edge] |= bit(l.dir);
  for (const auto& l : b) mb[l.edge] |= bit(l.dir);
  for (const auto& [e, x] : ma) {
    auto it = mb.find(e);
    if (it == mb.end()) continue;
    unsigned p = partner(x);
    if (!p || it->second != p) return false;
  }
  return true;
}

bool is_d_pair(const Letter& x, const Letter& y) {
  if (x.edge != y.edge) return false;
  for (const auto& w : d_words(x.edge))
    if (w[0] == x && w[1] == y) return true;
  return false;
}

namespace {

// step at position p: a single letter or a d-pair; returns (length, is_side, is_end, is_pair)
struct Step {
  std::size_t len;
  bool side, end, pair;
};

std::vector<Step> steps_at(const std::vector<Letter>& w, std::size_t p) {
  std::vector<Step> r;
  if (p >= w.size()) return r;
  r.push_back({1, is_side(w[p].dir), !is_side(w[p].dir), false});
  if (p + 1 < w.size() && is_d_pair(w[p], w[p + 1])) r.push_back({2, false, false, true});
  return r;
}

}  // namespace

bool left_joint(const std::vector<Letter>& a, const std::vector<Letter>& b) {
  const std::size_t m = std::min(a.size(), b.size());
  for (std::size_t p = 0; p <= m; ++p) {
    if (p > 0 && !(a[p - 1] == b[p - 1])) break;
    auto rho = slice(a, 0, p);
    if (!word_ribbon(rho)) continue;
    for (const auto& sa : steps_at(a, p))
      for (const auto& sb : steps_at(b, p)) {
        if (a[p].edge != b[p].edge || a[p] == b[p]) continue;
        bool ok = ((sa.side || sa.pair) && sb.end) || (sa.side && (sb.end || sb.pair));
        if (!ok) continue;
        // with no common prefix both steps must end at the same corner
        if (p == 0 && local_dst(a[0]) != local_dst(b[0])) continue;
        auto r1 = slice(a, p + sa.len, a.size()), r2 = slice(b, p + sb.len, b.size());
        // arms that return to the joint edge wrap around it
        auto on_edge = [e = a[p].edge](const Letter& l) { return l.edge == e; };
        if (std::any_of(r1.begin(), r1.end(), on_edge) || std::any_of(r2.begin(), r2.end(), on_edge)) continue;
        if (non_crossing(rho, r1) && non_crossing(rho, r2) && non_crossing(r1, r2)) return true;
      }
  }
  return false;
}

bool right_joint(const std::vector<Letter>& a, const std::vector<Letter>& b) {
  return left_joint(invert_word(a), invert_word(b));
}

bool middle_joint(const std::vector<Letter>& a, const std::vector<Letter>& b) {
  // a shared segment at either end is a left or right joint, not a middle one
  if (left_joint(a, b) || right_joint(a, b)) return false;
  for (std::size_t i = 1; i < a.size(); ++i)
    for (std::size_t j = 1; j < b.size(); ++j) {
      auto a1 = slice(a, 0, i), a2 = slice(a, i, a.size());
      auto b1 = slice(b, 0, j), b2 = slice(b, j, b.size());
      if (right_joint(a1, b1) && left_joint(a2, b2)) return true;
      if (right_joint(b1, a1) && left_joint(b2, a2)) return true;
    }
  return false;
}

bool is_simple(const ThickPath& p) {
  const auto& w = p.word;
  const std::size_t n = w.size();
  for (std::size_t i = 0; i + 1 < n; ++i)
    if (w[i + 1] == w[i].inverse()) return false;
  for (std::size_t k = 1; k < n; ++k) {
    if (non_crossing(slice(w, 0, k), slice(w, k, n))) continue;
    if (!is_d_pair(w[k - 1], w[k])) return false;
    auto r1 = slice(w, 0, k - 1), r2 = slice(w, k + 1, n), xy = slice(w, k - 1, k + 1);
    if (!(non_crossing(r1, r2) && non_crossing(xy, r1) && non_crossing(xy, r2))) return false;
  }
  return true;
}

Joint joints(const ThickPath& a, const ThickPath& b) {
  if (non_crossing(a.word, b.word)) return Joint::none_cross;
  if (left_joint(a.word, b.word)) return Joint::left;
  if (right_joint(a.word, b.word)) return Joint::right;
  if (middle_joint(a.word, b.word)) return Joint::middle;
  return Joint::crossing;
}

const char* to_string(Joint j) {
  switch (j) {
    case Joint::none_cross: return "none-cross";
    case Joint::left: return "left";
    case Joint::right: return "right";
    case Joint::middle: return "middle";
    case Joint::crossing: return "crossing";
  }
  return "?";
}

ThickPath vertex_path(const RibbonGraph& g, std::size_t site) {
  const auto& S = g.sites()[site];
  const auto& V = g.vertices()[S.vertex];
  const long deg = long(V.order.size());
  std::vector<Letter> trav;
  for (long m = 0; m < deg; ++m) {
    const EdgeEnd& c = V.order[std::size_t(mod(long(S.corner) - m, deg))];
    trav.push_back(c.out ? Letter{c.edge, Dir::s, true} : Letter{c.edge, Dir::t, false});
  }
  std::reverse(trav.begin(), trav.end());
  ThickPath p = make_path(g, trav);
  if (p.start != site || p.end != site) throw PathError("vertex path is not closed at its site");
  return p;
}

ThickPath face_path(const RibbonGraph& g, std::size_t site) {
  std::vector<Letter> trav;
  std::size_t s = site;
  do {
    const auto& S = g.sites()[s];
    const auto& V = g.vertices()[S.vertex];
    const EdgeEnd& c = V.order[(S.corner + 1) % V.order.size()];
    Letter l = c.out ? Letter{c.edge, Dir::R, false} : Letter{c.edge, Dir::L, true};
    trav.push_back(l);
    s = g.letter_dst(l);
  } while (s != site);
  std::reverse(trav.begin(), trav.end());
  return make_path(g, trav);
}

// ---------------------------------------------------------------- defect graphs

bool ValidationReport::ok() const {
  return std::all_of(conditions.begin(), conditions.end(), [](const auto& c) { return c.pass; });
}

const ConditionResult* ValidationReport::find(const std::string& name) const {
  for (const auto& c : conditions)
    if (c.name == name) return &c;
  return nullptr;
}

std::optional<EdgeRegion> DefectGraph::edge_region(std::size_t e) const {
  for (std::size_t b = 0; b < bulks.size(); ++b)
    if (std::count(bulks[b].edges.begin(), bulks[b].edges.end(), e)) return EdgeRegion{EdgeKind::bulk, b};
  for (std::size_t a = 0; a < boundaries.size(); ++a)
    if (std::count(boundaries[a].edges.begin(), boundaries[a].edges.end(), e))
      return EdgeRegion{EdgeKind::boundary, a};
  for (std::size_t d = 0; d < defects.size(); ++d)
    if (std::count(defects[d].edges.begin(), defects[d].edges.end(), e)) return EdgeRegion{EdgeKind::defect, d};
  return std::nullopt;
}

bool DefectGraph::is_line_edge(std::size_t e) const {
  auto r = edge_region(e);
  return r && r->kind != EdgeKind::bulk;
}

std::size_t DefectGraph::bulk_index(const std::string& id) const {
  for (std::size_t b = 0; b < bulks.size(); ++b)
    if (bulks[b].id == id) return b;
  throw DomainError("unknown bulk region '" + id + "'");
}

std::size_t DefectGraph::defect_index(const std::string& id) const {
  for (std::size_t d = 0; d < defects.size(); ++d)
    if (defects[d].id == id) return d;
  throw DomainError("unknown defect line '" + id + "'");
}

std::size_t DefectGraph::boundary_index(const std::string& id) const {
  for (std::size_t a = 0; a < boundaries.size(); ++a)
    if (boundaries[a].id == id) return a;
  throw DomainError("unknown boundary line '" + id + "'");
}

namespace {

std::set<std::size_t> vertices_of(const RibbonGraph& g, const std::vector<std::size_t>& edges) {
  std::set<std::size_t> vs;
  for (auto e : edges) {
    vs.insert(g.edges()[e].src);
    vs.insert(g.edges()[e].dst);
  }
  return vs;
}

bool connected(const RibbonGraph& g, const std::vector<std::size_t>& edges) {
  auto vs = vertices_of(g, edges);
  if (vs.empty()) return false;
  std::set<std::size_t> reached{*vs.begin()};
  for (bool grew = true; grew;) {
    grew = false;
    for (auto e : edges) {
      const auto& E = g.edges()[e];
      bool a = reached.count(E.src), b = reached.count(E.dst);
      if (a != b) {
        reached.insert(E.src);
        reached.insert(E.dst);
        grew = true;
      }
    }
  }
  return reached.size() == vs.size();
}

struct LineAt {
  std::size_t out_edge, in_edge;
};

// outgoing and incoming line edge at v; nullopt if v is not on the line or the line is not cyclic there
std::optional<LineAt> line_at(const RibbonGraph& g, const std::vector<std::size_t>& edges, std::size_t v) {
  std::optional<std::size_t> o, i;
  int no = 0, ni = 0;
  for (auto e : edges) {
    if (g.edges()[e].src == v) {
      o = e;
      ++no;
    }
    if (g.edges()[e].dst == v) {
      i = e;
      ++ni;
    }
  }
  if (no != 1 || ni != 1) return std::nullopt;
  return LineAt{*o, *i};
}

// edge ends strictly left and strictly right of a line through v
std::pair<std::vector<EdgeEnd>, std::vector<EdgeEnd>> sides_at(const RibbonGraph& g, std::size_t v, const LineAt& la) {
  const auto& V = g.vertices()[v];
  const long deg = long(V.order.size());
  long i = long(g.edges()[la.out_edge].src_pos), j = long(g.edges()[la.in_edge].dst_pos);
  std::vector<EdgeEnd> left, right;
  for (long m = mod(i + 1, deg); m != j; m = mod(m + 1, deg)) left.push_back(V.order[std::size_t(m)]);
  for (long m = mod(j + 1, deg); m != i; m = mod(m + 1, deg)) right.push_back(V.order[std::size_t(m)]);
  return {left, right};
}

struct LineRef {
  bool defect;
  std::size_t index;
  const std::vector<std::size_t>* edges;
};

std::vector<LineRef> lines(const DefectGraph& G) {
  std::vector<LineRef> r;
  for (std::size_t d = 0; d < G.defects.size(); ++d) r.push_back({true, d, &G.defects[d].edges});
  for (std::size_t a = 0; a < G.boundaries.size(); ++a) r.push_back({false, a, &G.boundaries[a].edges});
  return r;
}

std::optional<LineRef> line_through(const DefectGraph& G, std::size_t v) {
  for (const auto& L : lines(G))
    if (vertices_of(G.graph, *L.edges).count(v)) return L;
  return std::nullopt;
}

std::string vname(const RibbonGraph& g, std::size_t v) { return "'" + g.vertices()[v].id + "'"; }

}  // namespace

ValidationReport validate_defect_graph(const DefectGraph& G) {
  const RibbonGraph& g = G.graph;
  ValidationReport rep;
  auto add = [&](const std::string& name, const std::vector<std::string>& fails) {
    std::string d;
    for (const auto& f : fails) d += (d.empty() ? "" : "; ") + f;
    rep.conditions.push_back({name, fails.empty(), d});
  };

  add("bulk family non-empty", G.bulks.empty() ? std::vector<std::string>{"no bulk regions"} : std::vector<std::string>{});

  std::vector<std::string> f;
  for (const auto& b : G.bulks)
    if (!connected(g, b.edges)) f.push_back("bulk '" + b.id + "' is not a connected subgraph");
  add("bulk regions connected", f);

  f.clear();
  for (const auto& L : lines(G)) {
    const std::string& id = L.defect ? G.defects[L.index].id : G.boundaries[L.index].id;
    if (!connected(g, *L.edges)) f.push_back("line '" + id + "' is not connected");
    for (auto v : vertices_of(g, *L.edges))
      if (!line_at(g, *L.edges, v)) f.push_back("line '" + id + "' is not oriented cyclic at " + vname(g, v));
  }
  add("lines oriented cyclic", f);

  f.clear();
  for (const auto& d : G.defects)
    if (d.left == d.right) f.push_back("defect '" + d.id + "' has the same bulk on both sides");
  add("defect sides distinct", f);

  f.clear();
  {
    auto ls = lines(G);
    for (std::size_t x = 0; x < ls.size(); ++x)
      for (std::size_t y = x + 1; y < ls.size(); ++y) {
        auto a = vertices_of(g, *ls[x].edges), b = vertices_of(g, *ls[y].edges);
        for (auto v : a)
          if (b.count(v)) f.push_back("lines share vertex " + vname(g, v));
      }
  }
  add("lines vertex-disjoint", f);

  f.clear();
  for (std::size_t e = 0; e < g.edges().size(); ++e) {
    int c = 0;
    for (const auto& b : G.bulks) c += int(std::count(b.edges.begin(), b.edges.end(), e));
    for (const auto& L : lines(G)) c += int(std::count(L.edges->begin(), L.edges->end(), e));
    if (c != 1) f.push_back("edge '" + g.edges()[e].id + "' is in " + std::to_string(c) + " subgraphs");
  }
  add("edge in exactly one subgraph", f);

  std::vector<std::set<std::size_t>> vb;
  for (const auto& b : G.bulks) vb.push_back(vertices_of(g, b.edges));
  auto in_bulk = [&](std::size_t e, std::size_t b) {
    return std::count(G.bulks[b].edges.begin(), G.bulks[b].edges.end(), e) > 0;
  };

  f.clear();
  for (const auto& d : G.defects) {
    for (auto v : vertices_of(g, d.edges)) {
      auto la = line_at(g, d.edges, v);
      if (!la) continue;
      if (d.left >= vb.size() || d.right >= vb.size()) continue;
      if (!vb[d.left].count(v) || !vb[d.right].count(v))
        f.push_back("defect vertex " + vname(g, v) + " is not in both adjacent bulks");
      auto [l, r] = sides_at(g, v, *la);
      for (const auto& c : l)
        if (!in_bulk(c.edge, d.left))
          f.push_back("edge '" + g.edges()[c.edge].id + "' left of defect '" + d.id + "' is not in its left bulk");
      for (const auto& c : r)
        if (!in_bulk(c.edge, d.right))
          f.push_back("edge '" + g.edges()[c.edge].id + "' right of defect '" + d.id + "' is not in its right bulk");
    }
  }
  add("defect vertices in both adjacent bulks", f);

  f.clear();
  for (std::size_t v = 0; v < g.vertices().size(); ++v) {
    std::vector<std::size_t> in;
    for (std::size_t b = 0; b < vb.size(); ++b)
      if (vb[b].count(v)) in.push_back(b);
    if (in.empty() || in.size() > 2) {
      f.push_back("vertex " + vname(g, v) + " is in " + std::to_string(in.size()) + " bulk regions");
      continue;
    }
    if (in.size() == 2) {
      bool ok = false;
      for (const auto& d : G.defects)
        if (vertices_of(g, d.edges).count(v) &&
            ((d.left == in[0] && d.right == in[1]) || (d.left == in[1] && d.right == in[0])))
          ok = true;
      if (!ok) f.push_back("vertex " + vname(g, v) + " is in two bulks without a separating defect");
    }
  }
  add("vertex in one or two bulks", f);

  f.clear();
  for (const auto& a : G.boundaries) {
    for (auto v : vertices_of(g, a.edges)) {
      auto la = line_at(g, a.edges, v);
      if (!la || a.bulk >= vb.size()) continue;
      if (!vb[a.bulk].count(v)) f.push_back("boundary vertex " + vname(g, v) + " is not in its bulk");
      auto [l, r] = sides_at(g, v, *la);
      for (const auto& c : l)
        if (!in_bulk(c.edge, a.bulk))
          f.push_back("edge '" + g.edges()[c.edge].id + "' at boundary '" + a.id + "' is not in its bulk");
      for (const auto& c : r)
        f.push_back("edge '" + g.edges()[c.edge].id + "' lies right of boundary '" + a.id + "'");
    }
  }
  add("boundary edges on the left", f);
  return rep;
}

namespace {

std::vector<std::size_t> line_vertices_in_order(const RibbonGraph& g, const std::vector<std::size_t>& edges) {
  std::vector<std::size_t> out;
  if (edges.empty()) return out;
  std::size_t v = g.edges()[edges.front()].src;
  const std::size_t v0 = v;
  do {
    out.push_back(v);
    auto la = line_at(g, edges, v);
    if (!la) throw DomainError("line is not oriented cyclic at " + vname(g, v));
    v = g.edges()[la->out_edge].dst;
  } while (v != v0 && out.size() <= edges.size());
  return out;
}

}  // namespace

std::vector<DefectSitePair> defect_site_pairs(const DefectGraph& G, std::size_t d) {
  const RibbonGraph& g = G.graph;
  std::vector<DefectSitePair> out;
  for (auto v : line_vertices_in_order(g, G.defects.at(d).edges)) {
    auto la = line_at(g, G.defects[d].edges, v);
    out.push_back({v, g.s_left(la->out_edge), g.s_right(la->out_edge)});
  }
  return out;
}

std::vector<std::size_t> boundary_sites(const DefectGraph& G, std::size_t a) {
  const RibbonGraph& g = G.graph;
  std::vector<std::size_t> out;
  for (auto v : line_vertices_in_order(g, G.boundaries.at(a).edges)) {
    auto la = line_at(g, G.boundaries[a].edges, v);
    out.push_back(g.s_left(la->out_edge));
  }
  return out;
}

std::optional<std::size_t> site_region(const DefectGraph& G, std::size_t site) {
  const RibbonGraph& g = G.graph;
  const auto& S = g.sites()[site];
  const std::size_t v = S.vertex;
  if (auto L = line_through(G, v)) {
    auto la = line_at(g, *L->edges, v);
    if (!la) return std::nullopt;
    const long deg = long(g.degree(v));
    long i = long(g.edges()[la->out_edge].src_pos), j = long(g.edges()[la->in_edge].dst_pos);
    bool left = mod(long(S.corner) - i, deg) < mod(j - i, deg);
    if (L->defect) return left ? G.defects[L->index].left : G.defects[L->index].right;
    if (left) return G.boundaries[L->index].bulk;
    return std::nullopt;
  }
  for (std::size_t b = 0; b < G.bulks.size(); ++b)
    if (vertices_of(g, G.bulks[b].edges).count(v)) return b;
  return std::nullopt;
}

SiteKind site_kind(const DefectGraph& G, std::size_t site) {
  auto b = site_region(G, site);
  if (!b) return SiteKind::exterior;
  for (std::size_t d = 0; d < G.defects.size(); ++d)
    for (const auto& p : defect_site_pairs(G, d))
      if (p.left == site || p.right == site) return SiteKind::defect;
  for (std::size_t a = 0; a < G.boundaries.size(); ++a)
    for (auto s : boundary_sites(G, a))
      if (s == site) return SiteKind::boundary;
  const auto& E = G.bulks[*b].edges;
  auto inside = [&](const ThickPath& p) {
    for (const auto& l : p.word)
      if (!std::count(E.begin(), E.end(), l.edge)) return false;
    return true;
  };
  if (inside(vertex_path(G.graph, site)) && inside(face_path(G.graph, site))) return SiteKind::bulk;
  return SiteKind::general;
}

const char* to_string(SiteKind k) {
  switch (k) {
    case SiteKind::bulk: return "bulk";
    case SiteKind::boundary: return "boundary";
    case SiteKind::defect: return "defect";
    case SiteKind::general: return "general";
    case SiteKind::exterior: return "exterior";
  }
  return "?";
}

bool is_permissible(const DefectGraph& G, const ThickPath& p) {
  for (const auto& l : p.word)
    if (!is_side(l.dir) && G.is_line_edge(l.edge)) return false;
  return true;
}

PathClass classify_path(const RibbonGraph& g, const ThickPath& p, const DefectGraph* G) {
  if (!is_composable(g, p.word)) throw PathError("word is not composable");
  PathClass c;
  c.ribbon = is_ribbon(p);
  c.simple = is_simple(p);
  if (!p.empty()) c.side = side_type(p);
  if (G) c.permissible = c.simple && is_permissible(*G, p);
  return c;
}

// ---------------------------------------------------------------- JSON

namespace {

const nlohmann::json& need(const nlohmann::json& j, const char* key, const std::string& ptr) {
  if (!j.is_object() || !j.contains(key)) throw ConfigError(ptr + "/" + key + ": missing");
  return j.at(key);
}

std::string need_string(const nlohmann::json& j, const std::string& ptr) {
  if (!j.is_string()) throw ConfigError(ptr + ": expected a string");
  return j.get<std::string>();
}

std::vector<std::size_t> edge_list(const RibbonGraph& g, const nlohmann::json& j, const std::string& ptr) {
  if (!j.is_array()) throw ConfigError(ptr + ": expected an array of edge ids");
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < j.size(); ++k) {
    std::string id = need_string(j[k], ptr + "/" + std::to_string(k));
    auto e = g.find_edge(id);
    if (!e) throw ConfigError(ptr + "/" + std::to_string(k) + ": unknown edge '" + id + "'");
    out.push_back(*e);
  }
  return out;
}

}  // namespace

DefectGraph defect_graph_from_json(const nlohmann::json& j, const std::string& ptr) {
  std::vector<RibbonGraph::VertexSpec> vs;
  std::vector<RibbonGraph::EdgeSpec> es;
  const auto& jv = need(j, "vertices", ptr);
  if (!jv.is_array()) throw ConfigError(ptr + "/vertices: expected an array");
  for (std::size_t k = 0; k < jv.size(); ++k) {
    std::string p = ptr + "/vertices/" + std::to_string(k);
    RibbonGraph::VertexSpec s;
    s.id = need_string(need(jv[k], "id", p), p + "/id");
    const auto& co = need(jv[k], "cyclic_order", p);
    if (!co.is_array()) throw ConfigError(p + "/cyclic_order: expected an array");
    for (std::size_t m = 0; m < co.size(); ++m) {
      std::string end = need_string(co[m], p + "/cyclic_order/" + std::to_string(m));
      auto us = end.rfind('_');
      if (us == std::string::npos || (end.substr(us) != "_out" && end.substr(us) != "_in"))
        throw ConfigError(p + "/cyclic_order/" + std::to_string(m) + ": malformed edge end '" + end + "'");
      s.cyclic_order.push_back(end);
    }
    if (jv[k].contains("cilium_index")) {
      const auto& ci = jv[k]["cilium_index"];
      if (!ci.is_number_integer() || ci.get<long long>() < 0)
        throw ConfigError(p + "/cilium_index: expected a non-negative integer");
      s.cilium = jv[k]["cilium_index"].get<std::size_t>();
    }
    vs.push_back(s);
  }
  const auto& je = need(j, "edges", ptr);
  if (!je.is_array()) throw ConfigError(ptr + "/edges: expected an array");
  for (std::size_t k = 0; k < je.size(); ++k) {
    std::string p = ptr + "/edges/" + std::to_string(k);
    es.push_back({need_string(need(je[k], "id", p), p + "/id"), need_string(need(je[k], "src", p), p + "/src"),
                  need_string(need(je[k], "dst", p), p + "/dst")});
  }
  DefectGraph G;
  try {
    G.graph = RibbonGraph(vs, es);
  } catch (const ConfigError& e) {
    throw ConfigError(ptr + "/vertices: " + std::string(e.what()).substr(std::string("ConfigError: ").size()));
  }
  const RibbonGraph& g = G.graph;
  if (!j.contains("regions")) {
    BulkRegion b{"b0", {}};
    for (std::size_t e = 0; e < g.edges().size(); ++e) b.edges.push_back(e);
    G.bulks.push_back(b);
    return G;
  }
  const std::string rp = ptr + "/regions";
  const auto& jr = j.at("regions");
  const auto& jb = need(jr, "bulk", rp);
  if (!jb.is_object()) throw ConfigError(rp + "/bulk: expected an object");
  for (auto it = jb.begin(); it != jb.end(); ++it)
    G.bulks.push_back({it.key(), edge_list(g, it.value(), rp + "/bulk/" + it.key())});
  auto bulk_ref = [&](const nlohmann::json& x, const std::string& p) {
    std::string id = need_string(x, p);
    for (std::size_t b = 0; b < G.bulks.size(); ++b)
      if (G.bulks[b].id == id) return b;
    throw ConfigError(p + ": unknown bulk region '" + id + "'");
  };
  if (jr.contains("boundary")) {
    const auto& ja = jr.at("boundary");
    for (std::size_t k = 0; k < ja.size(); ++k) {
      std::string p = rp + "/boundary/" + std::to_string(k);
      BoundaryLine a;
      a.id = ja[k].contains("id") ? need_string(ja[k]["id"], p + "/id") : "a" + std::to_string(k);
      a.edges = edge_list(g, need(ja[k], "cycle", p), p + "/cycle");
      a.bulk = bulk_ref(need(ja[k], "bulk", p), p + "/bulk");
      G.boundaries.push_back(a);
    }
  }
  if (jr.contains("defect")) {
    const auto& jd = jr.at("defect");
    for (std::size_t k = 0; k < jd.size(); ++k) {
      std::string p = rp + "/defect/" + std::to_string(k);
      DefectLine d;
      d.id = jd[k].contains("id") ? need_string(jd[k]["id"], p + "/id") : "d" + std::to_string(k);
      d.edges = edge_list(g, need(jd[k], "cycle", p), p + "/cycle");
      d.left = bulk_ref(need(jd[k], "left", p), p + "/left");
      d.right = bulk_ref(need(jd[k], "right", p), p + "/right");
      G.defects.push_back(d);
    }
  }
  return G;
}

nlohmann::json to_json(const DefectGraph& G) {
  const RibbonGraph& g = G.graph;
  nlohmann::json j;
  j["vertices"] = nlohmann::json::array();
  for (const auto& v : g.vertices()) {
    nlohmann::json co = nlohmann::json::array();
    for (const auto& c : v.order) co.push_back(g.edges()[c.edge].id + (c.out ? "_out" : "_in"));
    j["vertices"].push_back({{"id", v.id}, {"cyclic_order", co}, {"cilium_index", v.cilium}});
  }
  j["edges"] = nlohmann::json::array();
  for (const auto& e : g.edges())
    j["edges"].push_back({{"id", e.id}, {"src", g.vertices()[e.src].id}, {"dst", g.vertices()[e.dst].id}});
  auto ids = [&](const std::vector<std::size_t>& es) {
    nlohmann::json a = nlohmann::json::array();
    for (auto e : es) a.push_back(g.edges()[e].id);
    return a;
  };
  nlohmann::json bulk = nlohmann::json::object();
  for (const auto& b : G.bulks) bulk[b.id] = ids(b.edges);
  j["regions"]["bulk"] = bulk;
  j["regions"]["boundary"] = nlohmann::json::array();
  for (const auto& a : G.boundaries)
    j["regions"]["boundary"].push_back({{"id", a.id}, {"cycle", ids(a.edges)}, {"bulk", G.bulks[a.bulk].id}});
  j["regions"]["defect"] = nlohmann::json::array();
  for (const auto& d : G.defects)
    j["regions"]["defect"].push_back(
        {{"id", d.id}, {"cycle", ids(d.edges)}, {"left", G.bulks[d.left].id}, {"right", G.bulks[d.right].id}});
  return j;
}

}  // namespace kdm
