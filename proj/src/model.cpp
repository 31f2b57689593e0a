#include "kdm/model.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <tuple>

namespace kdm {

namespace {

cd coef_at(const Sparse<cd>& x, idx i) {
  for (const auto& [j, c] : x)
    if (j == i) return c;
  return 0.0;
}

// local index x*m + y; M acts on x
std::vector<Sparse<cd>> kron_left(const std::vector<Sparse<cd>>& M, std::size_t m) {
  std::vector<Sparse<cd>> out(M.size() * m);
  for (std::size_t x = 0; x < M.size(); ++x)
    for (std::size_t y = 0; y < m; ++y)
      for (const auto& [r, c] : M[x]) out[x * m + y].emplace_back(r * m + y, c);
  return out;
}

// local index x*n + y; M acts on y
std::vector<Sparse<cd>> kron_right(std::size_t m, const std::vector<Sparse<cd>>& M) {
  const std::size_t n = M.size();
  std::vector<Sparse<cd>> out(m * n);
  for (std::size_t x = 0; x < m; ++x)
    for (std::size_t y = 0; y < n; ++y)
      for (const auto& [r, c] : M[y]) out[x * n + y].emplace_back(x * n + r, c);
  return out;
}

std::vector<Sparse<cd>> scalar_cols(std::size_t d, cd c) {
  std::vector<Sparse<cd>> out(d);
  if (std::abs(c) <= 1e-14) return out;
  for (std::size_t i = 0; i < d; ++i) out[i] = unit_vec<cd>(i, c);
  return out;
}

void add_cols(std::vector<Sparse<cd>>& acc, cd w, const std::vector<Sparse<cd>>& m) {
  if (acc.empty()) acc.resize(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) axpy(acc[i], w, m[i]);
}

std::vector<Letter> inverse_word(const std::vector<Letter>& w) {
  std::vector<Letter> r;
  for (auto it = w.rbegin(); it != w.rend(); ++it) r.push_back(it->inverse());
  return r;
}

void check_element(const Sparse<cd>& x, std::size_t n, const std::string& what) {
  for (const auto& [i, c] : x)
    if (i >= n) throw DomainError(what + ": basis index " + std::to_string(i) + " outside dimension " + std::to_string(n));
}

constexpr std::size_t kTermCap = 1000000;

}  // namespace

// ---------------------------------------------------------------- sparse-matrix operators

LinOp<cd> sparse_op(const std::string& space, std::shared_ptr<const SpMat> m) {
  const std::size_t n = std::size_t(m->cols());
  return LinOp<cd>(space, n, space, std::size_t(m->rows()), [m](const Sparse<cd>& v) {
    Sparse<cd> out;
    for (const auto& [j, c] : v)
      for (SpMat::InnerIterator it(*m, Eigen::Index(j)); it; ++it) out.emplace_back(idx(it.row()), c * it.value());
    canon(out);
    return out;
  });
}

SpMat to_spmat(const LinOp<cd>& op) {
  std::vector<Eigen::Triplet<cd>> t;
  for (idx j = 0; j < op.dim_domain(); ++j)
    for (const auto& [i, c] : op.column(j)) t.emplace_back(Eigen::Index(i), Eigen::Index(j), c);
  SpMat m(Eigen::Index(op.dim_codomain()), Eigen::Index(op.dim_domain()));
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

// ---------------------------------------------------------------- construction

Model::Model(ModelSpec spec) : spec_(std::move(spec)) {
  const DefectGraph& G = spec_.graph;
  const RibbonGraph& g = G.graph;
  auto report = validate_defect_graph(G);
  if (!report.ok()) {
    std::string why;
    for (const auto& c : report.conditions)
      if (!c.pass) why += (why.empty() ? "" : "; ") + c.name + (c.detail.empty() ? "" : " (" + c.detail + ")");
    throw DomainError("defect graph: " + why);
  }
  space_ = "N(" + spec_.name + ")";

  std::map<const void*, std::size_t> seen;
  for (const auto& br : G.bulks) {
    auto it = spec_.algebras.find(br.id);
    if (it == spec_.algebras.end() || !it->second) throw ConfigError("/algebras/" + br.id + ": missing");
    BulkAlgebra B;
    B.id = br.id;
    B.H = it->second;
    if (auto s = seen.find(B.H.get()); s != seen.end()) {
      const auto& o = bulks_[s->second];
      B.D = o.D;
      B.Dd = o.Dd;
      B.lambda_D = o.lambda_D;
      B.integral_D = o.integral_D;
      B.integral_H = o.integral_H;
    } else {
      B.D = std::make_shared<const HopfAlgebra<cd>>(drinfeld_double(*B.H));
      B.Dd = std::make_shared<const HopfAlgebra<cd>>(drinfeld_double_dual(*B.H));
      B.lambda_D = haar(*B.D).element;
      B.integral_D = haar(*B.Dd).element;
      B.integral_H = haar(dual(*B.H)).element;
      seen[B.H.get()] = bulks_.size();
    }
    bulks_.push_back(B);
    trivial_.push_back(trivial_twist(*bulks_.back().D));
  }

  const std::size_t E = g.edges().size();
  edim_.resize(E);
  for (std::size_t e = 0; e < E; ++e) {
    auto r = *G.edge_region(e);
    switch (r.kind) {
      case EdgeKind::bulk: edim_[e] = bulks_[r.index].n(); break;
      case EdgeKind::boundary: edim_[e] = bulks_[G.boundaries[r.index].bulk].n(); break;
      case EdgeKind::defect:
        edim_[e] = bulks_[G.defects[r.index].left].n() * bulks_[G.defects[r.index].right].n();
        break;
    }
  }
  stride_.assign(E, 1);
  for (std::size_t e = E; e-- > 0;) {
    stride_[e] = dim_;
    if (dim_ > (std::size_t(1) << 40) / edim_[e]) throw CapacityError("extended space too large");
    dim_ *= edim_[e];
  }

  for (const auto& a : G.boundaries) {
    const BulkAlgebra& B = bulks_[a.bulk];
    LineTwist lt;
    auto it = spec_.boundary_twists.find(a.id);
    if (it != spec_.boundary_twists.end()) lt.spec = it->second;
    lt.algebra = B.D;
    const std::string& k = lt.spec.kind;
    if (k == "trivial")
      lt.twist = trivial_[a.bulk];
    else if (k == "r-matrix")
      lt.twist = make_twist(*B.D, *B.D->R, r_inverse(*B.D));
    else if (k == "explicit")
      lt.twist = make_twist(*B.D, lt.spec.F);
    else
      throw ConfigError("/boundary_twists/" + a.id + ": unsupported twist kind '" + k + "'");
    boundary_twists_.push_back(lt);
  }

  for (const auto& d : G.defects) {
    const BulkAlgebra &L = bulks_[d.left], &R = bulks_[d.right];
    LineTwist lt;
    auto it = spec_.defect_twists.find(d.id);
    if (it != spec_.defect_twists.end()) lt.spec = it->second;
    const std::string& k = lt.spec.kind;
    if (k == "transparent") {
      if (L.H->name != R.H->name || L.n() != R.n())
        throw DomainError("defect " + d.id + ": transparent twist needs equal bulk algebras");
      auto T = transparent_twist(*L.D);
      lt.algebra = std::make_shared<const HopfAlgebra<cd>>(T.KK);
      lt.twist = T.twist;
    } else {
      auto K = std::make_shared<const HopfAlgebra<cd>>(tensor_hopf(*L.D, *R.D));
      lt.algebra = K;
      const idx NL = L.D->n, NR = R.D->n, M = NL * NR;
      // R of one factor placed on the legs of that factor
      auto place = [&](const Sparse<cd>& r, bool left) {
        Sparse<cd> out;
        const idx n = left ? NL : NR;
        const Sparse<cd>& other = left ? R.D->unit : L.D->unit;
        for (const auto& [pq, c] : r)
          for (const auto& [u, a] : other)
            for (const auto& [v, b] : other) {
              idx p = pq / n, q = pq % n;
              idx x = left ? p * NR + u : u * NR + p, y = left ? q * NR + v : v * NR + q;
              out.emplace_back(x * M + y, c * a * b);
            }
        canon(out);
        return out;
      };
      if (k == "trivial")
        lt.twist = trivial_twist(*K);
      else if (k == "r-matrix-left")
        lt.twist = make_twist(*K, place(*L.D->R, true), place(r_inverse(*L.D), true));
      else if (k == "r-matrix-right")
        lt.twist = make_twist(*K, place(*R.D->R, false), place(r_inverse(*R.D), false));
      else if (k == "explicit")
        lt.twist = make_twist(*K, lt.spec.F);
      else
        throw ConfigError("/defect_twists/" + d.id + ": unsupported twist kind '" + k + "'");
    }
    defect_twists_.push_back(lt);
  }

  const std::size_t S = g.num_sites();
  site_kind_.resize(S);
  site_bulk_.resize(S);
  defect_site_twist_.resize(S);
  for (std::size_t s = 0; s < S; ++s) {
    site_kind_[s] = site_kind(G, s);
    site_bulk_[s] = site_region(G, s);
  }
  for (std::size_t a = 0; a < G.boundaries.size(); ++a)
    for (auto s : boundary_sites(G, a)) defect_site_twist_[s] = boundary_twists_[a].twist;
  for (std::size_t d = 0; d < G.defects.size(); ++d) {
    pairs_.push_back(defect_site_pairs(G, d));
    const BulkAlgebra &L = bulks_[G.defects[d].left], &R = bulks_[G.defects[d].right];
    const auto& T = defect_twists_[d].twist;
    Twist<cd> TL = make_twist(*L.D, project_twist(*L.D, *R.D, T.F, true), project_twist(*L.D, *R.D, T.Finv, true));
    Twist<cd> TR = make_twist(*R.D, project_twist(*L.D, *R.D, T.F, false), project_twist(*L.D, *R.D, T.Finv, false));
    for (const auto& p : pairs_.back()) {
      defect_site_twist_[p.left] = TL;
      defect_site_twist_[p.right] = TR;
    }
  }
}

bool Model::transparent(std::size_t d) const { return defect_twists_.at(d).spec.kind == "transparent"; }

std::size_t Model::site_bulk(std::size_t site) const {
  if (site >= site_bulk_.size()) throw DomainError("site index " + std::to_string(site) + " out of range");
  if (!site_bulk_[site]) throw DomainError("site " + ribbon().site_name(site) + " lies outside every bulk region");
  return *site_bulk_[site];
}

const Twist<cd>& Model::site_twist(std::size_t site) const {
  std::size_t b = site_bulk(site);
  if (defect_site_twist_[site]) return *defect_site_twist_[site];
  return trivial_[b];
}

// ---------------------------------------------------------------- triangle operators

Model::EdgeCase Model::edge_case(std::size_t b, std::size_t e) const {
  const DefectGraph& G = spec_.graph;
  auto r = *G.edge_region(e);
  switch (r.kind) {
    case EdgeKind::bulk: return r.index == b ? EdgeCase::plain : EdgeCase::scalar;
    case EdgeKind::boundary: return G.boundaries[r.index].bulk == b ? EdgeCase::plain : EdgeCase::scalar;
    case EdgeKind::defect:
      if (G.defects[r.index].left == b) return EdgeCase::left;
      if (G.defects[r.index].right == b) return EdgeCase::right;
      return EdgeCase::scalar;
  }
  return EdgeCase::scalar;
}

std::vector<Sparse<cd>> Model::basic_local(const BulkAlgebra& B, Dir d, idx J) const {
  const HopfAlgebra<cd>& H = *B.H;
  const idx n = H.n, h = J / n, a = J % n;
  const cd a1 = coef_at(H.unit, a), eh = H.counit[h];
  std::vector<Sparse<cd>> cols(n);
  for (idx m = 0; m < n; ++m) {
    Sparse<cd>& c = cols[m];
    switch (d) {
      case Dir::s:
        if (std::abs(a1) > 0) c = scaled(H.mult[m * n + h], a1);
        break;
      case Dir::t:
        if (std::abs(a1) > 0) c = scaled(H.mult[h * n + m], a1);
        break;
      case Dir::R:
        if (std::abs(eh) > 0)
          for (const auto& [pq, w] : H.comult[m])
            if (pq % n == a) c.emplace_back(pq / n, eh * w);
        break;
      case Dir::L:
        if (std::abs(eh) > 0)
          for (const auto& [pq, w] : H.comult[m])
            if (pq / n == a) c.emplace_back(pq % n, eh * w);
        break;
    }
    canon(c);
  }
  return cols;
}

const std::vector<Sparse<cd>>& Model::cached_local(std::size_t b, const Letter& l, idx J) const {
  auto key = std::make_tuple(b, l.edge, int(l.dir), l.inv, J);
  if (auto it = local_cache_.find(key); it != local_cache_.end()) return it->second;
  const BulkAlgebra& B = bulks_[b];
  const std::size_t de = edim_[l.edge], n = B.n();
  auto base = [&](idx j) -> std::vector<Sparse<cd>> {
    switch (edge_case(b, l.edge)) {
      case EdgeCase::plain: return basic_local(B, l.dir, j);
      case EdgeCase::left:
        if (l.dir == Dir::R) return scalar_cols(de, B.Dd->counit[j]);
        return kron_left(basic_local(B, l.dir, j), de / n);
      case EdgeCase::right:
        if (l.dir == Dir::L) return scalar_cols(de, B.Dd->counit[j]);
        return kron_right(de / n, basic_local(B, l.dir, j));
      case EdgeCase::scalar: return scalar_cols(de, B.Dd->counit[j]);
    }
    return {};
  };
  std::vector<Sparse<cd>> cols;
  if (!l.inv) {
    cols = base(J);
  } else {
    cols.resize(de);
    for (const auto& [j, c] : B.Dd->antipode[J]) add_cols(cols, c, base(j));
  }
  for (auto& c : cols) canon(c);
  return local_cache_.emplace(key, std::move(cols)).first->second;
}

std::vector<Sparse<cd>> Model::triangle_local(std::size_t b, const Letter& l, const Sparse<cd>& beta) const {
  if (b >= bulks_.size()) throw DomainError("bulk index out of range");
  if (l.edge >= edim_.size()) throw DomainError("edge index out of range");
  check_element(beta, bulks_[b].Dd->n, "triangle operator argument");
  std::vector<Sparse<cd>> cols(edim_[l.edge]);
  for (const auto& [J, c] : beta) add_cols(cols, c, cached_local(b, l, J));
  for (auto& c : cols) canon(c);
  return cols;
}

Sparse<cd> Model::apply_local(const Sparse<cd>& v, std::size_t e, const std::vector<Sparse<cd>>& cols) const {
  const idx st = stride_[e], de = edim_[e];
  Sparse<cd> out;
  out.reserve(v.size() * 2);
  for (const auto& [i, c] : v) {
    idx d = (i / st) % de, base = i - d * st;
    for (const auto& [r, w] : cols[d]) out.emplace_back(base + r * st, c * w);
  }
  canon(out);
  return out;
}

LinOp<cd> Model::triangle_op(std::size_t b, const Letter& l, const Sparse<cd>& beta) const {
  auto cols = std::make_shared<const std::vector<Sparse<cd>>>(triangle_local(b, l, beta));
  const Model* self = this;
  const std::size_t e = l.edge;
  return LinOp<cd>(space_, dim_, space_, dim_, [self, cols, e](const Sparse<cd>& v) { return self->apply_local(v, e, *cols); });
}

// ---------------------------------------------------------------- holonomies

std::vector<std::size_t> Model::holonomy_order(const ThickPath& p, std::optional<std::size_t> first_split) const {
  const auto& w = p.word;
  const std::size_t n = w.size();
  std::map<std::pair<std::size_t, std::size_t>, std::optional<std::vector<std::size_t>>> memo;
  std::function<std::optional<std::vector<std::size_t>>(std::size_t, std::size_t, bool)> plan =
      [&](std::size_t i, std::size_t j, bool top) -> std::optional<std::vector<std::size_t>> {
    if (j - i == 1) return std::vector<std::size_t>{i};
    if (!top)
      if (auto it = memo.find({i, j}); it != memo.end()) return it->second;
    std::optional<std::vector<std::size_t>> result;
    for (std::size_t k = j - 1; k > i && !result; --k) {
      if (top && first_split && k != *first_split) continue;
      std::vector<Letter> r1(w.begin() + long(i), w.begin() + long(k)), r2(w.begin() + long(k), w.begin() + long(j));
      auto inv1 = inverse_word(r1);
      bool standard = non_crossing(r1, r2) || left_joint(r2, inv1);
      bool swapped = !standard && left_joint(inv1, r2);
      if (!standard && !swapped) continue;
      auto o1 = plan(i, k, false), o2 = plan(k, j, false);
      if (!o1 || !o2) continue;
      std::vector<std::size_t> o = standard ? *o1 : *o2;
      const auto& tail = standard ? *o2 : *o1;
      o.insert(o.end(), tail.begin(), tail.end());
      result = o;
    }
    if (!top) memo[{i, j}] = result;
    return result;
  };
  if (n == 0) return {};
  if (first_split && (*first_split == 0 || *first_split >= n)) throw DomainError("split position out of range");
  auto r = plan(0, n, true);
  if (!r) throw PathError("no admissible decomposition for " + to_string(ribbon(), p));
  return *r;
}

void Model::check_path(std::size_t b, const ThickPath& p) const {
  const RibbonGraph& g = ribbon();
  const DefectGraph& G = spec_.graph;
  if (b >= bulks_.size()) throw DomainError("bulk index out of range");
  if (p.empty()) return;
  if (!is_simple(p)) throw PathError("path " + to_string(g, p) + " is not simple");
  if (vertex_path(g, p.start).word == p.word || inverse(vertex_path(g, p.end)).word == p.word) return;
  for (const auto& l : p.word) {
    auto r = *G.edge_region(l.edge);
    bool side = l.dir == Dir::L || l.dir == Dir::R;
    bool ok = false;
    switch (r.kind) {
      case EdgeKind::bulk: ok = r.index == b; break;
      case EdgeKind::boundary: ok = side && G.boundaries[r.index].bulk == b; break;
      case EdgeKind::defect: ok = side && (G.defects[r.index].left == b || G.defects[r.index].right == b); break;
    }
    if (!ok)
      throw PathError("path " + to_string(g, p) + " is not permissible in bulk " + bulks_[b].id + " at " +
                      to_string(g, l));
  }
}

Sparse<cd> Model::apply_holonomy(std::size_t b, const std::vector<Letter>& w, const std::vector<std::size_t>& order,
                                 const Sparse<cd>& terms, std::size_t k, const Sparse<cd>& v) const {
  const idx N = bulks_[b].Dd->n;
  std::vector<idx> legs(k);
  Sparse<cd> out;
  for (const auto& [t, c] : terms) {
    idx r = t;
    for (std::size_t l = k; l-- > 0;) {
      legs[l] = r % N;
      r /= N;
    }
    Sparse<cd> x = v;
    for (auto it = order.rbegin(); it != order.rend() && !x.empty(); ++it)
      x = apply_local(x, w[*it].edge, cached_local(b, w[*it], legs[*it]));
    axpy(out, c, x);
  }
  canon(out);
  return out;
}

LinOp<cd> Model::holonomy_with_order(std::size_t b, const ThickPath& p, const Sparse<cd>& beta,
                                     const std::vector<std::size_t>& order) const {
  if (b >= bulks_.size()) throw DomainError("bulk index out of range");
  const auto& Dd = *bulks_[b].Dd;
  check_element(beta, Dd.n, "holonomy argument");
  const std::size_t k = p.size();
  if (k == 0) {
    cd e = counit(Dd, beta);
    return LinOp<cd>(space_, dim_, space_, dim_, [e](const Sparse<cd>& v) { return scaled(v, e); });
  }
  if (order.size() != k) throw DomainError("holonomy order has wrong length");
  Sparse<cd> terms = iterated_comul(Dd, beta, k);
  if (terms.size() * k > kTermCap) throw CapacityError("holonomy: " + std::to_string(terms.size()) + " coproduct terms");
  auto st = std::make_shared<const std::tuple<std::vector<Letter>, std::vector<std::size_t>, Sparse<cd>>>(p.word, order,
                                                                                                         terms);
  const Model* self = this;
  return LinOp<cd>(space_, dim_, space_, dim_, [self, st, b, k](const Sparse<cd>& v) {
    return self->apply_holonomy(b, std::get<0>(*st), std::get<1>(*st), std::get<2>(*st), k, v);
  });
}

LinOp<cd> Model::holonomy(std::size_t b, const ThickPath& p, const Sparse<cd>& beta) const {
  check_path(b, p);
  return holonomy_with_order(b, p, beta, holonomy_order(p));
}

// ---------------------------------------------------------------- site actions

const Model::SiteCache& Model::site_cache(std::size_t site) const {
  if (auto it = site_cache_.find(site); it != site_cache_.end()) return it->second;
  const std::size_t b = site_bulk(site);
  const BulkAlgebra& B = bulks_[b];
  const idx n = B.n();
  const RibbonGraph& g = ribbon();
  ThickPath vp = vertex_path(g, site), fp = face_path(g, site);
  auto ov = holonomy_order(vp), of = holonomy_order(fp);
  SiteCache c;
  c.bulk = b;
  auto keep = [&](LinOp<cd> op) {
    if (dim_ <= materialize_cutoff_) return sparse_op(space_, std::make_shared<const SpMat>(to_spmat(op)));
    return op;
  };
  for (idx h = 0; h < n; ++h) {
    Sparse<cd> beta;
    for (idx a = 0; a < n; ++a)
      if (std::abs(B.H->counit[a]) > 0) beta.emplace_back(h * n + a, B.H->counit[a]);
    c.A.push_back(keep(holonomy_with_order(b, vp, beta, ov)));
  }
  for (idx a = 0; a < n; ++a) {
    Sparse<cd> beta;
    for (const auto& [h, u] : B.H->unit) beta.emplace_back(h * n + a, u);
    canon(beta);
    c.B.push_back(keep(holonomy_with_order(b, fp, beta, of)));
  }
  return site_cache_.emplace(site, std::move(c)).first->second;
}

LinOp<cd> Model::vertex_op(std::size_t site, idx h) const {
  const auto& c = site_cache(site);
  if (h >= c.A.size()) throw DomainError("vertex operator: basis index out of range");
  return c.A[h];
}

LinOp<cd> Model::face_op(std::size_t site, idx a) const {
  const auto& c = site_cache(site);
  if (a >= c.B.size()) throw DomainError("face operator: basis index out of range");
  return c.B[a];
}

LinOp<cd> Model::site_op(std::size_t site, const Sparse<cd>& x) const {
  const auto& c = site_cache(site);
  const idx n = bulks_[c.bulk].n();
  check_element(x, n * n, "site action argument");
  // group by the H factor: Σ_h Σ_a x B^a A^h
  std::map<idx, std::vector<std::pair<idx, cd>>> by_h;
  for (const auto& [i, w] : x) by_h[i % n].emplace_back(i / n, w);
  std::vector<std::pair<LinOp<cd>, std::vector<std::pair<cd, LinOp<cd>>>>> plan;
  for (const auto& [h, as] : by_h) {
    std::vector<std::pair<cd, LinOp<cd>>> bs;
    for (const auto& [a, w] : as) bs.emplace_back(w, c.B[a]);
    plan.emplace_back(c.A[h], bs);
  }
  return LinOp<cd>(space_, dim_, space_, dim_, [plan](const Sparse<cd>& v) {
    Sparse<cd> out;
    for (const auto& [A, bs] : plan) {
      Sparse<cd> w = A(v);
      if (w.empty()) continue;
      for (const auto& [c, B] : bs) axpy(out, c, B(w));
    }
    canon(out);
    return out;
  });
}

LinOp<cd> Model::pair_op(std::size_t d, std::size_t k, const Sparse<cd>& x) const {
  const auto& pr = pairs_.at(d).at(k);
  const DefectGraph& G = spec_.graph;
  const idx NL = bulks_[G.defects[d].left].D->n, NR = bulks_[G.defects[d].right].D->n;
  check_element(x, NL * NR, "pair action argument");
  std::map<idx, std::vector<std::pair<idx, cd>>> by_y;
  for (const auto& [i, w] : x) by_y[i % NR].emplace_back(i / NR, w);
  std::vector<std::pair<LinOp<cd>, std::vector<std::pair<cd, LinOp<cd>>>>> plan;
  for (const auto& [y, xs] : by_y) {
    std::vector<std::pair<cd, LinOp<cd>>> ls;
    for (const auto& [X, w] : xs) ls.emplace_back(w, site_op(pr.left, unit_vec<cd>(X)));
    plan.emplace_back(site_op(pr.right, unit_vec<cd>(y)), ls);
  }
  return LinOp<cd>(space_, dim_, space_, dim_, [plan](const Sparse<cd>& v) {
    Sparse<cd> out;
    for (const auto& [R, ls] : plan) {
      Sparse<cd> w = R(v);
      if (w.empty()) continue;
      for (const auto& [c, L] : ls) axpy(out, c, L(w));
    }
    canon(out);
    return out;
  });
}

// ---------------------------------------------------------------- protected space, excitations

LinOp<cd> Model::site_projector(std::size_t site) const { return site_op(site, bulks_[site_bulk(site)].lambda_D); }

LinOp<cd> Model::protected_projector() const {
  if (dim_ > kDenseCutoff)
    throw CapacityError("protected projector: dimension " + std::to_string(dim_) + " over cutoff");
  std::vector<LinOp<cd>> ps;
  for (std::size_t s = 0; s < site_bulk_.size(); ++s)
    if (site_bulk_[s]) ps.push_back(site_projector(s));
  if (ps.empty()) return identity();
  return chain(ps);
}

std::size_t Model::protected_dim() const {
  auto P = protected_projector();
  if (dim_ <= 1024) return rank(P);
  double tr = 0;
  for (idx j = 0; j < dim_; ++j) tr += coef_at(P.column(j), j).real();
  return std::size_t(std::llround(tr));
}

const IrrepTable& Model::irreps(std::size_t b) const {
  if (auto it = irreps_.find(b); it != irreps_.end()) return it->second;
  return irreps_.emplace(b, irreducibles(bulks_.at(b).D)).first->second;
}

LinOp<cd> Model::excitation_projector(const std::vector<std::pair<std::size_t, Module>>& ex) const {
  const RibbonGraph& g = ribbon();
  for (std::size_t i = 0; i < ex.size(); ++i)
    for (std::size_t j = i + 1; j < ex.size(); ++j)
      if (ex[i].first == ex[j].first || !g.disjoint(ex[i].first, ex[j].first))
        throw DomainError("excitation sites " + g.site_name(ex[i].first) + " and " + g.site_name(ex[j].first) +
                          " are not disjoint");
  std::vector<LinOp<cd>> ops;
  for (const auto& [s, M] : ex) {
    std::size_t b = site_bulk(s);
    const auto& D = *bulks_[b].D;
    if (!M.H || M.H->n != D.n || M.H->name != D.name)
      throw DomainError("excitation at " + g.site_name(s) + ": module is not over " + D.name);
    const auto& T = irreps(b);
    Sparse<cd> e;
    for (std::size_t i = 0; i < T.size(); ++i)
      if (intertwiner_dim(T.irreps[i], M) > 0) axpy(e, cd(1), T.central_idempotents[i]);
    canon(e);
    ops.push_back(site_op(s, e));
  }
  if (ops.empty()) return identity();
  return chain(ops);
}

// ---------------------------------------------------------------- twisted holonomies, transport

std::vector<Model::EndTerm> Model::end_terms(std::size_t b, std::size_t site, EndSide side) const {
  const DefectGraph& G = spec_.graph;
  if (site_bulk(site) != b) throw PathError("endpoint " + ribbon().site_name(site) + " is not in bulk " + bulks_[b].id);
  const auto& D = *bulks_[b].D;
  std::vector<EndTerm> out;
  switch (site_kind_[site]) {
    case SiteKind::boundary: {
      const idx N = D.n;
      for (const auto& [ij, c] : defect_site_twist_[site]->Finv) {
        idx x = ij / N, y = ij % N;
        if (side == EndSide::right) std::swap(x, y);
        out.push_back({c, unit_vec<cd>(x), site_op(site, unit_vec<cd>(y))});
      }
      return out;
    }
    case SiteKind::defect: {
      for (std::size_t d = 0; d < G.defects.size(); ++d)
        for (std::size_t k = 0; k < pairs_[d].size(); ++k) {
          const auto& pr = pairs_[d][k];
          if (pr.left != site && pr.right != site) continue;
          const auto &L = *bulks_[G.defects[d].left].D, &R = *bulks_[G.defects[d].right].D;
          const idx NR = R.n, M = L.n * R.n;
          const bool left = pr.left == site;
          for (const auto& [XY, c] : defect_twists_[d].twist.Finv) {
            idx X = XY / M, Y = XY % M;
            if (side == EndSide::right) std::swap(X, Y);
            idx xl = X / NR, xr = X % NR;
            cd w = left ? R.counit[xr] : L.counit[xl];
            if (std::abs(w) == 0) continue;
            out.push_back({c * w, unit_vec<cd>(left ? xl : xr), pair_op(d, k, unit_vec<cd>(Y))});
          }
          return out;
        }
      throw DomainError("defect site without a pair");
    }
    default:
      out.push_back({1.0, D.unit, identity()});
      return out;
  }
}

LinOp<cd> Model::twisted_holonomy(std::size_t b, const ThickPath& p, const Sparse<cd>& beta) const {
  check_path(b, p);
  if (p.empty()) throw PathError("twisted holonomy needs a non-empty path");
  check_element(beta, bulks_[b].Dd->n, "holonomy argument");
  const auto& D = *bulks_[b].D;
  auto order = holonomy_order(p);
  auto st = end_terms(b, p.start, start_side(p));
  auto en = end_terms(b, p.end, end_side(p));
  std::vector<std::pair<cd, LinOp<cd>>> terms;
  for (const auto& s : st)
    for (const auto& t : en) {
      Sparse<cd> arg = coreg_left(D, s.x, coreg_right(D, beta, antipode(D, t.x)));
      if (arg.empty()) continue;
      terms.emplace_back(s.c * t.c, chain<cd>({holonomy_with_order(b, p, arg, order), s.op, t.op}));
    }
  return linear_combination(terms, space_, dim_);
}

LinOp<cd> Model::transport(const ThickPath& p) const {
  if (p.empty()) throw PathError("transport needs a non-empty path");
  const std::size_t s1 = p.start, s2 = p.end;
  const std::size_t b = site_bulk(s1);
  if (site_bulk(s2) != b)
    throw PathError("transport from " + ribbon().site_name(s1) + " to " + ribbon().site_name(s2) + " crosses a defect");
  if (!ribbon().disjoint(s1, s2)) throw DomainError("transport endpoints are not disjoint");
  check_path(b, p);
  const BulkAlgebra& B = bulks_[b];
  const auto& D = *B.D;
  const idx N = D.n;
  const bool right = end_side(p) == EndSide::right;
  auto order = holonomy_order(p);
  std::vector<std::pair<cd, LinOp<cd>>> terms;
  for (const auto& [ij, c] : site_twist(s2).Finv) {
    idx x = ij / N, y = ij % N;
    if (!right) std::swap(x, y);
    Sparse<cd> arg = coreg_right(D, B.integral_D, antipode(D, unit_vec<cd>(y)));
    if (arg.empty()) continue;
    terms.emplace_back(c, compose(holonomy_with_order(b, p, arg, order), site_op(s2, unit_vec<cd>(x))));
  }
  return compose(site_projector(s1), linear_combination(terms, space_, dim_));
}

// ---------------------------------------------------------------- transparent defect removal

RemovalResult Model::remove_transparent_defect(std::size_t d) const {
  const DefectGraph& G = spec_.graph;
  const RibbonGraph& g = G.graph;
  if (d >= G.defects.size()) throw DomainError("defect index out of range");
  if (!transparent(d)) throw DomainError("defect " + G.defects[d].id + " is not transparent");
  const auto& line = G.defects[d];
  std::set<std::size_t> gone(line.edges.begin(), line.edges.end());
  const std::string Lid = G.bulks[line.left].id, Rid = G.bulks[line.right].id;

  nlohmann::json j = to_json(G);
  for (auto& v : j["vertices"]) {
    auto& co = v["cyclic_order"];
    std::size_t cil = v["cilium_index"].get<std::size_t>(), deg = co.size();
    nlohmann::json keep = nlohmann::json::array();
    std::vector<bool> kept(deg);
    for (std::size_t k = 0; k < deg; ++k) {
      std::string end = co[k].get<std::string>();
      kept[k] = !gone.count(g.edge_index(end.substr(0, end.rfind('_'))));
      if (kept[k]) keep.push_back(end);
    }
    std::size_t first = cil;
    for (std::size_t t = 0; t < deg && !kept[first]; ++t) first = (first + 1) % deg;
    std::size_t pos = 0;
    for (std::size_t k = 0; k < first; ++k) pos += kept[k] ? 1 : 0;
    v["cilium_index"] = keep.empty() ? 0 : pos;
    co = keep;
  }
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& e : j["edges"])
    if (!gone.count(g.edge_index(e["id"].get<std::string>()))) edges.push_back(e);
  j["edges"] = edges;
  auto& bulk = j["regions"]["bulk"];
  for (const auto& e : bulk[Rid]) bulk[Lid].push_back(e);
  bulk.erase(Rid);
  for (auto& a : j["regions"]["boundary"])
    if (a["bulk"] == Rid) a["bulk"] = Lid;
  nlohmann::json defects = nlohmann::json::array();
  for (auto x : j["regions"]["defect"]) {
    if (x["id"] == line.id) continue;
    if (x["left"] == Rid) x["left"] = Lid;
    if (x["right"] == Rid) x["right"] = Lid;
    defects.push_back(x);
  }
  j["regions"]["defect"] = defects;

  ModelSpec ns;
  ns.name = spec_.name + "-without-" + line.id;
  ns.graph = defect_graph_from_json(j);
  ns.algebras = spec_.algebras;
  ns.algebras.erase(Rid);
  ns.algebra_src = spec_.algebra_src;
  ns.algebra_src.erase(Rid);
  ns.boundary_twists = spec_.boundary_twists;
  ns.defect_twists = spec_.defect_twists;
  ns.defect_twists.erase(line.id);
  // pinned instances refer to the old edges
  RemovalResult res;
  res.model = std::make_shared<Model>(std::move(ns));
  const Model& M2 = *res.model;
  const RibbonGraph& g2 = M2.ribbon();

  // ∫(m S(n)) per defect-edge basis state
  const BulkAlgebra& B = bulks_[line.left];
  const HopfAlgebra<cd>& H = *B.H;
  const idx n = H.n;
  std::vector<cd> w(n * n, 0.0);
  for (idx m = 0; m < n; ++m)
    for (idx q = 0; q < n; ++q)
      for (const auto& [r, c] : mul(H, unit_vec<cd>(m), H.antipode[q])) w[m * n + q] += c * coef_at(B.integral_H, r);
  std::vector<std::pair<std::size_t, std::size_t>> kept;  // (old edge, new edge)
  for (std::size_t e = 0; e < g.edges().size(); ++e)
    if (!gone.count(e)) kept.emplace_back(e, g2.edge_index(g.edges()[e].id));
  auto self = this;
  auto m2 = res.model;
  std::vector<std::size_t> dropped(line.edges.begin(), line.edges.end());
  res.map = LinOp<cd>::from_basis(space_, dim_, M2.space(), M2.dim(), [self, m2, kept, dropped, w](idx i) {
    cd c = 1.0;
    for (auto e : dropped) {
      c *= w[(i / self->stride(e)) % self->edge_dim(e)];
      if (std::abs(c) == 0) return Sparse<cd>{};
    }
    idx o = 0;
    for (const auto& [e, e2] : kept) o += ((i / self->stride(e)) % self->edge_dim(e)) * m2->stride(e2);
    return unit_vec<cd>(o, c);
  });

  for (const auto& pr : pairs_[d]) {
    const auto& V = g.vertices()[pr.vertex];
    const std::size_t deg = V.order.size();
    std::size_t pout = deg;
    for (std::size_t k = 0; k < deg; ++k)
      if (V.order[k].out && gone.count(V.order[k].edge)) pout = k;
    std::size_t q = pout;
    for (std::size_t t = 0; t < deg; ++t) {
      q = (q + deg - 1) % deg;
      if (!gone.count(V.order[q].edge)) break;
    }
    std::size_t pos = 0;
    for (std::size_t k = 0; k < q; ++k) pos += gone.count(V.order[k].edge) ? 0 : 1;
    res.merged_site.push_back(g2.corner(g2.vertex_index(V.id), long(pos)));
  }
  return res;
}

// ---------------------------------------------------------------- JSON

namespace {

std::vector<std::vector<int>> table_from_json(const nlohmann::json& t, const std::string& ptr) {
  if (!t.is_array() || t.empty()) throw ConfigError(ptr + ": expected a square array");
  std::vector<std::vector<int>> out;
  for (std::size_t r = 0; r < t.size(); ++r) {
    if (!t[r].is_array() || t[r].size() != t.size()) throw ConfigError(ptr + "/" + std::to_string(r) + ": row length");
    std::vector<int> row;
    for (std::size_t c = 0; c < t[r].size(); ++c) {
      if (!t[r][c].is_number_integer())
        throw ConfigError(ptr + "/" + std::to_string(r) + "/" + std::to_string(c) + ": expected an integer");
      row.push_back(t[r][c].get<int>());
    }
    out.push_back(row);
  }
  return out;
}

TwistSpec twist_from_json(const nlohmann::json& j, const std::string& ptr) {
  TwistSpec t;
  if (j.is_string()) {
    t.kind = j.get<std::string>();
  } else if (j.is_object()) {
    if (!j.contains("kind") || !j["kind"].is_string()) throw ConfigError(ptr + "/kind: missing");
    t.kind = j["kind"].get<std::string>();
    if (t.kind == "explicit") {
      if (!j.contains("terms") || !j["terms"].is_array()) throw ConfigError(ptr + "/terms: missing");
      if (!j.contains("dim") || !j["dim"].is_number_unsigned()) throw ConfigError(ptr + "/dim: missing");
      const idx N = j["dim"].get<idx>();
      for (std::size_t k = 0; k < j["terms"].size(); ++k) {
        const auto& x = j["terms"][k];
        std::string p = ptr + "/terms/" + std::to_string(k);
        if (!x.is_array() || x.size() < 3 || !x[0].is_number_unsigned() || !x[1].is_number_unsigned() ||
            !x[2].is_number() || (x.size() > 3 && !x[3].is_number()))
          throw ConfigError(p + ": expected [i, j, re, im]");
        idx a = x[0].get<idx>(), b = x[1].get<idx>();
        if (a >= N || b >= N) throw ConfigError(p + ": index outside dim");
        t.F.emplace_back(a * N + b, cd(x[2].get<double>(), x.size() > 3 ? x[3].get<double>() : 0.0));
      }
      canon(t.F);
    }
  } else {
    throw ConfigError(ptr + ": expected a string or an object");
  }
  static const std::set<std::string> kinds{"trivial", "transparent", "r-matrix", "r-matrix-left", "r-matrix-right",
                                           "explicit"};
  if (!kinds.count(t.kind)) throw ConfigError(ptr + ": unknown twist kind '" + t.kind + "'");
  return t;
}

nlohmann::json twist_to_json(const TwistSpec& t, std::size_t N) {
  if (t.kind != "explicit") return t.kind;
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& [ij, c] : t.F) terms.push_back({ij / N, ij % N, c.real(), c.imag()});
  return {{"kind", "explicit"}, {"dim", N}, {"terms", terms}};
}

}  // namespace

HopfPtr algebra_from_json(const nlohmann::json& j, const std::string& ptr) {
  try {
    if (j.is_string()) return std::make_shared<const HopfAlgebra<cd>>(named_group_algebra<cd>(j.get<std::string>()));
    if (j.is_object()) {
      if (!j.contains("table")) throw ConfigError(ptr + "/table: missing");
      std::string name = j.contains("name") && j["name"].is_string() ? j["name"].get<std::string>() : "C[G]";
      return std::make_shared<const HopfAlgebra<cd>>(group_algebra<cd>(name, table_from_json(j["table"], ptr + "/table")));
    }
  } catch (const StructureError& e) {
    throw ConfigError(ptr + ": " + std::string(e.what()).substr(std::string("StructureError: ").size()));
  }
  throw ConfigError(ptr + ": expected a group name or an object with a table");
}

ModelSpec model_spec_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError(": expected an object");
  ModelSpec s;
  s.name = j.contains("name") && j["name"].is_string() ? j["name"].get<std::string>() : "model";
  if (!j.contains("graph")) throw ConfigError("/graph: missing");
  s.graph = defect_graph_from_json(j["graph"], "/graph");
  if (!j.contains("algebras") || !j["algebras"].is_object()) throw ConfigError("/algebras: missing");
  for (const auto& b : s.graph.bulks) {
    if (!j["algebras"].contains(b.id)) throw ConfigError("/algebras/" + b.id + ": missing");
    s.algebra_src[b.id] = j["algebras"][b.id];
    s.algebras[b.id] = algebra_from_json(j["algebras"][b.id], "/algebras/" + b.id);
  }
  for (const char* key : {"boundary_twists", "defect_twists"}) {
    if (!j.contains(key)) continue;
    if (!j[key].is_object()) throw ConfigError(std::string("/") + key + ": expected an object");
    const bool boundary = std::string(key) == "boundary_twists";
    auto& dst = boundary ? s.boundary_twists : s.defect_twists;
    for (auto it = j[key].begin(); it != j[key].end(); ++it) {
      std::string p = std::string("/") + key + "/" + it.key();
      bool known = false;
      if (boundary) {
        for (const auto& a : s.graph.boundaries) known |= a.id == it.key();
      } else {
        for (const auto& d : s.graph.defects) known |= d.id == it.key();
      }
      if (!known) throw ConfigError(p + ": no such line");
      dst[it.key()] = twist_from_json(it.value(), p);
    }
  }
  if (j.contains("instances")) {
    if (!j["instances"].is_object()) throw ConfigError("/instances: expected an object");
    s.instances = j["instances"];
  }
  return s;
}

ModelSpec load_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return model_spec_from_json(j);
}

std::shared_ptr<Model> load_model(const std::string& path) { return std::make_shared<Model>(load_spec(path)); }

nlohmann::json to_json(const ModelSpec& s) {
  nlohmann::json j;
  j["name"] = s.name;
  j["graph"] = to_json(s.graph);
  j["algebras"] = nlohmann::json::object();
  for (const auto& [id, src] : s.algebra_src) j["algebras"][id] = src;
  auto dimD = [&](const std::string& bulk) { return s.algebras.at(bulk)->n * s.algebras.at(bulk)->n; };
  if (!s.boundary_twists.empty()) {
    j["boundary_twists"] = nlohmann::json::object();
    for (const auto& a : s.graph.boundaries)
      if (auto it = s.boundary_twists.find(a.id); it != s.boundary_twists.end())
        j["boundary_twists"][a.id] = twist_to_json(it->second, dimD(s.graph.bulks[a.bulk].id));
  }
  if (!s.defect_twists.empty()) {
    j["defect_twists"] = nlohmann::json::object();
    for (const auto& d : s.graph.defects)
      if (auto it = s.defect_twists.find(d.id); it != s.defect_twists.end())
        j["defect_twists"][d.id] =
            twist_to_json(it->second, dimD(s.graph.bulks[d.left].id) * dimD(s.graph.bulks[d.right].id));
  }
  if (!s.instances.empty()) j["instances"] = s.instances;
  return j;
}

}  // namespace kdm
