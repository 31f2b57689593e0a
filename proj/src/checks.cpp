#include "kdm/checks.hpp"

#include <algorithm>
#include <chrono>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace kdm {

void Outcome::merge(const Comparison& c) {
  deviation = std::max(deviation, c.max_deviation);
  sampled = sampled || c.sampled;
}

void Outcome::merge(const Outcome& o) {
  deviation = std::max(deviation, o.deviation);
  sampled = sampled || o.sampled;
  precondition_failed = precondition_failed || o.precondition_failed;
  if (!o.detail.empty()) note(o.detail);
}

void Outcome::note(const std::string& s) {
  if (s.empty()) return;
  detail += (detail.empty() ? "" : "; ") + s;
}

namespace {

// all basis elements up to `full`, otherwise k seeded Gaussian elements
std::vector<Sparse<cd>> sample_elems(std::size_t n, Rng& rng, std::size_t k, std::size_t full) {
  std::vector<Sparse<cd>> out;
  if (n <= full) {
    for (idx i = 0; i < n; ++i) out.push_back(unit_vec<cd>(i));
    return out;
  }
  std::normal_distribution<double> N;
  for (std::size_t j = 0; j < k; ++j) {
    Sparse<cd> x;
    for (idx i = 0; i < n; ++i) x.emplace_back(i, cd(N(rng), N(rng)));
    out.push_back(x);
  }
  return out;
}

std::vector<Sparse<cd>> dual_elems(std::size_t n, Rng& rng) { return sample_elems(n, rng, 3, 6); }
std::vector<Sparse<cd>> double_elems(std::size_t n, Rng& rng) { return sample_elems(n, rng, 3, 16); }

Comparison cmp(const LinOp<cd>& a, const LinOp<cd>& b, const CheckOptions& opt) {
  return op_compare(a, b, opt.tol, 4096, 64, opt.seed);
}

LinOp<cd> combo(const Model& M, const std::vector<std::pair<cd, LinOp<cd>>>& terms) {
  return linear_combination(terms, M.space(), M.dim());
}

LinOp<cd> times(const Model& M, cd c, const LinOp<cd>& op) { return combo(M, {{c, op}}); }

// Σ c · f(e_i, e_j) over the terms of a two-leg tensor
template <class F>
void for_legs(const Sparse<cd>& X, idx N, F&& f) {
  for (const auto& [ij, c] : X) f(c, unit_vec<cd>(ij / N), unit_vec<cd>(ij % N));
}

bool is_subword(const std::vector<Letter>& needle, const std::vector<Letter>& hay) {
  if (needle.empty()) return true;
  return std::search(hay.begin(), hay.end(), needle.begin(), needle.end()) != hay.end();
}

const char* side_name(EndSide s) { return s == EndSide::left ? "L" : "R"; }

}  // namespace

// ---------------------------------------------------------------- holonomy identities

Outcome holonomy_identity(const Model& M, const std::string& kind, const std::vector<ThickPath>& ps,
                          const CheckOptions& opt, Rng& rng) {
  Outcome out;
  const RibbonGraph& g = M.ribbon();
  static const std::map<std::string, std::size_t> arity{
      {"decomposition", 1}, {"non-overlap", 2},  {"reversal", 1},     {"left-right", 1},         {"right-left", 1},
      {"left-left", 1},     {"right-right", 1},  {"left-joint", 2},   {"right-joint", 2},        {"middle-joint", 2},
      {"ribbon-commutators", 1}, {"fusion-blocks", 1}, {"twisted-bulk", 1}};
  auto ar = arity.find(kind);
  if (ar == arity.end()) throw DomainError("unknown holonomy identity '" + kind + "'");
  if (ps.size() != ar->second) throw DomainError(kind + ": expected " + std::to_string(ar->second) + " paths");
  auto pre = [&](bool ok, const std::string& why) {
    if (!ok) {
      out.precondition_failed = true;
      out.note("hypothesis not met: " + why);
    }
    return ok;
  };
  for (const auto& p : ps)
    if (!pre(!p.empty(), "empty path")) return out;

  const std::size_t b = M.site_bulk(ps[0].start);
  const BulkAlgebra& B = M.bulk(b);
  const auto& D = *B.D;
  const auto& Dd = *B.Dd;
  const idx N = D.n;
  auto Hol = [&](const ThickPath& p, const Sparse<cd>& a) { return M.holonomy(b, p, a); };
  auto check = [&](const LinOp<cd>& x, const LinOp<cd>& y) { out.merge(cmp(x, y, opt)); };
  const auto elems = dual_elems(Dd.n, rng);
  const Sparse<cd> R = *D.R, Rinv = r_inverse(D);
  const auto& a = ps[0];

  if (kind == "decomposition") {
    std::vector<std::vector<std::size_t>> orders;
    for (std::size_t k = 1; k < a.size(); ++k) {
      try {
        orders.push_back(M.holonomy_order(a, k));
      } catch (const PathError&) {
      }
    }
    M.check_path(b, a);
    if (orders.empty()) orders.push_back(M.holonomy_order(a));
    for (const auto& x : elems) {
      auto ref = M.holonomy_with_order(b, a, x, orders[0]);
      for (std::size_t i = 1; i < orders.size(); ++i) check(ref, M.holonomy_with_order(b, a, x, orders[i]));
    }
    out.note(std::to_string(orders.size()) + " admissible splits");
    return out;
  }
  if (kind == "reversal") {
    for (const auto& x : elems) check(Hol(inverse(a), x), Hol(a, antipode(Dd, x)));
    return out;
  }
  if (kind == "twisted-bulk") {
    if (!pre(site_kind(M.graph(), a.start) == SiteKind::bulk && site_kind(M.graph(), a.end) == SiteKind::bulk,
             "endpoints are not bulk sites"))
      return out;
    for (const auto& x : elems) check(M.twisted_holonomy(b, a, x), Hol(a, x));
    return out;
  }
  if (kind == "ribbon-commutators") {
    const std::size_t s1 = a.start, s2 = a.end;
    if (!pre(g.disjoint(s1, s2), "endpoints are not disjoint")) return out;
    if (!pre(M.site_bulk(s2) == b, "endpoints in different bulks")) return out;
    const EndSide e1 = start_side(a), e2 = end_side(a);
    out.note(std::string("start ") + side_name(e1) + ", end " + side_name(e2));
    for (const auto& k : double_elems(D.n, rng)) {
      const Sparse<cd> dk = comul(D, k);
      for (const auto& x : elems) {
        auto H = Hol(a, x);
        std::vector<std::pair<cd, LinOp<cd>>> t1, t2;
        for_legs(dk, N, [&](cd c, const Sparse<cd>& k1, const Sparse<cd>& k2) {
          if (e1 == EndSide::right)
            t1.emplace_back(c, compose(Hol(a, coreg_left(D, k2, x)), M.site_op(s1, k1)));
          else
            t1.emplace_back(c, compose(Hol(a, coreg_left(D, k1, x)), M.site_op(s1, k2)));
          if (e2 == EndSide::left)
            t2.emplace_back(c, compose(Hol(a, coreg_right(D, x, antipode(D, k1))), M.site_op(s2, k2)));
          else
            t2.emplace_back(c, compose(Hol(a, coreg_right(D, x, antipode(D, k2))), M.site_op(s2, k1)));
        });
        check(compose(M.site_op(s1, k), H), combo(M, t1));
        check(compose(M.site_op(s2, k), H), combo(M, t2));
      }
    }
    return out;
  }
  if (kind == "fusion-blocks") {
    const std::size_t s1 = a.start, s2 = a.end;
    if (!pre(side_type(a) == SideType::left_right, "not a left-right path")) return out;
    if (!pre(g.disjoint(s1, s2), "endpoints are not disjoint")) return out;
    auto AW = artin_wedderburn_dhdual(*B.H, opt.seed);
    const auto& T = AW.irreps;
    auto vac = compose(M.site_projector(s1), M.site_projector(s2));
    std::normal_distribution<double> Nd;
    for (std::size_t d = 0; d < T.size(); ++d) {
      const MatC& Bk = AW.block_bases[d];
      Eigen::VectorXcd v = Eigen::VectorXcd::Zero(Bk.rows());
      for (Eigen::Index c = 0; c < Bk.cols(); ++c) v += cd(Nd(rng), Nd(rng)) * Bk.col(c);
      Sparse<cd> x;
      for (Eigen::Index i = 0; i < v.size(); ++i)
        if (std::abs(v(i)) > 1e-13) x.emplace_back(idx(i), v(i));
      // dual block: α ◁ S(e_j) = α
      std::optional<std::size_t> dual;
      for (std::size_t j = 0; j < T.size() && !dual; ++j)
        if (sparse_dist(coreg_right(D, x, antipode(D, T.central_idempotents[j])), x) <= 1e-8) dual = j;
      if (!pre(dual.has_value(), "block " + std::to_string(d) + " has no dual block")) return out;
      auto img = compose(Hol(a, x), vac);
      check(compose(M.site_op(s1, T.central_idempotents[d]), img), img);
      check(compose(M.site_op(s2, T.central_idempotents[*dual]), img), img);
    }
    out.note(std::to_string(T.size()) + " blocks");
    return out;
  }

  const SideType st = side_type(a);
  if (kind == "left-right" || kind == "right-left" || kind == "left-left" || kind == "right-right") {
    const std::map<std::string, SideType> want{{"left-right", SideType::left_right},
                                               {"right-left", SideType::right_left},
                                               {"left-left", SideType::left_left},
                                               {"right-right", SideType::right_right}};
    if (!pre(st == want.at(kind), std::string("path is ") + to_string(st))) return out;
    for (const auto& x : elems)
      for (const auto& y : elems) {
        auto lhs = compose(Hol(a, x), Hol(a, y));
        Sparse<cd> arg;
        if (kind == "left-right") {
          arg = mul(Dd, x, y);
        } else if (kind == "right-left") {
          arg = mul(Dd, y, x);
        } else if (kind == "left-left") {
          for_legs(R, N, [&](cd c, const Sparse<cd>& r1, const Sparse<cd>& r2) {
            axpy(arg, c, mul(Dd, coreg_left(D, r2, y), coreg_left(D, r1, x)));
          });
        } else {
          for_legs(Rinv, N, [&](cd c, const Sparse<cd>& r1, const Sparse<cd>& r2) {
            axpy(arg, c, mul(Dd, coreg_left(D, r1, x), coreg_left(D, r2, y)));
          });
        }
        canon(arg);
        check(lhs, Hol(a, arg));
      }
    return out;
  }

  const auto& c2 = ps[1];
  if (!pre(M.site_bulk(c2.start) == b, "paths in different bulks")) return out;
  if (kind == "non-overlap") {
    if (!pre(non_crossing(a.word, c2.word), "paths cross")) return out;
  } else if (kind == "left-joint") {
    if (!pre(left_joint(a.word, c2.word) && a.start != c2.start, "no left joint")) return out;
    if (!pre(end_side(a) == EndSide::right && end_side(c2) == EndSide::right, "paths do not end right of a site"))
      return out;
  } else if (kind == "right-joint") {
    if (!pre(right_joint(a.word, c2.word) && a.end != c2.end, "no right joint")) return out;
    if (!pre(start_side(a) == EndSide::left && start_side(c2) == EndSide::left,
             "paths do not start left of a site"))
      return out;
  } else if (kind == "middle-joint") {
    if (!pre(middle_joint(a.word, c2.word) && a.start != c2.start && a.end != c2.end, "no middle joint")) return out;
  }
  for (const auto& x : elems)
    for (const auto& y : elems) {
      auto lhs = compose(Hol(a, x), Hol(c2, y));
      if (kind == "non-overlap" || kind == "middle-joint") {
        check(lhs, compose(Hol(c2, y), Hol(a, x)));
      } else {
        std::vector<std::pair<cd, LinOp<cd>>> terms;
        if (kind == "left-joint")
          for_legs(Rinv, N, [&](cd c, const Sparse<cd>& r1, const Sparse<cd>& r2) {
            terms.emplace_back(c, compose(Hol(c2, coreg_right(D, y, r2)), Hol(a, coreg_right(D, x, r1))));
          });
        else
          for_legs(R, N, [&](cd c, const Sparse<cd>& r1, const Sparse<cd>& r2) {
            terms.emplace_back(c, compose(Hol(c2, coreg_left(D, r2, y)), Hol(a, coreg_left(D, r1, x))));
          });
        check(lhs, combo(M, terms));
      }
    }
  return out;
}

// ---------------------------------------------------------------- transport identities

Outcome fusion_identity(const Model& M, const ThickPath& rho, const CheckOptions& opt, Rng& rng) {
  Outcome out;
  const std::size_t s1 = rho.start, s2 = rho.end, b = M.site_bulk(s1);
  const auto& D = *M.bulk(b).D;
  const idx N = D.n;
  const Twist<cd>& F = M.site_twist(s2);
  const bool right = end_side(rho) == EndSide::right;
  out.note(std::string("ends ") + (right ? "R" : "L") + " of a " + to_string(site_kind(M.graph(), s2)) + " site");
  auto T = M.transport(rho);
  for (const auto& k : double_elems(D.n, rng)) {
    out.merge(cmp(compose(M.site_op(s1, k), T), times(M, counit(D, k), T), opt));
    Sparse<cd> dF = mul_k(D, 2, mul_k(D, 2, F.F, comul(D, k)), F.Finv);
    std::vector<std::pair<cd, LinOp<cd>>> terms;
    for_legs(dF, N, [&](cd c, const Sparse<cd>& x, const Sparse<cd>& y) {
      if (right)
        terms.emplace_back(c, chain<cd>({T, M.site_op(s2, x), M.site_op(s1, y)}));
      else
        terms.emplace_back(c, chain<cd>({T, M.site_op(s1, x), M.site_op(s2, y)}));
    });
    out.merge(cmp(compose(M.site_op(s2, k), T), combo(M, terms), opt));
  }
  return out;
}

Outcome associativity_identity(const Model& M, const ThickPath& rho, const ThickPath& gamma, const CheckOptions& opt,
                               Rng&) {
  Outcome out;
  const RibbonGraph& g = M.ribbon();
  const std::size_t s0 = gamma.start, s1 = gamma.end, s2 = rho.end;
  auto pre = [&](bool ok, const std::string& why) {
    if (!ok) {
      out.precondition_failed = true;
      out.note("hypothesis not met: " + why);
    }
    return ok;
  };
  if (!pre(rho.start == s1, "paths do not compose")) return out;
  ThickPath rg = compose(g, rho, gamma);
  if (!pre(end_side(gamma) == EndSide::right && end_side(rg) == EndSide::right, "gamma or rho∘gamma ends left"))
    return out;
  const auto rinv = inverse(rho).word;
  std::string which;
  if (start_side(rho) == EndSide::left)
    which = "rho starts left";
  else if (left_joint(gamma.word, rinv))
    which = "left joint";
  else if (is_subword(rinv, gamma.word))
    which = "subpath";
  if (!pre(!which.empty(), "none of the three constellations")) return out;
  out.note(which);
  const std::size_t b = M.site_bulk(s1);
  const auto& D = *M.bulk(b).D;
  const idx N = D.n;
  const Twist<cd>& F = M.site_twist(s2);
  const Twist<cd>& G = M.site_twist(s1);
  const bool same = sparse_dist(F.F, G.F) <= opt.tol;
  const bool g_trivial = sparse_dist(G.F, tensor(D.unit, D.unit, N)) <= opt.tol;
  if (!pre(same || g_trivial, "twists at s1 and s2 differ and the one at s1 is not trivial")) return out;
  auto lhs = compose(M.transport(rg), M.transport(rho));
  LinOp<cd> rhs = compose(M.transport(rho), M.transport(gamma));
  if (!same) {
    out.note("bulk to line");
    std::vector<std::pair<cd, LinOp<cd>>> terms;
    for_legs(F.Finv, N, [&](cd c, const Sparse<cd>& f1, const Sparse<cd>& f2) {
      terms.emplace_back(c, chain<cd>({rhs, M.site_op(s0, f2), M.site_op(s1, f1)}));
    });
    rhs = combo(M, terms);
  }
  out.merge(cmp(lhs, rhs, opt));
  return out;
}

Outcome braiding_identity(const Model& M, const ThickPath& rho, const CheckOptions& opt, Rng&) {
  Outcome out;
  const RibbonGraph& g = M.ribbon();
  if (start_side(rho) != EndSide::left || end_side(rho) != EndSide::right) {
    out.precondition_failed = true;
    out.note("hypothesis not met: path must start left and end right");
    return out;
  }
  const std::size_t s1 = rho.start, s2 = rho.end, b = M.site_bulk(s1);
  const auto& D = *M.bulk(b).D;
  const idx N = D.n;
  const Twist<cd>& F = M.site_twist(s2);
  Sparse<cd> F21 = permute_legs(F.F, N, {1, 0});
  Sparse<cd> RF = mul_k(D, 2, mul_k(D, 2, F21, *D.R), F.Finv);
  auto rho2 = compose(g, inverse(face_path(g, s2)), rho);
  auto T = M.transport(rho);
  std::vector<std::pair<cd, LinOp<cd>>> terms;
  for_legs(RF, N, [&](cd c, const Sparse<cd>& r1, const Sparse<cd>& r2) {
    terms.emplace_back(c, chain<cd>({T, M.site_op(s1, r1), M.site_op(s2, r2)}));
  });
  out.note("at a " + std::string(to_string(site_kind(M.graph(), s2))) + " site");
  out.merge(cmp(M.transport(rho2), combo(M, terms), opt));
  return out;
}

// ---------------------------------------------------------------- site actions

Outcome module_law(const Model& M, const CheckOptions& opt, Rng& rng) {
  Outcome out;
  std::size_t n = 0;
  for (std::size_t s = 0; s < M.ribbon().num_sites(); ++s) {
    if (site_kind(M.graph(), s) == SiteKind::exterior) continue;
    const auto& D = *M.bulk(M.site_bulk(s)).D;
    auto xs = sample_elems(D.n, rng, 2, 0), ys = sample_elems(D.n, rng, 2, 0);
    for (std::size_t i = 0; i < xs.size(); ++i)
      out.merge(cmp(M.site_op(s, mul(D, xs[i], ys[i])), compose(M.site_op(s, xs[i]), M.site_op(s, ys[i])), opt));
    out.merge(cmp(M.site_op(s, D.unit), M.identity(), opt));
    ++n;
  }
  out.note(std::to_string(n) + " sites");
  return out;
}

Outcome pair_module_law(const Model& M, const CheckOptions& opt, Rng& rng) {
  Outcome out;
  std::size_t n = 0;
  for (std::size_t d = 0; d < M.graph().defects.size(); ++d) {
    const auto& K = *M.defect_twist(d).algebra;
    for (std::size_t k = 0; k < M.pairs(d).size(); ++k) {
      auto xs = sample_elems(K.n, rng, 2, 0), ys = sample_elems(K.n, rng, 2, 0);
      for (std::size_t i = 0; i < xs.size(); ++i)
        out.merge(cmp(M.pair_op(d, k, mul(K, xs[i], ys[i])), compose(M.pair_op(d, k, xs[i]), M.pair_op(d, k, ys[i])),
                      opt));
      out.merge(cmp(M.pair_op(d, k, K.unit), M.identity(), opt));
      ++n;
    }
  }
  if (n == 0) {
    out.skipped = true;
    out.note("no defect lines");
  } else {
    out.note(std::to_string(n) + " site pairs");
  }
  return out;
}

Outcome disjoint_commutation(const Model& M, const CheckOptions& opt, Rng& rng) {
  Outcome out;
  const auto& g = M.ribbon();
  std::set<std::pair<std::size_t, std::size_t>> todo;
  std::vector<std::size_t> live;
  for (std::size_t s = 0; s < g.num_sites(); ++s)
    if (site_kind(M.graph(), s) != SiteKind::exterior) live.push_back(s);
  for (std::size_t i = 0; i < live.size(); ++i)
    for (std::size_t j = i + 1; j < live.size(); ++j)
      if (g.disjoint(live[i], live[j])) todo.insert({live[i], live[j]});
  for (std::size_t d = 0; d < M.graph().defects.size(); ++d)
    for (const auto& p : M.pairs(d)) todo.insert({std::min(p.left, p.right), std::max(p.left, p.right)});
  for (const auto& [s, t] : todo) {
    const auto& Ds = *M.bulk(M.site_bulk(s)).D;
    const auto& Dt = *M.bulk(M.site_bulk(t)).D;
    auto x = sample_elems(Ds.n, rng, 1, 0)[0], y = sample_elems(Dt.n, rng, 1, 0)[0];
    auto X = M.site_op(s, x), Y = M.site_op(t, y);
    out.merge(cmp(compose(X, Y), compose(Y, X), opt));
  }
  out.note(std::to_string(todo.size()) + " site pairs");
  return out;
}

// ---------------------------------------------------------------- transparent defects

Outcome removal_intertwiner(const Model& M, std::size_t d, const CheckOptions& opt, Rng& rng) {
  Outcome out;
  auto res = M.remove_transparent_defect(d);
  const Model& M2 = *res.model;
  const auto& D = *M.bulk(M.graph().defects[d].left).D;
  for (std::size_t k = 0; k < M.pairs(d).size(); ++k) {
    const std::size_t s = res.merged_site[k];
    for (const auto& t : double_elems(D.n, rng))
      out.merge(cmp(compose(res.map, M.pair_op(d, k, comul(D, t))), compose(M2.site_op(s, t), res.map), opt));
  }
  out.note(std::to_string(M.pairs(d).size()) + " site pairs");
  return out;
}

double haar_removal_deviation(const HopfAlgebra<cd>& H) {
  const idx n = H.n;
  const Sparse<cd> lambda = haar(H).element;
  const Sparse<cd> in = haar(dual(H)).element;
  auto integral = [&](const Sparse<cd>& x) {
    cd r = 0;
    for (const auto& [i, c] : x)
      for (const auto& [j, w] : in)
        if (i == j) r += c * w;
    return r;
  };
  double dev = 0;
  const Sparse<cd> dl = comul(H, lambda);
  for (idx h = 0; h < n; ++h) {
    Sparse<cd> acc;
    for_legs(dl, n, [&](cd c, const Sparse<cd>& l1, const Sparse<cd>& l2) {
      axpy(acc, c * integral(mul(H, l2, unit_vec<cd>(h))), antipode(H, l1));
    });
    canon(acc);
    dev = std::max(dev, sparse_dist(acc, unit_vec<cd>(h)));
  }
  return dev;
}

// ---------------------------------------------------------------- pinned instances

std::vector<std::vector<ThickPath>> pinned_instances(const Model& M, const std::string& kind) {
  std::vector<std::vector<ThickPath>> out;
  const auto& I = M.spec().instances;
  if (!I.contains(kind)) return out;
  const std::string ptr = "/instances/" + kind;
  if (!I[kind].is_array()) throw ConfigError(ptr + ": expected an array");
  for (std::size_t i = 0; i < I[kind].size(); ++i) {
    const auto& inst = I[kind][i];
    std::vector<ThickPath> ps;
    auto one = [&](const nlohmann::json& x, const std::string& p) {
      if (!x.is_string()) throw ConfigError(p + ": expected a path string");
      try {
        ps.push_back(parse_path(M.ribbon(), x.get<std::string>()));
      } catch (const PathError& e) {
        throw ConfigError(p + ": " + e.what());
      }
    };
    if (inst.is_array()) {
      for (std::size_t k = 0; k < inst.size(); ++k) one(inst[k], ptr + "/" + std::to_string(i) + "/" + std::to_string(k));
    } else {
      one(inst, ptr + "/" + std::to_string(i));
    }
    out.push_back(ps);
  }
  return out;
}

// ---------------------------------------------------------------- suites

namespace {

struct Check {
  std::string id, anchor;
  std::function<Outcome(Rng&)> run;
};

Outcome from_axioms(const AxiomReport& r) {
  Outcome o;
  o.deviation = r.max_deviation();
  std::string bad;
  for (const auto& c : r.checks)
    if (!c.pass) bad += (bad.empty() ? "" : ", ") + c.axiom + (c.detail.empty() ? "" : " (" + c.detail + ")");
  if (!bad.empty()) {
    o.precondition_failed = true;
    o.note("failing: " + bad);
  }
  return o;
}

double integral_deviation(const HopfAlgebra<cd>& A, const Sparse<cd>& l) {
  double dev = std::abs(counit(A, l) - cd(1));
  for (idx i = 0; i < A.n; ++i) {
    auto e = unit_vec<cd>(i);
    dev = std::max(dev, sparse_dist(mul(A, e, l), scaled(l, A.counit[i])));
    dev = std::max(dev, sparse_dist(mul(A, l, e), scaled(l, A.counit[i])));
  }
  return dev;
}

// distinct algebras of the model, by name
std::vector<std::pair<std::string, HopfPtr>> distinct_algebras(const ModelSpec& spec) {
  std::vector<std::pair<std::string, HopfPtr>> out;
  std::set<std::string> seen;
  for (const auto& [id, H] : spec.algebras)
    if (seen.insert(H->name).second) out.emplace_back(H->name, H);
  return out;
}

void hopf_checks(const ModelSpec& spec, std::vector<Check>& cs, const CheckOptions& opt) {
  for (const auto& [name, H] : distinct_algebras(spec)) {
    const std::string p = "hopf." + name + ".";
    cs.push_back({p + "axioms", "axioms of a finite-dimensional Hopf algebra", [H = H, opt](Rng&) {
                    return from_axioms(check_hopf(*H, opt.tol));
                  }});
    auto derived = [&](const std::string& what, std::function<HopfAlgebra<cd>()> make) {
      cs.push_back({p + what, "axioms of a finite-dimensional Hopf algebra", [H = H, make, opt](Rng&) {
                      Outcome o;
                      if (!check_hopf(*H, opt.tol).ok()) {
                        o.skipped = true;
                        o.note("base algebra fails its axioms");
                        return o;
                      }
                      return from_axioms(check_hopf(make(), opt.tol));
                    }});
    };
    derived("dual", [H = H] { return dual(*H); });
    derived("op", [H = H] { return opposite(*H); });
    derived("cop", [H = H] { return coopposite(*H); });
    derived("opcop", [H = H] { return op_coop(*H); });
    derived("double", [H = H] { return drinfeld_double(*H); });
    derived("double-dual", [H = H] { return drinfeld_double_dual(*H); });
  }
}

void double_checks(const ModelSpec& spec, std::vector<Check>& cs, const CheckOptions& opt) {
  for (const auto& [name, H] : distinct_algebras(spec)) {
    const std::string p = "double." + name + ".";
    cs.push_back({p + "quasitriangular", "the Drinfel'd double is quasitriangular", [H = H, opt](Rng&) {
                    return from_axioms(check_quasitriangular(drinfeld_double(*H), opt.tol));
                  }});
    cs.push_back({p + "haar", "normalized Haar integrals of H, H*, D(H) and D(H)*", [H = H](Rng&) {
                    Outcome o;
                    auto D = drinfeld_double(*H);
                    for (const auto& A : {*H, dual(*H), D, drinfeld_double_dual(*H)})
                      o.deviation = std::max(o.deviation, integral_deviation(A, haar(A).element));
                    return o;
                  }});
  }
}

void heisenberg_checks(const ModelSpec& spec, std::vector<Check>& cs, const CheckOptions& opt) {
  for (const auto& [name, H] : distinct_algebras(spec)) {
    const std::string p = "heisenberg." + name + ".";
    cs.push_back({p + "relations", "Heisenberg double relations and cotwists", [H = H, opt](Rng&) {
                    return from_axioms(heisenberg_relations(*H, opt.tol));
                  }});
    cs.push_back({p + "action-span", "the Heisenberg double acts as End(H)", [H = H](Rng&) {
                    Outcome o;
                    const auto acts = heisenberg_action(*H);
                    const Eigen::Index n = Eigen::Index(H->n);
                    MatC span(n * n, Eigen::Index(acts.size()));
                    for (std::size_t i = 0; i < acts.size(); ++i)
                      span.col(Eigen::Index(i)) = Eigen::Map<const Eigen::VectorXcd>(acts[i].data(), n * n);
                    Eigen::FullPivLU<MatC> lu(span);
                    lu.setThreshold(1e-9);
                    const auto r = std::size_t(lu.rank());
                    o.note("rank " + std::to_string(r) + " of " + std::to_string(n * n));
                    if (r != std::size_t(n * n)) o.precondition_failed = true;
                    return o;
                  }});
  }
}

void graph_checks(const ModelSpec& spec, std::vector<Check>& cs) {
  const DefectGraph* G = &spec.graph;
  cs.push_back({"graph.validation", "conditions on a ribbon graph with defects and boundaries", [G](Rng&) {
                  Outcome o;
                  for (const auto& c : validate_defect_graph(*G).conditions)
                    if (!c.pass) {
                      o.precondition_failed = true;
                      o.note(c.name + (c.detail.empty() ? "" : " (" + c.detail + ")"));
                    }
                  return o;
                }});
  cs.push_back({"graph.faces", "faces and thickening of a ribbon graph", [G](Rng&) {
                  Outcome o;
                  const auto& g = G->graph;
                  std::size_t walk = 0;
                  std::vector<int> seen(g.num_sites(), 0);
                  for (const auto& f : g.faces()) {
                    walk += f.walk.size();
                    for (auto s : f.sites) ++seen[s];
                  }
                  if (walk != 2 * g.edges().size()) o.note("face walks cover " + std::to_string(walk) + " edge sides");
                  if (std::any_of(seen.begin(), seen.end(), [](int c) { return c != 1; }))
                    o.note("a site is not in exactly one face");
                  if (g.thicken().size() != 4 * g.edges().size()) o.note("thickening has the wrong size");
                  o.precondition_failed = !o.detail.empty();
                  o.note(std::to_string(g.faces().size()) + " faces");
                  return o;
                }});
  cs.push_back({"graph.site-paths", "vertex and face paths of a site", [G](Rng&) {
                  Outcome o;
                  const auto& g = G->graph;
                  for (std::size_t s = 0; s < g.num_sites(); ++s) {
                    auto v = vertex_path(g, s), f = face_path(g, s);
                    bool ok = is_ribbon(v) && is_ribbon(f) && v.start == s && f.start == s && f.end == s &&
                              (v.empty() || side_type(v) == SideType::right_left) &&
                              side_type(f) == SideType::left_right;
                    if (!ok) {
                      o.precondition_failed = true;
                      o.note("site " + g.site_name(s));
                    }
                  }
                  return o;
                }});
}

const std::vector<std::pair<std::string, std::string>>& lemma_kinds() {
  static const std::vector<std::pair<std::string, std::string>> k{
      {"decomposition", "holonomies do not depend on the decomposition of the path"},
      {"non-overlap", "holonomies along non-crossing paths commute"},
      {"reversal", "holonomy along the reversed path is the holonomy of the antipode"},
      {"left-right", "left-right paths multiply in D(H)*"},
      {"right-left", "right-left paths multiply in D(H)* opposite"},
      {"left-left", "left-left paths multiply in the Heisenberg double"},
      {"right-right", "right-right paths multiply in the opposite Heisenberg double"},
      {"left-joint", "holonomies along a left joint commute up to the R-matrix"},
      {"right-joint", "holonomies along a right joint commute up to the R-matrix"},
      {"middle-joint", "holonomies along a middle joint commute"},
      {"ribbon-commutators", "site actions at the ends of a path commute past its holonomy"},
      {"fusion-blocks", "holonomies of a block of D(H)* create that excitation pair"},
      {"twisted-bulk", "twisted and plain holonomies agree between bulk sites"}};
  return k;
}

}  // namespace

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> s{"hopf-axioms",    "doubles",  "twists",       "heisenberg",    "graph",
                                          "holonomy-lemma", "site-actions", "protected", "fusion", "associativity",
                                          "braiding",       "transparent-removal", "all"};
  return s;
}

bool suite_needs_model(const std::string& suite) {
  static const std::set<std::string> spec_only{"hopf-axioms", "doubles", "heisenberg", "graph"};
  return !spec_only.count(suite);
}

std::vector<CheckResult> run_suite(const ModelSpec& spec, const std::string& suite, const CheckOptions& opt) {
  const auto& names = suite_names();
  if (std::find(names.begin(), names.end(), suite) == names.end()) throw UsageError("unknown suite '" + suite + "'");
  std::vector<std::string> suites;
  if (suite == "all")
    suites.assign(names.begin(), names.end() - 1);
  else
    suites.push_back(suite);

  std::shared_ptr<Model> model;
  auto need_model = [&]() -> const Model& {
    if (!model) model = std::make_shared<Model>(spec);
    return *model;
  };

  std::vector<Check> cs;
  for (const auto& s : suites) {
    if (s == "hopf-axioms") hopf_checks(spec, cs, opt);
    if (s == "doubles") double_checks(spec, cs, opt);
    if (s == "heisenberg") heisenberg_checks(spec, cs, opt);
    if (s == "graph") graph_checks(spec, cs);
    if (!suite_needs_model(s)) continue;
    const Model& M = need_model();
    const Model* m = &M;
    if (s == "twists") {
      auto line = [&](const std::string& id, const LineTwist* lt, bool defect, std::size_t index) {
        const std::string p = "twist." + id + ".";
        cs.push_back({p + "cocycle", "twist condition and counitality", [lt, opt](Rng&) {
                        return from_axioms(twist_check(*lt->algebra, lt->twist.F, lt->twist.Finv, opt.tol));
                      }});
        cs.push_back({p + "twisted-hopf", "a twist gives a quasitriangular Hopf algebra", [lt, opt](Rng&) {
                        auto KF = twist_hopf(*lt->algebra, lt->twist);
                        Outcome o = from_axioms(check_hopf(KF, opt.tol));
                        if (KF.R) o.merge(from_axioms(check_quasitriangular(KF, opt.tol)));
                        return o;
                      }});
        cs.push_back({p + "haar-invariance", "Haar integrals are invariant under twisting", [lt](Rng&) {
                        Outcome o;
                        const auto& K = *lt->algebra;
                        auto KF = twist_hopf(K, lt->twist);
                        o.deviation = std::max(integral_deviation(KF, haar(K).element),
                                               integral_deviation(dual(KF), haar(dual(K)).element));
                        return o;
                      }});
        if (defect)
          cs.push_back({p + "projected", "projected twists at the defect sites", [m, index, opt](Rng&) {
                          Outcome o;
                          const auto& P = m->pairs(index);
                          if (P.empty()) {
                            o.skipped = true;
                            o.note("no site pairs");
                            return o;
                          }
                          for (auto s : {P[0].left, P[0].right}) {
                            const auto& D = *m->bulk(m->site_bulk(s)).D;
                            const auto& T = m->site_twist(s);
                            o.merge(from_axioms(twist_check(D, T.F, T.Finv, opt.tol)));
                          }
                          return o;
                        }});
      };
      const auto& G = M.graph();
      for (std::size_t a = 0; a < G.boundaries.size(); ++a) line(G.boundaries[a].id, &M.boundary_twist(a), false, a);
      for (std::size_t d = 0; d < G.defects.size(); ++d) line(G.defects[d].id, &M.defect_twist(d), true, d);
      if (G.boundaries.empty() && G.defects.empty())
        cs.push_back({"twist.lines", "twists on boundary and defect lines", [](Rng&) {
                        Outcome o;
                        o.skipped = true;
                        o.note("no boundary or defect lines");
                        return o;
                      }});
    }
    if (s == "holonomy-lemma") {
      for (const auto& [kind, anchor] : lemma_kinds()) {
        const std::string k = kind;
        cs.push_back({"holonomy." + k, anchor, [m, k, opt](Rng& rng) {
                        Outcome o;
                        auto inst = pinned_instances(*m, k);
                        if (inst.empty()) {
                          o.skipped = true;
                          o.note("no pinned instance");
                        }
                        for (const auto& ps : inst) o.merge(holonomy_identity(*m, k, ps, opt, rng));
                        return o;
                      }});
      }
    }
    if (s == "site-actions") {
      cs.push_back({"site.module-law", "vertex and face operators define a D(H)-action at a site",
                    [m, opt](Rng& rng) { return module_law(*m, opt, rng); }});
      cs.push_back({"site.pair-module-law", "a pair of defect sites carries a D(H_L)⊗D(H_R)-action",
                    [m, opt](Rng& rng) { return pair_module_law(*m, opt, rng); }});
      cs.push_back({"site.disjoint-commutation", "actions at disjoint sites and at defect site pairs commute",
                    [m, opt](Rng& rng) { return disjoint_commutation(*m, opt, rng); }});
    }
    if (s == "protected") {
      cs.push_back({"protected.projector", "site projectors are commuting idempotents", [m, opt](Rng&) {
                      Outcome o;
                      if (m->dim() > kDenseCutoff) {
                        o.skipped = true;
                        o.note("dimension above the dense cutoff");
                        return o;
                      }
                      std::vector<LinOp<cd>> ps;
                      for (std::size_t s = 0; s < m->ribbon().num_sites(); ++s)
                        if (site_kind(m->graph(), s) != SiteKind::exterior) ps.push_back(m->site_projector(s));
                      for (std::size_t i = 0; i < ps.size(); ++i) {
                        o.merge(cmp(compose(ps[i], ps[i]), ps[i], opt));
                        if (i + 1 < ps.size()) o.merge(cmp(compose(ps[i], ps[i + 1]), compose(ps[i + 1], ps[i]), opt));
                      }
                      auto P = m->protected_projector();
                      o.merge(cmp(compose(P, P), P, opt));
                      return o;
                    }});
      cs.push_back({"protected.rank", "dimension of the protected space", [m](Rng&) {
                      Outcome o;
                      if (m->dim() > kDenseCutoff) {
                        o.skipped = true;
                        o.note("dimension above the dense cutoff");
                        return o;
                      }
                      const std::size_t r = m->protected_dim();
                      o.note("rank " + std::to_string(r));
                      const auto& G = m->graph();
                      if (G.bulks.size() == 1 && G.boundaries.empty() && G.defects.empty()) {
                        const auto& g = m->ribbon();
                        long chi = long(g.vertices().size()) - long(g.edges().size()) + long(g.faces().size());
                        std::optional<std::size_t> expect;
                        if (chi == 2) expect = 1;
                        if (chi == 0) expect = m->irreps(0).size();
                        if (expect) {
                          o.note("expected " + std::to_string(*expect));
                          if (r != *expect) o.precondition_failed = true;
                        }
                      }
                      return o;
                    }});
    }
    auto transport_check = [&](const std::string& id, const std::string& anchor, const std::string& kind) {
      cs.push_back({id, anchor, [m, kind, opt](Rng& rng) {
                      Outcome o;
                      auto inst = pinned_instances(*m, kind);
                      if (inst.empty()) {
                        o.skipped = true;
                        o.note("no pinned instance");
                      }
                      for (const auto& ps : inst) {
                        if (kind == "associativity") {
                          if (ps.size() != 2) throw ConfigError("/instances/associativity: expected [rho, gamma]");
                          o.merge(associativity_identity(*m, ps[0], ps[1], opt, rng));
                        } else {
                          if (ps.size() != 1) throw ConfigError("/instances/" + kind + ": expected one path");
                          o.merge(kind == "transport" ? fusion_identity(*m, ps[0], opt, rng)
                                                      : braiding_identity(*m, ps[0], opt, rng));
                        }
                      }
                      return o;
                    }});
    };
    if (s == "fusion") transport_check("transport.fusion", "transport operators fuse excitations", "transport");
    if (s == "associativity")
      transport_check("transport.associativity", "transport operators are associative", "associativity");
    if (s == "braiding") transport_check("transport.braiding", "transport operators are braided", "braiding");
    if (s == "transparent-removal") {
      const auto& G = M.graph();
      bool any = false;
      for (std::size_t d = 0; d < G.defects.size(); ++d) {
        if (!M.transparent(d)) continue;
        any = true;
        const std::string p = "removal." + G.defects[d].id + ".";
        cs.push_back({p + "intertwiner", "removing a transparent defect intertwines the site actions",
                      [m, d, opt](Rng& rng) { return removal_intertwiner(*m, d, opt, rng); }});
        cs.push_back({p + "site-actions", "site actions after removing a transparent defect", [m, d, opt](Rng& rng) {
                        auto res = m->remove_transparent_defect(d);
                        Outcome o = module_law(*res.model, opt, rng);
                        o.merge(disjoint_commutation(*res.model, opt, rng));
                        return o;
                      }});
      }
      if (!any)
        cs.push_back({"removal.defects", "removing a transparent defect", [](Rng&) {
                        Outcome o;
                        o.skipped = true;
                        o.note("no transparent defect");
                        return o;
                      }});
      // the integral identity enters through the algebras on both sides of a transparent line
      std::map<std::string, HopfPtr> sides;
      for (std::size_t d = 0; d < G.defects.size(); ++d)
        if (M.transparent(d))
          for (auto b : {G.defects[d].left, G.defects[d].right}) sides.emplace(M.bulk(b).H->name, M.bulk(b).H);
      for (const auto& [name, H] : sides)
        cs.push_back({"removal." + name + ".haar-identity", "Haar integral identity used when removing a defect",
                      [H = H](Rng&) {
                        Outcome o;
                        o.deviation = haar_removal_deviation(*H);
                        return o;
                      }});
    }
  }

  std::vector<CheckResult> results;
  for (const auto& c : cs) {
    CheckResult r;
    r.check_id = c.id;
    r.anchor = c.anchor;
    r.seed = opt.seed;
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : c.id) h = (h ^ ch) * 1099511628211ull;
    std::seed_seq sq{std::uint32_t(opt.seed), std::uint32_t(opt.seed >> 32), std::uint32_t(h), std::uint32_t(h >> 32)};
    Rng rng(sq);
    auto t0 = std::chrono::steady_clock::now();
    try {
      Outcome o = c.run(rng);
      r.max_deviation = o.deviation;
      r.detail = o.detail;
      if (o.skipped)
        r.status = "skipped";
      else if (o.precondition_failed || !(o.deviation <= opt.tol))
        r.status = "fail";
      else
        r.status = o.sampled ? "sampled-pass" : "pass";
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      r.status = "fail";
      r.detail = e.what();
    }
    r.wall_time_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    results.push_back(r);
  }
  std::sort(results.begin(), results.end(),
            [](const CheckResult& a, const CheckResult& b) { return a.check_id < b.check_id; });
  return results;
}

bool all_passed(const std::vector<CheckResult>& results) {
  return std::none_of(results.begin(), results.end(), [](const CheckResult& r) { return r.status == "fail"; });
}

nlohmann::json report_json(const ModelSpec& spec, const std::string& suite, const CheckOptions& opt,
                           std::vector<CheckResult> results, bool timings) {
  std::sort(results.begin(), results.end(),
            [](const CheckResult& a, const CheckResult& b) { return a.check_id < b.check_id; });
  nlohmann::json j;
  j["schema"] = kReportSchema;
  j["model"] = spec.name;
  j["suite"] = suite;
  j["tol"] = opt.tol;
  j["seed"] = opt.seed;
  j["notes"] = nlohmann::json::array(
      {"defect edges seen from the right bulk: the L triangle operator acts as the scalar eps(h) alpha(1)"});
  std::map<std::string, int> count;
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& r : results) {
    ++count[r.status];
    checks.push_back({{"check_id", r.check_id},
                      {"paper_anchor", r.anchor},
                      {"status", r.status},
                      {"max_deviation", r.max_deviation},
                      {"wall_time_ms", timings ? r.wall_time_ms : 0.0},
                      {"seed", r.seed},
                      {"detail", r.detail}});
  }
  j["checks"] = checks;
  j["summary"] = count;
  j["ok"] = all_passed(results);
  return j;
}

}  // namespace kdm
