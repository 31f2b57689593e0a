#include "doctest.h"
#include "kdm/graph.hpp"

#include <random>

using namespace kdm;

namespace {

RibbonGraph torus() {
  return RibbonGraph({{"v", {"a_out", "b_out", "a_in", "b_in"}, 0}}, {{"a", "v", "v"}, {"b", "v", "v"}});
}

RibbonGraph square() {
  return RibbonGraph({{"v0", {"e3_in", "e0_out"}, 0},
                      {"v1", {"e0_in", "e1_out"}, 0},
                      {"v2", {"e1_in", "e2_out"}, 0},
                      {"v3", {"e2_in", "e3_out"}, 0}},
                     {{"e0", "v0", "v1"}, {"e1", "v1", "v2"}, {"e2", "v2", "v3"}, {"e3", "v3", "v0"}});
}

// square line v0..v3 with a hub c inside and a hub w outside
nlohmann::json defect_square_json(bool swap_sides = false) {
  nlohmann::json j;
  j["vertices"] = nlohmann::json::array();
  for (int i = 0; i < 4; ++i) {
    std::string s = std::to_string(i), p = std::to_string((i + 3) % 4);
    j["vertices"].push_back({{"id", "v" + s},
                             {"cyclic_order", {"e" + s + "_out", "i" + s + "_out", "e" + p + "_in", "o" + s + "_out"}},
                             {"cilium_index", 0}});
  }
  j["vertices"].push_back({{"id", "c"}, {"cyclic_order", {"i0_in", "i1_in", "i2_in", "i3_in"}}});
  j["vertices"].push_back({{"id", "w"}, {"cyclic_order", {"o3_in", "o2_in", "o1_in", "o0_in"}}});
  j["edges"] = nlohmann::json::array();
  for (int i = 0; i < 4; ++i) {
    std::string s = std::to_string(i);
    j["edges"].push_back({{"id", "e" + s}, {"src", "v" + s}, {"dst", "v" + std::to_string((i + 1) % 4)}});
    j["edges"].push_back({{"id", "i" + s}, {"src", "v" + s}, {"dst", "c"}});
    j["edges"].push_back({{"id", "o" + s}, {"src", "v" + s}, {"dst", "w"}});
  }
  j["regions"]["bulk"] = {{"inner", {"i0", "i1", "i2", "i3"}}, {"outer", {"o0", "o1", "o2", "o3"}}};
  j["regions"]["defect"] = {{{"id", "d"},
                             {"cycle", {"e0", "e1", "e2", "e3"}},
                             {"left", swap_sides ? "outer" : "inner"},
                             {"right", swap_sides ? "inner" : "outer"}}};
  return j;
}

nlohmann::json boundary_square_json() {
  auto j = defect_square_json();
  for (int i = 0; i < 4; ++i) {
    auto& co = j["vertices"][std::size_t(i)]["cyclic_order"];
    co.erase(co.size() - 1);
  }
  j["vertices"].erase(5);
  auto& es = j["edges"];
  for (std::size_t k = es.size(); k-- > 0;)
    if (es[k]["id"].get<std::string>()[0] == 'o') es.erase(k);
  j["regions"] = {{"bulk", {{"inner", {"i0", "i1", "i2", "i3"}}}},
                  {"boundary", {{{"id", "a"}, {"cycle", {"e0", "e1", "e2", "e3"}}, {"bulk", "inner"}}}}};
  return j;
}

}  // namespace

TEST_SUITE("graph") {

TEST_CASE("torus has one face and four-letter site paths") {
  auto g = torus();
  CHECK(g.faces().size() == 1);
  CHECK(g.num_sites() == 4);
  for (std::size_t s = 0; s < g.num_sites(); ++s) {
    CHECK(vertex_path(g, s).size() == 4);
    CHECK(face_path(g, s).size() == 4);
  }
}

TEST_CASE("square cell has two faces") {
  auto g = square();
  CHECK(g.faces().size() == 2);
  std::size_t total = 0;
  for (const auto& f : g.faces()) total += f.walk.size();
  CHECK(total == 2 * g.edges().size());
}

TEST_CASE("univalent edge") {
  RibbonGraph g({{"u", {"e_out"}, 0}, {"v", {"e_in"}, 0}}, {{"e", "u", "v"}});
  CHECK(g.faces().size() == 1);
  CHECK(vertex_path(g, g.parse_site("u")).size() == 1);
  CHECK(face_path(g, 0).size() == 2);
}

TEST_CASE("thickening and site paths") {
  for (const auto& g : {torus(), square()}) {
    auto th = g.thicken();
    CHECK(th.size() == 4 * g.edges().size());
    std::size_t face_len = 0;
    for (const auto& f : g.faces()) face_len += f.walk.size();
    CHECK(face_len == 2 * g.edges().size());
    for (std::size_t s = 0; s < g.num_sites(); ++s) {
      auto v = vertex_path(g, s), f = face_path(g, s);
      CHECK(is_ribbon(v));
      CHECK(is_ribbon(f));
      CHECK(side_type(v) == SideType::right_left);
      CHECK(side_type(f) == SideType::left_right);
      CHECK(v.start == s);
      CHECK(f.start == s);
      CHECK(f.end == s);
    }
  }
}

TEST_CASE("site names") {
  auto g = square();
  CHECK(g.parse_site("v1:1") == g.corner(1, 1));
  CHECK(g.parse_site("v1") == g.corner(1, -1));
  CHECK(g.site_name(g.parse_site("v2:0")) == "v2:0");
  CHECK_THROWS_AS(g.parse_site("v9"), DomainError);
  CHECK_THROWS_AS(g.parse_site("v1:7"), DomainError);
  CHECK(g.disjoint(g.parse_site("v0:0"), g.parse_site("v2:1")));
  CHECK_FALSE(g.disjoint(g.parse_site("v0:0"), g.parse_site("v0:1")));
}

TEST_CASE("parse and shorthand letters") {
  auto g = square();
  auto p = parse_path(g, "e0^d");
  REQUIRE(p.size() == 2);
  CHECK(to_string(g, p) == "e0^t e0^R");
  CHECK(to_string(g, parse_path(g, "e0^-d")) == "e0^-R e0^-t");
  CHECK(to_string(g, parse_path(g, "e0^dbar'")) == "e0^R e0^-s");
  CHECK(p.start == g.s_right(0));
  CHECK(p.end == g.t_left(0));
  CHECK_THROWS_AS(parse_path(g, "e0^t e1^R"), PathError);
  CHECK_THROWS_AS(parse_path(g, "x^t"), PathError);
  CHECK_THROWS_AS(parse_path(g, "e0^q"), PathError);
}

TEST_CASE("reduction is confluent") {
  std::mt19937 rng(7);
  std::uniform_int_distribution<int> pick(0, 5);
  auto letter = [&](int k) { return Letter{std::size_t(k % 2), k / 2 % 2 ? Dir::L : Dir::s, k >= 4}; };
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Letter> a, b;
    for (int i = 0; i < 8; ++i) a.push_back(letter(pick(rng)));
    for (int i = 0; i < 8; ++i) b.push_back(letter(pick(rng)));
    auto ab = a;
    ab.insert(ab.end(), b.begin(), b.end());
    auto ra = reduce(a), rb = reduce(b);
    auto rab = ra;
    rab.insert(rab.end(), rb.begin(), rb.end());
    CHECK(reduce(ab) == reduce(rab));
    CHECK(reduce(reduce(a)) == reduce(a));
  }
}

TEST_CASE("compose and subpath") {
  auto g = square();
  auto a = parse_path(g, "e3^R"), b = parse_path(g, "e0^R");
  auto ab = compose(g, b, a);
  CHECK(to_string(g, ab) == "e0^R e3^R");
  CHECK(subpath(g, ab, 0, 1).end == ab.end);
  CHECK(subpath(g, ab, 1, 2).start == ab.start);
  CHECK_THROWS_AS(compose(g, a, b), PathError);
  auto back = compose(g, inverse(b), b);
  CHECK(back.empty());
}

TEST_CASE("tau omega instance") {
  auto g = square();
  auto tau = parse_path(g, "e0^-L e0^t e1^-R");
  auto omega = parse_path(g, "e0^s e3^R e2^R");
  CHECK(side_type(tau) == SideType::right_right);
  CHECK(is_simple(tau));
  CHECK_FALSE(is_ribbon(tau));
  CHECK(is_d_pair(tau.word[0], tau.word[1]));
  CHECK(side_type(omega) == SideType::left_right);
  CHECK(is_ribbon(omega));
  CHECK(joints(tau, omega) == Joint::left);
  CHECK(tau.end == omega.end);
}

TEST_CASE("joint inversion symmetry") {
  auto g = square();
  std::vector<std::string> ps = {"e0^-L e0^t e1^-R", "e0^s e3^R e2^R", "e0^R e3^R", "e0^-t e1^s", "e0^t",
                                 "e0^R", "e1^-L e1^t", "e0^s", "e3^t e0^-s"};
  for (const auto& x : ps)
    for (const auto& y : ps) {
      auto a = parse_path(g, x), b = parse_path(g, y);
      CHECK(left_joint(a.word, b.word) == right_joint(inverse(a).word, inverse(b).word));
      CHECK(non_crossing(a.word, b.word) == non_crossing(b.word, a.word));
      CHECK(middle_joint(a.word, b.word) == middle_joint(b.word, a.word));
    }
  CHECK(joints(parse_path(g, "e0^R"), parse_path(g, "e1^R")) == Joint::none_cross);
  CHECK(joints(parse_path(g, "e0^R"), parse_path(g, "e0^R")) != Joint::none_cross);
}

TEST_CASE("simple and ribbon") {
  auto g = square();
  CHECK(is_simple(parse_path(g, "e0^d")));
  CHECK_FALSE(is_ribbon(parse_path(g, "e0^d")));
  CHECK(is_ribbon(parse_path(g, "e0^R e3^R")));
  auto c = classify_path(g, parse_path(g, "e0^R e3^R e2^R e1^R"));
  CHECK(c.ribbon);
  CHECK(c.simple);
  CHECK(*c.side == SideType::left_right);
  CHECK_FALSE(c.permissible.has_value());
}

TEST_CASE("malformed cyclic orders") {
  CHECK_THROWS_AS(RibbonGraph({{"v", {"a_out", "a_out"}, 0}}, {{"a", "v", "v"}}), ConfigError);
  CHECK_THROWS_AS(RibbonGraph({{"v", {"a_out"}, 0}}, {{"a", "v", "v"}}), ConfigError);
  CHECK_THROWS_AS(RibbonGraph({{"v", {"a_up", "a_in"}, 0}}, {{"a", "v", "v"}}), ConfigError);
  CHECK_THROWS_AS(RibbonGraph({{"v", {"a_out", "a_in"}, 2}}, {{"a", "v", "v"}}), ConfigError);
  auto j = defect_square_json();
  j["vertices"][0]["cyclic_order"][1] = "i0";
  try {
    defect_graph_from_json(j);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("/vertices/0/cyclic_order/1") != std::string::npos);
  }
}

TEST_CASE("defect graph validation") {
  auto G = defect_graph_from_json(defect_square_json());
  auto rep = validate_defect_graph(G);
  for (const auto& c : rep.conditions) CHECK_MESSAGE(c.pass, c.name << ": " << c.detail);
  CHECK(G.graph.faces().size() == 8);

  auto bad = validate_defect_graph(defect_graph_from_json(defect_square_json(true)));
  CHECK_FALSE(bad.ok());
  CHECK_FALSE(bad.find("defect vertices in both adjacent bulks")->pass);
  CHECK(bad.find("bulk regions connected")->pass);

  auto j = defect_square_json();
  j["regions"]["bulk"]["outer"].push_back("i0");
  auto dup = validate_defect_graph(defect_graph_from_json(j));
  CHECK_FALSE(dup.find("edge in exactly one subgraph")->pass);

  auto back = defect_graph_from_json(to_json(G));
  CHECK(to_json(back) == to_json(G));
}

TEST_CASE("defect pairs and regions") {
  auto G = defect_graph_from_json(defect_square_json());
  const auto& g = G.graph;
  auto pairs = defect_site_pairs(G, 0);
  REQUIRE(pairs.size() == 4);
  for (const auto& p : pairs) {
    CHECK(g.sites()[p.left].corner == 0);
    CHECK(g.sites()[p.right].corner == 3);
    CHECK(*site_region(G, p.left) == G.bulk_index("inner"));
    CHECK(*site_region(G, p.right) == G.bulk_index("outer"));
    CHECK(site_kind(G, p.left) == SiteKind::defect);
  }
  CHECK(*site_region(G, g.parse_site("v0:1")) == G.bulk_index("inner"));
  CHECK(*site_region(G, g.parse_site("v0:2")) == G.bulk_index("outer"));
  CHECK(site_kind(G, g.parse_site("c:0")) == SiteKind::general);
  CHECK(is_permissible(G, parse_path(g, "e0^R")));
  CHECK_FALSE(is_permissible(G, parse_path(g, "e0^t")));
  CHECK(is_permissible(G, parse_path(g, "i0^t")));
}

TEST_CASE("boundary sites") {
  auto G = defect_graph_from_json(boundary_square_json());
  CHECK(validate_defect_graph(G).ok());
  auto bs = boundary_sites(G, 0);
  REQUIRE(bs.size() == 4);
  for (auto s : bs) {
    CHECK(site_kind(G, s) == SiteKind::boundary);
    CHECK(G.graph.sites()[s].corner == 0);
  }
  CHECK_FALSE(site_region(G, G.graph.parse_site("v0:2")).has_value());
  CHECK(site_kind(G, G.graph.parse_site("v0:2")) == SiteKind::exterior);
}

}  // TEST_SUITE
