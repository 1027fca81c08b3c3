#include <doctest.h>

#include "oracles.hpp"
#include "qig/polytope.hpp"
#include "qig/verify.hpp"

using namespace qig;

namespace {

GluingTree star_abcd() { return paper_star(); }

GluingTree parting_tree() {
    UndirectedTree t({"a", "b", "i", "j", "k", "c", "d"},
                     {{"a", "i"}, {"b", "i"}, {"i", "j"}, {"j", "k"}, {"k", "c"}, {"k", "d"}});
    return GluingTree(t, {}, {"j"});
}

std::set<std::string> rendered(const std::vector<LinearConstraint>& cs, const CoordinateSystem& coords) {
    std::set<std::string> out;
    for (const auto& c : cs) out.insert(render_constraint(c, coords));
    return out;
}

std::multiset<NormalizedRow> rows_of(const std::vector<LinearConstraint>& cs, const CoordinateSystem& coords) {
    std::multiset<NormalizedRow> out;
    for (const auto& c : cs) out.insert(normalize(c, coords));
    return out;
}

std::multiset<NormalizedRow> rows_of(const std::vector<std::string>& text) {
    std::multiset<NormalizedRow> out;
    for (const auto& t : text) out.insert(parse_paper_row(t));
    return out;
}

std::string key(const Functional& f, const CoordinateSystem& cs) {
    std::string s;
    for (const auto& [i, v] : f.coeffs) s += v.get_str() + "*" + cs.subsets[i].key() + " ";
    return s;
}

// All orientations of the tree that respect the J constraints, with their realized dense imsets.
std::vector<std::pair<Dag, std::vector<int>>> members(const GluingTree& gt) {
    auto cs = coordinate_system(gt);
    std::vector<std::pair<Dag, std::vector<int>>> out;
    for (const auto& d : enumerate_orientations(gt.tree())) {
        bool ok = true;
        for (const auto& j : gt.J()) {
            int v = d.index(j);
            ok = ok && d.parents(v).size() == 1;
        }
        if (ok) out.emplace_back(d, dense_imset(cs, gt.realize(d)));
    }
    return out;
}

std::vector<GluingTree> small_gluing_trees(uint64_t seed, int count) {
    std::mt19937_64 rng(seed);
    std::vector<GluingTree> out;
    while (static_cast<int>(out.size()) < count) {
        auto t = random_tree(3 + static_cast<int>(out.size()) % 6, rng);
        out.push_back(random_gluing_tree(t, rng, 0.5, out.size() % 2 == 1));
    }
    return out;
}

}  // namespace

TEST_SUITE("polytope") {

TEST_CASE("gluing tree validation") {
    UndirectedTree path({"1", "2", "3"}, {{"1", "2"}, {"2", "3"}});
    CHECK_THROWS(GluingTree(path, {"2"}));          // I must be leaves
    CHECK_THROWS(GluingTree(path, {}, {"1"}));      // J must have degree two
    CHECK_THROWS(GluingTree(star_abcd().tree(), {"a", "c"}));
    UndirectedTree p4({"i", "j", "k", "m"}, {{"i", "j"}, {"j", "k"}, {"k", "m"}});
    CHECK_THROWS(GluingTree(p4, {}, {"j"}));        // white node next to a leaf of T
    CHECK_NOTHROW(parting_tree());
}

TEST_CASE("star inequalities") {
    auto gt = star_abcd();
    auto cs = coordinate_system(gt);
    CHECK(rendered(star_inequalities(gt, cs), cs) ==
          std::set<std::string>{"x_{abc} - x_{abcd} >= 0", "x_{bcd} - x_{abcd} >= 0", "x_{acd} - x_{abcd} >= 0",
                                "x_{abcd} >= 0"});
    auto ex = paper_example();
    auto ce = coordinate_system(ex);
    auto rows = rows_of(star_inequalities(ex, ce), ce);
    auto all_rows = paper_example_rows();
    std::vector<std::string> printed(all_rows.begin(), all_rows.begin() + 12);
    CHECK(rows == rows_of(printed));

    GluingTree path(UndirectedTree({"1", "2", "3"}, {{"1", "2"}, {"2", "3"}}), {});
    auto cp = coordinate_system(path);
    CHECK(rendered(star_inequalities(path, cp), cp) == std::set<std::string>{"x_{123} >= 0"});
}

TEST_CASE("v-structure indicators") {
    auto gt = star_abcd();
    auto cs = coordinate_system(gt);
    const auto& t = gt.tree();
    int a = t.index("a"), c = t.index("c");
    CHECK(key(indicator_v(a, c, gt, cs), cs) == "1*a|b|c 1*a|c|d -1*a|b|c|d ");
    CHECK(key(indicator_v(c, a, gt, cs), cs) == "1*a|a_z|c ");

    // On every member: 1 iff u -> v and v has another parent in the realized graph.
    for (const auto& g : small_gluing_trees(31, 40)) {
        auto co = coordinate_system(g);
        for (const auto& [d, x] : members(g)) {
            Dag r = g.realize(d);
            for (auto [u, v] : g.tree().edges())
                for (auto [h, w] : {std::make_pair(u, v), std::make_pair(v, u)}) {
                    if (!g.internal(w)) continue;
                    int expect = r.has_arc(h, w) && r.parents(w).size() >= 2;
                    CHECK(indicator_v(h, w, g, co).eval(x) == expect);
                }
        }
    }
}

TEST_CASE("bidirected-edge inequalities") {
    auto gt = star_abcd();
    auto cs = coordinate_system(gt);
    CHECK(rows_of(bidirected_edge_inequalities(gt, cs), cs) ==
          rows_of({"(x_{aa'c}) + (x_{abc} + x_{acd} - x_{abcd}) <= 1", "(x_{cdd'}) + (x_{acd} + x_{bcd} - x_{abcd}) <= 1"}));
    auto ex = paper_example();
    auto ce = coordinate_system(ex);
    auto all_rows = paper_example_rows();
    std::vector<std::string> printed(all_rows.begin() + 12, all_rows.begin() + 15);
    CHECK(rows_of(bidirected_edge_inequalities(ex, ce), ce) == rows_of(printed));
    GluingTree path(UndirectedTree({"1", "2", "3"}, {{"1", "2"}, {"2", "3"}}), {});
    CHECK(bidirected_edge_inequalities(path, coordinate_system(path)).empty());
}

TEST_CASE("forced-out indicator") {
    auto ex = paper_example();
    auto ce = coordinate_system(ex);
    CHECK(key(forced_out_functional(ex.tree().index("3"), {}, ex, ce), ce) ==
          "1*1|2|3 1*1|3|4 1*2|3|4 -2*1|2|3|4 ");
    auto gt = star_abcd();
    auto cs = coordinate_system(gt);
    const auto& t = gt.tree();
    CHECK(forced_out_functional(t.index("c"), {t.index("a"), t.index("d")}, gt, cs).coeffs.empty());

    // 1 iff c has at least two parents and none of them in L.
    for (const auto& g : small_gluing_trees(32, 40)) {
        auto co = coordinate_system(g);
        const auto& tr = g.tree();
        for (int c = 0; c < tr.size(); ++c) {
            if (g.white(c) || !g.internal(c)) continue;
            const auto& nb = tr.neighbors(c);
            for (uint32_t m = 0; m < (1U << nb.size()); ++m) {
                std::vector<int> L;
                for (size_t b = 0; b < nb.size(); ++b)
                    if ((m >> b) & 1U) L.push_back(nb[b]);
                Functional f = forced_out_functional(c, L, g, co);
                for (const auto& [d, x] : members(g)) {
                    const auto& pa = d.parents(c);
                    bool none_in_L = std::none_of(pa.begin(), pa.end(), [&](int p) {
                        return std::find(L.begin(), L.end(), p) != L.end();
                    });
                    CHECK(f.eval(x) == (pa.size() >= 2 && none_in_L ? 1 : 0));
                }
            }
        }
    }
}

TEST_CASE("hash functional") {
    auto gt = star_abcd();
    auto cs = coordinate_system(gt);
    const auto& t = gt.tree();
    std::vector<int> sub{t.index("a"), t.index("c"), t.index("d")};
    CHECK(key(hash_functional(t.index("c"), sub, gt, cs), cs) == "1*a|c|d ");
    CHECK(hash_functional(t.index("c"), {t.index("a"), t.index("c")}, gt, cs).coeffs.empty());

    // max(|pa(c) in T'| - 1, 0)
    for (const auto& g : small_gluing_trees(33, 40)) {
        auto co = coordinate_system(g);
        const auto& tr = g.tree();
        for (int c = 0; c < tr.size(); ++c) {
            if (g.white(c)) continue;
            const auto& nb = tr.neighbors(c);
            for (uint32_t m = 0; m < (1U << nb.size()); ++m) {
                std::vector<int> nodes{c};
                for (size_t b = 0; b < nb.size(); ++b)
                    if ((m >> b) & 1U) nodes.push_back(nb[b]);
                Functional f = hash_functional(c, nodes, g, co);
                for (const auto& [d, x] : members(g)) {
                    int inside = 0;
                    for (int p : d.parents(c)) inside += std::find(nodes.begin(), nodes.end(), p) != nodes.end();
                    CHECK(f.eval(x) == std::max(inside - 1, 0));
                }
            }
        }
    }
}

TEST_CASE("forked subtrees") {
    auto gt = star_abcd();
    auto st = enumerate_forked_subtrees(gt);
    REQUIRE(st.size() == 1);
    CHECK(st[0].labels(gt) == std::vector<std::string>{"a", "c", "d"});

    GluingTree path(UndirectedTree({"1", "2", "3"}, {{"1", "2"}, {"2", "3"}}), {});
    auto sp = enumerate_forked_subtrees(path);
    REQUIRE(sp.size() == 1);
    CHECK(sp[0].labels(path) == std::vector<std::string>{"2"});

    // The four subtrees named for the example plus {3,4,8} and {4,5,8}, which the literal
    // conditions also admit and which index facets of the polytope.
    auto ex = paper_example();
    std::set<std::vector<std::string>> got;
    for (const auto& f : enumerate_forked_subtrees(ex)) got.insert(f.labels(ex));
    for (auto named : std::vector<std::vector<std::string>>{{"3"}, {"5"}, {"4", "8"}, {"3", "4", "5", "8"}})
        CHECK(got.count(named) == 1);
    CHECK(got == std::set<std::vector<std::string>>{{"3"}, {"5"}, {"4", "8"}, {"3", "4", "5", "8"}, {"3", "4", "8"},
                                                    {"4", "5", "8"}});

    CHECK_THROWS(enumerate_forked_subtrees(ex, 3));
}

TEST_CASE("forked-tree inequalities") {
    auto gt = star_abcd();
    auto cs = coordinate_system(gt);
    auto f = forked_tree_inequality(enumerate_forked_subtrees(gt)[0], gt, cs);
    CHECK(normalize(f, cs) == parse_paper_row("(1 - x_{aa'c}) + (1 - x_{cdd'}) <= 1 + x_{acd}"));

    // Untargeted star: the singleton {c} gives 1_{c -> empty} <= 1.
    GluingTree s3 = star_tree(3, {});
    auto c3 = coordinate_system(s3);
    auto f3 = enumerate_forked_subtrees(s3);
    REQUIRE(f3.size() == 1);
    auto row = forked_tree_inequality(f3[0], s3, c3);
    Functional expect = forced_out_functional(s3.tree().index("c"), {}, s3, c3);
    CHECK(row.coeffs == expect.coeffs);
    CHECK(row.rhs == 1);
}

TEST_CASE("H-representation sizes") {
    CHECK(h_representation(star_abcd()).inequalities.size() == 7);
    for (int n = 2; n <= 5; ++n)
        for (int k = 0; k <= n; ++k) {
            std::vector<int> targeted;
            for (int i = 0; i < k; ++i) targeted.push_back(i);
            CHECK(h_representation(star_tree(n, targeted)).inequalities.size() == (1U << n) - n + k);
            CHECK(enumerate_vertices(star_tree(n, targeted)).size() == (1U << n) - n + k);
        }
    // 12 star + 3 bidirected + 6 forked-tree rows.
    CHECK(h_representation(paper_example()).inequalities.size() == 21);
}

TEST_CASE("every row holds on every member") {
    for (const auto& g : small_gluing_trees(34, 80)) {
        auto h = h_representation(g);
        for (const auto& [d, x] : members(g)) {
            for (const auto& c : h.inequalities) CHECK(c.satisfied(x));
            for (const auto& c : h.equalities) CHECK(c.satisfied(x));
        }
        CHECK(std::all_of(h.inequalities.begin(), h.inequalities.end(),
                          [&](const LinearConstraint& c) { return c.satisfied(h.feasible_point); }));
    }
}

TEST_CASE("vertex enumeration") {
    GluingTree path(UndirectedTree({"1", "2", "3"}, {{"1", "2"}, {"2", "3"}}), {});
    CHECK(enumerate_vertices(path).size() == 2);
    for (const auto& g : small_gluing_trees(35, 40)) {
        std::set<std::vector<int>> distinct;
        for (const auto& [d, x] : members(g)) distinct.insert(x);
        auto v = enumerate_vertices(g);
        CHECK(v.size() == distinct.size());
        auto cs = coordinate_system(g);
        for (const auto& vert : v) CHECK(dense_imset(cs, g.realize(vert.representative)) == vert.x);
    }
}

TEST_CASE("interventional parting and toric fiber product") {
    auto gt = parting_tree();
    auto [left, right] = interventional_parting(gt, "j");
    CHECK(left.I() == std::vector<std::string>{"j"});
    CHECK(right.I() == std::vector<std::string>{"j"});
    CHECK(left.J().empty());
    CHECK(left.size() == 4);
    CHECK(right.size() == 4);
    CHECK_THROWS(interventional_parting(gt, "i"));

    auto imsets = [](const GluingTree& g) {
        auto cs = coordinate_system(g);
        std::vector<CharImset> out;
        for (const auto& v : enumerate_vertices(g)) out.push_back(sparse_imset(cs, v.x));
        return out;
    };
    auto glued = tfp_glue(imsets(left), imsets(right), NodeSubset{"i", "j", "j_z"}, NodeSubset{"j", "j_z", "k"});
    auto whole = imsets(gt);
    std::sort(glued.begin(), glued.end());
    std::sort(whole.begin(), whole.end());
    CHECK(glued == whole);

    // Projections x_{ijj'} and 1 - x_{jj'k} that are constantly 0 on one side and 1 on the other.
    NodeSubset m1{"i", "j", "j_z"}, m2{"j", "j_z", "k"};
    std::vector<CharImset> off{CharImset{}}, on1{CharImset{{m1, 1}}}, on2{CharImset{{m2, 1}}};
    CHECK(tfp_glue(off, off, m1, m2).empty());
    CHECK(tfp_glue(on1, on2, m1, m2).empty());
    CHECK(tfp_glue(off, on2, m1, m2).size() == 1);
    CHECK(tfp_glue(on1, off, m1, m2).size() == 1);
}

TEST_CASE("H-representation of the parting example") {
    auto gt = parting_tree();
    auto h = h_representation(gt);
    CHECK(rows_of(h.inequalities, h.coords) ==
          rows_of({"x_{abi} - x_{abij} >= 0", "x_{aij} - x_{abij} >= 0", "x_{bij} - x_{abij} >= 0", "x_{abij} >= 0",
                   "x_{cdk} - x_{cdjk} >= 0", "x_{cjk} - x_{cdjk} >= 0", "x_{djk} - x_{cdjk} >= 0", "x_{cdjk} >= 0",
                   "(x_{ijj'}) + (x_{aij} + x_{bij} - x_{abij}) <= 1",
                   "(x_{jj'k}) + (x_{cjk} + x_{djk} - x_{cdjk}) <= 1",
                   "(x_{abi} - x_{abij}) + (1-x_{ijj'}) <= 1", "(x_{cdk} - x_{cdjk}) + (1-x_{jj'k}) <= 1"}));
    std::set<std::string> eq = rendered(h.equalities, h.coords);
    CHECK(eq.count("x_{ijk} = 0") == 1);
    CHECK(eq.count("x_{ijj'k} = 0") == 1);
    CHECK(eq.count("x_{ijj'} + x_{jj'k} = 1") == 1);
}

TEST_CASE("constraint output") {
    auto h = h_representation(star_abcd());
    auto j = hrep_json(h);
    CHECK(j["inequalities"].size() == 7);
    auto c = constraint_json(h.inequalities[0], h.coords);
    CHECK(c.contains("coeffs"));
    CHECK(c.contains("sense"));
    CHECK(c.contains("rhs"));
    CHECK(c.contains("tag"));
}

}
