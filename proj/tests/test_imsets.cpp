#include <doctest.h>

#include "oracles.hpp"
#include "qig/gluing_tree.hpp"
#include "qig/imsets.hpp"

using namespace qig;

namespace {

std::map<std::string, int> keyed(const CharImset& c) {
    std::map<std::string, int> out;
    for (const auto& [s, v] : c)
        if (v) out[s.key()] = 1;
    return out;
}

std::vector<std::string> coord_keys(const CoordinateSystem& cs) {
    std::vector<std::string> out;
    for (const auto& s : cs.subsets) out.push_back(s.key());
    return out;
}

}  // namespace

TEST_SUITE("imsets") {

TEST_CASE("node subsets") {
    NodeSubset s{"c", "a", "a_z"};
    CHECK(s.key() == "a|a_z|c");
    CHECK(NodeSubset::from_key("a|a_z|c") == s);
    CHECK(s.render() == "x_{aa'c}");
    CHECK(NodeSubset({"10", "3", "4"}).render() == "x_{10,3,4}");
    CHECK(NodeSubset({"a", "b"}) < NodeSubset({"a", "b", "c"}));
    CHECK(NodeSubset({"a", "b"}).is_subset_of(s) == false);
    CHECK(NodeSubset({"a", "c"}).is_subset_of(s));
}

TEST_CASE("standard imset against the display formula") {
    Dag complete({"1", "2"}, std::vector<LabelPair>{{"1", "2"}});
    CHECK(standard_imset(complete).empty());

    std::mt19937_64 rng(21);
    for (int rep = 0; rep < 200; ++rep) {
        auto t = oracle::random_tree(2 + rep % 6, rng);
        Dag d = oracle::random_orientation(t, rng);
        auto mine = standard_imset(d);
        auto ref = oracle::standard_imset(d);
        std::map<uint32_t, int> got;
        for (const auto& [s, v] : mine) {
            uint32_t m = 0;
            for (const auto& l : s.labels()) m |= 1U << d.index(l);
            if (v) got[m] = v;
        }
        CHECK(got == ref);
    }
}

TEST_CASE("characteristic imset examples") {
    Dag coll({"a", "b", "c"}, std::vector<LabelPair>{{"a", "c"}, {"b", "c"}});
    CHECK(imset_value(char_imset(coll), NodeSubset{"a", "b", "c"}) == 1);

    Dag fig1({"a", "b", "c", "d"}, std::vector<LabelPair>{{"a", "c"}, {"c", "b"}, {"c", "d"}});
    auto c = char_imset(IDag(fig1, {"a", "d"}));
    CHECK(imset_value(c, NodeSubset{"a", "a_z", "c"}) == 0);
    CHECK(imset_value(c, NodeSubset{"c", "d", "d_z"}) == 1);
    for (const auto& [u, v] : fig1.arc_labels()) CHECK(imset_value(c, NodeSubset{u, v}) == 1);
}

TEST_CASE("characteristic imset against the sink criterion and the standard imset") {
    std::mt19937_64 rng(22);
    for (int rep = 0; rep < 500; ++rep) {
        auto t = oracle::random_tree(2 + rep % 6, rng);
        Dag d = oracle::random_orientation(t, rng);
        auto c = char_imset(d);
        CHECK(keyed(c) == oracle::char_imset(d));
        CHECK(keyed(char_from_standard(standard_imset(d), d.nodes())) == keyed(c));
    }
}

TEST_CASE("characteristic imset from a vanishing standard imset") {
    Dag complete({"1", "2"}, std::vector<LabelPair>{{"1", "2"}});
    auto c = char_from_standard(standard_imset(complete), complete.nodes());
    CHECK(imset_value(c, NodeSubset{"1", "2"}) == 1);

    Dag empty({"1", "2", "3"}, std::vector<LabelPair>{});
    auto e = char_from_standard(standard_imset(empty), empty.nodes());
    CHECK(e.empty());
}

TEST_CASE("imset equality characterizes equivalence on trees") {
    std::mt19937_64 rng(23);
    for (int rep = 0; rep < 100; ++rep) {
        auto t = oracle::random_tree(3 + rep % 4, rng);
        Dag x = oracle::random_orientation(t, rng), y = oracle::random_orientation(t, rng);
        CHECK((char_imset(x) == char_imset(y)) == markov_equivalent(x, y));
        std::vector<std::string> targets{t.label(t.leaves()[0])};
        CHECK((char_imset(IDag(x, targets)) == char_imset(IDag(y, targets))) == i_markov_equivalent(x, y, targets));
    }
}

TEST_CASE("coordinate systems") {
    GluingTree star(UndirectedTree({"a", "b", "c", "d"}, {{"a", "c"}, {"b", "c"}, {"c", "d"}}), {"a", "d"});
    auto cs = coordinate_system(star);
    CHECK(coord_keys(cs) == std::vector<std::string>{"a|a_z|c", "a|b|c", "a|c|d", "b|c|d", "c|d|d_z", "a|b|c|d"});

    GluingTree path(UndirectedTree({"1", "2", "3"}, {{"1", "2"}, {"2", "3"}}), {});
    CHECK(coord_keys(coordinate_system(path)) == std::vector<std::string>{"1|2|3"});

    // Four subsets from each of N[3], N[4], N[5] plus {4,8,8'}.
    GluingTree ex(UndirectedTree({"1", "2", "3", "4", "5", "6", "7", "8"},
                                 {{"1", "3"}, {"2", "3"}, {"3", "4"}, {"4", "5"}, {"4", "8"}, {"5", "6"}, {"5", "7"}}),
                  {"8"});
    auto ce = coordinate_system(ex);
    CHECK(ce.size() == 13);
    for (auto k : {"1|2|3", "1|3|4", "2|3|4", "1|2|3|4", "3|4|5", "3|4|8", "4|5|8", "3|4|5|8", "4|5|6", "4|5|7",
                   "5|6|7", "4|5|6|7", "4|8|8_z"})
        CHECK(ce.find(NodeSubset::from_key(k)) >= 0);
}

TEST_CASE("every characteristic imset vanishes outside the coordinates and edges") {
    std::mt19937_64 rng(24);
    for (int rep = 0; rep < 60; ++rep) {
        auto t = oracle::random_tree(3 + rep % 5, rng);
        std::vector<std::string> targets;
        for (int v : t.leaves())
            if (rng() & 1U) targets.push_back(t.label(v));
        GluingTree gt(t, targets);
        auto cs = coordinate_system(gt);
        Dag d = oracle::random_orientation(t, rng);
        IDag id(d, targets);
        auto full = oracle::char_imset(id.realized());
        auto dense = dense_imset(cs, gt.realize(d));
        for (const auto& [k, v] : full) {
            auto s = NodeSubset::from_key(k);
            if (s.size() == 2) continue;
            int at = cs.find(s);
            REQUIRE(at >= 0);
            CHECK(dense[at] == 1);
        }
        CHECK(sparse_imset(cs, dense).size() == static_cast<size_t>(std::count(dense.begin(), dense.end(), 1)));
        CHECK(dense_from_sparse(cs, sparse_imset(cs, dense)) == dense);
    }
}

TEST_CASE("imset json") {
    CharImset c{{NodeSubset{"a", "b", "c"}, 1}};
    auto j = imset_json(c);
    CHECK(j["a|b|c"] == 1);
}

}
