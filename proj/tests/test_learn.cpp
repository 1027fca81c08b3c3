#include <doctest.h>

#include "oracles.hpp"
#include "qig/learn.hpp"
#include "qig/verify.hpp"

using namespace qig;

namespace {

InterventionalDataset dataset_for(const Dag& d, const std::vector<std::string>& targets, long n, uint64_t seed) {
    auto params = random_params(d, targets, seed);
    return simulate(d, targets, params, std::vector<long>(targets.size() + 1, n), seed + 1);
}

}  // namespace

TEST_SUITE("learn") {

TEST_CASE("recovers a simulated polytree with all leaves targeted") {
    std::mt19937_64 rng(7);
    auto t = random_tree(8, rng);
    Dag truth = random_orientation(t, rng);
    std::vector<std::string> targets;
    for (int v : t.leaves()) targets.push_back(t.label(v));
    auto ds = dataset_for(truth, targets, 5000, 7);
    auto r = qig_learn(ds);
    CHECK(oracle::edge_set(skeleton(r.dag)) == oracle::edge_set(skeleton(truth)));
    CHECK(r.essential == essential_graph(truth, targets));
    CHECK(r.discarded_targets.empty());
    CHECK(r.used_lp);

    // Report invariants.
    CHECK(oracle::edge_set(skeleton(r.dag)) == oracle::edge_set(r.skeleton));
    GluingTree gt(r.skeleton, r.retained_targets);
    CHECK(char_imset(gt.realize(r.dag)) == r.imset);
    CHECK(r.score == doctest::Approx(bic_direct(r.dag, ds)).epsilon(1e-9));
    CHECK(r.objective_value == doctest::Approx(r.score).epsilon(1e-6));
    for (const auto& x : r.retained_targets) CHECK(r.skeleton.degree(r.skeleton.index(x)) == 1);
}

TEST_CASE("internal targets are discarded") {
    Dag path({"1", "2", "3", "4"}, std::vector<LabelPair>{{"1", "2"}, {"2", "3"}, {"3", "4"}});
    auto ds = dataset_for(path, {"2", "3"}, 3000, 11);
    auto r = qig_learn(ds);
    REQUIRE(oracle::edge_set(skeleton(r.dag)) == oracle::edge_set(skeleton(path)));
    CHECK(r.retained_targets.empty());
    CHECK(r.discarded_targets == std::vector<std::string>{"2", "3"});
    CHECK(std::any_of(r.messages.begin(), r.messages.end(),
                      [](const std::string& m) { return m.find("WARN") != std::string::npos; }));
    // Observational learning of a chain leaves every edge undirected.
    CHECK(r.essential.arcs().empty());
    CHECK(r.essential.edges().size() == 3);
}

TEST_CASE("six contexts shaped like the signalling data") {
    std::vector<std::string> names{"Raf", "Mek", "Plcg", "PIP2", "PIP3", "Erk", "Akt", "PKA", "PKC", "P38", "Jnk"};
    Dag d(names, std::vector<LabelPair>{{"PKC", "Raf"}, {"Raf", "Mek"}, {"Mek", "Erk"}, {"Erk", "Akt"},
                                        {"PKA", "Akt"}, {"Plcg", "PIP2"}, {"PIP3", "PIP2"}, {"PKC", "P38"},
                                        {"PKC", "Jnk"}, {"PIP2", "PKC"}});
    std::vector<std::string> targets{"Akt", "PKC", "PIP2", "Mek", "PIP3"};
    auto params = random_params(d, targets, 8);
    auto ds = simulate(d, targets, params, {1755, 911, 723, 810, 799, 848}, 9);
    CHECK(ds.K() == 5);
    CHECK(ds.total_samples() == 5846);
    auto r = qig_learn(ds);
    CHECK(r.skeleton.size() == 11);
    CHECK(r.retained_targets.size() + r.discarded_targets.size() == 5);
    CHECK(std::isfinite(r.score));
    auto j = r.to_json(false);
    CHECK(j.contains("essential_graph"));
}

TEST_CASE("deterministic report") {
    std::mt19937_64 rng(12);
    auto t = random_tree(6, rng);
    Dag truth = random_orientation(t, rng);
    auto ds = dataset_for(truth, {t.label(t.leaves()[0])}, 500, 13);
    CHECK(qig_learn(ds).to_json(false).dump() == qig_learn(ds).to_json(false).dump());
}

TEST_CASE("two variables") {
    Dag d({"x", "y"}, std::vector<LabelPair>{{"x", "y"}});
    auto ds = dataset_for(d, {"y"}, 2000, 14);
    auto r = qig_learn(ds);
    CHECK(r.skeleton.size() == 2);
    CHECK(r.dag.has_arc(r.dag.index("x"), r.dag.index("y")));
    CHECK(r.essential.arcs().size() == 1);
}

}
