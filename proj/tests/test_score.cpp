#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "oracles.hpp"
#include "qig/dataset_io.hpp"
#include "qig/gaussian_score.hpp"
#include "qig/verify.hpp"

using namespace qig;

namespace {

const double kLog2Pi = std::log(2.0 * M_PI);

struct Case {
    Dag dag;
    std::vector<std::string> targets;
    InterventionalDataset ds;
};

Case make_case(std::mt19937_64& rng, int p, long n) {
    auto t = oracle::random_tree(p, rng);
    Dag d = oracle::random_orientation(t, rng);
    std::vector<std::string> targets;
    if (p >= 3)
        for (int v : t.leaves())
            if (rng() & 1U) targets.push_back(t.label(v));
    auto params = random_params(d, targets, rng());
    auto ds = simulate(d, targets, params, std::vector<long>(targets.size() + 1, n), rng());
    return {d, targets, ds};
}

// Straight transcription of the alpha display with explicit loops over samples.
double alpha_reference(const InterventionalDataset& ds, const std::vector<int>& A, const std::vector<int>& Z) {
    if (A.empty()) return 0;
    const int a = static_cast<int>(A.size());
    auto block = [&](const std::vector<int>& ctx) {
        Eigen::MatrixXd scatter = Eigen::MatrixXd::Zero(a, a);
        long n = 0;
        for (int k : ctx) {
            const auto& X = ds.contexts[k].data;
            for (int r = 0; r < X.rows(); ++r) {
                for (int x = 0; x < a; ++x)
                    for (int y = 0; y < a; ++y) scatter(x, y) += X(r, A[x]) * X(r, A[y]);
                ++n;
            }
        }
        Eigen::MatrixXd S = scatter / static_cast<double>(n);
        double quad = (S.inverse() * scatter).trace();
        return 0.5 * quad + 0.5 * static_cast<double>(n) * std::log(S.determinant());
    };
    std::vector<int> rest;
    for (int k = 0; k <= ds.K(); ++k)
        if (std::find(Z.begin(), Z.end(), k) == Z.end()) rest.push_back(k);
    double v = -block(rest);
    for (int k : Z) v -= block({k});
    const double N = static_cast<double>(ds.total_samples());
    return v - 0.5 * std::log(N) * (1.0 + static_cast<double>(Z.size())) * a * (a - 1) / 2.0;
}

double rel(double a, double b) { return std::abs(a - b) / (1.0 + std::abs(b)); }

}  // namespace

TEST_SUITE("score") {

TEST_CASE("covariance from parameters") {
    Dag d({"1", "2"}, std::vector<LabelPair>{{"1", "2"}});
    GaussianParams zero;
    zero.lambda = {Eigen::MatrixXd::Zero(2, 2)};
    zero.omega = {Eigen::VectorXd::Ones(2)};
    CHECK(covariance_from_params(d, zero, 0).isApprox(Eigen::MatrixXd::Identity(2, 2)));

    GaussianParams one = zero;
    one.lambda[0](1, 0) = 1.0;
    Eigen::MatrixXd expect(2, 2);
    expect << 1, 1, 1, 2;
    CHECK(covariance_from_params(d, one, 0).isApprox(expect));

    std::mt19937_64 rng(41);
    for (int rep = 0; rep < 100; ++rep) {
        auto t = oracle::random_tree(2 + rep % 7, rng);
        Dag g = oracle::random_orientation(t, rng);
        std::vector<std::string> targets{t.label(t.leaves()[0])};
        auto params = random_params(g, targets, rng());
        for (int k = 0; k <= 1; ++k) {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(covariance_from_params(g, params, k));
            CHECK(es.eigenvalues().minCoeff() > 0);
        }
        // Targeted rows lose their parents; magnitudes respect the ranges.
        int tv = g.index(targets[0]);
        CHECK(params.lambda[1].row(tv).isZero());
        for (auto [u, v] : g.arcs()) {
            double l = std::abs(params.lambda[0](v, u));
            CHECK(l >= 0.25);
            CHECK(l <= 1.0);
        }
        CHECK(params.omega[0].minCoeff() >= 0.5);
        CHECK(params.omega[0].maxCoeff() <= 2.0);
    }
}

TEST_CASE("simulation") {
    Dag d({"1", "2", "3"}, std::vector<LabelPair>{{"1", "2"}, {"3", "2"}});
    auto params = random_params(d, {}, 5);
    auto ds = simulate(d, {}, params, {100}, 9);
    CHECK(ds.K() == 0);
    CHECK(ds.contexts[0].data.rows() == 100);

    auto big = simulate(d, {}, params, {100000}, 10);
    Eigen::MatrixXd S = pooled_cov(big, {0});
    CHECK((S - covariance_from_params(d, params, 0)).cwiseAbs().maxCoeff() < 0.05);

    auto again = simulate(d, {}, params, {100}, 9);
    CHECK(again.contexts[0].data == ds.contexts[0].data);
}

TEST_CASE("pooled second moments") {
    InterventionalDataset one;
    one.variables = {"x", "y"};
    Eigen::MatrixXd row(1, 2);
    row << 2, -3;
    one.contexts.push_back({std::nullopt, row});
    CHECK(pooled_cov(one, {0}).isApprox(row.transpose() * row));

    InterventionalDataset p1;
    p1.variables = {"x"};
    Eigen::MatrixXd col(3, 1);
    col << 1, 2, 3;
    p1.contexts.push_back({std::nullopt, col});
    CHECK(pooled_cov(p1, {0})(0, 0) == doctest::Approx(14.0 / 3.0));

    std::mt19937_64 rng(42);
    auto c = make_case(rng, 4, 50);
    if (c.ds.K() >= 1) {
        double n0 = c.ds.contexts[0].data.rows(), n1 = c.ds.contexts[1].data.rows();
        Eigen::MatrixXd mix = (n0 * pooled_cov(c.ds, {0}) + n1 * pooled_cov(c.ds, {1})) / (n0 + n1);
        CHECK(pooled_cov(c.ds, {0, 1}).isApprox(mix));
    }
}

TEST_CASE("alpha against a direct transcription") {
    std::mt19937_64 rng(43);
    Dag path({"1", "2", "3"}, std::vector<LabelPair>{{"1", "2"}, {"2", "3"}});
    auto params = random_params(path, {"3"}, 44);
    auto ds = simulate(path, {"3"}, params, {50, 50}, 45);
    Scorer sc(ds);
    CHECK(sc.alpha({}, {}) == 0);
    CHECK(sc.alpha({}, {1}) == 0);
    for (std::vector<int> A : {std::vector<int>{0}, {1}, {2}, {0, 1}, {1, 2}, {0, 2}, {0, 1, 2}})
        for (std::vector<int> Z : {std::vector<int>{}, {1}})
            CHECK(rel(sc.alpha(A, Z), alpha_reference(ds, A, Z)) < 1e-10);
}

TEST_CASE("linearized BIC equals the direct BIC on every orientation") {
    std::mt19937_64 rng(46);
    for (int rep = 0; rep < 20; ++rep) {
        auto c = make_case(rng, 2 + rep % 5, 80);
        Scorer sc(c.ds);
        for (const auto& d : enumerate_orientations(UndirectedTree(skeleton(c.dag))))
            CHECK(rel(bic_via_alpha(d, sc), bic_direct(d, c.ds)) < 1e-9);
    }
}

TEST_CASE("MLE precisions") {
    InterventionalDataset ds;
    ds.variables = {"1", "2", "3"};
    std::mt19937_64 rng(47);
    std::normal_distribution<double> g;
    Eigen::MatrixXd X(40, 3);
    for (int r = 0; r < 40; ++r)
        for (int c = 0; c < 3; ++c) X(r, c) = g(rng);
    ds.contexts.push_back({std::nullopt, X});
    Dag empty({"1", "2", "3"}, std::vector<LabelPair>{});
    Eigen::MatrixXd S = pooled_cov(ds, {0});
    auto K = mle_precisions(empty, ds);
    CHECK(K[0].isApprox(S.diagonal().cwiseInverse().asDiagonal().toDenseMatrix()));

    for (int rep = 0; rep < 20; ++rep) {
        auto c = make_case(rng, 3 + rep % 5, 300);
        auto kh = mle_precisions(c.dag, c.ds);
        auto ref = regression_precisions(c.dag, c.ds);
        for (size_t k = 0; k < kh.size(); ++k) {
            CHECK((kh[k] - ref[k]).cwiseAbs().maxCoeff() < 1e-10);
            CHECK((kh[k] - kh[k].transpose()).cwiseAbs().maxCoeff() < 1e-12);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(kh[k]);
            CHECK(es.eigenvalues().minCoeff() > 0);
        }
    }
}

TEST_CASE("BIC closed form for one variable") {
    InterventionalDataset ds;
    ds.variables = {"x"};
    Eigen::MatrixXd X(4, 1);
    X << 0.5, -1.0, 2.0, 0.25;
    ds.contexts.push_back({std::nullopt, X});
    const double n = 4, S = X.squaredNorm() / n;
    Dag d({"x"}, std::vector<LabelPair>{});
    CHECK(bic_direct(d, ds) == doctest::Approx(-(n / 2) * (kLog2Pi + std::log(S) + 1) - std::log(n) / 2).epsilon(1e-12));
    CHECK(parameter_count(d, ds) == 1);
}

TEST_CASE("score invariance within interventional classes") {
    std::mt19937_64 rng(48);
    for (int rep = 0; rep < 15; ++rep) {
        auto c = make_case(rng, 3 + rep % 4, 60);
        auto all = enumerate_orientations(UndirectedTree(skeleton(c.dag)));
        for (const auto& x : all)
            for (const auto& y : all)
                if (oracle::i_equivalent(x, y, c.targets))
                    CHECK(rel(bic_direct(x, c.ds), bic_direct(y, c.ds)) < 1e-9);
    }
}

TEST_CASE("objective vector reproduces the BIC on vertices") {
    std::mt19937_64 rng(49);
    for (int rep = 0; rep < 15; ++rep) {
        auto c = make_case(rng, 3 + rep % 5, 70);
        GluingTree gt(UndirectedTree(skeleton(c.dag)), c.targets);
        auto cs = coordinate_system(gt);
        Scorer sc(c.ds);
        auto ov = objective_vector(gt, cs, sc);
        for (const auto& v : enumerate_vertices(gt)) CHECK(rel(ov.eval(v.x), bic_direct(v.representative, c.ds)) < 1e-9);
    }
}

TEST_CASE("mutual information weights and spanning tree") {
    std::mt19937_64 rng(50);
    auto c = make_case(rng, 5, 400);
    Eigen::MatrixXd w = mi_weights(c.ds);
    CHECK((w - w.transpose()).cwiseAbs().maxCoeff() == 0);
    CHECK(w.maxCoeff() <= 0);

    // Minimum over all labelled trees on four nodes (Pruefer sequences).
    Eigen::MatrixXd m(4, 4);
    m << 0, -0.9, -0.1, -0.3, -0.9, 0, -0.2, -0.8, -0.1, -0.2, 0, -0.7, -0.3, -0.8, -0.7, 0;
    std::vector<std::string> labels{"a", "b", "c", "d"};
    double best = 1e9;
    for (int s0 = 0; s0 < 4; ++s0)
        for (int s1 = 0; s1 < 4; ++s1) {
            std::vector<int> seq{s0, s1}, deg(4, 1);
            for (int s : seq) ++deg[s];
            double total = 0;
            for (int s : seq)
                for (int l = 0; l < 4; ++l)
                    if (deg[l] == 1) {
                        total += m(l, s);
                        --deg[l];
                        --deg[s];
                        break;
                    }
            int u = -1, v = -1;
            for (int i = 0; i < 4; ++i)
                if (deg[i] == 1) (u < 0 ? u : v) = i;
            total += m(u, v);
            best = std::min(best, total);
        }
    auto t = kruskal_mst(m, labels);
    double got = 0;
    for (auto [u, v] : t.edges()) got += m(u, v);
    CHECK(got == doctest::Approx(best));
    CHECK(t.adjacent(t.index("a"), t.index("b")));
    CHECK(t.adjacent(t.index("b"), t.index("d")));
    CHECK(t.adjacent(t.index("c"), t.index("d")));
}

TEST_CASE("data errors") {
    InterventionalDataset ds;
    ds.variables = {"x", "y"};
    Eigen::MatrixXd X(10, 2);
    for (int r = 0; r < 10; ++r) X(r, 0) = X(r, 1) = r + 1.0;
    ds.contexts.push_back({std::nullopt, X});
    Dag d({"x", "y"}, std::vector<LabelPair>{{"x", "y"}});
    CHECK_THROWS_AS(bic_direct(d, ds), DataError);
    try {
        bic_direct(d, ds);
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("x") != std::string::npos);
    }

    InterventionalDataset bad = ds;
    bad.contexts.push_back({std::string("nope"), X});
    CHECK_THROWS_AS(bad.validate(), DataError);
}

TEST_CASE("dataset files") {
    std::mt19937_64 rng(51);
    auto c = make_case(rng, 5, 30);
    auto dir = std::filesystem::temp_directory_path() / "qig_io_test";
    std::filesystem::remove_all(dir);
    std::string manifest = write_dataset(c.ds, dir.string());
    auto back = load_manifest(manifest);
    REQUIRE(back.p() == c.ds.p());
    REQUIRE(back.K() == c.ds.K());
    CHECK(back.variables == c.ds.variables);
    for (int k = 0; k <= back.K(); ++k) {
        CHECK(back.contexts[k].target == c.ds.contexts[k].target);
        CHECK((back.contexts[k].data - c.ds.contexts[k].data).cwiseAbs().maxCoeff() < 1e-12);
    }
    auto cen = centered(back);
    for (int k = 0; k <= cen.K(); ++k) CHECK(cen.contexts[k].data.colwise().mean().cwiseAbs().maxCoeff() < 1e-12);

    CHECK_THROWS_AS(load_manifest((dir / "missing.json").string()), DataError);
    std::filesystem::remove_all(dir);
}

}
