#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>

#include "qig/dataset_io.hpp"
#include "qig/learn.hpp"
#include "qig/solver.hpp"
#include "qig/verify.hpp"

using namespace qig;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kUsage = 1, kData = 2, kSolver = 3, kVerify = 4 };

json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw DataError(path + ": " + e.what());
    }
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    out << text;
}

// Tree and target sets from a graph file, with --targets/--J overriding the file's lists.
GluingTree load_gluing_tree(const std::string& path, const std::vector<std::string>& targets,
                            const std::vector<std::string>& J, bool override_targets) {
    json j = read_json(path);
    if (override_targets) j["targets"] = targets;
    if (!J.empty()) j["J"] = J;
    return GluingTree::from_json(j);
}

std::string dump(const json& j, bool pretty) { return pretty ? j.dump(2) : j.dump(); }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Learn interventional Markov equivalence classes of polytrees by linear programming"};
    app.require_subcommand(1);
    bool pretty = false;
    app.add_flag("--pretty", pretty, "Indent JSON output");

    // learn
    RunConfig cfg;
    bool no_timing = false;
    auto* learn = app.add_subcommand("learn", "Run the structure learning pipeline on a manifest");
    learn->add_option("manifest", cfg.manifest, "Dataset manifest JSON")->required()->check(CLI::ExistingFile);
    learn->add_flag("--mi-pool", cfg.mi_pool, "Use all contexts for the mutual-information weights");
    learn->add_flag("--center", cfg.center, "Center each column per context before scoring");
    learn->add_option("--seed", cfg.seed, "Seed recorded in the report");
    learn->add_option("--subtree-cap", cfg.subtree_cap, "Maximum number of forked subtrees")->check(CLI::PositiveNumber);
    learn->add_option("--rational-bits", cfg.rational_bits, "Binary digits kept when rationalizing the objective")
        ->check(CLI::Range(8, 200));
    learn->add_option("--out-json", cfg.out_json, "Write the report JSON here");
    learn->add_option("--out-dot", cfg.out_dot, "Write the essential graph DOT here");
    learn->add_flag("--no-timing", no_timing, "Omit timing fields for reproducible output");

    // facets / vertices
    std::string graph_path;
    std::vector<std::string> targets, J;
    std::string format = "text";
    auto* facets = app.add_subcommand("facets", "Print the H-representation of a gluing tree polytope");
    auto* vertices = app.add_subcommand("vertices", "Enumerate the vertices (one per I-MEC) of a gluing tree polytope");
    for (auto* sub : {facets, vertices}) {
        sub->add_option("graph", graph_path, "Tree JSON {nodes, edges, targets, J}")->required()->check(CLI::ExistingFile);
        sub->add_option("--targets", targets, "Leaf targets (overrides the file)")->delimiter(',');
        sub->add_option("--J", J, "Degree-two targets (overrides the file)")->delimiter(',');
    }
    facets->add_option("--format", format, "text or json")->check(CLI::IsMember({"text", "json"}));
    bool with_dot = false;
    vertices->add_flag("--dot", with_dot, "Attach a DOT drawing of each representative");

    // verify
    std::string suite = "all";
    VerifyOptions vopt;
    bool verbose = false;
    auto* verify = app.add_subcommand("verify", "Run the invariant suites");
    verify->add_option("--suite", suite, "Suite name")->check(CLI::IsMember(suite_names()));
    verify->add_option("--jobs", vopt.jobs, "Worker threads")->check(CLI::PositiveNumber);
    verify->add_option("--seed", vopt.seed, "Seed for the random instances");
    verify->add_flag("-v,--verbose", verbose, "Print notes for passing checks too");

    // simulate
    int sim_p = 8;
    long sim_n = 1000;
    uint64_t sim_seed = 1;
    std::string sim_out, sim_graph;
    bool sim_all_leaves = false;
    auto* simulate_cmd = app.add_subcommand("simulate", "Simulate interventional Gaussian data from a random or given polytree");
    simulate_cmd->add_option("--out", sim_out, "Output directory")->required();
    simulate_cmd->add_option("--p", sim_p, "Number of variables for a random polytree")->check(CLI::Range(2, 200));
    simulate_cmd->add_option("--n", sim_n, "Samples per context")->check(CLI::PositiveNumber);
    simulate_cmd->add_option("--seed", sim_seed, "Random seed");
    simulate_cmd->add_option("--dag", sim_graph, "DAG JSON to simulate from instead of a random polytree")
        ->check(CLI::ExistingFile);
    simulate_cmd->add_option("--targets", targets, "Intervention targets")->delimiter(',');
    simulate_cmd->add_flag("--all-leaves", sim_all_leaves, "Intervene on every leaf of the skeleton");

    // score
    std::string score_manifest, score_dag;
    bool score_center = false;
    auto* score = app.add_subcommand("score", "Gaussian interventional BIC of a DAG");
    score->add_option("manifest", score_manifest, "Dataset manifest JSON")->required()->check(CLI::ExistingFile);
    score->add_option("dag", score_dag, "DAG JSON")->required()->check(CLI::ExistingFile);
    score->add_flag("--center", score_center, "Center each column per context");

    CLI11_PARSE(app, argc, argv);
    std::cout << std::setprecision(12);

    try {
        if (*learn) {
            LearnReport r = qig_learn(cfg);
            for (const auto& m : r.messages) std::cerr << m << "\n";
            std::cout << dump(r.to_json(!no_timing), pretty) << "\n";
            return kOk;
        }
        if (*facets) {
            GluingTree gt = load_gluing_tree(graph_path, targets, J, !targets.empty());
            HRepresentation h = h_representation(gt);
            if (format == "json") {
                std::cout << dump(hrep_json(h), pretty) << "\n";
            } else {
                for (const auto& c : h.equalities) std::cout << render_constraint(c, h.coords) << "\n";
                for (const auto& c : h.inequalities) std::cout << render_constraint(c, h.coords) << "\n";
            }
            return kOk;
        }
        if (*vertices) {
            GluingTree gt = load_gluing_tree(graph_path, targets, J, !targets.empty());
            CoordinateSystem cs = coordinate_system(gt);
            for (const auto& v : enumerate_vertices(gt)) {
                json out{{"imset", imset_json(cs, v.x)}, {"dag", to_json(v.representative, gt.targets())}};
                if (with_dot) out["dot"] = to_dot(v.representative, gt.targets());
                std::cout << out.dump() << "\n";
            }
            return kOk;
        }
        if (*verify) {
            auto results = run_suite(suite, vopt);
            bool ok = true;
            json table = json::array();
            for (const auto& r : results) {
                ok = ok && r.pass;
                std::printf("%-18s %s  %8.3f s  %s\n", r.name.c_str(), r.pass ? "PASS" : "FAIL", r.seconds,
                            r.detail.c_str());
                if (verbose || !r.pass)
                    for (const auto& n : r.notes) std::printf("    %s\n", n.c_str());
                if (!r.pass)
                    table.push_back({{"check", r.name}, {"detail", r.detail}, {"seconds", r.seconds},
                                     {"limit_seconds", r.limit_seconds}, {"notes", r.notes}});
            }
            if (!ok) {
                std::cout << "FAILURES " << table.dump() << "\n";
                return kVerify;
            }
            return kOk;
        }
        if (*simulate_cmd) {
            std::mt19937_64 rng(sim_seed);
            Dag d = sim_graph.empty() ? random_orientation(random_tree(sim_p, rng), rng) : dag_from_json(read_json(sim_graph));
            std::vector<std::string> tg = targets;
            if (sim_all_leaves) {
                auto sk = skeleton(d);
                tg.clear();
                for (int v = 0; v < sk.size(); ++v)
                    if (sk.degree(v) == 1) tg.push_back(sk.label(v));
            }
            auto params = random_params(d, tg, rng());
            auto ds = simulate(d, tg, params, std::vector<long>(tg.size() + 1, sim_n), rng());
            std::string manifest = write_dataset(ds, sim_out);
            write_text(sim_out + "/truth.json", to_json(d, tg).dump(2) + "\n");
            write_text(sim_out + "/truth.dot", to_dot(d, tg));
            std::cout << json{{"manifest", manifest}, {"truth", sim_out + "/truth.json"}}.dump() << "\n";
            return kOk;
        }
        if (*score) {
            InterventionalDataset ds = load_manifest(score_manifest);
            if (score_center) ds = centered(ds);
            Dag d = dag_from_json(read_json(score_dag));
            std::cout << json{{"bic", bic_direct(d, ds)}, {"log_likelihood", log_likelihood(d, ds)},
                              {"parameters", parameter_count(d, ds)}}
                             .dump()
                      << "\n";
            return kOk;
        }
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kData;
    } catch (const GraphError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kData;
    } catch (const SolverError& e) {
        std::cerr << "solver anomaly: " << e.what() << "\n";
        return kSolver;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    }
    return kOk;
}
