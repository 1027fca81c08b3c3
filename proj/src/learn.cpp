#include "qig/learn.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iostream>

#include "qig/dataset_io.hpp"
#include "qig/polytope.hpp"
#include "qig/solver.hpp"

namespace qig {

namespace {

void note(LearnReport& r, const std::string& level, const std::string& msg) {
    r.messages.push_back(level + ": " + msg);
    std::cerr << level << ": " << msg << '\n';
}

std::string join(const std::vector<std::string>& v) {
    std::string s;
    for (size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + v[i];
    return s;
}

}  // namespace

nlohmann::json LearnReport::to_json(bool with_timing) const {
    nlohmann::json j;
    j["skeleton"] = qig::to_json(static_cast<const UndirectedGraph&>(skeleton));
    j["retained_targets"] = retained_targets;
    j["discarded_targets"] = discarded_targets;
    j["imset"] = imset_json(imset);
    j["dag"] = qig::to_json(dag, retained_targets);
    j["essential_graph"] = qig::to_json(essential);
    j["essential_graph"]["targets"] = retained_targets;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", score);
    j["score"] = std::stod(buf);
    std::snprintf(buf, sizeof buf, "%.12g", objective_value);
    j["objective_value"] = std::stod(buf);
    j["solver"] = used_lp ? "lp" : "enumeration";
    j["pivots"] = pivots;
    j["messages"] = messages;
    if (with_timing) j["seconds"] = seconds;
    return j;
}

LearnReport qig_learn(const InterventionalDataset& input, const RunConfig& cfg) {
    auto t0 = std::chrono::steady_clock::now();
    LearnReport r;
    input.validate();
    if (input.p() < 2) throw DataError("learning needs at least two variables");
    InterventionalDataset ds = cfg.center ? centered(input) : input;

    Eigen::MatrixXd w = mi_weights(ds, cfg.mi_pool);
    r.skeleton = kruskal_mst(w, ds.variables);

    // Keep only interventions on leaves of the estimated skeleton.
    InterventionalDataset kept;
    kept.variables = ds.variables;
    kept.contexts.push_back(ds.contexts[0]);
    for (int k = 1; k <= ds.K(); ++k) {
        const std::string& t = *ds.contexts[k].target;
        if (r.skeleton.is_leaf(r.skeleton.index(t))) {
            r.retained_targets.push_back(t);
            kept.contexts.push_back(ds.contexts[k]);
        } else {
            r.discarded_targets.push_back(t);
        }
    }
    if (!r.discarded_targets.empty())
        note(r, "WARN", "dropping interventions on non-leaf variables: " + join(r.discarded_targets));

    if (ds.p() == 2) {
        // Two leaves cannot both sit next to an internal node; score the two orientations directly.
        r.used_lp = false;
        note(r, "INFO", "two variables: scoring both orientations directly");
        const auto& e = r.skeleton.edges()[0];
        Dag a(ds.variables, std::vector<std::pair<int, int>>{e});
        Dag b(ds.variables, std::vector<std::pair<int, int>>{{e.second, e.first}});
        double sa = bic_direct(a, kept), sb = bic_direct(b, kept);
        r.dag = sb > sa ? b : a;
        r.score = std::max(sa, sb);
        r.objective_value = r.score;
        r.imset = char_imset(IDag(r.dag, r.retained_targets));
    } else {
        GluingTree gt(r.skeleton, r.retained_targets);
        Scorer scorer(kept);
        CoordinateSystem cs = coordinate_system(gt);
        ObjectiveVector ov = objective_vector(gt, cs, scorer);
        HRepresentation h = h_representation(gt, cfg.subtree_cap);
        LpSolution sol = LpSolver(h).maximize(rationalize(ov.coeffs, cfg.rational_bits));
        r.pivots = sol.pivots;
        if (sol.perturbed) note(r, "WARN", "fractional LP optimum; tie-breaking re-solve was needed");
        if (!sol.vertex_flag) throw SolverError("LP optimum is not a 0/1 point");
        std::vector<int> x(sol.point.size());
        for (size_t i = 0; i < x.size(); ++i) x[i] = static_cast<int>(sol.point[i].get_num().get_si());
        r.dag = reconstruct_dag(x, gt, cs);
        r.imset = char_imset(IDag(r.dag, r.retained_targets));
        if (dense_from_sparse(cs, r.imset) != x) throw SolverError("reconstructed DAG does not realize the LP optimum");
        r.objective_value = ov.eval(x);
        r.score = bic_direct(r.dag, kept);
    }
    r.essential = essential_graph(r.dag, r.retained_targets);
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    if (!cfg.out_json.empty()) {
        std::ofstream out(cfg.out_json);
        if (!out) throw DataError("cannot write '" + cfg.out_json + "'");
        out << r.to_json().dump(2) << '\n';
    }
    if (!cfg.out_dot.empty()) {
        std::ofstream out(cfg.out_dot);
        if (!out) throw DataError("cannot write '" + cfg.out_dot + "'");
        out << to_dot(r.essential, r.retained_targets);
    }
    return r;
}

LearnReport qig_learn(const RunConfig& cfg) {
    if (cfg.manifest.empty()) throw DataError("no manifest given");
    return qig_learn(load_manifest(cfg.manifest), cfg);
}

}  // namespace qig
