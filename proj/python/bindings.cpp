#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qig/dataset_io.hpp"
#include "qig/learn.hpp"
#include "qig/solver.hpp"
#include "qig/verify.hpp"

namespace py = pybind11;
using namespace qig;

namespace {

// Graph arguments cross the boundary as JSON text; the Python wrapper handles dicts.
std::string learn_json(const std::string& manifest, bool mi_pool, bool center, uint64_t seed) {
    RunConfig cfg;
    cfg.manifest = manifest;
    cfg.mi_pool = mi_pool;
    cfg.center = center;
    cfg.seed = seed;
    return qig_learn(cfg).to_json(false).dump();
}

GluingTree gluing(const std::string& tree, const std::vector<std::string>& targets, const std::vector<std::string>& J) {
    return GluingTree(tree_from_json(nlohmann::json::parse(tree)), targets, J);
}

std::string facets_json(const std::string& tree, const std::vector<std::string>& targets,
                        const std::vector<std::string>& J) {
    return hrep_json(h_representation(gluing(tree, targets, J))).dump();
}

std::vector<std::string> facet_rows(const std::string& tree, const std::vector<std::string>& targets,
                                    const std::vector<std::string>& J) {
    auto h = h_representation(gluing(tree, targets, J));
    std::vector<std::string> out;
    for (const auto& c : h.inequalities) out.push_back(render_constraint(c, h.coords));
    return out;
}

std::string vertices_json(const std::string& tree, const std::vector<std::string>& targets,
                          const std::vector<std::string>& J) {
    GluingTree gt = gluing(tree, targets, J);
    CoordinateSystem cs = coordinate_system(gt);
    nlohmann::json out = nlohmann::json::array();
    for (const auto& v : enumerate_vertices(gt))
        out.push_back({{"imset", imset_json(cs, v.x)}, {"dag", to_json(v.representative, gt.targets())}});
    return out.dump();
}

std::string verify_json(const std::string& suite, uint64_t seed, int jobs) {
    VerifyOptions o;
    o.seed = seed;
    o.jobs = jobs;
    nlohmann::json out = nlohmann::json::array();
    for (const auto& r : run_suite(suite, o))
        out.push_back({{"check", r.name}, {"pass", r.pass}, {"detail", r.detail}, {"seconds", r.seconds},
                       {"limit_seconds", r.limit_seconds}, {"notes", r.notes}});
    return out.dump();
}

std::string simulate_dataset(const std::string& dag, const std::vector<std::string>& targets, long n, uint64_t seed,
                             const std::string& dir) {
    Dag d = dag_from_json(nlohmann::json::parse(dag));
    auto params = random_params(d, targets, seed);
    auto ds = simulate(d, targets, params, std::vector<long>(targets.size() + 1, n), seed + 1);
    return write_dataset(ds, dir);
}

std::string score_json(const std::string& manifest, const std::string& dag, bool center) {
    auto ds = load_manifest(manifest);
    if (center) ds = centered(ds);
    Dag d = dag_from_json(nlohmann::json::parse(dag));
    return nlohmann::json{{"bic", bic_direct(d, ds)},
                          {"log_likelihood", log_likelihood(d, ds)},
                          {"parameters", parameter_count(d, ds)}}
        .dump();
}

}  // namespace

PYBIND11_MODULE(_qig, m) {
    m.doc() = "Interventional polytree structure learning over characteristic imset polytopes";

    py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
    py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);
    py::register_exception<GraphError>(m, "GraphError", PyExc_ValueError);

    m.def("learn_json", &learn_json, py::arg("manifest"), py::arg("mi_pool") = false, py::arg("center") = false,
          py::arg("seed") = 0);
    m.def("facets_json", &facets_json, py::arg("tree"), py::arg("targets"), py::arg("J"));
    m.def("facet_rows", &facet_rows, py::arg("tree"), py::arg("targets"), py::arg("J"));
    m.def("vertices_json", &vertices_json, py::arg("tree"), py::arg("targets"), py::arg("J"));
    m.def("verify_json", &verify_json, py::arg("suite"), py::arg("seed"), py::arg("jobs"),
          py::call_guard<py::gil_scoped_release>());
    m.def("simulate", &simulate_dataset, py::arg("dag"), py::arg("targets"), py::arg("n"), py::arg("seed"),
          py::arg("out_dir"));
    m.def("score_json", &score_json, py::arg("manifest"), py::arg("dag"), py::arg("center") = false);
}
