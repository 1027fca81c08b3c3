#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "qig/gaussian_score.hpp"
#include "qig/graphs.hpp"
#include "qig/imsets.hpp"
#include "qig/polytope.hpp"

namespace qig {

struct RunConfig {
    std::string manifest;
    bool mi_pool = false;   // MI weights from all contexts instead of the observational one
    bool center = false;    // subtract column means per context before scoring
    uint64_t seed = 0;
    size_t subtree_cap = ::qig::subtree_cap();
    int rational_bits = 40;
    std::string out_json;
    std::string out_dot;
};

struct LearnReport {
    UndirectedTree skeleton;
    std::vector<std::string> retained_targets;
    std::vector<std::string> discarded_targets;
    CharImset imset;
    Dag dag;
    Pdag essential;
    double score = 0;            // bic_direct of the representative DAG
    double objective_value = 0;  // linearized score at the LP optimum
    int pivots = 0;
    bool used_lp = true;
    double seconds = 0;
    std::vector<std::string> messages;

    nlohmann::json to_json(bool with_timing = true) const;
};

LearnReport qig_learn(const InterventionalDataset& ds, const RunConfig& cfg = {});
LearnReport qig_learn(const RunConfig& cfg);

}  // namespace qig
