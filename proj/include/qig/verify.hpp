#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "qig/gaussian_score.hpp"
#include "qig/gluing_tree.hpp"
#include "qig/polytope.hpp"

namespace qig {

struct VerifyOptions {
    uint64_t seed = 20240611;
    int jobs = 1;
};

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0;
    double limit_seconds = 0;
    std::vector<std::string> notes;  // logged observations that do not fail the check
};

// Fixtures.
GluingTree star_tree(int leaves, const std::vector<int>& targeted_leaves);
GluingTree paper_star();     // leaves a, b, d around c; I = {a, d}
GluingTree paper_example();  // eight-node tree with a target at 8

// Random instances; labels are "1".."p".
UndirectedTree random_tree(int p, std::mt19937_64& rng);
Dag random_orientation(const UndirectedTree& t, std::mt19937_64& rng);
// Leaves targeted with probability q; J drawn from eligible degree-two nodes when with_j.
GluingTree random_gluing_tree(const UndirectedTree& t, std::mt19937_64& rng, double q, bool with_j);
std::vector<Rational> random_objective(size_t n, std::mt19937_64& rng);

struct NormalizedRow {
    std::map<std::string, Rational> coeffs;  // keyed by subset key, scaled to leading |coefficient| 1
    Rational constant;                       // row reads coeffs . x + constant <= 0
    bool operator<(const NormalizedRow& o) const;
    bool operator==(const NormalizedRow& o) const;
    std::string str() const;
};
// A row in the paper's notation, e.g. "(1 - x_{aa'c}) + (1 - x_{cdd'}) <= 1 + x_{acd}".
// Single-character labels; a quote marks the interventional copy of the preceding label.
NormalizedRow parse_paper_row(const std::string& text);
NormalizedRow normalize(const LinearConstraint& c, const CoordinateSystem& cs);
std::vector<std::string> paper_star_rows();
std::vector<std::string> paper_example_rows();

// Regression-based MLE: per node, OLS of the node on its parents over the pooled contexts.
std::vector<Eigen::MatrixXd> regression_precisions(const Dag& dag, const InterventionalDataset& ds);

CheckResult check_star_counts(const VerifyOptions& o);
CheckResult check_paper_star(const VerifyOptions& o);
CheckResult check_paper_example(const VerifyOptions& o);
CheckResult check_support_function(const VerifyOptions& o);
CheckResult check_facets(const VerifyOptions& o);
CheckResult check_tfp(const VerifyOptions& o);
CheckResult check_bic(const VerifyOptions& o);
CheckResult check_mle(const VerifyOptions& o);
CheckResult check_invariance(const VerifyOptions& o);
CheckResult check_recovery(const VerifyOptions& o);

// Names accepted by run_suite; "all" runs the geometric and statistical checks, without recovery.
std::vector<std::string> suite_names();
std::vector<CheckResult> run_suite(const std::string& name, const VerifyOptions& o);

}  // namespace qig
