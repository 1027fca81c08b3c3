#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "qig/gluing_tree.hpp"
#include "qig/graphs.hpp"
#include "qig/imsets.hpp"

namespace qig {

class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Context {
    std::optional<std::string> target;  // empty for the observational context
    Eigen::MatrixXd data;               // n_k x p
};

struct InterventionalDataset {
    std::vector<std::string> variables;
    std::vector<Context> contexts;  // contexts[0] is observational

    int p() const { return static_cast<int>(variables.size()); }
    int K() const { return static_cast<int>(contexts.size()) - 1; }
    long total_samples() const;
    int variable_index(const std::string& label) const;
    std::vector<std::string> targets() const;  // one label per interventional context
    void validate() const;
};

// Per-context linear SEM parameters; row i of lambda holds the coefficients of pa(i).
struct GaussianParams {
    std::vector<Eigen::MatrixXd> lambda;  // index = context
    std::vector<Eigen::VectorXd> omega;

    void validate(const Dag& dag, const std::vector<std::string>& targets) const;
};

struct ParamRanges {
    double lambda_lo = 0.25, lambda_hi = 1.0;
    double omega_lo = 0.5, omega_hi = 2.0;
};

// Hard interventions: a targeted node loses its parents and gets a fresh variance.
GaussianParams random_params(const Dag& dag, const std::vector<std::string>& targets, uint64_t seed,
                             const ParamRanges& ranges = {});

Eigen::MatrixXd covariance_from_params(const Dag& dag, const GaussianParams& params, int k);

InterventionalDataset simulate(const Dag& dag, const std::vector<std::string>& targets, const GaussianParams& params,
                               const std::vector<long>& sizes, uint64_t seed);

Eigen::MatrixXd pooled_cov(const InterventionalDataset& ds, const std::vector<int>& contexts);

// Sufficient statistics and memoized alpha values for one dataset.
class Scorer {
public:
    explicit Scorer(const InterventionalDataset& ds);

    const InterventionalDataset& data() const { return ds_; }
    int p() const { return ds_.p(); }
    int K() const { return ds_.K(); }
    long n() const { return total_; }
    long n_k(int k) const { return counts_[k]; }
    const Eigen::MatrixXd& scatter(int k) const { return scatter_[k]; }
    // Contexts whose target is variable i.
    const std::vector<int>& Z(int i) const { return z_[i]; }

    // alpha_{A u Z}; A as variable indices, Z as context indices in 1..K.
    double alpha(std::vector<int> A, std::vector<int> Z) const;
    // Uncentered second moments pooled over the given contexts.
    Eigen::MatrixXd pooled(const std::vector<int>& contexts) const;
    // Contexts 0..K minus Z.
    std::vector<int> complement(const std::vector<int>& Z) const;
    double constant() const;  // C of the linearized BIC

    size_t cache_size() const;

private:
    InterventionalDataset ds_;
    std::vector<Eigen::MatrixXd> scatter_;
    std::vector<long> counts_;
    long total_ = 0;
    std::vector<std::vector<int>> z_;
    mutable std::mutex mu_;
    mutable std::map<std::pair<std::vector<int>, std::vector<int>>, double> cache_;
};

double alpha(const InterventionalDataset& ds, const std::vector<std::string>& A, const std::vector<int>& Z);

// Nodes of `dag` are matched to dataset variables by label.
std::vector<Eigen::MatrixXd> mle_precisions(const Dag& dag, const InterventionalDataset& ds);
double log_likelihood(const Dag& dag, const InterventionalDataset& ds);
int parameter_count(const Dag& dag, const InterventionalDataset& ds);
double bic_direct(const Dag& dag, const InterventionalDataset& ds);
double bic_via_alpha(const Dag& dag, const Scorer& scorer);
double bic_via_alpha(const Dag& dag, const InterventionalDataset& ds);

struct ObjectiveVector {
    std::vector<double> coeffs;  // over the coordinate system
    double constant = 0;

    double eval(const std::vector<int>& x) const;
};

// Gluing tree with J empty whose I equals the set of intervened variables.
ObjectiveVector objective_vector(const GluingTree& gt, const CoordinateSystem& cs, const Scorer& scorer);

Eigen::MatrixXd mi_weights(const InterventionalDataset& ds, bool pool_all = false);
UndirectedTree kruskal_mst(const Eigen::MatrixXd& weights, const std::vector<std::string>& labels);

}  // namespace qig
