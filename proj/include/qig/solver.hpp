#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "qig/polytope.hpp"

namespace qig {

class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Exact rational with denominator 2^bits.
Rational rationalize(double v, int bits = 40);
std::vector<Rational> rationalize(const std::vector<double>& v, int bits = 40);

struct LpProblem {
    const HRepresentation* hrep = nullptr;
    std::vector<Rational> objective;  // over hrep->coords
};

struct LpSolution {
    std::vector<Rational> point;  // full coordinate vector
    Rational value;
    std::vector<int> basis;  // indices into hrep.inequalities
    bool vertex_flag = false;
    bool perturbed = false;  // the tie-breaking re-solve ran
    int pivots = 0;
};

// Primal simplex over {x : A x <= b} with equalities substituted away. Bland's rule throughout.
class LpSolver {
public:
    explicit LpSolver(const HRepresentation& hrep);

    LpSolution maximize(const std::vector<Rational>& objective) const;
    int dimension() const { return static_cast<int>(free_.size()); }

private:
    struct Row {
        std::vector<std::pair<int, Rational>> a;  // reduced variables
        Rational b;
    };
    LpSolution solve(const std::vector<Rational>& c, std::vector<int>* basis_io) const;
    std::vector<Rational> lift(const std::vector<Rational>& y) const;

    const HRepresentation* hrep_;
    std::vector<int> free_;  // original coordinate of each reduced variable
    // x_full[i] = sum_j expr_[i][j] * y_j + offset_[i]
    std::vector<std::vector<std::pair<int, Rational>>> expr_;
    std::vector<Rational> offset_;
    std::vector<Row> rows_;
    std::vector<Rational> start_;
};

LpSolution lp_maximize(const LpProblem& p);

struct BruteForceResult {
    size_t index = 0;
    std::vector<int> x;
    Rational value;
};
BruteForceResult brute_force_optimum(const std::vector<std::vector<int>>& vertices, const std::vector<Rational>& objective);
BruteForceResult brute_force_optimum(const std::vector<Vertex>& vertices, const std::vector<Rational>& objective);

// Orientation of gt.tree() whose realized imset equals x; throws SolverError when none is found.
Dag reconstruct_dag(const std::vector<int>& x, const GluingTree& gt, const CoordinateSystem& cs);
Dag reconstruct_dag(const CharImset& c, const GluingTree& gt);

int affine_dim(const std::vector<std::vector<int>>& points);
int affine_dim(const std::vector<std::vector<Rational>>& points);

struct FacetCheck {
    bool valid = false;
    int tight_dim = -1;
    bool facet = false;
    int strict_count = 0;  // vertices with positive slack
};
FacetCheck facet_check(const std::vector<std::vector<int>>& vertices, const LinearConstraint& ineq, int polytope_dim);
FacetCheck facet_check(const std::vector<std::vector<int>>& vertices, const LinearConstraint& ineq);

}  // namespace qig
