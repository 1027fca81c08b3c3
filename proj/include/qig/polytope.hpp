#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include <gmpxx.h>
#include <json.hpp>

#include "qig/gluing_tree.hpp"
#include "qig/imsets.hpp"

namespace qig {

using Rational = mpq_class;
// Coefficients keyed by position in a CoordinateSystem.
using SparseVector = std::map<int, Rational>;

struct Functional {
    SparseVector coeffs;
    Rational constant = 0;

    void add_term(int coord, const Rational& c);
    Functional& operator+=(const Functional& o);
    Functional& operator-=(const Functional& o);
    Rational eval(const std::vector<int>& x) const;
};

enum class Sense { Le, Ge, Eq };

struct LinearConstraint {
    SparseVector coeffs;
    Sense sense = Sense::Le;
    Rational rhs = 0;
    std::string tag;     // star | bidirected | forked | affine-span
    std::string origin;  // which star, edge or subtree produced the row

    Rational lhs(const std::vector<int>& x) const;
    Rational lhs(const std::vector<Rational>& x) const;
    // Nonnegative exactly when satisfied.
    Rational slack(const std::vector<int>& x) const;
    bool satisfied(const std::vector<int>& x) const;
};

struct ForkedSubtree {
    std::vector<int> nodes;  // tree indices, ascending
    std::vector<std::pair<int, int>> edges;
    std::vector<int> leaves;
    std::vector<int> interior;
    std::vector<int> forked;                           // F(T')
    std::vector<std::pair<int, int>> leaf_edges;       // (c, d) with c white

    std::vector<std::string> labels(const GluingTree& gt) const;
};

struct HRepresentation {
    CoordinateSystem coords;
    std::vector<LinearConstraint> inequalities;
    std::vector<LinearConstraint> equalities;
    // Imset of some member of the polytope; the LP starts here.
    std::vector<int> feasible_point;
};

struct Vertex {
    std::vector<int> x;  // dense over the coordinate system
    Dag representative;  // orientation of the base tree
};

size_t subtree_cap();

std::vector<LinearConstraint> star_inequalities(const GluingTree& gt, const CoordinateSystem& cs);
Functional indicator_v(int u, int v, const GluingTree& gt, const CoordinateSystem& cs);
std::vector<LinearConstraint> bidirected_edge_inequalities(const GluingTree& gt, const CoordinateSystem& cs);
Functional forced_out_functional(int c, const std::vector<int>& L, const GluingTree& gt, const CoordinateSystem& cs);
Functional hash_functional(int c, const std::vector<int>& subtree_nodes, const GluingTree& gt,
                           const CoordinateSystem& cs);
std::vector<ForkedSubtree> enumerate_forked_subtrees(const GluingTree& gt, size_t cap = subtree_cap());
LinearConstraint forked_tree_inequality(const ForkedSubtree& t, const GluingTree& gt, const CoordinateSystem& cs);
std::vector<LinearConstraint> j_equalities(const GluingTree& gt, const CoordinateSystem& cs);
HRepresentation h_representation(const GluingTree& gt, size_t cap = subtree_cap());

std::vector<Vertex> enumerate_vertices(const GluingTree& gt, size_t cap = orientation_cap());

std::pair<GluingTree, GluingTree> interventional_parting(const GluingTree& gt, const std::string& j);
std::vector<CharImset> tfp_glue(const std::vector<CharImset>& verts1, const std::vector<CharImset>& verts2,
                                const NodeSubset& match1, const NodeSubset& match2);

std::string render_constraint(const LinearConstraint& c, const CoordinateSystem& cs);
nlohmann::json constraint_json(const LinearConstraint& c, const CoordinateSystem& cs);
nlohmann::json hrep_json(const HRepresentation& h);

}  // namespace qig
