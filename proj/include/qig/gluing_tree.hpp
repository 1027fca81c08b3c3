#pragma once

#include <string>
#include <vector>

#include "qig/graphs.hpp"

namespace qig {

// A tree whose white nodes are split into leaf targets I and degree-two targets J.
class GluingTree {
public:
    GluingTree() = default;
    GluingTree(UndirectedTree tree, std::vector<std::string> leaf_targets,
               std::vector<std::string> path_targets = {});

    const UndirectedTree& tree() const { return tree_; }
    int size() const { return tree_.size(); }
    const std::vector<std::string>& I() const { return I_; }
    const std::vector<std::string>& J() const { return J_; }
    // I and J together, in tree node order.
    const std::vector<std::string>& targets() const { return targets_; }

    bool in_I(int v) const { return kind_[v] == 1; }
    bool in_J(int v) const { return kind_[v] == 2; }
    bool white(int v) const { return kind_[v] != 0; }
    // Not a leaf of T^{I u J}.
    bool internal(int v) const { return tree_.degree(v) + (white(v) ? 1 : 0) >= 2; }

    // Tree nodes followed by the interventional copies of the targets.
    const std::vector<std::string>& universe() const { return universe_; }
    int prime_of(int v) const { return prime_[v]; }

    // Realized I-DAG of an orientation of the tree; node order equals universe().
    Dag realize(const Dag& orientation) const;
    // Orientation pointing every edge away from the first black node.
    Dag canonical_orientation() const;

    nlohmann::json to_json() const;
    static GluingTree from_json(const nlohmann::json& j);

private:
    UndirectedTree tree_;
    std::vector<std::string> I_, J_, targets_, universe_;
    std::vector<int> kind_, prime_;
};

}  // namespace qig
