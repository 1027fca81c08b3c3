#include "qig/gluing_tree.hpp"

#include <algorithm>
#include <set>

namespace qig {

GluingTree::GluingTree(UndirectedTree tree, std::vector<std::string> leaf_targets,
                       std::vector<std::string> path_targets)
    : tree_(std::move(tree)), kind_(tree_.size(), 0), prime_(tree_.size(), -1) {
    for (const auto& l : leaf_targets) {
        int v = tree_.index(l);
        if (kind_[v]) throw GraphError("target '" + l + "' listed twice");
        if (tree_.degree(v) != 1) throw GraphError("leaf target '" + l + "' is not a leaf");
        kind_[v] = 1;
    }
    for (const auto& l : path_targets) {
        int v = tree_.index(l);
        if (kind_[v]) throw GraphError("target '" + l + "' listed twice");
        if (tree_.degree(v) != 2) throw GraphError("path target '" + l + "' does not have degree two");
        kind_[v] = 2;
    }
    for (int v = 0; v < tree_.size(); ++v) {
        if (!kind_[v]) continue;
        for (int u : tree_.neighbors(v)) {
            if (kind_[u]) throw GraphError("white nodes '" + tree_.label(u) + "' and '" + tree_.label(v) + "' are adjacent");
            if (tree_.degree(u) < 2)
                throw GraphError("white node '" + tree_.label(v) + "' is adjacent to the leaf '" + tree_.label(u) + "'");
        }
    }
    universe_ = tree_.nodes();
    for (int v = 0; v < tree_.size(); ++v) {
        if (kind_[v] == 1) I_.push_back(tree_.label(v));
        if (kind_[v] == 2) J_.push_back(tree_.label(v));
        if (kind_[v]) {
            targets_.push_back(tree_.label(v));
            prime_[v] = static_cast<int>(universe_.size());
            universe_.push_back(prime_label(tree_.label(v)));
        }
    }
}

Dag GluingTree::realize(const Dag& orientation) const {
    return IDag(orientation, targets_).realized();
}

Dag GluingTree::canonical_orientation() const {
    int root = 0;
    while (root < size() && white(root)) ++root;
    std::vector<std::pair<int, int>> arcs;
    std::vector<char> seen(size(), 0);
    std::vector<int> stack{root};
    seen[root] = 1;
    while (!stack.empty()) {
        int u = stack.back();
        stack.pop_back();
        for (int v : tree_.neighbors(u))
            if (!seen[v]) {
                seen[v] = 1;
                arcs.emplace_back(u, v);
                stack.push_back(v);
            }
    }
    return Dag(tree_.nodes(), arcs);
}

nlohmann::json GluingTree::to_json() const {
    nlohmann::json j = qig::to_json(static_cast<const UndirectedGraph&>(tree_));
    j["targets"] = I_;
    j["J"] = J_;
    return j;
}

GluingTree GluingTree::from_json(const nlohmann::json& j) {
    std::vector<std::string> J;
    if (j.contains("J"))
        for (const auto& x : j.at("J")) J.push_back(x.get<std::string>());
    return GluingTree(tree_from_json(j), targets_from_json(j), J);
}

}  // namespace qig
