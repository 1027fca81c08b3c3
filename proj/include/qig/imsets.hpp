#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "qig/gluing_tree.hpp"
#include "qig/graphs.hpp"

namespace qig {

// Sorted, duplicate-free set of node labels. Ordered by size, then lexicographically.
class NodeSubset {
public:
    NodeSubset() = default;
    NodeSubset(std::vector<std::string> labels);
    NodeSubset(std::initializer_list<std::string> labels) : NodeSubset(std::vector<std::string>(labels)) {}

    const std::vector<std::string>& labels() const { return labels_; }
    size_t size() const { return labels_.size(); }
    bool empty() const { return labels_.empty(); }
    bool contains(const std::string& l) const;
    bool is_subset_of(const NodeSubset& other) const;

    std::string key() const;  // "a|b|c"
    static NodeSubset from_key(const std::string& key);
    std::string render() const;  // "x_{aa'c}" style for text output

    bool operator==(const NodeSubset& o) const { return labels_ == o.labels_; }
    bool operator<(const NodeSubset& o) const {
        if (labels_.size() != o.labels_.size()) return labels_.size() < o.labels_.size();
        return labels_ < o.labels_;
    }

private:
    std::vector<std::string> labels_;
};

using StandardImset = std::map<NodeSubset, int>;
// Only entries equal to one are stored; an absent key reads as zero.
using CharImset = std::map<NodeSubset, int>;

int imset_value(const CharImset& c, const NodeSubset& s);

StandardImset standard_imset(const Dag& d);
StandardImset standard_imset(const IDag& d);
CharImset char_imset(const Dag& d);
CharImset char_imset(const IDag& d);
// The universe defaults to the labels in u's support; pass it when u may vanish (complete DAGs).
CharImset char_from_standard(const StandardImset& u, const std::vector<std::string>& universe = {});

// c(S) by the sink criterion, S given as indices into d.
bool char_value(const Dag& d, const std::vector<int>& s);

struct CoordinateSystem {
    std::vector<std::string> universe;
    std::vector<NodeSubset> subsets;
    std::vector<std::vector<int>> members;  // indices into universe, ascending
    std::vector<bool> zero;                  // identically zero on the polytope

    size_t size() const { return subsets.size(); }
    int find(const NodeSubset& s) const;
    int find(std::vector<int> members) const;

    std::map<std::vector<int>, int> lookup;
};

CoordinateSystem coordinate_system(const GluingTree& gt);

// Dense 0/1 vector of a realized DAG (node order = gt.universe()) over the coordinates.
std::vector<int> dense_imset(const CoordinateSystem& cs, const Dag& realized);
CharImset sparse_imset(const CoordinateSystem& cs, const std::vector<int>& dense);
std::vector<int> dense_from_sparse(const CoordinateSystem& cs, const CharImset& c);

nlohmann::json imset_json(const CharImset& c);
nlohmann::json imset_json(const CoordinateSystem& cs, const std::vector<int>& dense);

}  // namespace qig
