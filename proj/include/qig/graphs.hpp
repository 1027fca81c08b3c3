#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

namespace qig {

class GraphError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Suffix used for the interventional copy i' of a node i.
inline const std::string kInterventionSuffix = "_z";

std::string prime_label(const std::string& label);
bool is_prime_label(const std::string& label);
// "a_z" -> "a'" for human-readable output.
std::string render_label(const std::string& label);

using LabelPair = std::pair<std::string, std::string>;

class UndirectedGraph {
public:
    UndirectedGraph() = default;
    UndirectedGraph(std::vector<std::string> nodes, const std::vector<LabelPair>& edges);

    const std::vector<std::string>& nodes() const { return nodes_; }
    int size() const { return static_cast<int>(nodes_.size()); }
    int index(const std::string& label) const;
    bool has_node(const std::string& label) const { return index_.count(label) > 0; }
    const std::string& label(int i) const { return nodes_[i]; }

    // Edges as index pairs (first < second), sorted.
    const std::vector<std::pair<int, int>>& edges() const { return edges_; }
    const std::vector<int>& neighbors(int i) const { return adj_[i]; }
    int degree(int i) const { return static_cast<int>(adj_[i].size()); }
    bool adjacent(int i, int j) const;
    bool is_tree() const;

    std::vector<LabelPair> edge_labels() const;

protected:
    std::vector<std::string> nodes_;
    std::unordered_map<std::string, int> index_;
    std::vector<std::pair<int, int>> edges_;
    std::vector<std::vector<int>> adj_;
};

class UndirectedTree : public UndirectedGraph {
public:
    UndirectedTree() = default;
    UndirectedTree(std::vector<std::string> nodes, const std::vector<LabelPair>& edges);
    explicit UndirectedTree(const UndirectedGraph& g);

    std::vector<int> leaves() const;
    bool is_leaf(int i) const { return degree(i) == 1; }
};

class Dag {
public:
    Dag() = default;
    Dag(std::vector<std::string> nodes, const std::vector<LabelPair>& arcs);
    Dag(std::vector<std::string> nodes, const std::vector<std::pair<int, int>>& arcs);

    const std::vector<std::string>& nodes() const { return nodes_; }
    int size() const { return static_cast<int>(nodes_.size()); }
    int index(const std::string& label) const;
    bool has_node(const std::string& label) const { return index_.count(label) > 0; }
    const std::string& label(int i) const { return nodes_[i]; }

    // Arcs (tail, head) sorted.
    const std::vector<std::pair<int, int>>& arcs() const { return arcs_; }
    const std::vector<int>& parents(int i) const { return pa_[i]; }
    const std::vector<int>& children(int i) const { return ch_[i]; }
    bool has_arc(int tail, int head) const;
    bool adjacent(int i, int j) const { return has_arc(i, j) || has_arc(j, i); }
    std::vector<int> family(int i) const;
    std::vector<int> topological_order() const;

    std::vector<LabelPair> arc_labels() const;
    bool operator==(const Dag& other) const;

private:
    void build(const std::vector<std::pair<int, int>>& arcs);

    std::vector<std::string> nodes_;
    std::unordered_map<std::string, int> index_;
    std::vector<std::pair<int, int>> arcs_;
    std::vector<std::vector<int>> pa_;
    std::vector<std::vector<int>> ch_;
};

class IDag {
public:
    IDag() = default;
    IDag(Dag base, std::vector<std::string> targets);

    const Dag& base() const { return base_; }
    const std::vector<std::string>& targets() const { return targets_; }
    // Base nodes followed by one node label+"_z" per target, in target order.
    const Dag& realized() const { return realized_; }

private:
    Dag base_;
    std::vector<std::string> targets_;
    Dag realized_;
};

class Pdag {
public:
    Pdag() = default;
    Pdag(std::vector<std::string> nodes, std::vector<std::pair<int, int>> arcs,
         std::vector<std::pair<int, int>> edges);

    const std::vector<std::string>& nodes() const { return nodes_; }
    const std::vector<std::pair<int, int>>& arcs() const { return arcs_; }
    const std::vector<std::pair<int, int>>& edges() const { return edges_; }
    bool has_arc(int tail, int head) const;
    bool has_edge(int u, int v) const;

    std::vector<LabelPair> arc_labels() const;
    std::vector<LabelPair> edge_labels() const;
    bool operator==(const Pdag& other) const = default;

private:
    std::vector<std::string> nodes_;
    std::vector<std::pair<int, int>> arcs_;
    std::vector<std::pair<int, int>> edges_;
};

UndirectedGraph skeleton(const Dag& d);

// Triples (i, j, k) with i -> j <- k, i and k nonadjacent, label(i) < label(k).
std::vector<std::array<std::string, 3>> v_structures(const Dag& d);

bool markov_equivalent(const Dag& d1, const Dag& d2);
bool i_markov_equivalent(const Dag& d1, const Dag& d2, const std::vector<std::string>& targets);

size_t orientation_cap();

// Streams all orientations of a tree. A constraint fixes an edge (u, v) as u -> v.
class OrientationStream {
public:
    OrientationStream(const UndirectedTree& t, const std::vector<LabelPair>& fixed = {},
                      size_t cap = orientation_cap());

    uint64_t count() const { return uint64_t{1} << free_.size(); }
    Dag at(uint64_t index) const;
    bool next(Dag& out);
    void reset() { cursor_ = 0; }

private:
    UndirectedTree tree_;
    std::vector<std::pair<int, int>> fixed_arcs_;
    std::vector<std::pair<int, int>> free_;
    uint64_t cursor_ = 0;
};

std::vector<Dag> enumerate_orientations(const UndirectedTree& t,
                                        const std::vector<LabelPair>& fixed = {},
                                        size_t cap = orientation_cap());

// Repeatedly orients u -> v when w -> u, u - v undirected and w, v nonadjacent.
// `directed` and `undirected` index into the same node set; both are updated in place.
void propagate_orientations(int n, std::vector<std::pair<int, int>>& directed,
                            std::vector<std::pair<int, int>>& undirected);

Pdag essential_graph(const Dag& d, const std::vector<std::string>& targets = {});

nlohmann::json to_json(const UndirectedGraph& g);
nlohmann::json to_json(const Dag& d, const std::vector<std::string>& targets = {});
nlohmann::json to_json(const Pdag& p);
UndirectedTree tree_from_json(const nlohmann::json& j);
Dag dag_from_json(const nlohmann::json& j);
std::vector<std::string> targets_from_json(const nlohmann::json& j);

std::string to_dot(const Dag& d, const std::vector<std::string>& targets = {});
std::string to_dot(const Pdag& p, const std::vector<std::string>& targets = {});
std::string to_dot(const UndirectedGraph& g);

}  // namespace qig
