#include "qig/graphs.hpp"

#include <algorithm>
#include <cstdlib>
#include <numeric>
#include <set>
#include <sstream>

namespace qig {

std::string prime_label(const std::string& label) { return label + kInterventionSuffix; }

bool is_prime_label(const std::string& label) {
    return label.size() > kInterventionSuffix.size() &&
           label.compare(label.size() - kInterventionSuffix.size(), kInterventionSuffix.size(),
                         kInterventionSuffix) == 0;
}

std::string render_label(const std::string& label) {
    if (!is_prime_label(label)) return label;
    return label.substr(0, label.size() - kInterventionSuffix.size()) + "'";
}

namespace {

std::unordered_map<std::string, int> build_index(const std::vector<std::string>& nodes) {
    std::unordered_map<std::string, int> index;
    for (size_t i = 0; i < nodes.size(); ++i) {
        if (nodes[i].empty()) throw GraphError("empty node label");
        if (!index.emplace(nodes[i], static_cast<int>(i)).second)
            throw GraphError("duplicate node label '" + nodes[i] + "'");
    }
    return index;
}

int lookup(const std::unordered_map<std::string, int>& index, const std::string& label) {
    auto it = index.find(label);
    if (it == index.end()) throw GraphError("unknown node '" + label + "'");
    return it->second;
}

}  // namespace

// ---------------------------------------------------------------- undirected

UndirectedGraph::UndirectedGraph(std::vector<std::string> nodes, const std::vector<LabelPair>& edges)
    : nodes_(std::move(nodes)), index_(build_index(nodes_)), adj_(nodes_.size()) {
    std::set<std::pair<int, int>> seen;
    for (const auto& [a, b] : edges) {
        int u = lookup(index_, a), v = lookup(index_, b);
        if (u == v) throw GraphError("self-loop at '" + a + "'");
        if (u > v) std::swap(u, v);
        if (!seen.insert({u, v}).second) throw GraphError("duplicate edge " + a + "-" + b);
    }
    edges_.assign(seen.begin(), seen.end());
    for (auto [u, v] : edges_) {
        adj_[u].push_back(v);
        adj_[v].push_back(u);
    }
    for (auto& a : adj_) std::sort(a.begin(), a.end());
}

int UndirectedGraph::index(const std::string& label) const { return lookup(index_, label); }

bool UndirectedGraph::adjacent(int i, int j) const {
    return std::binary_search(adj_[i].begin(), adj_[i].end(), j);
}

bool UndirectedGraph::is_tree() const {
    if (nodes_.empty() || edges_.size() + 1 != nodes_.size()) return false;
    std::vector<char> seen(nodes_.size(), 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    size_t count = 1;
    while (!stack.empty()) {
        int u = stack.back();
        stack.pop_back();
        for (int v : adj_[u])
            if (!seen[v]) {
                seen[v] = 1;
                ++count;
                stack.push_back(v);
            }
    }
    return count == nodes_.size();
}

std::vector<LabelPair> UndirectedGraph::edge_labels() const {
    std::vector<LabelPair> out;
    for (auto [u, v] : edges_) out.emplace_back(nodes_[u], nodes_[v]);
    return out;
}

UndirectedTree::UndirectedTree(std::vector<std::string> nodes, const std::vector<LabelPair>& edges)
    : UndirectedGraph(std::move(nodes), edges) {
    if (!is_tree()) throw GraphError("graph is not a tree");
}

UndirectedTree::UndirectedTree(const UndirectedGraph& g) : UndirectedGraph(g) {
    if (!is_tree()) throw GraphError("graph is not a tree");
}

std::vector<int> UndirectedTree::leaves() const {
    std::vector<int> out;
    for (int i = 0; i < size(); ++i)
        if (degree(i) == 1) out.push_back(i);
    return out;
}

// ---------------------------------------------------------------- dag

Dag::Dag(std::vector<std::string> nodes, const std::vector<LabelPair>& arcs)
    : nodes_(std::move(nodes)), index_(build_index(nodes_)) {
    std::vector<std::pair<int, int>> idx;
    idx.reserve(arcs.size());
    for (const auto& [t, h] : arcs) idx.emplace_back(lookup(index_, t), lookup(index_, h));
    build(idx);
}

Dag::Dag(std::vector<std::string> nodes, const std::vector<std::pair<int, int>>& arcs)
    : nodes_(std::move(nodes)), index_(build_index(nodes_)) {
    build(arcs);
}

void Dag::build(const std::vector<std::pair<int, int>>& arcs) {
    const int n = size();
    std::set<std::pair<int, int>> seen;
    for (auto [t, h] : arcs) {
        if (t < 0 || h < 0 || t >= n || h >= n) throw GraphError("arc index out of range");
        if (t == h) throw GraphError("self-loop at '" + nodes_[t] + "'");
        if (seen.count({h, t})) throw GraphError("arc in both directions " + nodes_[t] + "," + nodes_[h]);
        if (!seen.insert({t, h}).second) throw GraphError("duplicate arc");
    }
    arcs_.assign(seen.begin(), seen.end());
    pa_.assign(n, {});
    ch_.assign(n, {});
    for (auto [t, h] : arcs_) {
        pa_[h].push_back(t);
        ch_[t].push_back(h);
    }
    for (auto& v : pa_) std::sort(v.begin(), v.end());
    for (auto& v : ch_) std::sort(v.begin(), v.end());
    if (static_cast<int>(topological_order().size()) != n) throw GraphError("graph has a directed cycle");
}

int Dag::index(const std::string& label) const { return lookup(index_, label); }

bool Dag::has_arc(int tail, int head) const {
    return std::binary_search(pa_[head].begin(), pa_[head].end(), tail);
}

std::vector<int> Dag::family(int i) const {
    std::vector<int> f = pa_[i];
    f.insert(std::lower_bound(f.begin(), f.end(), i), i);
    return f;
}

std::vector<int> Dag::topological_order() const {
    const int n = size();
    std::vector<int> indeg(n), order;
    for (int i = 0; i < n; ++i) indeg[i] = static_cast<int>(pa_[i].size());
    std::vector<int> ready;
    for (int i = n - 1; i >= 0; --i)
        if (indeg[i] == 0) ready.push_back(i);
    while (!ready.empty()) {
        int u = ready.back();
        ready.pop_back();
        order.push_back(u);
        for (int v : ch_[u])
            if (--indeg[v] == 0) ready.push_back(v);
    }
    return order;
}

std::vector<LabelPair> Dag::arc_labels() const {
    std::vector<LabelPair> out;
    for (auto [t, h] : arcs_) out.emplace_back(nodes_[t], nodes_[h]);
    return out;
}

bool Dag::operator==(const Dag& other) const {
    if (nodes_ != other.nodes_) return false;
    return arcs_ == other.arcs_;
}

IDag::IDag(Dag base, std::vector<std::string> targets) : base_(std::move(base)), targets_(std::move(targets)) {
    std::set<std::string> seen;
    std::vector<std::string> nodes = base_.nodes();
    std::vector<std::pair<int, int>> arcs = base_.arcs();
    for (const auto& t : targets_) {
        if (!base_.has_node(t)) throw GraphError("target '" + t + "' is not a node");
        if (!seen.insert(t).second) throw GraphError("duplicate target '" + t + "'");
        nodes.push_back(prime_label(t));
        arcs.emplace_back(static_cast<int>(nodes.size()) - 1, base_.index(t));
    }
    realized_ = Dag(std::move(nodes), arcs);
}

Pdag::Pdag(std::vector<std::string> nodes, std::vector<std::pair<int, int>> arcs,
           std::vector<std::pair<int, int>> edges)
    : nodes_(std::move(nodes)), arcs_(std::move(arcs)), edges_(std::move(edges)) {
    for (auto& e : edges_)
        if (e.first > e.second) std::swap(e.first, e.second);
    std::sort(arcs_.begin(), arcs_.end());
    std::sort(edges_.begin(), edges_.end());
    std::set<std::pair<int, int>> pairs;
    for (auto [t, h] : arcs_)
        if (!pairs.insert({std::min(t, h), std::max(t, h)}).second) throw GraphError("pdag: pair listed twice");
    for (auto e : edges_)
        if (!pairs.insert(e).second) throw GraphError("pdag: pair listed twice");
}

bool Pdag::has_arc(int tail, int head) const {
    return std::binary_search(arcs_.begin(), arcs_.end(), std::make_pair(tail, head));
}

bool Pdag::has_edge(int u, int v) const {
    if (u > v) std::swap(u, v);
    return std::binary_search(edges_.begin(), edges_.end(), std::make_pair(u, v));
}

std::vector<LabelPair> Pdag::arc_labels() const {
    std::vector<LabelPair> out;
    for (auto [t, h] : arcs_) out.emplace_back(nodes_[t], nodes_[h]);
    return out;
}

std::vector<LabelPair> Pdag::edge_labels() const {
    std::vector<LabelPair> out;
    for (auto [u, v] : edges_) out.emplace_back(nodes_[u], nodes_[v]);
    return out;
}

// ---------------------------------------------------------------- equivalence

UndirectedGraph skeleton(const Dag& d) { return UndirectedGraph(d.nodes(), d.arc_labels()); }

std::vector<std::array<std::string, 3>> v_structures(const Dag& d) {
    std::vector<std::array<std::string, 3>> out;
    for (int j = 0; j < d.size(); ++j) {
        const auto& pa = d.parents(j);
        for (size_t a = 0; a < pa.size(); ++a)
            for (size_t b = a + 1; b < pa.size(); ++b) {
                if (d.adjacent(pa[a], pa[b])) continue;
                std::string x = d.label(pa[a]), z = d.label(pa[b]);
                if (z < x) std::swap(x, z);
                out.push_back({x, d.label(j), z});
            }
    }
    std::sort(out.begin(), out.end());
    return out;
}

bool markov_equivalent(const Dag& d1, const Dag& d2) {
    std::vector<std::string> n1 = d1.nodes(), n2 = d2.nodes();
    std::sort(n1.begin(), n1.end());
    std::sort(n2.begin(), n2.end());
    if (n1 != n2) throw GraphError("markov_equivalent: node sets differ");
    auto edges = [](const Dag& d) {
        std::set<std::pair<std::string, std::string>> s;
        for (auto [t, h] : d.arc_labels()) s.insert(t < h ? std::make_pair(t, h) : std::make_pair(h, t));
        return s;
    };
    return edges(d1) == edges(d2) && v_structures(d1) == v_structures(d2);
}

bool i_markov_equivalent(const Dag& d1, const Dag& d2, const std::vector<std::string>& targets) {
    return markov_equivalent(IDag(d1, targets).realized(), IDag(d2, targets).realized());
}

// ---------------------------------------------------------------- orientations

size_t orientation_cap() {
    if (const char* env = std::getenv("QIG_EDGE_CAP")) {
        long v = std::strtol(env, nullptr, 10);
        if (v > 0 && v < 63) return static_cast<size_t>(v);
    }
    return 22;
}

OrientationStream::OrientationStream(const UndirectedTree& t, const std::vector<LabelPair>& fixed, size_t cap)
    : tree_(t) {
    std::set<std::pair<int, int>> fixed_pairs;
    for (const auto& [a, b] : fixed) {
        int u = t.index(a), v = t.index(b);
        if (!t.adjacent(u, v)) throw GraphError("constraint on non-edge " + a + "-" + b);
        if (!fixed_pairs.insert({std::min(u, v), std::max(u, v)}).second)
            throw GraphError("edge constrained twice " + a + "-" + b);
        fixed_arcs_.emplace_back(u, v);
    }
    for (auto e : t.edges())
        if (!fixed_pairs.count(e)) free_.push_back(e);
    if (free_.size() > cap)
        throw GraphError("orientation enumeration over " + std::to_string(free_.size()) +
                         " edges exceeds cap " + std::to_string(cap));
}

Dag OrientationStream::at(uint64_t index) const {
    std::vector<std::pair<int, int>> arcs = fixed_arcs_;
    for (size_t b = 0; b < free_.size(); ++b) {
        auto [u, v] = free_[b];
        if ((index >> b) & 1U)
            arcs.emplace_back(v, u);
        else
            arcs.emplace_back(u, v);
    }
    return Dag(tree_.nodes(), arcs);
}

bool OrientationStream::next(Dag& out) {
    if (cursor_ >= count()) return false;
    out = at(cursor_++);
    return true;
}

std::vector<Dag> enumerate_orientations(const UndirectedTree& t, const std::vector<LabelPair>& fixed, size_t cap) {
    OrientationStream s(t, fixed, cap);
    std::vector<Dag> out;
    out.reserve(s.count());
    Dag d;
    while (s.next(d)) out.push_back(std::move(d));
    return out;
}

// ---------------------------------------------------------------- essential graph

void propagate_orientations(int n, std::vector<std::pair<int, int>>& directed,
                            std::vector<std::pair<int, int>>& undirected) {
    std::vector<std::set<int>> adj(n), parents(n);
    for (auto [t, h] : directed) {
        adj[t].insert(h);
        adj[h].insert(t);
        parents[h].insert(t);
    }
    for (auto [u, v] : undirected) {
        adj[u].insert(v);
        adj[v].insert(u);
    }
    bool changed = true;
    while (changed) {
        changed = false;
        for (size_t e = 0; e < undirected.size(); ++e) {
            auto [a, b] = undirected[e];
            for (auto [u, v] : {std::make_pair(a, b), std::make_pair(b, a)}) {
                bool fire = false;
                for (int w : parents[u])
                    if (w != v && !adj[w].count(v)) {
                        fire = true;
                        break;
                    }
                if (fire) {
                    directed.emplace_back(u, v);
                    parents[v].insert(u);
                    undirected.erase(undirected.begin() + static_cast<long>(e));
                    changed = true;
                    break;
                }
            }
            if (changed) break;
        }
    }
}

Pdag essential_graph(const Dag& d, const std::vector<std::string>& targets) {
    if (!skeleton(d).is_tree()) throw GraphError("essential_graph: skeleton is not a tree");
    IDag idag(d, targets);
    const Dag& r = idag.realized();
    std::set<std::pair<int, int>> forced;
    for (int j = 0; j < r.size(); ++j) {
        const auto& pa = r.parents(j);
        for (size_t a = 0; a < pa.size(); ++a)
            for (size_t b = a + 1; b < pa.size(); ++b)
                if (!r.adjacent(pa[a], pa[b])) {
                    forced.insert({pa[a], j});
                    forced.insert({pa[b], j});
                }
    }
    // Interventional arcs i' -> i are known directions; they drive the closure.
    std::vector<std::pair<int, int>> directed(forced.begin(), forced.end()), undirected;
    for (auto [t, h] : r.arcs()) {
        if (forced.count({t, h})) continue;
        if (t >= d.size())
            directed.emplace_back(t, h);
        else
            undirected.emplace_back(std::min(t, h), std::max(t, h));
    }
    propagate_orientations(r.size(), directed, undirected);
    std::vector<std::pair<int, int>> arcs;
    for (auto [t, h] : directed)
        if (t < d.size() && h < d.size()) arcs.emplace_back(t, h);
    return Pdag(d.nodes(), arcs, undirected);
}

// ---------------------------------------------------------------- io

namespace {

nlohmann::json pairs_json(const std::vector<LabelPair>& ps) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& [x, y] : ps) a.push_back({x, y});
    return a;
}

std::vector<LabelPair> pairs_from(const nlohmann::json& j, const char* key) {
    std::vector<LabelPair> out;
    if (!j.contains(key)) return out;
    for (const auto& e : j.at(key)) {
        if (!e.is_array() || e.size() != 2) throw GraphError(std::string("malformed entry in '") + key + "'");
        out.emplace_back(e[0].get<std::string>(), e[1].get<std::string>());
    }
    return out;
}

std::vector<std::string> nodes_from(const nlohmann::json& j) {
    if (!j.contains("nodes")) throw GraphError("graph JSON lacks 'nodes'");
    std::vector<std::string> out;
    for (const auto& n : j.at("nodes")) out.push_back(n.is_string() ? n.get<std::string>() : n.dump());
    return out;
}

std::string quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out + "\"";
}

}  // namespace

nlohmann::json to_json(const UndirectedGraph& g) {
    return {{"nodes", g.nodes()}, {"arcs", nlohmann::json::array()}, {"edges", pairs_json(g.edge_labels())},
            {"targets", nlohmann::json::array()}};
}

nlohmann::json to_json(const Dag& d, const std::vector<std::string>& targets) {
    return {{"nodes", d.nodes()}, {"arcs", pairs_json(d.arc_labels())}, {"edges", nlohmann::json::array()},
            {"targets", targets}};
}

nlohmann::json to_json(const Pdag& p) {
    return {{"nodes", p.nodes()}, {"arcs", pairs_json(p.arc_labels())}, {"edges", pairs_json(p.edge_labels())},
            {"targets", nlohmann::json::array()}};
}

UndirectedTree tree_from_json(const nlohmann::json& j) {
    auto edges = pairs_from(j, "edges");
    for (const auto& a : pairs_from(j, "arcs")) edges.push_back(a);
    return UndirectedTree(nodes_from(j), edges);
}

Dag dag_from_json(const nlohmann::json& j) {
    if (j.contains("edges") && !j.at("edges").empty()) throw GraphError("DAG JSON has undirected edges");
    return Dag(nodes_from(j), pairs_from(j, "arcs"));
}

std::vector<std::string> targets_from_json(const nlohmann::json& j) {
    std::vector<std::string> out;
    if (j.contains("targets"))
        for (const auto& t : j.at("targets")) out.push_back(t.get<std::string>());
    return out;
}

namespace {

std::string dot_header(const std::vector<std::string>& nodes, const std::vector<std::string>& targets,
                       const char* kind) {
    std::ostringstream os;
    os << kind << " G {\n";
    for (const auto& n : nodes) os << "  " << quote(n) << ";\n";
    for (const auto& t : targets)
        os << "  " << quote(prime_label(t)) << " [shape=box, label=" << quote(t + "'") << "];\n";
    return os.str();
}

}  // namespace

std::string to_dot(const Dag& d, const std::vector<std::string>& targets) {
    std::string s = dot_header(d.nodes(), targets, "digraph");
    for (const auto& [t, h] : d.arc_labels()) s += "  " + quote(t) + " -> " + quote(h) + ";\n";
    for (const auto& t : targets) s += "  " + quote(prime_label(t)) + " -> " + quote(t) + ";\n";
    return s + "}\n";
}

std::string to_dot(const Pdag& p, const std::vector<std::string>& targets) {
    std::string s = dot_header(p.nodes(), targets, "digraph");
    for (const auto& [t, h] : p.arc_labels()) s += "  " + quote(t) + " -> " + quote(h) + ";\n";
    for (const auto& [u, v] : p.edge_labels()) s += "  " + quote(u) + " -> " + quote(v) + " [dir=none];\n";
    for (const auto& t : targets) s += "  " + quote(prime_label(t)) + " -> " + quote(t) + ";\n";
    return s + "}\n";
}

std::string to_dot(const UndirectedGraph& g) {
    std::string s = dot_header(g.nodes(), {}, "graph");
    for (const auto& [u, v] : g.edge_labels()) s += "  " + quote(u) + " -- " + quote(v) + ";\n";
    return s + "}\n";
}

}  // namespace qig
