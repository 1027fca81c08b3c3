#include "qig/imsets.hpp"

#include <algorithm>
#include <bit>
#include <set>
#include <stdexcept>
#include <sstream>

namespace qig {

NodeSubset::NodeSubset(std::vector<std::string> labels) : labels_(std::move(labels)) {
    std::sort(labels_.begin(), labels_.end());
    labels_.erase(std::unique(labels_.begin(), labels_.end()), labels_.end());
}

bool NodeSubset::contains(const std::string& l) const {
    return std::binary_search(labels_.begin(), labels_.end(), l);
}

bool NodeSubset::is_subset_of(const NodeSubset& other) const {
    return std::includes(other.labels_.begin(), other.labels_.end(), labels_.begin(), labels_.end());
}

std::string NodeSubset::key() const {
    std::string out;
    for (size_t i = 0; i < labels_.size(); ++i) {
        if (i) out += '|';
        out += labels_[i];
    }
    return out;
}

NodeSubset NodeSubset::from_key(const std::string& key) {
    std::vector<std::string> parts;
    if (key.empty()) return NodeSubset();
    std::stringstream ss(key);
    std::string item;
    while (std::getline(ss, item, '|')) parts.push_back(item);
    return NodeSubset(parts);
}

std::string NodeSubset::render() const {
    // Base labels sorted, each followed directly by its primed copy when present.
    std::vector<std::string> base;
    for (const auto& l : labels_)
        if (!is_prime_label(l)) base.push_back(l);
    bool multi = std::any_of(base.begin(), base.end(), [](const std::string& l) { return l.size() > 1; });
    std::string out = "x_{";
    bool first = true;
    for (const auto& b : base) {
        for (const auto& l : {b, prime_label(b)}) {
            if (!contains(l)) continue;
            if (multi && !first) out += ',';
            out += render_label(l);
            first = false;
        }
    }
    return out + "}";
}

int imset_value(const CharImset& c, const NodeSubset& s) {
    auto it = c.find(s);
    return it == c.end() ? 0 : it->second;
}

// ---------------------------------------------------------------- imsets of DAGs

namespace {

NodeSubset subset_of(const Dag& d, const std::vector<int>& idx) {
    std::vector<std::string> l;
    for (int i : idx) l.push_back(d.label(i));
    return NodeSubset(l);
}

template <class F>
void for_each_subset(const std::vector<int>& base, F&& f) {
    const size_t n = base.size();
    std::vector<int> cur;
    for (uint64_t m = 0; m < (uint64_t{1} << n); ++m) {
        cur.clear();
        for (size_t b = 0; b < n; ++b)
            if ((m >> b) & 1U) cur.push_back(base[b]);
        f(cur);
    }
}

void add(StandardImset& u, const NodeSubset& s, int v) {
    int& x = u[s];
    x += v;
    if (x == 0) u.erase(s);
}

}  // namespace

StandardImset standard_imset(const Dag& d) {
    StandardImset u;
    std::vector<int> all(d.size());
    for (int i = 0; i < d.size(); ++i) all[i] = i;
    add(u, subset_of(d, all), 1);
    add(u, NodeSubset(), -1);
    for (int i = 0; i < d.size(); ++i) {
        add(u, subset_of(d, d.parents(i)), 1);
        add(u, subset_of(d, d.family(i)), -1);
    }
    return u;
}

StandardImset standard_imset(const IDag& d) { return standard_imset(d.realized()); }

bool char_value(const Dag& d, const std::vector<int>& s) {
    for (int i : s) {
        bool ok = true;
        for (int j : s)
            if (j != i && !d.has_arc(j, i)) {
                ok = false;
                break;
            }
        if (ok) return true;
    }
    return false;
}

CharImset char_imset(const Dag& d) {
    // c(S) = 1 forces S inside the family of its sink.
    CharImset c;
    for (int i = 0; i < d.size(); ++i)
        for_each_subset(d.parents(i), [&](const std::vector<int>& sub) {
            if (sub.empty()) return;
            std::vector<int> s = sub;
            s.push_back(i);
            c[subset_of(d, s)] = 1;
        });
    return c;
}

CharImset char_imset(const IDag& d) { return char_imset(d.realized()); }

CharImset char_from_standard(const StandardImset& u, const std::vector<std::string>& universe) {
    // c(S) = 1 - sum_{T >= S} u(T) over every S with |S| >= 2.
    std::set<std::string> nodes(universe.begin(), universe.end());
    for (const auto& [t, val] : u) nodes.insert(t.labels().begin(), t.labels().end());
    std::vector<std::string> l(nodes.begin(), nodes.end());
    if (l.size() > 24) throw std::invalid_argument("char_from_standard: universe too large");
    CharImset c;
    for (uint64_t m = 0; m < (uint64_t{1} << l.size()); ++m) {
        if (std::popcount(m) < 2) continue;
        std::vector<std::string> sv;
        for (size_t b = 0; b < l.size(); ++b)
            if ((m >> b) & 1U) sv.push_back(l[b]);
        NodeSubset s(sv);
        int sum = 0;
        for (const auto& [t, val] : u)
            if (s.is_subset_of(t)) sum += val;
        if (1 - sum == 1) c[s] = 1;
    }
    return c;
}

// ---------------------------------------------------------------- coordinates

int CoordinateSystem::find(const NodeSubset& s) const {
    std::vector<int> idx;
    for (const auto& l : s.labels()) {
        auto it = std::find(universe.begin(), universe.end(), l);
        if (it == universe.end()) return -1;
        idx.push_back(static_cast<int>(it - universe.begin()));
    }
    return find(std::move(idx));
}

int CoordinateSystem::find(std::vector<int> m) const {
    std::sort(m.begin(), m.end());
    auto it = lookup.find(m);
    return it == lookup.end() ? -1 : it->second;
}

CoordinateSystem coordinate_system(const GluingTree& gt) {
    const auto& t = gt.tree();
    CoordinateSystem cs;
    cs.universe = gt.universe();
    std::vector<std::pair<NodeSubset, std::vector<int>>> items;
    for (int v = 0; v < t.size(); ++v) {
        // Closed neighbourhood of v in T^{I u J}.
        std::vector<int> nb = t.neighbors(v);
        if (gt.white(v)) nb.push_back(gt.prime_of(v));
        for_each_subset(nb, [&](const std::vector<int>& sub) {
            if (sub.size() < 2) return;
            std::vector<int> s = sub;
            s.push_back(v);
            std::sort(s.begin(), s.end());
            std::vector<std::string> l;
            for (int i : s) l.push_back(cs.universe[i]);
            items.emplace_back(NodeSubset(l), s);
        });
    }
    std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (auto& [s, m] : items) {
        bool zero = false;
        // For j in J with neighbours i, k: {i,j,k} and {i,j,j',k} vanish on the polytope.
        for (int v : m)
            if (v < t.size() && gt.in_J(v)) {
                const auto& nb = t.neighbors(v);
                if (std::find(m.begin(), m.end(), nb[0]) != m.end() &&
                    std::find(m.begin(), m.end(), nb[1]) != m.end())
                    zero = true;
            }
        cs.lookup[m] = static_cast<int>(cs.subsets.size());
        cs.subsets.push_back(s);
        cs.members.push_back(m);
        cs.zero.push_back(zero);
    }
    return cs;
}

std::vector<int> dense_imset(const CoordinateSystem& cs, const Dag& realized) {
    std::vector<int> x(cs.size());
    for (size_t c = 0; c < cs.size(); ++c) x[c] = char_value(realized, cs.members[c]) ? 1 : 0;
    return x;
}

CharImset sparse_imset(const CoordinateSystem& cs, const std::vector<int>& dense) {
    CharImset c;
    for (size_t i = 0; i < cs.size(); ++i)
        if (dense[i]) c[cs.subsets[i]] = dense[i];
    return c;
}

std::vector<int> dense_from_sparse(const CoordinateSystem& cs, const CharImset& c) {
    std::vector<int> x(cs.size());
    for (size_t i = 0; i < cs.size(); ++i) x[i] = imset_value(c, cs.subsets[i]);
    return x;
}

nlohmann::json imset_json(const CharImset& c) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [s, v] : c) j[s.key()] = v;
    return j;
}

nlohmann::json imset_json(const CoordinateSystem& cs, const std::vector<int>& dense) {
    nlohmann::json j = nlohmann::json::object();
    for (size_t i = 0; i < cs.size(); ++i) j[cs.subsets[i].key()] = dense[i];
    return j;
}

}  // namespace qig
