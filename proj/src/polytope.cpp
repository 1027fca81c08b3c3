#include "qig/polytope.hpp"

#include <algorithm>
#include <bit>
#include <cstdlib>
#include <functional>
#include <set>
#include <sstream>

namespace qig {

void Functional::add_term(int coord, const Rational& c) {
    if (coord < 0) throw std::logic_error("functional term outside the coordinate system");
    Rational& x = coeffs[coord];
    x += c;
    if (x == 0) coeffs.erase(coord);
}

Functional& Functional::operator+=(const Functional& o) {
    for (const auto& [k, v] : o.coeffs) add_term(k, v);
    constant += o.constant;
    return *this;
}

Functional& Functional::operator-=(const Functional& o) {
    for (const auto& [k, v] : o.coeffs) add_term(k, -v);
    constant -= o.constant;
    return *this;
}

Rational Functional::eval(const std::vector<int>& x) const {
    Rational s = constant;
    for (const auto& [k, v] : coeffs)
        if (x[k]) s += v * x[k];
    return s;
}

Rational LinearConstraint::lhs(const std::vector<int>& x) const {
    Rational s = 0;
    for (const auto& [k, v] : coeffs)
        if (x[k]) s += v * x[k];
    return s;
}

Rational LinearConstraint::lhs(const std::vector<Rational>& x) const {
    Rational s = 0;
    for (const auto& [k, v] : coeffs) s += v * x[k];
    return s;
}

Rational LinearConstraint::slack(const std::vector<int>& x) const {
    Rational l = lhs(x);
    return sense == Sense::Ge ? Rational(l - rhs) : Rational(rhs - l);
}

bool LinearConstraint::satisfied(const std::vector<int>& x) const {
    if (sense == Sense::Eq) return lhs(x) == rhs;
    return sgn(slack(x)) >= 0;
}

std::vector<std::string> ForkedSubtree::labels(const GluingTree& gt) const {
    std::vector<std::string> out;
    for (int v : nodes) out.push_back(gt.tree().label(v));
    return out;
}

size_t subtree_cap() {
    if (const char* env = std::getenv("QIG_SUBTREE_CAP")) {
        long v = std::strtol(env, nullptr, 10);
        if (v > 0) return static_cast<size_t>(v);
    }
    return 1000000;
}

namespace {

int coord_of(const CoordinateSystem& cs, std::vector<int> m) {
    int c = cs.find(std::move(m));
    if (c < 0) throw std::logic_error("subset outside the coordinate system");
    return c;
}

// Calls f(subset) for every subset of base (as a vector), smallest masks first.
template <class F>
void subsets(const std::vector<int>& base, F&& f) {
    std::vector<int> cur;
    for (uint64_t m = 0; m < (uint64_t{1} << base.size()); ++m) {
        cur.clear();
        for (size_t b = 0; b < base.size(); ++b)
            if ((m >> b) & 1U) cur.push_back(base[b]);
        f(cur);
    }
}

std::vector<int> concat(std::vector<int> a, const std::vector<int>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

int sign_of(size_t k) { return k % 2 == 0 ? 1 : -1; }

std::string node_list(const GluingTree& gt, const std::vector<int>& nodes) {
    std::string s = "{";
    for (size_t i = 0; i < nodes.size(); ++i) s += (i ? "," : "") + gt.tree().label(nodes[i]);
    return s + "}";
}

}  // namespace

// ---------------------------------------------------------------- families

std::vector<LinearConstraint> star_inequalities(const GluingTree& gt, const CoordinateSystem& cs) {
    const auto& t = gt.tree();
    std::vector<LinearConstraint> out;
    for (int l = 0; l < t.size(); ++l) {
        if (gt.white(l) || !gt.internal(l)) continue;
        const auto& nb = t.neighbors(l);
        std::vector<std::vector<int>> substars;
        subsets(nb, [&](const std::vector<int>& s) {
            if (s.size() >= 2) substars.push_back(s);
        });
        std::stable_sort(substars.begin(), substars.end(),
                         [](const auto& a, const auto& b) { return a.size() > b.size(); });
        for (const auto& leaves : substars) {
            std::vector<int> rest;
            for (int u : nb)
                if (!std::binary_search(leaves.begin(), leaves.end(), u)) rest.push_back(u);
            LinearConstraint c;
            c.sense = Sense::Ge;
            c.tag = "star";
            c.origin = "star N[" + t.label(l) + "] leaves " + node_list(gt, leaves);
            subsets(rest, [&](const std::vector<int>& extra) {
                std::vector<int> a = concat(concat({l}, leaves), extra);
                Rational coef = sign_of(extra.size());
                c.coeffs[coord_of(cs, a)] += coef;
            });
            out.push_back(std::move(c));
        }
    }
    return out;
}

Functional indicator_v(int u, int v, const GluingTree& gt, const CoordinateSystem& cs) {
    const auto& t = gt.tree();
    if (!t.adjacent(u, v)) throw std::invalid_argument("indicator_v: not an edge");
    if (!gt.internal(v)) throw std::invalid_argument("indicator_v: head is an untargeted leaf");
    Functional f;
    if (gt.white(v)) {
        f.add_term(coord_of(cs, {u, v, gt.prime_of(v)}), 1);
        return f;
    }
    std::vector<int> others;
    for (int w : t.neighbors(v))
        if (w != u) others.push_back(w);
    subsets(others, [&](const std::vector<int>& a) {
        if (a.empty()) return;
        f.add_term(coord_of(cs, concat(a, {u, v})), sign_of(a.size() + 1));
    });
    return f;
}

std::vector<LinearConstraint> bidirected_edge_inequalities(const GluingTree& gt, const CoordinateSystem& cs) {
    std::vector<LinearConstraint> out;
    for (auto [u, v] : gt.tree().edges()) {
        if (!gt.internal(u) || !gt.internal(v)) continue;
        Functional f = indicator_v(u, v, gt, cs);
        f += indicator_v(v, u, gt, cs);
        LinearConstraint c;
        c.coeffs = std::move(f.coeffs);
        c.sense = Sense::Le;
        c.rhs = 1;
        c.tag = "bidirected";
        c.origin = "edge " + gt.tree().label(u) + "-" + gt.tree().label(v);
        out.push_back(std::move(c));
    }
    return out;
}

Functional forced_out_functional(int c, const std::vector<int>& L, const GluingTree& gt,
                                 const CoordinateSystem& cs) {
    const auto& t = gt.tree();
    if (gt.white(c) || !gt.internal(c)) throw std::invalid_argument("forced_out_functional: c must be internal black");
    std::vector<int> others, ls = L;
    std::sort(ls.begin(), ls.end());
    for (int w : ls)
        if (!t.adjacent(c, w)) throw std::invalid_argument("forced_out_functional: L is not inside N(c)");
    for (int w : t.neighbors(c))
        if (!std::binary_search(ls.begin(), ls.end(), w)) others.push_back(w);
    Functional f;
    subsets(others, [&](const std::vector<int>& a0) {
        if (a0.size() < 2) return;
        std::vector<int> a = concat({c}, a0);
        subsets(ls, [&](const std::vector<int>& b) {
            Rational coef = sign_of(a.size() + b.size() - 1) * static_cast<long>(a.size() - 2);
            f.add_term(coord_of(cs, concat(a, b)), coef);
        });
    });
    return f;
}

Functional hash_functional(int c, const std::vector<int>& subtree_nodes, const GluingTree& gt,
                           const CoordinateSystem& cs) {
    std::vector<int> nb;
    for (int w : gt.tree().neighbors(c))
        if (std::find(subtree_nodes.begin(), subtree_nodes.end(), w) != subtree_nodes.end()) nb.push_back(w);
    Functional f;
    subsets(nb, [&](const std::vector<int>& a) {
        if (a.size() < 2) return;
        f.add_term(coord_of(cs, concat({c}, a)), sign_of(a.size()));
    });
    return f;
}

// ---------------------------------------------------------------- forked subtrees

std::vector<ForkedSubtree> enumerate_forked_subtrees(const GluingTree& gt, size_t cap) {
    const auto& t = gt.tree();
    const int n = t.size();
    // Root at node 0; connected subtrees are grown downward from their topmost node.
    std::vector<int> parent(n, -1), order;
    {
        std::vector<char> seen(n, 0);
        std::vector<int> stack{0};
        seen[0] = 1;
        while (!stack.empty()) {
            int u = stack.back();
            stack.pop_back();
            order.push_back(u);
            for (int v : t.neighbors(u))
                if (!seen[v]) {
                    seen[v] = 1;
                    parent[v] = u;
                    stack.push_back(v);
                }
        }
    }
    auto excluded = [&](int v) { return !gt.white(v) && t.degree(v) <= 1; };
    std::vector<std::vector<std::vector<int>>> down(n);
    size_t total = 0;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        int u = *it;
        if (excluded(u)) continue;
        std::vector<std::vector<int>> acc{{u}};
        for (int v : t.neighbors(u)) {
            if (v == parent[u]) continue;
            size_t m = acc.size();
            for (size_t a = 0; a < m; ++a)
                for (const auto& s : down[v]) {
                    acc.push_back(concat(acc[a], s));
                    if (acc.size() > cap) throw std::runtime_error("forked subtree enumeration exceeds cap");
                }
        }
        total += acc.size();
        if (total > cap) throw std::runtime_error("forked subtree enumeration exceeds cap");
        down[u] = std::move(acc);
    }

    std::vector<ForkedSubtree> out;
    std::vector<char> in(n, 0);
    for (int r = 0; r < n; ++r)
        for (auto nodes : down[r]) {
            std::sort(nodes.begin(), nodes.end());
            for (int v : nodes) in[v] = 1;
            bool ok = true;
            if (nodes.size() == 1 && gt.white(nodes[0])) ok = false;
            for (int v : nodes) {
                int inner = 0;
                for (int w : t.neighbors(v)) inner += in[w];
                int outside = t.degree(v) - inner;
                bool leaf = inner <= 1;
                if (gt.white(v)) {
                    if (!leaf) ok = false;
                } else {
                    // A black node with one outside neighbour still pairs with a single white neighbour;
                    // that row is the lower bound x_{cww'} >= 0.
                    bool pair = nodes.size() == 2 && outside == 1 && gt.white(nodes[0] == v ? nodes[1] : nodes[0]);
                    if (leaf && outside < 2 && !pair) ok = false;
                    for (int w : t.neighbors(v))
                        if (gt.white(w) && !in[w]) ok = false;
                }
                if (!ok) break;
            }
            if (ok) {
                ForkedSubtree f;
                f.nodes = nodes;
                for (auto [a, b] : t.edges())
                    if (in[a] && in[b]) f.edges.emplace_back(a, b);
                for (int v : nodes) {
                    int inner = 0;
                    int last = -1;
                    for (int w : t.neighbors(v))
                        if (in[w]) {
                            ++inner;
                            last = w;
                        }
                    if (inner <= 1)
                        f.leaves.push_back(v);
                    else
                        f.interior.push_back(v);
                    if (!gt.white(v) && t.degree(v) - inner >= 2) f.forked.push_back(v);
                    if (gt.white(v) && inner == 1) f.leaf_edges.emplace_back(v, last);
                }
                out.push_back(std::move(f));
            }
            for (int v : nodes) in[v] = 0;
        }
    std::sort(out.begin(), out.end(), [](const ForkedSubtree& a, const ForkedSubtree& b) {
        if (a.nodes.size() != b.nodes.size()) return a.nodes.size() < b.nodes.size();
        return a.nodes < b.nodes;
    });
    return out;
}

LinearConstraint forked_tree_inequality(const ForkedSubtree& st, const GluingTree& gt, const CoordinateSystem& cs) {
    const auto& t = gt.tree();
    Functional f;
    for (int c : st.forked) {
        std::vector<int> L;
        for (int w : t.neighbors(c))
            if (std::binary_search(st.nodes.begin(), st.nodes.end(), w)) L.push_back(w);
        f += forced_out_functional(c, L, gt, cs);
    }
    for (auto [c, d] : st.leaf_edges) {
        f.constant += 1;
        f.add_term(coord_of(cs, {c, gt.prime_of(c), d}), -1);
    }
    for (int c : st.interior) f -= hash_functional(c, st.nodes, gt, cs);
    LinearConstraint out;
    out.coeffs = std::move(f.coeffs);
    out.sense = Sense::Le;
    out.rhs = 1 - f.constant;
    out.tag = "forked";
    out.origin = "subtree " + node_list(gt, st.nodes);
    return out;
}

std::vector<LinearConstraint> j_equalities(const GluingTree& gt, const CoordinateSystem& cs) {
    const auto& t = gt.tree();
    std::vector<LinearConstraint> out;
    for (int j = 0; j < t.size(); ++j) {
        if (!gt.in_J(j)) continue;
        int i = t.neighbors(j)[0], k = t.neighbors(j)[1], jp = gt.prime_of(j);
        std::string origin = "path target " + t.label(j);
        for (const auto& m : {std::vector<int>{i, j, k}, std::vector<int>{i, j, jp, k}}) {
            LinearConstraint c;
            c.coeffs[coord_of(cs, m)] = 1;
            c.sense = Sense::Eq;
            c.rhs = 0;
            c.tag = "affine-span";
            c.origin = origin;
            out.push_back(std::move(c));
        }
        LinearConstraint c;
        c.coeffs[coord_of(cs, {i, j, jp})] = 1;
        c.coeffs[coord_of(cs, {j, jp, k})] = 1;
        c.sense = Sense::Eq;
        c.rhs = 1;
        c.tag = "affine-span";
        c.origin = origin;
        out.push_back(std::move(c));
    }
    return out;
}

HRepresentation h_representation(const GluingTree& gt, size_t cap) {
    HRepresentation h;
    h.coords = coordinate_system(gt);
    h.inequalities = star_inequalities(gt, h.coords);
    for (auto& c : bidirected_edge_inequalities(gt, h.coords)) h.inequalities.push_back(std::move(c));
    for (const auto& st : enumerate_forked_subtrees(gt, cap)) h.inequalities.push_back(forked_tree_inequality(st, gt, h.coords));
    h.equalities = j_equalities(gt, h.coords);
    h.feasible_point = dense_imset(h.coords, gt.realize(gt.canonical_orientation()));
    return h;
}

// ---------------------------------------------------------------- vertices

std::vector<Vertex> enumerate_vertices(const GluingTree& gt, size_t cap) {
    const auto& t = gt.tree();
    CoordinateSystem cs = coordinate_system(gt);
    std::vector<std::pair<int, int>> free;
    for (auto e : t.edges())
        if (!gt.in_J(e.first) && !gt.in_J(e.second)) free.push_back(e);
    std::vector<int> js;
    for (int v = 0; v < t.size(); ++v)
        if (gt.in_J(v)) js.push_back(v);
    const size_t bits = free.size() + js.size();
    if (bits > cap) throw std::runtime_error("vertex enumeration over " + std::to_string(bits) + " free choices exceeds cap");
    std::map<std::vector<int>, Dag> seen;
    for (uint64_t m = 0; m < (uint64_t{1} << bits); ++m) {
        std::vector<std::pair<int, int>> arcs;
        for (size_t b = 0; b < free.size(); ++b) {
            auto [u, v] = free[b];
            if ((m >> b) & 1U)
                arcs.emplace_back(v, u);
            else
                arcs.emplace_back(u, v);
        }
        for (size_t b = 0; b < js.size(); ++b) {
            int j = js[b], i = t.neighbors(j)[0], k = t.neighbors(j)[1];
            if ((m >> (free.size() + b)) & 1U) std::swap(i, k);
            arcs.emplace_back(i, j);
            arcs.emplace_back(j, k);
        }
        Dag d(t.nodes(), arcs);
        auto x = dense_imset(cs, gt.realize(d));
        seen.emplace(std::move(x), std::move(d));
    }
    std::vector<Vertex> out;
    out.reserve(seen.size());
    for (auto& [x, d] : seen) out.push_back({x, d});
    return out;
}

// ---------------------------------------------------------------- gluing

std::pair<GluingTree, GluingTree> interventional_parting(const GluingTree& gt, const std::string& jl) {
    const auto& t = gt.tree();
    if (!t.has_node(jl)) throw GraphError("unknown node '" + jl + "'");
    int j = t.index(jl);
    if (!gt.in_J(j)) throw GraphError("'" + jl + "' is not a path target");
    auto side = [&](int cut) {
        // Component of T minus the edge j-cut that contains j.
        std::vector<char> in(t.size(), 0);
        std::vector<int> stack{j};
        in[j] = 1;
        while (!stack.empty()) {
            int u = stack.back();
            stack.pop_back();
            for (int v : t.neighbors(u)) {
                if (in[v] || (u == j && v == cut)) continue;
                in[v] = 1;
                stack.push_back(v);
            }
        }
        std::vector<std::string> nodes, I, J;
        for (int v = 0; v < t.size(); ++v)
            if (in[v]) {
                nodes.push_back(t.label(v));
                if (gt.in_I(v) || v == j) I.push_back(t.label(v));
                if (gt.in_J(v) && v != j) J.push_back(t.label(v));
            }
        std::vector<LabelPair> edges;
        for (auto [a, b] : t.edges())
            if (in[a] && in[b]) edges.emplace_back(t.label(a), t.label(b));
        return GluingTree(UndirectedTree(nodes, edges), I, J);
    };
    int i = t.neighbors(j)[0], k = t.neighbors(j)[1];
    return {side(k), side(i)};
}

std::vector<CharImset> tfp_glue(const std::vector<CharImset>& verts1, const std::vector<CharImset>& verts2,
                                const NodeSubset& match1, const NodeSubset& match2) {
    auto value = [](const CharImset& c, const NodeSubset& s) {
        int v = imset_value(c, s);
        if (v != 0 && v != 1) throw std::invalid_argument("tfp_glue: matching coordinate is not 0/1");
        return v;
    };
    std::vector<CharImset> out;
    for (const auto& v : verts1) {
        int p1 = value(v, match1);
        for (const auto& w : verts2) {
            int p2 = 1 - value(w, match2);
            if (p1 != p2) continue;
            CharImset g = v;
            for (const auto& [s, x] : w) {
                auto [it, fresh] = g.emplace(s, x);
                if (!fresh && it->second != x) throw std::invalid_argument("tfp_glue: parts disagree on " + s.key());
            }
            out.push_back(std::move(g));
        }
    }
    return out;
}

// ---------------------------------------------------------------- output

namespace {

const char* sense_text(Sense s) { return s == Sense::Le ? "<=" : s == Sense::Ge ? ">=" : "="; }

}  // namespace

std::string render_constraint(const LinearConstraint& c, const CoordinateSystem& cs) {
    std::string s;
    for (const auto& [k, v] : c.coeffs) {
        Rational a = abs(v);
        if (s.empty())
            s += sgn(v) < 0 ? "-" : "";
        else
            s += sgn(v) < 0 ? " - " : " + ";
        if (a != 1) s += a.get_str();
        s += cs.subsets[k].render();
    }
    if (s.empty()) s = "0";
    return s + " " + sense_text(c.sense) + " " + c.rhs.get_str();
}

nlohmann::json constraint_json(const LinearConstraint& c, const CoordinateSystem& cs) {
    nlohmann::json coeffs = nlohmann::json::object();
    for (const auto& [k, v] : c.coeffs) coeffs[cs.subsets[k].key()] = v.get_str();
    return {{"coeffs", coeffs}, {"sense", sense_text(c.sense)}, {"rhs", c.rhs.get_str()}, {"tag", c.tag},
            {"origin", c.origin}};
}

nlohmann::json hrep_json(const HRepresentation& h) {
    nlohmann::json coords = nlohmann::json::array();
    for (size_t i = 0; i < h.coords.size(); ++i)
        coords.push_back({{"subset", h.coords.subsets[i].key()}, {"zero", static_cast<bool>(h.coords.zero[i])}});
    nlohmann::json ineq = nlohmann::json::array(), eq = nlohmann::json::array();
    for (const auto& c : h.inequalities) ineq.push_back(constraint_json(c, h.coords));
    for (const auto& c : h.equalities) eq.push_back(constraint_json(c, h.coords));
    return {{"coordinates", coords}, {"inequalities", ineq}, {"equalities", eq}};
}

}  // namespace qig
