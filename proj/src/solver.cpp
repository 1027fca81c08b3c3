#include "qig/solver.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <map>
#include <set>

namespace qig {

Rational rationalize(double v, int bits) {
    if (!std::isfinite(v)) throw SolverError("cannot rationalize a non-finite objective entry");
    double scaled = std::nearbyint(std::ldexp(v, bits));
    Rational r(scaled);
    mpz_class den = 1;
    den <<= bits;
    r /= den;
    r.canonicalize();
    return r;
}

std::vector<Rational> rationalize(const std::vector<double>& v, int bits) {
    std::vector<Rational> out;
    out.reserve(v.size());
    for (double x : v) out.push_back(rationalize(x, bits));
    return out;
}

namespace {

// Row space in reduced row echelon form, grown one row at a time.
class Echelon {
public:
    explicit Echelon(int d) : d_(d) {}

    bool add(const std::vector<Rational>& row) {
        std::vector<Rational> r = row;
        for (const auto& [p, e] : rows_)
            if (r[p] != 0) {
                Rational f = r[p];
                for (int j = 0; j < d_; ++j)
                    if (e[j] != 0) r[j] -= f * e[j];
            }
        int p = -1;
        for (int j = 0; j < d_; ++j)
            if (r[j] != 0) {
                p = j;
                break;
            }
        if (p < 0) return false;
        Rational inv = 1 / r[p];
        for (int j = 0; j < d_; ++j)
            if (r[j] != 0) r[j] *= inv;
        for (auto& [q, e] : rows_)
            if (e[p] != 0) {
                Rational f = e[p];
                for (int j = 0; j < d_; ++j)
                    if (r[j] != 0) e[j] -= f * r[j];
            }
        rows_.emplace_back(p, std::move(r));
        return true;
    }

    int rank() const { return static_cast<int>(rows_.size()); }

    // Some nonzero vector orthogonal to every stored row; requires rank() < d.
    std::vector<Rational> null_vector() const {
        std::vector<char> pivot(d_, 0);
        for (const auto& [p, e] : rows_) pivot[p] = 1;
        int f = 0;
        while (pivot[f]) ++f;
        std::vector<Rational> v(d_, Rational(0));
        v[f] = 1;
        for (const auto& [p, e] : rows_) v[p] = -e[f];
        return v;
    }

private:
    int d_;
    std::vector<std::pair<int, std::vector<Rational>>> rows_;
};

Rational dot(const std::vector<std::pair<int, Rational>>& a, const std::vector<Rational>& y) {
    Rational s = 0;
    for (const auto& [j, v] : a) s += v * y[j];
    return s;
}

}  // namespace

// ---------------------------------------------------------------- setup

LpSolver::LpSolver(const HRepresentation& hrep) : hrep_(&hrep) {
    const int n = static_cast<int>(hrep.coords.size());
    std::vector<std::map<int, Rational>> expr(n);
    std::vector<Rational> off(n, Rational(0));
    std::set<int> free;
    for (int i = 0; i < n; ++i) {
        expr[i][i] = 1;
        free.insert(i);
    }
    for (const auto& eq : hrep.equalities) {
        std::map<int, Rational> l;
        Rational c0 = 0;
        for (const auto& [i, a] : eq.coeffs) {
            for (const auto& [s, v] : expr[i]) l[s] += a * v;
            c0 += a * off[i];
        }
        for (auto it = l.begin(); it != l.end();) it = it->second == 0 ? l.erase(it) : std::next(it);
        if (l.empty()) {
            if (c0 != eq.rhs) throw SolverError("inconsistent equality constraints");
            continue;
        }
        int f = l.rbegin()->first;
        Rational lf = l[f];
        // y_f = (rhs - c0 - sum_{g != f} l_g y_g) / l_f
        std::map<int, Rational> sub;
        for (const auto& [g, v] : l)
            if (g != f) sub[g] = -v / lf;
        Rational sub0 = (eq.rhs - c0) / lf;
        for (int i = 0; i < n; ++i) {
            auto it = expr[i].find(f);
            if (it == expr[i].end()) continue;
            Rational e = it->second;
            expr[i].erase(it);
            off[i] += e * sub0;
            for (const auto& [g, v] : sub) {
                Rational& t = expr[i][g];
                t += e * v;
                if (t == 0) expr[i].erase(g);
            }
        }
        free.erase(f);
    }
    free_.assign(free.begin(), free.end());
    std::map<int, int> pos;
    for (size_t j = 0; j < free_.size(); ++j) pos[free_[j]] = static_cast<int>(j);
    expr_.resize(n);
    for (int i = 0; i < n; ++i)
        for (const auto& [s, v] : expr[i]) expr_[i].emplace_back(pos.at(s), v);
    offset_ = off;

    for (const auto& c : hrep.inequalities) {
        if (c.sense == Sense::Eq) throw SolverError("equality listed among inequalities");
        Rational sign = c.sense == Sense::Le ? 1 : -1;
        std::map<int, Rational> a;
        Rational b = c.rhs;
        for (const auto& [i, v] : c.coeffs) {
            for (const auto& [j, e] : expr_[i]) a[j] += v * e;
            b -= v * offset_[i];
        }
        Row row;
        for (const auto& [j, v] : a)
            if (v != 0) row.a.emplace_back(j, sign * v);
        row.b = sign * b;
        rows_.push_back(std::move(row));
    }

    if (hrep.feasible_point.size() != static_cast<size_t>(n)) throw SolverError("H-representation lacks a starting point");
    for (const auto& eq : hrep.equalities)
        if (!eq.satisfied(hrep.feasible_point)) throw SolverError("starting point violates an equality");
    start_.resize(free_.size());
    for (size_t j = 0; j < free_.size(); ++j) start_[j] = hrep.feasible_point[free_[j]];
}

std::vector<Rational> LpSolver::lift(const std::vector<Rational>& y) const {
    std::vector<Rational> x(expr_.size());
    for (size_t i = 0; i < expr_.size(); ++i) x[i] = dot(expr_[i], y) + offset_[i];
    return x;
}

// ---------------------------------------------------------------- simplex

LpSolution LpSolver::solve(const std::vector<Rational>& cfull, std::vector<int>* basis_io) const {
    const int d = dimension();
    const int m = static_cast<int>(rows_.size());
    std::vector<Rational> c(d, Rational(0));
    for (size_t i = 0; i < cfull.size(); ++i)
        if (cfull[i] != 0)
            for (const auto& [j, e] : expr_[i]) c[j] += cfull[i] * e;

    std::vector<Rational> y = start_;
    std::vector<int> basis;
    LpSolution sol;
    auto slack = [&](int r) -> Rational { return rows_[r].b - dot(rows_[r].a, y); };

    if (basis_io && static_cast<int>(basis_io->size()) == d) {
        basis = *basis_io;
    } else {
        for (int r = 0; r < m; ++r)
            if (sgn(slack(r)) < 0) throw SolverError("starting point violates inequality " + std::to_string(r));
        // Walk from the starting point to a basic solution.
        Echelon ech(d);
        for (int r = 0; r < m && ech.rank() < d; ++r) {
            if (slack(r) != 0) continue;
            std::vector<Rational> dense(d, Rational(0));
            for (const auto& [j, v] : rows_[r].a) dense[j] = v;
            if (ech.add(dense)) basis.push_back(r);
        }
        while (ech.rank() < d) {
            std::vector<Rational> dir = ech.null_vector();
            Rational cd = 0;
            for (int j = 0; j < d; ++j) cd += c[j] * dir[j];
            if (sgn(cd) < 0)
                for (auto& v : dir) v = -v;
            int enter = -1;
            Rational best;
            for (int attempt = 0; attempt < 2 && enter < 0; ++attempt) {
                for (int r = 0; r < m; ++r) {
                    Rational ad = dot(rows_[r].a, dir);
                    if (sgn(ad) <= 0) continue;
                    Rational t = slack(r) / ad;
                    if (enter < 0 || t < best) {
                        enter = r;
                        best = t;
                    }
                }
                if (enter < 0) {
                    if (cd != 0) throw SolverError("LP is unbounded");
                    for (auto& v : dir) v = -v;
                }
            }
            if (enter < 0) throw SolverError("feasible region contains a line");
            for (int j = 0; j < d; ++j) y[j] += best * dir[j];
            std::vector<Rational> dense(d, Rational(0));
            for (const auto& [j, v] : rows_[enter].a) dense[j] = v;
            ech.add(dense);
            basis.push_back(enter);
        }
    }

    // Inverse of the basis matrix: rows of A_B times columns of binv give the identity.
    std::vector<std::vector<Rational>> binv(d, std::vector<Rational>(d, Rational(0)));
    {
        std::vector<std::vector<Rational>> a(d, std::vector<Rational>(2 * d, Rational(0)));
        for (int p = 0; p < d; ++p) {
            for (const auto& [j, v] : rows_[basis[p]].a) a[p][j] = v;
            a[p][d + p] = 1;
        }
        for (int col = 0; col < d; ++col) {
            int piv = col;
            while (piv < d && a[piv][col] == 0) ++piv;
            if (piv == d) throw SolverError("singular basis");
            std::swap(a[piv], a[col]);
            Rational inv = 1 / a[col][col];
            for (auto& v : a[col])
                if (v != 0) v *= inv;
            for (int r = 0; r < d; ++r)
                if (r != col && a[r][col] != 0) {
                    Rational f = a[r][col];
                    for (int j = 0; j < 2 * d; ++j)
                        if (a[col][j] != 0) a[r][j] -= f * a[col][j];
                }
        }
        // a = [I | A_B^{-1}]; column p of binv belongs to basis row p.
        for (int i = 0; i < d; ++i)
            for (int p = 0; p < d; ++p) binv[i][p] = a[i][d + p];
    }
    if (basis_io && static_cast<int>(basis_io->size()) == d) {
        y.assign(d, Rational(0));
        for (int i = 0; i < d; ++i)
            for (int p = 0; p < d; ++p)
                if (binv[i][p] != 0) y[i] += binv[i][p] * rows_[basis[p]].b;
    }

    std::vector<char> in_basis(m, 0);
    for (int r : basis) in_basis[r] = 1;
    const int max_pivots = 200000;
    std::vector<Rational> dual(d), dir(d), w(d);
    for (;;) {
        for (int p = 0; p < d; ++p) {
            dual[p] = 0;
            for (int i = 0; i < d; ++i)
                if (c[i] != 0 && binv[i][p] != 0) dual[p] += c[i] * binv[i][p];
        }
        int leave = -1;
        for (int p = 0; p < d; ++p)
            if (sgn(dual[p]) < 0 && (leave < 0 || basis[p] < basis[leave])) leave = p;
        if (leave < 0) break;
        if (++sol.pivots > max_pivots) throw SolverError("pivot limit exceeded");
        for (int i = 0; i < d; ++i) dir[i] = -binv[i][leave];
        int enter = -1;
        Rational best, best_ad;
        for (int r = 0; r < m; ++r) {
            if (in_basis[r]) continue;
            Rational ad = dot(rows_[r].a, dir);
            if (sgn(ad) <= 0) continue;
            Rational t = slack(r) / ad;
            if (enter < 0 || t < best) {
                enter = r;
                best = t;
                best_ad = ad;
            }
        }
        if (enter < 0) throw SolverError("LP is unbounded");
        if (best != 0)
            for (int i = 0; i < d; ++i)
                if (dir[i] != 0) y[i] += best * dir[i];
        for (int p = 0; p < d; ++p) {
            w[p] = 0;
            for (const auto& [j, v] : rows_[enter].a)
                if (binv[j][p] != 0) w[p] += v * binv[j][p];
        }
        Rational wl = w[leave];
        for (int i = 0; i < d; ++i) {
            if (binv[i][leave] == 0) continue;
            Rational col = binv[i][leave] / wl;
            for (int p = 0; p < d; ++p)
                if (p != leave && w[p] != 0) binv[i][p] -= w[p] * col;
            binv[i][leave] = col;
        }
        in_basis[basis[leave]] = 0;
        in_basis[enter] = 1;
        basis[leave] = enter;
    }

    sol.point = lift(y);
    sol.value = 0;
    for (size_t i = 0; i < cfull.size(); ++i)
        if (cfull[i] != 0) sol.value += cfull[i] * sol.point[i];
    sol.basis = basis;
    sol.vertex_flag = std::all_of(sol.point.begin(), sol.point.end(), [](const Rational& v) { return v == 0 || v == 1; });
    if (basis_io) *basis_io = basis;
    return sol;
}

LpSolution LpSolver::maximize(const std::vector<Rational>& objective) const {
    if (objective.size() != hrep_->coords.size()) throw SolverError("objective length differs from the coordinate count");
    std::vector<int> basis;
    LpSolution sol = solve(objective, &basis);
    if (!sol.vertex_flag) {
        std::cerr << "WARN: LP optimum is fractional; re-solving with a tie-breaking perturbation\n";
        std::vector<Rational> c = objective;
        mpz_class den = 1;
        den <<= 200;
        for (size_t i = 0; i < c.size(); ++i) c[i] += Rational(1) / Rational(static_cast<long>(i + 1)) / Rational(den);
        int pivots = sol.pivots;
        Rational keep = sol.value;
        sol = solve(c, &basis);
        sol.pivots += pivots;
        sol.perturbed = true;
        sol.value = 0;
        for (size_t i = 0; i < objective.size(); ++i) sol.value += objective[i] * sol.point[i];
        if (sol.value != keep) throw SolverError("tie-breaking re-solve changed the optimal value");
    }
    std::sort(sol.basis.begin(), sol.basis.end());
    return sol;
}

LpSolution lp_maximize(const LpProblem& p) {
    if (!p.hrep) throw SolverError("LP problem without an H-representation");
    return LpSolver(*p.hrep).maximize(p.objective);
}

// ---------------------------------------------------------------- oracles

BruteForceResult brute_force_optimum(const std::vector<std::vector<int>>& vertices, const std::vector<Rational>& obj) {
    if (vertices.empty()) throw SolverError("brute_force_optimum: no vertices");
    BruteForceResult best;
    for (size_t v = 0; v < vertices.size(); ++v) {
        Rational s = 0;
        for (size_t i = 0; i < obj.size(); ++i)
            if (vertices[v][i]) s += obj[i] * vertices[v][i];
        if (v == 0 || s > best.value) {
            best.index = v;
            best.value = s;
        }
    }
    best.x = vertices[best.index];
    return best;
}

BruteForceResult brute_force_optimum(const std::vector<Vertex>& vertices, const std::vector<Rational>& obj) {
    std::vector<std::vector<int>> xs;
    xs.reserve(vertices.size());
    for (const auto& v : vertices) xs.push_back(v.x);
    return brute_force_optimum(xs, obj);
}

Dag reconstruct_dag(const std::vector<int>& x, const GluingTree& gt, const CoordinateSystem& cs) {
    const auto& t = gt.tree();
    const int n = t.size();
    if (x.size() != cs.size()) throw SolverError("imset length differs from the coordinate count");
    auto val = [&](std::vector<int> m) {
        int c = cs.find(std::move(m));
        if (c < 0) throw std::logic_error("reconstruct_dag: missing coordinate");
        return x[c];
    };
    std::set<std::pair<int, int>> arcs;
    auto orient = [&](int a, int b) {
        if (arcs.count({b, a})) throw SolverError("inconsistent imset: both directions forced on " + t.label(a) + "-" + t.label(b));
        arcs.insert({a, b});
    };
    for (int v = 0; v < n; ++v) {
        const auto& nb = t.neighbors(v);
        if (gt.in_I(v)) {
            int u = nb[0];
            if (val({u, v, gt.prime_of(v)}))
                orient(u, v);
            else
                orient(v, u);
        } else if (gt.in_J(v)) {
            int i = nb[0], k = nb[1];
            if (!val({i, v, gt.prime_of(v)})) std::swap(i, k);
            orient(i, v);
            orient(v, k);
        } else {
            for (size_t a = 0; a < nb.size(); ++a)
                for (size_t b = a + 1; b < nb.size(); ++b)
                    if (val({nb[a], v, nb[b]})) {
                        orient(nb[a], v);
                        orient(nb[b], v);
                    }
        }
    }
    std::vector<std::pair<int, int>> directed(arcs.begin(), arcs.end()), undirected;
    for (auto [a, b] : t.edges())
        if (!arcs.count({a, b}) && !arcs.count({b, a})) undirected.emplace_back(a, b);
    propagate_orientations(n, directed, undirected);
    // Remaining components have no incoming arcs; orient each away from its first node.
    std::vector<std::vector<int>> adj(n);
    for (auto [a, b] : undirected) {
        adj[a].push_back(b);
        adj[b].push_back(a);
    }
    std::vector<char> seen(n, 0);
    for (int r = 0; r < n; ++r) {
        if (seen[r] || adj[r].empty()) continue;
        std::vector<int> queue{r};
        seen[r] = 1;
        for (size_t q = 0; q < queue.size(); ++q)
            for (int v : adj[queue[q]])
                if (!seen[v]) {
                    seen[v] = 1;
                    directed.emplace_back(queue[q], v);
                    queue.push_back(v);
                }
    }
    Dag d(t.nodes(), directed);
    if (dense_imset(cs, gt.realize(d)) != x) throw SolverError("imset is not realized by any orientation of the tree");
    return d;
}

Dag reconstruct_dag(const CharImset& c, const GluingTree& gt) {
    CoordinateSystem cs = coordinate_system(gt);
    return reconstruct_dag(dense_from_sparse(cs, c), gt, cs);
}

int affine_dim(const std::vector<std::vector<Rational>>& points) {
    if (points.empty()) return -1;
    const int n = static_cast<int>(points[0].size());
    if (n == 0) return 0;
    Echelon ech(n);
    std::vector<Rational> diff(n);
    for (size_t p = 1; p < points.size() && ech.rank() < n; ++p) {
        for (int j = 0; j < n; ++j) diff[j] = points[p][j] - points[0][j];
        ech.add(diff);
    }
    return ech.rank();
}

int affine_dim(const std::vector<std::vector<int>>& points) {
    std::vector<std::vector<Rational>> q;
    q.reserve(points.size());
    for (const auto& p : points) q.emplace_back(p.begin(), p.end());
    return affine_dim(q);
}

FacetCheck facet_check(const std::vector<std::vector<int>>& vertices, const LinearConstraint& ineq, int dim) {
    FacetCheck f;
    f.valid = true;
    std::vector<std::vector<int>> tight;
    for (const auto& v : vertices) {
        if (ineq.sense == Sense::Eq) {
            if (ineq.lhs(v) == ineq.rhs)
                tight.push_back(v);
            else
                f.valid = false;
            continue;
        }
        int s = sgn(ineq.slack(v));
        if (s < 0) f.valid = false;
        if (s == 0) tight.push_back(v);
        if (s > 0) ++f.strict_count;
    }
    f.tight_dim = affine_dim(tight);
    f.facet = f.valid && f.tight_dim == dim - 1;
    return f;
}

FacetCheck facet_check(const std::vector<std::vector<int>>& vertices, const LinearConstraint& ineq) {
    return facet_check(vertices, ineq, affine_dim(vertices));
}

}  // namespace qig
