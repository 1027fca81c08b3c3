#include "qig/gaussian_score.hpp"

#include <algorithm>
#include <bit>
#include <functional>
#include <cmath>
#include <iostream>
#include <numeric>
#include <random>
#include <set>

namespace qig {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

double binom2(size_t m) { return 0.5 * static_cast<double>(m) * static_cast<double>(m > 0 ? m - 1 : 0); }

Eigen::MatrixXd sub(const Eigen::MatrixXd& m, const std::vector<int>& idx) {
    const int k = static_cast<int>(idx.size());
    Eigen::MatrixXd out(k, k);
    for (int a = 0; a < k; ++a)
        for (int b = 0; b < k; ++b) out(a, b) = m(idx[a], idx[b]);
    return out;
}

std::string label_list(const std::vector<std::string>& vars, const std::vector<int>& idx) {
    std::string s = "{";
    for (size_t i = 0; i < idx.size(); ++i) s += (i ? "," : "") + vars[idx[i]];
    return s + "}";
}

// Cholesky of a marginal covariance; fails loudly when it is not positive definite.
Eigen::LLT<Eigen::MatrixXd> factor(const Eigen::MatrixXd& s, const std::vector<std::string>& vars,
                                   const std::vector<int>& idx) {
    Eigen::LLT<Eigen::MatrixXd> llt(s);
    bool ok = llt.info() == Eigen::Success;
    if (ok) {
        Eigen::VectorXd d = llt.matrixLLT().diagonal();
        ok = d.minCoeff() > 0 && std::isfinite(d.maxCoeff());
        if (ok && s.rows() > 1) {
            double r = d.maxCoeff() / d.minCoeff();
            if (r * r > 1e10)
                std::cerr << "WARN: marginal covariance on " << label_list(vars, idx)
                          << " is ill-conditioned (estimated condition number " << r * r << ")\n";
        }
    }
    if (!ok)
        throw DataError("singular marginal covariance on " + label_list(vars, idx) +
                        " (insufficient samples or degenerate columns)");
    return llt;
}

double logdet(const Eigen::LLT<Eigen::MatrixXd>& llt) {
    return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

std::vector<int> dag_to_vars(const Dag& dag, const InterventionalDataset& ds) {
    if (dag.size() != ds.p()) throw DataError("graph and dataset have different variable counts");
    std::vector<int> map(dag.size());
    for (int i = 0; i < dag.size(); ++i) map[i] = ds.variable_index(dag.label(i));
    return map;
}

std::vector<int> to_vars(const std::vector<int>& nodes, const std::vector<int>& map) {
    std::vector<int> out;
    for (int i : nodes) out.push_back(map[i]);
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

// ---------------------------------------------------------------- dataset

long InterventionalDataset::total_samples() const {
    long n = 0;
    for (const auto& c : contexts) n += c.data.rows();
    return n;
}

int InterventionalDataset::variable_index(const std::string& label) const {
    auto it = std::find(variables.begin(), variables.end(), label);
    if (it == variables.end()) throw DataError("unknown variable '" + label + "'");
    return static_cast<int>(it - variables.begin());
}

std::vector<std::string> InterventionalDataset::targets() const {
    std::vector<std::string> out;
    for (size_t k = 1; k < contexts.size(); ++k) out.push_back(*contexts[k].target);
    return out;
}

void InterventionalDataset::validate() const {
    if (variables.empty()) throw DataError("dataset has no variables");
    std::set<std::string> names(variables.begin(), variables.end());
    if (names.size() != variables.size()) throw DataError("duplicate variable names");
    if (contexts.empty()) throw DataError("dataset has no contexts");
    if (contexts[0].target) throw DataError("context 0 must be observational");
    std::set<std::string> seen;
    for (size_t k = 0; k < contexts.size(); ++k) {
        const auto& c = contexts[k];
        if (c.data.rows() < 1) throw DataError("context " + std::to_string(k) + " has no samples");
        if (c.data.cols() != p()) throw DataError("context " + std::to_string(k) + " has the wrong column count");
        if (!c.data.allFinite()) throw DataError("context " + std::to_string(k) + " contains non-finite values");
        if (k == 0) continue;
        if (!c.target) throw DataError("interventional context " + std::to_string(k) + " lacks a target");
        variable_index(*c.target);
        if (!seen.insert(*c.target).second) throw DataError("target '" + *c.target + "' appears twice");
    }
}

// ---------------------------------------------------------------- parameters

void GaussianParams::validate(const Dag& dag, const std::vector<std::string>& targets) const {
    const int p = dag.size();
    if (lambda.size() != targets.size() + 1 || omega.size() != lambda.size())
        throw DataError("parameter context count does not match targets");
    for (size_t k = 0; k < lambda.size(); ++k) {
        if (lambda[k].rows() != p || lambda[k].cols() != p || omega[k].size() != p)
            throw DataError("parameter shape mismatch");
        if ((omega[k].array() <= 0).any()) throw DataError("nonpositive variance");
        for (int i = 0; i < p; ++i)
            for (int j = 0; j < p; ++j)
                if (lambda[k](i, j) != 0 && !dag.has_arc(j, i)) throw DataError("lambda outside the DAG support");
        if (k == 0) continue;
        int t = dag.index(targets[k - 1]);
        for (int i = 0; i < p; ++i) {
            if (i == t) continue;
            if (lambda[k].row(i) != lambda[0].row(i) || omega[k](i) != omega[0](i))
                throw DataError("context override outside its target row");
        }
    }
}

GaussianParams random_params(const Dag& dag, const std::vector<std::string>& targets, uint64_t seed,
                             const ParamRanges& r) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> mag(r.lambda_lo, r.lambda_hi), var(r.omega_lo, r.omega_hi);
    std::bernoulli_distribution coin(0.5);
    const int p = dag.size();
    GaussianParams gp;
    Eigen::MatrixXd lam = Eigen::MatrixXd::Zero(p, p);
    Eigen::VectorXd om(p);
    for (auto [t, h] : dag.arcs()) lam(h, t) = (coin(rng) ? 1.0 : -1.0) * mag(rng);
    for (int i = 0; i < p; ++i) om(i) = var(rng);
    gp.lambda.push_back(lam);
    gp.omega.push_back(om);
    for (const auto& tl : targets) {
        int t = dag.index(tl);
        Eigen::MatrixXd lk = lam;
        Eigen::VectorXd ok = om;
        lk.row(t).setZero();
        ok(t) = var(rng);
        gp.lambda.push_back(lk);
        gp.omega.push_back(ok);
    }
    return gp;
}

Eigen::MatrixXd covariance_from_params(const Dag& dag, const GaussianParams& params, int k) {
    const int p = dag.size();
    Eigen::MatrixXd b = Eigen::MatrixXd::Identity(p, p) - params.lambda.at(k);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(b);
    if (!lu.isInvertible()) throw std::logic_error("I - Lambda is singular");
    Eigen::MatrixXd binv = lu.inverse();
    Eigen::MatrixXd s = binv * params.omega.at(k).asDiagonal() * binv.transpose();
    return 0.5 * (s + s.transpose());
}

InterventionalDataset simulate(const Dag& dag, const std::vector<std::string>& targets, const GaussianParams& params,
                               const std::vector<long>& sizes, uint64_t seed) {
    if (sizes.size() != targets.size() + 1) throw DataError("need one sample size per context");
    params.validate(dag, targets);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const int p = dag.size();
    auto order = dag.topological_order();
    InterventionalDataset ds;
    ds.variables = dag.nodes();
    for (size_t k = 0; k < sizes.size(); ++k) {
        if (sizes[k] < 1) throw DataError("sample sizes must be positive");
        Context c;
        if (k > 0) c.target = targets[k - 1];
        c.data.resize(sizes[k], p);
        const auto& lam = params.lambda[k];
        Eigen::VectorXd sd = params.omega[k].array().sqrt();
        for (long r = 0; r < sizes[k]; ++r)
            for (int i : order) {
                double x = sd(i) * normal(rng);
                for (int j : dag.parents(i)) x += lam(i, j) * c.data(r, j);
                c.data(r, i) = x;
            }
        ds.contexts.push_back(std::move(c));
    }
    return ds;
}

Eigen::MatrixXd pooled_cov(const InterventionalDataset& ds, const std::vector<int>& contexts) {
    if (contexts.empty()) throw DataError("pooled_cov: empty context set");
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(ds.p(), ds.p());
    long n = 0;
    for (int k : contexts) {
        const auto& x = ds.contexts.at(k).data;
        s.noalias() += x.transpose() * x;
        n += x.rows();
    }
    if (n == 0) throw DataError("pooled_cov: no rows");
    return s / static_cast<double>(n);
}

// ---------------------------------------------------------------- scorer

Scorer::Scorer(const InterventionalDataset& ds) : ds_(ds), z_(ds.p()) {
    ds_.validate();
    for (int k = 0; k <= ds_.K(); ++k) {
        const auto& x = ds_.contexts[k].data;
        scatter_.push_back(x.transpose() * x);
        counts_.push_back(x.rows());
        total_ += x.rows();
        if (k > 0) z_[ds_.variable_index(*ds_.contexts[k].target)].push_back(k);
    }
}

std::vector<int> Scorer::complement(const std::vector<int>& Z) const {
    std::vector<int> out;
    for (int k = 0; k <= K(); ++k)
        if (std::find(Z.begin(), Z.end(), k) == Z.end()) out.push_back(k);
    return out;
}

Eigen::MatrixXd Scorer::pooled(const std::vector<int>& contexts) const {
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(p(), p());
    long n = 0;
    for (int k : contexts) {
        s += scatter_[k];
        n += counts_[k];
    }
    if (n == 0) throw DataError("pooled covariance over no rows");
    return s / static_cast<double>(n);
}

double Scorer::alpha(std::vector<int> A, std::vector<int> Z) const {
    std::sort(A.begin(), A.end());
    std::sort(Z.begin(), Z.end());
    auto key = std::make_pair(A, Z);
    {
        std::lock_guard<std::mutex> lock(mu_);
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
    }
    for (int k : Z)
        if (k < 1 || k > K()) throw DataError("alpha: intervention index out of range");
    double value = 0;
    if (!A.empty()) {
        // Pooled block over the contexts outside Z, then one block per context in Z.
        auto term = [&](const std::vector<int>& ctx) {
            Eigen::MatrixXd scat = Eigen::MatrixXd::Zero(p(), p());
            long n = 0;
            for (int k : ctx) {
                scat += scatter_[k];
                n += counts_[k];
            }
            if (n == 0) return 0.0;
            Eigen::MatrixXd sa = sub(scat, A);
            auto llt = factor(sa / static_cast<double>(n), ds_.variables, A);
            double quad = llt.solve(sa).trace();
            return 0.5 * quad + 0.5 * static_cast<double>(n) * logdet(llt);
        };
        value -= term(complement(Z));
        for (int k : Z) value -= term({k});
        value -= 0.5 * std::log(static_cast<double>(total_)) * (1.0 + static_cast<double>(Z.size())) * binom2(A.size());
    }
    std::lock_guard<std::mutex> lock(mu_);
    cache_.emplace(std::move(key), value);
    return value;
}

double Scorer::constant() const {
    double c = -0.5 * static_cast<double>(p()) * static_cast<double>(total_) * kLog2Pi;
    return c - 0.5 * std::log(static_cast<double>(total_)) * (p() + K());
}

size_t Scorer::cache_size() const {
    std::lock_guard<std::mutex> lock(mu_);
    return cache_.size();
}

double alpha(const InterventionalDataset& ds, const std::vector<std::string>& A, const std::vector<int>& Z) {
    Scorer s(ds);
    std::vector<int> idx;
    for (const auto& l : A) idx.push_back(ds.variable_index(l));
    return s.alpha(idx, Z);
}

// ---------------------------------------------------------------- BIC

std::vector<Eigen::MatrixXd> mle_precisions(const Dag& dag, const InterventionalDataset& ds) {
    Scorer sc(ds);
    auto map = dag_to_vars(dag, ds);
    const int p = ds.p();
    std::vector<Eigen::MatrixXd> out;
    for (int k = 0; k <= ds.K(); ++k) {
        Eigen::MatrixXd kh = Eigen::MatrixXd::Zero(p, p);
        for (int i = 0; i < dag.size(); ++i) {
            const auto& zi = sc.Z(map[i]);
            std::vector<int> ctx = std::find(zi.begin(), zi.end(), k) != zi.end() ? std::vector<int>{k} : sc.complement(zi);
            Eigen::MatrixXd s = sc.pooled(ctx);
            auto fa = to_vars(dag.family(i), map), pa = to_vars(dag.parents(i), map);
            auto add = [&](const std::vector<int>& a, double sign) {
                if (a.empty()) return;
                Eigen::MatrixXd inv = factor(sub(s, a), ds.variables, a).solve(Eigen::MatrixXd::Identity(a.size(), a.size()));
                for (size_t x = 0; x < a.size(); ++x)
                    for (size_t y = 0; y < a.size(); ++y) kh(a[x], a[y]) += sign * inv(x, y);
            };
            add(fa, 1.0);
            add(pa, -1.0);
        }
        out.push_back(0.5 * (kh + kh.transpose()));
    }
    return out;
}

double log_likelihood(const Dag& dag, const InterventionalDataset& ds) {
    auto ks = mle_precisions(dag, ds);
    double ll = 0;
    for (int k = 0; k <= ds.K(); ++k) {
        const auto& x = ds.contexts[k].data;
        const double n = static_cast<double>(x.rows());
        Eigen::LLT<Eigen::MatrixXd> llt(ks[k]);
        if (llt.info() != Eigen::Success) throw DataError("estimated precision is not positive definite");
        Eigen::MatrixXd scat = x.transpose() * x;
        ll += -0.5 * ds.p() * n * kLog2Pi + 0.5 * n * logdet(llt) - 0.5 * (ks[k] * scat).trace();
    }
    return ll;
}

int parameter_count(const Dag& dag, const InterventionalDataset& ds) {
    int count = dag.size() + static_cast<int>(dag.arcs().size());
    for (int k = 1; k <= ds.K(); ++k) count += 1 + static_cast<int>(dag.parents(dag.index(*ds.contexts[k].target)).size());
    return count;
}

double bic_direct(const Dag& dag, const InterventionalDataset& ds) {
    ds.validate();
    return log_likelihood(dag, ds) -
           0.5 * std::log(static_cast<double>(ds.total_samples())) * parameter_count(dag, ds);
}

double bic_via_alpha(const Dag& dag, const Scorer& sc) {
    auto map = dag_to_vars(dag, sc.data());
    double b = sc.constant();
    for (int i = 0; i < dag.size(); ++i) {
        const auto& z = sc.Z(map[i]);
        b += sc.alpha(to_vars(dag.family(i), map), z) - sc.alpha(to_vars(dag.parents(i), map), z);
    }
    return b;
}

double bic_via_alpha(const Dag& dag, const InterventionalDataset& ds) { return bic_via_alpha(dag, Scorer(ds)); }

// ---------------------------------------------------------------- objective

double ObjectiveVector::eval(const std::vector<int>& x) const {
    double s = constant;
    for (size_t i = 0; i < coeffs.size(); ++i)
        if (x[i]) s += coeffs[i] * x[i];
    return s;
}

ObjectiveVector objective_vector(const GluingTree& gt, const CoordinateSystem& cs, const Scorer& sc) {
    const auto& t = gt.tree();
    const auto& ds = sc.data();
    if (!gt.J().empty()) throw DataError("objective_vector: path targets are not supported");
    {
        std::vector<std::string> a = gt.I(), b = ds.targets();
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        if (a != b) throw DataError("objective_vector: leaf targets must equal the intervened variables");
    }
    std::vector<int> var(t.size());
    for (int v = 0; v < t.size(); ++v) var[v] = ds.variable_index(t.label(v));
    if (t.size() != ds.p()) throw DataError("objective_vector: tree and dataset differ in size");

    ObjectiveVector ov;
    ov.coeffs.assign(cs.size(), 0.0);
    ov.constant = sc.constant();
    auto coord = [&](std::vector<int> m) {
        int c = cs.find(std::move(m));
        if (c < 0) throw std::logic_error("objective_vector: subset outside the coordinate system");
        return c;
    };
    for (int v = 0; v < t.size(); ++v) {
        const auto& nb = t.neighbors(v);
        const auto& z = sc.Z(var[v]);
        const size_t d = nb.size();
        const uint64_t full = (uint64_t{1} << d);
        std::vector<double> s(full);
        for (uint64_t m = 0; m < full; ++m) {
            std::vector<int> r;
            for (size_t b = 0; b < d; ++b)
                if ((m >> b) & 1U) r.push_back(var[nb[b]]);
            std::vector<int> rv = r;
            rv.push_back(var[v]);
            s[m] = sc.alpha(rv, z) - sc.alpha(r, z);
        }
        for (uint64_t q = 0; q < full; ++q) {
            // Moebius inversion over subsets of q.
            double mq = 0;
            for (uint64_t r = q;; r = (r - 1) & q) {
                mq += ((std::popcount(q ^ r) % 2) ? -1.0 : 1.0) * s[r];
                if (r == 0) break;
            }
            const int size = std::popcount(q);
            std::vector<int> qn;
            for (size_t b = 0; b < d; ++b)
                if ((q >> b) & 1U) qn.push_back(nb[b]);
            if (size == 0) {
                ov.constant += mq;
            } else if (gt.white(v)) {
                ov.coeffs[coord({qn[0], v, gt.prime_of(v)})] += mq;
            } else if (size >= 2) {
                qn.push_back(v);
                ov.coeffs[coord(qn)] += mq;
            } else {
                int u = qn[0];
                if (gt.white(u)) {
                    // [u -> v] = 1 - [v -> u] = 1 - x_{v u u'}
                    ov.constant += mq;
                    ov.coeffs[coord({v, u, gt.prime_of(u)})] -= mq;
                } else {
                    // Both endpoints untargeted: the two one-sided terms are equal and one of them always applies.
                    ov.constant += 0.5 * mq;
                }
            }
        }
    }
    return ov;
}

// ---------------------------------------------------------------- skeleton

Eigen::MatrixXd mi_weights(const InterventionalDataset& ds, bool pool_all) {
    Eigen::MatrixXd x;
    if (pool_all) {
        x.resize(ds.total_samples(), ds.p());
        long r = 0;
        for (const auto& c : ds.contexts) {
            x.middleRows(r, c.data.rows()) = c.data;
            r += c.data.rows();
        }
    } else {
        x = ds.contexts.at(0).data;
    }
    if (x.rows() < 2) throw DataError("mutual information needs at least two samples");
    Eigen::MatrixXd c = x.rowwise() - x.colwise().mean();
    Eigen::MatrixXd cov = c.transpose() * c;
    const int p = ds.p();
    for (int i = 0; i < p; ++i)
        if (!(cov(i, i) > 0)) throw DataError("variable '" + ds.variables[i] + "' has zero variance");
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(p, p);
    const double cap = 1.0 - 1e-12;
    for (int i = 0; i < p; ++i)
        for (int j = i + 1; j < p; ++j) {
            double r = cov(i, j) / std::sqrt(cov(i, i) * cov(j, j));
            r = std::clamp(r, -cap, cap);
            w(i, j) = w(j, i) = 0.5 * std::log(1.0 - r * r);
        }
    return w;
}

UndirectedTree kruskal_mst(const Eigen::MatrixXd& weights, const std::vector<std::string>& labels) {
    const int p = static_cast<int>(labels.size());
    if (p < 2 || weights.rows() != p || weights.cols() != p) throw DataError("kruskal_mst: need a p x p matrix, p >= 2");
    struct E {
        double w;
        int i, j;
    };
    std::vector<E> edges;
    for (int i = 0; i < p; ++i)
        for (int j = i + 1; j < p; ++j) edges.push_back({weights(i, j), i, j});
    std::stable_sort(edges.begin(), edges.end(), [](const E& a, const E& b) {
        if (a.w != b.w) return a.w < b.w;
        if (a.i != b.i) return a.i < b.i;
        return a.j < b.j;
    });
    std::vector<int> parent(p);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> root = [&](int x) { return parent[x] == x ? x : parent[x] = root(parent[x]); };
    std::vector<LabelPair> chosen;
    for (const auto& e : edges) {
        int a = root(e.i), b = root(e.j);
        if (a == b) continue;
        parent[a] = b;
        chosen.emplace_back(labels[e.i], labels[e.j]);
    }
    return UndirectedTree(labels, chosen);
}

}  // namespace qig
