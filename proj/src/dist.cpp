#include "advlab/dist.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace advlab {

namespace {

double linf(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

double d_z(const DiscreteAtom& a, const DiscreteAtom& b) {
    return linf(a.x, b.x) + std::abs(a.y - b.y);
}

// all grid points of pitch h inside [0,1]^d
std::vector<std::vector<double>> cube_grid(double h, int d) {
    const std::int64_t per_dim = static_cast<std::int64_t>(std::floor(1.0 / h + 1e-9)) + 1;
    double total = 1.0;
    for (int i = 0; i < d; ++i) total *= static_cast<double>(per_dim);
    if (total > 1e6) throw std::runtime_error("cube_grid: grid budget exceeded");
    std::vector<std::vector<double>> pts;
    std::vector<std::int64_t> idx(d, 0);
    while (true) {
        std::vector<double> p(d);
        for (int i = 0; i < d; ++i) p[i] = std::min(idx[i] * h, 1.0);
        pts.push_back(std::move(p));
        int i = d - 1;
        while (i >= 0 && ++idx[i] == per_dim) idx[i--] = 0;
        if (i < 0) break;
    }
    return pts;
}

}  // namespace

void DiscreteDistribution::validate() const {
    if (atoms.empty()) throw std::invalid_argument("DiscreteDistribution: no atoms");
    Rational total{0};
    for (const auto& a : atoms) {
        if (static_cast<int>(a.x.size()) != d)
            throw std::invalid_argument("DiscreteDistribution: atom dimension mismatch");
        if (!(a.mass > Rational{0}))
            throw std::invalid_argument("DiscreteDistribution: masses must be positive");
        total = total + a.mass;
    }
    if (total != Rational{1}) throw std::invalid_argument("DiscreteDistribution: masses must sum to 1");
    for (std::size_t i = 0; i < atoms.size(); ++i)
        for (std::size_t j = i + 1; j < atoms.size(); ++j)
            if (d_z(atoms[i], atoms[j]) < 1e-12)
                throw std::invalid_argument("DiscreteDistribution: duplicate atoms");
}

double adversarial_risk_discrete(const NetworkParams& f, const LossSpec& loss,
                                 const DiscreteDistribution& P, double eps) {
    P.validate();
    const double h = P.pitch.to_double();
    double risk = 0.0;
    for (const auto& atom : P.atoms) {
        // enumerate ball grid points as offsets around the atom
        const std::int64_t reach = static_cast<std::int64_t>(std::floor(eps / h + 1e-9));
        double best = -1.0;
        std::vector<std::int64_t> off(P.d, -reach);
        bool nonempty = false;
        while (true) {
            std::vector<double> cand(P.d);
            bool ok = true;
            for (int i = 0; i < P.d; ++i) {
                cand[i] = atom.x[i] + off[i] * h;
                if (cand[i] < -1e-12 || cand[i] > 1.0 + 1e-12) { ok = false; break; }
            }
            if (ok) {
                nonempty = true;
                best = std::max(best, loss_eval(loss, forward(f, cand), atom.y));
            }
            int i = P.d - 1;
            while (i >= 0 && ++off[i] > reach) off[i--] = -reach;
            if (i < 0) break;
        }
        if (!nonempty) throw std::runtime_error("adversarial_risk_discrete: empty ball grid");
        risk += atom.mass.to_double() * best;
    }
    return risk;
}

double dp_sup_risk(const NetworkParams& f, const LossSpec& loss, const GammaInstance& inst) {
    inst.base.validate();
    if (inst.base.atoms.size() > 6) throw std::invalid_argument("dp_sup_risk: at most 6 atoms");
    const auto grid = cube_grid(inst.base.pitch.to_double(), inst.base.d);
    // The sup over Gamma_eps is attained at an extreme point of the transport
    // polytope, which relocates each atom's full mass to one grid point of
    // its ball; enumerate those relocations over the whole cube grid.
    double risk = 0.0;
    for (const auto& atom : inst.base.atoms) {
        double best = -1.0;
        for (const auto& p : grid) {
            if (linf(p, atom.x) > inst.eps + 1e-12) continue;
            best = std::max(best, loss_eval(loss, forward(f, p), atom.y));
        }
        if (best < 0.0) throw std::runtime_error("dp_sup_risk: empty ball grid");
        risk += atom.mass.to_double() * best;
    }
    return risk;
}

double split_sup_risk(const NetworkParams& f, const LossSpec& loss, const GammaInstance& inst,
                      int denominator) {
    inst.base.validate();
    if (inst.base.atoms.size() > 2)
        throw std::invalid_argument("split_sup_risk: enumeration limited to 2 atoms");
    const auto grid = cube_grid(inst.base.pitch.to_double(), inst.base.d);

    double risk = 0.0;
    for (const auto& atom : inst.base.atoms) {
        std::vector<double> values;  // loss at each candidate ball point
        for (const auto& p : grid)
            if (linf(p, atom.x) <= inst.eps + 1e-12)
                values.push_back(loss_eval(loss, forward(f, p), atom.y));
        if (values.empty()) throw std::runtime_error("split_sup_risk: empty ball grid");
        if (values.size() > 200) throw std::invalid_argument("split_sup_risk: ball grid too large");

        // distribute `denominator` units of the atom's mass over the candidates
        double best = -std::numeric_limits<double>::infinity();
        std::vector<int> units(values.size(), 0);
        // recursive enumeration of compositions
        auto rec = [&](auto&& self, std::size_t pos, int remaining, double acc) -> void {
            if (pos + 1 == values.size()) {
                const double v = acc + values[pos] * remaining / denominator;
                best = std::max(best, v);
                return;
            }
            for (int u = 0; u <= remaining; ++u)
                self(self, pos + 1, remaining - u, acc + values[pos] * u / denominator);
        };
        rec(rec, 0, denominator, 0.0);
        risk += atom.mass.to_double() * best;
    }
    return risk;
}

double w_inf_discrete(const DiscreteDistribution& P, const DiscreteDistribution& Q) {
    if (P.atoms.size() != Q.atoms.size())
        throw std::invalid_argument("w_inf_discrete: unequal atom counts");
    const std::size_t n = P.atoms.size();
    for (const auto& a : P.atoms)
        if (a.mass != P.atoms[0].mass)
            throw std::invalid_argument("w_inf_discrete: atoms must have equal mass");
    for (const auto& a : Q.atoms)
        if (a.mass != P.atoms[0].mass)
            throw std::invalid_argument("w_inf_discrete: atoms must have equal mass");

    std::vector<std::vector<double>> dist(n, std::vector<double>(n));
    std::vector<double> candidates;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            dist[i][j] = d_z(P.atoms[i], Q.atoms[j]);
            candidates.push_back(dist[i][j]);
        }
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    // Kuhn augmenting-path matching restricted to edges with dist <= limit.
    auto perfect_matching = [&](double limit) {
        std::vector<int> match(n, -1);
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<char> used(n, 0);
            auto try_kuhn = [&](auto&& self, std::size_t u) -> bool {
                for (std::size_t v = 0; v < n; ++v) {
                    if (used[v] || dist[u][v] > limit + 1e-15) continue;
                    used[v] = 1;
                    if (match[v] < 0 || self(self, static_cast<std::size_t>(match[v]))) {
                        match[v] = static_cast<int>(u);
                        return true;
                    }
                }
                return false;
            };
            if (!try_kuhn(try_kuhn, i)) return false;
        }
        return true;
    };

    std::size_t lo = 0, hi = candidates.size() - 1;
    while (lo < hi) {
        const std::size_t mid = (lo + hi) / 2;
        if (perfect_matching(candidates[mid]))
            hi = mid;
        else
            lo = mid + 1;
    }
    return candidates[lo];
}

double w1_discrete(const DiscreteDistribution& P, const DiscreteDistribution& Q) {
    P.validate();
    Q.validate();
    // scale rational masses to integer units
    std::int64_t denom = 1;
    for (const auto& a : P.atoms) denom = std::lcm(denom, a.mass.den);
    for (const auto& a : Q.atoms) denom = std::lcm(denom, a.mass.den);
    if (denom > 100000) throw std::invalid_argument("w1_discrete: mass denominators too large");

    const std::size_t np = P.atoms.size(), nq = Q.atoms.size();
    std::vector<std::int64_t> supply(np), demand(nq);
    for (std::size_t i = 0; i < np; ++i) supply[i] = P.atoms[i].mass.num * (denom / P.atoms[i].mass.den);
    for (std::size_t j = 0; j < nq; ++j) demand[j] = Q.atoms[j].mass.num * (denom / Q.atoms[j].mass.den);

    std::vector<std::vector<double>> cost(np, std::vector<double>(nq));
    for (std::size_t i = 0; i < np; ++i)
        for (std::size_t j = 0; j < nq; ++j) cost[i][j] = d_z(P.atoms[i], Q.atoms[j]);

    // Exact min-cost flow by successive shortest augmenting paths
    // (Bellman-Ford on the residual network; costs do not depend on flow, so
    // each augmentation along a shortest path preserves optimality).
    const std::size_t src = np + nq, snk = np + nq + 1, nodes = np + nq + 2;
    struct Edge {
        std::size_t to;
        std::int64_t cap;
        double cost;
        std::size_t rev;
    };
    std::vector<std::vector<Edge>> g(nodes);
    auto add_edge = [&](std::size_t u, std::size_t v, std::int64_t cap, double c) {
        g[u].push_back({v, cap, c, g[v].size()});
        g[v].push_back({u, 0, -c, g[u].size() - 1});
    };
    for (std::size_t i = 0; i < np; ++i) add_edge(src, i, supply[i], 0.0);
    for (std::size_t j = 0; j < nq; ++j) add_edge(np + j, snk, demand[j], 0.0);
    for (std::size_t i = 0; i < np; ++i)
        for (std::size_t j = 0; j < nq; ++j) add_edge(i, np + j, supply[i], cost[i][j]);

    double total = 0.0;
    std::int64_t remaining = std::accumulate(supply.begin(), supply.end(), std::int64_t{0});
    while (remaining > 0) {
        const double inf = std::numeric_limits<double>::infinity();
        std::vector<double> d(nodes, inf);
        std::vector<std::size_t> pe(nodes, 0), pv(nodes, 0);
        d[src] = 0.0;
        for (std::size_t pass = 0; pass + 1 < nodes; ++pass) {
            bool changed = false;
            for (std::size_t u = 0; u < nodes; ++u) {
                if (d[u] == inf) continue;
                for (std::size_t k = 0; k < g[u].size(); ++k) {
                    const Edge& e = g[u][k];
                    if (e.cap > 0 && d[u] + e.cost < d[e.to] - 1e-15) {
                        d[e.to] = d[u] + e.cost;
                        pv[e.to] = u;
                        pe[e.to] = k;
                        changed = true;
                    }
                }
            }
            if (!changed) break;
        }
        if (d[snk] == inf) throw std::runtime_error("w1_discrete: infeasible transport");
        std::int64_t push = remaining;
        for (std::size_t v = snk; v != src; v = pv[v]) push = std::min(push, g[pv[v]][pe[v]].cap);
        for (std::size_t v = snk; v != src; v = pv[v]) {
            Edge& e = g[pv[v]][pe[v]];
            e.cap -= push;
            g[v][e.rev].cap += push;
        }
        total += d[snk] * static_cast<double>(push) / static_cast<double>(denom);
        remaining -= push;
    }
    return total;
}

EquivalenceReport verify_equivalence(const GammaInstance& inst, const NetworkParams& f,
                                     const LossSpec& loss) {
    EquivalenceReport rep;
    rep.lhs = adversarial_risk_discrete(f, loss, inst.base, inst.eps);
    rep.rhs = dp_sup_risk(f, loss, inst);
    rep.equal = std::abs(rep.lhs - rep.rhs) <= 1e-12;
    return rep;
}

}  // namespace advlab
