#include "advlab/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "advlab/rng.hpp"

namespace advlab {

void AttackConfig::validate() const {
    if (eps < 0.0) throw std::invalid_argument("AttackConfig: eps must be >= 0");
    switch (method) {
        case AttackMethod::Cover:
            if (tau < 0.0) throw std::invalid_argument("AttackConfig: tau must be >= 0");
            break;
        case AttackMethod::Pgd:
            if (steps < 1 || restarts < 1 || step_size < 0.0)
                throw std::invalid_argument("AttackConfig: bad PGD parameters");
            break;
        case AttackMethod::Brute:
            if (!(resolution > 0.0)) throw std::invalid_argument("AttackConfig: resolution must be > 0");
            break;
        case AttackMethod::None:
            break;
    }
}

std::string AttackConfig::method_name() const {
    switch (method) {
        case AttackMethod::None: return "none";
        case AttackMethod::Cover: return "cover";
        case AttackMethod::Pgd: return "pgd";
        case AttackMethod::Brute: return "brute";
    }
    return "?";
}

Cover build_cover(double eps, double tau, int d, std::size_t budget) {
    if (!(tau > 0.0 && tau <= eps)) throw std::invalid_argument("build_cover: need 0 < tau <= eps");
    if (d < 1) throw std::invalid_argument("build_cover: d must be positive");
    const int m = static_cast<int>(std::ceil(eps / tau - 1e-12));
    double total = 1.0;
    for (int i = 0; i < d; ++i) total *= m;
    if (total > static_cast<double>(budget))
        throw std::runtime_error("build_cover: cardinality " + std::to_string(total) +
                                 " exceeds budget " + std::to_string(budget));

    std::vector<double> centers(m);
    for (int k = 0; k < m; ++k) centers[k] = std::min(-eps + tau * (2 * k + 1), eps - tau);

    Cover cov;
    cov.eps = eps;
    cov.tau = tau;
    cov.d = d;
    std::vector<int> idx(d, 0);
    std::vector<double> point(d);
    while (true) {
        for (int i = 0; i < d; ++i) point[i] = centers[idx[i]];
        cov.offsets.push_back(point);
        int i = d - 1;
        while (i >= 0 && ++idx[i] == m) idx[i--] = 0;
        if (i < 0) break;
    }
    return cov;
}

namespace {

void check_in_unit_cube(const std::vector<double>& p, const char* what) {
    for (double v : p)
        if (v < -1e-12 || v > 1.0 + 1e-12)
            throw std::runtime_error(std::string(what) + ": perturbed point leaves [0,1]^d");
}

AttackResult with_clean_fallback(const NetworkParams& f, const LossSpec& loss,
                                 const std::vector<double>& x, double y, AttackResult best) {
    const double clean = loss_eval(loss, forward(f, x), y);
    if (clean > best.value) {
        best.x_adv = x;
        best.value = clean;
    }
    return best;
}

}  // namespace

AttackResult attack_cover(const NetworkParams& f, const LossSpec& loss,
                          const std::vector<double>& x, double y, const Cover& cover) {
    if (static_cast<int>(x.size()) != cover.d)
        throw std::invalid_argument("attack_cover: dimension mismatch");
    AttackResult best;
    best.method = "cover";
    best.value = -1.0;
    std::vector<double> cand(x.size());
    for (const auto& delta : cover.offsets) {
        for (std::size_t i = 0; i < x.size(); ++i) cand[i] = x[i] + delta[i];
        check_in_unit_cube(cand, "attack_cover");
        const double v = loss_eval(loss, forward(f, cand), y);
        if (v > best.value) {
            best.value = v;
            best.x_adv = cand;
        }
    }
    return with_clean_fallback(f, loss, x, y, best);
}

AttackResult attack_pgd(const NetworkParams& f, const LossSpec& loss,
                        const std::vector<double>& x, double y, const AttackConfig& cfg,
                        std::uint64_t stream) {
    cfg.validate();
    if (loss.kind == LossKind::ZeroOne)
        throw std::invalid_argument("attack_pgd: zero-one loss has no gradient");
    AttackResult best;
    best.method = "pgd";
    best.x_adv = x;
    best.value = loss_eval(loss, forward(f, x), y);
    if (cfg.eps == 0.0) return best;

    const double step = cfg.step_size > 0.0 ? cfg.step_size : cfg.eps / 4.0;
    auto rng = make_rng(cfg.seed, stream);
    std::uniform_real_distribution<double> noise(-cfg.eps, cfg.eps);

    std::vector<double> cur(x.size());
    for (int r = 0; r < cfg.restarts; ++r) {
        for (std::size_t i = 0; i < x.size(); ++i)
            cur[i] = std::clamp(x[i] + noise(rng), x[i] - cfg.eps, x[i] + cfg.eps);
        for (int s = 0; s < cfg.steps; ++s) {
            const double u = forward(f, cur);
            const double dl = loss_deriv_u(loss, u, y);
            const Gradients g = backward(f, cur);
            for (std::size_t i = 0; i < cur.size(); ++i) {
                const double gi = dl * g.input[i];
                const double dir = gi > 0.0 ? 1.0 : (gi < 0.0 ? -1.0 : 0.0);
                cur[i] = std::clamp(cur[i] + step * dir, x[i] - cfg.eps, x[i] + cfg.eps);
            }
        }
        check_in_unit_cube(cur, "attack_pgd");
        const double v = loss_eval(loss, forward(f, cur), y);
        if (v > best.value) {
            best.value = v;
            best.x_adv = cur;
        }
    }
    return best;
}

AttackResult attack_brute(const NetworkParams& f, const LossSpec& loss,
                          const std::vector<double>& x, double y, double eps, double resolution) {
    const int d = static_cast<int>(x.size());
    if (d > 2) throw std::invalid_argument("attack_brute: supported only for d <= 2");
    if (!(resolution > 0.0)) throw std::invalid_argument("attack_brute: resolution must be > 0");
    const std::int64_t per_dim = static_cast<std::int64_t>(std::floor(2.0 * eps / resolution + 1e-12)) + 1;
    double total = 1.0;
    for (int i = 0; i < d; ++i) total *= static_cast<double>(per_dim);
    if (total > 1e7) throw std::runtime_error("attack_brute: grid size exceeds 1e7");

    AttackResult best;
    best.method = "brute";
    best.value = -1.0;
    std::vector<std::int64_t> idx(d, 0);
    std::vector<double> cand(d);
    while (true) {
        for (int i = 0; i < d; ++i)
            cand[i] = std::min(x[i] - eps + idx[i] * resolution, x[i] + eps);
        check_in_unit_cube(cand, "attack_brute");
        const double v = loss_eval(loss, forward(f, cand), y);
        if (v > best.value) {
            best.value = v;
            best.x_adv = cand;
        }
        int i = d - 1;
        while (i >= 0 && ++idx[i] == per_dim) idx[i--] = 0;
        if (i < 0) break;
    }
    return with_clean_fallback(f, loss, x, y, best);
}

double certified_gap(const LossSpec& loss, const NetworkParams& f, double tau) {
    return lip1(loss) * kappa(f) * tau;
}

AttackResult run_attack(const NetworkParams& f, const LossSpec& loss,
                        const std::vector<double>& x, double y, const AttackConfig& cfg,
                        std::size_t n, std::uint64_t stream) {
    cfg.validate();
    if (cfg.eps == 0.0 || cfg.method == AttackMethod::None) {
        AttackResult r;
        r.method = cfg.method_name();
        r.x_adv = x;
        r.value = loss_eval(loss, forward(f, x), y);
        return r;
    }
    switch (cfg.method) {
        case AttackMethod::Cover: {
            const double tau_default = cfg.eps / static_cast<double>(std::max<std::size_t>(n, 10));
            double tau = cfg.tau > 0.0 ? cfg.tau : tau_default;
            // grow tau until the cover fits the budget
            while (std::pow(std::ceil(cfg.eps / tau), x.size()) > 1e6) tau *= 2.0;
            return attack_cover(f, loss, x, y, build_cover(cfg.eps, tau, static_cast<int>(x.size())));
        }
        case AttackMethod::Pgd:
            return attack_pgd(f, loss, x, y, cfg, stream);
        case AttackMethod::Brute:
            return attack_brute(f, loss, x, y, cfg.eps, cfg.resolution);
        case AttackMethod::None:
            break;
    }
    throw std::logic_error("run_attack: unreachable");
}

std::pair<double, double> bracket_f(const NetworkParams& f, const std::vector<double>& x,
                                    const AttackConfig& cfg, std::size_t n, std::uint64_t stream) {
    cfg.validate();
    double lo = forward(f, x);
    double hi = lo;
    if (cfg.eps == 0.0 || cfg.method == AttackMethod::None) return {lo, hi};

    auto scan = [&](const std::vector<std::vector<double>>& offsets, bool absolute) {
        std::vector<double> cand(x.size());
        for (const auto& delta : offsets) {
            for (std::size_t i = 0; i < x.size(); ++i) cand[i] = x[i] + delta[i];
            if (absolute) check_in_unit_cube(cand, "bracket_f");
            const double v = forward(f, cand);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    };

    switch (cfg.method) {
        case AttackMethod::Cover: {
            const double tau_default = cfg.eps / static_cast<double>(std::max<std::size_t>(n, 10));
            const double tau = cfg.tau > 0.0 ? cfg.tau : tau_default;
            scan(build_cover(cfg.eps, tau, static_cast<int>(x.size())).offsets, true);
            break;
        }
        case AttackMethod::Brute: {
            const int d = static_cast<int>(x.size());
            if (d > 2) throw std::invalid_argument("bracket_f: brute supported only for d <= 2");
            const std::int64_t per_dim =
                static_cast<std::int64_t>(std::floor(2.0 * cfg.eps / cfg.resolution + 1e-12)) + 1;
            std::vector<std::int64_t> idx(d, 0);
            std::vector<double> cand(d);
            while (true) {
                for (int i = 0; i < d; ++i)
                    cand[i] = std::min(x[i] - cfg.eps + idx[i] * cfg.resolution, x[i] + cfg.eps);
                check_in_unit_cube(cand, "bracket_f");
                const double v = forward(f, cand);
                lo = std::min(lo, v);
                hi = std::max(hi, v);
                int i = d - 1;
                while (i >= 0 && ++idx[i] == per_dim) idx[i--] = 0;
                if (i < 0) break;
            }
            break;
        }
        case AttackMethod::Pgd: {
            const double step = cfg.step_size > 0.0 ? cfg.step_size : cfg.eps / 4.0;
            auto rng = make_rng(cfg.seed, stream);
            std::uniform_real_distribution<double> noise(-cfg.eps, cfg.eps);
            std::vector<double> cur(x.size());
            for (double direction : {+1.0, -1.0}) {
                for (int r = 0; r < cfg.restarts; ++r) {
                    for (std::size_t i = 0; i < x.size(); ++i)
                        cur[i] = std::clamp(x[i] + noise(rng), x[i] - cfg.eps, x[i] + cfg.eps);
                    for (int s = 0; s < cfg.steps; ++s) {
                        const Gradients g = backward(f, cur);
                        for (std::size_t i = 0; i < cur.size(); ++i) {
                            const double gi = direction * g.input[i];
                            const double dir = gi > 0.0 ? 1.0 : (gi < 0.0 ? -1.0 : 0.0);
                            cur[i] = std::clamp(cur[i] + step * dir, x[i] - cfg.eps, x[i] + cfg.eps);
                        }
                    }
                    const double v = forward(f, cur);
                    lo = std::min(lo, v);
                    hi = std::max(hi, v);
                }
            }
            break;
        }
        case AttackMethod::None:
            break;
    }
    return {lo, hi};
}

}  // namespace advlab
