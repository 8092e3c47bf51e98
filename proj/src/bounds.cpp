#include "advlab/bounds.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "advlab/rng.hpp"

namespace advlab {

namespace {

// ceil(log2(m)) for m >= 1
int ceil_log2(std::int64_t m) {
    int g = 0;
    std::int64_t v = 1;
    while (v < m) {
        v <<= 1;
        ++g;
    }
    return g;
}

// gamma = ceil(log2(d + r)) with alpha = r + beta, beta in (0, 1]
int gamma_of(int d, Rational alpha) {
    const std::int64_t r = (alpha.num + alpha.den - 1) / alpha.den - 1;  // ceil(alpha) - 1
    return ceil_log2(d + r);
}

Rational rational_max(Rational a, Rational b) { return a < b ? b : a; }

}  // namespace

RateExponents rate_exponents(int d, Rational alpha) {
    if (d < 1 || alpha < Rational{1}) throw std::invalid_argument("rate_exponents: need d >= 1, alpha >= 1");
    const std::int64_t p = alpha.num, q = alpha.den;
    RateExponents e;
    e.r1 = Rational{p, 2 * d * q + 3 * p};
    e.r2 = Rational{2 * p, 2 * d * q + 5 * p};
    e.r3 = Rational{(d - 1) * q + 3 * p, 2 * d * q + 3 * p};
    e.r4 = Rational{(d + 1) * q, 2 * d * q + 3 * p};
    e.r5 = Rational{(d + 1) * q, 2 * d * q + 5 * p};
    e.e_n_exponent = Rational{(d - 1) * q + 2 * p, 2 * d * q + 3 * p};
    e.gamma = gamma_of(d, alpha);
    e.xi = rational_max(Rational{1}, Rational{e.gamma * p, q * (d + 1)});
    e.lambda = rational_max(Rational{1}, Rational{2 * e.gamma * p, q * (d + 1)});
    e.c_alpha_d = (static_cast<std::int64_t>(d) * q == 2 * p) ? 1 : 0;
    return e;
}

Schedule schedule_exponents(int d, Rational alpha, ScheduleTask task) {
    if (d < 1 || alpha < Rational{1}) throw std::invalid_argument("schedule_exponents: need d >= 1, alpha >= 1");
    const std::int64_t p = alpha.num, q = alpha.den;
    Schedule s;
    s.task = task;
    s.gamma = gamma_of(d, alpha);
    if (task == ScheduleTask::Lipschitz) {
        s.k_exponent = Rational{(d + 1) * q, 2 * d * q + 3 * p};
        s.wl_exponent = Rational{2 * d * q + p, 4 * d * q + 6 * p};
    } else {
        s.k_exponent = Rational{(d + 1) * q, 2 * d * q + 5 * p};
        s.wl_exponent = Rational{2 * d * q + p, 4 * d * q + 10 * p};
    }
    return s;
}

double eval_power(std::int64_t n, Rational exponent) {
    if (n < 1) throw std::invalid_argument("eval_power: n must be >= 1");
    if (n == 1 || exponent.num == 0) return 1.0;
    // exact path: n^num a perfect den-th power
    if (exponent.num > 0) {
        long double pw = 1.0L;
        bool overflow = false;
        for (std::int64_t i = 0; i < exponent.num; ++i) {
            pw *= static_cast<long double>(n);
            if (pw > 9e17L) { overflow = true; break; }
        }
        if (!overflow) {
            const std::int64_t target = static_cast<std::int64_t>(pw + 0.5L);
            const std::int64_t root = static_cast<std::int64_t>(
                std::llround(std::pow(static_cast<double>(target), 1.0 / exponent.den)));
            for (std::int64_t cand : {root - 1, root, root + 1}) {
                if (cand < 1) continue;
                long double chk = 1.0L;
                for (std::int64_t i = 0; i < exponent.den && chk <= 9e17L; ++i) chk *= cand;
                if (chk == static_cast<long double>(target)) return static_cast<double>(cand);
            }
        }
    }
    return std::pow(static_cast<double>(n), exponent.to_double());
}

std::pair<double, double> schedule(std::int64_t n, int d, Rational alpha, ScheduleTask task) {
    const Schedule s = schedule_exponents(d, alpha, task);
    return {eval_power(n, s.k_exponent), eval_power(n, s.wl_exponent)};
}

double pdim_bound(double W, double L, double C) {
    if (W < 1.0 || L < 1.0 || !(C > 0.0)) throw std::invalid_argument("pdim_bound: bad arguments");
    return C * W * W * L * L * std::log(W * W * L);
}

double covering_nn(double u, double W, double L, double n, double C1) {
    if (!(u > 0.0) || n < 1.0) throw std::invalid_argument("covering_nn: need u > 0, n >= 1");
    if (u >= n) throw std::invalid_argument("covering_nn: u >= n makes the log nonpositive");
    return C1 * W * W * L * L * std::log(W * W * L) * std::log(n / u);
}

double covering_holder(double u, int d, double alpha, double c) {
    if (!(u > 0.0)) throw std::invalid_argument("covering_holder: u must be > 0");
    return c * std::pow(u, -static_cast<double>(d) / alpha);
}

BallCoverCount ball_cover_count(double eps, double tau, int d, double c) {
    if (!(tau > 0.0 && tau <= eps)) throw std::invalid_argument("ball_cover_count: need 0 < tau <= eps");
    const std::int64_t m = static_cast<std::int64_t>(std::ceil(eps / tau - 1e-12));
    BallCoverCount out;
    out.M = 1;
    for (int i = 0; i < d; ++i) out.M *= m;
    out.log_bound = c * d * std::log(std::max(eps / tau, std::exp(1.0)));
    return out;
}

DudleyResult dudley(const std::function<double(double)>& entropy, double B, double n,
                    const std::vector<double>& delta_grid, int panels) {
    if (delta_grid.empty()) throw std::invalid_argument("dudley: empty delta grid");
    if (panels < 1000) panels = 1000;
    const double u_floor = B * 1e-9;

    // A delta of 0 requires an integrable entropy near 0 (local power > -2).
    for (double delta : delta_grid) {
        if (delta == 0.0) {
            const double u1 = 1e-8, u2 = 2e-8;
            const double e1 = entropy(u1), e2 = entropy(u2);
            if (e1 > 0.0 && e2 > 0.0) {
                const double slope = std::log(e2 / e1) / std::log(u2 / u1);
                if (slope <= -2.0 + 1e-9)
                    throw std::invalid_argument("dudley: entropy not integrable near 0 with delta = 0");
            }
        }
    }

    DudleyResult best;
    best.value = std::numeric_limits<double>::infinity();
    for (double delta : delta_grid) {
        if (delta < 0.0 || delta > B) continue;
        const double lo = std::max(delta, u_floor);
        double integral = 0.0;
        if (lo < B) {
            const double h = (B - lo) / panels;
            auto g = [&](double u) { return std::sqrt(std::max(entropy(u), 0.0) / n); };
            double sum = 0.5 * (g(lo) + g(B));
            for (int i = 1; i < panels; ++i) sum += g(lo + i * h);
            integral = sum * h;
        }
        const double value = 4.0 * delta + 12.0 * integral;
        if (value < best.value) {
            best.value = value;
            best.delta = delta;
        }
    }
    if (!std::isfinite(best.value)) throw std::invalid_argument("dudley: no feasible delta in grid");
    return best;
}

GenAppBounds gen_app_bounds(double n, double W, double L, double K, double eps, int d, double alpha) {
    if (!(K > std::exp(1.0))) throw std::invalid_argument("gen_app_bounds: K must exceed e");
    if (n < 3.0) throw std::invalid_argument("gen_app_bounds: n must be >= 3");
    const int r = static_cast<int>(std::ceil(alpha)) - 1;
    const int gamma = ceil_log2(d + r);
    const int c_ad = (static_cast<double>(d) == 2.0 * alpha) ? 1 : 0;
    GenAppBounds out;
    out.e_gen = K * eps / n +
                W * L * std::sqrt(std::log(W * W * L)) / std::sqrt(n) * std::sqrt(std::log(n)) +
                std::pow(n, -std::min(0.5, alpha / d)) * std::pow(std::log(n), c_ad);
    out.e_app = std::pow(K / std::pow(std::log(K), gamma), -alpha / (d + 1.0));
    return out;
}

RademacherEstimate empirical_rademacher(const std::vector<std::vector<double>>& value_matrix,
                                        std::size_t draws, std::uint64_t seed) {
    if (value_matrix.empty() || value_matrix[0].empty())
        throw std::invalid_argument("empirical_rademacher: empty matrix");
    const std::size_t m = value_matrix.size();
    const std::size_t n = value_matrix[0].size();
    for (const auto& row : value_matrix)
        if (row.size() != n) throw std::invalid_argument("empirical_rademacher: ragged matrix");

    auto sup_for_signs = [&](auto&& sign_of) {
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t f = 0; f < m; ++f) {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) s += sign_of(i) * value_matrix[f][i];
            best = std::max(best, s / static_cast<double>(n));
        }
        return best;
    };

    RademacherEstimate est;
    if (draws == 0) {
        if (n > 20) throw std::invalid_argument("empirical_rademacher: exact enumeration needs n <= 20");
        const std::uint64_t total = 1ULL << n;
        double sum = 0.0;
        for (std::uint64_t mask = 0; mask < total; ++mask)
            sum += sup_for_signs([&](std::size_t i) { return (mask >> i) & 1 ? 1.0 : -1.0; });
        est.value = sum / static_cast<double>(total);
        est.exact = true;
        return est;
    }

    auto rng = make_rng(seed);
    std::bernoulli_distribution coin(0.5);
    std::vector<double> signs(n);
    double sum = 0.0, sumsq = 0.0;
    for (std::size_t k = 0; k < draws; ++k) {
        for (double& s : signs) s = coin(rng) ? 1.0 : -1.0;
        const double v = sup_for_signs([&](std::size_t i) { return signs[i]; });
        sum += v;
        sumsq += v * v;
    }
    est.value = sum / draws;
    const double var = std::max(0.0, sumsq / draws - est.value * est.value);
    est.stderr_ = std::sqrt(var / draws);
    return est;
}

}  // namespace advlab
