#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "advlab/rational.hpp"

namespace advlab {

/// Error-rate exponents as exact rationals in (d, alpha).
struct RateExponents {
    Rational r1, r2, r3, r4, r5;  // adversarial / L2 / epsilon-coefficient exponents
    Rational xi, lambda;          // log-power exponents
    Rational e_n_exponent;        // epsilon budget exponent for the Lipschitz case
    int gamma = 0;                // ceil(log2(d + r))
    int c_alpha_d = 0;            // 1 iff d = 2*alpha (log factor active)
};

enum class ScheduleTask { Lipschitz, Quadratic };

struct Schedule {
    Rational k_exponent;
    Rational wl_exponent;
    ScheduleTask task = ScheduleTask::Lipschitz;
    int gamma = 0;
};

/// alpha passed as an exact rational (numerator/denominator).
RateExponents rate_exponents(int d, Rational alpha);

Schedule schedule_exponents(int d, Rational alpha, ScheduleTask task);

/// n^exponent; exact integer value when n^num is a perfect den-th power.
double eval_power(std::int64_t n, Rational exponent);

/// (K, W*L) at sample size n with unit leading constants.
std::pair<double, double> schedule(std::int64_t n, int d, Rational alpha, ScheduleTask task);

/// C * W^2 L^2 log(W^2 L), natural log.
double pdim_bound(double W, double L, double C = 1.0);

/// C1 * W^2 L^2 log(W^2 L) * log(u^-1 n); throws when u >= n.
double covering_nn(double u, double W, double L, double n, double C1 = 1.0);

/// c * u^(-d/alpha).
double covering_holder(double u, int d, double alpha, double c = 1.0);

struct BallCoverCount {
    std::int64_t M = 0;
    double log_bound = 0.0;
};

/// ceil(eps/tau)^d from the constructive cover plus c*d*log(max(eps/tau, e)).
BallCoverCount ball_cover_count(double eps, double tau, int d, double c = 2.0);

struct DudleyResult {
    double value = 0.0;
    double delta = 0.0;  // grid argmin
};

/// inf over the delta grid of 4*delta + 12 * int_delta^B sqrt(entropy(u)/n) du
/// (trapezoid, >= 1000 panels). Throws when delta = 0 is requested and the
/// entropy grows too fast near 0 to be integrable.
DudleyResult dudley(const std::function<double(double)>& entropy, double B, double n,
                    const std::vector<double>& delta_grid, int panels = 2000);

struct GenAppBounds {
    double e_gen = 0.0;
    double e_app = 0.0;
};

/// Theorem-style generalization/approximation values with unit constants;
/// requires K > e so the log power is well defined.
GenAppBounds gen_app_bounds(double n, double W, double L, double K, double eps, int d, double alpha);

struct RademacherEstimate {
    double value = 0.0;
    double stderr_ = 0.0;
    bool exact = false;
};

/// E_sigma sup over rows of (1/n) sum_i sigma_i v_i. draws = 0 requests exact
/// enumeration (n <= 20 only); otherwise Monte Carlo with standard error.
RademacherEstimate empirical_rademacher(const std::vector<std::vector<double>>& value_matrix,
                                        std::size_t draws, std::uint64_t seed);

}  // namespace advlab
