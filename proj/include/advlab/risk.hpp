#pragma once

#include <string>

#include "advlab/attacks.hpp"
#include "advlab/synth.hpp"

namespace advlab {

/// Empirical sandwich around the uncomputable adversarial risk:
/// natural <= adv_lower (attack estimate) <= adv_upper (Lipschitz certificate).
struct RiskReport {
    double natural = 0.0;
    double adv_lower = 0.0;
    double adv_upper = 0.0;
    std::size_t n_eval = 0;
    std::string attack;
    std::string loss;

    std::string to_json() const;
};

double natural_risk(const NetworkParams& f, const LossSpec& loss, const Dataset& data);

/// Mean of per-sample attack values; a lower bound of the empirical
/// adversarial risk since every attack returns a feasible point.
double adversarial_risk_lower(const NetworkParams& f, const LossSpec& loss, const Dataset& data,
                              const AttackConfig& attack);

RiskReport sandwich(const NetworkParams& f, const LossSpec& loss, const Dataset& data,
                    const AttackConfig& attack);

/// adv_lower(f) minus a supplied reference adversarial risk; may be slightly
/// negative due to estimation noise and is reported as-is.
double excess_adversarial(const NetworkParams& f, const LossSpec& loss, const Dataset& data_eval,
                          const AttackConfig& attack, double reference);

McEstimate l2_sq_distance(const NetworkParams& f, const HolderTarget& target, std::size_t mc_n,
                          double eps, std::uint64_t seed);

/// Lower estimate of the adversarial 0-1 risk from bracketed extremes of f
/// over each ball (sign flips witnessed by min f < 0 or max f >= 0).
double zero_one_adversarial(const NetworkParams& f, const Dataset& data, const AttackConfig& attack);

/// W1 local worst-case upper bound: adv_upper + 2 * lip_joint * (K+1) * eps.
double w1_worst_case_upper(const RiskReport& report, const LossSpec& loss, double K, double eps);

}  // namespace advlab
