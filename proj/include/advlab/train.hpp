#pragma once

#include <cstdint>
#include <vector>

#include "advlab/attacks.hpp"
#include "advlab/synth.hpp"

namespace advlab {

enum class LrSchedule { Constant, InvSqrt };

struct TrainConfig {
    int epochs = 20;
    int batch_size = 32;
    double lr = 0.05;
    LrSchedule lr_schedule = LrSchedule::Constant;
    AttackConfig attack;
    double K = 1.0;
    double clamp_M = 0.0;  // 0 disables the output clamp
    std::uint64_t seed = 0;

    void validate() const;
};

struct EpochRecord {
    int epoch = 0;
    double adv_risk_est = 0.0;
    double nat_risk = 0.0;
    double kappa = 0.0;
    double seconds = 0.0;
};

struct TrainHistory {
    std::vector<EpochRecord> epochs;
    std::string to_csv() const;  // epoch,adv_risk_est,nat_risk,kappa,seconds
};

/// One projected SGD step on the attacked batch loss (Danskin: x_adv is
/// treated as fixed when differentiating).
NetworkParams train_step(const NetworkParams& params,
                         const std::vector<std::size_t>& batch, const Dataset& data,
                         const LossSpec& loss, const AttackConfig& attack, double lr,
                         const NormBudget& K);

std::pair<NetworkParams, TrainHistory> adv_train(const Dataset& data, const Architecture& arch,
                                                 const TrainConfig& cfg, const LossSpec& loss);

/// Output clamp to [-M, M]; never increases the Lipschitz constant.
struct ClampedModel {
    NetworkParams params;
    double M = 1.0;

    double eval(const std::vector<double>& x) const;
    double kappa_certificate() const;
};

ClampedModel clamp_output(const NetworkParams& params, double M);

}  // namespace advlab
