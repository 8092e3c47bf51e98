#include "advlab/risk.hpp"

#include <cmath>
#include <stdexcept>

#include "advlab/rng.hpp"
#include "json.hpp"

namespace advlab {

std::string RiskReport::to_json() const {
    nlohmann::json j;
    j["natural"] = natural;
    j["adv_lower"] = adv_lower;
    j["adv_upper"] = adv_upper;
    j["n_eval"] = n_eval;
    j["attack"] = attack;
    j["loss"] = loss;
    return j.dump();
}

double natural_risk(const NetworkParams& f, const LossSpec& loss, const Dataset& data) {
    if (data.size() == 0) throw std::invalid_argument("natural_risk: empty dataset");
    double sum = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i)
        sum += loss_eval(loss, forward(f, data.X[i]), data.Y[i]);
    return sum / data.size();
}

double adversarial_risk_lower(const NetworkParams& f, const LossSpec& loss, const Dataset& data,
                              const AttackConfig& attack) {
    if (data.size() == 0) throw std::invalid_argument("adversarial_risk_lower: empty dataset");
    double sum = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i)
        sum += run_attack(f, loss, data.X[i], data.Y[i], attack, data.size(), i).value;
    return sum / data.size();
}

RiskReport sandwich(const NetworkParams& f, const LossSpec& loss, const Dataset& data,
                    const AttackConfig& attack) {
    RiskReport rep;
    rep.natural = natural_risk(f, loss, data);
    rep.adv_lower = adversarial_risk_lower(f, loss, data, attack);
    rep.adv_upper = rep.natural + lip1(loss) * kappa(f) * attack.eps;
    rep.n_eval = data.size();
    rep.attack = attack.method_name();
    rep.loss = loss.name();
    if (!(rep.natural <= rep.adv_lower + 1e-9 && rep.adv_lower <= rep.adv_upper + 1e-9))
        throw std::runtime_error("sandwich: ordering invariant violated");
    return rep;
}

double excess_adversarial(const NetworkParams& f, const LossSpec& loss, const Dataset& data_eval,
                          const AttackConfig& attack, double reference) {
    if (!std::isfinite(reference)) throw std::invalid_argument("excess_adversarial: reference must be finite");
    return adversarial_risk_lower(f, loss, data_eval, attack) - reference;
}

McEstimate l2_sq_distance(const NetworkParams& f, const HolderTarget& target, std::size_t mc_n,
                          double eps, std::uint64_t seed) {
    if (mc_n < 1) throw std::invalid_argument("l2_sq_distance: mc_n must be >= 1");
    auto rng = make_rng(seed);
    std::uniform_real_distribution<double> ux(eps, 1.0 - eps);
    double sum = 0.0, sumsq = 0.0;
    std::vector<double> x(target.d);
    for (std::size_t i = 0; i < mc_n; ++i) {
        for (double& v : x) v = ux(rng);
        const double diff = forward(f, x) - target.eval(x);
        const double sq = diff * diff;
        sum += sq;
        sumsq += sq * sq;
    }
    McEstimate est;
    est.value = sum / mc_n;
    const double var = std::max(0.0, sumsq / mc_n - est.value * est.value);
    est.stderr_ = std::sqrt(var / mc_n);
    return est;
}

double zero_one_adversarial(const NetworkParams& f, const Dataset& data, const AttackConfig& attack) {
    if (data.size() == 0) throw std::invalid_argument("zero_one_adversarial: empty dataset");
    double errors = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto [min_f, max_f] = bracket_f(f, data.X[i], attack, data.size(), i);
        const double y = data.Y[i];
        const bool flip = y > 0.0 ? min_f < 0.0 : max_f >= 0.0;
        if (flip) {
            errors += 1.0;
        } else {
            const double u = forward(f, data.X[i]);
            const double sign_u = u >= 0.0 ? 1.0 : -1.0;
            if (sign_u * y <= 0.0) errors += 1.0;
        }
    }
    return errors / data.size();
}

double w1_worst_case_upper(const RiskReport& report, const LossSpec& loss, double K, double eps) {
    return report.adv_upper + 2.0 * lip_joint(loss) * (K + 1.0) * eps;
}

}  // namespace advlab
