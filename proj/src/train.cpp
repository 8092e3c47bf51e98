#include "advlab/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "advlab/risk.hpp"
#include "advlab/rng.hpp"

namespace advlab {

void TrainConfig::validate() const {
    if (epochs < 1) throw std::invalid_argument("TrainConfig: epochs must be >= 1");
    if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch size must be >= 1");
    if (!(lr > 0.0)) throw std::invalid_argument("TrainConfig: lr must be > 0");
    if (clamp_M < 0.0) throw std::invalid_argument("TrainConfig: clamp M must be positive when set");
    attack.validate();
    NormBudget{K};  // throws when K < 1
}

std::string TrainHistory::to_csv() const {
    std::ostringstream os;
    os.precision(17);
    os << "epoch,adv_risk_est,nat_risk,kappa,seconds\n";
    for (const EpochRecord& r : epochs)
        os << r.epoch << ',' << r.adv_risk_est << ',' << r.nat_risk << ',' << r.kappa << ','
           << r.seconds << '\n';
    return os.str();
}

NetworkParams train_step(const NetworkParams& params,
                         const std::vector<std::size_t>& batch, const Dataset& data,
                         const LossSpec& loss, const AttackConfig& attack, double lr,
                         const NormBudget& K) {
    if (batch.empty()) throw std::invalid_argument("train_step: empty batch");

    // Accumulate parameter gradients of l(f(x_adv), y) across the batch.
    Gradients acc = backward(params, data.X[batch[0]]);  // reuse shapes
    for (auto& m : acc.dA)
        for (auto& row : m) std::fill(row.begin(), row.end(), 0.0);
    for (auto& v : acc.db) std::fill(v.begin(), v.end(), 0.0);

    for (std::size_t idx : batch) {
        const AttackResult ar =
            run_attack(params, loss, data.X[idx], data.Y[idx], attack, data.size(), idx);
        const double u = forward(params, ar.x_adv);
        const double dl = loss_deriv_u(loss, u, data.Y[idx]);
        const Gradients g = backward(params, ar.x_adv);
        for (std::size_t i = 0; i < g.dA.size(); ++i) {
            for (std::size_t r = 0; r < g.dA[i].size(); ++r)
                for (std::size_t c = 0; c < g.dA[i][r].size(); ++c)
                    acc.dA[i][r][c] += dl * g.dA[i][r][c];
            for (std::size_t r = 0; r < g.db[i].size(); ++r) acc.db[i][r] += dl * g.db[i][r];
        }
    }

    NetworkParams out = params;
    const double step = lr / static_cast<double>(batch.size());
    for (std::size_t i = 0; i < out.layers.size(); ++i) {
        for (std::size_t r = 0; r < out.layers[i].A.size(); ++r)
            for (std::size_t c = 0; c < out.layers[i].A[r].size(); ++c)
                out.layers[i].A[r][c] -= step * acc.dA[i][r][c];
        for (std::size_t r = 0; r < out.layers[i].b.size(); ++r)
            out.layers[i].b[r] -= step * acc.db[i][r];
    }
    return project_kappa(out, K);
}

std::pair<NetworkParams, TrainHistory> adv_train(const Dataset& data, const Architecture& arch,
                                                 const TrainConfig& cfg, const LossSpec& loss) {
    cfg.validate();
    data.validate();
    if (arch.input_dim != data.d) throw std::invalid_argument("adv_train: architecture/data dim mismatch");
    const NormBudget budget{cfg.K};
    NetworkParams params = random_params(arch, cfg.seed, budget);

    TrainHistory history;
    auto rng = make_rng(cfg.seed, 0xadu);
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), 0);

    std::size_t step_count = 0;
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
            const std::vector<std::size_t> batch(order.begin() + start, order.begin() + stop);
            ++step_count;
            const double lr = cfg.lr_schedule == LrSchedule::InvSqrt
                                  ? cfg.lr / std::sqrt(static_cast<double>(step_count))
                                  : cfg.lr;
            params = train_step(params, batch, data, loss, cfg.attack, lr, budget);
        }
        EpochRecord rec;
        rec.epoch = epoch;
        rec.nat_risk = natural_risk(params, loss, data);
        rec.adv_risk_est = cfg.attack.eps > 0.0
                               ? adversarial_risk_lower(params, loss, data, cfg.attack)
                               : rec.nat_risk;
        rec.kappa = kappa(params);
        rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (rec.kappa > cfg.K * (1.0 + 1e-9))
            throw std::runtime_error("adv_train: kappa feasibility violated");
        history.epochs.push_back(rec);
    }
    return {params, history};
}

double ClampedModel::eval(const std::vector<double>& x) const {
    return std::clamp(forward(params, x), -M, M);
}

double ClampedModel::kappa_certificate() const {
    return kappa(params);  // clamping never increases the Lipschitz constant
}

ClampedModel clamp_output(const NetworkParams& params, double M) {
    if (!(M > 0.0)) throw std::invalid_argument("clamp_output: M must be positive");
    return ClampedModel{params, M};
}

}  // namespace advlab
