#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "advlab/risk.hpp"
#include "advlab/rng.hpp"
#include "advlab/train.hpp"

using namespace advlab;

namespace {

NetworkParams linear_net(double w) {
    NetworkParams p;
    p.arch.input_dim = 1;
    p.layers.push_back(Layer{{{w}}, {}});
    return p;
}

Dataset manual_dataset(const std::vector<double>& xs, const std::vector<double>& ys,
                       double eps = 0.1) {
    Dataset d;
    d.d = 1;
    d.eps = eps;
    d.generator = "manual";
    for (double x : xs) d.X.push_back({x});
    d.Y = ys;
    return d;
}

Dataset linear_target_data(std::size_t n, double slope, std::uint64_t seed, bool clip = false) {
    Dataset d;
    d.d = 1;
    d.eps = 0.1;
    d.generator = "manual";
    auto rng = make_rng(seed);
    std::uniform_real_distribution<double> u(0.1, 0.9);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = u(rng);
        double y = slope * (clip ? x - 0.5 : x);
        if (clip) y = std::max(-0.9, std::min(0.9, y));
        d.X.push_back({x});
        d.Y.push_back(y);
    }
    return d;
}

}  // namespace

TEST_CASE("train_step basics") {
    const Dataset d = manual_dataset({0.4}, {0.3});
    AttackConfig none;
    none.eps = 0.0;
    none.method = AttackMethod::None;

    // lr = 0 leaves a feasible model unchanged
    const NetworkParams before = linear_net(0.5);
    const NetworkParams after0 =
        train_step(before, {0}, d, LossSpec::quadratic(1.0), none, 0.0, NormBudget{4.0});
    CHECK(after0.layers[0].A[0][0] == 0.5);

    // hand gradient for the linear 1-d quadratic case: dw = 2 (w x - y) x
    const double w = 0.5, x = 0.4, y = 0.3, lr = 0.1;
    const NetworkParams after =
        train_step(linear_net(w), {0}, d, LossSpec::quadratic(1.0), none, lr, NormBudget{4.0});
    const double expect = w - lr * 2.0 * (w * x - y) * x;
    CHECK(after.layers[0].A[0][0] == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("train_step with eps = 0 attack equals a clean step") {
    const Dataset d = manual_dataset({0.3, 0.6, 0.8}, {0.1, -0.2, 0.4});
    Architecture arch{1, {4}};
    const NetworkParams init = random_params(arch, 55);

    AttackConfig none;
    none.eps = 0.0;
    none.method = AttackMethod::None;
    AttackConfig pgd0;
    pgd0.eps = 0.0;
    pgd0.method = AttackMethod::Pgd;

    const NetworkParams a =
        train_step(init, {0, 1, 2}, d, LossSpec::quadratic(1.0), none, 0.05, NormBudget{4.0});
    const NetworkParams b =
        train_step(init, {0, 1, 2}, d, LossSpec::quadratic(1.0), pgd0, 0.05, NormBudget{4.0});
    CHECK(to_json(a) == to_json(b));
}

TEST_CASE("adv_train fits a linear target to high accuracy (clean)") {
    const Dataset data = linear_target_data(64, 0.5, 7);
    Architecture arch{1, {8}};
    TrainConfig cfg;
    cfg.epochs = 400;
    cfg.batch_size = 16;
    cfg.lr = 0.1;
    cfg.lr_schedule = LrSchedule::Constant;
    cfg.attack.eps = 0.0;
    cfg.attack.method = AttackMethod::None;
    cfg.K = 4.0;
    cfg.seed = 3;
    const auto [params, history] = adv_train(data, arch, cfg, LossSpec::quadratic(1.0));
    CHECK(history.epochs.back().nat_risk <= 1e-3);
    CHECK(kappa(params) <= 4.0 * (1 + 1e-9));
}

TEST_CASE("capacity throttling: K = 1 underfits a steep target vs K = 32") {
    const Dataset data = linear_target_data(96, 4.0, 9, /*clip=*/true);
    Architecture arch{1, {8}};
    TrainConfig cfg;
    cfg.epochs = 200;
    cfg.batch_size = 16;
    cfg.lr = 0.05;
    cfg.attack.eps = 0.0;
    cfg.attack.method = AttackMethod::None;
    cfg.seed = 4;

    cfg.K = 1.0;
    const double small_k = adv_train(data, arch, cfg, LossSpec::quadratic(1.0)).second.epochs.back().nat_risk;
    cfg.K = 32.0;
    const double big_k = adv_train(data, arch, cfg, LossSpec::quadratic(1.0)).second.epochs.back().nat_risk;
    CHECK(small_k > big_k);
}

TEST_CASE("determinism: same seed gives bit-identical history and params") {
    const Dataset data = linear_target_data(32, 0.5, 12);
    Architecture arch{1, {6}};
    TrainConfig cfg;
    cfg.epochs = 10;
    cfg.batch_size = 8;
    cfg.lr = 0.05;
    cfg.attack.eps = 0.03;
    cfg.attack.method = AttackMethod::Pgd;
    cfg.attack.steps = 5;
    cfg.attack.restarts = 1;
    cfg.K = 4.0;
    cfg.seed = 21;
    const auto [p1, h1] = adv_train(data, arch, cfg, LossSpec::quadratic(1.0));
    const auto [p2, h2] = adv_train(data, arch, cfg, LossSpec::quadratic(1.0));
    CHECK(to_json(p1) == to_json(p2));
    REQUIRE(h1.epochs.size() == h2.epochs.size());
    for (std::size_t i = 0; i < h1.epochs.size(); ++i) {
        CHECK(h1.epochs[i].nat_risk == h2.epochs[i].nat_risk);
        CHECK(h1.epochs[i].adv_risk_est == h2.epochs[i].adv_risk_est);
        CHECK(h1.epochs[i].kappa == h2.epochs[i].kappa);
    }
}

TEST_CASE("eps = 0 adversarial training is bit-identical to clean training") {
    const Dataset data = linear_target_data(48, 0.5, 17);
    Architecture arch{1, {6}};
    TrainConfig clean;
    clean.epochs = 12;
    clean.batch_size = 8;
    clean.lr = 0.05;
    clean.attack.eps = 0.0;
    clean.attack.method = AttackMethod::None;
    clean.K = 4.0;
    clean.seed = 33;
    TrainConfig adv = clean;
    adv.attack.method = AttackMethod::Pgd;  // still eps = 0

    const auto [pc, hc] = adv_train(data, arch, clean, LossSpec::quadratic(1.0));
    const auto [pa, ha] = adv_train(data, arch, adv, LossSpec::quadratic(1.0));
    CHECK(to_json(pc) == to_json(pa));
    REQUIRE(hc.epochs.size() == ha.epochs.size());
    for (std::size_t i = 0; i < hc.epochs.size(); ++i) {
        CHECK(hc.epochs[i].nat_risk == ha.epochs[i].nat_risk);
        CHECK(hc.epochs[i].adv_risk_est == ha.epochs[i].adv_risk_est);
        CHECK(hc.epochs[i].kappa == ha.epochs[i].kappa);
    }
}

TEST_CASE("feasibility after every epoch") {
    const HolderTarget t = make_holder_target(1, 1.0, 4, 19);
    const Dataset data = sample_regression(t, 0.1, 64, 0.1, 23);
    Architecture arch{1, {6}};
    TrainConfig cfg;
    cfg.epochs = 15;
    cfg.batch_size = 16;
    cfg.lr = 0.1;
    cfg.attack.eps = 0.05;
    cfg.attack.method = AttackMethod::Pgd;
    cfg.attack.steps = 5;
    cfg.attack.restarts = 1;
    cfg.K = 2.0;
    cfg.seed = 5;
    const auto [params, history] = adv_train(data, arch, cfg, LossSpec::quadratic(2.0));
    for (const EpochRecord& r : history.epochs) CHECK(r.kappa <= cfg.K * (1 + 1e-9));
    CHECK(kappa(params) <= cfg.K * (1 + 1e-9));
}

TEST_CASE("adversarial risk estimate mostly non-increasing over epochs") {
    const HolderTarget t = make_holder_target(1, 1.0, 4, 29);
    const Dataset data = sample_regression(t, 0.05, 128, 0.1, 31);
    Architecture arch{1, {8}};
    TrainConfig cfg;
    cfg.epochs = 30;
    cfg.batch_size = 32;
    cfg.lr = 0.05;
    cfg.lr_schedule = LrSchedule::InvSqrt;
    cfg.attack.eps = 0.03;
    cfg.attack.method = AttackMethod::Cover;
    cfg.attack.tau = 0.01;
    cfg.K = 4.0;
    cfg.seed = 8;
    const auto [params, history] = adv_train(data, arch, cfg, LossSpec::quadratic(2.0));
    int ok = 0, total = 0;
    for (std::size_t i = 1; i < history.epochs.size(); ++i) {
        ++total;
        if (history.epochs[i].adv_risk_est <= history.epochs[i - 1].adv_risk_est + 1e-12) ++ok;
    }
    CHECK(ok >= (total * 8) / 10);
    (void)params;
}

TEST_CASE("clamp_output") {
    // in-range function unchanged
    const NetworkParams lin = linear_net(0.5);  // outputs in [0, 0.5] on [0,1]
    const ClampedModel inside = clamp_output(lin, 1.0);
    for (double x : {0.0, 0.3, 0.9})
        CHECK(inside.eval({x}) == doctest::Approx(forward(lin, {x})).epsilon(1e-15));

    // constant 2M clamps to M
    NetworkParams big;
    big.arch.input_dim = 1;
    big.arch.hidden_widths = {1};
    big.layers.push_back(Layer{{{0.0}}, {2.0}});
    big.layers.push_back(Layer{{{1.0}}, {}});
    const ClampedModel clamped = clamp_output(big, 1.0);
    for (double x : {0.1, 0.5, 0.9}) CHECK(clamped.eval({x}) == doctest::Approx(1.0).epsilon(1e-15));

    // clamping never increases the Lipschitz certificate
    Architecture arch{1, {5}};
    const NetworkParams f = random_params(arch, 61);
    const ClampedModel cm = clamp_output(f, 0.2);
    CHECK(cm.kappa_certificate() <= kappa(f) + 1e-12);
    // and never increases pairwise slopes on samples
    auto rng = make_rng(62);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 500; ++k) {
        const double x1 = u(rng), x2 = u(rng);
        if (std::abs(x1 - x2) < 1e-9) continue;
        const double raw = std::abs(forward(f, {x1}) - forward(f, {x2}));
        const double cl = std::abs(cm.eval({x1}) - cm.eval({x2}));
        CHECK(cl <= raw + 1e-12);
    }

    CHECK_THROWS(clamp_output(f, 0.0));
}

TEST_CASE("config validation") {
    TrainConfig bad;
    bad.epochs = 0;
    CHECK_THROWS(bad.validate());
    TrainConfig bad2;
    bad2.lr = 0.0;
    CHECK_THROWS(bad2.validate());
    TrainConfig ok;
    CHECK_NOTHROW(ok.validate());
}

TEST_CASE("history CSV layout") {
    TrainHistory h;
    h.epochs.push_back({1, 0.5, 0.25, 2.0, 0.01});
    const std::string csv = h.to_csv();
    CHECK(csv.find("epoch,adv_risk_est,nat_risk,kappa,seconds") == 0);
    CHECK(csv.find("\n1,") != std::string::npos);
}
