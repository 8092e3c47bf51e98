#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "advlab/losses.hpp"
#include "advlab/rng.hpp"

using namespace advlab;

TEST_CASE("loss_eval formulas") {
    CHECK(loss_eval(LossSpec::hinge(), 0.5, 1.0) == 0.5);
    CHECK(loss_eval(LossSpec::quadratic(1.0), 0.3, -0.2) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(loss_eval(LossSpec::zero_one(), 0.0, -1.0) == 1.0);  // sign(0) = +1
    CHECK(loss_eval(LossSpec::zero_one(), 0.0, 1.0) == 0.0);
    CHECK(loss_eval(LossSpec::rho_margin(0.5), 0.5, 1.0) == 0.0);
    CHECK(loss_eval(LossSpec::rho_margin(2.0), -10.0, 1.0) == 1.0);  // capped at 1
}

TEST_CASE("loss_deriv_u") {
    CHECK(loss_deriv_u(LossSpec::hinge(), 0.5, 1.0) == -1.0);
    CHECK(loss_deriv_u(LossSpec::hinge(), 2.0, 1.0) == 0.0);
    CHECK(loss_deriv_u(LossSpec::hinge(), 1.0, 1.0) == 0.0);  // kink convention
    CHECK(loss_deriv_u(LossSpec::quadratic(1.0), 0.3, -0.2) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK_THROWS(loss_deriv_u(LossSpec::zero_one(), 0.0, 1.0));
}

TEST_CASE("lip1 constants") {
    CHECK(lip1(LossSpec::hinge()) == 1.0);
    CHECK(lip1(LossSpec::rho_margin(0.5)) == 2.0);
    CHECK(lip1(LossSpec::quadratic(1.0)) == 4.0);
    CHECK_THROWS(lip1(LossSpec::zero_one()));
}

TEST_CASE("lip1 certifies Lipschitz continuity on random triples") {
    auto rng = make_rng(314);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (const LossSpec& spec :
         {LossSpec::hinge(), LossSpec::rho_margin(0.7), LossSpec::quadratic(1.0)}) {
        const double L = lip1(spec);
        int bad = 0;
        for (int t = 0; t < 100000; ++t) {
            const double u1 = u(rng), u2 = u(rng), y = u(rng);
            if (std::abs(loss_eval(spec, u1, y) - loss_eval(spec, u2, y)) >
                L * std::abs(u1 - u2) + 1e-12)
                ++bad;
        }
        CHECK(bad == 0);
    }
}

TEST_CASE("cphi_star") {
    const CalibrationGrid grid = CalibrationGrid::regular();
    CHECK(cphi_star(LossSpec::hinge(), 0.3, grid.alphas) == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(cphi_star(LossSpec::hinge(), 0.5, grid.alphas) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(cphi_star(LossSpec::hinge(), 0.0, grid.alphas) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK_THROWS(cphi_star(LossSpec::quadratic(1.0), 0.3, grid.alphas));
}

TEST_CASE("inner conditional risk envelopes") {
    const CalibrationGrid grid = CalibrationGrid::regular();
    for (double eta : grid.etas) {
        const double star = cphi_star(LossSpec::hinge(), eta, grid.alphas);
        for (double f : grid.fs) {
            CHECK(c_phi(LossSpec::hinge(), eta, f) >= star - 1e-9);
            // binary structure of the 0-1 inner risk
            const double gap = c_class(eta, f) - c_class_star(eta);
            const bool zero = std::abs(gap) < 1e-12;
            const bool jump = std::abs(gap - std::abs(2 * eta - 1)) < 1e-12;
            CHECK((zero || jump));
        }
        CHECK(c_class_star(eta) == doctest::Approx(std::min(eta, 1 - eta)).epsilon(1e-15));
    }
}

TEST_CASE("surrogate-vs-class excess inequality (constant a)") {
    const CalibrationGrid grid = CalibrationGrid::regular();
    const AssumptionReport hinge = check_assumption_41(LossSpec::hinge(), grid);
    CHECK(hinge.holds);
    CHECK(hinge.best_constant >= 1.0 - 1e-9);

    const AssumptionReport rho = check_assumption_41(LossSpec::rho_margin(1.0), grid);
    CHECK(rho.holds);
    CHECK(rho.best_constant > 0.0);

    CalibrationGrid degenerate;
    degenerate.etas = {0.5};
    degenerate.fs = {0.0};
    degenerate.alphas = {-1.0, 0.0, 1.0};
    const AssumptionReport vac = check_assumption_41(LossSpec::hinge(), degenerate);
    CHECK(vac.holds);
    CHECK(vac.best_constant == std::numeric_limits<double>::infinity());
}

TEST_CASE("margin-gap inequality at zero prediction (constant b)") {
    const CalibrationGrid grid = CalibrationGrid::regular();
    const AssumptionReport b1 = check_assumption_42(LossSpec::hinge(), 0.1, grid);
    CHECK(b1.holds);
    CHECK(b1.best_constant == doctest::Approx(1.0 / 3.0).epsilon(0.03));  // (1-2m)/(1-m), m=0.4

    const AssumptionReport b4 = check_assumption_42(LossSpec::hinge(), 0.4, grid);
    CHECK(b4.holds);
    CHECK(b4.best_constant == doctest::Approx(8.0 / 9.0).epsilon(0.03));  // m=0.1

    CalibrationGrid inside;
    inside.etas = {0.45, 0.5, 0.55};
    inside.fs = {0.0};
    inside.alphas = {-1.0, 0.0, 1.0};
    const AssumptionReport vac = check_assumption_42(LossSpec::hinge(), 0.2, inside);
    CHECK(vac.holds);
    CHECK(vac.best_constant == std::numeric_limits<double>::infinity());
}

// Worst-case (ball-extreme) conditional risks: with a = sup of f over the ball
// and b = inf, the adversarial surrogate gap phi(b)*eta + phi(-a)*(1-eta) - C*_phi
// dominates min(best_a, best_b) times the adversarial class gap
// 1{b<0}*eta + 1{a>=0}*(1-eta) - min(eta,1-eta), enumerated over the three sign
// cases (both >= 0, both < 0, straddling).
TEST_CASE("worst-case calibration inequality over interval extremes") {
    const CalibrationGrid grid = CalibrationGrid::regular();
    const LossSpec spec = LossSpec::hinge();
    const double c = 0.1;
    const double best_a = check_assumption_41(spec, grid).best_constant;
    const double best_b = check_assumption_42(spec, c, grid).best_constant;
    const double a_const = std::min(best_a, best_b);
    REQUIRE(a_const > 0.0);

    int checked[3] = {0, 0, 0};
    for (double eta : grid.etas) {
        if (std::abs(eta - 0.5) <= c) continue;
        const double star_phi = cphi_star(spec, eta, grid.alphas);
        const double star_class = std::min(eta, 1 - eta);
        for (double b : grid.fs)
            for (double a : grid.fs) {
                if (b > a) continue;  // b = inf over the ball, a = sup
                const double surr_gap =
                    margin_phi(spec, b) * eta + margin_phi(spec, -a) * (1 - eta) - star_phi;
                const double class_gap =
                    (b < 0 ? eta : 0.0) + (a >= 0 ? 1 - eta : 0.0) - star_class;
                REQUIRE(surr_gap >= a_const * class_gap - 1e-9);
                if (b >= 0)
                    ++checked[0];
                else if (a < 0)
                    ++checked[1];
                else
                    ++checked[2];
            }
    }
    CHECK(checked[0] > 0);  // all three sign cases were exercised
    CHECK(checked[1] > 0);
    CHECK(checked[2] > 0);
}

TEST_CASE("calibration report JSON mentions both constants") {
    const std::string json =
        calibration_report_json(LossSpec::hinge(), 0.1, CalibrationGrid::regular());
    CHECK(json.find("best_a") != std::string::npos);
    CHECK(json.find("best_b") != std::string::npos);
    CHECK(json.find("holds_41") != std::string::npos);
}

TEST_CASE("grid validation") {
    CalibrationGrid bad;
    bad.etas = {0.0, 1.5};  // out of range
    bad.fs = {0.0};
    bad.alphas = {-1.0, 0.0, 1.0};
    CHECK_THROWS(bad.validate());

    CalibrationGrid unsorted;
    unsorted.etas = {0.5};
    unsorted.fs = {0.0};
    unsorted.alphas = {1.0, -1.0, 0.0};  // must be sorted
    CHECK_THROWS(unsorted.validate());

    CalibrationGrid empty;
    empty.etas = {};
    empty.fs = {0.0};
    empty.alphas = {-1.0, 0.0, 1.0};
    CHECK_THROWS(empty.validate());
}
